"""Elementary functions that accept floats, numpy arrays and Taylor jets.

Preset field evaluators are written against this module so the same
closed form serves three purposes: vectorized grid sampling (ndarray),
plain pointwise evaluation (float) and exact jet propagation
(TaylorScalar).
"""
import numpy as np

from .taylor import TaylorScalar


def _dispatch(name, np_fn):
    def fn(x):
        if isinstance(x, TaylorScalar):
            return getattr(x, name)()
        return np_fn(x)

    fn.__name__ = name
    return fn


sin = _dispatch("sin", np.sin)
cos = _dispatch("cos", np.cos)
exp = _dispatch("exp", np.exp)
log = _dispatch("log", np.log)
sqrt = _dispatch("sqrt", np.sqrt)
tanh = _dispatch("tanh", np.tanh)
