"""High-accuracy time differentiation of sampled quantities.

This is the oracle behind every "rate of change" claim the harness
checks: central differences with step halving plus Richardson
extrapolation, with an a-posteriori error estimate from the last
extrapolation correction.  It works elementwise on array-valued samplers
(used to differentiate whole fields pointwise in time).
"""
from __future__ import annotations

import numpy as np


def default_h0(t0: float) -> float:
    return 1e-3 * max(1.0, abs(t0))


def richardson_time_derivative(sampler, t0: float, h0: float | None = None,
                               levels: int = 3):
    """d/dt of sampler at t0.

    sampler : callable t -> float or ndarray, evaluable on
        [t0 - h0, t0 + h0].
    levels : number of Richardson extrapolation stages; the table has
        levels + 1 rows of central differences at steps h0 / 2^j.  With
        one stage the scheme is 4th order; each further stage adds two.

    Returns (value, error_estimate); the estimate is the magnitude of the
    final extrapolation correction, a conservative bound on smooth data.
    """
    if h0 is None:
        h0 = default_h0(t0)
    if h0 <= 0:
        raise ValueError("h0 must be positive")
    if levels < 1:
        raise ValueError("need at least one Richardson level")

    rows = []
    for j in range(levels + 1):
        h = h0 / 2.0**j
        d = (np.asarray(sampler(t0 + h)) - np.asarray(sampler(t0 - h))) / (2.0 * h)
        rows.append(d)

    table = [rows]
    for m in range(1, levels + 1):
        fac = 4.0**m
        prev = table[-1]
        table.append([(fac * prev[j + 1] - prev[j]) / (fac - 1.0)
                      for j in range(len(prev) - 1)])

    best = table[-1][0]
    prev_best = table[-2][-1]
    err = np.max(np.abs(best - prev_best))
    if np.ndim(best) == 0:
        return float(best), float(err)
    return best, float(err)
