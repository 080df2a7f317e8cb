"""Pointwise multilinear algebra over a single tangent space.

All functions accept plain numpy arrays; most also work batched over
leading axes (shape (..., n, n)).  Dense storage only: the dimensions of
interest are small (3 and 5), so sparsity or symmetry packing would cost
more than it saves.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveDefinite, ShapeMismatch

EPS_PD = 1e-12  # default threshold on the smallest metric eigenvalue


def sym_with_asym(a: np.ndarray) -> tuple[np.ndarray, float]:
    """Symmetrize the trailing two axes; also return the max asymmetry.

    Inputs declared symmetric are passed through here before use so that
    finite-difference noise cannot silently break solver assumptions; the
    recorded magnitude lets callers log how asymmetric the input was.
    """
    at = np.swapaxes(a, -1, -2)
    sym = 0.5 * (a + at)
    asym = float(np.max(np.abs(a - at))) if a.size else 0.0
    return sym, asym


def metric_inverse_det(g: np.ndarray, eps_pd: float = EPS_PD) -> tuple[np.ndarray, float]:
    """Inverse and determinant of a single SPD metric at a point.

    Raises NonPositiveDefinite if the smallest eigenvalue is <= eps_pd,
    which signals a degenerate metric (e.g. a flow running into a
    singularity at desk scale).
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ShapeMismatch(f"metric must be square, got {g.shape}")
    gs, _ = sym_with_asym(g)
    w = np.linalg.eigvalsh(gs)
    if w[0] <= eps_pd:
        raise NonPositiveDefinite(f"smallest metric eigenvalue {w[0]:.3e} <= {eps_pd:.1e}")
    return np.linalg.inv(gs), float(np.prod(w))


def contract_tensors(a: np.ndarray, b: np.ndarray, g: np.ndarray) -> float:
    """Full metric contraction <A,B> = A_ij B_kl g^ik g^jl of two (0,2)-tensors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.shape != np.asarray(g).shape:
        raise ShapeMismatch(f"shapes {a.shape}, {b.shape} vs metric {np.asarray(g).shape}")
    ginv, _ = metric_inverse_det(g)
    return float(np.einsum("ij,kl,ik,jl->", a, b, ginv, ginv))


def trace_g(a: np.ndarray, g: np.ndarray) -> float:
    """Metric trace of a (0,2)-tensor: g^ij A_ij (= <A, g>)."""
    ginv, _ = metric_inverse_det(g)
    return float(np.einsum("ij,ij->", ginv, np.asarray(a, dtype=float)))


def raise_lower(a: np.ndarray, slot: int, direction: str, g: np.ndarray) -> np.ndarray:
    """Raise or lower one index slot of a tensor with the metric.

    ``direction`` is "raise" (contract with g^-1) or "lower" (contract
    with g).  The slot refers to an axis of the component array; callers
    track the variance bookkeeping themselves.
    """
    a = np.asarray(a, dtype=float)
    if not (0 <= slot < a.ndim):
        raise ShapeMismatch(f"slot {slot} invalid for rank-{a.ndim} tensor")
    if direction == "raise":
        m, _ = metric_inverse_det(g)
    elif direction == "lower":
        m, _ = sym_with_asym(np.asarray(g, dtype=float))
    else:
        raise ValueError(f"direction must be 'raise' or 'lower', got {direction!r}")
    return np.moveaxis(np.tensordot(m, a, axes=([1], [slot])), 0, slot)


@dataclass
class PointMetric:
    """A symmetric positive-definite metric at one point."""

    components: np.ndarray
    eps_pd: float = EPS_PD
    asymmetry: float = field(init=False)

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        if comps.ndim != 2 or comps.shape[0] != comps.shape[1]:
            raise ShapeMismatch(f"metric components must be (n, n), got {comps.shape}")
        self.components, self.asymmetry = sym_with_asym(comps)

    @property
    def dim(self) -> int:
        return self.components.shape[0]

    def inverse_det(self) -> tuple[np.ndarray, float]:
        return metric_inverse_det(self.components, self.eps_pd)


@dataclass
class PointTensor:
    """Dense tensor components at one point with explicit variance ranks."""

    covariant_rank: int
    contravariant_rank: int
    components: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        rank = self.covariant_rank + self.contravariant_rank
        if comps.ndim != rank:
            raise ShapeMismatch(f"rank {rank} tensor needs {rank} axes, got {comps.ndim}")
        if rank and len(set(comps.shape)) != 1:
            raise ShapeMismatch(f"all axes must share the dimension, got {comps.shape}")
        self.components = comps

    @property
    def dim(self) -> int:
        return self.components.shape[0] if self.components.ndim else 0


def batched_inverse(g: np.ndarray) -> np.ndarray:
    """Inverse over leading batch axes without the SPD gate (hot paths
    validate separately, once per step rather than once per call)."""
    return np.linalg.inv(g)


def batched_min_eig(g: np.ndarray) -> float:
    """Smallest eigenvalue over a batch of symmetric matrices."""
    return float(np.linalg.eigvalsh(g)[..., 0].min())


def batched_spd_check(g: np.ndarray, eps_pd: float = EPS_PD) -> None:
    """Cheap SPD validation over a batch via leading principal minors
    (n <= 3) or Cholesky (general n)."""
    n = g.shape[-1]
    if n <= 3:
        d1 = g[..., 0, 0]
        ok = d1 > eps_pd
        if n >= 2:
            d2 = d1 * g[..., 1, 1] - g[..., 0, 1] ** 2
            ok &= d2 > 0
        if n == 3:
            d3 = np.linalg.det(g)
            ok &= d3 > 0
        if not bool(np.all(ok)):
            raise NonPositiveDefinite("metric lost positive-definiteness on the grid")
    else:
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError as exc:
            raise NonPositiveDefinite("metric lost positive-definiteness on the grid") from exc
