"""Smooth fields on tori and box charts, with two backends.

* analytic: a closed-form evaluator written against :mod:`starlab.mathfns`;
  derivatives come from forward-mode Taylor jets and are exact to roundoff.
* grid: periodic samples on an even uniform grid; derivatives are spectral
  and exact for trigonometric polynomials below the Nyquist mode.

The hot flow paths do not use Field objects; they use the packed-array
helpers at the bottom of this module (one batched FFT for all metric
components and derivative multi-indices per stage).
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from inspect import signature

import numpy as np
import scipy.fft as sfft

from . import taylor
from .domain import Domain
from .errors import ConfigError, InsufficientJet, NonPositiveDefinite
from .tensor import batched_spd_check

MAX_JET_ORDER = 4


def fft_workers() -> int:
    """Worker cap for batched FFTs, from STARLAB_THREADS.

    pocketfft splits batched transforms across threads without changing
    any per-transform arithmetic, so results are bitwise identical for
    every worker count (verified by test_determinism).
    """
    env = os.environ.get("STARLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"STARLAB_THREADS must be an integer, got {env!r}")
    return min(os.cpu_count() or 1, 8)


@dataclass
class Jet:
    """Value and partial derivatives of one field at one point.

    comps[m] has shape cshape + (dim,)*m and is symmetric in the trailing
    m derivative axes.
    """

    order: int
    dim: int
    comps: list[np.ndarray]

    @property
    def value(self) -> np.ndarray:
        return self.comps[0]

    def deriv(self, m: int) -> np.ndarray:
        if m > self.order:
            raise InsufficientJet(f"jet holds order {self.order}, order {m} requested")
        return self.comps[m]


class Field:
    """A scalar/vector/tensor field with an analytic or grid backend."""

    def __init__(self, domain: Domain, cshape: tuple[int, ...], backend: str,
                 fn=None, values: np.ndarray | None = None, tdep: bool = False,
                 name: str = ""):
        self.domain = domain
        self.cshape = cshape
        self.backend = backend
        self.name = name
        self.tdep = tdep
        self._fn = fn
        self._values = values
        self._spectrum = None
        if backend == "grid":
            if values is None:
                raise ConfigError("grid backend needs sample values")
            if not domain.is_torus:
                raise ConfigError("grid fields require a torus domain")
            ngrid = values.shape[0]
            expect = (ngrid,) * domain.dim + cshape
            if values.shape != expect:
                raise ConfigError(f"grid values shape {values.shape}, expected {expect}")
            if ngrid % 2 != 0:
                raise ConfigError("grid resolution must be even")

    # -- constructors --------------------------------------------------
    @classmethod
    def analytic(cls, domain: Domain, fn, cshape=(), name: str = "") -> "Field":
        tdep = len(signature(fn).parameters) >= 2
        return cls(domain, tuple(cshape), "analytic", fn=fn, tdep=tdep, name=name)

    @classmethod
    def from_grid(cls, domain: Domain, values: np.ndarray, name: str = "") -> "Field":
        values = np.asarray(values, dtype=float)
        cshape = values.shape[domain.dim:]
        return cls(domain, cshape, "grid", values=values, name=name)

    @property
    def n_grid(self) -> int:
        if self.backend != "grid":
            raise ConfigError("n_grid only defined on grid fields")
        return self._values.shape[0]

    # -- evaluation ----------------------------------------------------
    def _call(self, x, t):
        if self.tdep:
            return self._fn(x, t)
        return self._fn(x)

    def values(self, pts: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Evaluate at points of shape (..., dim); analytic backend only."""
        if self.backend != "analytic":
            raise ConfigError("values() at arbitrary points needs the analytic backend")
        pts = np.asarray(pts, dtype=float)
        coords = [pts[..., i] for i in range(self.domain.dim)]
        raw = self._call(coords, t)
        return _assemble(raw, self.cshape, pts.shape[:-1])

    def sample(self, n_grid: int, t: float = 0.0) -> np.ndarray:
        """Values on the full torus grid, shape (N,)*dim + cshape."""
        if self.backend == "grid":
            if n_grid != self.n_grid:
                raise ConfigError("grid field sampled at a different resolution")
            return self._values
        mesh = self.domain.mesh(n_grid)
        raw = self._call(mesh, t)
        return _assemble(raw, self.cshape, mesh[0].shape)

    def grid_values(self) -> np.ndarray:
        if self.backend != "grid":
            raise ConfigError("grid_values() needs the grid backend")
        return self._values

    def jet(self, point, order: int, t: float = 0.0) -> Jet:
        """Full derivative jet at one point (exact analytic or spectral)."""
        if order > MAX_JET_ORDER:
            raise InsufficientJet(f"jet order {order} > {MAX_JET_ORDER} unsupported")
        point = [float(v) for v in point]
        if not self.domain.contains(point):
            raise ConfigError(f"point {point} outside the analytic box")
        if self.backend == "analytic":
            xs = taylor.seed(point, order)
            raw = self._call(xs, t)
            return _jet_from_taylor(raw, self.cshape, order, self.domain.dim)
        return self._grid_jet(point, order)

    def taylor_components(self, point, order: int, t: float = 0.0) -> np.ndarray:
        """Components as TaylorScalars (object array), for callers that
        keep computing with jets instead of extracting derivatives."""
        if self.backend != "analytic":
            raise ConfigError("taylor_components needs the analytic backend")
        xs = taylor.seed([float(v) for v in point], order)
        raw = self._call(xs, t)
        return _object_components(raw, self.cshape)

    def _grid_jet(self, point, order: int) -> Jet:
        # trigonometric interpolation: f(x) = (1/N^n) sum_k c_k e^{i k.x}
        n = self.domain.dim
        N = self.n_grid
        if self._spectrum is None:
            axes = tuple(range(n))
            self._spectrum = np.fft.fftn(self._values, axes=axes)
        ks = self.domain.wavenumbers(N)
        phase = np.ones((N,) * n, dtype=complex)
        for ax in range(n):
            shape = [1] * n
            shape[ax] = N
            phase = phase * np.exp(1j * ks[ax] * point[ax]).reshape(shape)
        spec = self._spectrum * phase.reshape((N,) * n + (1,) * len(self.cshape))
        kmesh = np.meshgrid(*ks, indexing="ij")
        comps = []
        for m in range(order + 1):
            out = np.empty(self.cshape + (n,) * m)
            for didx in np.ndindex(*(n,) * m):
                mult = np.ones((N,) * n, dtype=complex)
                for ax in didx:
                    # odd Nyquist powers are negligible for band-limited
                    # samples, the contract for grid jets
                    mult = mult * (1j * kmesh[ax])
                term = spec * mult.reshape((N,) * n + (1,) * len(self.cshape))
                out[(Ellipsis,) + didx] = term.sum(axis=tuple(range(n))).real / N**n
            comps.append(out)
        return Jet(order, n, comps)


def _assemble(raw, cshape, base_shape):
    """Stack an evaluator's (possibly nested) return into one array with
    component axes trailing, broadcasting constants to the base shape."""
    if cshape == ():
        arr = np.asarray(raw, dtype=float)
        if arr.shape != tuple(base_shape):
            arr = np.broadcast_to(arr, base_shape).copy()
        return arr
    flat = np.empty(tuple(base_shape) + cshape)
    for idx in np.ndindex(*cshape):
        item = raw
        for i in idx:
            item = item[i]
        flat[(Ellipsis,) + idx] = item
    return flat


def _object_components(raw, cshape) -> np.ndarray:
    if cshape == ():
        return np.array(raw, dtype=object)
    out = np.empty(cshape, dtype=object)
    for idx in np.ndindex(*cshape):
        item = raw
        for i in idx:
            item = item[i]
        out[idx] = item
    return out


def _jet_from_taylor(raw, cshape, order, dim) -> Jet:
    obj = _object_components(raw, cshape)
    comps = []
    for m in range(order + 1):
        out = np.empty(cshape + (dim,) * m)
        for idx in np.ndindex(*cshape) if cshape else [()]:
            ts = obj[idx] if cshape else obj[()]
            if isinstance(ts, taylor.TaylorScalar):
                out[idx] = ts.derivative_array(m)
            else:  # constant component
                out[idx] = float(ts) if m == 0 else 0.0
        comps.append(out)
    return Jet(order, dim, comps)


def scalar_field(domain: Domain, fn=None, values=None, name: str = "") -> Field:
    if fn is not None:
        return Field.analytic(domain, fn, (), name)
    return Field.from_grid(domain, values, name)


def vector_field(domain: Domain, fn=None, values=None, name: str = "") -> Field:
    if fn is not None:
        return Field.analytic(domain, fn, (domain.dim,), name)
    return Field.from_grid(domain, values, name)


def tensor_field(domain: Domain, fn=None, values=None, name: str = "") -> Field:
    if fn is not None:
        return Field.analytic(domain, fn, (domain.dim, domain.dim), name)
    return Field.from_grid(domain, values, name)


# ---------------------------------------------------------------------
# spectral machinery on packed grids (hot paths)
# ---------------------------------------------------------------------

_SYM_PAIRS: dict[int, list[tuple[int, int]]] = {}


def sym_pairs(n: int) -> list[tuple[int, int]]:
    """Upper-triangle index pairs (i <= j), the packing order used for
    symmetric 2-tensors and second-derivative multi-indices."""
    if n not in _SYM_PAIRS:
        _SYM_PAIRS[n] = [(i, j) for i in range(n) for j in range(i, n)]
    return _SYM_PAIRS[n]


def pack_sym(t: np.ndarray) -> np.ndarray:
    """(…, n, n) symmetric -> (M, …) packed, M = n(n+1)/2."""
    n = t.shape[-1]
    return np.stack([t[..., i, j] for i, j in sym_pairs(n)], axis=0)


def unpack_sym(packed: np.ndarray, n: int) -> np.ndarray:
    """(M, …) packed -> (…, n, n) symmetric."""
    out = np.empty(packed.shape[1:] + (n, n))
    for m, (i, j) in enumerate(sym_pairs(n)):
        out[..., i, j] = packed[m]
        out[..., j, i] = packed[m]
    return out


_MULT_CACHE: dict = {}


def _derivative_multipliers(domain: Domain, n_grid: int, order: int) -> np.ndarray:
    """Spectral multipliers for all derivative multi-indices up to
    ``order`` (first derivatives, then packed second derivatives), shape
    (n + Q, N, ..., Nh) complex. Odd-order multipliers zero the Nyquist
    plane so real outputs stay consistent."""
    key = (domain, n_grid, order)
    if key in _MULT_CACHE:
        return _MULT_CACHE[key]
    n = domain.dim
    ks = domain.wavenumbers(n_grid)
    kh = [k.copy() for k in ks]
    kh[-1] = kh[-1][: n_grid // 2 + 1]  # rfft half axis
    kz = [k.copy() for k in kh]
    for ax in range(n):
        kz[ax][np.abs(kz[ax]) == np.abs(kz[ax]).max()] = 0.0  # Nyquist has no sign
    shape = (n_grid,) * (n - 1) + (n_grid // 2 + 1,)

    def axis_vec(vecs, ax):
        s = [1] * n
        s[ax] = shape[ax]
        return vecs[ax].reshape(s)

    mults = []
    for ax in range(n):  # first derivatives: i*k (Nyquist zeroed)
        m = np.zeros(shape, dtype=complex)
        m += 1j * axis_vec(kz, ax)
        mults.append(np.broadcast_to(m, shape).copy())
    if order >= 2:
        for a, b in sym_pairs(n):
            if a == b:
                m = -(axis_vec(kh, a) ** 2)  # Nyquist kept for even order
            else:
                m = -(axis_vec(kz, a) * axis_vec(kz, b))
            mults.append(np.broadcast_to(m.astype(complex), shape).copy())
    out = np.stack(mults, axis=0)
    _MULT_CACHE[key] = out
    return out


def packed_grid_jets(values: np.ndarray, domain: Domain, order: int = 2,
                     workers: int | None = None):
    """Spectral derivative arrays for a packed grid field.

    values: (C, N, ..., N) with C component fields.
    Returns (value, d1, d2): value (C, P); d1 (n, C, P); d2 (Q, C, P)
    with Q = n(n+1)/2 packed second-derivative pairs (None if order < 2).
    """
    if workers is None:
        workers = fft_workers()
    n = domain.dim
    C = values.shape[0]
    n_grid = values.shape[1]
    P = n_grid**n
    axes = tuple(range(1, n + 1))
    spec = sfft.rfftn(values, axes=axes, workers=workers)
    mult = _derivative_multipliers(domain, n_grid, order)
    nm = n if order == 1 else mult.shape[0]
    buf = mult[:nm, None] * spec[None, :]
    derivs = sfft.irfftn(
        buf.reshape((-1,) + spec.shape[1:]), s=(n_grid,) * n, axes=axes,
        workers=workers, overwrite_x=True,
    ).reshape(nm, C, P)
    value = values.reshape(C, P)
    d1 = derivs[:n]
    d2 = derivs[n:] if order >= 2 else None
    return value, d1, d2


def spectral_derivative(field: Field, multi_index) -> Field:
    """Spatial derivative of a grid scalar field by spectral multiply.

    Exact for trigonometric polynomials below the Nyquist mode; the
    derivative of a constant is identically zero.
    """
    if field.backend != "grid":
        raise ConfigError("spectral_derivative needs a grid field on a torus")
    total = int(np.sum(multi_index))
    if total > MAX_JET_ORDER:
        raise InsufficientJet(f"derivative order {total} > {MAX_JET_ORDER}")
    n = field.domain.dim
    N = field.n_grid
    ks = field.domain.wavenumbers(N)
    spec = sfft.rfftn(field.grid_values(), workers=fft_workers())
    for ax, power in enumerate(multi_index):
        if power == 0:
            continue
        k = ks[ax][: N // 2 + 1] if ax == n - 1 else ks[ax]
        if power % 2 == 1:
            k = k.copy()
            k[np.abs(k) == np.abs(k).max()] = 0.0  # Nyquist has no sign
        shape = [1] * n
        shape[ax] = len(k)
        spec = spec * (1j * k.reshape(shape)) ** power
    vals = sfft.irfftn(spec, s=(N,) * n, workers=fft_workers(), overwrite_x=True)
    return Field.from_grid(field.domain, vals, name=f"d{tuple(multi_index)}({field.name})")


def integrate_over_torus(s_values: np.ndarray, g_values: np.ndarray,
                         domain: Domain) -> float:
    """Volume integral of a sampled scalar against sqrt(det g).

    Deterministic: numpy's pairwise summation over the C-ordered flat
    array, independent of worker counts.
    """
    if not domain.is_torus:
        raise ConfigError("volume integrals are only defined on the torus")
    n = domain.dim
    s = np.asarray(s_values, dtype=float).reshape(-1)
    g = np.asarray(g_values, dtype=float).reshape(-1, n, n)
    if g.shape[0] != s.shape[0]:
        raise ConfigError("scalar and metric grids disagree")
    batched_spd_check(g)
    det = np.linalg.det(g)
    if det.min() <= 0.0:
        raise NonPositiveDefinite("det g <= 0 at a grid point")
    n_grid = round(s.shape[0] ** (1.0 / n))
    if n_grid**n != s.shape[0]:
        raise ConfigError(f"sample count {s.shape[0]} is not a {n}-cube")
    cell = domain.cell_volume(n_grid)
    return float(np.sum(s * np.sqrt(det)) * cell)
