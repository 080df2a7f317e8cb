"""Pure-numpy curvature kernels (fallback for the compiled extension).

Index conventions, shared with the compiled kernel and the pointwise
engine:

    Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)
    R^i_jkl    = d_k Gamma^i_lj - d_l Gamma^i_kj
                 + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj
    R_ijkl     = g_im R^m_jkl          (round sphere: positive scalar)
    Ric_jl     = R^i_jil
    S*_xy      = 1/2 R^i_jxl phi^j_i phi^l_y      (half-trace form)
    Ric*_ky    = R_wjkl phi^w_y phi^j_m g^ml      (orthonormal-frame form,
                 frames eliminated through completeness)
    r*         = g^ky Ric*_ky

Arrays are component-major, matching what the batched FFT emits:
g6 (M, P) packed upper-triangle metric, dg (n, M, P), d2g (Q, M, P) with
Q = n(n+1)/2 packed derivative pairs, phi (n, n, P).
"""
from __future__ import annotations

import numpy as np

from .fields import sym_pairs


def expand_packed(packed: np.ndarray, n: int) -> np.ndarray:
    """(M, P) packed symmetric components -> (P, n, n)."""
    P = packed.shape[-1]
    out = np.empty((P, n, n))
    for m, (i, j) in enumerate(sym_pairs(n)):
        out[:, i, j] = packed[m]
        out[:, j, i] = packed[m]
    return out


def expand_d1(dg: np.ndarray, n: int) -> np.ndarray:
    """(n, M, P) -> (P, n, n, n): out[p, k, i, j] = d_k g_ij."""
    P = dg.shape[-1]
    out = np.empty((P, n, n, n))
    for m, (i, j) in enumerate(sym_pairs(n)):
        out[:, :, i, j] = dg[:, m].T
        out[:, :, j, i] = dg[:, m].T
    return out


def expand_d2(d2g: np.ndarray, n: int) -> np.ndarray:
    """(Q, M, P) -> (P, n, n, n, n): out[p, k, l, i, j] = d_k d_l g_ij."""
    P = d2g.shape[-1]
    out = np.empty((P, n, n, n, n))
    for q, (k, l) in enumerate(sym_pairs(n)):
        for m, (i, j) in enumerate(sym_pairs(n)):
            block = d2g[q, m]
            out[:, k, l, i, j] = block
            out[:, k, l, j, i] = block
            out[:, l, k, i, j] = block
            out[:, l, k, j, i] = block
    return out


def christoffel(g: np.ndarray, dg: np.ndarray):
    """Batched Christoffel symbols from point-major jets.

    g (P, n, n), dg (P, n, n, n) -> (ginv, gamma_low (P,l,i,j),
    gamma (P,k,i,j)).
    """
    ginv = np.linalg.inv(g)
    # Gamma_lij = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    gl = 0.5 * (np.einsum("pijl->plij", dg) + np.einsum("pjil->plij", dg) - dg)
    gam = np.einsum("pkl,plij->pkij", ginv, gl, optimize=True)
    return ginv, gl, gam


def riemann_mixed(g, dg, d2g):
    """R^i_jkl (P, i, j, k, l) plus (ginv, gamma) from point-major jets."""
    ginv, gl, gam = christoffel(g, dg)
    dginv = -np.einsum("pam,pkmn,pnb->pkab", ginv, dg, ginv, optimize=True)
    # d_k Gamma_mlj = 1/2 (d_k d_l g_jm + d_k d_j g_lm - d_k d_m g_lj);
    # d2g[p, k, l, i, j] is symmetric in (k, l) and in (i, j)
    dgl = 0.5 * (np.einsum("pkljm->pkmlj", d2g) + np.einsum("pkjlm->pkmlj", d2g)
                 - d2g)
    dgam = np.einsum("pkim,pmlj->pkilj", dginv, gl, optimize=True) \
        + np.einsum("pim,pkmlj->pkilj", ginv, dgl, optimize=True)
    gg = np.einsum("pikm,pmlj->pijkl", gam, gam, optimize=True)
    riem = (np.einsum("pkilj->pijkl", dgam) - np.einsum("plikj->pijkl", dgam)
            + gg - np.swapaxes(gg, 3, 4))
    return riem, ginv, gam


def star_rhs(g6, dg, d2g, phi, n: int):
    """Hot-path star quantities from component-major packed jets.

    Returns (sstar (n, n, P) unsymmetrized, rstar (P,)).
    """
    g = expand_packed(g6, n)
    dgf = expand_d1(dg, n)
    d2gf = expand_d2(d2g, n)
    phif = np.ascontiguousarray(np.moveaxis(phi, -1, 0))  # (P, n, n)
    riem, ginv, _ = riemann_mixed(g, dgf, d2gf)
    sstar = 0.5 * np.einsum("pijxl,pji,ply->pxy", riem, phif, phif, optimize=True)
    rlow = np.einsum("pwm,pmjkl->pwjkl", g, riem, optimize=True)
    phiup = np.einsum("pjm,pml->pjl", phif, ginv, optimize=True)
    rstar = np.einsum("pwjkl,pwk,pjl->p", rlow, phiup, phiup, optimize=True)
    return np.ascontiguousarray(np.moveaxis(sstar, 0, -1)), rstar
