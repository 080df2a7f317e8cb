# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled star-curvature kernel (hot path of the flow stepper).

Same contract and index conventions as _curvature_np.star_rhs; see that
module for the formulas.  Points are independent, so the OpenMP split is
bitwise deterministic for any thread count.
"""
import numpy as np

cimport cython
cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()

DEF MAXN = 6
DEF MAXM = 21   # n(n+1)/2 at MAXN


cdef inline int invert_sym(double* a, double* inv, int n) noexcept nogil:
    """Gauss-Jordan inverse of a small symmetric matrix with partial
    pivoting; returns nonzero on singularity."""
    cdef double work[MAXN * 2 * MAXN]
    cdef int i, j, k, piv
    cdef double mx, tmp, f
    for i in range(n):
        for j in range(n):
            work[i * 2 * n + j] = a[i * n + j]
            work[i * 2 * n + n + j] = 1.0 if i == j else 0.0
    for k in range(n):
        piv = k
        mx = work[k * 2 * n + k]
        if mx < 0:
            mx = -mx
        for i in range(k + 1, n):
            tmp = work[i * 2 * n + k]
            if tmp < 0:
                tmp = -tmp
            if tmp > mx:
                mx = tmp
                piv = i
        if mx == 0.0:
            return 1
        if piv != k:
            for j in range(2 * n):
                tmp = work[k * 2 * n + j]
                work[k * 2 * n + j] = work[piv * 2 * n + j]
                work[piv * 2 * n + j] = tmp
        f = 1.0 / work[k * 2 * n + k]
        for j in range(2 * n):
            work[k * 2 * n + j] *= f
        for i in range(n):
            if i == k:
                continue
            f = work[i * 2 * n + k]
            if f != 0.0:
                for j in range(2 * n):
                    work[i * 2 * n + j] -= f * work[k * 2 * n + j]
    for i in range(n):
        for j in range(n):
            inv[i * n + j] = work[i * 2 * n + n + j]
    return 0


cdef int _point_star(const double* G, const double* DG, const double* D2G,
                     const double* PH, double* S, double* RSTAR,
                     int n) noexcept nogil:
    """All star quantities at one point.

    G: g_ij (n*n), DG[k][i][j]: d_k g_ij, D2G[k][l][i][j]: d_k d_l g_ij,
    PH: phi^a_b.  Writes S (n*n, unsymmetrized S*) and *RSTAR.
    """
    cdef double gi[MAXN * MAXN]
    cdef double gl[MAXN * MAXN * MAXN]        # Gamma_lij
    cdef double gam[MAXN * MAXN * MAXN]       # Gamma^k_ij
    cdef double Mk[MAXN * MAXN * MAXN]        # (g^-1 dg_k g^-1)^{ab}
    cdef double tmp[MAXN * MAXN]
    cdef double dgam[MAXN * MAXN * MAXN * MAXN]  # [k][i][l][j] = d_k Gamma^i_lj
    cdef double R[MAXN * MAXN * MAXN * MAXN]     # [i][j][k][l] = R^i_jkl
    cdef double A[MAXN * MAXN]
    cdef double phiup[MAXN * MAXN]
    cdef int i, j, k, l, m, x, y
    cdef int n2 = n * n, n3 = n * n * n
    cdef double s, dglv

    if invert_sym(G, gi, n):
        return 1

    # Gamma_lij = .5 (dg[i][j][l] + dg[j][i][l] - dg[l][i][j])
    for l in range(n):
        for i in range(n):
            for j in range(n):
                gl[l * n2 + i * n + j] = 0.5 * (
                    DG[i * n2 + j * n + l] + DG[j * n2 + i * n + l]
                    - DG[l * n2 + i * n + j])
    # Gamma^k_ij
    for k in range(n):
        for i in range(n):
            for j in range(n):
                s = 0.0
                for l in range(n):
                    s += gi[k * n + l] * gl[l * n2 + i * n + j]
                gam[k * n2 + i * n + j] = s
    # M_k = g^-1 (d_k g) g^-1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                s = 0.0
                for m in range(n):
                    s += gi[i * n + m] * DG[k * n2 + m * n + j]
                tmp[i * n + j] = s
        for i in range(n):
            for j in range(n):
                s = 0.0
                for m in range(n):
                    s += tmp[i * n + m] * gi[m * n + j]
                Mk[k * n2 + i * n + j] = s
    # d_k Gamma^i_lj = -M_k^{im} Gamma_mlj + g^{im} d_k Gamma_mlj,
    # d_k Gamma_mlj = .5 (d2g[k][l][j][m] + d2g[k][j][l][m] - d2g[k][m][l][j])
    for k in range(n):
        for i in range(n):
            for l in range(n):
                for j in range(n):
                    s = 0.0
                    for m in range(n):
                        dglv = 0.5 * (D2G[(k * n + l) * n2 + j * n + m]
                                      + D2G[(k * n + j) * n2 + l * n + m]
                                      - D2G[(k * n + m) * n2 + l * n + j])
                        s += gi[i * n + m] * dglv - Mk[k * n2 + i * n + m] * gl[m * n2 + l * n + j]
                    dgam[((k * n + i) * n + l) * n + j] = s
    # R^i_jkl
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    s = dgam[((k * n + i) * n + l) * n + j] - dgam[((l * n + i) * n + k) * n + j]
                    for m in range(n):
                        s += gam[i * n2 + k * n + m] * gam[m * n2 + l * n + j] \
                             - gam[i * n2 + l * n + m] * gam[m * n2 + k * n + j]
                    R[((i * n + j) * n + k) * n + l] = s
    # S*_xy = .5 R^i_jxl phi^j_i phi^l_y
    for x in range(n):
        for l in range(n):
            s = 0.0
            for i in range(n):
                for j in range(n):
                    s += R[((i * n + j) * n + x) * n + l] * PH[j * n + i]
            A[x * n + l] = s
    for x in range(n):
        for y in range(n):
            s = 0.0
            for l in range(n):
                s += A[x * n + l] * PH[l * n + y]
            S[x * n + y] = 0.5 * s
    # r* = R_wjkl phi^{wk} phi^{jl},  phi^{ab} = phi^a_m g^{mb}
    for i in range(n):
        for j in range(n):
            s = 0.0
            for m in range(n):
                s += PH[i * n + m] * gi[m * n + j]
            phiup[i * n + j] = s
    s = 0.0
    for j in range(n):
        for k in range(n):
            for l in range(n):
                # lower the first slot on the fly: R_wjkl = g_wm R^m_jkl
                for i in range(n):
                    dglv = 0.0
                    for m in range(n):
                        dglv += G[i * n + m] * R[((m * n + j) * n + k) * n + l]
                    s += dglv * phiup[i * n + k] * phiup[j * n + l]
    RSTAR[0] = s
    return 0


def star_rhs(double[:, ::1] g6, double[:, :, ::1] dg, double[:, :, ::1] d2g,
             double[:, :, ::1] phi, int n, int threads=1):
    """Component-major packed jets -> (sstar (n, n, P), rstar (P,)).

    Layouts match _curvature_np.star_rhs exactly.
    """
    cdef Py_ssize_t P = g6.shape[1]
    cdef int M = n * (n + 1) // 2
    if g6.shape[0] != M or dg.shape[0] != n or dg.shape[1] != M \
            or d2g.shape[0] != M or d2g.shape[1] != M \
            or phi.shape[0] != n or phi.shape[1] != n or phi.shape[2] != P:
        raise ValueError("kernel input layout mismatch")
    if n > MAXN:
        raise ValueError(f"kernel supports dim <= {MAXN}")

    # upper-triangle pair table, packing order of fields.sym_pairs
    cdef int pair_of[MAXN * MAXN]
    cdef int a, b, q
    q = 0
    for a in range(n):
        for b in range(a, n):
            pair_of[a * n + b] = q
            pair_of[b * n + a] = q
            q += 1

    out_s = np.empty((n, n, P))
    out_r = np.empty(P)
    cdef double[:, :, ::1] S = out_s
    cdef double[::1] RS = out_r
    cdef Py_ssize_t p
    cdef int i, j, k, l, fail = 0
    cdef double G[MAXN * MAXN]
    cdef double DG[MAXN * MAXN * MAXN]
    cdef double D2G[MAXN * MAXN * MAXN * MAXN]
    cdef double PH[MAXN * MAXN]
    cdef double Sloc[MAXN * MAXN]
    cdef double rloc

    with nogil:
        for p in prange(P, num_threads=threads, schedule="static"):
            # gather strided component streams into point-local buffers
            for i in range(n):
                for j in range(n):
                    G[i * n + j] = g6[pair_of[i * n + j], p]
                    PH[i * n + j] = phi[i, j, p]
            for k in range(n):
                for i in range(n):
                    for j in range(n):
                        DG[k * n * n + i * n + j] = dg[k, pair_of[i * n + j], p]
            for k in range(n):
                for l in range(n):
                    for i in range(n):
                        for j in range(n):
                            D2G[(k * n + l) * n * n + i * n + j] = \
                                d2g[pair_of[k * n + l], pair_of[i * n + j], p]
            if _point_star(G, DG, D2G, PH, Sloc, &rloc, n):
                fail += 1
            else:
                for i in range(n):
                    for j in range(n):
                        S[i, j, p] = Sloc[i * n + j]
                RS[p] = rloc
    if fail:
        raise np.linalg.LinAlgError("singular metric in curvature kernel")
    return out_s, out_r
