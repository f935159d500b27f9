"""Dense complex eigenvalue kernels.

Householder reduction to upper Hessenberg form followed by single-shift
complex QR with Wilkinson shifts and deflation.  Every kernel exists twice:
a numba ``@njit`` loop version (``*_nb``) and a vectorised numpy version
(``*_np``).  The public names dispatch on :data:`oddborel._accel.USE_NUMBA`.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

EPS = np.finfo(np.float64).eps

# status codes returned by the QR kernels
OK = 0
NO_CONVERGENCE = 1


# ---------------------------------------------------------------------------
# Hessenberg reduction


@njit(cache=True)
def hessenberg_nb(A):
    H = A.copy()
    n = H.shape[0]
    v = np.empty(n, dtype=np.complex128)
    for j in range(n - 2):
        m = n - j - 1
        norm2 = 0.0
        for i in range(m):
            x = H[j + 1 + i, j]
            norm2 += x.real * x.real + x.imag * x.imag
        xnorm = np.sqrt(norm2)
        if xnorm == 0.0:
            continue
        x0 = H[j + 1, j]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 > 0.0 else 1.0 + 0.0j
        alpha = -phase * xnorm
        for i in range(m):
            v[i] = H[j + 1 + i, j]
        v[0] -= alpha
        vn2 = 0.0
        for i in range(m):
            vn2 += v[i].real * v[i].real + v[i].imag * v[i].imag
        if vn2 == 0.0:
            continue
        scale = 1.0 / np.sqrt(vn2)
        for i in range(m):
            v[i] *= scale
        # H[j+1:, j:] -= 2 v (v^H H[j+1:, j:])
        for c in range(j, n):
            s = 0.0 + 0.0j
            for i in range(m):
                s += v[i].conjugate() * H[j + 1 + i, c]
            s *= 2.0
            for i in range(m):
                H[j + 1 + i, c] -= v[i] * s
        # H[:, j+1:] -= 2 (H[:, j+1:] v) v^H
        for r in range(n):
            s = 0.0 + 0.0j
            for i in range(m):
                s += H[r, j + 1 + i] * v[i]
            s *= 2.0
            for i in range(m):
                H[r, j + 1 + i] -= s * v[i].conjugate()
        H[j + 1, j] = alpha
        for i in range(j + 2, n):
            H[i, j] = 0.0
    return H


def hessenberg_np(A):
    H = np.array(A, dtype=np.complex128, copy=True)
    n = H.shape[0]
    for j in range(n - 2):
        x = H[j + 1:, j]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if abs(x0) > 0.0 else 1.0
        alpha = -phase * xnorm
        v = x.copy()
        v[0] -= alpha
        vn = np.linalg.norm(v)
        if vn == 0.0:
            continue
        v /= vn
        H[j + 1:, j:] -= 2.0 * np.outer(v, v.conj() @ H[j + 1:, j:])
        H[:, j + 1:] -= 2.0 * np.outer(H[:, j + 1:] @ v, v.conj())
        H[j + 1, j] = alpha
        H[j + 2:, j] = 0.0
    return H


# ---------------------------------------------------------------------------
# shifted QR on a Hessenberg matrix (eigenvalues only)


@njit(cache=True)
def _wilkinson_shift(a, b, c, d):
    tr = 0.5 * (a + d)
    det = a * d - b * c
    disc = np.sqrt(tr * tr - det + 0.0j)
    mu1 = tr + disc
    mu2 = tr - disc
    if abs(mu1 - d) < abs(mu2 - d):
        return mu1
    return mu2


@njit(cache=True)
def hqr_nb(H0, max_sweeps):
    H = H0.copy()
    n = H.shape[0]
    eigs = np.zeros(n, dtype=np.complex128)
    cs = np.empty(n, dtype=np.complex128)
    ss = np.empty(n, dtype=np.complex128)
    hi = n - 1
    its = 0
    while hi >= 0:
        if hi == 0:
            eigs[0] = H[0, 0]
            hi -= 1
            continue
        lo = hi
        while lo > 0:
            tol = EPS * (abs(H[lo - 1, lo - 1]) + abs(H[lo, lo]))
            if abs(H[lo, lo - 1]) <= tol:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs[hi] = H[hi, hi]
            hi -= 1
            its = 0
            continue
        its += 1
        if its > max_sweeps:
            return eigs, hi, NO_CONVERGENCE
        if its % 11 == 0:
            mu = H[hi, hi] + abs(H[hi, hi - 1].real) + abs(H[hi, hi - 1].imag)
        else:
            mu = _wilkinson_shift(H[hi - 1, hi - 1], H[hi - 1, hi],
                                  H[hi, hi - 1], H[hi, hi])
        for i in range(lo, hi + 1):
            H[i, i] -= mu
        for i in range(lo, hi):
            x = H[i, i]
            y = H[i + 1, i]
            r = np.sqrt(x.real * x.real + x.imag * x.imag
                        + y.real * y.real + y.imag * y.imag)
            if r == 0.0:
                c = 1.0 + 0.0j
                s = 0.0 + 0.0j
            else:
                c = x / r
                s = y / r
            cs[i] = c
            ss[i] = s
            for col in range(i, hi + 1):
                hi_ = H[i, col]
                lo_ = H[i + 1, col]
                H[i, col] = c.conjugate() * hi_ + s.conjugate() * lo_
                H[i + 1, col] = -s * hi_ + c * lo_
        for i in range(lo, hi):
            c = cs[i]
            s = ss[i]
            top = min(i + 2, hi)
            for row in range(lo, top + 1):
                a = H[row, i]
                b = H[row, i + 1]
                H[row, i] = a * c + b * s
                H[row, i + 1] = -a * s.conjugate() + b * c.conjugate()
        for i in range(lo, hi + 1):
            H[i, i] += mu
    return eigs, -1, OK


def hqr_np(H0, max_sweeps):
    H = np.array(H0, dtype=np.complex128, copy=True)
    n = H.shape[0]
    eigs = np.zeros(n, dtype=np.complex128)
    hi = n - 1
    its = 0
    while hi >= 0:
        if hi == 0:
            eigs[0] = H[0, 0]
            hi -= 1
            continue
        sub = np.abs(np.diagonal(H, -1)[:hi])
        diag = np.abs(np.diagonal(H))
        small = np.nonzero(sub <= EPS * (diag[:hi] + diag[1:hi + 1]))[0]
        lo = int(small[-1]) + 1 if small.size else 0
        if lo > 0:
            H[lo, lo - 1] = 0.0
        if lo == hi:
            eigs[hi] = H[hi, hi]
            hi -= 1
            its = 0
            continue
        its += 1
        if its > max_sweeps:
            return eigs, hi, NO_CONVERGENCE
        if its % 11 == 0:
            h = H[hi, hi - 1]
            mu = H[hi, hi] + abs(h.real) + abs(h.imag)
        else:
            mu = _wilkinson_shift_py(H[hi - 1, hi - 1], H[hi - 1, hi],
                                     H[hi, hi - 1], H[hi, hi])
        blk = H[lo:hi + 1, lo:hi + 1]
        m = blk.shape[0]
        blk[np.diag_indices(m)] -= mu
        rots = []
        for i in range(m - 1):
            x, y = blk[i, i], blk[i + 1, i]
            r = np.hypot(abs(x), abs(y))
            c, s = (x / r, y / r) if r else (1.0 + 0j, 0j)
            rows = blk[i:i + 2, i:]
            top, bot = rows[0].copy(), rows[1].copy()
            rows[0] = c.conjugate() * top + s.conjugate() * bot
            rows[1] = -s * top + c * bot
            rots.append((c, s))
        for i, (c, s) in enumerate(rots):
            cols = blk[:min(i + 3, m), i:i + 2]
            a, b = cols[:, 0].copy(), cols[:, 1].copy()
            cols[:, 0] = a * c + b * s
            cols[:, 1] = -a * s.conjugate() + b * c.conjugate()
        blk[np.diag_indices(m)] += mu
    return eigs, -1, OK


def _wilkinson_shift_py(a, b, c, d):
    tr = 0.5 * (a + d)
    disc = np.sqrt(complex(tr * tr - (a * d - b * c)))
    mu1, mu2 = tr + disc, tr - disc
    return mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2


# ---------------------------------------------------------------------------
# banded solve (used by inverse iteration)


@njit(cache=True)
def band_solve_nb(A, rhs, w):
    """Solve ``A x = rhs`` for a dense-stored matrix of half-bandwidth ``w``.

    Gaussian elimination with partial pivoting restricted to the band; fill-in
    is confined to ``2 w`` super-diagonals.
    """
    M = A.copy()
    x = rhs.copy()
    n = M.shape[0]
    for c in range(n):
        last = min(n - 1, c + w)
        p = c
        best = abs(M[c, c])
        for r in range(c + 1, last + 1):
            if abs(M[r, c]) > best:
                best = abs(M[r, c])
                p = r
        right = min(n - 1, c + 2 * w)
        if p != c:
            for col in range(c, right + 1):
                tmp = M[c, col]
                M[c, col] = M[p, col]
                M[p, col] = tmp
            tmp = x[c]
            x[c] = x[p]
            x[p] = tmp
        piv = M[c, c]
        if piv == 0.0:
            piv = EPS * (1.0 + abs(x[c]))
            M[c, c] = piv
        for r in range(c + 1, last + 1):
            f = M[r, c] / piv
            if f != 0.0:
                for col in range(c, right + 1):
                    M[r, col] -= f * M[c, col]
                x[r] -= f * x[c]
    for r in range(n - 1, -1, -1):
        s = x[r]
        for col in range(r + 1, min(n, r + 2 * w + 1)):
            s -= M[r, col] * x[col]
        x[r] = s / M[r, r]
    return x


def band_solve_np(A, rhs, w):
    A = np.asarray(A, dtype=np.complex128)
    n = A.shape[0]
    try:
        return np.linalg.solve(A, np.asarray(rhs, dtype=np.complex128))
    except np.linalg.LinAlgError:
        return np.linalg.solve(A + EPS * np.eye(n), rhs)


if USE_NUMBA:
    hessenberg = hessenberg_nb
    hqr = hqr_nb
    band_solve = band_solve_nb
else:
    hessenberg = hessenberg_np
    hqr = hqr_np
    band_solve = band_solve_np
