"""Complex-scaled Hamiltonian in the harmonic number basis.

``H(beta, theta) = e^{-2i theta} p^2 + e^{2i theta} x^2 + beta e^{(2k+1) i theta} x^(2k+1)``
is assembled from the exact real symmetric number-basis matrices of the three
operators, diagonalised in double precision with the kernels of
:mod:`oddborel.kernels`, and the tracked eigenvalue is then polished at the
working precision by Rayleigh-quotient iteration on the band.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np

from . import kernels
from .geometry import angular_violation, choose_theta, in_parallelogram_P
from .series import OscillatorSpec, potential_matrix

DEFAULT_PREC = 256


class EigenConvergenceError(ArithmeticError):
    """QR iteration stalled; carries the eigenvalues found so far."""

    def __init__(self, partial, index):
        super().__init__(f"QR iteration did not converge at index {index}")
        self.partial = partial
        self.index = index


class HomotopyAmbiguityError(RuntimeError):
    def __init__(self, candidates, step):
        super().__init__(f"eigenvalue matching is ambiguous at homotopy step {step}: "
                         f"{[complex(c) for c in candidates]}")
        self.candidates = candidates
        self.step = step


class InadmissibleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# exact constituent matrices


@lru_cache(maxsize=16)
def _odd_power_band(k: int, N: int):
    """Upper band of the symmetric number-basis matrix of ``x^(2k+1)``.

    Returns ``{d: [(sign, square), ...]}`` with exact rational squares, built
    from the rescaled rational matrix: symmetric entry ``(n, n+d)`` equals
    ``X[n][n+d] * sqrt(2^d / ((n+1)...(n+d)))``.
    """
    X = potential_matrix(k, N)
    out = {}
    for d in range(0, min(X.width, N - 1) + 1):
        row = []
        for n in range(N - d):
            x = X[n, n + d]
            prod = 1
            for i in range(n + 1, n + d + 1):
                prod *= i
            sq = x * x * Fraction(2 ** d, prod)
            row.append((1 if x > 0 else (-1 if x < 0 else 0), sq))
        out[d] = row
    return out


def number_basis_matrices(k: int, N: int):
    """Dense float ``(P2, X2, X2K1)``; leading blocks of the exact operators."""
    n = np.arange(N)
    X2 = np.diag((2 * n + 1) / 2.0)
    off = np.sqrt((n[:-2] + 1) * (n[:-2] + 2)) / 2.0
    X2[n[:-2], n[:-2] + 2] = off
    X2[n[:-2] + 2, n[:-2]] = off
    P2 = np.diag((2 * n + 1) / 2.0)
    P2[n[:-2], n[:-2] + 2] = -off
    P2[n[:-2] + 2, n[:-2]] = -off
    XK = np.zeros((N, N))
    for d, row in _odd_power_band(k, N).items():
        vals = np.array([s * math.sqrt(sq) for s, sq in row])
        idx = np.arange(N - d)
        XK[idx, idx + d] = vals
        XK[idx + d, idx] = vals
    return P2, X2, XK


@lru_cache(maxsize=16)
def _mp_bands(k: int, N: int, prec: int):
    with mp.workprec(prec):
        xk = {d: [s * mp.sqrt(mp.mpf(sq.numerator) / sq.denominator) for s, sq in row]
              for d, row in _odd_power_band(k, N).items()}
        half = mp.mpf(1) / 2
        diag2 = [(2 * i + 1) * half for i in range(N)]
        off2 = [mp.sqrt(mp.mpf((i + 1) * (i + 2))) * half for i in range(N - 2)]
    return diag2, off2, xk


# ---------------------------------------------------------------------------


@dataclass
class ScaledHamiltonian:
    """Truncated ``H(beta, theta)``; ``matrix`` is complex128, ``N x N``."""

    spec: OscillatorSpec
    beta: complex
    arg_beta: float
    theta: float
    N: int
    matrix: np.ndarray = field(repr=False)
    admissible: bool = True
    prec: int = DEFAULT_PREC

    @property
    def principal_sheet(self) -> bool:
        return self.beta == 0 or cmath.phase(self.beta) == self.arg_beta

    @property
    def bandwidth(self) -> int:
        return self.spec.power

    def coefficients(self):
        """Complex prefactors of ``p^2``, ``x^2`` and ``x^(2k+1)`` at ``prec`` bits."""
        with mp.workprec(self.prec):
            th = mp.mpf(self.theta)
            c_p = mp.expj(-2 * th)
            c_x = mp.expj(2 * th)
            if self.principal_sheet:
                # exact complex input avoids rounding in e^{i arg beta}
                c_v = mp.mpc(self.beta) * mp.expj(self.spec.power * th)
            else:
                c_v = abs(mp.mpc(self.beta)) * mp.expj(mp.mpf(self.arg_beta) + self.spec.power * th)
        return c_p, c_x, c_v

    def band_mp(self):
        """``{offset: [entries]}`` of the band at ``prec`` bits (symmetric)."""
        diag2, off2, xk = _mp_bands(self.spec.k, self.N, self.prec)
        c_p, c_x, c_v = self.coefficients()
        with mp.workprec(self.prec):
            band = {}
            for d in range(self.bandwidth + 1):
                vals = [c_v * v for v in xk.get(d, [])] if d in xk else [mp.mpc(0)] * (self.N - d)
                if d == 0:
                    vals = [v + (c_p + c_x) * w for v, w in zip(vals, diag2)]
                elif d == 2:
                    vals = [v + (c_x - c_p) * w for v, w in zip(vals, off2)]
                band[d] = vals
        return band


def build_scaled_hamiltonian(spec: OscillatorSpec, beta, theta: float, N: int,
                             arg_beta: float | None = None,
                             prec: int = DEFAULT_PREC) -> ScaledHamiltonian:
    """Assemble the truncated dilated operator.

    Admissibility of ``(arg beta, theta)`` is recorded, not enforced.
    """
    if N < spec.power + 1:
        raise ValueError(f"N must be at least 2k+2 = {spec.power + 1}")
    r = abs(beta)
    s = cmath.phase(beta) if arg_beta is None else float(arg_beta)
    P2, X2, XK = number_basis_matrices(spec.k, N)
    lift = complex(beta) if arg_beta is None or s == cmath.phase(beta) else r * cmath.exp(1j * s)
    H = (cmath.exp(-2j * theta) * P2 + cmath.exp(2j * theta) * X2
         + lift * cmath.exp(1j * spec.power * theta) * XK)
    admissible = r == 0 or in_parallelogram_P(s, theta, spec.k)
    return ScaledHamiltonian(spec, complex(beta), s, float(theta), N, H, admissible, prec)


# ---------------------------------------------------------------------------
# eigen solver


@dataclass
class Spectrum:
    values: np.ndarray
    vectors: np.ndarray | None = None
    residuals: np.ndarray | None = None


def _bandwidth(A):
    nz = np.nonzero(np.abs(A) > 0)
    return int(np.max(np.abs(nz[0] - nz[1]))) if nz[0].size else 0


def eigen_spectrum(h, vectors: bool = False, tol: float = 1e-10, max_sweeps: int = 60) -> Spectrum:
    """All eigenvalues of a dense complex matrix or a :class:`ScaledHamiltonian`.

    Hessenberg reduction plus shifted QR.  With ``vectors=True`` each
    eigenvector comes from inverse iteration and satisfies
    ``||(H - E) v|| <= tol ||H|| ||v||`` or the residual is reported as-is.
    """
    A = np.asarray(h.matrix if isinstance(h, ScaledHamiltonian) else h, dtype=np.complex128)
    n = A.shape[0]
    if n == 0:
        return Spectrum(np.zeros(0, dtype=np.complex128))
    H = kernels.hessenberg(A)
    vals, idx, status = kernels.hqr(H, max_sweeps)
    if status != kernels.OK:
        raise EigenConvergenceError(vals[idx + 1:].copy(), int(idx))
    if not vectors:
        return Spectrum(vals)
    w = h.bandwidth if isinstance(h, ScaledHamiltonian) else _bandwidth(A)
    norm = np.linalg.norm(A, 2) if n <= 64 else np.linalg.norm(A)
    vecs = np.empty((n, n), dtype=np.complex128)
    res = np.empty(n)
    for i, E in enumerate(vals):
        v, r = _inverse_iteration(A, E, w, norm)
        vecs[:, i] = v
        res[i] = r / norm if norm else r
    return Spectrum(vals, vecs, res)


def _inverse_iteration(A, E, w, norm, steps=2):
    n = A.shape[0]
    shift = E + (abs(E) + 1.0) * 1e-13
    M = A - shift * np.eye(n)
    v = np.ones(n, dtype=np.complex128) / math.sqrt(n)
    for _ in range(steps):
        x = kernels.band_solve(M, v, w)
        nx = np.linalg.norm(x)
        if not np.isfinite(nx) or nx == 0:
            break
        v = x / nx
    r = np.linalg.norm(A @ v - E * v)
    return v, r


def _mp_band_solve(band, n, w, sigma, rhs):
    """Solve ``(H - sigma) x = rhs`` for symmetric band ``H`` at mp precision."""
    width = 3 * w + 1
    rows = []
    for r in range(n):
        row = {}
        for c in range(max(0, r - w), min(n, r + w + 1)):
            d = c - r
            v = band[abs(d)][min(r, c)]
            if d == 0:
                v = v - sigma
            row[c] = v
        rows.append(row)
    x = list(rhs)
    for c in range(n):
        last = min(n - 1, c + w)
        p = max(range(c, last + 1), key=lambda r: abs(rows[r].get(c, 0)))
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            x[c], x[p] = x[p], x[c]
        piv = rows[c].get(c, 0)
        if piv == 0:
            piv = mp.mpf(2) ** (-mp.prec)
            rows[c][c] = piv
        for r in range(c + 1, last + 1):
            a = rows[r].get(c, 0)
            if a:
                f = a / piv
                for col, val in rows[c].items():
                    if col >= c:
                        rows[r][col] = rows[r].get(col, 0) - f * val
                x[r] -= f * x[c]
    out = [mp.mpc(0)] * n
    for r in range(n - 1, -1, -1):
        acc = x[r]
        for col, val in rows[r].items():
            if col > r and col < min(n, r + width):
                acc -= val * out[col]
        out[r] = acc / rows[r][r]
    return out


def _mp_band_matvec(band, n, w, v):
    out = [mp.mpc(0)] * n
    for r in range(n):
        acc = mp.mpc(0)
        for c in range(max(0, r - w), min(n, r + w + 1)):
            acc += band[abs(c - r)][min(r, c)] * v[c]
        out[r] = acc
    return out


def refine_eigenvalue(h: ScaledHamiltonian, E0, prec: int | None = None, max_iter: int = 30):
    """Polish one eigenvalue at ``prec`` bits.

    Rayleigh-quotient iteration with the complex-symmetric quotient
    ``v^T H v / v^T v`` on the band.  Returns ``(E, v, residual)`` where the
    residual is ``||(H - E) v||`` for unit ``v``.
    """
    prec = prec or h.prec
    n, w = h.N, h.bandwidth
    with mp.workprec(prec):
        band = h.band_mp() if prec == h.prec else ScaledHamiltonian(
            h.spec, h.beta, h.arg_beta, h.theta, h.N, h.matrix, h.admissible, prec).band_mp()
        E = mp.mpc(E0)
        v = [mp.mpc(1)] * n
        tol = mp.mpf(2) ** (-prec + 16)
        for it in range(max_iter):
            # shift off the eigenvalue by a hair so the solve stays regular
            x = _mp_band_solve(band, n, w, E * (1 + tol), v)
            nrm = mp.sqrt(mp.fsum(abs(c) ** 2 for c in x))
            v = [c / nrm for c in x]
            Hv = _mp_band_matvec(band, n, w, v)
            E_new = mp.fsum(a * b for a, b in zip(v, Hv)) / mp.fsum(a * a for a in v)
            done = abs(E_new - E) <= tol * max(1, abs(E_new))
            E = E_new
            if done and it > 0:
                break
        Hv = _mp_band_matvec(band, n, w, v)
        residual = mp.sqrt(mp.fsum(abs(a - E * b) ** 2 for a, b in zip(Hv, v)))
    return E, v, residual


def numerical_range_violation(h: ScaledHamiltonian, values=None) -> float:
    """Largest angular excursion of any eigenvalue outside the half-plane Pi."""
    vals = eigen_spectrum(h).values if values is None else values
    return max(angular_violation(complex(z), h.arg_beta, h.theta, h.spec.k) for z in vals)


# ---------------------------------------------------------------------------
# resonance tracking


@dataclass(frozen=True)
class TraceOptions:
    theta_probes: tuple = (0.0, 0.02, -0.02, 0.04, -0.04)
    N_schedule: tuple = (100, 200, 400)
    homotopy_steps: int = 16
    max_doublings: int = 3
    tol: float = 1e-8
    prec: int = DEFAULT_PREC
    refine: bool = True


@dataclass
class ResonanceEstimate:
    E: complex
    N_used: int
    theta_used: float
    plateau_spread: float
    truncation_delta: float
    residual: float
    converged: bool = True
    theta_flagged: bool = False
    E_mp: mp.mpc | None = None
    homotopy_steps: int = 0
    probe_values: dict = field(default_factory=dict, repr=False)


def _nearest(values, target):
    d = np.abs(values - target)
    order = np.argsort(d)
    return order, d


def _homotopy(spec, r, s, theta, N, steps, prec):
    vals = eigen_spectrum(build_scaled_hamiltonian(spec, 0.0, theta, N, s, prec)).values
    order, d = _nearest(vals, spec.unperturbed)
    E = vals[order[0]]
    prev = vals
    for m in range(1, steps + 1):
        others = np.abs(prev - E)
        others = others[others > 0]
        radius = 0.5 * (others.min() if others.size else 1.0)
        h = build_scaled_hamiltonian(spec, r * m / steps * cmath.exp(1j * s), theta, N, s, prec)
        vals = eigen_spectrum(h).values
        order, d = _nearest(vals, E)
        if d[order[0]] > radius or (len(order) > 1 and d[order[1]] <= radius):
            cands = vals[order[:2]]
            return None, HomotopyAmbiguityError(cands, m)
        E = vals[order[0]]
        prev = vals
    return E, None


def _locate(spec, beta, s, theta, N, guess, opts):
    h = build_scaled_hamiltonian(spec, beta, theta, N, s, opts.prec)
    vals = eigen_spectrum(h).values
    order, _ = _nearest(vals, guess)
    E = complex(vals[order[0]])
    if not opts.refine:
        v, res = _inverse_iteration(h.matrix, E, h.bandwidth, 1.0)
        return E, None, float(res)
    E_mp, _, res = refine_eigenvalue(h, E, opts.prec)
    return complex(E_mp), E_mp, float(res)


def _dist(a, b, a_mp, b_mp):
    if a_mp is not None and b_mp is not None:
        return float(abs(a_mp - b_mp))
    return abs(a - b)


def trace_resonance(spec: OscillatorSpec, beta, opts: TraceOptions = TraceOptions(),
                    arg_beta: float | None = None) -> ResonanceEstimate:
    """Follow the eigenvalue that starts at ``2j+1`` out to coupling ``beta``.

    The level is identified by a coupling homotopy at fixed ``arg beta``;
    the truncation is then enlarged along ``opts.N_schedule`` until
    successive estimates differ by less than ``opts.tol``, and the dilation
    angle is perturbed over ``opts.theta_probes`` to measure the plateau.
    """
    r = abs(beta)
    if r == 0:
        E0 = complex(spec.unperturbed)
        return ResonanceEstimate(E0, 0, 0.0, 0.0, 0.0, 0.0, True, False,
                                 mp.mpc(spec.unperturbed), 0)
    s = cmath.phase(beta) if arg_beta is None else float(arg_beta)
    choice = choose_theta(s, spec.k)
    theta = choice.theta
    probes = [theta + dt for dt in opts.theta_probes if in_parallelogram_P(s, theta + dt, spec.k)]
    if not probes:
        raise InadmissibleError(f"no admissible dilation angle for arg beta = {s}")
    if not in_parallelogram_P(s, theta, spec.k):
        theta = probes[0]

    N0 = opts.N_schedule[0]
    steps = opts.homotopy_steps
    for _ in range(opts.max_doublings + 1):
        E, err = _homotopy(spec, r, s, theta, N0, steps, opts.prec)
        if err is None:
            break
        steps *= 2
    else:
        raise err

    beta_c = complex(beta) if arg_beta is None else r * cmath.exp(1j * s)
    E, E_mp, res = _locate(spec, beta_c, s, theta, N0, E, opts)
    N_used, delta, converged = N0, math.inf, False
    for N in opts.N_schedule[1:]:
        E_new, E_new_mp, res = _locate(spec, beta_c, s, theta, N, E, opts)
        delta = _dist(E_new, E, E_new_mp, E_mp)
        E, E_mp, N_used = E_new, E_new_mp, N
        if delta < opts.tol:
            converged = True
            break
    if len(opts.N_schedule) == 1:
        delta = 0.0

    probe_values = {theta: E_mp if E_mp is not None else E}
    spread = 0.0
    for th in probes:
        if th == theta:
            continue
        Ep, Ep_mp, _ = _locate(spec, beta_c, s, th, N_used, E, opts)
        probe_values[th] = Ep_mp if Ep_mp is not None else Ep
    vals = list(probe_values.values())
    for i in range(len(vals)):
        for jj in range(i + 1, len(vals)):
            spread = max(spread, float(abs(vals[i] - vals[jj])))
    return ResonanceEstimate(E, N_used, theta, spread, float(delta), res, converged,
                             choice.flagged, E_mp, steps, probe_values)
