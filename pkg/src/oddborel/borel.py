"""Borel-Leroy transform, Padé continuation and Laplace-type resummation.

The distributional sum of a real series with Borel transform ``B`` is

    f(|beta|) = int_0^inf PP B(|beta| tau^q) e^{-tau} dtau

after the substitution ``tau = (t/|beta|)^(1/q)``.  ``B`` is replaced by a
diagonal Padé approximant; simple real poles on the integration path are
removed by subtracting their principal part in ``tau`` and adding back the
closed-form principal value of ``rho/(tau - tau_p)`` against ``e^{-tau}``.
The same poles, taken as ``B(t + i0)``, give the imaginary part ``g``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import mpmath as mp

from .quadrature import gauss_laguerre
from .series import OscillatorSpec, RSExpansion

log = logging.getLogger(__name__)

DEFAULT_PREC = 256


class PadeDefectWarning(UserWarning):
    """The requested Padé order had a singular Toeplitz block."""


class PoleAtPointError(ArithmeticError):
    """Boundary value requested at a real pole of the approximant."""

    def __init__(self, t, pole, real_part):
        super().__init__(f"t = {mp.nstr(t, 15)} coincides with a real pole "
                         f"at {mp.nstr(pole, 15)}")
        self.t = t
        self.pole = pole
        self.real_part = real_part


class PadeDefectError(ArithmeticError):
    """No non-defective Padé approximant of order >= 0 exists."""


def _to_mpf(x):
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpmathify(x)


# ---------------------------------------------------------------------------
# Borel-Leroy coefficients


@dataclass(frozen=True)
class BorelSeries:
    """Coefficients ``b_s = a_s / Gamma(q s + 1)``."""

    b: tuple
    q: Fraction
    spec: OscillatorSpec | None = None

    @property
    def order(self) -> int:
        return len(self.b) - 1

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (Fraction, int)) for c in self.b)

    def radius_estimate(self):
        """Root-test estimate of the convergence radius from the last nonzero term."""
        for s in range(self.order, 0, -1):
            c = self.b[s]
            if c:
                return mp.mpf(1) / abs(_to_mpf(c)) ** (mp.mpf(1) / s)
        return mp.inf


def leroy_transform(exp: RSExpansion) -> BorelSeries:
    """Exact Borel-Leroy coefficients of an oscillator expansion.

    Only even orders are nonzero, and ``Gamma(q 2l + 1) = ((2k-1) l)!`` is an
    integer, so every coefficient stays rational.
    """
    k = exp.spec.k
    b = []
    for s, a_s in enumerate(exp.a):
        if s % 2:
            if a_s:
                raise ValueError(f"odd coefficient a_{s} is nonzero")
            b.append(Fraction(0))
        else:
            b.append(Fraction(a_s) / factorial((2 * k - 1) * (s // 2)))
    return BorelSeries(tuple(b), exp.spec.q, exp.spec)


def borel_leroy(coeffs, q, prec: int = DEFAULT_PREC) -> BorelSeries:
    """Borel-Leroy coefficients of an arbitrary series.

    Orders where ``q s`` is an integer are divided exactly by a factorial;
    the rest use ``mpmath.gamma`` at ``prec`` bits.
    """
    q = Fraction(q)
    out = []
    with mp.workprec(prec):
        for s, a in enumerate(coeffs):
            qs = q * s
            if qs.denominator == 1 and isinstance(a, (int, Fraction)):
                out.append(Fraction(a) / factorial(int(qs)))
            else:
                out.append(_to_mpf(a) / mp.gamma(mp.mpf(qs.numerator) / qs.denominator + 1))
    return BorelSeries(tuple(out), q)


# ---------------------------------------------------------------------------
# Padé approximants


def _solve_exact(A, y):
    n = len(y)
    rows = [list(A[i]) + [y[i]] for i in range(n)]
    for c in range(n):
        p = next((r for r in range(c, n) if rows[r][c] != 0), None)
        if p is None:
            return None
        rows[c], rows[p] = rows[p], rows[c]
        piv = rows[c][c]
        for r in range(n):
            if r != c and rows[r][c] != 0:
                f = rows[r][c] / piv
                rows[r] = [x - f * z for x, z in zip(rows[r], rows[c])]
    return [rows[i][n] / rows[i][i] for i in range(n)]


def _solve_float(A, y, prec):
    # partial pivoting; a pivot below 2^(-prec/2) of the largest entry counts
    # as a singular (defective) block
    n = len(y)
    rows = [[_to_mpf(v) for v in A[i]] + [_to_mpf(y[i])] for i in range(n)]
    big = max((abs(v) for row in rows for v in row[:n]), default=mp.mpf(0))
    tiny = mp.mpf(2) ** (-prec // 2) * (big or 1)
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(rows[r][c]))
        if abs(rows[p][c]) <= tiny:
            return None
        rows[c], rows[p] = rows[p], rows[c]
        for r in range(c + 1, n):
            f = rows[r][c] / rows[c][c]
            if f:
                rows[r] = [x - f * z for x, z in zip(rows[r], rows[c])]
    sol = [mp.mpf(0)] * n
    for r in range(n - 1, -1, -1):
        acc = rows[r][n] - sum(rows[r][i] * sol[i] for i in range(r + 1, n))
        sol[r] = acc / rows[r][r]
    return sol


@dataclass
class PadeApproximant:
    """``[L/M]`` rational function with ``denominator[0] == 1``."""

    numerator: list
    denominator: list
    L: int
    M: int
    prec: int = DEFAULT_PREC
    requested_M: int | None = None
    _roots: list | None = field(default=None, repr=False, compare=False)

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.numerator + self.denominator)

    def _eval(self, coeffs, t):
        acc = mp.mpc(0)
        for c in reversed(coeffs):
            acc = acc * t + _to_mpf(c)
        return acc

    def num(self, t):
        return self._eval(self.numerator, t)

    def den(self, t):
        return self._eval(self.denominator, t)

    def den_prime(self, t):
        d = [c * i for i, c in enumerate(self.denominator)][1:]
        return self._eval(d, t) if d else mp.mpc(0)

    def __call__(self, t):
        with mp.workprec(self.prec):
            val = self.num(t) / self.den(t)
            if not isinstance(t, mp.mpc) and mp.im(val) == 0:
                return mp.re(val)
            return val

    def poles(self) -> list:
        """Roots of the denominator at ``prec`` bits (cached)."""
        if self._roots is None:
            coeffs = list(self.denominator)
            while len(coeffs) > 1 and coeffs[-1] == 0:
                coeffs.pop()
            if len(coeffs) <= 1:
                self._roots = []
            else:
                with mp.workprec(self.prec):
                    self._roots = list(mp.polyroots([_to_mpf(c) for c in reversed(coeffs)],
                                                    maxsteps=400, extraprec=2 * self.prec))
        return self._roots

    def residue(self, pole):
        with mp.workprec(self.prec):
            return self.num(pole) / self.den_prime(pole)

    def taylor(self, n: int) -> list:
        """Maclaurin coefficients of ``numerator/denominator`` through order ``n``."""
        out = []
        P, Q = self.numerator, self.denominator
        for s in range(n + 1):
            c = P[s] if s < len(P) else 0
            for i in range(1, min(s, len(Q) - 1) + 1):
                c -= Q[i] * out[s - i]
            out.append(c / Q[0])
        return out


def pade_construct(series, M: int, prec: int = DEFAULT_PREC) -> PadeApproximant:
    """Diagonal ``[M/M]`` approximant matching the input through order ``2M``.

    ``series`` is a :class:`BorelSeries` or a plain coefficient sequence.
    Rational inputs are solved exactly.  If the Toeplitz block of order ``M``
    is singular the largest non-defective order below it is returned and a
    :class:`PadeDefectWarning` is issued.
    """
    c = list(series.b if isinstance(series, BorelSeries) else series)
    if M < 0:
        raise ValueError("M must be non-negative")
    if 2 * M > len(c) - 1:
        raise ValueError(f"[{M}/{M}] needs {2 * M + 1} coefficients, got {len(c)}")
    exact = all(isinstance(v, (int, Fraction)) for v in c)
    if exact:
        c = [Fraction(v) for v in c]
    zero = Fraction(0) if exact else mp.mpf(0)
    one = Fraction(1) if exact else mp.mpf(1)

    with mp.workprec(prec):
        for m in range(M, -1, -1):
            if m == 0:
                qs = []
            else:
                A = [[c[m + r - i] if m + r - i >= 0 else zero for i in range(1, m + 1)]
                     for r in range(1, m + 1)]
                y = [-c[m + r] for r in range(1, m + 1)]
                qs = _solve_exact(A, y) if exact else _solve_float(A, y, prec)
                if qs is None:
                    continue
            Q = [one] + list(qs)
            P = [sum((Q[i] * c[l - i] for i in range(min(l, m) + 1)), zero) for l in range(m + 1)]
            if m != M:
                warnings.warn(f"[{M}/{M}] Padé block is singular; using [{m}/{m}]",
                              PadeDefectWarning, stacklevel=2)
            return PadeApproximant(P, Q, m, m, prec, requested_M=M)
    raise PadeDefectError("no non-defective Padé approximant")  # pragma: no cover


# ---------------------------------------------------------------------------
# boundary values


@dataclass(frozen=True)
class BoundaryValue:
    value: mp.mpc
    residual: mp.mpf
    deltas: tuple


def boundary_value(p: PadeApproximant, t, delta0=None, halvings: int = 12,
                   richardson: int = 2, resolution=None) -> BoundaryValue:
    """``lim_{delta -> 0+} p(t + i delta)`` by Richardson extrapolation.

    ``p(t + i delta)`` is sampled at ``delta_m = delta_0 2^-m``; two rounds of
    Richardson elimination remove the ``delta`` and ``delta^2`` terms.  The
    default ``delta_0`` is ``1e-2`` times the distance to the nearest pole.
    """
    with mp.workprec(p.prec):
        t = mp.mpf(t)
        if t <= 0:
            raise ValueError("t must be positive")
        poles = p.poles()
        if resolution is None:
            resolution = mp.mpf(2) ** (-p.prec // 2) * max(1, abs(t))
        dist = min((abs(t - z) for z in poles), default=mp.inf)
        if delta0 is None:
            delta0 = mp.mpf("1e-2") * (dist if mp.isfinite(dist) else 1)
            delta0 = max(delta0, resolution)
        deltas = [mp.mpf(delta0) / 2 ** m for m in range(halvings + 1)]
        values = [p.num(t + 1j * d) / p.den(t + 1j * d) for d in deltas]
        table = list(values)
        prev = table[-2] if len(table) > 1 else table[-1]
        for order in range(1, richardson + 1):
            fac = mp.mpf(2) ** order
            prev = table[-2] if len(table) > 1 else table[-1]
            table = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
        value = table[-1]
        residual = abs(table[-1] - table[-2]) if len(table) > 1 else abs(table[-1] - prev)
        on_pole = [z for z in poles if abs(mp.im(z)) <= resolution and abs(t - mp.re(z)) <= resolution]
        if on_pole:
            raise PoleAtPointError(t, on_pole[0], mp.re(value))
        return BoundaryValue(value, residual, tuple(deltas))


# ---------------------------------------------------------------------------
# Laplace-type sums


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature settings shared by the resummation integrals."""

    nodes: int = 64
    prec: int = DEFAULT_PREC
    support_tol: float = 1e-16
    agree_tol: float = 1e-10
    ray_tol: float = 1e-3


@dataclass(frozen=True)
class PoleInfo:
    t: mp.mpc
    tau: mp.mpf | None
    residue: mp.mpc
    on_path: bool


@dataclass
class SumDiagnostics:
    quad_error: mp.mpf
    poles: list
    excised: bool
    extrapolation_residual: mp.mpf | None
    pade_order: int
    low_confidence: bool = False
    support_radius: mp.mpf | None = None
    agreement_radius: mp.mpf | None = None


@dataclass
class SumResult:
    f: mp.mpf
    g: mp.mpf
    diagnostics: SumDiagnostics


def _real_axis_poles(p: PadeApproximant):
    tol = mp.mpf(2) ** (-p.prec // 2)
    out = []
    for z in p.poles():
        if abs(mp.im(z)) <= tol * max(1, abs(z)) and mp.re(z) > 0:
            out.append(mp.re(z))
    return sorted(out)


def _agreement(p, ref, ts, tol):
    """Smallest ``t`` in ``ts`` where ``p`` and ``ref`` disagree (or ``inf``)."""
    for t in sorted(ts):
        a, b = p(t), ref(t)
        if abs(a - b) > tol * (1 + abs(a)):
            return t
    return mp.inf


def distributional_sum(p: PadeApproximant, beta_abs, q, quad: QuadSpec = QuadSpec(),
                       reference: PadeApproximant | None = None) -> SumResult:
    """Principal-value Borel-Leroy sum ``f`` and discontinuity part ``g``.

    Depends on the coupling only through ``beta_abs``, so ``f(beta) = f(-beta)``
    holds by construction.  ``g`` is the imaginary part of the sum taken with
    ``B(t + i0)``, i.e. the continuation from ``Im beta > 0``.  When
    ``reference`` (a lower-order approximant) is given, the result is marked
    low-confidence if the integrand's effective support reaches past the
    region where the two approximants agree.
    """
    q = Fraction(q)
    prec = max(quad.prec, p.prec)
    with mp.workprec(prec):
        beta = mp.mpf(beta_abs)
        if not beta > 0:
            raise ValueError("beta_abs must be positive")
        qf = mp.mpf(q.numerator) / q.denominator
        poles = []
        subtract = []
        for tp in _real_axis_poles(p):
            taup = (tp / beta) ** (1 / qf)
            r_t = p.residue(tp)
            rho = r_t / (beta * qf * taup ** (qf - 1))
            subtract.append((taup, rho))
            poles.append(PoleInfo(tp, taup, r_t, True))
        for z in p.poles():
            # complex poles in the sector |arg t| < pi/4 are reported, not excised
            if mp.re(z) > abs(mp.im(z)) and all(abs(z - pi.t) > 0 for pi in poles):
                poles.append(PoleInfo(z, None, p.residue(z), False))

        def h(tau):
            val = p.num(beta * tau ** qf) / p.den(beta * tau ** qf)
            for taup, rho in subtract:
                val -= rho / (tau - taup)
            return val

        def rule(n):
            xs, ws = gauss_laguerre(n, prec)
            vals = [h(x) for x in xs]
            return sum(w * v for w, v in zip(ws, vals)), xs, ws, vals

        total, xs, ws, vals = rule(quad.nodes)
        coarse, *_ = rule(max(quad.nodes // 2, 1))
        quad_err = abs(total - coarse)

        f = mp.re(total)
        g = mp.im(total)
        for taup, rho in subtract:
            f += mp.re(rho * (-mp.exp(-taup) * mp.ei(taup)))
            g += mp.re(-mp.pi * rho * mp.exp(-taup))

        # boundary-value consistency check next to the nearest crossed pole
        extrap = None
        if subtract:
            tp = poles[0].t
            probe = [tp * (1 - mp.mpf("0.05")), tp * (1 + mp.mpf("0.05"))]
            extrap = mp.mpf(0)
            for t in probe:
                bv = boundary_value(p, t)
                extrap = max(extrap, abs(bv.value - p.num(t) / p.den(t)), bv.residual)

        diag = SumDiagnostics(quad_err, poles, bool(subtract), extrap, p.M)
        if reference is not None:
            scale = max(abs(f), mp.mpf(1))
            support = [beta * x ** qf for x, w, v in zip(xs, ws, vals)
                       if abs(w * v) > quad.support_tol * scale]
            diag.support_radius = max(support) if support else mp.mpf(0)
            diag.agreement_radius = _agreement(p, reference, [beta * x ** qf for x in xs],
                                               quad.agree_tol)
            diag.low_confidence = diag.support_radius >= diag.agreement_radius
        return SumResult(f, g, diag)


@dataclass
class RaySum:
    value: mp.mpc
    quad_error: mp.mpf
    pole_distance: mp.mpf
    near_pole: bool


def ordinary_sum(p: PadeApproximant, beta, q, quad: QuadSpec = QuadSpec(),
                 arg_beta=None) -> RaySum:
    """Ordinary Borel-Leroy sum for ``0 < arg beta < pi``.

    Integrates ``B(beta tau^q) e^{-tau}`` along the ray ``t = beta tau^q``,
    which never meets the positive real axis.  ``arg_beta`` overrides the
    principal argument of ``beta`` when given.
    """
    q = Fraction(q)
    prec = max(quad.prec, p.prec)
    with mp.workprec(prec):
        beta = mp.mpc(beta)
        s = mp.mpf(arg_beta) if arg_beta is not None else mp.arg(beta)
        if not (0 < s < mp.pi):
            raise ValueError(f"arg beta = {mp.nstr(s, 10)} is outside (0, pi)")
        if arg_beta is not None:
            beta = abs(beta) * mp.expj(s)
        qf = mp.mpf(q.numerator) / q.denominator
        direction = mp.expj(s)
        # distance from each pole to the ray {beta s, s >= 0}, relative to |pole|
        dist = mp.inf
        for z in p.poles():
            proj = mp.re(z * mp.conj(direction))
            d = abs(z) if proj <= 0 else abs(z - proj * direction)
            dist = min(dist, d / max(abs(z), mp.mpf(1)))

        def rule(n):
            xs, ws = gauss_laguerre(n, prec)
            return sum(w * p.num(beta * x ** qf) / p.den(beta * x ** qf) for x, w in zip(xs, ws))

        total = rule(quad.nodes)
        coarse = rule(max(quad.nodes // 2, 1))
        return RaySum(total, abs(total - coarse), dist, bool(dist < quad.ray_tol))


# ---------------------------------------------------------------------------
# remainder diagnostics


def remainder_profile(a, E, beta, q, Ns, prec: int = DEFAULT_PREC):
    """``r_N = log|E - sum_{s<N} a_s beta^s| - log Gamma(qN+1) - N log|beta|``.

    ``E`` should be known well below the smallest remainder in the window.
    """
    q = Fraction(q)
    out = []
    with mp.workprec(prec):
        beta = mp.mpc(beta)
        E = mp.mpc(E)
        qf = mp.mpf(q.numerator) / q.denominator
        for N in Ns:
            partial = mp.fsum(_to_mpf(a[s]) * beta ** s for s in range(N))
            rem = abs(E - partial)
            out.append(mp.log(rem) - mp.loggamma(qf * N + 1) - N * mp.log(abs(beta)))
    return out


def affine_majorant(xs, ys):
    """Tightest line ``c0 + c1 x >= y`` on the samples (least total gap).

    The optimum of that linear program passes through two samples, so the
    candidate lines through every pair are enumerated.  Returns
    ``(c0, c1, margin)`` with ``margin = min(c0 + c1 x - y)``; gaps at the
    rounding level of the working precision are reported as exact zeros.
    """
    xs = [mp.mpf(x) for x in xs]
    ys = [mp.mpf(y) for y in ys]
    if len(xs) < 2:
        raise ValueError("need at least two samples")
    tol = mp.mpf(10) ** (-mp.mp.dps + 4) * (1 + max(abs(y) for y in ys))
    best = None
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            if xs[i] == xs[j]:
                continue
            c1 = (ys[j] - ys[i]) / (xs[j] - xs[i])
            c0 = ys[i] - c1 * xs[i]
            gaps = [c0 + c1 * x - y for x, y in zip(xs, ys)]
            if min(gaps) < -tol:
                continue
            total = mp.fsum(gaps)
            if best is None or total < best[0]:
                best = (total, c0, c1, min(gaps))
    _, c0, c1, margin = best
    if abs(margin) <= tol:
        margin = mp.mpf(0)
    return c0, c1, margin
