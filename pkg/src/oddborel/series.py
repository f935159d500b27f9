"""Exact Rayleigh-Schrödinger coefficients for ``p^2 + x^2 + beta x^(2k+1)``.

All arithmetic is done with :class:`fractions.Fraction`.  The harmonic number
basis is rescaled by ``gamma_n = sqrt(n!) 2^(-n/2)`` so that the position
operator becomes the rational band matrix with sub-diagonal ``1`` and
super-diagonal ``(m+1)/2``; the rescaling is a similarity transform and does
not change any eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial


class ConsistencyError(RuntimeError):
    """Raised when an exact identity that must hold by parity is violated."""


@dataclass(frozen=True)
class OscillatorSpec:
    """Perturbation exponent ``2k+1`` and level index ``j``."""

    k: int
    j: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if int(self.j) != self.j or self.j < 0:
            raise ValueError(f"j must be a non-negative integer, got {self.j!r}")

    @property
    def q(self) -> Fraction:
        """Borel-Leroy order ``(2k-1)/2``."""
        return Fraction(2 * self.k - 1, 2)

    @property
    def power(self) -> int:
        return 2 * self.k + 1

    @property
    def unperturbed(self) -> int:
        return 2 * self.j + 1


class BandMatrixRational:
    """Square band matrix with exact rational entries.

    Stored by diagonals: ``bands[d][i]`` is the entry at ``(i, i + d)`` for
    ``d >= 0`` and at ``(i - d, i)`` for ``d < 0``.
    """

    def __init__(self, n: int, width: int, bands: dict[int, list[Fraction]] | None = None):
        self.n = n
        self.width = width
        self.bands = {}
        for d in range(-width, width + 1):
            length = max(n - abs(d), 0)
            vals = (bands or {}).get(d)
            self.bands[d] = list(vals) if vals is not None else [Fraction(0)] * length

    def __getitem__(self, idx):
        r, c = idx
        if not (0 <= r < self.n and 0 <= c < self.n):
            raise IndexError(idx)
        d = c - r
        if abs(d) > self.width:
            return Fraction(0)
        return self.bands[d][min(r, c)]

    def __setitem__(self, idx, value):
        r, c = idx
        d = c - r
        if abs(d) > self.width:
            raise IndexError(f"({r}, {c}) lies outside bandwidth {self.width}")
        self.bands[d][min(r, c)] = Fraction(value)

    def __matmul__(self, other: "BandMatrixRational") -> "BandMatrixRational":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        n = self.n
        out = BandMatrixRational(n, min(self.width + other.width, max(n - 1, 0)))
        for r in range(n):
            for d1 in range(-self.width, self.width + 1):
                m = r + d1
                if not 0 <= m < n:
                    continue
                a = self.bands[d1][min(r, m)]
                if not a:
                    continue
                for d2 in range(-other.width, other.width + 1):
                    c = m + d2
                    if not 0 <= c < n:
                        continue
                    b = other.bands[d2][min(m, c)]
                    if b:
                        out.bands[c - r][min(r, c)] += a * b
        return out

    def apply(self, vec: list[Fraction], rows: int | None = None) -> list[Fraction]:
        """Matrix-vector product, optionally only for the first ``rows`` rows."""
        n = self.n if rows is None else min(rows, self.n)
        out = [Fraction(0)] * self.n
        for r in range(n):
            acc = Fraction(0)
            for d in range(-self.width, self.width + 1):
                c = r + d
                if 0 <= c < self.n and vec[c]:
                    acc += self.bands[d][min(r, c)] * vec[c]
            out[r] = acc
        return out

    def block(self, n: int) -> "BandMatrixRational":
        """Leading ``n x n`` block."""
        n = min(n, self.n)
        w = min(self.width, max(n - 1, 0))
        return BandMatrixRational(n, w, {d: self.bands[d][:max(n - abs(d), 0)]
                                         for d in range(-w, w + 1)})

    def to_rows(self) -> list[list[Fraction]]:
        return [[self[r, c] for c in range(self.n)] for r in range(self.n)]

    def __eq__(self, other):
        if not isinstance(other, BandMatrixRational):
            return NotImplemented
        return self.n == other.n and self.to_rows() == other.to_rows()

    def __repr__(self):
        return f"BandMatrixRational(n={self.n}, width={self.width})"


def scaled_position_matrix(N: int) -> BandMatrixRational:
    """Position operator in the rescaled number basis, truncated to ``N x N``.

    ``X[m][m-1] = 1`` and ``X[m][m+1] = (m+1)/2``.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    X = BandMatrixRational(N, 1 if N > 1 else 0)
    for m in range(N - 1):
        X[m, m + 1] = Fraction(m + 1, 2)
        X[m + 1, m] = 1
    return X


def potential_matrix(k: int, N: int) -> BandMatrixRational:
    """Leading ``N x N`` block of ``X^(2k+1)``.

    The power is formed on a padded basis so every returned entry equals the
    corresponding entry of the untruncated operator.
    """
    if k < 1 or N < 1:
        raise ValueError("need k >= 1 and N >= 1")
    m = 2 * k + 1
    X = scaled_position_matrix(N + m)
    P = X
    for _ in range(m - 1):
        P = P @ X
    return P.block(N)


@dataclass
class RSExpansion:
    spec: OscillatorSpec
    order: int
    a: list[Fraction]
    state_corrections: list[list[Fraction]] | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.a) != self.order + 1:
            raise ValueError("coefficient list length must be order + 1")

    def partial_sum(self, beta, n_terms: int):
        """Sum of the first ``n_terms`` coefficients times ``beta**s``."""
        total = 0
        for s in range(min(n_terms, self.order + 1)):
            if self.a[s]:
                total += self.a[s] * beta ** s
        return total


def rs_expand(spec: OscillatorSpec, S: int, keep_states: bool = False) -> RSExpansion:
    """Coefficients ``a_0 .. a_S`` of the eigenvalue near ``2j+1``.

    Uses intermediate normalisation (component ``j`` of each correction is
    zero).  The order-``s`` correction is supported on indices
    ``<= j + (2k+1) s``, so the basis below is large enough for the result
    to be exact rather than truncated.
    """
    if S < 0:
        raise ValueError("S must be non-negative")
    j, m = spec.j, spec.power
    N = j + m * S + 1
    V = potential_matrix(spec.k, N)

    u0 = [Fraction(0)] * N
    u0[j] = Fraction(1)
    states = [u0]
    a = [Fraction(spec.unperturbed)]
    for s in range(1, S + 1):
        support = j + m * s + 1
        Vu = V.apply(states[s - 1], rows=support)
        a_s = Vu[j]
        if s % 2 == 1 and a_s != 0:
            raise ConsistencyError(f"odd coefficient a_{s} = {a_s} is nonzero")
        a.append(a_s)
        u = [Fraction(0)] * N
        for n in range(support):
            if n == j:
                continue
            acc = -Vu[n]
            for t in range(2, s, 2):
                if a[t]:
                    c = states[s - t][n]
                    if c:
                        acc += a[t] * c
            if acc:
                u[n] = acc / (2 * (n - j))
        states.append(u)
    return RSExpansion(spec, S, a, states if keep_states else None)


def _ladder_amplitudes(j: int, power: int) -> dict[int, int]:
    """Integer ``c_n`` with ``<n|(a + a^dagger)^power|j> = c_n sqrt(n!/j!)``."""
    amps = {j: 1}
    for _ in range(power):
        nxt: dict[int, int] = {}
        for n, c in amps.items():
            # a^dagger |n> = sqrt(n+1) |n+1>
            nxt[n + 1] = nxt.get(n + 1, 0) + c
            # a |n> = sqrt(n) |n-1>
            if n > 0:
                nxt[n - 1] = nxt.get(n - 1, 0) + n * c
        amps = {n: c for n, c in nxt.items() if c}
    return amps


def second_order_oracle(spec: OscillatorSpec) -> Fraction:
    """Textbook sum over states for ``a_2``.

    Expands ``x^(2k+1)|j>`` with ladder operators, ``x = (a + a^dagger)/sqrt 2``,
    and sums ``|<n|x^(2k+1)|j>|^2 / (E_j - E_n)``.  Squared moduli are
    rational even though the matrix elements themselves are not.
    """
    j, m = spec.j, spec.power
    total = Fraction(0)
    for n, c in _ladder_amplitudes(j, m).items():
        if n == j:
            continue
        mod2 = Fraction(c * c * factorial(n), factorial(j) * 2 ** m)
        total += mod2 / (2 * (j - n))
    return total
