"""Gauss-Laguerre rules at arbitrary precision."""

from functools import lru_cache

import mpmath as mp
import numpy as np


def _laguerre_pair(n, x):
    # returns L_n(x), L_{n-1}(x)
    p0, p1 = mp.mpf(1), 1 - x
    if n == 0:
        return p0, mp.mpf(0)
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1 - x) * p1 - k * p0) / (k + 1)
    return p1, p0


@lru_cache(maxsize=32)
def _rule(n, prec):
    seeds, _ = np.polynomial.laguerre.laggauss(n)
    nodes, weights = [], []
    with mp.workprec(prec + 20):
        tol = mp.mpf(2) ** (-prec - 10)
        for s in seeds:
            x = mp.mpf(float(s))
            for _ in range(100):
                ln, lm = _laguerre_pair(n, x)
                dln = n * (ln - lm) / x
                step = ln / dln
                x -= step
                if abs(step) <= tol * abs(x):
                    break
            ln1, _ = _laguerre_pair(n + 1, x)
            nodes.append(x)
            weights.append(x / ((n + 1) ** 2 * ln1 ** 2))
    return tuple(nodes), tuple(weights)


def gauss_laguerre(n: int, prec: int = 256):
    """Nodes and weights for ``int_0^inf f(x) e^{-x} dx`` with ``n`` points.

    Double-precision seeds from numpy are polished by Newton iteration at
    ``prec`` bits.
    """
    if n < 1:
        raise ValueError("need at least one node")
    return _rule(int(n), int(prec))
