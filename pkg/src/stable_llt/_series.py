"""Tail sums of slowly decaying sequences.

Three families of summands appear as pmf tails:

* ``power``             f(k) = k**(-s)
* ``log_power``         f(k) = log(k)**sigma * k**(-s)
* ``geometric_square``  f(k) = 1 / (k**2 * 2**k)

Non-oscillatory tails (masses, moments) are summed with the Euler-Maclaurin
formula or closed forms; oscillatory tails sum_{k>K} f(k) z**k use Lerch's
transcendent (power) or repeated summation by parts (log-power).
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import special

# Euler-Maclaurin starts here; smaller indices are summed directly.
EM_START = 1024
# Beyond this many terms a geometric tail is below 2**-80 of its head.
GEOMETRIC_TERMS = 80
# Largest index summed term by term in oscillatory tails.
DIRECT_CAP = 1 << 26


def _log_power_derivatives(p: float, sigma: float, order: int):
    """Coefficient maps for d^j/dx^j [x**-p * log(x)**sigma], j = 0..order.

    Entry j is (p_j, {e: coef}) meaning x**-p_j * sum coef * log(x)**e.
    """
    out = [(p, {sigma: 1.0})]
    for _ in range(order):
        pj, terms = out[-1]
        nxt: dict[float, float] = {}
        for e, coef in terms.items():
            nxt[e] = nxt.get(e, 0.0) - pj * coef
            if e != 0:
                nxt[e - 1] = nxt.get(e - 1, 0.0) + e * coef
        out.append((pj + 1, nxt))
    return out


def _eval_terms(x, p, terms):
    lx = np.log(x)
    acc = np.zeros_like(lx)
    for e, coef in terms.items():
        acc = acc + coef * lx ** e
    return acc * x ** (-p)


def log_power_values(k, s: float, sigma: float):
    k = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(k > 1, np.log(np.maximum(k, 1.0)) ** sigma * k ** (-s), 0.0)
    return out


def _log_power_em(a, s: float, sigma: float):
    """sum_{k>=a} log(k)**sigma k**-s for a >= EM_START, with remainder bound."""
    a = np.asarray(a, dtype=float)
    q = s - 1.0
    integral = q ** (-sigma - 1) * special.gamma(sigma + 1) * special.gammaincc(sigma + 1, q * np.log(a))
    ders = _log_power_derivatives(s, sigma, 5)
    f0 = _eval_terms(a, *ders[0])
    f1 = _eval_terms(a, *ders[1])
    f3 = _eval_terms(a, *ders[3])
    f5 = _eval_terms(a, *ders[5])
    total = integral + f0 / 2 - f1 / 12 + f3 / 720
    return total, np.abs(f5) / 30240


_LOG_POWER_PREFIX: dict[tuple[float, float], np.ndarray] = {}


def _log_power_prefix(s: float, sigma: float) -> np.ndarray:
    key = (s, sigma)
    if key not in _LOG_POWER_PREFIX:
        k = np.arange(EM_START + 1, dtype=float)
        vals = log_power_values(k, s, sigma)
        # prefix[i] = sum_{k < i} f(k)
        _LOG_POWER_PREFIX[key] = np.concatenate(([0.0], np.cumsum(vals)))
    return _LOG_POWER_PREFIX[key]


def tail_sum(kind: str, x, s: float = 0.0, sigma: float = 0.0, shift: int = 0):
    """sum_{k > x} k**shift f(k) for integer array ``x`` (x >= 0).

    Returns ``(value, bound)`` where ``bound`` is an absolute remainder bound
    (zero where the value is a closed form to machine precision).
    """
    x = np.asarray(x, dtype=np.int64)
    if kind == "power":
        val = special.zeta(s - shift, x + 1.0)
        return val, np.zeros_like(val)
    if kind == "log_power":
        q = s - shift
        start = np.maximum(x + 1, EM_START)
        em, bound = _log_power_em(start, q, sigma)
        prefix = _log_power_prefix(q, sigma)
        lo = np.minimum(x + 1, EM_START)
        direct = prefix[EM_START] - prefix[lo]
        return direct + em, bound
    if kind == "geometric_square":
        k = x[..., None] + 1 + np.arange(GEOMETRIC_TERMS)
        terms = k ** (shift - 2.0) * np.exp2(-k.astype(float))
        val = terms.sum(axis=-1)
        # remaining terms are below the last one times a geometric factor of 2
        bound = 2 * terms[..., -1]
        return val, bound
    if kind == "none":
        z = np.zeros(x.shape)
        return z, z
    raise ValueError(f"unknown tail kind {kind!r}")


def term_values(kind: str, k, s: float = 0.0, sigma: float = 0.0):
    """f(k) for the given family, k >= 1."""
    k = np.asarray(k, dtype=float)
    if kind == "power":
        return k ** (-s)
    if kind == "log_power":
        return log_power_values(k, s, sigma)
    if kind == "geometric_square":
        return 1.0 / (k * k) * np.exp2(-k)
    if kind == "none":
        return np.zeros_like(k)
    raise ValueError(f"unknown tail kind {kind!r}")


def oscillatory_tail(kind: str, t: float, start: int, s: float = 0.0, sigma: float = 0.0) -> complex:
    """sum_{k >= start} f(k) e^{itk}, accurate to well below 1e-14 absolute."""
    if kind == "none":
        return 0j
    if kind == "geometric_square":
        k = start + np.arange(GEOMETRIC_TERMS * 2)
        return complex(np.sum(term_values(kind, k) * np.exp(1j * t * k)))
    with mpmath.workdps(30):
        z = mpmath.expj(t)
        if kind == "power":
            if mpmath.almosteq(z, 1, 1e-28):
                return complex(mpmath.zeta(s, start))
            return complex(z ** start * mpmath.lerchphi(z, s, start))
    return _abel_log_power(t, start, s, sigma)


def _abel_log_power(t: float, start: int, s: float, sigma: float) -> complex:
    """Summation by parts for sum_{k>=a} f(k) z^k with f = log^sigma k * k^-s.

    S(f) = sum_{j<m} z^{a+j} D^j f(a) / (1-z)^{j+1} + (z/(1-z))^m S(D^m f),
    D the forward difference.  For eventually completely monotone f the
    remainder is bounded by |z/(1-z)|^m |D^{m-1} f(a)|.
    """
    one_minus_z = abs(2 * math.sin(t / 2))
    if one_minus_z == 0:
        val, _ = tail_sum("log_power", np.array([start - 1]), s=s, sigma=sigma)
        return complex(val[0])
    # the direct part covers indices where differences do not yet decay fast
    a = max(start, int(math.ceil(8 * (s + 1) / one_minus_z)))
    if a > DIRECT_CAP:
        if abs(t) < 1e-13 and s > 2:
            # |e^{itk} - 1| <= |t| k and sum k f(k) converges
            val, _ = tail_sum("log_power", np.array([start - 1]), s=s, sigma=sigma)
            return complex(val[0])
        raise ValueError(f"|t| = {abs(t):.3g} is too small for the oscillatory log-power tail sum")
    direct = 0j
    if a > start:
        direct = _direct_oscillatory(t, start, a, s, sigma)
    digits = 30 + int(40 * max(0.0, -math.log10(one_minus_z)))
    with mpmath.workdps(digits):
        z = mpmath.expj(t)
        w = 1 / (1 - z)
        m = 40
        vals = [mpmath.log(a + i) ** sigma * mpmath.mpf(a + i) ** (-s) for i in range(m + 1)]
        diffs = [vals]
        for _ in range(m):
            prev = diffs[-1]
            diffs.append([prev[i + 1] - prev[i] for i in range(len(prev) - 1)])
        total = mpmath.mpc(0)
        za = z ** a
        for j in range(m):
            term = za * z ** j * diffs[j][0] * w ** (j + 1)
            total += term
            if abs(term) < mpmath.mpf(10) ** -(digits - 5) * abs(total) and j > 2:
                break
    return direct + complex(total)


def _direct_oscillatory(t: float, start: int, stop: int, s: float, sigma: float) -> complex:
    acc = 0j
    chunk = 1 << 20
    for lo in range(start, stop, chunk):
        k = np.arange(lo, min(stop, lo + chunk), dtype=float)
        acc += complex(np.sum(log_power_values(k, s, sigma) * np.exp(1j * t * k)))
    return acc


def dilog_half() -> float:
    """Li_2(1/2) = pi^2/12 - log(2)^2/2."""
    return math.pi ** 2 / 12 - math.log(2) ** 2 / 2
