"""The limit stable law: parameters, characteristic function and density.

With tail constants c1, c2 of the one-step law the limit has

    psi(t) = exp(-c |t|^alpha (1 - i beta sign(t) tan(pi alpha / 2)))

where c = Gamma(1-alpha)(c1+c2)cos(pi alpha/2) and beta = (c1-c2)/(c1+c2).
For alpha = 2 the normalization b_n^2 = n h(b_n) gives c = 1/2, beta = 0.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

# Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15), on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate((-_XGK[:-1], _XGK[::-1]))  # 15 nodes, ascending
_KW = np.concatenate((_WGK[:-1], _WGK[::-1]))
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[9, 11, 13]] = _WG[2::-1]
_GW[7] = _WG[3]

PANEL_BUDGET = 20000


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


@dataclass(frozen=True)
class StableParams:
    alpha: float
    beta: float
    c: float
    c_prime: float = math.nan
    theta: float = math.nan

    def __post_init__(self):
        if not 0 < self.alpha <= 2 or self.alpha == 1:
            raise ValueError("alpha must lie in (0, 2] and differ from 1")
        if not -1 <= self.beta <= 1:
            raise ValueError("beta must lie in [-1, 1]")
        if not self.c > 0:
            raise ValueError("scale c must be positive")
        if self.alpha == 2 and self.beta != 0:
            raise ValueError("alpha = 2 forces beta = 0")
        if math.isnan(self.theta):
            cp, th = _zolotarev(self.alpha, self.beta, self.c)
            object.__setattr__(self, "c_prime", cp)
            object.__setattr__(self, "theta", th)

    @classmethod
    def gaussian(cls) -> "StableParams":
        return cls(2.0, 0.0, 0.5)

    @classmethod
    def from_tails(cls, alpha: float, c1: float, c2: float) -> "StableParams":
        return from_tails(alpha, c1, c2)

    @classmethod
    def for_law(cls, law) -> "StableParams":
        """Limit law of S_n / b_n with b_n from the law's slowly varying factor."""
        if law.alpha == 2:
            return cls.gaussian()
        return from_tails(law.alpha, law.c1, law.c2)

    @property
    def skew(self) -> float:
        """beta tan(pi alpha / 2); zero for alpha = 2."""
        if self.alpha == 2:
            return 0.0
        return self.beta * math.tan(math.pi * self.alpha / 2)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "c": self.c,
                "c_prime": self.c_prime, "theta": self.theta}


def from_tails(alpha: float, c1: float, c2: float) -> StableParams:
    if not 0 < alpha < 2 or alpha == 1:
        raise ValueError("from_tails needs alpha in (0, 2), alpha != 1")
    if c1 < 0 or c2 < 0 or not c1 + c2 > 0:
        raise ValueError("tail constants must be non-negative with c1 + c2 > 0")
    c = special.gamma(1 - alpha) * (c1 + c2) * math.cos(math.pi * alpha / 2)
    beta = (c1 - c2) / (c1 + c2)
    return StableParams(alpha, beta, float(c))


def _zolotarev(alpha, beta, c):
    if alpha == 2:
        return c, 0.0
    # tan(pi theta alpha / 2) = beta tan(pi alpha / 2), principal branch
    u = math.atan(beta * math.tan(math.pi * alpha / 2))
    theta = 2 * u / (math.pi * alpha) + 0.0  # no negative zero
    return c / math.cos(u), theta


def zolotarev_form(p: StableParams) -> tuple[float, float]:
    """(c', theta) with log psi(t) = -c' |t|^alpha exp(-i (pi/2) theta alpha sign t)."""
    return p.c_prime, p.theta


def char_fn(p: StableParams, t):
    t = np.asarray(t, dtype=float)
    ta = np.abs(t) ** p.alpha
    out = np.exp(-p.c * ta * (1 - 1j * p.skew * np.sign(t)))
    return complex(out) if out.ndim == 0 else out


# -- density ------------------------------------------------------------------


def _truncation(p: StableParams, tol: float) -> float:
    """T with (1/pi) int_T^inf exp(-c t^alpha) dt <= tol / 10."""
    a, c = p.alpha, p.c
    T = (math.log(10 / tol) / c) ** (1 / a)

    def tail(T):
        s = 1 / a
        return special.gammaincc(s, c * T ** a) * special.gamma(s) / (a * c ** s) / math.pi

    while tail(T) > tol / 10:
        T *= 1.25
    return T


def _gk_panel(f, a, b):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    y = f(mid + half * _NODES)
    k = half * np.dot(_KW, y)
    g = half * np.dot(_GW, y)
    return k, abs(k - g)


def _adaptive(f, a, b, tol, n_init):
    edges = np.linspace(a, b, n_init + 1)
    heap = []
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = _gk_panel(f, lo, hi)
        heap.append((-e, lo, hi, v))
        total += v
        err += e
    heapq.heapify(heap)
    panels = len(heap)
    while err > tol:
        if panels >= PANEL_BUDGET:
            raise QuadratureError(f"quadrature error estimate {err:.3g} above {tol:.3g} after {panels} panels")
        e, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = _gk_panel(f, lo, mid)
        v2, e2 = _gk_panel(f, mid, hi)
        total += v1 + v2 - v
        err += e1 + e2 + e
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        panels += 1
    return total, err


def _density_one(p: StableParams, x: float, tol: float) -> float:
    T = _truncation(p, tol)
    a, c, sk = p.alpha, p.c, p.skew

    def f(t):
        ta = t ** a
        return np.exp(-c * ta) * np.cos(c * sk * ta - t * x)

    # a few panels per oscillation of the phase t x - c skew t^alpha
    phase = abs(x) * T + abs(c * sk) * T ** a
    n_init = max(16, int(math.ceil(2 * phase / math.pi)))
    val, _ = _adaptive(f, 0.0, T, tol * math.pi / 2, n_init)
    return val / math.pi


def density(p: StableParams, x, tol: float = 1e-10):
    """g(x) = (1/pi) int_0^inf Re[e^{-itx} psi(t)] dt by adaptive Gauss-Kronrod.

    Raw quadrature output; tiny negative values are not clamped here.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    xs = np.asarray(x, dtype=float)
    vals = np.array([_density_one(p, float(v), tol) for v in xs.ravel()])
    return float(vals[0]) if xs.ndim == 0 else vals.reshape(xs.shape)


def density_at_zero(p: StableParams) -> float:
    """Closed form of g(0) for beta = 0: Gamma(1/alpha) / (pi alpha c^(1/alpha))."""
    if p.skew != 0:
        raise ValueError("closed form only for symmetric laws")
    return gamma_integral(0.0, p.c, p.alpha) / math.pi


def gamma_integral(delta: float, p: float, alpha: float, method: str = "closed") -> float:
    """int_0^inf t^delta exp(-p t^alpha) dt = Gamma((delta+1)/alpha) / (alpha p^((delta+1)/alpha))."""
    if not delta > -1 or not p > 0 or not alpha > 0:
        raise ValueError("need delta > -1, p > 0, alpha > 0")
    s = (delta + 1) / alpha
    if method == "closed":
        return float(special.gamma(s) / (alpha * p ** s))
    if method == "quad":
        f = lambda t: t ** delta * math.exp(-p * t ** alpha)
        # split at the bulk scale so quad sees the peak
        m = (1 / p) ** (1 / alpha)
        v1 = integrate.quad(f, 0, m, epsabs=0, epsrel=1e-13, limit=200)[0]
        v2 = integrate.quad(f, m, math.inf, epsabs=0, epsrel=1e-13, limit=200)[0]
        return v1 + v2
    raise ValueError(f"unknown method {method!r}")


def arg_log_ratio_check(law, t_grid) -> list[tuple[float, float]]:
    """(t, |arg phi(t) / log|phi(t)||) along a decreasing grid in (0, 0.1]."""
    from .lattice_model import char_fn as lattice_char_fn

    out = []
    prev = math.inf
    for t in t_grid:
        t = float(t)
        if not 0 < t <= 0.1 or t >= prev:
            raise ValueError("t_grid must be decreasing within (0, 0.1]")
        prev = t
        phi = lattice_char_fn(law, t)
        out.append((t, abs(math.atan2(phi.imag, phi.real) / math.log(abs(phi)))))
    return out


def dump_density_csv(p: StableParams, xs, path, tol: float = 1e-10) -> None:
    g = density(p, np.asarray(xs, dtype=float), tol)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "g"])
        for x, v in zip(np.atleast_1d(xs), np.atleast_1d(g)):
            w.writerow([repr(float(x)), repr(float(v))])


def dump_char_fn_csv(p: StableParams, ts, path) -> None:
    vals = np.atleast_1d(char_fn(p, np.asarray(ts, dtype=float)))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "re_psi", "im_psi"])
        for t, v in zip(np.atleast_1d(ts), vals):
            w.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag))])
