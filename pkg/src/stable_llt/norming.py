"""Norming constants b_n = L(n) n^(1/alpha) and the derived functions M and L~.

b_n solves b**alpha = n * h(b) where h is the slowly varying function in the
characteristic function of the one-step law.  ``M(x)`` is the running
supremum of h on [1/eps, x] and ``L~(n) = L(n) (1 + M(n^(1+1/alpha)) + L(n)^eta)``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize


class NoRootError(ValueError):
    """b**alpha = n h(b) has no root in the monotone region for this n."""

    def __init__(self, n, n_min):
        super().__init__(
            f"no root of b^alpha = n h(b) in the monotone region for n={n}; "
            f"the minimal admissible n is {n_min}"
        )
        self.n = n
        self.n_min = n_min


@dataclass(frozen=True)
class SlowlyVarying:
    """A slowly varying function h on [a0, inf).

    kind is one of ``constant`` (h = value), ``log_power`` (h = log(x)**sigma)
    or ``karamata`` (h = gamma(x) exp(int_{a0}^x eps(t)/t dt)).
    """

    kind: str
    value: float = 1.0
    sigma: float = 0.0
    eps: Callable | None = None
    gamma: Callable | None = None
    eps_bar: float = 0.0
    a0: float = 1.0
    log_integral: Callable | None = None

    def __post_init__(self):
        if self.kind == "constant":
            if not self.value > 0:
                raise ValueError("constant slowly varying function must be positive")
        elif self.kind == "log_power":
            if not self.sigma > 0:
                raise ValueError("log-power exponent sigma must be positive")
        elif self.kind == "karamata":
            if self.eps is None:
                raise ValueError("karamata representation needs an eps accessor")
        else:
            raise ValueError(f"unknown slowly varying kind {self.kind!r}")

    @classmethod
    def constant(cls, value: float) -> "SlowlyVarying":
        return cls("constant", value=float(value))

    @classmethod
    def log_power(cls, sigma: float) -> "SlowlyVarying":
        return cls("log_power", sigma=float(sigma))

    @classmethod
    def karamata(cls, eps, gamma=None, eps_bar=None, a0=1.0, log_integral=None) -> "SlowlyVarying":
        if eps_bar is None:
            grid = np.geomspace(a0, a0 * 1e12, 4097)
            eps_bar = float(np.max(np.abs(eps(grid))))
        return cls("karamata", eps=eps, gamma=gamma, eps_bar=float(eps_bar), a0=float(a0),
                   log_integral=log_integral)

    def check_sigma(self, alpha: float) -> None:
        if self.kind == "log_power" and not 0 < self.sigma < alpha / (1 + alpha):
            raise ValueError(f"sigma must lie in (0, alpha/(1+alpha)) = (0, {alpha / (1 + alpha):.6g})")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full(x.shape, self.value)[()] if x.shape else self.value
        if self.kind == "log_power":
            return np.log(x) ** self.sigma
        return self._karamata(x)

    def _karamata(self, x):
        if self.log_integral is not None:
            expo = self.log_integral(x)
        else:
            def one(v):
                return integrate.quad(lambda t: self.eps(t) / t, self.a0, v, limit=200)[0]
            expo = np.vectorize(one)(x)
        g = 1.0 if self.gamma is None else self.gamma(x)
        return g * np.exp(expo)

    @property
    def monotone(self) -> bool:
        return self.kind in ("constant", "log_power")

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "log_power":
            return {"kind": "log_power", "sigma": self.sigma}
        return {"kind": "karamata", "eps_bar": self.eps_bar, "a0": self.a0}

    @classmethod
    def from_dict(cls, d: dict) -> "SlowlyVarying":
        if d["kind"] == "constant":
            return cls.constant(d["value"])
        if d["kind"] == "log_power":
            return cls.log_power(d["sigma"])
        raise ValueError("karamata descriptors carry callables and cannot be deserialized")


def nearest_site(x):
    """Nearest integer to x, ties going to the smaller integer."""
    return np.ceil(np.asarray(x, dtype=float) - 0.5).astype(np.int64)


@dataclass
class NormingSeq:
    """Norming sequence b_n for a given tail index and slowly varying h."""

    alpha: float
    h: SlowlyVarying
    epsilon: float = 0.5
    eta: float = 1.0
    delta: float | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _sup_cells: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.alpha <= 2 or self.alpha == 1:
            raise ValueError("alpha must lie in (0, 2] and differ from 1")
        if self.delta is None:
            self.delta = 1 / (2 * self.alpha)
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        if not 0 < self.delta < 1 / self.alpha:
            raise ValueError("delta must lie in (0, 1/alpha)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        self.h.check_sigma(self.alpha)

    @classmethod
    def for_law(cls, law, **kw) -> "NormingSeq":
        """The norming sequence attached to a lattice law's slowly varying factor."""
        return cls(alpha=law.alpha, h=law.l, **kw)

    @property
    def rho(self) -> float:
        return min(self.eta * (1 / self.alpha - self.delta), 1.0)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "h": self.h.to_dict(), "epsilon": self.epsilon,
                "eta": self.eta, "delta": self.delta}

    # -- b_n ---------------------------------------------------------------

    def n_min(self) -> int:
        """Smallest n for which b^alpha = n h(b) has a root in the monotone region."""
        if self.h.kind == "log_power":
            x = math.exp(self.h.sigma / self.alpha)
            return max(1, math.ceil(x ** self.alpha / math.log(x) ** self.h.sigma))
        return 1

    def solve_bn(self, n):
        """Root of b**alpha = n h(b); vectorized over ``n``."""
        scalar = np.ndim(n) == 0
        narr = np.atleast_1d(np.asarray(n))
        if np.any(narr < 1):
            raise ValueError("n must be >= 1")
        if self.h.kind == "constant":
            out = (narr * self.h.value) ** (1 / self.alpha)
        else:
            out = np.empty(narr.shape, dtype=float)
            todo = []
            for i, v in enumerate(narr.tolist()):
                hit = self._cache.get(v)
                if hit is None:
                    todo.append(i)
                else:
                    out[i] = hit
            if todo:
                idx = np.array(todo)
                vals = self._bisect(narr[idx].astype(float))
                out[idx] = vals
                with self._lock:
                    for v, b in zip(narr[idx].tolist(), vals.tolist()):
                        self._cache.setdefault(v, b)
        return float(out[0]) if scalar else out

    def _bisect(self, n):
        alpha = self.alpha
        if self.h.kind == "log_power":
            lo = np.full(n.shape, math.exp(self.h.sigma / alpha))
            nm = self.n_min()
            bad = n < nm
            if np.any(bad):
                raise NoRootError(int(n[bad][0]), nm)
        else:
            lo = np.full(n.shape, max(self.h.a0, 1.0 / self.epsilon))

        def g(b):
            return b ** alpha - n * self.h(b)

        if np.any(g(lo) > 0):
            raise NoRootError(int(n[g(lo) > 0][0]), self.n_min())
        hi = np.maximum(lo * 2, n ** (1 / alpha))
        for _ in range(200):
            pos = g(hi) > 0
            if pos.all():
                break
            hi = np.where(pos, hi, hi * 2)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            neg = g(mid) <= 0
            lo = np.where(neg, mid, lo)
            hi = np.where(neg, hi, mid)
            if np.all(hi - lo <= 1e-13 * hi):
                break
        return 0.5 * (lo + hi)

    def L(self, n):
        """Slowly varying part L(n) = b_n / n^(1/alpha)."""
        return self.solve_bn(n) / np.asarray(n, dtype=float) ** (1 / self.alpha)

    # -- M and L~ ------------------------------------------------------------

    def sup_h(self, x):
        """M(x) = sup of h over [1/epsilon, x]."""
        lo = 1 / self.epsilon
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xs < lo * (1 - 1e-15)):
            raise ValueError(f"M(x) is defined for x >= 1/epsilon = {lo}")
        if self.h.kind == "constant":
            out = np.full(xs.shape, self.h.value)
        elif self.h.kind == "log_power":
            # increasing for y > 1; 1/epsilon may lie below 1 where log is negative
            if lo < 1:
                raise ValueError("log-power h needs epsilon <= 1 so that h >= 0 on [1/epsilon, x]")
            out = np.log(xs) ** self.h.sigma
        else:
            out = np.array([self._karamata_sup(v) for v in xs])
        return float(out[0]) if np.ndim(x) == 0 else out

    _CELL = 0.01  # log-spacing of the supremum grid

    def _extend_cells(self, x: float) -> None:
        # cell = (a, b, h(a), h(b), interior argmax or None, interior max, prefix max up to b)
        with self._lock:
            cells = self._sup_cells
            while not cells or cells[-1][1] < x:
                a = 1 / self.epsilon if not cells else cells[-1][1]
                b = a * math.exp(self._CELL)
                ha = float(self.h(a)) if not cells else cells[-1][3]
                hb = float(self.h(b))
                res = optimize.minimize_scalar(lambda y: -float(self.h(y)), bounds=(a, b),
                                               method="bounded", options={"xatol": a * 1e-9})
                ix, ih = float(res.x), -float(res.fun)
                if ih <= max(ha, hb):
                    ix, ih = None, -math.inf
                prev = cells[-1][6] if cells else ha
                cells.append((a, b, ha, hb, ix, ih, max(prev, ha, hb, ih)))

    def _karamata_sup(self, x: float) -> float:
        self._extend_cells(x)
        cells = self._sup_cells
        lefts = [c[0] for c in cells]
        i = max(0, int(np.searchsorted(lefts, x, side="right")) - 1)
        a, b, ha, hb, ix, ih, _ = cells[i]
        best = cells[i - 1][6] if i > 0 else ha
        best = max(best, ha)
        if x >= b:
            return max(best, cells[i][6])
        best = max(best, float(self.h(x)))
        if ix is not None and ix <= x:
            best = max(best, ih)
        return best

    def tilde_l(self, n):
        """L~(n) = L(n) (1 + M(n^(1+1/alpha)) + L(n)^eta)."""
        n = np.asarray(n, dtype=float)
        Ln = self.L(n)
        return Ln * (1 + self.sup_h(n ** (1 + 1 / self.alpha)) + Ln ** self.eta)

    # -- summability hypothesis ----------------------------------------------

    def log_weight_sum_check(self, a: int, b: int, gamma: float) -> "LogWeightCheck":
        return log_weight_sum_check(self, a, b, gamma)


@dataclass(frozen=True)
class LogWeightCheck:
    lhs_sum: float
    rhs_gap: float
    fitted_C: float
    windows: tuple  # ((a_i, b_i, lhs_i / rhs_i), ...)


def log_weight_sum_check(seq: NormingSeq, a: int, b: int, gamma: float) -> LogWeightCheck:
    """Compare sum_{k=a}^b L~(k)/k with log^gamma b - log^gamma a.

    fitted_C is the largest ratio over the window family
    {(a 2^i, a 2^j)} together with the windows ending at b.
    """
    if not 2 <= a < b:
        raise ValueError("need 2 <= a < b")
    if not 0 < gamma < 2:
        raise ValueError("gamma must lie in (0, 2)")
    nm = seq.n_min()
    if a < nm:
        raise NoRootError(a, nm)
    k = np.arange(a, b + 1, dtype=float)
    terms = seq.tilde_l(k) / k
    csum = np.concatenate(([0.0], np.cumsum(terms)))  # csum[i] = sum of first i terms

    def window_sum(lo, hi):
        return csum[hi - a + 1] - csum[lo - a]

    def gap(lo, hi):
        return math.log(hi) ** gamma - math.log(lo) ** gamma

    edges = [a]
    while edges[-1] * 2 < b:
        edges.append(edges[-1] * 2)
    edges.append(b)
    windows = []
    for i, lo in enumerate(edges[:-1]):
        for hi in edges[i + 1:]:
            windows.append((lo, hi, window_sum(lo, hi) / gap(lo, hi)))
    return LogWeightCheck(
        lhs_sum=float(window_sum(a, b)),
        rhs_gap=gap(a, b),
        fitted_C=max(w[2] for w in windows),
        windows=tuple(windows),
    )


def solve_bn(seq: NormingSeq, n):
    return seq.solve_bn(n)


def sup_h(seq: NormingSeq, x):
    return seq.sup_h(x)


def tilde_l(seq: NormingSeq, n):
    return seq.tilde_l(n)


def dump_csv(seq: NormingSeq, n_grid, path) -> None:
    """CSV columns n, b_n, L(n), M(n^(1+1/alpha)), L~(n)."""
    n = np.asarray(n_grid, dtype=float)
    b = seq.solve_bn(n)
    L = b / n ** (1 / seq.alpha)
    M = seq.sup_h(n ** (1 + 1 / seq.alpha))
    T = seq.tilde_l(n)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("n,b_n,L,M,tilde_L\n")
        for row in zip(n_grid, b, L, np.atleast_1d(M), T):
            fh.write(f"{int(row[0])},{row[1]!r},{row[2]!r},{row[3]!r},{row[4]!r}\n")
