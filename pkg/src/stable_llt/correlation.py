"""Correlation of the events {S_m = kappa_m} and {S_n = kappa_n}.

The left side b_m b_n |P(S_m=k_m, S_n=k_n) - P(S_m=k_m) P(S_n=k_n)| is exact
up to the certificates from :mod:`exact_llt`; the three right sides are
reported with their unspecified constant set to 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import exact_llt
from .lattice_model import char_fn, char_fn_grid
from .norming import NormingSeq, nearest_site

GAP_GRID = 10_000


@dataclass(frozen=True)
class CorrValue:
    lhs: float
    err: float
    kappa_m: int
    kappa_n: int


@dataclass(frozen=True)
class CorrReport:
    m: int
    n: int
    kappa: float
    lhs: float
    lhs_err: float
    bound_i: float
    bound_ii: float
    corollary: float

    @property
    def ratios(self) -> dict:
        return {"i": self.lhs / self.bound_i, "ii": self.lhs / self.bound_ii,
                "corollary": self.lhs / self.corollary}


def kappa_sites(seq: NormingSeq, kappa: float, *ns) -> list[int]:
    return [int(nearest_site(kappa * float(seq.solve_bn(n)))) for n in ns]


def joint_minus_product(law, seq: NormingSeq, m: int, n: int, kappa: float = 0.0,
                        tol: float = exact_llt.DEFAULT_TOL, horizon: int | None = None) -> CorrValue:
    """b_m P(S_m=k_m) b_n |P(S_{n-m}=k_n-k_m) - P(S_n=k_n)| with an error bound."""
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    horizon = horizon or n
    km, kn = kappa_sites(seq, kappa, m, n)
    bm, bn = float(seq.solve_bn(m)), float(seq.solve_bn(n))
    pm, em = exact_llt.local_prob(law, m, km, tol, horizon=horizon, seq=seq)
    pd, ed = exact_llt.local_prob(law, n - m, kn - km, tol, horizon=horizon, seq=seq)
    pn, en = exact_llt.local_prob(law, n, kn, tol, horizon=horizon, seq=seq)
    d = abs(pd - pn)
    e_d = ed + en
    lhs = bm * pm * bn * d
    err = bm * bn * (em * d + pm * e_d + em * e_d)
    return CorrValue(lhs, err, km, kn)


def bound_i(seq: NormingSeq, m: int, n: int) -> float:
    """(n/(n-m))^(1/alpha) L(n)/L(n-m) + 1."""
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    a = seq.alpha
    return (n / (n - m)) ** (1 / a) * float(seq.L(n)) / float(seq.L(n - m)) + 1


@dataclass(frozen=True)
class SpectralGap:
    c_hat: float
    t_star: float
    epsilon: float


def spectral_gap(law, epsilon: float = 0.5, points: int = GAP_GRID) -> SpectralGap:
    """c_hat = -max over epsilon <= |t| <= pi of log|phi(t)|."""
    if not 0 < epsilon < math.pi:
        raise ValueError("epsilon must lie in (0, pi)")
    t = np.linspace(epsilon, math.pi, points)
    ok = np.abs(2 * np.sin(t / 2)) >= 0.25
    mod = np.empty(points)
    if ok.any():
        mod[ok] = np.abs(char_fn_grid(law, t[ok]))
    for i in np.flatnonzero(~ok):
        mod[i] = abs(char_fn(law, float(t[i])))
    i = int(np.argmax(mod))
    t_star, best = float(t[i]), float(mod[i])
    if 0 < i < points - 1:
        # parabola through the three grid points around the maximum
        y0, y1, y2 = mod[i - 1], mod[i], mod[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            h = t[1] - t[0]
            tv = float(t[i] + 0.5 * h * (y0 - y2) / denom)
            val = abs(char_fn(law, tv))
            if val > best:
                t_star, best = tv, val
    return SpectralGap(-math.log(best), t_star, epsilon)


def x0_threshold(c_hat: float, alpha: float, epsilon: float) -> int:
    """Smallest integer x0 > epsilon^(-alpha/(alpha+1)) with e^(c x) >= x^(2/alpha) for x >= x0."""
    floor = math.floor(epsilon ** (-alpha / (alpha + 1))) + 1
    f = lambda x: c_hat * x - (2 / alpha) * math.log(x)
    xm = 2 / (alpha * c_hat)  # minimizer of the convex f
    if f(xm) >= 0:
        return floor
    hi = 2 * xm
    while f(hi) < 0:
        hi *= 2
    root = optimize.brentq(f, xm, hi, xtol=1e-12)
    return max(floor, math.ceil(root))


def bound_ii(seq: NormingSeq, m: int, n: int, eta: float | None = None, c_hat: float | None = None,
             law=None) -> float:
    """Full right side of the refined inequality with C = 1.

    L(n) { n^(1/a)(e^-(n-m)c + e^-nc) + (m/n)/(1-m/n)^(1+1/a) (1 + M(n^(1+1/a)))
           + (m/n)^(eta/a) L(m)^eta / (1-m/n)^((eta+1)/a) }
    """
    eta = seq.eta if eta is None else eta
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    a = seq.alpha
    if not n > m + seq.epsilon ** (-a / (a + 1)) or m < 1:
        raise ValueError(f"need m >= 1 and n > m + epsilon^(-alpha/(alpha+1)) = m + {seq.epsilon ** (-a / (a + 1)):.4g}")
    if c_hat is None:
        if law is None:
            raise ValueError("bound_ii needs c_hat or the law to estimate it")
        c_hat = spectral_gap(law, seq.epsilon).c_hat
    r = m / n
    expo = n ** (1 / a) * (math.exp(-(n - m) * c_hat) + math.exp(-n * c_hat))
    middle = r / (1 - r) ** (1 + 1 / a) * (1 + float(seq.sup_h(n ** (1 + 1 / a))))
    last = r ** (eta / a) * float(seq.L(m)) ** eta / (1 - r) ** ((eta + 1) / a)
    return float(seq.L(n)) * (expo + middle + last)


def corollary_bound(seq: NormingSeq, m: int, n: int, x0: int | None = None) -> float:
    """L~(n) (m/n)^rho."""
    if n < 2 * m:
        raise ValueError("corollary bound needs n >= 2m")
    if x0 is not None and m < x0:
        raise ValueError(f"corollary bound needs m >= x0 = {x0}")
    return float(seq.tilde_l(n)) * (m / n) ** seq.rho


def report(law, seq: NormingSeq, m: int, n: int, kappa: float = 0.0, c_hat: float | None = None,
           tol: float = exact_llt.DEFAULT_TOL, horizon: int | None = None) -> CorrReport:
    if c_hat is None:
        c_hat = spectral_gap(law, seq.epsilon).c_hat
    v = joint_minus_product(law, seq, m, n, kappa, tol, horizon)
    return CorrReport(m, n, kappa, v.lhs, v.err, bound_i(seq, m, n),
                      bound_ii(seq, m, n, c_hat=c_hat), corollary_bound(seq, m, n))


# -- exponent fit -------------------------------------------------------------


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    m: np.ndarray
    lhs: np.ndarray
    err: np.ndarray
    mask: np.ndarray
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))


def fit_slope(x, y) -> tuple[float, float, np.ndarray]:
    """Least-squares line y = slope x + intercept; returns (slope, intercept, residuals)."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept), y - (slope * x + intercept)


class TooFewPointsError(ValueError):
    pass


def exponent_fit(law, seq: NormingSeq, n: int, m_grid, kappa: float = 0.0,
                 tol: float = exact_llt.DEFAULT_TOL, x0: int | None = None) -> ExponentFit:
    """Slope of log(lhs) against log(m/n) over the certified points of ``m_grid``."""
    if x0 is None:
        x0 = x0_threshold(spectral_gap(law, seq.epsilon).c_hat, seq.alpha, seq.epsilon)
    ms = np.array(sorted(int(m) for m in m_grid if x0 <= m and 2 * m <= n))
    vals = [joint_minus_product(law, seq, int(m), n, kappa, tol) for m in ms]
    lhs = np.array([v.lhs for v in vals])
    err = np.array([v.err for v in vals])
    mask = lhs > 10 * err
    if mask.sum() < 4:
        raise TooFewPointsError(f"only {int(mask.sum())} certified points (need 4)")
    slope, icpt, res = fit_slope(np.log(ms[mask] / n), np.log(lhs[mask]))
    return ExponentFit(slope, icpt, ms, lhs, err, mask, res)


# -- domination scan ------------------------------------------------------------


@dataclass
class DominationScan:
    x0: int
    c_hat: float
    tops: list
    c_emp: list
    reports: list

    @property
    def blow_up(self) -> bool:
        """Monotone growth (each step > 5%) across every extension."""
        c = self.c_emp
        return len(c) > 1 and all(b > 1.05 * a for a, b in zip(c[:-1], c[1:]))


def dyadic_pairs(x0: int, top: int) -> list[tuple[int, int]]:
    """(m, n) with m, n powers of two, m >= x0, n >= 2m, n <= 2^top."""
    out = []
    for a in range(1, top + 1):
        n = 1 << a
        for b in range(0, a):
            m = 1 << b
            if m >= x0:
                out.append((m, n))
    return out


def domination_scan(law, seq: NormingSeq, tops=(9, 10, 11, 12), kappa: float = 0.0,
                    tol: float = exact_llt.DEFAULT_TOL) -> DominationScan:
    """Empirical C = max lhs / corollary_bound over nested dyadic grids."""
    gap = spectral_gap(law, seq.epsilon)
    x0 = x0_threshold(gap.c_hat, seq.alpha, seq.epsilon)
    horizon = 1 << max(tops)
    reports: dict = {}
    c_emp = []
    for top in tops:
        best = 0.0
        for m, n in dyadic_pairs(x0, top):
            if (m, n) not in reports:
                v = joint_minus_product(law, seq, m, n, kappa, tol, horizon)
                reports[(m, n)] = CorrReport(m, n, kappa, v.lhs, v.err, bound_i(seq, m, n),
                                             bound_ii(seq, m, n, c_hat=gap.c_hat),
                                             corollary_bound(seq, m, n))
            r = reports[(m, n)]
            best = max(best, (r.lhs + r.lhs_err) / r.corollary)
        c_emp.append(best)
    return DominationScan(x0, gap.c_hat, list(tops), c_emp, list(reports.values()))


def dump_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "n", "lhs", "lhs_err", "bound_i", "bound_ii", "corollary",
                    "ratio_i", "ratio_ii", "ratio_corollary"])
        for r in reports:
            q = r.ratios
            w.writerow([r.m, r.n, repr(r.lhs), repr(r.lhs_err), repr(r.bound_i), repr(r.bound_ii),
                        repr(r.corollary), repr(q["i"]), repr(q["ii"]), repr(q["corollary"])])
