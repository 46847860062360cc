"""Lattice laws in the domain of attraction of a stable law.

A :class:`LatticeLaw` is an explicit pmf table on a finite block of sites
plus an analytic tail (power law, log-power law or the geometric-over-square
law of the alpha=2 counterexample).  All masses are accounted for exactly:
tail sums come from Hurwitz zeta values or Euler-Maclaurin sums with a
remainder bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce

import numpy as np
from scipy import special

from . import _series
from .norming import SlowlyVarying
from .rng import SeededStream, as_stream

MASS_TOL = 1e-12
MEAN_TOL = 1e-10
TABLE_CUTOFF = 1024
SAMPLE_HEAD_MASS = 1e-6
SAMPLE_HEAD_CAP = 1 << 22


class DegenerateLawError(ValueError):
    pass


@dataclass(frozen=True)
class TailDescriptor:
    """Mass outside the table: P(X=k) = coef_side * f(|k|) for |k| > cutoff."""

    kind: str = "none"  # none | power | log_power | geometric_square
    cutoff: int = 0
    right: float = 0.0
    left: float = 0.0
    exponent: float = 0.0  # s = 1 + alpha for the power kinds
    sigma: float = 0.0

    def values(self, k):
        """Tail pmf at the integer sites ``k`` (zero inside the cutoff)."""
        k = np.asarray(k, dtype=np.int64)
        out = np.zeros(k.shape)
        if self.kind == "none":
            return out
        r = k > self.cutoff
        if self.right and r.any():
            out[r] = self.right * _series.term_values(self.kind, k[r], self.exponent, self.sigma)
        lft = k < -self.cutoff
        if self.left and lft.any():
            out[lft] = self.left * _series.term_values(self.kind, -k[lft], self.exponent, self.sigma)
        return out

    def side_sum(self, side: str, x, shift: int = 0):
        """sum over |k| > max(x, cutoff) on one side of |k|**shift P(X=k), with bound."""
        coef = self.right if side == "right" else self.left
        x = np.maximum(np.asarray(x, dtype=np.int64), self.cutoff)
        if self.kind == "none" or coef == 0:
            z = np.zeros(x.shape)
            return z, z
        val, bound = _series.tail_sum(self.kind, x, self.exponent, self.sigma, shift)
        return coef * val, coef * bound

    def to_dict(self) -> dict:
        return {"kind": self.kind, "cutoff": self.cutoff, "right": self.right, "left": self.left,
                "exponent": self.exponent, "sigma": self.sigma}


@dataclass(frozen=True, eq=False)
class LatticeLaw:
    """A lattice distribution with span ``span`` on offset + span*Z.

    ``table`` holds masses for the sites ``lo, lo+1, ..., lo+len-1``;
    ``tail`` describes every site with |k| > tail.cutoff.  ``l`` is the
    slowly varying factor of the tails (for alpha=2 it carries
    h(x) = E[X^2 1{|X|<=x}] in its eventually-constant form).
    """

    lo: int
    table: np.ndarray
    alpha: float
    c1: float
    c2: float
    l: SlowlyVarying
    tail: TailDescriptor = field(default_factory=TailDescriptor)
    offset: int = 0
    span: int = 1
    name: str = "custom"
    centered: bool = True

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        object.__setattr__(self, "table", table)
        table.setflags(write=False)
        if not (0 < self.alpha <= 2) or self.alpha == 1:
            raise ValueError("alpha must lie in (0, 2] and differ from 1")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("tail constants must be non-negative")
        if self.alpha < 2 and not self.c1 + self.c2 > 0:
            raise ValueError("c1 + c2 must be positive for alpha < 2")
        if np.any(table < 0):
            raise ValueError("negative mass in table")
        hi = self.lo + len(table) - 1
        if self.tail.kind != "none" and (hi > self.tail.cutoff or self.lo < -self.tail.cutoff):
            raise ValueError("table extends past the tail cutoff")
        total = self.total_mass()
        if abs(total - 1) > MASS_TOL:
            raise ValueError(f"total mass {total!r} differs from 1 by more than {MASS_TOL}")
        if self.span != verify_span(self):
            raise ValueError(f"declared span {self.span} differs from the support gcd {verify_span(self)}")
        if self.centered and self.alpha > 1:
            mu = self.mean()
            if abs(mu) > MEAN_TOL:
                raise ValueError(f"law is not centered: mean {mu!r}")

    # -- basic accessors ----------------------------------------------------

    @property
    def hi(self) -> int:
        return self.lo + len(self.table) - 1

    @cached_property
    def key(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def support_sites(self) -> np.ndarray:
        """Sites of positive mass in the table."""
        return self.lo + np.flatnonzero(self.table > 0)

    def pmf_range(self, a: int, b: int) -> np.ndarray:
        """P(X=k) for k = a..b."""
        k = np.arange(a, b + 1, dtype=np.int64)
        out = self.tail.values(k)
        i0, i1 = max(a, self.lo), min(b, self.hi)
        if i0 <= i1:
            out[i0 - a:i1 - a + 1] = self.table[i0 - self.lo:i1 - self.lo + 1]
        return out

    def total_mass(self) -> float:
        r, _ = self.tail.side_sum("right", self.tail.cutoff)
        lft, _ = self.tail.side_sum("left", self.tail.cutoff)
        return math.fsum(self.table.tolist()) + float(r) + float(lft)

    def _moment(self, shift: int, signed: bool) -> float:
        k = np.arange(self.lo, self.hi + 1, dtype=float)
        head = math.fsum((k ** shift * self.table).tolist())
        r, _ = self.tail.side_sum("right", self.tail.cutoff, shift)
        lft, _ = self.tail.side_sum("left", self.tail.cutoff, shift)
        sign = (-1) ** shift if signed else 1
        return head + float(r) + sign * float(lft)

    def mean(self) -> float:
        if self.alpha <= 1:
            return math.nan
        return self._moment(1, signed=True)

    def second_moment(self) -> float:
        if self.alpha < 2 or (self.tail.kind in ("power", "log_power")):
            return math.inf
        return self._moment(2, signed=True)

    def truncated_second_moment(self, x: float) -> float:
        """E[X^2 1{|X| <= x}]."""
        K = int(math.floor(x))
        vals = self.pmf_range(-K, K)
        k = np.arange(-K, K + 1, dtype=float)
        return math.fsum((k * k * vals).tolist())

    def upper_tail(self, x: float) -> float:
        """P(X > x)."""
        return self._side_tail("right", int(math.floor(x)) + 1)

    def lower_tail(self, x: float) -> float:
        """P(X <= -x)."""
        return self._side_tail("left", int(math.ceil(x)))

    def _side_tail(self, side: str, first: int) -> float:
        # mass on sites with (side sign) * k >= first
        K = self.tail.cutoff
        if side == "right":
            head_sites = np.arange(max(first, self.lo), self.hi + 1)
            head = self.table[head_sites - self.lo] if head_sites.size else np.zeros(0)
        else:
            head_sites = np.arange(self.lo, min(-first, self.hi) + 1)
            head = self.table[head_sites - self.lo] if head_sites.size else np.zeros(0)
        t, _ = self.tail.side_sum(side, max(first - 1, K))
        return math.fsum(head.tolist()) + float(t)

    def outside_mass(self, K: int) -> float:
        """P(|X| > K)."""
        return self.upper_tail(K) + self.lower_tail(K + 1)

    def truncation_radius(self, mass: float, cap: int | None = None) -> int:
        """Smallest K >= 0 with P(|X| > K) <= mass (bounded by the table when no tail)."""
        if self.tail.kind == "none" or (self.tail.right == 0 and self.tail.left == 0):
            K = max(abs(self.lo), abs(self.hi))
            lo = 0
        else:
            lo, K = 0, max(abs(self.lo), abs(self.hi), 1)
            while self.outside_mass(K) > mass:
                lo, K = K, K * 2
                if cap is not None and K > 4 * cap:
                    return K
        hi = K
        while lo < hi:
            mid = (lo + hi) // 2
            if self.outside_mass(mid) <= mass:
                hi = mid
            else:
                lo = mid + 1
        return hi

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "offset": self.offset,
            "span": self.span,
            "alpha": self.alpha,
            "c1": self.c1,
            "c2": self.c2,
            "centered": self.centered,
            "l": self.l.to_dict(),
            "table": [[int(self.lo + i), float(m)] for i, m in enumerate(self.table) if m != 0],
            "tail": self.tail.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeLaw":
        sites = [int(s) for s, _ in d["table"]]
        lo, hi = min(sites), max(sites)
        table = np.zeros(hi - lo + 1)
        for s, m in d["table"]:
            table[int(s) - lo] = float(m)
        return cls(lo=lo, table=table, alpha=d["alpha"], c1=d["c1"], c2=d["c2"],
                   l=SlowlyVarying.from_dict(d["l"]), tail=TailDescriptor(**d["tail"]),
                   offset=d.get("offset", 0), span=d.get("span", 1), name=d.get("name", "custom"),
                   centered=d.get("centered", True))

    @classmethod
    def from_json(cls, text: str) -> "LatticeLaw":
        return cls.from_dict(json.loads(text))


# -- operations -------------------------------------------------------------


def pmf(law: LatticeLaw, k: int) -> float:
    return float(law.pmf_range(k, k)[0])


def verify_span(law: LatticeLaw) -> int:
    """gcd of the differences between support sites."""
    sites = law.support_sites()
    if law.tail.kind != "none" and (law.tail.right or law.tail.left):
        # the tail occupies every site beyond the cutoff
        K = law.tail.cutoff
        extra = [K + 1, K + 2] if law.tail.right else [-K - 1, -K - 2]
        sites = np.concatenate((sites, extra))
    if len(sites) < 2:
        raise DegenerateLawError("degenerate distribution")
    diffs = np.diff(np.sort(sites))
    return int(reduce(math.gcd, diffs.tolist()))


def char_fn(law: LatticeLaw, t: float) -> complex:
    """sum_k P(X=k) e^{itk}, including the analytic tail."""
    # integer sites make phi 2pi-periodic
    t = math.remainder(float(t), 2 * math.pi)
    k = np.arange(law.lo, law.hi + 1, dtype=float)
    head = complex(np.sum(law.table * np.exp(1j * t * k)))
    tail = law.tail
    if tail.kind == "none":
        return head
    start = tail.cutoff + 1
    if tail.right:
        head += tail.right * _series.oscillatory_tail(tail.kind, t, start, tail.exponent, tail.sigma)
    if tail.left:
        head += tail.left * _series.oscillatory_tail(tail.kind, -t, start, tail.exponent, tail.sigma)
    return head


def char_fn_grid(law: LatticeLaw, t, direct: int = 2048) -> np.ndarray:
    """Vectorized char_fn for |t| bounded away from 0 (|1 - e^{it}| >= 0.25).

    Sites up to ``direct`` are summed exactly; the remaining tail uses
    summation by parts with float64 differences, which is accurate when
    |1 - e^{it}| is not small.
    """
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(2 * np.sin(t / 2)) < 0.25):
        raise ValueError("char_fn_grid needs |1 - e^{it}| >= 0.25; use char_fn near t = 0")
    tail = law.tail
    K = max(abs(law.lo), abs(law.hi), tail.cutoff if tail.kind != "none" else 0)
    stop = K if tail.kind == "none" else max(K, direct)
    out = np.zeros(t.shape, dtype=complex)
    chunk = 256
    for a in range(-stop, stop + 1, chunk):
        b = min(stop, a + chunk - 1)
        p = law.pmf_range(a, b)
        nz = p != 0
        if not nz.any():
            continue
        kk = np.arange(a, b + 1, dtype=float)[nz]
        out += np.exp(1j * np.multiply.outer(t, kk)) @ p[nz]
    if tail.kind == "none":
        return out
    m = 12
    a = stop + 1
    kk = a + np.arange(m + 1)
    f = _series.term_values(tail.kind, kk, tail.exponent, tail.sigma)
    diffs = [f]
    for _ in range(m):
        diffs.append(np.diff(diffs[-1]))
    for sign, coef in ((1.0, tail.right), (-1.0, tail.left)):
        if not coef:
            continue
        z = np.exp(1j * sign * t)
        w = 1 / (1 - z)
        acc = np.zeros(t.shape, dtype=complex)
        for j in range(m):
            acc += z ** (a + j) * diffs[j][0] * w ** (j + 1)
        out += coef * acc
    return out


def tail_profile(law: LatticeLaw, x_grid) -> list[tuple[float, float, float]]:
    """(x, x^alpha P(X>x), x^alpha P(X<=-x)) for each x."""
    out = []
    prev = -math.inf
    for x in x_grid:
        x = float(x)
        if not x > 0 or x <= prev:
            raise ValueError("x_grid must be positive and increasing")
        prev = x
        xa = x ** law.alpha
        out.append((x, xa * law.upper_tail(x), xa * law.lower_tail(x)))
    return out


# -- sampling ---------------------------------------------------------------


@dataclass(frozen=True)
class _Sampler:
    head_lo: int
    head_cdf: np.ndarray
    head_mass: float
    K: int
    right_mass: float
    left_mass: float


_SAMPLERS: dict[str, _Sampler] = {}


def _sampler(law: LatticeLaw) -> _Sampler:
    s = _SAMPLERS.get(law.key)
    if s is None:
        K = law.truncation_radius(SAMPLE_HEAD_MASS, cap=SAMPLE_HEAD_CAP)
        K = min(K, SAMPLE_HEAD_CAP)
        if law.tail.kind != "none":
            K = max(K, law.tail.cutoff)
        lo, hi = -K, K
        if law.tail.kind == "none":
            lo, hi = law.lo, law.hi
        probs = law.pmf_range(lo, hi)
        cdf = np.cumsum(probs)
        r, _ = law.tail.side_sum("right", hi)
        lf, _ = law.tail.side_sum("left", -lo)
        s = _Sampler(lo, cdf, float(cdf[-1]), K, float(r), float(lf))
        _SAMPLERS[law.key] = s
    return s


def _tail_inverse(law: LatticeLaw, side: str, start: int, v: np.ndarray) -> np.ndarray:
    """Smallest k >= start+1 with T(k) < v, T(k) = mass on |X| > k of the side.

    ``v`` is uniform on (0, T(start)], so k is distributed as |X| given |X| > start.
    """
    lo = np.full(v.shape, start, dtype=np.int64)  # T(lo) >= v
    hi = np.full(v.shape, max(2 * start, start + 1), dtype=np.int64)
    for _ in range(64):
        t_hi, _ = law.tail.side_sum(side, hi)
        big = t_hi >= v
        if not big.any():
            break
        lo = np.where(big, hi, lo)
        hi = np.where(big, hi * 2, hi)
    while np.any(hi - lo > 1):
        mid = (lo + hi) // 2
        t_mid, _ = law.tail.side_sum(side, mid)
        ge = t_mid >= v
        lo = np.where(ge, mid, lo)
        hi = np.where(ge, hi, mid)
    return hi


def sample(law: LatticeLaw, rng_stream, count: int) -> np.ndarray:
    """i.i.d. draws; head by inversion on the CDF table, tail by inversion on tail sums."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = rng_stream if isinstance(rng_stream, np.random.Generator) else as_stream(rng_stream).generator()
    s = _sampler(law)
    u = rng.random(count)
    out = np.empty(count, dtype=np.int64)
    in_head = u < s.head_mass
    idx = np.searchsorted(s.head_cdf, u[in_head], side="right")
    out[in_head] = s.head_lo + np.minimum(idx, len(s.head_cdf) - 1)
    rest = np.flatnonzero(~in_head)
    if rest.size:
        w = (u[rest] - s.head_mass) / max(1.0 - s.head_mass, 1e-300)
        w = np.clip(w, 0.0, 1.0) * (s.right_mass + s.left_mass)
        right = w < s.right_mass
        if right.any():
            v = s.right_mass - w[right]
            start = s.head_lo + len(s.head_cdf) - 1
            out[rest[right]] = _tail_inverse(law, "right", start, v)
        if (~right).any():
            v = s.right_mass + s.left_mass - w[~right]
            v = np.minimum(v, s.left_mass)
            out[rest[~right]] = -_tail_inverse(law, "left", -s.head_lo, v)
    return out


# -- builders ---------------------------------------------------------------


def lazy_walk() -> LatticeLaw:
    """The lazy simple walk {-1: 1/4, 0: 1/2, 1: 1/4}; variance 1/2."""
    return LatticeLaw(lo=-1, table=np.array([0.25, 0.5, 0.25]), alpha=2.0, c1=0.0, c2=0.0,
                      l=SlowlyVarying.constant(0.5), name="lazy_walk")


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha <= 2 or alpha == 1:
        raise ValueError("alpha must lie in (0, 2] and differ from 1")


def _power_table(K: int, s: float, kind: str = "power", sigma: float = 0.0):
    k = np.arange(1, K + 1, dtype=float)
    return _series.term_values(kind, k, s, sigma)


def zipf_symmetric(alpha: float = 1.5, c_scale: float | None = None, cutoff: int = TABLE_CUTOFF) -> LatticeLaw:
    """P(X=k) = c_scale |k|^-(1+alpha) for k != 0, remaining mass at 0.

    The default c_scale = 1/(2 zeta(1+alpha)) leaves no atom at 0.
    Tail constants c1 = c2 = c_scale/alpha, l = 1.
    """
    _check_alpha(alpha)
    if not alpha < 2:
        raise ValueError("power-law builders need alpha < 2")
    s = 1 + alpha
    zeta = float(special.zeta(s))
    C = 1 / (2 * zeta) if c_scale is None else float(c_scale)
    if not 0 < C <= 1 / (2 * zeta) * (1 + 1e-15):
        raise ValueError(f"c_scale must lie in (0, {1 / (2 * zeta)}]")
    head = C * _power_table(cutoff, s)
    p0 = 0.0 if c_scale is None else 1 - 2 * C * zeta
    table = np.concatenate((head[::-1], [max(p0, 0.0)], head))
    return LatticeLaw(lo=-cutoff, table=table, alpha=alpha, c1=C / alpha, c2=C / alpha,
                      l=SlowlyVarying.constant(1.0),
                      tail=TailDescriptor("power", cutoff, C, C, s),
                      name=f"zipf_symmetric({alpha},{c_scale})")


def zipf_skewed(alpha: float = 1.5, c1: float = 1.0, c2: float = 0.5, cutoff: int = TABLE_CUTOFF) -> LatticeLaw:
    """Power tails with relative weights c1 (right) and c2 (left).

    P(X=k) = w c1 k^-(1+alpha) for k >= 1 and w c2 |k|^-(1+alpha) for k <= -1;
    for alpha > 1 the mean is cancelled by extra mass on site -sign(mean),
    and the remaining 1/2 sits at 0.  The scale w makes tails plus centering
    mass equal to 1/2, so the true tail constants are w c1/alpha, w c2/alpha.
    """
    _check_alpha(alpha)
    if not alpha < 2:
        raise ValueError("power-law builders need alpha < 2")
    if c1 < 0 or c2 < 0 or not c1 + c2 > 0:
        raise ValueError("need c1, c2 >= 0 and c1 + c2 > 0")
    s = 1 + alpha
    zs = float(special.zeta(s))
    zm = float(special.zeta(alpha)) if alpha > 1 else 0.0
    w = 0.5 / ((c1 + c2) * zs + abs(c1 - c2) * zm)
    base = _power_table(cutoff, s)
    right, left = w * c1 * base, w * c2 * base
    table = np.concatenate((left[::-1], [0.0], right))
    if alpha > 1:
        # exact mean of the tails, using the same closed forms as LatticeLaw.mean
        tail = TailDescriptor("power", cutoff, w * c1, w * c2, s)
        k = np.arange(-cutoff, cutoff + 1, dtype=float)
        r, _ = tail.side_sum("right", cutoff, 1)
        lf, _ = tail.side_sum("left", cutoff, 1)
        mu = math.fsum((k * table).tolist()) + float(r) - float(lf)
        if mu > 0:
            table[cutoff - 1] += mu
        else:
            table[cutoff + 1] += -mu
    tail = TailDescriptor("power", cutoff, w * c1, w * c2, s)
    r, _ = tail.side_sum("right", cutoff)
    lf, _ = tail.side_sum("left", cutoff)
    table[cutoff] = 1 - math.fsum(table.tolist()) - float(r) - float(lf)
    return LatticeLaw(lo=-cutoff, table=table, alpha=alpha, c1=w * c1 / alpha, c2=w * c2 / alpha,
                      l=SlowlyVarying.constant(1.0), tail=tail, name=f"zipf_skewed({alpha},{c1},{c2})")


def log_sigma_family(alpha: float = 1.5, sigma: float = 0.4, cutoff: int = TABLE_CUTOFF) -> LatticeLaw:
    """Symmetric law with P(X=k) = A log(|k|)^sigma |k|^-(1+alpha) for |k| >= 2, P(X=0) = 1/2.

    A normalizes the tails to total mass 1/2, so x^alpha P(X>x) ~ (A/alpha) log^sigma x:
    c1 = c2 = A/alpha and l(x) = log^sigma x.
    """
    _check_alpha(alpha)
    if not alpha < 2:
        raise ValueError("power-law builders need alpha < 2")
    if not 0 < sigma < alpha / (1 + alpha):
        raise ValueError(f"sigma must lie in (0, alpha/(1+alpha)) = (0, {alpha / (1 + alpha):.6g})")
    s = 1 + alpha
    base = _power_table(cutoff, s, "log_power", sigma)
    tail_sum, _ = _series.tail_sum("log_power", np.array([cutoff]), s, sigma)
    one_side = math.fsum(base.tolist()) + float(tail_sum[0])
    A = 0.25 / one_side
    head = A * base
    table = np.concatenate((head[::-1], [0.5], head))
    return LatticeLaw(lo=-cutoff, table=table, alpha=alpha, c1=A / alpha, c2=A / alpha,
                      l=SlowlyVarying.log_power(sigma),
                      tail=TailDescriptor("log_power", cutoff, A, A, s, sigma),
                      name=f"log_sigma_family({alpha},{sigma})")


def remark1_constant() -> float:
    """C = 1 / sum_{k>=1} 1/(k^2 2^k) = 1 / Li_2(1/2)."""
    return 1 / _series.dilog_half()


def remark1_counterexample(centered: bool = False, cutoff: int = 64) -> LatticeLaw:
    """P(X=n) = C/(n^2 2^n), n >= 1: finite variance, x^2 P(|X|>x) not slowly varying.

    With ``centered=True`` the law is mixed with an atom at -1 so that the
    mean vanishes; the tail keeps the C'/(n^2 2^n) shape with C' = qC.
    """
    C = remark1_constant()
    k = np.arange(1, cutoff + 1, dtype=float)
    head = C * _series.term_values("geometric_square", k)
    q = 1.0
    if centered:
        mu = C * math.log(2)  # sum_{n>=1} 1/(n 2^n) = log 2
        q = 1 / (1 + mu)
    table = np.concatenate(([1 - q, 0.0], q * head)) if centered else np.concatenate(([0.0], head))
    lo = -1 if centered else 0
    tail = TailDescriptor("geometric_square", cutoff, q * C, 0.0, 0.0)
    # for alpha = 2 the slowly varying factor is E[X^2 1{|X|<=x}] -> E[X^2] = qC + (1 - q)
    m2 = q * C + (1 - q)
    return LatticeLaw(lo=lo, table=table, alpha=2.0, c1=0.0, c2=0.0,
                      l=SlowlyVarying.constant(m2), tail=tail,
                      name=f"remark1_counterexample(centered={centered})", centered=centered)


def from_table(table: dict[int, float], alpha: float = 2.0, *, centered: bool = True, span: int | None = None,
               name: str = "custom") -> LatticeLaw:
    """A finitely supported law from a site -> mass map."""
    sites = sorted(table)
    lo = sites[0]
    arr = np.zeros(sites[-1] - lo + 1)
    for s in sites:
        arr[s - lo] = table[s]
    diffs = np.diff(sites)
    if span is None:
        span = int(reduce(math.gcd, diffs.tolist())) if len(sites) > 1 else 1
    k = np.array(sites, dtype=float)
    p = np.array([table[s] for s in sites])
    var = float(np.sum(k * k * p) - np.sum(k * p) ** 2)
    return LatticeLaw(lo=lo, table=arr, alpha=alpha, c1=0.0, c2=0.0,
                      l=SlowlyVarying.constant(var if var > 0 else 1.0), span=span,
                      offset=sites[0] % span, name=name, centered=centered)


BUILDERS = {
    "lazy_walk": lazy_walk,
    "zipf_symmetric": zipf_symmetric,
    "zipf_skewed": zipf_skewed,
    "log_sigma_family": log_sigma_family,
    "remark1_counterexample": remark1_counterexample,
}


def build(name: str, **params) -> LatticeLaw:
    try:
        fn = BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown law builder {name!r}; choose from {sorted(BUILDERS)}") from None
    return fn(**params)
