"""Exact law of S_n by convolution, with a certified error budget.

The one-step law is cut to |k| <= K with P(|X| > K) <= tol/(2N), N the
ladder horizon (a power of two >= n).  Dyadic powers S_{2^j} come from
squaring; other n are composed from their binary digits, top bits first,
so n - m = 2^a - 2^b for all m in a dyadic grid share prefixes.

Three error figures travel with every array:

* ``err_bound`` (T): total variation distance to the true law of S_n,
  covering one-step truncation, window truncation and clamped roundoff;
* ``sup_err`` (S): sup-norm bound on the truncation part of the error;
* ``entry_err`` (R): sup-norm bound on floating point roundoff relative to
  the exact convolution of the truncated arrays (conv length * eps per step).

For A = a + t_a + r_a and B = b + t_b + r_b (true = computed + truncation +
roundoff), |t_a * B| <= min(S_a, T_a sup B) and |a * t_b| <= min(|a|_1 S_b,
T_b sup a).  The second branch is what keeps point errors near T / b_n
rather than T.  Any entry, inside or outside the window, is within S + R.
"""

from __future__ import annotations

import csv
import json
import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .norming import NoRootError, NormingSeq, nearest_site

EPS = np.finfo(float).eps
# arrays up to this length are never window-truncated
EXACT_CAP = 1 << 16
# hard limit on window length (memory budget)
MAX_LEN = 1 << 23
DIRECT_CONV = 64
# share of the budget actually spent, leaving room for clamped roundoff
SAFETY = 0.9


class WindowBudgetError(MemoryError):
    """The requested tolerance needs a window beyond the memory budget."""

    def __init__(self, required: int, limit: int = MAX_LEN):
        super().__init__(f"tolerance needs a window of {required} sites; the budget is {limit}")
        self.required = required


@dataclass(frozen=True)
class SnPmf:
    n: int
    lo: int
    masses: np.ndarray
    err_bound: float
    entry_err: float = 0.0
    tol: float = 0.0
    sup_err: float | None = None

    def __post_init__(self):
        if self.sup_err is None:
            object.__setattr__(self, "sup_err", self.err_bound)

    @property
    def hi(self) -> int:
        return self.lo + len(self.masses) - 1

    @property
    def W(self) -> int:
        return max(-self.lo, self.hi)

    @property
    def window(self) -> tuple[int, int]:
        return -self.W, self.W

    def prob(self, k):
        k = np.asarray(k, dtype=np.int64)
        idx = k - self.lo
        inside = (idx >= 0) & (idx < len(self.masses))
        out = np.where(inside, self.masses[np.clip(idx, 0, len(self.masses) - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    def total(self) -> float:
        return math.fsum(self.masses.tolist())

    def point_err(self) -> float:
        """Bound on |P(S_n = k) - prob(k)| for every k."""
        return min(self.sup_err, self.err_bound) + self.entry_err

    def sidecar(self) -> dict:
        return {"n": self.n, "W": self.W, "lo": self.lo, "hi": self.hi,
                "err_bound": self.err_bound, "sup_err": self.sup_err, "entry_err": self.entry_err,
                "tol": self.tol}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "mass"])
            for i, m in enumerate(self.masses.tolist()):
                w.writerow([self.lo + i, repr(m)])
        with open(str(path) + ".json", "w") as fh:
            json.dump(self.sidecar(), fh, indent=2)


def convolve(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Linear convolution of non-negative arrays and a per-entry roundoff bound.

    Direct sums: m eps max(out), m the shorter length.  Transforms: each
    radix-2 FFT has relative 2-norm error <= log2(size) * 5 eps (Higham,
    ASNA 24.1); through forward, product and inverse this gives
    3 delta (|a|_2 |b|_1 + |a|_1 |b|_2) with delta = 10 log2(size) eps, a
    factor 2 safety margin.  Both stay below the (length * eps) figure.
    """
    if min(len(a), len(b)) <= DIRECT_CONV:
        out = np.convolve(a, b)
        return out, min(len(a), len(b)) * EPS * float(np.max(np.abs(out)))
    n = len(a) + len(b) - 1
    size = 1 << (n - 1).bit_length()
    fa = sfft.rfft(a, size)
    fb = fa if b is a else sfft.rfft(b, size)
    out = sfft.irfft(fa * fb, size)[:n]
    delta = 10 * math.log2(size) * EPS
    na2, nb2 = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    na1, nb1 = float(np.abs(a).sum()), float(np.abs(b).sum())
    return out, min(3 * delta * (na2 * nb1 + na1 * nb2), n * EPS)


def _clamp(arr: np.ndarray) -> float:
    neg = arr < 0
    if not neg.any():
        return 0.0
    lost = -float(arr[neg].sum())
    arr[neg] = 0.0
    return lost


def _cut(lo: int, arr: np.ndarray, w_min: int, budget: float, exact_cap: int, max_len: int):
    """Smallest symmetric window |k| <= W, W >= w_min, dropping at most ``budget``.

    Returns (lo, arr, dropped mass, largest dropped entry).
    """
    hi = lo + len(arr) - 1
    if len(arr) <= exact_cap:
        return lo, arr, 0.0, 0.0
    Wmax = max(-lo, hi)
    folded = np.bincount(np.abs(np.arange(lo, hi + 1)), weights=arr, minlength=Wmax + 1)
    # outside[W] = mass on |k| > W
    outside = np.concatenate((np.cumsum(folded[::-1])[::-1][1:], [0.0]))
    slack = len(arr) * EPS
    ok = np.flatnonzero(outside + slack <= budget)
    W = max(int(w_min), int(ok[0]) if ok.size else Wmax)
    if W >= Wmax:
        return lo, arr, 0.0, 0.0
    if 2 * W + 1 > max_len:
        raise WindowBudgetError(2 * W + 1, max_len)
    new_lo, new_hi = max(lo, -W), min(hi, W)
    dropped = float(outside[W]) + slack
    peak = max(float(arr[:new_lo - lo].max(initial=0.0)), float(arr[new_hi - lo + 1:].max(initial=0.0)))
    return new_lo, arr[new_lo - lo:new_hi - lo + 1].copy(), dropped, peak


def _scale(seq: NormingSeq, n: int) -> float:
    try:
        return float(seq.solve_bn(n))
    except NoRootError:
        return float(n) ** (1 / seq.alpha)


def _errors(x: SnPmf, y: SnPmf, rnd: float) -> tuple[float, float, float]:
    """(T, S, R) of the exact product x * y before any cut; see module docstring."""
    sx = float(x.masses.sum())
    mx, my = float(x.masses.max()), float(y.masses.max())
    tv = x.err_bound + y.err_bound
    sup = (min(x.sup_err, x.err_bound * (my + y.point_err()))
           + min(sx * y.sup_err, y.err_bound * mx))
    rounding = x.entry_err + sx * y.entry_err + rnd
    return tv, sup, rounding


def _combine(x: SnPmf, y: SnPmf, n: int, w_min: int, budget: float, tol: float,
             exact_cap: int, max_len: int) -> SnPmf:
    arr, rnd = convolve(x.masses, y.masses)
    tv, sup, rounding = _errors(x, y, rnd)
    clamped = _clamp(arr)
    lo, arr, dropped, peak = _cut(x.lo + y.lo, arr, w_min, budget, exact_cap, max_len)
    return SnPmf(n, lo, arr, tv + dropped + clamped, rounding, tol, sup + peak)


def truncated_step(law, mass: float, max_len: int = MAX_LEN) -> tuple[int, np.ndarray, float, float]:
    """The one-step pmf on |k| <= K with P(|X| > K) <= mass.

    Returns (lo, masses, dropped mass, largest dropped P(X=k)); tails of all
    tail kinds decrease beyond the cutoff, so the latter sits at |k| = K+1.
    """
    if law.tail.kind == "none" or not (law.tail.right or law.tail.left):
        return law.lo, np.array(law.table, dtype=float), 0.0, 0.0
    K = law.truncation_radius(mass, cap=max_len // 2)
    if 2 * K + 1 > max_len:
        raise WindowBudgetError(2 * K + 1, max_len)
    arr = law.pmf_range(-K, K)
    nz = np.flatnonzero(arr)
    lo = -K + int(nz[0])
    arr = arr[nz[0]:nz[-1] + 1].copy()
    peak = float(max(law.pmf_range(K + 1, K + 1)[0], law.pmf_range(-K - 1, -K - 1)[0]))
    return lo, arr, float(law.outside_mass(K)), peak


class Ladder:
    """Dyadic powers and binary compositions of one truncated step law."""

    def __init__(self, law, tol: float, N: int, w_factor: float = 40.0, seq: NormingSeq | None = None,
                 exact_cap: int = EXACT_CAP, max_len: int = MAX_LEN):
        if not 0 < tol <= 1e-3:
            raise ValueError("tol must lie in (0, 1e-3]")
        self.law, self.tol, self.N, self.w_factor = law, tol, N, w_factor
        self.seq = seq if seq is not None else NormingSeq.for_law(law)
        self.exact_cap, self.max_len = exact_cap, max_len
        self.levels = N.bit_length()
        lo, arr, dropped, peak = truncated_step(law, SAFETY * tol / (2 * N), max_len)
        one = SnPmf(1, lo, arr, dropped, 0.0, tol, peak)
        self._powers = {0: one}
        self._composite = {1: one}
        self._lock = threading.Lock()

    def w_min(self, n: int) -> int:
        return int(math.ceil(self.w_factor * _scale(self.seq, n)))

    def power(self, j: int) -> SnPmf:
        """S_{2^j}."""
        hit = self._powers.get(j)
        if hit is not None:
            return hit
        prev = self.power(j - 1)
        m = 1 << j
        budget = SAFETY * (self.tol / 4) * m / (self.N * self.levels)
        out = _combine(prev, prev, m, self.w_min(m), budget, self.tol, self.exact_cap, self.max_len)
        with self._lock:
            out = self._powers.setdefault(j, out)
            self._composite.setdefault(m, out)
        return out

    def get(self, n: int) -> SnPmf:
        if n < 1 or n > self.N:
            raise ValueError(f"n must lie in [1, {self.N}]")
        hit = self._composite.get(n)
        if hit is not None:
            return hit
        low = n & -n
        if low == n:
            return self.power(low.bit_length() - 1)
        prefix = self.get(n - low)
        budget = SAFETY * (self.tol / 4) / self.levels
        out = _combine(prefix, self.power(low.bit_length() - 1), n, self.w_min(n), budget, self.tol,
                       self.exact_cap, self.max_len)
        with self._lock:
            return self._composite.setdefault(n, out)

    def local_prob(self, n: int, k) -> tuple[np.ndarray, float]:
        """P(S_n = k) for an array of k, without materializing S_n when it is not cached."""
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        hit = self._composite.get(n)
        low = n & -n
        if hit is not None or low == n:
            s = self.get(n)
            return s.prob(k), s.point_err()
        a = self.get(n - low)
        b = self.power(low.bit_length() - 1)
        out = np.empty(k.shape)
        for i, kk in enumerate(k.tolist()):
            # sum_j a(j) b(kk - j)
            j0 = max(a.lo, kk - b.hi)
            j1 = min(a.hi, kk - b.lo)
            if j0 > j1:
                out[i] = 0.0
                continue
            av = a.masses[j0 - a.lo:j1 - a.lo + 1]
            bv = b.masses[kk - j1 - b.lo:kk - j0 - b.lo + 1][::-1]
            out[i] = float(np.dot(av, bv))
        _, sup, rounding = _errors(a, b, min(len(a.masses), len(b.masses)) * EPS)
        return out, min(sup, a.err_bound + b.err_bound) + rounding


_LADDERS: dict = {}
_LADDER_LOCK = threading.Lock()

DEFAULT_TOL = 1e-4


def ladder(law, n: int, tol: float = DEFAULT_TOL, w_factor: float = 40.0, horizon: int | None = None,
           seq: NormingSeq | None = None) -> Ladder:
    """Shared ladder for horizon N = next power of two >= max(n, horizon)."""
    top = max(n, horizon or 1)
    N = 1 << (top - 1).bit_length()
    key = (law.key, tol, N, w_factor, None if seq is None else json.dumps(seq.to_dict(), sort_keys=True))
    with _LADDER_LOCK:
        lad = _LADDERS.get(key)
        if lad is None:
            lad = _LADDERS[key] = Ladder(law, tol, N, w_factor, seq)
    return lad


def clear_cache() -> None:
    with _LADDER_LOCK:
        _LADDERS.clear()


def sn_pmf(law, n: int, tol: float = DEFAULT_TOL, w_factor: float = 40.0, horizon: int | None = None,
           seq: NormingSeq | None = None) -> SnPmf:
    """Law of S_n on a window, with total variation error at most tol."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return ladder(law, n, tol, w_factor, horizon, seq).get(n)


def local_prob(law, n: int, k, tol: float = DEFAULT_TOL, w_factor: float = 40.0,
               horizon: int | None = None, seq: NormingSeq | None = None):
    """(P(S_n = k), error bound); vectorized over k."""
    if n < 1:
        raise ValueError("n must be >= 1")
    vals, err = ladder(law, n, tol, w_factor, horizon, seq).local_prob(n, k)
    if np.ndim(k) == 0:
        return float(vals[0]), err
    return vals, err


def iterated_pmfs(law, n_max: int, tol: float = DEFAULT_TOL, w_factor: float = 40.0,
                  seq: NormingSeq | None = None, exact_cap: int = EXACT_CAP, max_len: int = MAX_LEN):
    """Yield SnPmf for n = 1..n_max by one-step convolution S_n = S_{n-1} * X.

    Per-step budgets are tol/(2 n_max) for the one-step cut and for each
    window cut.  Arrays are yielded without copying.
    """
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    seq = seq if seq is not None else NormingSeq.for_law(law)
    lo, arr, dropped, peak = truncated_step(law, SAFETY * tol / (2 * n_max), max_len)
    step = SnPmf(1, lo, arr, dropped, 0.0, tol, peak)
    cur = step
    yield cur
    budget = SAFETY * tol / (2 * n_max)
    for n in range(2, n_max + 1):
        w_min = int(math.ceil(w_factor * _scale(seq, n)))
        cur = _combine(cur, step, n, w_min, budget, tol, exact_cap, max_len)
        yield cur


def llt_ratio(law, stable, seq: NormingSeq, n: int, kappa: float, tol: float = DEFAULT_TOL,
              density_tol: float = 1e-10):
    """(b_n P(S_n = kappa_n), g(kappa), ratio) with kappa_n nearest to kappa b_n."""
    from .stable_law import density

    bn = float(seq.solve_bn(n))
    kn = int(nearest_site(kappa * bn))
    p, err = local_prob(law, n, kn, tol, seq=seq)
    g = density(stable, kappa, density_tol)
    return LltRatio(bn * p, g, bn * p / g, kn, bn * err)


@dataclass(frozen=True)
class LltRatio:
    bn_p: float
    g: float
    ratio: float
    kappa_n: int
    err: float

    def __iter__(self):
        return iter((self.bn_p, self.g, self.ratio))


@dataclass(frozen=True)
class ScanResult:
    c_hat: float
    n: int
    k: int
    rows: list


def uniform_bound_scan(law, seq: NormingSeq, n_list, tol: float = DEFAULT_TOL) -> ScanResult:
    """max over n of b_n max_k P(S_n = k), with the maximizing (n, k)."""
    n_list = sorted(set(int(n) for n in n_list))
    if not n_list:
        raise ValueError("n_list must be nonempty")
    rows = []
    best = (-math.inf, 0, 0)
    for n in n_list:
        s = sn_pmf(law, n, tol, horizon=n_list[-1], seq=seq)
        i = int(np.argmax(s.masses))
        val = float(seq.solve_bn(n)) * float(s.masses[i])
        rows.append((n, s.lo + i, val))
        if val > best[0]:
            best = (val, n, s.lo + i)
    return ScanResult(best[0], best[1], best[2], rows)
