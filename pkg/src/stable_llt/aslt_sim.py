"""Logarithmic averages A_N = (1/log N) sum_{n<=N} (b_n/n) 1{S_n = kappa_n}.

Paths are simulated in chunks from a counter-based stream, so per-path state
is the running sum only and any path can be replayed from (seed, index).
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import exact_llt
from .lattice_model import sample
from .norming import NoRootError, NormingSeq, nearest_site
from .rng import SeededStream, as_stream

CHUNK = 1 << 16


def kappa_n(law, seq: NormingSeq, kappa: float, n):
    """Lattice site nearest to kappa * b_n (ties to the smaller site)."""
    return nearest_site(kappa * np.asarray(seq.solve_bn(n)))


def _norming_tables(seq: NormingSeq, kappa: float, n: np.ndarray):
    """(b_n, kappa_n, weight b_n/n); zero weight where b_n has no admissible root."""
    try:
        b = np.asarray(seq.solve_bn(n), dtype=float)
    except NoRootError as e:
        b = np.zeros(n.shape)
        ok = n >= e.n_min
        if ok.any():
            b[ok] = seq.solve_bn(n[ok])
    kn = nearest_site(kappa * b)
    w = b / n
    return b, kn, w


def default_checkpoints(N: int) -> list[int]:
    out = [1 << j for j in range(1, N.bit_length()) if (1 << j) <= N]
    if not out or out[-1] != N:
        out.append(N)
    return out


@dataclass
class AsltRun:
    law: str
    seed: int
    index: int
    N: int
    kappa: float
    checkpoints: list
    averages: list
    hits: int
    hits_at: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _chunks(law, stream: SeededStream, N: int, chunk: int = CHUNK):
    """Yield (n, S_n) arrays for n = 1..N in order, reproducibly."""
    gen = stream.generator()
    s = 0
    for n0 in range(1, N + 1, chunk):
        n1 = min(N, n0 + chunk - 1)
        steps = sample(law, gen, n1 - n0 + 1)
        path = s + np.cumsum(steps)
        s = int(path[-1])
        yield np.arange(n0, n1 + 1, dtype=np.int64), path


def replay_path(law, seed, N: int, index: int = 0) -> np.ndarray:
    """S_1..S_N from one batch draw (for checking the chunked update)."""
    stream = SeededStream(int(seed), index) if not isinstance(seed, SeededStream) else seed
    return np.cumsum(sample(law, stream.generator(), N))


def run_path(law, seq: NormingSeq, stable, kappa: float, N: int, seed, checkpoints=None,
             index: int = 0, force_hits: bool = False, chunk: int = CHUNK) -> AsltRun:
    """Simulate one path and record A_M at each checkpoint M.

    ``force_hits`` replaces every indicator by 1 (weight check hook).
    ``stable`` is accepted for interface symmetry and not used here.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    cps = default_checkpoints(N) if checkpoints is None else sorted(int(c) for c in checkpoints)
    if not cps or cps[0] < 2 or cps[-1] > N or len(set(cps)) != len(cps):
        raise ValueError("checkpoints must be distinct and lie in [2, N]")
    stream = seed if isinstance(seed, SeededStream) else SeededStream(int(seed), index)
    total = 0.0
    hits = 0
    avgs, hits_at = [], []
    ci = 0
    cp = np.array(cps)
    for n, path in _chunks(law, stream, N, chunk):
        _, kn, w = _norming_tables(seq, kappa, n)
        ind = np.ones(n.shape, bool) if force_hits else path == kn
        contrib = np.where(ind, w, 0.0)
        run = total + np.cumsum(contrib)
        hit_run = hits + np.cumsum(ind)
        while ci < len(cps) and cps[ci] <= n[-1]:
            j = cps[ci] - n[0]
            avgs.append(float(run[j]) / math.log(cps[ci]))
            hits_at.append(int(hit_run[j]))
            ci += 1
        total = float(run[-1])
        hits = int(hit_run[-1])
    return AsltRun(law.name, stream.seed, stream.index, N, kappa, list(map(int, cp)), avgs, hits, hits_at)


# -- exact expectation ----------------------------------------------------------


@dataclass(frozen=True)
class ExpectedCurve:
    N: list
    values: np.ndarray
    errors: np.ndarray


def local_probs_along(law, seq: NormingSeq, kappa: float, n_max: int, tol: float = exact_llt.DEFAULT_TOL):
    """P(S_n = kappa_n) for n = 1..n_max with per-entry error bounds."""
    n = np.arange(1, n_max + 1)
    _, kn, _ = _norming_tables(seq, kappa, n)
    probs = np.empty(n_max)
    errs = np.empty(n_max)
    for i, s in enumerate(exact_llt.iterated_pmfs(law, n_max, tol, seq=seq)):
        probs[i] = s.prob(int(kn[i]))
        errs[i] = s.point_err()
    return probs, errs


def expected_curve(law, seq: NormingSeq, kappa: float, N_list, tol: float = exact_llt.DEFAULT_TOL) -> ExpectedCurve:
    Ns = sorted(int(v) for v in np.atleast_1d(N_list))
    if Ns[0] < 2:
        raise ValueError("N must be >= 2")
    n = np.arange(1, Ns[-1] + 1)
    _, _, w = _norming_tables(seq, kappa, n)
    p, e = local_probs_along(law, seq, kappa, Ns[-1], tol)
    run = np.cumsum(w * p)
    run_e = np.cumsum(w * e)
    idx = np.array(Ns) - 1
    logs = np.log(np.array(Ns, dtype=float))
    return ExpectedCurve(Ns, run[idx] / logs, run_e[idx] / logs)


def expected_average(law, seq: NormingSeq, stable, kappa: float, N, tol: float = exact_llt.DEFAULT_TOL):
    """E[A_N] = (1/log N) sum_{n<=N} (b_n/n) P(S_n = kappa_n); vectorized over N."""
    curve = expected_curve(law, seq, kappa, N, tol)
    if np.ndim(N) == 0:
        return float(curve.values[0])
    order = {v: i for i, v in enumerate(curve.N)}
    return np.array([curve.values[order[int(v)]] for v in N])


# -- studies ----------------------------------------------------------------------


@dataclass
class StudyRow:
    N: int
    median_A: float
    q25: float
    q75: float
    mean_A: float
    std_A: float
    expected_A: float
    expected_err: float
    g_kappa: float
    within_band: bool


@dataclass
class Study:
    rows: list
    runs: list
    seeds: list

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["N", "median_A", "q25", "q75", "mean_A", "expected_A", "g_kappa"])
            for r in self.rows:
                w.writerow([r.N, repr(r.median_A), repr(r.q25), repr(r.q75), repr(r.mean_A),
                            repr(r.expected_A), repr(r.g_kappa)])


def run_many(law, seq: NormingSeq, kappa: float, N: int, seeds, checkpoints=None, threads: int = 1) -> list:
    """Runs ordered as ``seeds`` regardless of worker scheduling."""
    streams = [s if isinstance(s, SeededStream) else as_stream(s) for s in seeds]
    job = lambda st: run_path(law, seq, None, kappa, N, st, checkpoints)
    if threads <= 1:
        return [job(s) for s in streams]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(job, streams))


def study_streams(base_seed: int, seed_count: int) -> list[SeededStream]:
    return [SeededStream(int(base_seed), i) for i in range(seed_count)]


def convergence_study(law, seq: NormingSeq, stable, kappa: float, N_grid, seed_count: int,
                      base_seed: int = 0, tol: float = exact_llt.DEFAULT_TOL, threads: int = 1,
                      density_tol: float = 1e-10) -> Study:
    """Median/quantiles/mean of A_N over seeds against E[A_N] and g(kappa)."""
    from .stable_law import density

    Ns = [int(v) for v in N_grid]
    if any(b <= a for a, b in zip(Ns[:-1], Ns[1:])):
        raise ValueError("N_grid must be increasing")
    if seed_count < 8:
        raise ValueError("seed_count must be >= 8")
    streams = study_streams(base_seed, seed_count)
    runs = run_many(law, seq, kappa, Ns[-1], streams, Ns, threads)
    A = np.array([r.averages for r in runs])
    curve = expected_curve(law, seq, kappa, Ns, tol)
    g = density(stable, kappa, density_tol) if stable is not None else math.nan
    rows = []
    for j, N in enumerate(Ns):
        col = A[:, j]
        mean, std = float(col.mean()), float(col.std(ddof=1))
        band = 4 * std / math.sqrt(seed_count) + float(curve.errors[j])
        rows.append(StudyRow(N, float(np.median(col)), float(np.quantile(col, 0.25)),
                             float(np.quantile(col, 0.75)), mean, std, float(curve.values[j]),
                             float(curve.errors[j]), g, abs(mean - curve.values[j]) <= band))
    return Study(rows, runs, [(s.seed, s.index) for s in streams])


# -- Gaal-Koksma block diagnostic ---------------------------------------------------

MAX_BLOCK_HORIZON = 1 << 22


@dataclass
class BlockDiag:
    m: int
    n_blocks: int
    gamma: float
    estimate: float
    se: float
    gk_shape: float
    ratio: float
    block_means: np.ndarray
    block_se: np.ndarray
    block_second: np.ndarray


def block_sums(law, seq: NormingSeq, kappa: float, first: int, last: int, stream: SeededStream,
               probs: np.ndarray) -> np.ndarray:
    """Z_i = sum_{k=2^(i-1)}^{2^i-1} Y_k/k for i = first..last along one path."""
    H = (1 << last) - 1
    Z = np.zeros(last - first + 1)
    for n, path in _chunks(law, stream, H):
        b, kn, _ = _norming_tables(seq, kappa, n)
        y = b * ((path == kn).astype(float) - probs[n - 1]) / n
        blk = np.floor(np.log2(n)).astype(int) + 1  # k in [2^(i-1), 2^i) -> i
        sel = blk >= first
        np.add.at(Z, blk[sel] - first, y[sel])
    return Z


def block_variance_diag(law, seq: NormingSeq, kappa: float, m: int, n_blocks: int, seed_count: int,
                        gamma: float = 1.0, base_seed: int = 0, tol: float = exact_llt.DEFAULT_TOL,
                        max_horizon: int = MAX_BLOCK_HORIZON) -> BlockDiag:
    """Monte Carlo E[(sum_{i=m+1}^{m+n} Z_i)^2] against (m+n)^g - m^g, g = max(gamma, 1)."""
    H = (1 << (m + n_blocks)) - 1
    if H > max_horizon:
        raise ValueError(f"horizon 2^{m + n_blocks} exceeds the budget {max_horizon}")
    probs, _ = local_probs_along(law, seq, kappa, H, tol)
    Z = np.array([block_sums(law, seq, kappa, m + 1, m + n_blocks, s, probs)
                  for s in study_streams(base_seed, seed_count)])
    tot = Z.sum(axis=1) ** 2
    est = float(tot.mean())
    se = float(tot.std(ddof=1) / math.sqrt(seed_count))
    g = max(gamma, 1.0)
    shape = (m + n_blocks) ** g - m ** g
    return BlockDiag(m, n_blocks, gamma, est, se, shape, est / shape, Z.mean(axis=0),
                     Z.std(axis=0, ddof=1) / math.sqrt(seed_count), (Z ** 2).mean(axis=0))


def exact_block_second_moment(law, seq: NormingSeq, kappa: float, i: int,
                              tol: float = exact_llt.DEFAULT_TOL) -> float:
    """E[Z_i^2] from E[Y_h Y_k] = b_h b_k (P(S_h=k_h) P(S_{k-h}=k_k-k_h) - P(S_h=k_h) P(S_k=k_k))."""
    lo, hi = 1 << (i - 1), (1 << i) - 1
    pm = list(exact_llt.iterated_pmfs(law, hi, tol, seq=seq))
    ks = np.arange(lo, hi + 1)
    b, kn, _ = _norming_tables(seq, kappa, ks)
    p = np.array([pm[k - 1].prob(int(kn[j])) for j, k in enumerate(ks)])
    total = 0.0
    for a, h in enumerate(ks):
        total += b[a] ** 2 * (p[a] - p[a] ** 2) / h ** 2
        for c in range(a + 1, len(ks)):
            k = ks[c]
            joint = p[a] * pm[k - h - 1].prob(int(kn[c] - kn[a]))
            total += 2 * b[a] * b[c] * (joint - p[a] * p[c]) / (h * k)
    return total


def manifest(law, seq: NormingSeq, kappa: float, seeds, checkpoints) -> str:
    return json.dumps({"law": law.to_dict(), "seq": seq.to_dict(), "kappa": kappa,
                       "seeds": [list(s) if isinstance(s, tuple) else s for s in seeds],
                       "checkpoints": list(checkpoints)}, indent=2)
