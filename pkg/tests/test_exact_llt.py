import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stable_llt import exact_llt as ex
from stable_llt import lattice_model as lm
from stable_llt import norming as nm
from stable_llt import stable_law as sl

LAZY = {-1: Fraction(1, 4), 0: Fraction(1, 2), 1: Fraction(1, 4)}


def lazy_exact(n):
    """Rational law of S_n for the lazy walk by repeated convolution of fractions."""
    dist = {0: Fraction(1)}
    for _ in range(n):
        nxt = {}
        for s, p in dist.items():
            for x, q in LAZY.items():
                nxt[s + x] = nxt.get(s + x, 0) + p * q
        dist = nxt
    return dist


@pytest.fixture(scope="module")
def lazy():
    return lm.lazy_walk()


@pytest.fixture(scope="module")
def zipf():
    return lm.zipf_symmetric(1.5)


def test_lazy_n1_is_table(lazy):
    s = ex.sn_pmf(lazy, 1)
    assert s.lo == -1
    assert list(s.masses) == [0.25, 0.5, 0.25]
    assert s.err_bound == 0


def test_lazy_n2_enumeration(lazy):
    # direct 3 x 3 enumeration
    p0 = sum(LAZY[a] * LAZY[b] for a, b in itertools.product(LAZY, LAZY) if a + b == 0)
    assert p0 == Fraction(3, 8)
    assert ex.local_prob(lazy, 2, 0)[0] == 0.375
    assert ex.local_prob(lazy, 2, 2)[0] == 0.0625


@pytest.mark.parametrize("n", range(1, 9))
def test_lazy_rational(lazy, n):
    s = ex.sn_pmf(lazy, n)
    exact = lazy_exact(n)
    for k in range(-n - 1, n + 2):
        assert abs(s.prob(k) - float(exact.get(k, 0))) <= 1e-15


def test_zipf_doubling_vs_iterated(zipf):
    seq = nm.NormingSeq.for_law(zipf)
    it = ex.iterated_pmfs(zipf, 8, 1e-3, seq=seq)
    for n in range(1, 9):
        a = ex.sn_pmf(zipf, n, 1e-3, horizon=8, seq=seq)
        b = next(it)
        k = np.arange(min(a.lo, b.lo), max(a.hi, b.hi) + 1)
        assert np.max(np.abs(a.prob(k) - b.prob(k))) <= 1e-12


def test_zipf_vs_plain_numpy_convolution(zipf):
    # independent oracle: np.convolve of the same truncated one-step array
    lo, arr, _, _ = ex.truncated_step(zipf, ex.SAFETY * 1e-3 / (2 * 8))
    full = arr
    for _ in range(7):
        full = np.convolve(full, arr)
    s = ex.sn_pmf(zipf, 8, 1e-3, horizon=8)
    k = np.arange(8 * lo, 8 * lo + len(full))
    assert np.max(np.abs(s.prob(k) - full)) <= 1e-12


def test_symmetry(zipf):
    k = np.arange(0, 200)
    p, _ = ex.local_prob(zipf, 100, k)
    q, _ = ex.local_prob(zipf, 100, -k)
    assert np.max(np.abs(p - q)) <= 1e-12


@pytest.mark.parametrize("name", sorted(lm.BUILDERS))
def test_normalization(name):
    law = lm.build(name)
    tol = 1e-4
    s = ex.sn_pmf(law, 200, tol)
    assert 1 - tol <= s.total() <= 1 + 1e-12
    assert s.err_bound <= tol
    assert np.all(s.masses >= 0)


def test_error_bound_conservative(zipf):
    tol = 1e-4
    small = ex.sn_pmf(zipf, 512, tol, w_factor=10)
    big = ex.sn_pmf(zipf, 512, tol, w_factor=80)
    k = np.arange(big.lo, big.hi + 1)
    assert np.all(big.prob(k) - small.prob(k) <= small.point_err() + big.point_err())
    assert np.all(np.abs(big.prob(k) - small.prob(k)) <= small.err_bound + big.err_bound)


def test_lower_tol_refines(zipf):
    coarse = ex.sn_pmf(zipf, 256, 1e-3)
    fine = ex.sn_pmf(zipf, 256, 1e-5)
    k = np.arange(-50, 51)
    assert np.max(np.abs(coarse.prob(k) - fine.prob(k))) <= coarse.point_err() + fine.point_err()
    assert fine.err_bound <= 1e-5


@pytest.mark.parametrize("name", ["lazy_walk", "remark1_counterexample"])
def test_char_fn_consistency_light_tails(name):
    law = lm.build(name)
    ts = np.linspace(-3, 3, 13)
    for n in (1, 7, 16, 33, 64):
        s = ex.sn_pmf(law, n, 1e-10)
        k = np.arange(s.lo, s.hi + 1)
        for t in ts:
            lhs = np.sum(s.masses * np.exp(1j * t * k))
            assert abs(lhs - lm.char_fn(law, float(t)) ** n) <= 1e-8


@pytest.mark.parametrize("name", ["zipf_symmetric", "zipf_skewed", "log_sigma_family"])
def test_char_fn_consistency_heavy_tails(name):
    # heavy tails cannot be cut to 1e-8 in memory; the certificate bounds the gap
    law = lm.build(name)
    for n in (8, 64):
        s = ex.sn_pmf(law, n, 1e-4)
        k = np.arange(s.lo, s.hi + 1)
        bound = s.err_bound + len(s.masses) * s.entry_err
        for t in (0.05, 0.5, 2.0):
            lhs = np.sum(s.masses * np.exp(1j * t * k))
            assert abs(lhs - lm.char_fn(law, t) ** n) <= bound


def test_mass_never_exceeds_one():
    for name in sorted(lm.BUILDERS):
        law = lm.build(name)
        for s in itertools.islice(ex.iterated_pmfs(law, 40, 1e-3), 40):
            assert float(s.masses.sum()) <= 1 + 1e-12


def test_llt_ratio_lazy(lazy):
    seq = nm.NormingSeq.for_law(lazy)
    r = ex.llt_ratio(lazy, sl.StableParams.gaussian(), seq, 4096, 0.0)
    assert abs(r.bn_p - 1 / math.sqrt(2 * math.pi)) <= 0.01 / math.sqrt(2 * math.pi)
    bn_p, g, ratio = r
    assert ratio == pytest.approx(bn_p / g)


def test_llt_ratio_zipf_trend(zipf):
    seq = nm.NormingSeq.for_law(zipf)
    st_ = sl.StableParams.for_law(zipf)
    r8 = ex.llt_ratio(zipf, st_, seq, 2 ** 8, 0.0)
    r12 = ex.llt_ratio(zipf, st_, seq, 2 ** 12, 0.0)
    assert 0.9 <= r12.ratio <= 1.1
    assert abs(r12.ratio - 1) < abs(r8.ratio - 1)


def test_far_target_outside_support(lazy):
    seq = nm.NormingSeq.for_law(lazy)
    r = ex.llt_ratio(lazy, sl.StableParams.gaussian(), seq, 16, 7.0)
    assert r.kappa_n > 16
    assert r.bn_p == 0.0
    # kappa = 5 lands inside the support: exact rational value
    r5 = ex.llt_ratio(lazy, sl.StableParams.gaussian(), seq, 16, 5.0)
    assert r5.kappa_n == 14
    assert r5.bn_p / math.sqrt(8) == pytest.approx(float(lazy_exact(16)[14]), rel=1e-12)


def test_uniform_bound_scan_lazy(lazy):
    seq = nm.NormingSeq.for_law(lazy)
    one = ex.uniform_bound_scan(lazy, seq, [1])
    assert one.c_hat == pytest.approx(math.sqrt(0.5) * 0.5)
    scan = ex.uniform_bound_scan(lazy, seq, range(1, 257))
    assert math.isfinite(scan.c_hat)
    tail = [v for n, _, v in scan.rows if n >= 128]
    assert max(tail) - min(tail) < 1e-3
    assert tail[-1] == pytest.approx(1 / math.sqrt(2 * math.pi), rel=0.01)


def test_uniform_bound_scan_zipf(zipf):
    seq = nm.NormingSeq.for_law(zipf)
    scan = ex.uniform_bound_scan(zipf, seq, [2 ** j for j in range(4, 11)])
    vals = [v for _, _, v in scan.rows]
    assert math.isfinite(scan.c_hat)
    assert max(vals) <= 1.5 * vals[0]


def test_window_budget_error():
    law = lm.zipf_skewed(0.5, 0.3, 0.7)
    with pytest.raises(ex.WindowBudgetError) as e:
        ex.sn_pmf(law, 4, 1e-3)
    assert e.value.required > ex.MAX_LEN


def test_tol_validation(lazy):
    with pytest.raises(ValueError):
        ex.sn_pmf(lazy, 4, 0.1)
    with pytest.raises(ValueError):
        ex.sn_pmf(lazy, 0)


def test_csv_sidecar(tmp_path, lazy):
    s = ex.sn_pmf(lazy, 3)
    s.to_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "k,mass"
    assert len(lines) == 8
    side = (tmp_path / "s.csv.json").read_text()
    assert '"err_bound"' in side and '"W": 3' in side


def test_local_prob_uncached_matches_materialized(zipf):
    ex.clear_cache()
    k = np.arange(-30, 31)
    p, err = ex.local_prob(zipf, 300, k)
    s = ex.sn_pmf(zipf, 300)
    assert np.max(np.abs(p - s.prob(k))) <= 1e-13
    assert err <= 1e-4


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=300), st.lists(st.floats(0, 1), min_size=1, max_size=300))
def test_convolve_matches_numpy(a, b):
    a, b = np.array(a), np.array(b)
    out, rnd = ex.convolve(a, b)
    ref = np.convolve(a, b)
    assert np.max(np.abs(out - ref)) <= 2 * rnd + 1e-300
