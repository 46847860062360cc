import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize, special, stats

from stable_llt import lattice_model as lm
from stable_llt import stable_law as sl


def test_gaussian_params():
    p = sl.StableParams.gaussian()
    assert (p.alpha, p.beta, p.c) == (2.0, 0.0, 0.5)
    assert sl.StableParams.for_law(lm.lazy_walk()) == p


def test_from_tails_symmetric():
    p = sl.from_tails(1.5, 0.5, 0.5)
    assert p.beta == 0
    assert p.c == pytest.approx(special.gamma(-0.5) * math.cos(0.75 * math.pi), rel=1e-14)
    assert p.c == pytest.approx(math.sqrt(2 * math.pi), rel=1e-14)


def test_from_tails_skew():
    assert sl.from_tails(1.5, 1, 0).beta == 1
    p = sl.from_tails(0.5, 0.3, 0.7)
    assert p.beta == pytest.approx(-0.4)
    assert p.c > 0


def test_validation():
    with pytest.raises(ValueError):
        sl.StableParams(1.0, 0, 1)
    with pytest.raises(ValueError):
        sl.StableParams(2.0, 0.5, 1)
    with pytest.raises(ValueError):
        sl.StableParams(1.5, 1.5, 1)
    with pytest.raises(ValueError):
        sl.from_tails(1.5, 0, 0)


def test_char_fn_values():
    assert sl.char_fn(sl.from_tails(1.5, 1, 0), 0.0) == 1
    assert sl.char_fn(sl.StableParams.gaussian(), 1.0) == pytest.approx(math.exp(-0.5), abs=1e-15)
    v = sl.char_fn(sl.StableParams(1.5, 0, 1.0), 2.0)
    assert v.imag == 0
    assert v.real == pytest.approx(math.exp(-2 ** 1.5), rel=1e-14)


def test_char_fn_modulus_decreasing():
    p = sl.from_tails(1.25, 0.7, 0.2)
    t = np.linspace(0, 5, 200)
    assert np.all(np.diff(np.abs(sl.char_fn(p, t))) < 0)


@pytest.mark.parametrize("alpha", [1.25, 1.5, 1.75])
def test_density_zero_closed_form(alpha):
    p = sl.StableParams(alpha, 0.0, 1.0)
    expect = special.gamma(1 / alpha) / (math.pi * alpha)
    assert sl.density(p, 0.0) == pytest.approx(expect, abs=1e-8)
    assert sl.density_at_zero(p) == pytest.approx(expect, rel=1e-14)


def test_density_normal():
    p = sl.StableParams.gaussian()
    xs = np.linspace(-4, 4, 41)
    assert np.max(np.abs(sl.density(p, xs) - stats.norm.pdf(xs))) <= 1e-8
    assert sl.density(p, 0.0, tol=1e-8) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-8)


@pytest.mark.parametrize("alpha, beta", [(1.5, 0.6), (1.25, -1.0), (0.7, 0.3)])
def test_density_against_scipy(alpha, beta):
    # scipy's S1 parametrization with scale c^(1/alpha) matches psi for alpha != 1
    p = sl.StableParams(alpha, beta, 1.3)
    xs = np.array([-3.0, -0.5, 0.0, 0.4, 2.5])
    ref = stats.levy_stable.pdf(xs, alpha, beta, scale=1.3 ** (1 / alpha))
    assert np.max(np.abs(sl.density(p, xs) - ref)) <= 1e-6


def test_density_symmetry():
    p = sl.StableParams(1.5, 0.0, 0.8)
    xs = np.linspace(0.1, 6, 25)
    assert np.max(np.abs(sl.density(p, xs) - sl.density(p, -xs))) <= 1e-10


def test_density_integrates_to_one():
    p = sl.from_tails(1.5, 0.5, 0.5)
    s = p.c ** (1 / p.alpha)
    R = 40 * s
    xs = np.linspace(-R, R, 4001)
    g = sl.density(p, xs, tol=1e-9)
    body = integrate.trapezoid(g, xs)
    # tails beyond R: P(|X| > R) ~ (c1 + c2) R^-alpha
    tails = 1.0 * R ** -p.alpha
    assert 0.999 <= body + tails <= 1.001
    assert g.min() >= -1e-9


def test_density_rejects_bad_tol():
    with pytest.raises(ValueError):
        sl.density(sl.StableParams.gaussian(), 0.0, tol=0)


def test_density_at_zero_needs_symmetry():
    with pytest.raises(ValueError):
        sl.density_at_zero(sl.from_tails(1.5, 1, 0))


@pytest.mark.parametrize("args, expect", [((0, 1, 1), 1.0), ((0, 1, 2), math.sqrt(math.pi) / 2), ((1, 2, 2), 0.25)])
def test_gamma_integral_values(args, expect):
    assert sl.gamma_integral(*args) == pytest.approx(expect, rel=1e-14)
    assert sl.gamma_integral(*args, method="quad") == pytest.approx(expect, rel=1e-10)


def test_gamma_integral_closed_vs_quad_grid():
    for d in (0.0, 0.5, 2.0):
        for p in (0.3, 1.0, 4.0):
            for a in (0.7, 1.5, 2.0):
                c = sl.gamma_integral(d, p, a)
                q = sl.gamma_integral(d, p, a, method="quad")
                assert q == pytest.approx(c, rel=1e-8)


def test_gamma_integral_validation():
    with pytest.raises(ValueError):
        sl.gamma_integral(-1, 1, 1)
    with pytest.raises(ValueError):
        sl.gamma_integral(0, 1, 1, method="other")


def test_zolotarev_symmetric():
    p = sl.StableParams(1.5, 0.0, 2.0)
    assert sl.zolotarev_form(p) == (2.0, 0.0)


def _theta_root(alpha, beta):
    f = lambda th: math.tan(math.pi * th * alpha / 2) - beta * math.tan(math.pi * alpha / 2)
    # tan(pi theta alpha / 2) is increasing for |theta| < 1/alpha
    edge = (1 - 1e-9) / alpha
    return optimize.brentq(f, -edge, edge, xtol=1e-15)


def test_zolotarev_totally_skewed():
    p = sl.from_tails(1.5, 1, 0)
    cp, th = sl.zolotarev_form(p)
    # principal-branch root; |theta| = 2/alpha - 1 with sign from tan(3 pi / 4) < 0
    assert th == pytest.approx(-1 / 3, abs=1e-12)
    assert abs(th) <= 2 / 1.5 - 1 + 1e-12
    assert cp * math.cos(math.pi * th * 1.5 / 2) == pytest.approx(p.c, rel=1e-12)


def test_zolotarev_alpha_half():
    p = sl.StableParams(0.5, -1.0, 1.0)
    _, th = sl.zolotarev_form(p)
    assert abs(th) <= 1
    assert th == pytest.approx(_theta_root(0.5, -1.0), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([0.5, 0.8, 1.2, 1.5, 1.9]), st.floats(-1, 1), st.floats(0.1, 5))
def test_zolotarev_roundtrip(alpha, beta, c):
    p = sl.StableParams(alpha, beta, c)
    cp, th = sl.zolotarev_form(p)
    assert abs(th) <= min(1, 2 / alpha - 1) + 1e-12
    u = math.pi * th * alpha / 2
    assert cp * math.cos(u) == pytest.approx(c, rel=1e-12)
    assert math.tan(u) == pytest.approx(beta * math.tan(math.pi * alpha / 2), rel=1e-12, abs=1e-12)
    # the two forms give the same exponent
    t = 0.7
    z = -cp * t ** alpha * complex(math.cos(u), -math.sin(u))
    assert np.exp(z) == pytest.approx(sl.char_fn(p, t), abs=1e-12)


def test_arg_log_ratio_symmetric_and_lazy():
    grid = [0.1 / 2 ** j for j in range(8)]
    for law in (lm.zipf_symmetric(1.5), lm.lazy_walk()):
        r = sl.arg_log_ratio_check(law, grid)
        assert max(v for _, v in r) <= 1e-9


def test_arg_log_ratio_skewed_trend():
    law = lm.zipf_skewed(1.5, 1, 0)
    grid = [0.1 / 4 ** j for j in range(7)]
    r = [v for _, v in sl.arg_log_ratio_check(law, grid)]
    errs = [abs(v - 1) for v in r]
    assert errs[-1] < 0.05
    assert errs[-1] < errs[0]


def test_arg_log_ratio_grid_validation():
    with pytest.raises(ValueError):
        sl.arg_log_ratio_check(lm.lazy_walk(), [0.01, 0.05])


def test_csv_dumps(tmp_path):
    p = sl.StableParams.gaussian()
    sl.dump_density_csv(p, [-1.0, 0.0, 1.0], tmp_path / "g.csv")
    sl.dump_char_fn_csv(p, [0.0, 1.0], tmp_path / "psi.csv")
    rows = (tmp_path / "g.csv").read_text().splitlines()
    assert rows[0] == "x,g"
    assert float(rows[2].split(",")[1]) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-9)
    assert (tmp_path / "psi.csv").read_text().splitlines()[0] == "t,re_psi,im_psi"
