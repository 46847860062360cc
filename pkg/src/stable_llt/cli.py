"""Command line driver: ``stable-llt <subcommand> [--config FILE] [--out DIR] ...``.

Each subcommand writes CSV data, a ``summary.json`` with one pass/fail entry
per configured check, and a ``manifest.json`` listing every file written and
the effective configuration.  Exit codes: 0 all checks pass, 2 invalid
configuration, 3 numerical failure, 4 a check failed.
"""

from __future__ import annotations

import argparse
import copy
import inspect
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__, aslt_sim, correlation, exact_llt, lattice_model, norming, stable_law

EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 2, 3, 4

DEFAULTS = {
    "law": {"name": "lazy_walk", "params": {}},
    "norming": {"epsilon": 0.5, "eta": 1.0, "delta": None},
    "stable": None,  # {alpha, beta, c} overrides the law-derived limit
    "kappa": 0.0,
    "tol": 1e-4,
    "threads": 1,
    "out": "out",
    "density": {"x_min": -4.0, "x_max": 4.0, "points": 161, "t_max": 4.0, "tol": 1e-10},
    "exact_llt": {"n": 4096, "n_list": [], "ratio_tol": 0.01},
    "corr": {"n": 4096, "m_grid": None, "tops": [9, 10, 11, 12]},
    "aslt": {"N_grid": [1000, 10000, 100000], "seed_count": 32, "base_seed": 0, "seeds": None},
    "norming_check": {"n_grid": [16, 64, 256, 1024, 4096], "a": 4, "b": 1 << 20, "gamma": None},
}


class ConfigError(ValueError):
    pass


class CheckFailed(RuntimeError):
    pass


NUMERIC_ERRORS = (stable_law.QuadratureError, exact_llt.WindowBudgetError, norming.NoRootError,
                  correlation.TooFewPointsError, FloatingPointError)


# -- configuration --------------------------------------------------------------


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        where = f"{path}{k}"
        if k not in base:
            raise ConfigError(f"field '{where}': unknown key")
        if isinstance(base[k], dict) and base[k] and k != "params":
            if not isinstance(v, dict):
                raise ConfigError(f"field '{where}': expected a mapping")
            out[k] = _merge(base[k], v, where + ".")
        else:
            out[k] = v
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULTS)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    try:
        doc = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError(f"{line}{e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    return _merge(DEFAULTS, doc)


def parse_seeds(text: str) -> list[int]:
    """'0,1,5' or '0:32' (half-open range) or a mix."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            a, b = part.split(":")
            out.extend(range(int(a), int(b)))
        else:
            out.append(int(part))
    if not out:
        raise ValueError("empty seed list")
    return out


def resolve_threads(flag: int | None, cfg: dict) -> int:
    if flag is not None:
        return flag
    env = os.environ.get("STABLE_LLT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"STABLE_LLT_THREADS must be an integer, got {env!r}") from None
    return int(cfg["threads"])


def build_law(cfg: dict):
    spec = cfg["law"]
    name = spec.get("name")
    fn = lattice_model.BUILDERS.get(name)
    if fn is None:
        raise ConfigError(f"field 'law.name': unknown builder {name!r}; choose from {sorted(lattice_model.BUILDERS)}")
    params = spec.get("params") or {}
    allowed = set(inspect.signature(fn).parameters)
    bad = set(params) - allowed
    if bad:
        raise ConfigError(f"field 'law.params': unknown parameter(s) {sorted(bad)} for {name}")
    try:
        return fn(**params)
    except ValueError as e:
        raise ConfigError(f"field 'law.params': {e}") from None


def build_seq(cfg: dict, law):
    n = cfg["norming"]
    try:
        return norming.NormingSeq.for_law(law, epsilon=float(n["epsilon"]), eta=float(n["eta"]),
                                          delta=None if n["delta"] is None else float(n["delta"]))
    except ValueError as e:
        raise ConfigError(f"field 'norming': {e}") from None


def build_stable(cfg: dict, law):
    s = cfg["stable"]
    try:
        if s:
            return stable_law.StableParams(float(s["alpha"]), float(s.get("beta", 0.0)), float(s["c"]))
        return stable_law.StableParams.for_law(law)
    except (KeyError, ValueError) as e:
        raise ConfigError(f"field 'stable': {e}") from None


# -- output helpers ---------------------------------------------------------------


class Run:
    def __init__(self, out: Path, cfg: dict, command: str):
        self.out = out
        self.cfg = cfg
        self.command = command
        self.files: list[str] = []
        self.checks: dict[str, bool] = {}
        self.values: dict = {}
        out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.out / name

    def check(self, name: str, ok) -> None:
        self.checks[name] = bool(ok)

    def finish(self) -> int:
        summary = {"command": self.command, "checks": self.checks,
                   "passed": all(self.checks.values()), "values": _jsonable(self.values)}
        with open(self.path("summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
        self.files.append("manifest.json")
        manifest = {"version": __version__, "command": self.command, "config": _jsonable(self.cfg),
                    "files": sorted(set(self.files))}
        with open(self.out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        return 0 if summary["passed"] else EXIT_CHECK


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


# -- subcommands ---------------------------------------------------------------------


def cmd_density(run: Run, cfg: dict, law, seq, stable) -> None:
    d = cfg["density"]
    xs = np.linspace(float(d["x_min"]), float(d["x_max"]), int(d["points"]))
    tol = float(d["tol"])
    g = stable_law.density(stable, xs, tol)
    with open(run.path("density.csv"), "w", newline="", encoding="utf-8") as fh:
        fh.write("x,g\n")
        for x, v in zip(xs, g):
            fh.write(f"{float(x)!r},{float(v)!r}\n")
    ts = np.linspace(-float(d["t_max"]), float(d["t_max"]), int(d["points"]))
    stable_law.dump_char_fn_csv(stable, ts, run.path("char_fn.csv"))
    run.values.update(stable=stable.to_dict(), min_g=float(g.min()))
    run.check("nonnegative", g.min() >= -tol)
    if stable.skew == 0:
        g0 = stable_law.density_at_zero(stable)
        run.values["g0_closed_form"] = g0
        run.values["g0_quadrature"] = stable_law.density(stable, 0.0, tol)
        run.check("g0_closed_form", abs(run.values["g0_quadrature"] - g0) <= 1e-8)
        if np.allclose(xs, -xs[::-1], rtol=0, atol=1e-12):
            run.check("symmetric", np.max(np.abs(g - g[::-1])) <= 1e-10)
    if stable.alpha == 2:
        normal = np.exp(-xs ** 2 / 2) / math.sqrt(2 * math.pi)
        run.values["max_normal_gap"] = float(np.max(np.abs(g - normal)))
        run.check("normal_column", run.values["max_normal_gap"] <= 1e-6)


def cmd_exact_llt(run: Run, cfg: dict, law, seq, stable) -> None:
    e = cfg["exact_llt"]
    n = int(e["n"])
    tol = float(cfg["tol"])
    s = exact_llt.sn_pmf(law, n, tol, seq=seq)
    s.to_csv(run.path("sn_pmf.csv"))
    run.files.append("sn_pmf.csv.json")
    r = exact_llt.llt_ratio(law, stable, seq, n, float(cfg["kappa"]), tol)
    run.values.update(n=n, err_bound=s.err_bound, point_err=s.point_err(), bn_p=r.bn_p, g=r.g,
                      ratio=r.ratio, kappa_n=r.kappa_n)
    run.check("err_bound_within_tol", s.err_bound <= tol)
    run.check("llt_ratio", abs(r.ratio - 1) <= float(e["ratio_tol"]))
    if e["n_list"]:
        scan = exact_llt.uniform_bound_scan(law, seq, e["n_list"], tol)
        with open(run.path("uniform_bound.csv"), "w", encoding="utf-8") as fh:
            fh.write("n,k,bn_max_p\n")
            for nn, k, v in scan.rows:
                fh.write(f"{nn},{k},{v!r}\n")
        run.values.update(c_hat=scan.c_hat, c_hat_n=scan.n, c_hat_k=scan.k)
        run.check("uniform_bound_finite", math.isfinite(scan.c_hat))


def cmd_corr(run: Run, cfg: dict, law, seq, stable) -> None:
    c = cfg["corr"]
    tol = float(cfg["tol"])
    kappa = float(cfg["kappa"])
    n = int(c["n"])
    scan = correlation.domination_scan(law, seq, tuple(int(t) for t in c["tops"]), kappa, tol)
    correlation.dump_csv(scan.reports, run.path("corr.csv"))
    m_grid = c["m_grid"] or [1 << j for j in range(n.bit_length())]
    fit = correlation.exponent_fit(law, seq, n, m_grid, kappa, tol, x0=scan.x0)
    run.values.update(slope=fit.slope, rho=seq.rho, empirical_C=scan.c_emp, x0=scan.x0, c_hat=scan.c_hat,
                      fit_points=int(fit.mask.sum()))
    run.check("slope", fit.slope >= seq.rho - 0.1)
    run.check("empirical_C_stable", not scan.blow_up and all(math.isfinite(v) for v in scan.c_emp))


def _aslt_streams(cfg: dict):
    a = cfg["aslt"]
    base = int(a["base_seed"])
    if a["seeds"]:
        return [aslt_sim.SeededStream(base, int(i)) for i in a["seeds"]]
    return aslt_sim.study_streams(base, int(a["seed_count"]))


def cmd_aslt(run: Run, cfg: dict, law, seq, stable, threads: int) -> None:
    if law.alpha <= 1:
        raise ConfigError("field 'law': the almost sure average needs alpha > 1")
    a = cfg["aslt"]
    Ns = sorted(int(v) for v in a["N_grid"])
    kappa = float(cfg["kappa"])
    streams = _aslt_streams(cfg)
    runs = aslt_sim.run_many(law, seq, kappa, Ns[-1], streams, Ns, threads)
    with open(run.path("runs.csv"), "w", encoding="utf-8") as fh:
        fh.write("seed,index,N,A_N,hits\n")
        for r in runs:
            for N, A, h in zip(r.checkpoints, r.averages, r.hits_at):
                fh.write(f"{r.seed},{r.index},{N},{A!r},{h}\n")
    curve = aslt_sim.expected_curve(law, seq, kappa, Ns, float(cfg["tol"]))
    g = stable_law.density(stable, kappa)
    A = np.array([r.averages for r in runs])
    with open(run.path("study.csv"), "w", encoding="utf-8") as fh:
        fh.write("N,median_A,q25,q75,mean_A,expected_A,g_kappa\n")
        for j, N in enumerate(Ns):
            col = A[:, j]
            fh.write(f"{N},{float(np.median(col))!r},{float(np.quantile(col, 0.25))!r},"
                     f"{float(np.quantile(col, 0.75))!r},{float(col.mean())!r},{float(curve.values[j])!r},{g!r}\n")
    with open(run.path("aslt_manifest.json"), "w", encoding="utf-8") as fh:
        fh.write(aslt_sim.manifest(law, seq, kappa, [(s.seed, s.index) for s in streams], Ns))
    run.values.update(expected=curve.values, g_kappa=g, seeds=len(streams))
    if len(streams) >= 2:
        for j, N in enumerate(Ns):
            col = A[:, j]
            band = 4 * col.std(ddof=1) / math.sqrt(len(col)) + curve.errors[j]
            run.check(f"unbiased_N{N}", abs(col.mean() - curve.values[j]) <= band)


def cmd_norming(run: Run, cfg: dict, law, seq, stable) -> None:
    c = cfg["norming_check"]
    grid = [int(v) for v in c["n_grid"]]
    norming.dump_csv(seq, grid, run.path("norming.csv"))
    b = np.asarray(seq.solve_bn(np.array(grid)))
    resid = np.abs(b ** seq.alpha - np.array(grid) * seq.h(b)) / b ** seq.alpha
    run.values["max_residual"] = float(resid.max())
    run.check("bn_residual", resid.max() <= 1e-9)
    run.check("bn_increasing", bool(np.all(np.diff(b) > 0)))
    gamma = c["gamma"]
    if gamma is None:
        # delta' slightly above sigma/alpha for log-power h, else 1
        gamma = (seq.h.sigma / seq.alpha + 0.05 + seq.h.sigma + 1) if seq.h.kind == "log_power" else 1.0
    chk = norming.log_weight_sum_check(seq, max(int(c["a"]), seq.n_min(), 2), int(c["b"]), float(gamma))
    run.values.update(gamma=gamma, fitted_C=chk.fitted_C, lhs_sum=chk.lhs_sum, rhs_gap=chk.rhs_gap)
    run.check("fitted_C_finite", math.isfinite(chk.fitted_C))


COMMANDS = {
    "density": cmd_density,
    "exact-llt": cmd_exact_llt,
    "corr-check": cmd_corr,
    "aslt": cmd_aslt,
    "norming": cmd_norming,
}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stable-llt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="YAML or JSON experiment file")
        s.add_argument("--out", help="output directory")
        s.add_argument("--seeds", help="seed indices, e.g. 0,1,2 or 0:32")
        s.add_argument("--threads", type=int, help="worker threads (env STABLE_LLT_THREADS)")
        s.add_argument("--tol", type=float, help="certified error tolerance")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg["out"] = args.out
        if args.tol is not None:
            cfg["tol"] = args.tol
        if args.seeds:
            try:
                cfg["aslt"]["seeds"] = parse_seeds(args.seeds)
            except ValueError as e:
                raise ConfigError(f"--seeds: {e}") from None
        threads = resolve_threads(args.threads, cfg)
        cfg["threads"] = threads
        if not 0 < float(cfg["tol"]) <= 1e-3:
            raise ConfigError("field 'tol': must lie in (0, 1e-3]")
        law = build_law(cfg)
        seq = build_seq(cfg, law)
        stable = build_stable(cfg, law)
        run = Run(Path(cfg["out"]), cfg, args.command)
        fn = COMMANDS[args.command]
        if fn is cmd_aslt:
            fn(run, cfg, law, seq, stable, threads)
        else:
            fn(run, cfg, law, seq, stable)
        code = run.finish()
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    if code:
        failed = [k for k, v in run.checks.items() if not v]
        print(f"checks failed: {', '.join(failed)}", file=sys.stderr)
    else:
        print(f"all checks passed; outputs in {run.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
