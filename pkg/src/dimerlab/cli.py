"""Experiment runner: config-driven entry points, CSV emission, manifests.

Each subcommand reads a JSON config (the whole truth for the run), executes
one experiment, and writes plot-ready CSV plus a manifest that echoes the
config, the seeds, and any warnings.  Exit codes: 0 ok, 2 config error,
3 numeric failure, 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, asymptotics, correlations, kasteleyn, spectrum
from .disorder import DisorderLaw, Marginal, normalize_law, sample_layers


class ConfigError(Exception):
    pass


class ValidationFailure(Exception):
    pass


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def _parse_marginal(block) -> Marginal:
    if not isinstance(block, dict) or "kind" not in block:
        raise ConfigError("marginal block needs a 'kind'")
    kind = block["kind"]
    try:
        if kind == "constant":
            return Marginal.constant(block["value"])
        if kind == "two-point":
            return Marginal.two_point(block["lo"], block["hi"], block.get("p_hi", 0.5))
        if kind == "two-point-sigma":
            return Marginal.two_point_sigma(block["sigma"])
        if kind == "log-uniform":
            return Marginal.log_uniform(block["lo"], block["hi"])
        if kind == "log-uniform-sigma":
            return Marginal.log_uniform_sigma(block["s"])
    except (KeyError, ValueError) as e:
        raise ConfigError(f"bad marginal block {block!r}: {e}") from e
    raise ConfigError(f"unknown marginal kind {kind!r}")


def parse_law(block) -> DisorderLaw:
    if not isinstance(block, dict):
        raise ConfigError("missing law block")
    w1 = _parse_marginal(block.get("w1", {"kind": "constant", "value": 1.0}))
    w2 = _parse_marginal(block["w2"]) if "w2" in block else None
    if w2 is None:
        raise ConfigError("law block needs a w2 marginal")
    law = DisorderLaw(w1, w2)
    if not w2.is_deterministic():
        law = normalize_law(law)
    return law


def parse_budget(block) -> spectrum.Budget:
    block = block or {}
    try:
        return spectrum.Budget(
            base_steps=int(block.get("steps", 200_000)),
            blocks=int(block.get("blocks", 32)),
            burn_in=int(block.get("burn_in", 2048)),
            small_theta_factor_cap=float(block.get("small_theta_factor_cap", 64.0)))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad budget block: {e}") from e


def load_config(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config parse error at line {e.lineno}: {e.msg}") from e


def _grid(cfg: dict, name: str, default=None):
    g = cfg.get("grids", {}).get(name, default)
    if g is None:
        raise ConfigError(f"experiment requires grid {name!r}")
    if isinstance(g, dict):
        kind = g.get("kind", "linear")
        if kind == "linear":
            return np.linspace(g["lo"], g["hi"], int(g["n"]))
        if kind == "geometric":
            return np.geomspace(g["lo"], g["hi"], int(g["n"]))
        raise ConfigError(f"unknown grid kind {kind!r}")
    return np.asarray(g, dtype=float)


# ---------------------------------------------------------------------------
# Output plumbing
# ---------------------------------------------------------------------------

_HEADERS = {
    "lyap-curve": "theta,raw,stderr,iso",
    "free-energy": "H1,H2,gamma,F,quad_err,mc_err,label,theta_c",
    "phase-diagram": "H1,H2,F,label",
    "correlations": "y,x,cov,sign,quad_err,vec_tol,seed",
    "exact-torus": "quantity,blocks,brute,abs_diff",
    "fit-points": "x,y",
    "fit": "exponent,intercept,stderr,r_squared,window_lo,window_hi",
    "probe": "H1,probe,gap,gap_error,excluded",
    "delta-probe": "H2,delta,stderr",
    "validate": "check,status,detail",
}


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def emit_plotdata(rows, kind: str, path: Path) -> Path:
    """Write one columnar CSV (17 significant digits) with a documented header."""
    if kind not in _HEADERS:
        raise ValueError(f"unknown plot-data kind {kind!r}")
    with open(path, "w") as f:
        f.write(_HEADERS[kind] + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def write_manifest(outdir: Path, config: dict, t0: float, warnings: list,
                   extra: dict = None) -> Path:
    manifest = {
        "config": config,
        "version": __version__,
        "wall_time_s": time.time() - t0,
        "seed": config.get("seed", 0),
        "sign_vector": list(kasteleyn.calibrate_signs().c),
        "warnings": warnings,
    }
    if extra:
        manifest.update(extra)
    p = outdir / "manifest.json"
    with open(p, "w") as f:
        json.dump(manifest, f, indent=2, default=str)
    return p


def _fit_rows(fit: asymptotics.ExponentFit):
    return [(fit.exponent, fit.intercept, fit.stderr, fit.r_squared,
             fit.window[0], fit.window[1])]


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def _run_lyap_curve(cfg, outdir, warnings):
    law = parse_law(cfg["law"])
    curve = spectrum.build_spectral_curve(
        float(cfg.get("H2", 0.0)), float(cfg.get("gamma", 1.0)), law,
        theta_grid=cfg.get("grids", {}).get("theta"),
        budget=parse_budget(cfg.get("budget")), seed=int(cfg.get("seed", 0)))
    rows = list(zip(curve.thetas.tolist(), curve.raw.tolist(),
                    curve.stderr.tolist(), curve.iso.tolist()))
    emit_plotdata(rows, "lyap-curve", outdir / "lyap_curve.csv")
    return {"delta": curve.delta, "h_c": curve.h_c}


def _run_free_energy(cfg, outdir, warnings):
    law = parse_law(cfg["law"])
    h2 = float(cfg.get("H2", 0.0))
    gamma = float(cfg.get("gamma", 1.0))
    results = spectrum.free_energy_curve(
        _grid(cfg, "H1"), h2, gamma, law,
        budget=parse_budget(cfg.get("budget")), seed=int(cfg.get("seed", 0)))
    rows = [(r.H1, r.H2, r.gamma, r.value, r.quadrature_error, r.mc_error,
             r.phase_label, r.theta_c) for r in results]
    emit_plotdata(rows, "free-energy", outdir / "free_energy.csv")
    return {}


def _run_phase_diagram(cfg, outdir, warnings):
    law = parse_law(cfg["law"])
    gamma = float(cfg.get("gamma", 1.0))
    budget = parse_budget(cfg.get("budget"))
    seed = int(cfg.get("seed", 0))
    rows = []
    for j, h2 in enumerate(_grid(cfg, "H2")):
        results = spectrum.free_energy_curve(_grid(cfg, "H1"), float(h2), gamma,
                                             law, budget=budget, seed=(seed, j))
        rows.extend((r.H1, float(h2), r.value, r.phase_label) for r in results)
    emit_plotdata(rows, "phase-diagram", outdir / "phase_diagram.csv")
    return {}


def _run_correlations(cfg, outdir, warnings):
    law = parse_law(cfg["law"])
    y_list = [int(v) for v in _grid(cfg, "y")]
    table = correlations.decay_profile(
        float(cfg.get("H1", 0.0)), law, int(cfg.get("seed", 0)), y_list,
        x_rule=cfg.get("x_rule", "zero"),
        budget=parse_budget(cfg.get("budget")))
    rows = [(y, correlations._resolve_x(cfg.get("x_rule", "zero"), y),
             r.value, r.sign, r.quad_error, r.vec_tol, r.seed)
            for y, r in table]
    emit_plotdata(rows, "correlations", outdir / "decay_profile.csv")
    return {}


def _run_exact_torus(cfg, outdir, warnings):
    L = int(cfg.get("L", 2))
    N = int(cfg.get("N", 3))
    torus = kasteleyn.TorusSpec(L, N)
    law = parse_law(cfg["law"])
    layers = sample_layers(law, torus.y_min, torus.y_max + 1, int(cfg.get("seed", 0)))
    wf = kasteleyn.WeightField.from_layers(torus, layers,
                                           float(cfg.get("H1", 0.0)),
                                           float(cfg.get("H2", 0.0)))
    z_blocks, flag = kasteleyn.partition_function_blocks(wf)
    if flag:
        warnings.append("partition sum lost > 6 digits to sector cancellation")
    zb = z_blocks.value().real
    rows = [("partition_function", zb, float("nan"), float("nan"))]
    if torus.n_vertices <= 36:
        z_brute = kasteleyn.brute_force_partition(wf)
        rows[0] = ("partition_function", zb, z_brute, abs(zb - z_brute))
    emit_plotdata(rows, "exact-torus", outdir / "exact_torus.csv")
    return {"free_energy_density": kasteleyn.finite_free_energy_density(wf)}


def _run_pt_fit(cfg, outdir, warnings):
    law = parse_law(cfg["law"])
    budget = parse_budget(cfg.get("budget"))
    seed = int(cfg.get("seed", 0))
    curve = spectrum.build_spectral_curve(float(cfg.get("H2", 0.0)),
                                          float(cfg.get("gamma", 1.0)), law,
                                          budget=budget, seed=seed)
    h_c = curve.h_c
    h1_grid = _grid(cfg, "H1", default={"kind": "linear", "lo": 0.55 * h_c,
                                        "hi": 0.98 * h_c, "n": 12})
    results = [spectrum.free_energy_from_curve(curve, h) for h in h1_grid]
    fit = asymptotics.pt_exponent(results, h_c=h_c)
    emit_plotdata([(h_c - r.H1, r.value - r.H1 / 2.0) for r in results
                   if r.H1 < h_c], "fit-points", outdir / "pt_points.csv")
    emit_plotdata(_fit_rows(fit), "fit", outdir / "pt_fit.csv")
    return {"exponent": fit.exponent, "h_c": h_c}


def _run_gas_fit(cfg, outdir, warnings):
    law = parse_law(cfg["law"])
    gamma = float(cfg["gamma"])
    fit = asymptotics.gas_transition_exponent(
        law, gamma, budget=parse_budget(cfg.get("budget")),
        seed=int(cfg.get("seed", 0)))
    emit_plotdata(_fit_rows(fit), "fit", outdir / "gas_fit.csv")
    ga = asymptotics.GammaAnalysis.analyze(law, gamma)
    return {"exponent": fit.exponent, "beta_target": ga.beta,
            "alpha": None if math.isinf(ga.alpha) else ga.alpha,
            "gamma_c": ga.gamma_c}


def _run_dh_bench(cfg, outdir, warnings):
    zcfg = cfg.get("z_law", "alpha-half")
    if zcfg == "alpha-half":
        z = asymptotics.dh_z_law_alpha_half()
    elif zcfg == "alpha-inf":
        z = asymptotics.dh_z_law_alpha_inf()
    else:
        z = _parse_marginal(zcfg)
    eps = _grid(cfg, "eps", default=[2.0 ** -k for k in range(3, 11)])
    fit = asymptotics.dh_benchmark(z, eps, budget=parse_budget(cfg.get("budget")),
                                   seed=int(cfg.get("seed", 0)))
    emit_plotdata(_fit_rows(fit), "fit", outdir / "dh_fit.csv")
    a = asymptotics.dh_z_alpha(z)
    return {"slope": fit.exponent,
            "target": 2.0 * min(a, 1.0) if not math.isinf(a) else 2.0}


def _run_essential(cfg, outdir, warnings):
    law = parse_law(cfg["law"])
    rows = asymptotics.essential_singularity_probe(
        law, _grid(cfg, "H1", default=[0.5, 0.4, 0.3, 0.25, 0.2]),
        budget=parse_budget(cfg.get("budget")), seed=int(cfg.get("seed", 0)))
    for r in rows:
        if r.excluded:
            warnings.append(f"H1={r.H1}: gap below noise, excluded")
    emit_plotdata([(r.H1, r.probe, r.gap, r.gap_error, int(r.excluded))
                   for r in rows], "probe", outdir / "essential_probe.csv")
    return {}


def _run_delta_probe(cfg, outdir, warnings):
    law = parse_law(cfg["law"])
    probe = asymptotics.delta_gamma_probe(
        law, float(cfg["gamma"]), _grid(cfg, "H2"),
        budget=parse_budget(cfg.get("budget")), seed=int(cfg.get("seed", 0)),
        experimental=bool(cfg.get("experimental", False)))
    emit_plotdata(probe.rows, "delta-probe", outdir / "delta_probe.csv")
    extra = {"label": probe.label, "conjectured_exponent": probe.conjectured_exponent}
    if probe.fit is not None:
        emit_plotdata(_fit_rows(probe.fit), "fit", outdir / "delta_fit.csv")
        extra["fitted_exponent"] = probe.fit.exponent
    return extra


def _run_validate(cfg, outdir, warnings):
    """Fast built-in oracle suite; raises ValidationFailure on any miss."""
    rows = []
    ok = True

    def check(name, passed, detail=""):
        nonlocal ok
        rows.append((name, "pass" if passed else "FAIL", detail))
        ok = ok and passed

    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    torus = kasteleyn.TorusSpec(2, 3)
    for i in range(3):
        w1 = rng.uniform(0.5, 2.0, 6)
        w2 = rng.uniform(0.5, 2.0, 6)
        wf = kasteleyn.WeightField(torus, w1, w2, rng.uniform(-0.4, 0.4),
                                   rng.uniform(-0.4, 0.4))
        z, _ = kasteleyn.partition_function_blocks(wf)
        zb = kasteleyn.brute_force_partition(wf)
        rel = abs(z.value().real - zb) / zb
        check(f"partition-vs-brute-{i}", rel < 1e-10, f"rel={rel:.2e}")
    check("pure-h-c", abs(asymptotics.pure_h_c(1.0) - math.log(1 + math.sqrt(2))) < 1e-14)
    fe = asymptotics.pure_free_energy(0.0, 0.0)
    check("pure-free-energy-normalization", abs(fe.value - 0.29156090) < 1e-6,
          f"F(0,0)={fe.value:.8f}")
    from .poincare import Homography, hyperbolic_distance
    h = Homography.from_omega_alpha(1.0 + 0.3j, 0.7)
    z1, z2 = 0.4 + 0.1j, 1.3 - 0.2j
    d0 = hyperbolic_distance(z1, z2)
    d1 = hyperbolic_distance(h(z1), h(z2))
    check("schwarz-pick", d1 <= d0 + 1e-12, f"{d1:.6f} <= {d0:.6f}")
    emit_plotdata(rows, "validate", outdir / "validate.csv")
    if not ok:
        raise ValidationFailure("validation suite failed; see validate.csv")
    return {"checks": len(rows)}


_EXPERIMENTS = {
    "lyap-curve": _run_lyap_curve,
    "free-energy": _run_free_energy,
    "phase-diagram": _run_phase_diagram,
    "correlations": _run_correlations,
    "exact-torus": _run_exact_torus,
    "pt-fit": _run_pt_fit,
    "gas-fit": _run_gas_fit,
    "dh-bench": _run_dh_bench,
    "essential-singularity": _run_essential,
    "delta-probe": _run_delta_probe,
    "validate": _run_validate,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def run(config: dict, outdir: str = None) -> int:
    """Execute one experiment config; returns the exit code."""
    name = config.get("experiment")
    if name not in _EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}")
    out = Path(outdir or config.get("output", f"out-{name}"))
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    warnings = []
    try:
        extra = _EXPERIMENTS[name](config, out, warnings)
    except KeyError as e:
        raise ConfigError(f"experiment {name!r} requires config key {e}") from e
    write_manifest(out, config, t0, warnings, extra={"results": extra})
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimerlab",
                                description="layered-disorder dimer model experiments")
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in _EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="JSON config path")
        sp.add_argument("--output", default=None, help="output directory")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (recorded; loops are vectorized)")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else {}
        cfg.setdefault("experiment", args.experiment)
        if cfg["experiment"] != args.experiment:
            raise ConfigError("config experiment does not match the subcommand")
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.threads is not None:
            cfg["threads"] = args.threads
        return run(cfg, outdir=args.output)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ValidationFailure as e:
        print(f"validation failure: {e}", file=sys.stderr)
        return 4
    except (ArithmeticError, FloatingPointError, np.linalg.LinAlgError, ValueError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
