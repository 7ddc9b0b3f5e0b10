"""
Batch front door: one subcommand per experiment. Every run writes
report.json (schema 1) and the CSV curves of its experiment into the
output directory.

    python main.py identities --n 2
    python main.py runge --config data/configs/runge.json --out reports/runge

Exit codes: 0 verified, 1 a verdict or tolerance failed (the report is still
written), 2 invalid input.
"""
import argparse
import sys
from dataclasses import dataclass, field

import numpy as np
from dotenv import load_dotenv

from modules.densegroup import (
    ScheduleInfeasibleError,
    ShearTarget,
    build_orbit_generator,
    conjugated_shear_poly,
    conjugation_orbit,
    drift_check,
    group_action_checks,
    quadratic_shear_poly,
    realize_schedule,
    schedule_build,
    two_generator_experiment,
)
from modules.polycore import poly_eval
from modules.regions import GridSpec, Polydisc
from modules.report_writer import write_curve, write_report
from modules.run_config import (
    SUBCOMMANDS,
    ConfigError,
    load_run_config,
    parse_poly,
    parse_scalar,
    shear_variables,
)
from modules.runge import (
    DisjointPair,
    InfeasibleToleranceError,
    PiecewiseTarget,
    birkhoff_pair,
    blend_coefficient,
    blend_degree_curve,
    hypercyclic_orbit_error,
    is_nonincreasing,
    runge_piecewise,
)
from modules.shearcalc import expected_verdict, identity_suite, make_F
from modules.translations import (
    DanielewskiSurface,
    DiagonalTranslation,
    check_invariance,
    danielewski_cocycle_check,
    danielewski_power_check,
    danielewski_translation,
    escape_index,
    factor_escape_curve,
    fiber_escape_curve,
    modulus_intervals,
    orbit_distance_curve,
    product_translation,
    random_shift_pairs,
    surface_escape_probe,
    surface_samples,
    zajac_check,
)

# Load environment variables from .env (SHEARLAB_OUT_DIR)
load_dotenv()

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

HELP = {
    "identities": "exact identities of the cyclic map and twisted shears",
    "runge": "Runge blend / piecewise approximation on two disjoint compacts",
    "birkhoff": "staged construction of a paired hypercyclic (f, g)",
    "conjugate": "drift of conjugated shears and the conjugation operator orbit",
    "dense2gen": "one shear F with several targets reached by words in {τ, F}",
    "danielewski": "translations of a Danielewski surface x*y = p(z)",
    "zajac": "escape index and separating-hyperplane certificates",
    "schedule": "stage schedule (compacts, powers, margins, tolerances)",
}


@dataclass
class Outcome:
    ok: bool
    payload: dict
    curves: list = field(default_factory=list)  # [(filename, header, rows)]


def _mark(ok: bool) -> str:
    return "✅" if ok else "❌"


def _polydisc(n: int, radius: float) -> Polydisc:
    return Polydisc((0j,) * n, (radius,) * n)


# ========================================
# identities
# ========================================

def run_identities(cfg, spec: GridSpec) -> Outcome:
    suites = []
    ok = True
    for n in cfg.dimensions():
        print(f"\n🧮 n = {n}")
        rows = []
        for cert in identity_suite(n, cfg.seed, cfg.degree):
            expected = expected_verdict(cert)
            good = cert.verdict == expected
            ok = ok and good
            note = "" if expected else " (expected to fail)"
            print(f"  {_mark(good)} {cert.label}: {cert.method}, deviation {cert.max_deviation:.3g}{note}")
            rows.append({**cert.to_json(), "expected": expected})
        suites.append({"n": n, "certificates": rows})
    return Outcome(ok, {"suites": suites})


# ========================================
# runge
# ========================================

def run_runge(cfg, spec: GridSpec) -> Outcome:
    pair = DisjointPair(cfg.pieces(cfg.K1), cfg.pieces(cfg.K2), cfg.coordinate)
    print(f"  [Info] separation {pair.separation:.4g} in coordinate {cfg.coordinate}")
    if cfg.h1 is None and cfg.h2 is None:
        mode = "blend"
        cert = blend_coefficient(pair, cfg.tol, cfg.max_degree)
    else:
        mode = "piecewise"
        names = cfg.variables()
        target = PiecewiseTarget(parse_poly(cfg.h1 or "0", names), parse_poly(cfg.h2 or "0", names))
        cert = runge_piecewise(pair, target, cfg.tol, cfg.max_degree)
    reached = cert.feasible and max(cert.err1, cert.err2) <= cfg.tol
    print(f"  {_mark(reached)} {mode}: degree {cert.degree}, errors {cert.err1:.3g} / {cert.err2:.3g} (tol {cfg.tol:g})")

    curve = blend_degree_curve(pair, cfg.degrees, cfg.tol)
    monotone = is_nonincreasing(curve)
    for d, err in curve:
        print(f"    degree {d:>4}: {err:.3g}")
    print(f"  {_mark(monotone)} certified error nonincreasing in degree")

    payload = {
        "mode": mode,
        "pair": pair.to_json(),
        "certificate": cert.to_json(),
        "degree_curve": [{"degree": d, "sup_error": e} for d, e in curve],
        "monotone": monotone,
    }
    return Outcome(reached and monotone, payload, [("degree_curve.csv", ("degree", "sup_error"), curve)])


# ========================================
# birkhoff
# ========================================

def run_birkhoff(cfg, spec: GridSpec) -> Outcome:
    tau = DiagonalTranslation(1, cfg.b)
    f, g, schedule = birkhoff_pair(tau, cfg.stage_targets(), cfg.J, cfg.base_radius, cfg.gap_factor,
                                   max_degree=cfg.max_degree, spec=spec)
    curves, curve_json = [], {}
    for stage, piece in zip(schedule.stages, schedule.pieces):
        print(f"  {_mark(stage.satisfied())} stage {stage.j} ({stage.parity}, {stage.owner}): m = {stage.m}, "
              f"radius {stage.compact.radii[0]:g}, containment {'ok' if stage.containment_ok else 'broken'}")
        for owner, c in stage.conditions.items():
            print(f"      {owner}: bound {c['bound']:.3g}, direct {c['direct']:.3g} (tol {stage.tolerance:g})")
        series = f if stage.owner == "f" else g
        m_range = range(max(0, stage.m - cfg.curve_span), stage.m + cfg.curve_span + 1)
        curve = hypercyclic_orbit_error(series, tau, piece.source, stage.compact, m_range, spec)
        name = f"orbit_{stage.owner}_stage{stage.j}"
        curve_json[name] = curve.to_json()
        curves.append((f"{name}.csv", ("m", "sup_error"), curve.rows))
    ok = schedule.all_satisfied() and all(s.containment_ok for s in schedule.stages)
    payload = {
        "schedule": schedule.to_json(),
        "f_degree": f.degree(),
        "g_degree": g.degree(),
        "curves": curve_json,
    }
    return Outcome(ok, payload, curves)


# ========================================
# conjugate
# ========================================

def _point_check(g, tau: DiagonalTranslation, m: int, seed: int, count: int) -> dict:
    """Numerical τ^{-m} ∘ F_{0,g} ∘ τ^m against the closed form at seeded points of the unit polydisc."""
    n = tau.n
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-0.7, 0.7, (count, n)) + 1j * rng.uniform(-0.7, 0.7, (count, n))
    F = make_F(n, None, g)
    composed = tau.apply_power(F.apply(tau.apply_power(pts, m)), -m)
    formula = make_F(n, None, conjugated_shear_poly(g, n, tau, m)).apply(pts)
    scale = 1.0 + np.abs(formula)
    deviation = float(np.max(np.abs(composed - formula) / scale))
    return {"points": count, "max_relative_deviation": deviation, "verdict": deviation <= 1e-9}


def run_conjugate(cfg, spec: GridSpec) -> Outcome:
    n = cfg.n
    tau = DiagonalTranslation(n, cfg.b)
    g = parse_poly(cfg.g, shear_variables(n))
    h = conjugated_shear_poly(g, n, tau, cfg.m)
    print(f"  [Info] τ^-{cfg.m} ∘ F_(0,{cfg.g}) ∘ τ^{cfg.m} = F_(0,h), h = {h!r}")

    drift = [drift_check(g, tau, cfg.m)]
    for dim in cfg.dims:
        if dim != n:
            drift.append(drift_check(quadratic_shear_poly(dim), DiagonalTranslation(dim, cfg.b), cfg.m, g_label="z_n^2"))
    for d in drift:
        print(f"  {_mark(d.exact_match)} drift n={d.n}, m={d.m}: constant {d.constant.real:g} ({d.g_label})")

    points = _point_check(g, tau, cfg.m, cfg.seed, cfg.points)
    print(f"  {_mark(points['verdict'])} {cfg.points} random points: deviation {points['max_relative_deviation']:.3g}")

    actions = group_action_checks(tau, cfg.m, cfg.m + 1, cfg.seed)
    for cert in actions:
        print(f"  {_mark(cert.verdict)} {cert.label}")

    ok = all(d.exact_match for d in drift) and points["verdict"] and all(c.verdict for c in actions)
    payload = {
        "n": n,
        "b": cfg.b,
        "m": cfg.m,
        "conjugated_h": h.to_json(),
        "drift": [d.to_json() for d in drift],
        "point_check": points,
        "group_action": [c.to_json() for c in actions],
    }
    if cfg.orbit_targets:
        report = _conjugation_orbit(cfg, tau, spec)
        report.action_checks = actions
        ok = ok and report.ok
        payload["orbit"] = report.to_json()
    return Outcome(ok, payload)


def _conjugation_orbit(cfg, tau: DiagonalTranslation, spec: GridSpec):
    n = tau.n
    targets = [t.build(n) for t in cfg.orbit_targets]
    if any(not isinstance(t, ShearTarget) for t in targets):
        raise ConfigError("orbit targets must be single shears")
    if len(cfg.orbit_eps) != len(targets):
        raise ConfigError("one orbit tolerance per orbit target is required")
    radii = cfg.orbit_radii or [1.0] * len(targets)
    if len(radii) != len(targets):
        raise ConfigError("one orbit radius per orbit target is required")
    compacts = [_polydisc(n, r) for r in radii]
    K = _polydisc(n, max(radii))
    print(f"\n🔁 building F for {len(targets)} orbit targets ...")
    F, pieces = build_orbit_generator(tau, targets, K, min(cfg.orbit_eps), cfg.max_degree, cfg.orbit_gap_factor, spec)
    scan = range(0, max([abs(p.m) for p in pieces] + [0]) + 2)
    return conjugation_orbit(F, tau, targets, compacts, cfg.orbit_eps, m_range=scan, spec=spec)


# ========================================
# dense2gen
# ========================================

def run_dense2gen(cfg, spec: GridSpec) -> Outcome:
    n = cfg.n
    tau = DiagonalTranslation(n, cfg.b)
    K = _polydisc(n, cfg.radius)
    targets = [t.build(n) for t in cfg.targets]
    report = two_generator_experiment(tau, targets, K, cfg.tol, cfg.max_degree, cfg.word_length,
                                      cfg.threshold, cfg.gap_factor, spec)
    for r in report.results:
        print(f"  {_mark(r.ok)} {r.label}: powers {r.powers}, error {r.achieved:.3g} (bound {r.bound:.3g})")
    for d in report.drift:
        print(f"  {_mark(d.exact_match)} drift at m={d.m}: {d.constant.real:g}")
    fr = report.freeness
    print(f"  {_mark(fr.ok)} {fr.word_count} reduced words (expected {fr.expected_count}), "
          f"min margin {fr.min_margin:.3g} at {fr.min_word}")
    margins = [(row["word"], row["margin"]) for row in fr.margins]
    return Outcome(report.ok, {"experiment": report.to_json()}, [("freeness_margins.csv", ("word", "margin"), margins)])


# ========================================
# danielewski
# ========================================

def _product_section(cfg) -> tuple[dict, list]:
    pt = product_translation(cfg.product_kind, parse_scalar(cfg.product_a))
    m_range = range(0, cfg.m_max + 1)
    angles = np.exp(2j * np.pi * np.arange(cfg.samples) / cfg.samples)
    if pt.map.n == 1:
        samples = angles.reshape(-1, 1)
        intervals = []
    else:
        r_lo, r_hi = sorted(cfg.product_r)
        ring = np.concatenate([r_lo * angles, r_hi * angles])
        samples = np.stack([ring, ring[::-1]], axis=1)
        intervals = [{"m": m, **modulus_intervals(pt.a, r_lo, r_hi, m)} for m in m_range if m > 0]
    curve = factor_escape_curve(pt, samples, m_range)
    section = {"translation": pt.to_json(), "modulus_intervals": intervals, "escape": curve.to_json()}
    return section, [("product_escape.csv", curve.header, curve.rows)]


def run_danielewski(cfg, spec: GridSpec) -> Outcome:
    S = DanielewskiSurface(parse_poly(cfg.p, ["z"]))
    a = parse_scalar(cfg.a)
    tau = danielewski_translation(S, a)

    invariant = check_invariance(S, tau)
    print(f"  {_mark(invariant)} x*y' - p(z') = x*y - p(z)")

    cocycles = [danielewski_cocycle_check(S, x, y) for x, y in random_shift_pairs(cfg.pairs, cfg.seed)]
    cocycle_ok = all(c.verdict for c in cocycles)
    print(f"  {_mark(cocycle_ok)} τ_a ∘ τ_b = τ_(a+b) for {len(cocycles)} random pairs")

    power_ok = danielewski_power_check(S, a, 3)
    print(f"  {_mark(power_ok)} τ_a^3 = τ_3a")

    p1 = poly_eval(S.p, [1])
    image = tau(1, p1, 1)
    on_surface = image[0] * image[1] == poly_eval(S.p, [image[2]])
    print(f"  {_mark(on_surface)} τ_a(1, {p1}, 1) = {tuple(image)}")

    curve = surface_escape_probe(S, a, surface_samples(S, cfg.samples, cfg.seed), range(0, cfg.m_max + 1))
    increasing = curve.is_strictly_increasing(start=2)
    print(f"  {_mark(increasing)} escape distance strictly increasing from m = 2")

    shifts, fiber_curve = fiber_escape_curve(S, a, range(0, cfg.m_max + 1))
    slope = min(abs(s["y_shift"]) for s in shifts)
    linear = all(abs(v - slope * m) <= 1e-9 * (1 + slope * m) for m, v in fiber_curve.rows)
    print(f"  {_mark(linear)} x = 0 fibres: distance grows with slope min|a·p'(z0)| = {slope:g}")

    payload = {
        "p": S.p.to_json(),
        "translation": tau.to_json(),
        "invariance": invariant,
        "cocycle": [c.to_json() for c in cocycles],
        "power_check": power_ok,
        "point": {"source": [1, p1, 1], "image": list(image), "on_surface": on_surface},
        "escape": curve.to_json(),
        "escape_increasing": increasing,
        "fiber": {"shifts": shifts, "slope": slope, "linear": linear, "escape": fiber_curve.to_json()},
    }
    curves = [("escape_curve.csv", curve.header, curve.rows), ("fiber_escape.csv", fiber_curve.header, fiber_curve.rows)]
    if cfg.product_kind:
        section, extra = _product_section(cfg)
        payload["product"] = section
        curves += extra
    return Outcome(invariant and cocycle_ok and power_ok and on_surface and increasing and linear, payload, curves)


# ========================================
# zajac
# ========================================

def run_zajac(cfg, spec: GridSpec) -> Outcome:
    tau = DiagonalTranslation(cfg.n, cfg.b)
    K = _polydisc(cfg.n, cfg.radius)
    index = escape_index(tau, K)
    print(f"  [Info] escape index {index}")
    verdicts = [zajac_check(tau, K, m) for m in cfg.m_values]
    consistent = True
    for v in verdicts:
        agrees = v.verdict == (v.m >= index)
        consistent = consistent and agrees
        print(f"  {_mark(agrees)} m = {v.m}: {'separated' if v.verdict else 'not separated'}")
    curve = orbit_distance_curve(tau.apply, K.boundary_samples(cfg.samples), range(0, cfg.m_max + 1))
    payload = {
        "compact": K.to_json(),
        "translation": tau.to_json(),
        "escape_index": index,
        "checks": [v.to_json() for v in verdicts],
        "escape": curve.to_json(),
    }
    return Outcome(consistent, payload, [("escape_curve.csv", curve.header, curve.rows)])


# ========================================
# schedule
# ========================================

def run_schedule(cfg, spec: GridSpec) -> Outcome:
    n = cfg.n
    tau = DiagonalTranslation(n, cfg.b)
    F = make_F(n, None, parse_poly(cfg.g, shear_variables(n)))
    targets = [t.build(n) for t in cfg.targets]
    compacts = [c.build() for c in cfg.compacts]
    schedule = schedule_build(targets, compacts, tau, F, cfg.eps0, cfg.max_word_length, spec)
    if cfg.realize:
        print(f"\n🔧 realizing {len(schedule.stages)} stages with one F_(0,g) ...")
        realize_schedule(schedule, targets, tau, cfg.max_degree, spec)
    for s in schedule.stages:
        good = s.achieved is None or s.achieved <= s.eps
        achieved = "not measured" if s.achieved is None else f"{s.achieved:.3g}"
        print(f"  {_mark(good)} stage {s.j} ({s.target}): L_{s.k}, m = {s.m}, ε = {s.eps:.3g}, "
              f"δ = {s.delta:.3g}, achieved {achieved}")
    problems = schedule.violations(tau)
    problems += [f"stage {s.j}: achieved {s.achieved:.3g} exceeds ε = {s.eps:.3g}" for s in schedule.unmet()]
    for p in problems:
        print(f"  [Warning] {p}")
    return Outcome(not problems, {"schedule": schedule.to_json(), "problems": problems})


HANDLERS = {
    "identities": run_identities,
    "runge": run_runge,
    "birkhoff": run_birkhoff,
    "conjugate": run_conjugate,
    "dense2gen": run_dense2gen,
    "danielewski": run_danielewski,
    "zajac": run_zajac,
    "schedule": run_schedule,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shearlab", description="Certified experiments on shears, translations and hypercyclic maps.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (default $SHEARLAB_OUT_DIR or reports)")
        p.add_argument("--seed", type=int)
        p.add_argument("--grid", type=int, help="grid points per real dimension")
        p.add_argument("--tol", type=float)
        p.add_argument("--max-degree", type=int, dest="max_degree")
        p.add_argument("--n", type=int, help="dimension")
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID

    print(f"{'='*50}")
    print(f"  shearlab: {args.subcommand}")
    print(f"{'='*50}\n")

    overrides = {"seed": args.seed, "grid": args.grid, "tol": args.tol, "max_degree": args.max_degree, "n": args.n}
    try:
        run_config = load_run_config(args.subcommand, args.config, args.out, overrides)
    except ConfigError as e:
        print(f"[Error] {e}")
        return EXIT_INVALID
    settings = run_config.settings
    config_json = run_config.to_json()

    try:
        outcome = HANDLERS[args.subcommand](settings, GridSpec(settings.grid))
    except (ScheduleInfeasibleError, InfeasibleToleranceError) as e:
        stage = getattr(e, "stage", None)
        word = getattr(e, "word", None)
        print(f"\n  ❌ stage {stage} infeasible: {e}")
        payload = {"error": str(e), "failed_stage": stage, "failed_word": word}
        path = write_report(run_config.out_dir, args.subcommand, False, payload, config_json)
        print(f"  📋 report: {path}")
        return EXIT_FAILED
    except ValueError as e:
        print(f"[Error] {e}")
        return EXIT_INVALID

    path = write_report(run_config.out_dir, args.subcommand, outcome.ok, outcome.payload, config_json)
    for filename, header, rows in outcome.curves:
        write_curve(run_config.out_dir, filename, header, rows)
    print(f"\n{_mark(outcome.ok)} report saved to: {path}")
    return EXIT_OK if outcome.ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(run())
