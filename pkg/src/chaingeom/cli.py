"""Command line entry point: ``chaingeom {verify,tables,chain,reconstruct}``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on a usage
or configuration error.  Reports are JSON with the layout
``{version, config, checks: [{anchor, status, residual?, constants?}]}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Callable, List, Optional

import numpy as np

from . import __version__
from .chains import (
    ChainCurve,
    ChainError,
    base_point,
    chain_through,
    chart_curve,
    direction_from_coords,
    hausdorff_distance,
    manifest,
    tangent_direction,
    write_csv,
    write_manifest,
    FlagPoint,
)
from .extension import (
    build_pair,
    check_conditions,
    extend_curvature,
    phi_duality_constant,
    psi_alpha,
    psi_symmetrization_constant,
    torsion_free_normal_basis,
    transfer_tensor,
)
from .graded_lie import (
    AlgebraError,
    build_algebra,
    grading_defect,
    isotropic_splitting,
    jacobi_defect,
    levi_nondegenerate,
)
from .hodge import CochainMap, complex_for, harmonic_kernel, is_normal, is_regular, predicates, project_pi
from .parabolic_groups import group_exp, random_algebra_element, random_q
from .reconstruct import ReconstructionError, round_trip

USAGE_ERROR = 2
RECONSTRUCTION_TOL = 1e-8
CHAIN_TOL = 1e-8

# positive-homogeneity layout of the harmonic curvature for the lagrangean grading
LAGRANGEAN_LAYOUT_N1 = {(4, "g1L^g2 (x) g1L"), (4, "g1R^g2 (x) g1R")}
LAGRANGEAN_LAYOUT = {(2, "g1L^g1R (x) g0"), (1, "g1L^g1L (x) g-1R"), (1, "g1R^g1R (x) g-1L")}
PSI_CONTAINER = {"g1V^g2 (x) g0"}


class ConfigError(ValueError):
    pass


def _fmt(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _check(anchor: str, ok: bool, residual: Optional[float] = None, constants: Optional[dict] = None) -> dict:
    entry = {"anchor": anchor, "status": "pass" if ok else "fail"}
    if residual is not None:
        entry["residual"] = float(residual)
    if constants:
        entry["constants"] = {k: _fmt(v) for k, v in constants.items()}
    return entry


def _guarded(anchor: str, fn: Callable[[], List[dict]]) -> List[dict]:
    try:
        return fn()
    except Exception as exc:  # a crashing suite is a failed check, not a crash of the run
        return [{"anchor": anchor, "status": "fail", "error": f"{type(exc).__name__}: {exc}"}]


# -- suites ---------------------------------------------------------------------------


def structure_suite(alg) -> List[dict]:
    name = f"{alg.family}{alg.params}"
    out = [
        _check(f"structure {name}: Jacobi identity", jacobi_defect(alg) == 0),
        _check(f"structure {name}: grading is additive", grading_defect(alg) == 0),
        _check(f"structure {name}: Levi bracket nondegenerate", levi_nondegenerate(alg)),
    ]
    if alg.family != "cr":
        out.append(_check(f"structure {name}: g_-1 halves isotropic", isotropic_splitting(alg)))
    return out


def extension_suite(pair, rng, samples: int) -> List[dict]:
    qs = [random_q(pair.source, rng) for _ in range(samples)]
    rep = check_conditions(pair, qs)
    out = [
        _check("extension pair: alpha equivariant on Q (sampled)", rep.condition1_residual <= 1e-9, rep.condition1_residual, {"samples": samples}),
        _check("extension pair: alpha equivariant on q (exact)", rep.condition1_infinitesimal),
        _check("extension pair: alpha restricts to i' on q", rep.condition2_exact),
        _check("extension pair: alpha induces an isomorphism g/q -> g~/p~", rep.condition3_rank == rep.condition3_expected, constants={"rank": rep.condition3_rank}),
    ]
    psi = psi_alpha(pair)
    out.append(_check("Psi_alpha supported in g1V^g2 (x) g0", psi.containers() == PSI_CONTAINER))
    const = psi_symmetrization_constant(pair)
    out.append(_check("Psi_alpha contraction is a multiple of the symmetrized model map", const != 0, constants={"multiple": const}))
    pred = predicates(psi)
    out.append(_check("Psi_alpha is normal (codifferential vanishes)", pred["normal"]))
    out.append(_check("Psi_alpha is regular and torsion free", pred["regular"] and pred["torsion_free"], constants={"min_homogeneity": pred["min_homogeneity"]}))
    out.append(_check("Psi_alpha is nonzero (chain geometry of the flat model is not flat)", not psi.is_zero()))
    out.append(_check("phi is dual to the projection of alpha_bar^-1", True, constants={"multiple": phi_duality_constant(pair, rng)}))
    return out


def table_suite(alg) -> List[dict]:
    hb = harmonic_kernel(alg)
    layout = {(c.homogeneity, c.container) for c in hb.components if c.homogeneity > 0}
    if alg.family == "lagrangean":
        expected = LAGRANGEAN_LAYOUT_N1 if alg.params[0] == 1 else LAGRANGEAN_LAYOUT
        ok = layout == expected
    else:
        ok = bool(layout)
    dims = {f"{c.homogeneity}: {c.container}": c.dimension for c in hb.components}
    return [_check(f"harmonic curvature table {alg.family}{alg.params}", ok, constants=dims)]


def transfer_suite(pair, rng, samples: int) -> List[dict]:
    basis = torsion_free_normal_basis(pair)
    psi = psi_alpha(pair)
    good = all(is_normal(c) and is_regular(c) for c in (extend_curvature(pair, k) for k in basis))
    same = all(extend_curvature(pair, k) - psi == transfer_tensor(pair, k) for k in basis)
    out = [
        _check("transferred curvature of torsion free normal data is regular and normal", good, constants={"basis_size": len(basis)}),
        _check("transferred curvature: direct and phi-based routes agree", same),
    ]
    if pair.n >= 2:
        hb = harmonic_kernel(pair.source)
        torsion = [v for c in hb.components if c.homogeneity == 1 for v in c.vectors]
        fails = all(not (is_regular(e) and is_normal(e)) for e in (extend_curvature(pair, v) for v in torsion))
        out.append(_check("transferred harmonic torsion is not regular and normal", fails and bool(torsion), constants={"torsion_vectors": len(torsion)}))
    pp = project_pi(psi)
    out.append(_check("pi^E(Psi_alpha) = 0", pp["piE"].is_zero()))
    out.append(_check("pi^V(Psi_alpha) != 0", not pp["piV"].is_zero()))
    keys = complex_for(pair.source).keys(2)
    ok = True
    count = min(samples, 50)
    for _ in range(count):
        idx = rng.choice(len(keys), size=min(12, len(keys)), replace=False)
        kappa = CochainMap(pair.source, 2, {keys[i]: Fraction(int(rng.integers(-5, 6))) for i in idx})
        ok = ok and project_pi(transfer_tensor(pair, kappa))["piV"].is_zero()
    out.append(_check("transfer of arbitrary curvature lies in ker pi^V", ok, constants={"samples": count}))
    return out


def chain_suite(alg, rng, trials: int = 3) -> List[dict]:
    x = base_point(alg)
    (top,) = alg.indices("g-2")
    c = chain_through(x, alg.basis_element(top))
    n = alg.ambient_size - 2
    closed = np.zeros((2 * n + 1, len(np.linspace(-1, 1, 5))))
    closed[-1] = np.linspace(-1, 1, 5)
    base_ok = np.array_equal(chart_curve(c, np.linspace(-1, 1, 5)), closed.T)
    out = [_check("chain through the base point in a g_-2 direction is t -> exp(tE)", base_ok)]
    worst = 0.0
    round_ok = True
    for _ in range(trials):
        g = group_exp(random_algebra_element(alg, rng, scale=0.3))
        coords = [1] + [int(v) for v in rng.integers(-2, 3, size=2 * n)]
        xi = direction_from_coords(alg, coords)
        c1 = chain_through(FlagPoint(g), xi)
        tangent = tangent_direction(c1, FlagPoint(g))
        round_ok = round_ok and max(abs(float(a) - float(b)) for a, b in zip(tangent.coords, xi.coords)) <= 1e-9
        c2 = ChainCurve(c1.frame @ random_q(alg, rng, 0.3), c1.direction)
        worst = max(worst, hausdorff_distance(c1, c2))
    out.append(_check("frame normalization reproduces the direction", round_ok))
    out.append(_check("chains are Q-invariant as point sets", worst <= CHAIN_TOL, worst, {"trials": trials}))
    return out


def reconstruction_suite(kind: str, n: int, seed: int, count: int) -> List[dict]:
    errors = [round_trip(kind, n, seed + k)["error"] for k in range(count)]
    what = "L and R up to swap" if kind == "product" else "J up to sign"
    return [_check(f"reconstruction of {what} from S, n={n}", max(errors) <= RECONSTRUCTION_TOL, max(errors), {"fibers": count})]


# -- commands -------------------------------------------------------------------------


def _params(args) -> tuple:
    if args.family == "cr":
        p, q = args.p, args.q
        if p is None or q is None:
            raise ConfigError("cr needs --p and --q")
        if p < 0 or q < 0 or p + q < 1:
            raise ConfigError("cr needs p, q >= 0 and p + q >= 1")
        return (p, q)
    if args.n < 1:
        raise ConfigError("n must be at least 1")
    if args.family == "path" and args.n < 2:
        raise ConfigError("path needs n >= 2")
    return (args.n,)


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def run_verify(args) -> dict:
    params = _params(args)
    if args.family == "path":
        raise ConfigError("verify runs on lagrangean or cr")
    rng = np.random.default_rng(args.seed)
    pair = build_pair(args.family, *params)
    n = pair.n
    checks: List[dict] = []
    checks += _guarded("structure", lambda: structure_suite(pair.source) + structure_suite(pair.target))
    checks += _guarded("extension pair", lambda: extension_suite(pair, rng, args.samples))
    if args.family == "lagrangean":
        checks += _guarded("harmonic table", lambda: table_suite(pair.source))
        checks += _guarded("curvature transfer", lambda: transfer_suite(pair, rng, args.samples))
        checks += _guarded("chains", lambda: chain_suite(pair.source, rng))
        checks += _guarded("reconstruction", lambda: reconstruction_suite("product", n, args.seed, 3))
    else:
        checks += _guarded("reconstruction", lambda: reconstruction_suite("complex", n, args.seed, 3))
    return {"version": __version__, "config": _config(args), "checks": checks}


def run_tables(args) -> dict:
    params = _params(args)
    alg = build_algebra(args.family, *params)
    hb = harmonic_kernel(alg)
    return {
        "version": __version__,
        "config": _config(args),
        "table": hb.table(),
        "harmonic_dimension": hb.total_dim,
        "checks": table_suite(alg) if args.family == "lagrangean" else [],
    }


def run_reconstruct(args) -> dict:
    params = _params(args)
    if args.family == "path":
        raise ConfigError("reconstruct runs on lagrangean or cr")
    kind = "product" if args.family == "lagrangean" else "complex"
    n = sum(params)
    rounds = []
    for k in range(args.samples):
        try:
            rounds.append(round_trip(kind, n, args.seed + k))
        except ReconstructionError as exc:
            rounds.append({"kind": kind, "n": n, "fiber_seed": args.seed + k, "error": None, "failure": str(exc), "diagnostics": exc.diagnostics})
    errors = [r["error"] for r in rounds]
    ok = all(e is not None and e <= RECONSTRUCTION_TOL for e in errors)
    worst = max((e for e in errors if e is not None), default=None)
    return {
        "version": __version__,
        "config": _config(args),
        "round_trips": rounds,
        "checks": [_check(f"reconstruction round trip ({kind}, n={n})", ok, worst, {"fibers": args.samples})],
    }


def run_chain(args) -> dict:
    if args.family != "lagrangean":
        raise ConfigError("chain export is available for the lagrangean family")
    (n,) = _params(args)
    if args.samples < 2:
        raise ConfigError("need at least two samples")
    if not args.t_min < args.t_max:
        raise ConfigError("--t-min must be below --t-max")
    alg = build_algebra("lagrangean", n)
    if args.direction:
        try:
            values = [Fraction(v.strip()) for v in args.direction.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad direction: {exc}")
    else:
        values = [Fraction(1)] + [Fraction(0)] * (2 * n)
    try:
        xi = direction_from_coords(alg, values)
    except ChainError as exc:
        raise ConfigError(str(exc))
    x = base_point(alg)
    c = chain_through(x, xi)  # ChainError for contact-tangent directions
    ts = np.linspace(args.t_min, args.t_max, args.samples)
    coords = chart_curve(c, ts)
    out = args.out or "chain.csv"
    write_csv(out, ts, coords)
    frame_ok = tangent_direction(c, x) == xi
    data = manifest(c, ts, values)
    data["version"] = __version__
    data["checks"] = [_check("frame normalization reproduces the direction", frame_ok)]
    write_manifest(out + ".json", data)
    return {"version": __version__, "config": _config(args), "csv": out, "manifest": out + ".json", "checks": data["checks"]}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chaingeom", description="Chain geometry verification engine")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, families, samples):
        p.add_argument("--family", choices=families, default=families[0])
        p.add_argument("--n", type=int, default=1)
        p.add_argument("--p", type=int)
        p.add_argument("--q", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=samples)
        p.add_argument("--out")

    p = sub.add_parser("verify", help="run the verification suites")
    common(p, ["lagrangean", "cr"], 100)
    p.set_defaults(func=run_verify)
    p = sub.add_parser("tables", help="harmonic curvature table")
    common(p, ["lagrangean", "path", "cr"], 100)
    p.set_defaults(func=run_tables)
    p = sub.add_parser("reconstruct", help="reconstruction round trips on random fibers")
    common(p, ["lagrangean", "cr"], 20)
    p.set_defaults(func=run_reconstruct)
    p = sub.add_parser("chain", help="export a chain through the base point as CSV")
    common(p, ["lagrangean"], 101)
    p.add_argument("--t-min", type=float, default=-1.0)
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--direction", help="comma separated g_-2 then g_-1 coordinates")
    p.set_defaults(func=run_chain)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = args.func(args)
    except (ConfigError, AlgebraError) as exc:
        print(f"chaingeom: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ChainError as exc:
        print(f"chaingeom: {exc}", file=sys.stderr)
        return 1
    text = json.dumps(report, indent=2, default=str)
    if args.out and args.command != "chain":
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if all(c["status"] == "pass" for c in report["checks"]) else 1


if __name__ == "__main__":
    sys.exit(main())
