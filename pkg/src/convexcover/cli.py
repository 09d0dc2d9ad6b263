"""Command line front end.

Four subcommands mirror the library's main flows:

  pack      build an interval system, its separated family (when the cell
            count allows), the pairwise-distance certificate, and the
            separation-vs-size sweep
  schedule  build a refinement schedule, run its inequality checks, and
            write the cover accounting
  lemmas    run the distance-vs-Hausdorff checks and slope-mass bounds on
            seeded random pairs
  bounds    write the assembled cover and packing bounds for one query

Every output is a file in --out-dir. Reruns with the same arguments
produce byte-identical files: floats are serialized with repr, JSON keys
are sorted, and all randomness is seeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from .functions import (
    DomainError,
    LipschitzVector,
    ParameterError,
    Rect,
    make_random_convex,
)
from .metrics import GridSpec
from .packing import (
    CELL_CAP,
    build_interval_system,
    build_packing_family,
    packing_certificate,
    separation_curve,
    verify_cap_properties,
)
from .schedule import LOG2, build_schedule, cover_accounting, schedule_checks
from .verify import (
    check_l1_bound,
    check_sup_bound,
    entropy_bounds,
    gradient_mass,
)


def _parse_eta(text: str) -> Fraction:
    # "1/400" and "0.0025" both parse exactly; fall back to the float's
    # exact binary value for inputs Fraction cannot read (e.g. "2.5e-3")
    try:
        return Fraction(text)
    except ValueError:
        return Fraction(float(text))


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)] + [",".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_pack(args) -> int:
    out = _out_dir(args)
    eta = _parse_eta(args.eta)
    system = build_interval_system(eta, args.dim)
    _write_json(out / "interval_system.json", system.to_json())
    report = verify_cap_properties(system, samples=args.cap_samples,
                                   seed=args.seed)
    _write_json(out / "cap_report.json", report.to_json())
    curve = separation_curve(eta, args.dim, steps=args.curve_steps)
    _write_csv(out / "lower_bound_curve.csv",
               ["eta", "k", "n_cells", "eps", "log_packing"],
               [[repr(pt.eta), str(pt.k), str(pt.n_cells), repr(pt.eps),
                 repr(pt.log_packing)] for pt in curve])

    if system.n_cells > CELL_CAP:
        print(f"{system.n_cells} cells exceeds the {CELL_CAP}-cell cap; "
              "wrote system, cap report, and curve only")
        return 0 if report.ok else 1

    family = build_packing_family(eta, args.dim, seed=args.seed,
                                  max_samples=args.max_samples)
    _write_json(out / "family.json", family.to_json())
    cert = packing_certificate(family, grid_n=args.grid_n, tol=args.tol)
    _write_json(out / "packing_certificate.json", cert.to_json())
    print(f"family of {len(family.functions)} functions on {system.n_cells} "
          f"cells; certificate ok={cert.ok}, cap report ok={report.ok}")
    return 0 if (cert.ok and report.ok) else 1


def cmd_schedule(args) -> int:
    out = _out_dir(args)
    if args.log2_eta is not None:
        log_eta = args.log2_eta * LOG2
    else:
        log_eta = math.log(float(_parse_eta(args.eta)))
    sched = build_schedule(args.p, log_eta)
    _write_json(out / "schedule.json", sched.to_json())

    rows = []
    for m in range(1, sched.depth + 2):
        level = repr(sched.log_levels[m - 1])
        weight = repr(sched.log_weights[m - 1]) if m <= sched.depth else ""
        radius = repr(sched.log_radii[m - 1]) if m <= sched.depth else ""
        rows.append([str(m), level, weight, radius])
    _write_csv(out / "schedule.csv",
               ["m", "log_level", "log_weight", "log_radius"], rows)

    checks = schedule_checks(sched, dims=tuple(args.dims))
    _write_json(out / "schedule_checks.json", checks.to_json())
    acct = cover_accounting(sched, args.dim, args.gamma_sum, args.scale)
    _write_json(out / "cover_accounting.json", acct.to_json())
    print(f"depth {sched.depth} schedule; checks ok={checks.ok}; "
          f"log cover count <= {acct.entropy_bound:.6g}")
    return 0 if checks.ok else 1


def cmd_lemmas(args) -> int:
    out = _out_dir(args)
    grid = GridSpec(args.grid_n)
    reports = []
    all_ok = True
    for i in range(args.pairs):
        f = make_random_convex(args.dim, args.bound, args.pieces,
                               args.seed + 2 * i)
        g = make_random_convex(args.dim, args.bound, args.pieces,
                               args.seed + 2 * i + 1)
        sup_rep = check_sup_bound(f, g, 1.0, n_directions=args.directions,
                                  grid=grid)
        l1_rep = check_l1_bound(f, g, n_directions=args.directions, grid=grid)
        masses = [gradient_mass(h, args.rho) for h in (f, g)]
        mass_cap = 8.0 * args.dim
        mass_ok = all(mv <= mass_cap for mv in masses)
        all_ok = all_ok and sup_rep.ok and l1_rep.ok and mass_ok
        reports.append({"pair": i, "sup": sup_rep.to_json(),
                        "l1": l1_rep.to_json(),
                        "slope_masses": [repr(mv) for mv in masses],
                        "slope_mass_cap": repr(mass_cap),
                        "slope_mass_ok": mass_ok})
    _write_json(out / "lemma_reports.json",
                {"dim": args.dim, "pairs": args.pairs, "seed": args.seed,
                 "bound": repr(args.bound), "all_ok": all_ok,
                 "reports": reports})
    print(f"{args.pairs} pairs at d={args.dim}: all_ok={all_ok}")
    return 0 if all_ok else 1


def cmd_bounds(args) -> int:
    out = _out_dir(args)
    d = args.dim
    rect = Rect((args.origin,) * d, (args.origin + args.side,) * d)
    gammas = LipschitzVector(tuple(args.gamma)) if args.gamma else None
    eb = entropy_bounds(args.eps, args.p, rect, args.bound, gammas,
                        args.scale)
    _write_json(out / "entropy_bounds.json", eb.to_json())

    def show(v, missing="out of range"):
        return missing if v is None else f"{v:.6g}"

    lip_missing = "n/a" if gammas is None else "out of range"
    print(f"eps={args.eps:g} p={args.p:g} d={d}: "
          f"log upper {show(eb.log_upper)}, log lower {show(eb.log_lower)}, "
          f"sup-distance upper {show(eb.log_lipschitz_upper, lip_missing)}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convexcover",
        description="Separated families, cover schedules, and distance "
                    "checks for bounded convex functions on a cube.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pack", help="build a separated family and certify it")
    p.add_argument("--eta", required=True,
                   help="separation level, e.g. 0.01 or 1/400 (parsed exactly)")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-samples", type=int, default=10**6,
                   help="sample budget for the code search")
    p.add_argument("--cap-samples", type=int, default=2000,
                   help="exact-rational property checks to run")
    p.add_argument("--grid-n", type=int, default=None,
                   help="certificate quadrature nodes per axis")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--curve-steps", type=int, default=5)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_pack)

    s = sub.add_parser("schedule", help="build and check a refinement schedule")
    s.add_argument("--p", type=float, required=True)
    level = s.add_mutually_exclusive_group(required=True)
    level.add_argument("--eta", help="target level, parsed exactly")
    level.add_argument("--log2-eta", type=float,
                       help="log2 of the target level, e.g. -96")
    s.add_argument("--dim", type=int, default=1,
                   help="dimension for the cover accounting")
    s.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3],
                   help="dimensions for the radius power-sum checks")
    s.add_argument("--gamma-sum", type=float, default=0.0)
    s.add_argument("--scale", type=float, default=1.0)
    s.add_argument("--out-dir", default=".")
    s.set_defaults(func=cmd_schedule)

    le = sub.add_parser("lemmas", help="distance-vs-Hausdorff checks on "
                                       "random pairs")
    le.add_argument("--dim", type=int, required=True)
    le.add_argument("--pairs", type=int, default=3)
    le.add_argument("--pieces", type=int, default=6)
    le.add_argument("--seed", type=int, default=0)
    le.add_argument("--bound", type=float, default=0.9,
                    help="value bound for the random pairs; keep below 1 "
                         "so off-grid dips stay inside the lemma's range")
    le.add_argument("--rho", type=float, default=0.05)
    le.add_argument("--grid-n", type=int, default=201)
    le.add_argument("--directions", type=int, default=1000)
    le.add_argument("--out-dir", default=".")
    le.set_defaults(func=cmd_lemmas)

    b = sub.add_parser("bounds", help="cover and packing bounds for one query")
    b.add_argument("--eps", type=float, required=True)
    b.add_argument("--p", type=float, required=True)
    b.add_argument("--dim", type=int, required=True)
    b.add_argument("--side", type=float, default=1.0)
    b.add_argument("--origin", type=float, default=0.0)
    b.add_argument("--bound", type=float, default=1.0)
    b.add_argument("--gamma", type=float, action="append",
                   help="per-axis slope budget; repeat once per axis")
    b.add_argument("--scale", type=float, default=1.0)
    b.add_argument("--out-dir", default=".")
    b.set_defaults(func=cmd_bounds)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
