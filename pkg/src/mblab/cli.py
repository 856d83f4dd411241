"""Command-line front end.

Every verb reads one manifest JSON file plus optional override flags:

  mblab riemann --manifest run.json --tau 5 --u-B 0.8165
  mblab order-test --manifest order.json --levels 60,120,240
  mblab sweep --manifest run.json
  mblab domain-study --manifest run.json --L-values 0.25,0.75,1.25 --times 0.1,1
  mblab eps-sweep --manifest run.json --eps-values 0.005,0.01,0.02
  mblab lemma-audit --manifest run.json --weight-rate 0.5
  mblab bound --manifest run.json --t 0.1

Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys

import pydantic

from . import __version__, bounds, experiments
from .errors import ManifestError, NumericalError
from .flux import FluxModel


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _pairs(text: str) -> list[tuple[float, float]]:
    out = []
    for tok in text.split(","):
        if not tok.strip():
            continue
        tau, u_b = tok.split(":")
        out.append((float(tau), float(u_b)))
    return out


_OVERRIDES = [
    ("--scheme", "scheme", str),
    ("--M", "M", float),
    ("--epsilon", "epsilon", float),
    ("--tau", "tau", float),
    ("--u-B", "u_B", float),
    ("--L", "L", float),
    ("--L0", "L0", float),
    ("--dx", "dx", float),
    ("--lambda", "lambda", float),
    ("--t-final", "t_final", float),
    ("--ic-kind", "ic_kind", str),
    ("--output-dir", "output_dir", str),
]


def _manifest_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--manifest", required=True,
                        help="path to the run-manifest JSON file")
    for flag, key, typ in _OVERRIDES:
        parent.add_argument(flag, dest=f"override_{key}", type=typ,
                            default=None, help=f"override manifest {key}")
    parent.add_argument("--snapshot-times", dest="override_snapshot_times",
                        type=_floats, default=None,
                        help="override snapshot times (comma separated)")
    return parent


def _load(args) -> experiments.RunManifest:
    manifest = experiments.load_manifest(args.manifest)
    data = json.loads(manifest.model_dump_json(by_alias=True))
    for _, key, _typ in _OVERRIDES:
        value = getattr(args, f"override_{key}")
        if value is not None:
            data[key] = value
    if args.override_snapshot_times is not None:
        data["snapshot_times"] = args.override_snapshot_times
    try:
        return experiments.RunManifest(**data)
    except pydantic.ValidationError as exc:
        raise ManifestError(str(exc)) from exc


def _bound_params(args, manifest) -> bounds.BoundParams:
    return bounds.BoundParams(
        lam=args.weight_rate, C_u=manifest.u_B,
        L0=manifest.L0, L=manifest.L, g_sup=manifest.u_B,
        M=manifest.M, epsilon=manifest.epsilon, tau=manifest.tau)


def _cmd_order_test(args) -> int:
    manifest = _load(args)
    rows = experiments.order_table(manifest.scheme, (manifest.tau, manifest.u_B),
                                   args.levels)
    print(f"# scheme={manifest.scheme} tau={manifest.tau:g} u_B={manifest.u_B:g}")
    print(f"{'N':>6} {'L1':>13} {'ord':>8} {'L2':>13} {'ord':>8} "
          f"{'Linf':>13} {'ord':>8}")
    for row in rows:
        cells = [f"{row['N']:>6}"]
        for norm in ("l1", "l2", "linf"):
            order = row[f"order_{norm}"]
            cells.append(f"{row[norm]:>13.4e}")
            cells.append(f"{order:>8.4f}" if order is not None else f"{'-':>8}")
        print(" ".join(cells))
    return 0


def _cmd_riemann(args) -> int:
    manifest = _load(args)
    fields = experiments.run_manifest(manifest)
    report = experiments.classify_profile(fields[-1], manifest,
                                          FluxModel(manifest.M))
    paths = experiments.export(fields, manifest)
    print(f"classification: {report.classification}")
    if report.plateau_value is not None:
        print(f"plateau_value: {report.plateau_value:.6g}")
    print(f"shock_positions: {[round(p, 6) for p in report.shock_positions]}")
    print(f"overshoot: {report.overshoot:.6g}")
    print(f"wrote {paths['csv']} and {paths['manifest']}")
    return 0


def _cmd_sweep(args) -> int:
    manifest = _load(args)
    entries = experiments.bifurcation_sweep(args.pairs, manifest)
    for e in entries:
        if e["error"]:
            print(f"tau={e['tau']:g} u_B={e['u_B']:.4g} -> ERROR {e['error']}")
            continue
        r = e["report"]
        plateau = f" plateau={r.plateau_value:.4g}" if r.plateau_value else ""
        print(f"tau={e['tau']:g} u_B={e['u_B']:.4g} -> {r.classification}"
              f"{plateau} overshoot={r.overshoot:.3g}")
    return 0


def _cmd_domain_study(args) -> int:
    manifest = _load(args)
    study = experiments.domain_study(manifest, args.L_values, args.times)
    print(f"# reference L = {study['L_ref']:g}")
    for e in study["entries"]:
        diffs = ("" if e["sup_diff"] is None else
                 f" sup_diff={e['sup_diff']:.3e} h1_diff={e['h1_diff']:.3e}"
                 f" bound={e['bound']:.3e}")
        sizing = "ok" if e["sizing_ok"] else "VIOLATED"
        print(f"t={e['t']:g} L={e['L']:g} {e['classification']}"
              f" sizing={sizing}{diffs}")
    return 0


def _cmd_eps_sweep(args) -> int:
    manifest = _load(args)
    rows = experiments.epsilon_sweep(manifest, args.eps_values)
    for r in rows:
        plateau = ("-" if r["plateau_value"] is None
                   else f"{r['plateau_value']:.4g}")
        print(f"epsilon={r['epsilon']:g} width={r['width']:.6g} "
              f"plateau={plateau} {r['classification']}")
    return 0


def _cmd_lemma_audit(args) -> int:
    manifest = _load(args)
    p = _bound_params(args, manifest)
    s = p.scale
    xs = args.x if args.x is not None else sorted(
        {0.0, p.L0 / 2.0, p.L0, 2.0 * p.L0, 10.0 * s})
    items = args.items or list(bounds.AUDIT_ITEMS)
    failures = 0
    for item in items:
        for x in xs:
            if item.startswith("L4") and x > p.L:
                continue
            res = bounds.lemma_audit(item, p, x)
            mark = "holds" if res["holds"] else "VIOLATED"
            failures += 0 if res["holds"] else 1
            print(f"{item:>5} x={x:<8g} lhs={res['lhs']:.6e} "
                  f"rhs={res['rhs']:.6e} {mark}")
    print(f"# {failures} violation(s)" if failures else "# all audits hold")
    return 0


def _cmd_bound(args) -> int:
    manifest = _load(args)
    report = bounds.bound_constants(_bound_params(args, manifest), args.t)
    for name in ("a_tau", "b_tau", "c_tau", "E1", "E2",
                 "gamma1", "gamma2", "D1", "D2", "bound"):
        print(f"{name} = {getattr(report, name):.10e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mblab",
        description="Finite-interval solver laboratory for a dispersive "
                    "two-phase flow equation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", required=True)
    parent = _manifest_parent()

    p = sub.add_parser("order-test", parents=[parent],
                       help="self-convergence table on the smooth-ramp setup")
    p.add_argument("--levels", type=_ints, default=[60, 120, 240])
    p.set_defaults(func=_cmd_order_test)

    p = sub.add_parser("riemann", parents=[parent],
                       help="one run: classify the final profile and export")
    p.set_defaults(func=_cmd_riemann)

    p = sub.add_parser("sweep", parents=[parent],
                       help="bifurcation sweep over (tau, u_B) pairs")
    p.add_argument("--pairs", type=_pairs, default=None,
                   help='e.g. "0.2:0.75,5:0.9" (default: built-in set)')
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("domain-study", parents=[parent],
                       help="truncated-domain comparison against the largest L")
    p.add_argument("--L-values", type=_floats, required=True)
    p.add_argument("--times", type=_floats, required=True)
    p.set_defaults(func=_cmd_domain_study)

    p = sub.add_parser("eps-sweep", parents=[parent],
                       help="fixed-grid sweep over epsilon")
    p.add_argument("--eps-values", type=_floats, required=True)
    p.set_defaults(func=_cmd_eps_sweep)

    p = sub.add_parser("lemma-audit", parents=[parent],
                       help="quadrature audit of the kernel/weight bounds")
    p.add_argument("--weight-rate", type=float, default=0.5,
                   help="exponential weight rate in (0,1)")
    p.add_argument("--items", type=lambda s: s.split(","), default=None)
    p.add_argument("--x", type=_floats, default=None)
    p.set_defaults(func=_cmd_lemma_audit)

    p = sub.add_parser("bound", parents=[parent],
                       help="evaluate the truncation-bound constants at time t")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--weight-rate", type=float, default=0.5)
    p.set_defaults(func=_cmd_bound)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ManifestError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, pydantic.ValidationError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
