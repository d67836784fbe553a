"""``homotopy-tvoa`` command line.

    homotopy-tvoa run --spec checks.txt --seed 7 --jobs 4 --format json --out report.json
    homotopy-tvoa list-identities
    homotopy-tvoa polytope --pentagon rho=1 eps2=1/10 ...
    homotopy-tvoa explore-boundary --n 5

Without ``--spec`` the bundled default suite is run.  Exit status is 0 iff
every check passes (2 for usage or parse errors).
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources

from .checkspec import CheckSpecError, parse_checkspec, parse_rational
from .dispatch import DISPATCH, VERIFY_IDENTITIES, validate
from .runner import emit_report, run


def default_suite_text() -> str:
    return resources.files("homotopy_tvoa.cli").joinpath("default_suite.checks").read_text("utf-8")


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            text = fh.read()
        source = args.spec
    else:
        text, source = default_suite_text(), "<default suite>"
    try:
        spec = parse_checkspec(text, validate)
    except CheckSpecError as exc:
        print(f"{source}:{exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
        return 2
    report = run(spec, args.seed, args.jobs)
    _write(emit_report(report, args.format), args.out)
    return 0 if report.ok else 1


def cmd_list_identities(args) -> int:
    from ..models import derham

    data = {
        "symbolic": list(VERIFY_IDENTITIES),
        "derham": list(derham.IDENTITIES),
        "bc": ["prop2.1"],
        "operations": sorted(DISPATCH),
    }
    if args.format == "json":
        text = json.dumps(data, indent=2) + "\n"
    else:
        lines = []
        for k, v in data.items():
            lines.append(f"{k}:")
            lines.extend(f"  {x}" for x in v)
        text = "\n".join(lines) + "\n"
    _write(text, args.out)
    return 0


def _bindings(items) -> dict:
    out = {}
    for item in items or []:
        key, _, value = item.partition("=")
        out[key] = parse_rational(value)
    return out


def cmd_polytope(args) -> int:
    from .. import polytopes

    if args.pentagon is not None:
        vals = {"rho": Fraction(1), "alpha2": Fraction(1, 10), "eps2": Fraction(1, 10),
                "alpha1": Fraction(1, 100), "eps1": Fraction(1, 100), "xi": Fraction(1, 100)}
        vals.update(_bindings(args.pentagon))
        try:
            P = polytopes.pentagon_P(polytopes.PentagonParams.from_mapping(vals))
        except polytopes.PolytopeError as exc:
            print(str(exc), file=sys.stderr)
            return 1
    else:
        P = polytopes.kn_domain(args.n, parse_rational(args.rho)).realization
    if args.format == "json":
        area = polytopes.integrate(P)
        text = json.dumps({
            "variables": list(P.variables),
            "inequalities": [{"a": [str(x) for x in a], "b": str(b)} for a, b in P.inequalities],
            "vertices": [[str(x) for x in v] for v in P.vertices()],
            "volume": str(area),
        }, indent=2) + "\n"
    else:
        text = P.to_off()
    _write(text, args.out)
    return 0


def cmd_explore_boundary(args) -> int:
    from ..weakcalc import boundary_expand

    rep = boundary_expand(args.n)
    if args.format == "json":
        text = json.dumps(rep, indent=2, sort_keys=True) + "\n"
    else:
        lines = [f"K_{rep['n']}: {rep['facet_count']} facets, "
                 f"{len(rep['matched'])} matched, {len(rep['unmatched'])} unmatched"
                 + ("" if rep["reference"] else " (no reference terms for this n)")]
        for key, entry in rep["facets"].items():
            flag = "matched" if entry["matched"] else "unmatched"
            lines.append(f"{key} {flag}: {entry['relation_term']}")
            lines.extend(f"    {t}" for t in entry["terms"])
        text = "\n".join(lines) + "\n"
    _write(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    # Subcommands repeat the output flags; SUPPRESS keeps a value given
    # before the subcommand from being reset to the default.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help="write output to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="homotopy-tvoa",
                                     description="Exact checks of homotopy-algebra identities.")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--out", help="write output to this file instead of stdout")
    parser.add_argument("--spec", help="check-spec file (default: bundled suite)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", parents=[common], help="run a check specification")
    p_run.add_argument("--spec", default=argparse.SUPPRESS)
    p_run.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p_run.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    p_run.set_defaults(func=cmd_run)

    p_ids = sub.add_parser("list-identities", parents=[common], help="identities per backend")
    p_ids.set_defaults(func=cmd_list_identities)

    p_poly = sub.add_parser("polytope", parents=[common],
                            help="dump K_n or the pentagon (OFF, or JSON with exact data)")
    p_poly.add_argument("--n", type=int, default=4)
    p_poly.add_argument("--rho", default="1")
    p_poly.add_argument("--pentagon", nargs="*", metavar="KEY=P/Q",
                        help="pentagon parameters (defaults rho=1, alpha2=eps2=1/10, others 1/100)")
    p_poly.set_defaults(func=cmd_polytope)

    p_exp = sub.add_parser("explore-boundary", parents=[common],
                           help="facet-by-facet boundary of the K_n operation")
    p_exp.add_argument("--n", type=int, default=5)
    p_exp.set_defaults(func=cmd_explore_boundary)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        args.func = cmd_run
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
