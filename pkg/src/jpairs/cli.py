"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 flagged result (non-orthogonal
input to ``classify``, a continuum or non-transverse intersection, degenerate
example parameters), 3 verification failure.  Results go to stdout and
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import counts
from .errors import ClusterAmbiguity, JPairsError, NotOrthogonal
from .experiments import MODES, ExperimentConfig, example_r4, run_trials
from .intersection import IntersectionReport, common_invariant_planes
from .structures import (
    PairSignature,
    classify_orthogonal_pair,
    construct_canonical_pair,
    load_pair,
    save_pair,
)

EXIT_OK, EXIT_INPUT, EXIT_FLAGGED, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _angle(t: float) -> str:
    return f"{t:.6g}"


def _read_pair(path):
    try:
        return load_pair(path)
    except (OSError, ValueError, KeyError, TypeError, JPairsError) as exc:
        raise UsageError(f"cannot read pair from {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_sigma(args) -> int:
    if not 0 <= args.kmax <= args.nmax:
        raise UsageError("need 0 <= kmax <= nmax")
    table = counts.sigma_table(args.kmax, args.nmax)
    out = table.render_json() + "\n" if args.format == "json" else table.render_text()
    sys.stdout.write(out)
    return EXIT_OK


def cmd_classify(args) -> int:
    pair = _read_pair(args.pair)
    try:
        sig = classify_orthogonal_pair(pair, args.tol)
    except NotOrthogonal as exc:
        print(f"NotOrthogonal: {exc}", file=sys.stderr)
        return EXIT_FLAGGED
    except ClusterAmbiguity as exc:
        print(f"ClusterAmbiguity: {exc}", file=sys.stderr)
        return EXIT_FLAGGED
    if args.json:
        print(json.dumps(sig.to_dict()))
        return EXIT_OK
    for theta, mult in sig.blocks:
        print(f"theta={_angle(theta)} (mult {mult})")
    print(f"l={sig.l}, s={sig.s}")
    verdict = "same" if sig.same_orientation else "opposite"
    print(f"orientation: {verdict} (s {'even' if sig.s % 2 == 0 else 'odd'})")
    if sig.near_degenerate:
        print("warning: an angle lies close to 0 or pi", file=sys.stderr)
    return EXIT_OK


def cmd_canonical(args) -> int:
    try:
        sig = PairSignature.parse(args.signature)
    except (ValueError, JPairsError) as exc:
        raise UsageError(f"bad signature {args.signature!r}: {exc}") from exc
    pair = construct_canonical_pair(sig)
    if args.out:
        save_pair(pair, args.out)
        print(f"wrote pair of dimension {pair.dim} to {args.out}")
    else:
        print(json.dumps(pair.to_dict(), indent=2))
    return EXIT_OK


def _print_report(rep: IntersectionReport) -> None:
    kind = "same" if rep.same_orientation_pair else "opposite"
    print(f"n={rep.n} k={rep.k} route={rep.mode} pair orientation={kind}")
    if rep.signature is not None:
        print(f"signature: {rep.signature.format()}")
    for c in rep.components:
        what = "point" if c.is_point else f"component of real dimension {c.real_dim}"
        t = ",".join(map(str, c.t)) if c.t else "-"
        print(f"  {what}: t=({t}) l'={c.l_prime} s'={c.s_prime} class={c.orientation_class}")
    for i, p in enumerate(rep.points):
        sign = "n/a" if p.local_sign is None else f"{p.local_sign:+d}"
        state = "transverse" if p.transverse else "not transverse"
        print(f"  plane {i}: {p.relative_orientation}, {state} (gap {p.gap:.3g}), sign {sign}")
    print(f"raw counts (same, opposite): ({rep.raw_count_same}, {rep.raw_count_opposite})")
    print(f"signed counts (same, opposite): ({rep.signed_count_same}, {rep.signed_count_opposite})")
    print(f"expected counts (same, opposite): ({rep.expected_same}, {rep.expected_opposite})")
    exp = counts.expected_signed_counts(rep.same_orientation_pair, rep.n, rep.k)
    print(f"expected signed counts (same, opposite): {exp}")
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)


def cmd_intersect(args) -> int:
    pair = _read_pair(args.pair)
    if not 1 <= args.k <= pair.n:
        raise UsageError(f"need 1 <= k <= {pair.n}")
    try:
        rep = common_invariant_planes(pair, args.k)
    except JPairsError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FLAGGED
    if args.json:
        print(json.dumps(rep.to_dict()))
    else:
        _print_report(rep)
    return EXIT_OK if rep.generic else EXIT_FLAGGED


def cmd_verify(args) -> int:
    try:
        config = ExperimentConfig(args.mode, args.n, args.k, args.trials, args.seed,
                                  cond_bound=args.cond_bound)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rep = run_trials(config)
    print(rep.to_json() if args.json else rep.summary())
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_example_r4(args) -> int:
    if args.a <= 0 or args.b <= 0:
        raise UsageError("a and b must be positive")
    rep = example_r4(args.a, args.b)
    if args.json:
        print(json.dumps(rep.to_dict()))
    else:
        print(rep.describe())
    return EXIT_FLAGGED if rep.degenerate else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jpairs", description="Common invariant planes of pairs of complex structures.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sigma", help="table of generic intersection numbers")
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument("--nmax", type=int, default=15)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_sigma)

    p = sub.add_parser("classify", help="signature of an orthogonal pair")
    p.add_argument("--pair", required=True, help="JSON pair file")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("canonical", help="build the canonical pair of a signature")
    p.add_argument("--signature", required=True, help='e.g. "1.0:1;l=1;s=0"')
    p.add_argument("--out", help="output pair file (stdout if omitted)")
    p.set_defaults(func=cmd_canonical)

    p = sub.add_parser("intersect", help="planes stabilised by both structures")
    p.add_argument("--pair", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_intersect)

    p = sub.add_parser("verify", help="randomised verification run")
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cond-bound", type=float, default=50.0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example-r4", help="the diagonal example in R^4")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_example_r4)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
