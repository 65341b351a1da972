"""Command-line front end.

Exit codes: 0 success, 1 I/O or configuration error, 2 model not
RC-realizable, 3 search budget exhausted without a feasible realization.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import netgen
from .errors import RCNetError, NotRCRealizable, NoFeasiblePoint, NoStrictlyPositive, TrivialCone
from .linalg import real_diagonalize
from .metzler import SearchConfig
from .pipeline import PipelineOptions, run_pipeline
from .scaling import ScalingOptions, uniqueness_heuristic

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_REALIZABLE = 2
EXIT_INFEASIBLE = 3


def _add_reconstruct_flags(sub):
    sub.add_argument("--model", required=True, help="model JSON path")
    sub.add_argument("--strategy", choices=["chebyshev", "target-identity"],
                     default="target-identity")
    sub.add_argument("--restarts", type=int, default=20)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--relaxed", action="store_true",
                     help="noise-tolerant scaling solve")
    sub.add_argument("--metzler-only", action="store_true",
                     help="stop at the first Metzler realization, skip the 1-norm descent")
    sub.add_argument("--metzler-tol", type=float, default=None)
    sub.add_argument("--prune-tol", type=float, default=None)
    sub.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcnetid",
        description="RC-network realizability check and topology reconstruction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="diagonalizability / realizability gate")
    p_check.add_argument("model", help="model JSON path")

    p_rec = sub.add_parser("reconstruct", help="full reconstruction pipeline")
    _add_reconstruct_flags(p_rec)

    p_gen = sub.add_parser("generate", help="random scrambled RC instance")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--m", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--edge-probability", type=float, default=0.5)
    p_gen.add_argument("--conductance-min", type=int, default=1)
    p_gen.add_argument("--conductance-max", type=int, default=3)
    p_gen.add_argument("--out", default=".", help="output directory")

    p_cmp = sub.add_parser("compare", help="compare true vs reconstructed networks")
    p_cmp.add_argument("truth", help="matrix JSON of the true S")
    p_cmp.add_argument("reconstructed", help="matrix JSON of the reconstructed S")
    p_cmp.add_argument("--weight-tol", type=float, default=1e-6)
    p_cmp.add_argument("--measured", type=int, default=None,
                       help="number of measured nodes (first coordinates)")
    return parser


def cmd_check(args) -> int:
    try:
        model = netgen.load_model(args.model)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: cannot load model: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        diag = real_diagonalize(model.A_hat)
    except NotRCRealizable as exc:
        print(f"not RC-realizable: {exc}")
        return EXIT_NOT_REALIZABLE
    n = diag.n
    n_blocks = len(diag.blocks)
    kind = "distinct" if diag.distinct else f"{n_blocks} blocks of"
    print(f"eigenvalues: {np.array2string(diag.eigenvalues, precision=6)}")
    print(f"{n} {kind} real eigenvalues; diagonalizable: yes")
    print(f"blocks: {[list(b) for b in diag.blocks]}")
    if 1 <= model.p <= n:
        advice = uniqueness_heuristic(n, model.p)
        expect = "expected" if advice.unique_ray_expected else "not expected"
        print(
            f"unique scaling ray {expect} (p = {model.p} vs threshold "
            f"{advice.threshold:.3f}); advisory only"
        )
    print("verdict: realizable-candidate")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    try:
        model = netgen.load_model(args.model)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: cannot load model: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    search = SearchConfig(restarts=args.restarts, rng_seed=args.seed)
    if args.metzler_tol is not None:
        search.metzler_tol = args.metzler_tol
    elif args.relaxed:
        search.metzler_tol = 1e-5
    if args.prune_tol is not None:
        search.prune_tol = args.prune_tol
    options = PipelineOptions(
        strategy=args.strategy.replace("-", "_"),
        relaxed=args.relaxed,
        metzler_only=args.metzler_only,
        search=search,
        scaling=ScalingOptions(rng_seed=args.seed, restarts=max(args.restarts, 1)),
    )
    try:
        result = run_pipeline(model, options)
    except NotRCRealizable as exc:
        print(f"not RC-realizable (diagonalization): {exc}", file=sys.stderr)
        return EXIT_NOT_REALIZABLE
    except (TrivialCone, NoStrictlyPositive) as exc:
        print(f"not RC-realizable (scaling): {exc}", file=sys.stderr)
        return EXIT_NOT_REALIZABLE
    except NoFeasiblePoint as exc:
        print(
            f"scaling residual {exc.residual:.3e} above tolerance; "
            "consider --relaxed", file=sys.stderr,
        )
        return EXIT_INFEASIBLE
    except RCNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    realization = {
        "T": netgen.matrix_to_json(result.realization.T),
        "S": netgen.matrix_to_json(result.realization.S),
        "G": netgen.matrix_to_json(result.realization.G),
        "feasible": result.feasible,
    }
    (out / "realization.json").write_text(
        json.dumps(realization, indent=2, sort_keys=True) + "\n"
    )
    (out / "network.dot").write_text(netgen.emit_dot(result.graph))
    (out / "report.json").write_text(
        json.dumps(result.report, indent=2, sort_keys=True) + "\n"
    )
    if result.feasible:
        print(f"feasible realization written to {out}")
        return EXIT_OK
    print(
        "no Metzler realization within budget "
        f"(best violation {result.realization.metzler_violation:.3e}); "
        f"diagnostics written to {out}",
        file=sys.stderr,
    )
    return EXIT_INFEASIBLE


def cmd_generate(args) -> int:
    if args.conductance_min > args.conductance_max or args.conductance_min < 1:
        print("error: bad conductance range", file=sys.stderr)
        return EXIT_CONFIG
    try:
        instance = netgen.random_rc_instance(
            args.n,
            args.m,
            edge_probability=args.edge_probability,
            conductance_range=(args.conductance_min, args.conductance_max),
            seed=args.seed,
        )
    except (RCNetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    paths = netgen.save_instance(instance, args.out)
    print(f"instance written: {paths['model']}, {paths['truth']}, {paths['dot']}")
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        S_true = netgen.matrix_from_json(json.loads(Path(args.truth).read_text()))
        S_rec = netgen.matrix_from_json(json.loads(Path(args.reconstructed).read_text()))
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: cannot load matrices: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    C = None
    if args.measured is not None:
        C = np.eye(S_true.shape[0])[: args.measured]
    try:
        report = netgen.compare_graphs(
            netgen.graph_from_S(S_true, C),
            netgen.graph_from_S(S_rec, C),
            weight_tol=args.weight_tol,
        )
    except RCNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "check": cmd_check,
        "reconstruct": cmd_reconstruct,
        "generate": cmd_generate,
        "compare": cmd_compare,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
