"""Command-line surface: solve, generate, bench, aggregate."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .bench import (
    DEFAULT_SHIFT,
    aggregate,
    read_records,
    run_matrix,
    summary_to_csv,
    summary_to_table,
)
from .core import Policy
from .formulations import Encoding
from .io import generate_instance, parse_instance, render_instance
from .solvers import RobustConfig, solve_robust


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _add_config_flags(p: argparse.ArgumentParser, multi: bool) -> None:
    """Config flags; in matrix mode each accepts a comma-separated list."""
    note = " (comma-separated list allowed)" if multi else ""
    p.add_argument("--cycle-len", default="3", help=f"max arcs per cycle{note}")
    p.add_argument("--chain-len", default="3", help=f"max arcs per chain{note}")
    p.add_argument("--budget", default="1", help=f"attack budget{note}")
    p.add_argument("--policy", default="fr", help=f"fr|fse{note}")
    p.add_argument("--formulation", default="cc", help=f"cc|picef{note}")
    p.add_argument("--method", default="cut", help=f"cut|bb|oracle{note}")
    p.add_argument("--lifting", default="on", help=f"on|off{note}")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per solve")
    p.add_argument("--seed", type=int, default=None)


def _flag(raw: str) -> bool:
    if raw not in ("on", "off"):
        raise SystemExit(f"expected on|off, got {raw!r}")
    return raw == "on"


def _configs(args: argparse.Namespace) -> List[RobustConfig]:
    configs = []
    for k in args.cycle_len.split(","):
        for length in args.chain_len.split(","):
            for b in args.budget.split(","):
                for pol in args.policy.split(","):
                    for enc in args.formulation.split(","):
                        for method in args.method.split(","):
                            for lift in args.lifting.split(","):
                                configs.append(
                                    RobustConfig(
                                        max_cycle_len=int(k),
                                        max_chain_len=int(length),
                                        budget=int(b),
                                        policy=Policy(pol),
                                        encoding=Encoding(enc),
                                        subproblem_method=method,
                                        lifting=_flag(lift),
                                        time_limit=args.time_limit,
                                        seed=args.seed,
                                    )
                                )
    return configs


def _cmd_solve(args: argparse.Namespace) -> int:
    graph = parse_instance(_read_text(args.input))
    cfg = _configs(args)[0]
    result = solve_robust(graph, cfg)
    lines = [f"status: {result.status}"]
    if result.status == "optimal":
        lines.append(f"objective: {result.value}")
    from .core import build_pool

    pool = build_pool(graph, cfg.max_cycle_len, cfg.max_chain_len)
    for e in result.initial.exchanges(pool):
        lines.append(f"  {e.kind.value}: {' '.join(str(v) for v in e.vertices)}")
    lines.append(f"worst attack: {sorted(result.worst_attack.attacked)}")
    st = result.stats
    lines.append(
        f"iterations: {st.master_iterations}  attacks: {st.n_attacks}  "
        f"subproblems: {st.n_subproblems}  nodes: {st.bb_nodes}  "
        f"time: {st.time_total:.3f}s"
    )
    _write_text(args.output, "\n".join(lines) + "\n")
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    graph = generate_instance(args.pairs, args.ndds, args.density, args.seed)
    _write_text(args.output, render_instance(graph, args.format))
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    instances = [(path, parse_instance(_read_text(path))) for path in args.input]
    configs = _configs(args)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            run_matrix(instances, configs, fh)
    else:
        run_matrix(instances, configs, sys.stdout)
    return 0


def _cmd_aggregate(args: argparse.Namespace) -> int:
    with open(args.input, "r", encoding="utf-8", newline="") as fh:
        records = read_records(fh)
    rows = aggregate(records, args.shift)
    _write_text(args.output, summary_to_csv(rows))
    if args.output and args.output != "-":
        sys.stdout.write(summary_to_table(rows))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="robustkep",
        description="Robust kidney exchange with recourse against vertex withdrawals",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("--input", required=True, help="instance file, or - for stdin")
    p.add_argument("--output", default=None)
    _add_config_flags(p, multi=False)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("generate", help="generate a random instance")
    p.add_argument("--pairs", type=int, required=True)
    p.add_argument("--ndds", type=int, default=0)
    p.add_argument("--density", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("kep", "json"), default="kep")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("bench", help="run an experiment matrix")
    p.add_argument("--input", nargs="+", required=True, help="instance files")
    p.add_argument("--output", default=None, help="CSV output path")
    _add_config_flags(p, multi=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("aggregate", help="summarize a benchmark CSV")
    p.add_argument("--input", required=True, help="CSV produced by bench")
    p.add_argument("--output", default=None, help="summary CSV path")
    p.add_argument("--shift", type=float, default=DEFAULT_SHIFT)
    p.set_defaults(func=_cmd_aggregate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
