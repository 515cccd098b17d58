import dotenv
import argparse
import sys

import yaml

EXIT_OK, EXIT_INPUT, EXIT_DEFECT = 0, 1, 2


def _approx(value) -> str:
    return f"{value} (≈{float(value):.3f})"


def _scheme(args):
    from src.utils.schemes import default_scheme, load_presets, scheme_from_strings

    if getattr(args, "preset", None):
        presets, _ = load_presets()
        if args.preset not in presets:
            raise ValueError(f"unknown preset {args.preset!r}, known: {sorted(presets)}")
        return presets[args.preset].scheme
    if args.weights is None and args.p is None:
        return default_scheme()
    default = default_scheme()
    weights = args.weights or f"{default.w_rev},{default.w_trans},{default.w_indel}"
    p = args.p or f"{default.p1},{default.p2}"
    return scheme_from_strings(weights, p)


def _add_scheme_args(parser):
    parser.add_argument("--weights", help="W(reversal),W(transposition),W(indel), e.g. 2,3,2 (default: DEFAULT_WEIGHTS or 2,3,2).")
    parser.add_argument("--p", help="p1,p2 progress coefficients, e.g. 4,1 (default: DEFAULT_P or 4,1).")
    parser.add_argument("--preset", help="Named scheme from the presets file (overrides --weights/--p).")


# --- Subcommands ---

def cmd_dist(args) -> int:
    from src.approx_algorithm import run
    from src.utils.pair_file import read_pair_file

    pair = read_pair_file(args.pairfile)
    weights = _scheme(args)
    report = run(pair, weights)
    print(f"scheme: {weights.label}")
    print(f"weight: {report.total_weight}")
    print(f"factor: {_approx(report.factor) if report.factor is not None else 'unbounded'}")
    print(f"lower_bound: {report.lower_bound}")
    print(f"operations: {len(report.sequence)}")
    for number, op in enumerate(report.sequence, start=1):
        print(f"  {number}. {op.describe()}")
    print(f"final genome equals target: {'yes' if report.final_genome == pair.target else 'no'}")
    return EXIT_OK


def cmd_trace(args) -> int:
    from src.approx_algorithm import run
    from src.utils.pair_file import read_pair_file

    pair = read_pair_file(args.pairfile)
    weights = _scheme(args)
    report = run(pair, weights)
    if args.format == "yaml":
        document = {
            "scheme": weights.label,
            "iterations": [
                {
                    "step": it.step_id,
                    "operations": [op.describe() for op in it.ops],
                    "claimed": list(it.claimed),
                    "measured": list(it.measured),
                    "weight": str(it.weight),
                    "local_ratio": str(it.ratio),
                    "potential": [str(it.potential_before), str(it.potential_after)],
                }
                for it in report.iterations
            ],
            "trailing_deletions": [
                op.describe() for op in report.sequence[len(report.sequence) - report.materialized_deletions:]
            ],
            "total_weight": str(report.total_weight),
            "min_local_ratio": None if report.min_local_ratio is None else str(report.min_local_ratio),
            "virtual_insertions": report.virtual_insertions,
            "materialized_deletions": report.materialized_deletions,
        }
        print(yaml.safe_dump(document, sort_keys=False), end="")
        return EXIT_OK
    for number, it in enumerate(report.iterations, start=1):
        print(
            f"{number:3d}. step {it.step_id:<3} measured {it.measured} claimed {it.claimed} "
            f"weight {it.weight} local ratio {it.ratio} potential {it.potential_before} -> {it.potential_after}"
        )
        for op in it.ops:
            print(f"       {op.describe()}")
    print(f"total weight {report.total_weight}, min local ratio {report.min_local_ratio}")
    print(f"virtual insertions {report.virtual_insertions}, materialized deletions {report.materialized_deletions}")
    return EXIT_OK


def cmd_graph(args) -> int:
    from src.breakpoint_graph import build_graph, measures, to_dot
    from src.utils.pair_file import read_pair_file

    pair = read_pair_file(args.pairfile)
    graph = build_graph(pair)
    if args.dot:
        print(to_dot(graph), end="")
        return EXIT_OK
    m = measures(graph)
    for cycle in graph.cycles:
        print(cycle.describe())
    print(f"c={m.c} c_g={m.c_g} b={m.b} b_g={m.b_g}")
    return EXIT_OK


def cmd_exact(args) -> int:
    from src.exact_oracle import OracleLimits, exact_distance
    from src.utils.pair_file import read_pair_file

    pair = read_pair_file(args.pairfile)
    weights = _scheme(args)
    limits = OracleLimits.from_env()
    if args.max_states is not None:
        limits = OracleLimits(limits.max_genes, limits.max_nucleotides, args.max_states)
    upper = None
    if args.bound:
        from src.approx_algorithm import run
        upper = run(pair, weights).total_weight
    result = exact_distance(pair, weights, limits, upper_bound=upper, heuristic=not args.no_heuristic)
    print(f"scheme: {weights.label}")
    print(f"exact weight: {result.weight}")
    print(f"states explored: {result.explored}")
    if result.exactness_caveat:
        print("caveat: the nucleotide cap pruned states within the optimal weight")
    for number, op in enumerate(result.witness, start=1):
        print(f"  {number}. {op.describe()}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from src.exact_oracle import OracleLimits
    from src.utils.bench import bench
    from src.utils.instances import load_instance_specs
    from src.utils.schemes import resolve_schemes

    specs = load_instance_specs(args.spec)
    schemes = resolve_schemes(args.schemes)
    limits = OracleLimits.from_env() if args.oracle else None
    report = bench(specs, schemes, limits, output_path=args.output, violations_dir=args.violations_dir)
    if not args.output:
        print(report.to_csv(), end="")
    for summary in report.summaries():
        print(
            f"{summary.scheme}: {summary.rows} rows, max ratio {_approx(summary.max_ratio)}, "
            f"mean ratio {_approx(summary.mean_ratio)}, violations {summary.violations}",
            file=sys.stderr,
        )
    if report.violations:
        for row in report.violations:
            print(f"violation {row.instance} {row.scheme}: {'; '.join(row.violations)}", file=sys.stderr)
        if not args.violations_dir:
            # Without a directory the offending pairs go to stderr for replay.
            from src.utils.pair_file import write_pair_file

            for instance, pair in report.violating_pairs():
                print(f"# instance {instance}", file=sys.stderr)
                print(write_pair_file(pair), end="", file=sys.stderr)
        return EXIT_DEFECT
    return EXIT_OK


def cmd_factors(args) -> int:
    from src.approx_algorithm import approximation_factor, delta_max, step_table

    weights = _scheme(args)
    if not args.table:
        print(_approx(approximation_factor(weights)))
        return EXIT_OK
    rows = step_table(weights)
    print(f"scheme: {weights.label}")
    print(f"delta_max: {delta_max(weights)}")
    for step, value, ratio in rows:
        print(f"  step {step:<14} delta {value!s:<8} delta_max/delta {ratio if ratio is not None else 'unbounded'}")
    factor = approximation_factor(weights)
    bottleneck = [step for step, _, ratio in rows if ratio == factor]
    print(f"bottleneck: {', '.join(bottleneck)}")
    print(f"factor: {_approx(factor)}")
    return EXIT_OK


# --- Main Function ---
def build_parser():
    parser = argparse.ArgumentParser(
        description="Weighted genome rearrangement with reversals, transpositions and indels on genomes with intergenic regions."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    dist = sub.add_parser("dist", help="Sort a pair and print the weighted sequence.")
    dist.add_argument("pairfile")
    _add_scheme_args(dist)
    dist.set_defaults(handler=cmd_dist)

    trace = sub.add_parser("trace", help="Print the per-iteration step log.")
    trace.add_argument("pairfile")
    trace.add_argument("--format", choices=("text", "yaml"), default="text")
    _add_scheme_args(trace)
    trace.set_defaults(handler=cmd_trace)

    graph = sub.add_parser("graph", help="Print the breakpoint graph cycles, or DOT with --dot.")
    graph.add_argument("pairfile")
    graph.add_argument("--dot", action="store_true", help="Emit Graphviz DOT.")
    graph.set_defaults(handler=cmd_graph)

    exact = sub.add_parser("exact", help="Exact minimum weight for tiny instances.")
    exact.add_argument("pairfile")
    _add_scheme_args(exact)
    exact.add_argument("--max-states", type=int, help="State budget (default: ORACLE_MAX_STATES or 200000).")
    exact.add_argument("--bound", action="store_true", help="Prune with the approximation algorithm's weight.")
    exact.add_argument("--no-heuristic", action="store_true", help="Plain uniform-cost search.")
    exact.set_defaults(handler=cmd_exact)

    bench = sub.add_parser("bench", help="Benchmark generated instances; CSV report.")
    bench.add_argument("--spec", required=True, help="YAML file listing instance specs.")
    bench.add_argument("--schemes", default="guaranteed", help="';'-separated presets, groups or W,W,W:P,P literals (default: guaranteed).")
    bench.add_argument("--oracle", action="store_true", help="Solve instances within the oracle limits exactly.")
    bench.add_argument("-o", "--output", help="CSV output path (default: standard output).")
    bench.add_argument("--violations-dir", help="Write every violating instance as a pair file here.")
    bench.set_defaults(handler=cmd_bench)

    factors = sub.add_parser("factors", help="Print the approximation factor of a scheme.")
    _add_scheme_args(factors)
    factors.add_argument("--table", action="store_true", help="Print every per-step value and the bottleneck.")
    factors.set_defaults(handler=cmd_factors)

    return parser


def main(argv=None) -> int:
    dotenv.load_dotenv()

    # Import after dotenv loaded so LOG_DIR and the oracle limits apply.
    from src.genome_model import InvalidOperationError
    from src.pocketflow import FlowLimitError
    from src.rearrangement_steps import StepSearchError

    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (StepSearchError, FlowLimitError, InvalidOperationError) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_DEFECT
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
