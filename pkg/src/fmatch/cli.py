"""Command-line surface: solve, oracle, verify, gen-eg, trace, bench.

Exit status is nonzero whenever an invariant check or oracle comparison
fails, so the commands double as a test harness.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
from dataclasses import dataclass

from . import eg, levels, oracles, phases
from .graph import (DegreeBound, GraphFormatError, Matching, Multigraph,
                    parse_graph, parse_matching, write_graph, write_matching)
from .search import f_matching_search


@dataclass(frozen=True)
class RandomParams:
    n: int
    m: int
    f_min: int = 1
    f_max: int = 1
    simple: bool = False
    bipartite: bool = False
    loops: bool = False


def random_instance(params: RandomParams,
                    seed: int) -> tuple[Multigraph, DegreeBound]:
    """Reproducible random instance; the seed fully determines the output."""
    rng = random.Random((seed, params.n, params.m, params.f_min,
                         params.f_max, params.simple, params.bipartite,
                         params.loops))
    n = params.n
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    half = max(1, n // 2)
    attempts = 0
    while len(edges) < params.m and attempts < 50 * params.m + 100:
        attempts += 1
        if params.bipartite:
            u = rng.randrange(0, half)
            v = rng.randrange(half, n) if n > half else u
            if n <= half:
                break
        elif params.loops and rng.random() < 0.1:
            u = v = rng.randrange(n)
        else:
            u = rng.randrange(n)
            v = rng.randrange(n)
            if u == v:
                continue
        key = (min(u, v), max(u, v))
        if params.simple and (key in seen or u == v):
            continue
        seen.add(key)
        edges.append((u, v))
    bounds = DegreeBound(tuple(rng.randint(params.f_min, params.f_max)
                               for _ in range(n)))
    return Multigraph(n, tuple(edges)), bounds


def _read_graph(path: str) -> tuple[Multigraph, DegreeBound]:
    with open(path, encoding="utf-8") as handle:
        return parse_graph(handle.read())


def _cmd_solve(args) -> int:
    graph, bounds = _read_graph(args.file)
    initial = None
    if args.initial:
        with open(args.initial, encoding="utf-8") as handle:
            initial = parse_matching(handle.read(), graph, bounds)
    observations: list = []
    matching, stats = phases.solve_max_f_matching(
        graph, bounds, initial, on_phase=observations.append)
    simple = len({(min(u, v), max(u, v)) for (u, v) in graph.edges}) \
        == graph.edge_count and not any(u == v for (u, v) in graph.edges)
    mono = oracles.check_sat_monotonicity(stats.sat_lengths)
    bounds_ok = oracles.bound_check(stats.sat_lengths, graph.vertex_count,
                                    bounds.f_total, simple)
    violations = list(mono.violations) + list(bounds_ok.violations)
    certificate = None
    if args.certify and stats.final_outcome is not None:
        report = phases.certify(graph, bounds, matching, stats.final_outcome,
                                cross_check=graph.edge_count <= 24)
        certificate = {"valid": report.valid,
                       "violations": list(report.violations),
                       "brute_force_agrees": report.brute_force_agrees}
        violations += list(report.violations)
    if args.matching:
        with open(args.matching, "w", encoding="utf-8") as handle:
            handle.write(write_matching(matching))
    if args.trace_search:
        traces = []
        current = initial.copy() if initial is not None \
            else Matching(graph, bounds)
        for obs in observations:
            traced = f_matching_search(graph, bounds, obs.matching_before,
                                       trace=True)
            traces.append(traced.trace)
            current = None  # phases already recorded; traces aligned by index
        with open(args.trace_search, "w", encoding="utf-8") as handle:
            json.dump(traces, handle, indent=2)
    payload = stats.as_dict()
    payload["cardinality"] = matching.cardinality
    payload["checks"] = {"sat_monotonicity": mono.passed,
                         "phase_bounds": bounds_ok.passed,
                         "violations": violations}
    if certificate is not None:
        payload["certificate"] = certificate
    if args.stats:
        with open(args.stats, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2)
    print(f"cardinality {matching.cardinality} in {stats.phase_count} "
          f"phases, sat lengths {stats.sat_lengths}")
    return 1 if violations else 0


def _cmd_oracle(args) -> int:
    graph, bounds = _read_graph(args.file)
    if args.method == "brute":
        result = oracles.brute_force_max_f_matching(graph, bounds)
    else:
        result = oracles.bipartite_flow_oracle(graph, bounds)
    print(f"{result.method} maximum cardinality: {result.max_cardinality}")
    return 0


def _cmd_verify(args) -> int:
    graph, bounds = _read_graph(args.file)
    try:
        with open(args.matching, encoding="utf-8") as handle:
            matching = parse_matching(handle.read(), graph, bounds)
    except (GraphFormatError, Exception) as exc:  # noqa: BLE001
        print(f"infeasible: {exc}")
        return 1
    print(f"feasible matching with {matching.cardinality} edges")
    return 0


def _cmd_gen_eg(args) -> int:
    inst = eg.generate_eg(args.b)
    with open(args.output, "w", encoding="utf-8") as handle:
        handle.write(write_graph(inst.graph, inst.bounds))
    with open(args.output + ".json", "w", encoding="utf-8") as handle:
        handle.write(eg.instance_to_json(inst))
    print(f"EG({args.b}): {inst.graph.vertex_count} vertices, "
          f"{inst.graph.edge_count} edges -> {args.output}")
    return 0


def _cmd_trace(args) -> int:
    graph, bounds = _read_graph(args.file)
    initial = None
    if args.initial:
        with open(args.initial, encoding="utf-8") as handle:
            initial = parse_matching(handle.read(), graph, bounds)
    phase_payload: list = []

    def observe(obs: phases.PhaseObservation) -> None:
        s = obs.outcome.structured
        lg = levels.build_level_graph(obs.blocking.trails, s)
        layer, nodes, capacity = levels.bottleneck_layer(lg)
        tracked = []
        for trail in obs.blocking.trails:
            steps = levels.track_trail(trail, s, "shortened",
                                       base_entered=lg.base_entered)
            tracked.append([{"edge": st.edge, "head": st.head,
                             "io": st.io.value, "level": st.level}
                            for st in steps])
        phase_payload.append({
            "sat_length": obs.blocking.sat_length,
            "trail_count": len(obs.blocking.trails),
            "level_counts": lg.level_counts(),
            "node_count": lg.node_count,
            "bottleneck": {"layer": layer, "nodes": nodes,
                           "edge_capacity": capacity},
            "tracked": tracked,
        })

    matching, stats = phases.solve_max_f_matching(graph, bounds, initial,
                                                  on_phase=observe)
    with open(args.levels, "w", encoding="utf-8") as handle:
        json.dump({"phases": phase_payload,
                   "cardinality": matching.cardinality}, handle, indent=2)
    print(f"{len(phase_payload)} phases traced -> {args.levels}")
    return 0


def _cmd_bench(args) -> int:
    lo, _, hi = args.n.partition("..")
    n_lo, n_hi = int(lo), int(hi or lo)
    sizes = []
    n = n_lo
    while n <= n_hi:
        sizes.append(n)
        n *= 2
    rows = []
    failures = 0
    for n in sizes:
        for rep in range(args.count):
            params = RandomParams(
                n=n, m=int(args.m_factor * n), f_min=1, f_max=args.f_max,
                simple=args.family == "random-simple",
                bipartite=args.family == "random-bipartite",
                loops=args.family == "random-multi")
            graph, bounds = random_instance(params, args.seed + rep)
            matching, stats = phases.solve_max_f_matching(graph, bounds)
            simple = args.family != "random-multi"
            report = oracles.bound_check(stats.sat_lengths, n,
                                         bounds.f_total, simple)
            mono = oracles.check_sat_monotonicity(stats.sat_lengths)
            if not (report.passed and mono.passed):
                failures += 1
            rows.append({
                "n": n, "m": graph.edge_count,
                "phases": stats.phase_count,
                "bound_4n23": round(4 * n ** (2 / 3), 2),
                "max_s": max(stats.sat_lengths, default=0),
                "cardinality": matching.cardinality,
                "ok": report.passed and mono.passed,
            })
    out = open(args.output, "w", newline="", encoding="utf-8") \
        if args.output else sys.stdout
    writer = csv.DictWriter(out, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    if out is not sys.stdout:
        out.close()
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmatch",
        description="maximum-cardinality f-matching solver and checkers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance")
    p_solve.add_argument("file")
    p_solve.add_argument("--stats", help="write phase stats JSON here")
    p_solve.add_argument("--certify", action="store_true")
    p_solve.add_argument("--matching", help="write the matching here")
    p_solve.add_argument("--initial", help="start from this matching file")
    p_solve.add_argument("--trace-search", dest="trace_search",
                         help="write per-phase search step logs here")
    p_solve.set_defaults(func=_cmd_solve)

    p_oracle = sub.add_parser("oracle", help="independent maximum computation")
    p_oracle.add_argument("file")
    p_oracle.add_argument("--method", choices=["brute", "flow"],
                          default="brute")
    p_oracle.set_defaults(func=_cmd_oracle)

    p_verify = sub.add_parser("verify", help="check a matching file")
    p_verify.add_argument("file")
    p_verify.add_argument("matching")
    p_verify.set_defaults(func=_cmd_verify)

    p_gen = sub.add_parser("gen-eg", help="generate the EG(b) family")
    p_gen.add_argument("b", type=int)
    p_gen.add_argument("-o", "--output", required=True)
    p_gen.set_defaults(func=_cmd_gen_eg)

    p_trace = sub.add_parser("trace", help="level-graph instrumentation")
    p_trace.add_argument("file")
    p_trace.add_argument("--initial", help="start from this matching file")
    p_trace.add_argument("--levels", required=True)
    p_trace.set_defaults(func=_cmd_trace)

    p_bench = sub.add_parser("bench", help="random campaign with bound checks")
    p_bench.add_argument("--family", default="random-simple",
                         choices=["random-simple", "random-multi",
                                  "random-bipartite"])
    p_bench.add_argument("--n", required=True, help="size range lo..hi")
    p_bench.add_argument("--count", type=int, default=1)
    p_bench.add_argument("--m-factor", dest="m_factor", type=float,
                         default=2.0)
    p_bench.add_argument("--f-max", dest="f_max", type=int, default=2)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("-o", "--output")
    p_bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GraphFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
