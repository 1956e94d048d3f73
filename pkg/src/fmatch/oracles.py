"""Independent ground truth: brute force, bipartite flow, and bound checkers."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .graph import DegreeBound, Matching, Multigraph, Trail

BRUTE_FORCE_EDGE_LIMIT = 24


@dataclass(frozen=True)
class OracleResult:
    max_cardinality: int
    witness: tuple[int, ...]
    method: str


class OracleRefusal(ValueError):
    """The oracle does not apply to this instance (too big, wrong shape)."""


def brute_force_max_f_matching(graph: Multigraph, bounds: DegreeBound,
                               limit: int = BRUTE_FORCE_EDGE_LIMIT) -> OracleResult:
    """Exact maximum by branch and bound over edge subsets.

    Guarded to ``m <= limit`` edges; the worst case enumerates 2^m subsets.
    """
    m = graph.edge_count
    if m > limit:
        raise OracleRefusal(f"brute force limited to {limit} edges, got {m}")
    residual = list(bounds.f)
    best_members: list[int] = []
    chosen: list[int] = []

    def extend(e: int) -> None:
        nonlocal best_members
        if len(chosen) + (m - e) <= len(best_members):
            return
        if e == m:
            if len(chosen) > len(best_members):
                best_members = chosen.copy()
            return
        u, v = graph.endpoints(e)
        need = 2 if u == v else 1
        if residual[u] >= need and (u == v or residual[v] >= 1):
            residual[u] -= need
            if u != v:
                residual[v] -= 1
            chosen.append(e)
            extend(e + 1)
            chosen.pop()
            residual[u] += need
            if u != v:
                residual[v] += 1
        extend(e + 1)

    extend(0)
    # sanity: the witness is feasible
    Matching(graph, bounds, best_members)
    return OracleResult(len(best_members), tuple(best_members), "brute")


def two_coloring(graph: Multigraph) -> list[int] | None:
    """A 2-coloring of the vertices, or None if the graph is not bipartite."""
    color = [-1] * graph.vertex_count
    inc = graph.incidence()
    for s in range(graph.vertex_count):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for e in inc[x]:
                y = graph.other_end(e, x)
                if y == x:
                    return None
                if color[y] < 0:
                    color[y] = 1 - color[x]
                    queue.append(y)
                elif color[y] == color[x]:
                    return None
    return color


def bipartite_flow_oracle(graph: Multigraph, bounds: DegreeBound) -> OracleResult:
    """Maximum f-matching cardinality on a bipartite graph via max-flow.

    Source -> left vertices with capacity f, unit capacity per edge,
    right vertices -> sink with capacity f.  BFS augmentation is plenty at
    oracle scale.
    """
    color = two_coloring(graph)
    if color is None:
        raise OracleRefusal("flow oracle requires a loop-free bipartite graph")
    n, m = graph.vertex_count, graph.edge_count
    source, sink = n + m, n + m + 1
    # arcs as (head, capacity) pairs with explicit reverse arcs
    head: list[int] = []
    cap: list[int] = []
    adj: list[list[int]] = [[] for _ in range(n + m + 2)]

    def arc(a: int, b: int, c: int) -> None:
        adj[a].append(len(head)); head.append(b); cap.append(c)
        adj[b].append(len(head)); head.append(a); cap.append(0)

    for v in range(n):
        if color[v] == 0:
            arc(source, v, bounds[v])
        else:
            arc(v, sink, bounds[v])
    for e, (u, v) in enumerate(graph.edges):
        left, right = (u, v) if color[u] == 0 else (v, u)
        arc(left, n + e, 1)
        arc(n + e, right, 1)

    flow = 0
    while True:
        prev_arc = [-1] * (n + m + 2)
        prev_arc[source] = -2
        queue = deque([source])
        while queue and prev_arc[sink] == -1:
            x = queue.popleft()
            for a in adj[x]:
                if cap[a] > 0 and prev_arc[head[a]] == -1:
                    prev_arc[head[a]] = a
                    queue.append(head[a])
        if prev_arc[sink] == -1:
            break
        x = sink
        while x != source:
            a = prev_arc[x]
            cap[a] -= 1
            cap[a ^ 1] += 1
            x = head[a ^ 1]
        flow += 1

    witness = tuple(e for e in range(m)
                    if cap[2 * n + 4 * e] == 0)  # edge arc saturated
    Matching(graph, bounds, witness)
    assert len(witness) == flow
    return OracleResult(flow, witness, "flow")


def symmetric_difference_decompose(
        matching_m: Matching, matching_n: Matching
) -> tuple[list[Trail], list[Trail]]:
    """Split M xor N into alternating trails and circuits.

    Side A holds edges of M-N, side B edges of N-M; walks alternate sides, so
    every returned piece is alternating with respect to both matchings.
    Open trails begin and end at vertices whose M- and N-degrees differ;
    closed pieces (including lone loops) are reported as circuits.
    """
    graph = matching_m.graph
    sides: dict[int, bool] = {}
    for e in matching_m.members - matching_n.members:
        sides[e] = True
    for e in matching_n.members - matching_m.members:
        sides[e] = False
    avail: list[list[int]] = [[] for _ in range(graph.vertex_count)]
    for e in sorted(sides):
        u, v = graph.endpoints(e)
        avail[u].append(e)
        if v != u:
            avail[v].append(e)
    used: set[int] = set()

    def take(v: int, side: bool) -> int | None:
        for e in avail[v]:
            if e not in used and sides[e] == side:
                used.add(e)
                return e
        return None

    def walk(v: int, side: bool) -> Trail:
        steps = []
        want = side
        at = v
        while True:
            e = take(at, want)
            if e is None:
                break
            at = graph.other_end(e, at)
            steps.append((e, at))
            want = not want
        return Trail(v, tuple(steps))

    def surplus(v: int) -> int:
        # A-degree minus B-degree over the edges not yet consumed
        total = 0
        for e in avail[v]:
            if e in used:
                continue
            weight = 2 if graph.is_loop(e) else 1
            total += weight if sides[e] else -weight
        return total

    trails: list[Trail] = []
    circuits: list[Trail] = []
    progress = True
    while progress:
        progress = False
        for v in range(graph.vertex_count):
            s = surplus(v)
            if s != 0:
                t = walk(v, s > 0)
                if t.length:
                    (circuits if t.is_closed() else trails).append(t)
                    progress = True
                    break
    for e in sorted(sides):
        if e in used:
            continue
        u, _ = graph.endpoints(e)
        t = walk(u, sides[e])
        assert t.is_closed()
        circuits.append(t)
    assert len(used) == len(sides)
    return trails, circuits


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.passed


def check_sat_monotonicity(sat_lengths: list[int]) -> CheckReport:
    """Phase sat lengths must be odd and strictly increasing."""
    bad = []
    for k, s in enumerate(sat_lengths):
        if s % 2 == 0:
            bad.append(f"phase {k}: even sat length {s}")
        if k > 0 and s <= sat_lengths[k - 1]:
            bad.append(f"phase {k}: sat length {s} not above {sat_lengths[k-1]}")
        if s < 2 * k + 1:
            bad.append(f"phase {k}: sat length {s} below {2 * k + 1}")
    return CheckReport(not bad, tuple(bad))


def bound_check(sat_lengths: list[int], n: int, f_total: int,
                simple: bool) -> CheckReport:
    """Phase-count and sat-length bounds, checked with exact integer arithmetic.

    phases <= 2*sqrt(f(V)) + 1 always; phases < 4*n^(2/3) on simple graphs;
    every sat length <= 2n.
    """
    bad = []
    phases = len(sat_lengths)
    if phases >= 1 and (phases - 1) ** 2 > 4 * f_total:
        bad.append(f"{phases} phases exceeds 2*sqrt({f_total})+1")
    if simple and phases ** 3 >= 64 * n * n:
        bad.append(f"{phases} phases not below 4*{n}^(2/3)")
    for k, s in enumerate(sat_lengths):
        if s > 2 * n:
            bad.append(f"phase {k}: sat length {s} exceeds 2n = {2 * n}")
    return CheckReport(not bad, tuple(bad))


def residual_augmentation_bound(n: int, s: int) -> int:
    """Cap on how many more augmentations any f-matching can add once the
    sat length is s, on a simple graph: 4*(n/s)^2 rounded down."""
    return (4 * n * n) // (s * s) if s > 0 else math.inf  # type: ignore[return-value]
