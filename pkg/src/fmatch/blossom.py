"""Nested blossoms, base edges, P-trails, dual variables, structured matchings.

A blossom is stored as the closed trail that defines it: a cyclic list of
child nodes (atoms or sub-blossom ids) and the connecting edges.  ``nodes[0]``
is the node the trail starts and ends at; ``trail_edges[k]`` joins
``nodes[k]`` to ``nodes[(k+1) % len]``.  A blossom whose base vertex is free
carries no real base edge (``base_edge is None`` stands for the artificial
matched edge from the reserved vertex to the base).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .graph import DegreeBound, Matching, Multigraph, Trail, TrailError


class BlossomStructureError(ValueError):
    """A blossom record is internally inconsistent (dangling child, bad trail)."""


# child references in a closed trail
ATOM = "v"
SUB = "b"


@dataclass(frozen=True)
class Blossom:
    id: int
    heavy: bool                       # M-type: heavy = matched, light = unmatched
    base_vertex: int
    base_edge: int | None             # None = artificial edge (free blossom)
    nodes: tuple[tuple[str, int], ...]
    trail_edges: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.trail_edges):
            raise BlossomStructureError(
                f"blossom {self.id}: trail has {len(self.nodes)} nodes but "
                f"{len(self.trail_edges)} edges")

    @property
    def light(self) -> bool:
        return not self.heavy

    @property
    def alpha(self) -> tuple[str, int]:
        return self.nodes[0]


class BlossomForest:
    """All blossoms of a structured matching, maximal and nested alike."""

    def __init__(self, blossoms: "dict[int, Blossom] | None" = None):
        self.blossoms: dict[int, Blossom] = dict(blossoms or {})
        self._parent: dict[int, int] = {}
        self._vertex_innermost: dict[int, int] = {}
        self._rebuild()

    def _rebuild(self) -> None:
        self._parent.clear()
        self._vertex_innermost.clear()
        for b in self.blossoms.values():
            for kind, ref in b.nodes:
                if kind == SUB:
                    if ref not in self.blossoms:
                        raise BlossomStructureError(
                            f"blossom {b.id} references missing child {ref}")
                    self._parent[ref] = b.id
        for b in self.blossoms.values():
            for kind, ref in b.nodes:
                if kind == ATOM:
                    prev = self._vertex_innermost.get(ref)
                    # the innermost blossom containing an atom is the one
                    # listing it directly at the deepest nesting level
                    if prev is None or self.depth(b.id) > self.depth(prev):
                        self._vertex_innermost[ref] = b.id

    def add(self, blossom: Blossom) -> None:
        self.blossoms[blossom.id] = blossom
        for kind, ref in blossom.nodes:
            if kind == SUB:
                self._parent[ref] = blossom.id
            else:
                self._vertex_innermost[ref] = blossom.id

    def remove(self, bid: int) -> None:
        """Drop a maximal blossom, re-exposing its constituents."""
        if bid in self._parent:
            raise BlossomStructureError(f"blossom {bid} is nested")
        del self.blossoms[bid]
        self._rebuild()

    def __contains__(self, bid: int) -> bool:
        return bid in self.blossoms

    def __getitem__(self, bid: int) -> Blossom:
        return self.blossoms[bid]

    def __iter__(self):
        return iter(sorted(self.blossoms))

    def __len__(self) -> int:
        return len(self.blossoms)

    def parent(self, bid: int) -> int | None:
        return self._parent.get(bid)

    def depth(self, bid: int) -> int:
        d = 0
        p = self._parent.get(bid)
        while p is not None:
            d += 1
            p = self._parent.get(p)
        return d

    def maximal_ids(self) -> list[int]:
        return sorted(b for b in self.blossoms if b not in self._parent)

    def chain_of_vertex(self, v: int) -> list[int]:
        """Blossom ids containing vertex v, innermost first."""
        bid = self._vertex_innermost.get(v)
        chain = []
        while bid is not None:
            chain.append(bid)
            bid = self._parent.get(bid)
        return chain

    def contains_vertex(self, bid: int, v: int) -> bool:
        return bid in self.chain_of_vertex(v)

    def vertices(self, bid: int) -> set[int]:
        out: set[int] = set()
        stack = [bid]
        while stack:
            b = self.blossoms[stack.pop()]
            for kind, ref in b.nodes:
                if kind == ATOM:
                    out.add(ref)
                else:
                    stack.append(ref)
        return out

    def edges(self, bid: int) -> set[int]:
        """E(B): the trail edges of B and of all nested sub-blossoms."""
        out: set[int] = set()
        stack = [bid]
        while stack:
            b = self.blossoms[stack.pop()]
            out.update(b.trail_edges)
            for kind, ref in b.nodes:
                if kind == SUB:
                    stack.append(ref)
        return out

    def node_contains(self, node: tuple[str, int], v: int) -> bool:
        kind, ref = node
        return v == ref if kind == ATOM else v in self.vertices(ref)

    def node_base(self, node: tuple[str, int]) -> int:
        kind, ref = node
        return ref if kind == ATOM else self.blossoms[ref].base_vertex


@dataclass
class DualState:
    """LP duals: per-vertex y, per-blossom even z, shared free-vertex value."""

    y: dict[int, int] = field(default_factory=dict)
    z: dict[int, int] = field(default_factory=dict)
    y_free: int = 0

    @property
    def dual_offset(self) -> int:
        """L = -y(free): the number of dual adjustments behind the duals."""
        return -self.y_free

    def y_of(self, v: int) -> int:
        return self.y.get(v, 0)

    def z_of(self, bid: int) -> int:
        return self.z.get(bid, 0)


@dataclass
class StructuredMatching:
    """A matching with blossoms and duals, as maintained by the search."""

    graph: Multigraph
    bounds: DegreeBound
    matching: Matching
    blossoms: BlossomForest
    duals: DualState

    def positive_blossom_ids(self) -> list[int]:
        return sorted(b for b, zb in self.duals.z.items() if zb > 0)


class EdgeStatus(Enum):
    TIGHT = "tight"
    STRICTLY_DOMINATED = "strictly_dominated"
    STRICTLY_UNDERRATED = "strictly_underrated"
    INFEASIBLE = "infeasible"


def yz_hat(e: int, s: StructuredMatching) -> int:
    """Dual value of an edge: y at the endpoints plus z of every blossom that
    contains the edge or counts it among its incident matched edges.

    A blossom B contributes z(B) when both endpoints are inside B, or when
    exactly one is and the edge is a matched boundary edge other than the
    base edge (or the unmatched base edge itself).  Loops count y twice.
    """
    u, v = s.graph.endpoints(e)
    matched = e in s.matching
    total = s.duals.y_of(u) + s.duals.y_of(v)
    if u == v:
        for bid in s.blossoms.chain_of_vertex(u):
            total += s.duals.z_of(bid)
        return total
    chain_u = set(s.blossoms.chain_of_vertex(u))
    chain_v = set(s.blossoms.chain_of_vertex(v))
    for bid in chain_u | chain_v:
        if bid in chain_u and bid in chain_v:
            total += s.duals.z_of(bid)
        elif matched != (s.blossoms[bid].base_edge == e):
            total += s.duals.z_of(bid)
    return total


def classify_edge(e: int, s: StructuredMatching) -> EdgeStatus:
    value = yz_hat(e, s)
    if e in s.matching:
        if value > 2:
            return EdgeStatus.INFEASIBLE
        return EdgeStatus.TIGHT if value == 2 else EdgeStatus.STRICTLY_UNDERRATED
    if value < 0:
        return EdgeStatus.INFEASIBLE
    return EdgeStatus.TIGHT if value == 0 else EdgeStatus.STRICTLY_DOMINATED


# ---------------------------------------------------------------------------
# P-trails
# ---------------------------------------------------------------------------

def p_trail(v: int, bid: int, parity: int, forest: BlossomForest,
            matching: Matching) -> Trail:
    """The alternating trail from v to the base of blossom ``bid``.

    The trail stays inside E(B) and ends with an edge of B's M-type; with
    parity 1 it also starts with B's M-type, with parity 0 the opposite.
    The only empty trail is parity 0 at the base itself.
    """
    if parity not in (0, 1):
        raise ValueError("parity must be 0 or 1")
    b = forest[bid]
    want = b.heavy if parity == 1 else not b.heavy
    return _p_trail(v, bid, want, forest, matching)


def _p_trail(v: int, bid: int, want: bool, forest: BlossomForest,
             matching: Matching) -> Trail:
    """P-trail by required first-edge M-type (``want`` true = matched)."""
    b = forest[bid]
    graph = matching.graph
    mu = b.heavy
    if v == b.base_vertex and want != mu:
        return Trail(v)
    k = len(b.nodes)

    def mtype(e: int) -> bool:
        return e in matching

    def endpoint_in(e: int, node: tuple[str, int]) -> int:
        eu, ev = graph.endpoints(e)
        if forest.node_contains(node, eu):
            return eu
        if forest.node_contains(node, ev):
            return ev
        raise BlossomStructureError(
            f"blossom {bid}: edge {e} does not touch node {node}")

    def through(node: tuple[str, int], e_in: int, x_in: int,
                e_out: int) -> Trail:
        """Connect an entering edge to a leaving edge across a trail node."""
        kind, ref = node
        if kind == ATOM:
            if mtype(e_in) == mtype(e_out):
                raise BlossomStructureError(
                    f"blossom {bid}: no alternation at atom {ref}")
            return Trail(ref)
        sub = forest[ref]
        x_out = endpoint_in(e_out, node)
        if e_out == sub.base_edge:
            return _p_trail(x_in, ref, not mtype(e_in), forest, matching)
        if e_in == sub.base_edge:
            return _p_trail(x_out, ref, not mtype(e_out),
                            forest, matching).reversed()
        raise BlossomStructureError(
            f"blossom {bid}: sub-blossom {ref} crossed off its base edge")

    def cycle_walk(j: int, forward: bool, at: int) -> Trail:
        """Walk the closed trail from node j to node 0, entering at vertex
        ``at`` of node j's successor along the chosen direction."""
        trail = Trail(at)
        pos = (j + 1) % k if forward else (j - 1) % k
        e_prev = b.trail_edges[j] if forward else b.trail_edges[j - 1]
        while pos != 0:
            e_next = b.trail_edges[pos] if forward else b.trail_edges[pos - 1]
            inner = through(b.nodes[pos], e_prev, at, e_next)
            trail = trail + inner
            nxt = (pos + 1) % k if forward else (pos - 1) % k
            head = endpoint_in(e_next, b.nodes[nxt])
            trail = trail + Trail(trail.end, ((e_next, head),))
            at = head
            e_prev = e_next
            pos = nxt
        kind, ref = b.nodes[0]
        if kind == ATOM:
            return trail
        return trail + _p_trail(at, ref, not mtype(e_prev), forest, matching)

    # origin inside the trail's start/end node: stay inside (or run the
    # whole closed trail when the base is an atom)
    if forest.node_contains(b.nodes[0], v):
        kind, ref = b.nodes[0]
        if kind == SUB:
            return _p_trail(v, ref, want, forest, matching)
        if want != mtype(b.trail_edges[0]):
            raise BlossomStructureError(
                f"blossom {bid}: no trail of the requested parity at {v}")
        if k == 1:
            u0, v0 = graph.endpoints(b.trail_edges[0])
            if u0 != v0:
                raise BlossomStructureError(
                    f"blossom {bid}: single-edge trail must be a loop")
            return Trail(v, ((b.trail_edges[0], v),))
        head = endpoint_in(b.trail_edges[0], b.nodes[1])
        return Trail(v, ((b.trail_edges[0], head),)) + cycle_walk(0, True, head)

    failure: BlossomStructureError | None = None
    for j in range(1, k):
        node = b.nodes[j]
        if not forest.node_contains(node, v):
            continue
        for forward in (False, True):
            e_exit = b.trail_edges[j] if forward else b.trail_edges[j - 1]
            kind, ref = node
            try:
                if kind == ATOM:
                    if mtype(e_exit) != want:
                        continue
                    inside = Trail(v)
                else:
                    sub = forest[ref]
                    if e_exit == sub.base_edge:
                        inside = _p_trail(v, ref, want, forest, matching)
                    elif v == sub.base_vertex:
                        x = endpoint_in(e_exit, node)
                        inside = _p_trail(x, ref, not mtype(e_exit),
                                          forest, matching).reversed()
                        first = (inside.steps[0][0] if inside.steps
                                 else e_exit)
                        if mtype(first) != want:
                            continue
                    else:
                        continue
                nxt = (j + 1) % k if forward else (j - 1) % k
                head = endpoint_in(e_exit, b.nodes[nxt])
                trail = inside + Trail(inside.end, ((e_exit, head),))
                return trail + cycle_walk(j, forward, head)
            except BlossomStructureError as exc:
                failure = exc
                continue
    raise failure or BlossomStructureError(
        f"blossom {bid}: vertex {v} has no trail of the requested parity")


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate_blossom(bid: int, forest: BlossomForest, matching: Matching,
                     def_of=None) -> list[str]:
    """Check one blossom record against the recursive definition.

    Returns a list of violated clauses (empty = valid).  Child structures
    are assumed to have been validated first.  ``def_of`` overrides the
    deficiency map (restricted searches).
    """
    graph = matching.graph
    b = forest[bid]
    bad: list[str] = []
    k = len(b.nodes)
    if k == 0:
        return [f"blossom {bid}: empty closed trail"]
    if def_of is None:
        def_of = matching.deficiency

    def mtype(e: int) -> bool:
        return e in matching

    # the closed trail is connected
    for j in range(k):
        e = b.trail_edges[j]
        u, v = graph.endpoints(e)
        here, there = b.nodes[j], b.nodes[(j + 1) % k]
        if u == v:
            ok = (here == there == (ATOM, u)) or \
                (k == 1 and forest.node_contains(here, u))
        else:
            ok = ((forest.node_contains(here, u) and forest.node_contains(there, v))
                  or (forest.node_contains(here, v) and forest.node_contains(there, u)))
        if not ok:
            bad.append(f"blossom {bid}: trail edge {e} does not join "
                       f"nodes {j} and {(j + 1) % k}")
            return bad

    alpha_kind, alpha_ref = b.nodes[0]
    if alpha_kind == ATOM:
        first, last = b.trail_edges[0], b.trail_edges[-1]
        if k > 1 and mtype(first) != mtype(last):
            bad.append(f"blossom {bid}: start and end edges at the atomic "
                       f"base differ in M-type")
        if mtype(first) != b.heavy:
            bad.append(f"blossom {bid}: M-type does not match its trail")
        if b.base_vertex != alpha_ref:
            bad.append(f"blossom {bid}: base vertex is not the trail anchor")
    else:
        sub = forest[alpha_ref]
        if b.heavy != sub.heavy:
            bad.append(f"blossom {bid}: M-type differs from its anchor blossom")
        if b.base_vertex != sub.base_vertex:
            bad.append(f"blossom {bid}: base vertex differs from its anchor")
        if b.base_edge != sub.base_edge:
            bad.append(f"blossom {bid}: base edge differs from its anchor")

    # alternation at atoms; degree and base-edge conditions at sub-blossoms
    incidences: dict[tuple[str, int], list[int]] = {}
    for j in range(k):
        here = b.nodes[j]
        incidences.setdefault(here, []).append(j)
    for j in range(1, k):
        kind, ref = b.nodes[j]
        e_in, e_out = b.trail_edges[j - 1], b.trail_edges[j]
        if kind == ATOM:
            if mtype(e_in) == mtype(e_out):
                bad.append(f"blossom {bid}: consecutive edges at atom {ref} "
                           f"do not alternate")
        else:
            if len(incidences[b.nodes[j]]) != 1:
                bad.append(f"blossom {bid}: sub-blossom {ref} visited twice")
                continue
            sub = forest[ref]
            eta = sub.base_edge
            if eta not in (e_in, e_out):
                bad.append(f"blossom {bid}: sub-blossom {ref} has neither "
                           f"trail edge as its base edge")
            else:
                if mtype(eta) == sub.heavy:
                    bad.append(f"blossom {bid}: base edge of {ref} has its "
                               f"own M-type")
                eu, ev = graph.endpoints(eta)
                if sub.base_vertex not in (eu, ev):
                    bad.append(f"blossom {bid}: base edge of {ref} misses "
                               f"its base vertex")

    if b.base_edge is None:
        if b.heavy:
            bad.append(f"blossom {bid}: free blossom must be light")
        if def_of(b.base_vertex) != 1:
            bad.append(f"blossom {bid}: free blossom base must have "
                       f"deficiency 1")
    else:
        eu, ev = graph.endpoints(b.base_edge)
        if b.base_vertex not in (eu, ev):
            bad.append(f"blossom {bid}: base edge misses the base vertex")
        if b.base_edge in forest.edges(bid):
            bad.append(f"blossom {bid}: base edge lies inside the blossom")
        if mtype(b.base_edge) == b.heavy:
            bad.append(f"blossom {bid}: base edge has the blossom's own M-type")
    return bad


def validate_structured(s: StructuredMatching,
                        free_override: "dict[int, int] | None" = None,
                        edge_subset: "set[int] | None" = None) -> list[str]:
    """All structured-matching conditions; returns the violations found.

    Checks edge feasibility (domination/underrating), tightness of positive
    blossom subgraphs and their base edges, equal y on free vertices, even
    non-negative z, and structural validity of every blossom.
    ``free_override`` replaces the deficiency map (used by restricted
    searches); ``edge_subset`` restricts the feasibility scan.
    """
    bad: list[str] = []
    edges = (range(s.graph.edge_count) if edge_subset is None
             else sorted(edge_subset))
    for e in edges:
        status = classify_edge(e, s)
        if status is EdgeStatus.INFEASIBLE:
            kind = "matched" if e in s.matching else "unmatched"
            bad.append(f"edge {e}: {kind} edge infeasible (yz={yz_hat(e, s)})")
    for bid, zb in sorted(s.duals.z.items()):
        if zb < 0 or zb % 2:
            bad.append(f"blossom {bid}: z = {zb} must be even and >= 0")
        if zb > 0:
            for e in sorted(s.blossoms.edges(bid)):
                if classify_edge(e, s) is not EdgeStatus.TIGHT:
                    bad.append(f"blossom {bid}: interior edge {e} not tight")
            eta = s.blossoms[bid].base_edge
            if eta is not None and classify_edge(eta, s) is not EdgeStatus.TIGHT:
                bad.append(f"blossom {bid}: base edge {eta} not tight")
    if free_override is None:
        free = [v for v in range(s.graph.vertex_count)
                if s.matching.is_free(v)]
        def_of = None
    else:
        free = [v for v, d in sorted(free_override.items()) if d > 0]
        def_of = lambda v: free_override.get(v, 0)  # noqa: E731
    for v in free:
        if s.duals.y_of(v) != s.duals.y_free:
            bad.append(f"free vertex {v}: y = {s.duals.y_of(v)} "
                       f"!= y_free = {s.duals.y_free}")
    for bid in s.blossoms:
        bad.extend(validate_blossom(bid, s.blossoms, s.matching, def_of))
    return bad


# ---------------------------------------------------------------------------
# serialization (trace CLI)
# ---------------------------------------------------------------------------

def forest_to_json(forest: BlossomForest, duals: DualState) -> str:
    payload = [
        {
            "id": b.id,
            "heavy": b.heavy,
            "base_vertex": b.base_vertex,
            "base_edge": b.base_edge,
            "nodes": [list(nd) for nd in b.nodes],
            "trail_edges": list(b.trail_edges),
            "z": duals.z_of(b.id),
        }
        for b in (forest[bid] for bid in forest)
    ]
    return json.dumps(payload, indent=2)


def forest_from_json(text: str) -> tuple[BlossomForest, dict[int, int]]:
    payload = json.loads(text)
    forest = BlossomForest()
    z: dict[int, int] = {}
    for item in payload:
        forest.add(Blossom(
            id=item["id"],
            heavy=item["heavy"],
            base_vertex=item["base_vertex"],
            base_edge=item["base_edge"],
            nodes=tuple((kind, ref) for kind, ref in item["nodes"]),
            trail_edges=tuple(item["trail_edges"]),
        ))
        if item["z"]:
            z[item["id"]] = item["z"]
    return forest, z
