"""Multigraphs with degree bounds, matchings, and the alternating-trail calculus.

Vertices are integers 0..n-1, edges are integers 0..m-1 (dense, in order of
appearance).  Loops and parallel edges are allowed everywhere; a loop consumes
two units of a vertex's degree bound.  All iteration is in ascending id order
so that runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class GraphFormatError(ValueError):
    """Malformed graph or matching file."""


class TrailError(ValueError):
    """A trail violates a structural precondition (bad walk, repeated edge, ...)."""


class MatchingError(ValueError):
    """A matching operation would violate a degree bound."""


@dataclass(frozen=True)
class Multigraph:
    """Undirected multigraph.  ``edges[e] = (u, v)``; ``u == v`` is a loop."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for e, (u, v) in enumerate(self.edges):
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise GraphFormatError(
                    f"edge {e} endpoint out of range: ({u}, {v})")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def endpoints(self, e: int) -> tuple[int, int]:
        return self.edges[e]

    def is_loop(self, e: int) -> bool:
        u, v = self.edges[e]
        return u == v

    def other_end(self, e: int, x: int) -> int:
        u, v = self.edges[e]
        if x == u:
            return v
        if x == v:
            return u
        raise ValueError(f"vertex {x} not an endpoint of edge {e}")

    def incidence(self) -> list[list[int]]:
        """Per-vertex lists of incident edge ids (a loop appears once)."""
        inc: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for e, (u, v) in enumerate(self.edges):
            inc[u].append(e)
            if v != u:
                inc[v].append(e)
        return inc


@dataclass(frozen=True)
class DegreeBound:
    """Per-vertex degree bounds.  ``f[v] == 0`` vertices can never be matched."""

    f: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(x < 0 for x in self.f):
            raise GraphFormatError("degree bounds must be non-negative")

    @property
    def f_total(self) -> int:
        return sum(self.f)

    def __getitem__(self, v: int) -> int:
        return self.f[v]


class Matching:
    """An f-matching: a set of edge ids with per-vertex degree accounting.

    The only mutable type in the package; mutation is single-writer.  A loop
    contributes 2 to the degree of its vertex.
    """

    __slots__ = ("graph", "bounds", "members", "degree")

    def __init__(self, graph: Multigraph, bounds: DegreeBound,
                 members: "set[int] | frozenset[int] | list[int] | tuple[int, ...]" = ()):
        if len(bounds.f) != graph.vertex_count:
            raise MatchingError("degree bounds do not match the graph")
        self.graph = graph
        self.bounds = bounds
        self.members: set[int] = set()
        self.degree: list[int] = [0] * graph.vertex_count
        for e in sorted(members):
            self.add(e)

    def __contains__(self, e: int) -> bool:
        return e in self.members

    def __len__(self) -> int:
        return len(self.members)

    @property
    def cardinality(self) -> int:
        return len(self.members)

    def add(self, e: int) -> None:
        if e in self.members:
            raise MatchingError(f"edge {e} already matched")
        u, v = self.graph.endpoints(e)
        self.members.add(e)
        self.degree[u] += 1
        self.degree[v] += 1
        if self.degree[u] > self.bounds[u] or self.degree[v] > self.bounds[v]:
            raise MatchingError(f"adding edge {e} violates a degree bound")

    def remove(self, e: int) -> None:
        if e not in self.members:
            raise MatchingError(f"edge {e} not matched")
        u, v = self.graph.endpoints(e)
        self.members.remove(e)
        self.degree[u] -= 1
        self.degree[v] -= 1

    def deficiency(self, v: int) -> int:
        return self.bounds[v] - self.degree[v]

    def is_free(self, v: int) -> bool:
        return self.deficiency(v) > 0

    def free_vertices(self) -> list[int]:
        return [v for v in range(self.graph.vertex_count) if self.is_free(v)]

    def copy(self) -> "Matching":
        return Matching(self.graph, self.bounds, self.members)

    def __repr__(self) -> str:
        return f"Matching({sorted(self.members)})"


def deficiency(v: int, matching: Matching) -> int:
    """def(v) = f(v) minus the matched degree of v (loops counting twice)."""
    return matching.deficiency(v)


@dataclass(frozen=True)
class Trail:
    """A walk that may repeat vertices but not edges.

    ``steps[k] = (edge_id, head)`` walks its edge towards ``head``; ``start``
    anchors the tail of the first step (and the whole trail when empty).
    """

    start: int
    steps: tuple[tuple[int, int], ...] = ()

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def end(self) -> int:
        return self.steps[-1][1] if self.steps else self.start

    def edge_ids(self) -> list[int]:
        return [e for (e, _) in self.steps]

    def vertices(self) -> list[int]:
        return [self.start] + [head for (_, head) in self.steps]

    def is_closed(self) -> bool:
        return self.length > 0 and self.end == self.start

    def reversed(self) -> "Trail":
        heads = self.vertices()
        steps = tuple((e, heads[k]) for k, (e, _) in
                      reversed(list(enumerate(self.steps))))
        return Trail(self.end, steps)

    def __add__(self, other: "Trail") -> "Trail":
        if other.start != self.end:
            raise TrailError(
                f"cannot join trails: {self.end} != {other.start}")
        return Trail(self.start, self.steps + other.steps)

    def validate_walk(self, graph: Multigraph) -> None:
        """Raise TrailError unless this is a connected walk without edge reuse."""
        seen: set[int] = set()
        at = self.start
        for e, head in self.steps:
            if e in seen:
                raise TrailError(f"edge {e} repeated in trail")
            seen.add(e)
            u, v = graph.endpoints(e)
            if u == v:
                if at != u or head != u:
                    raise TrailError(f"loop {e} not anchored at {u}")
            else:
                if {at, head} != {u, v}:
                    raise TrailError(
                        f"step ({e}, {head}) does not continue from {at}")
            at = head


@dataclass(frozen=True)
class TrailClassification:
    alternating: bool
    closed: bool
    augmenting: bool


def edge_weight(e: int, matching: Matching) -> int:
    """Weight 2 for matched edges, 0 for unmatched ones."""
    return 2 if e in matching else 0


def is_alternating(trail: Trail, matching: Matching) -> bool:
    ids = trail.edge_ids()
    return all((ids[k] in matching) != (ids[k + 1] in matching)
               for k in range(len(ids) - 1))


def incremental_weight(trail: Trail, matching: Matching) -> int:
    """Weight of the unmatched part minus weight of the matched part of a trail.

    Matched edges weigh 2 and unmatched ones 0, so this is -2 per matched
    trail edge.  For an alternating trail starting with an unmatched edge at
    a free vertex, ``len == -weight + (len mod 2)``.
    """
    trail.validate_walk(matching.graph)
    if not is_alternating(trail, matching):
        raise TrailError("incremental weight requires an alternating trail")
    return -2 * sum(1 for e in trail.edge_ids() if e in matching)


def classify_trail(trail: Trail, matching: Matching) -> TrailClassification:
    """Flags for a trail: alternation, closedness, and augmenting-ness.

    Augmenting means: alternating, first and last edges unmatched, both ends
    free, and rematching stays within the degree bounds (a closed trail at
    its single endpoint needs deficiency at least 2 there).
    """
    trail.validate_walk(matching.graph)
    alternating = is_alternating(trail, matching)
    closed = trail.is_closed()
    augmenting = False
    if alternating and trail.length > 0:
        first, last = trail.steps[0][0], trail.steps[-1][0]
        ends_unmatched = first not in matching and last not in matching
        if ends_unmatched:
            if closed:
                augmenting = matching.deficiency(trail.start) >= 2
            else:
                augmenting = (matching.deficiency(trail.start) >= 1
                              and matching.deficiency(trail.end) >= 1)
    return TrailClassification(alternating, closed, augmenting)


def augment(matching: Matching, trail: Trail) -> Matching:
    """Return the matching rematched along an augmenting trail.

    Cardinality grows by exactly 1 (augmenting trails are odd).
    """
    flags = classify_trail(trail, matching)
    if not flags.augmenting:
        raise MatchingError("trail is not augmenting for this matching")
    result = matching.copy()
    for e in trail.edge_ids():
        if e in result:
            result.remove(e)
    for e in trail.edge_ids():
        if e not in result.members and e not in matching:
            result.add(e)
    assert result.cardinality == matching.cardinality + 1
    return result


# ---------------------------------------------------------------------------
# file formats
#
# Graph file (line oriented):
#   p fgraph <n> <m>
#   f <v> <k>          (optional; default bound is 1)
#   e <u> <v>          (m times; edge id = order of appearance)
#   # comment
# Matching file: one edge id per line.
# ---------------------------------------------------------------------------

def parse_graph(text: str) -> tuple[Multigraph, DegreeBound]:
    n = -1
    m = -1
    edges: list[tuple[int, int]] = []
    f: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] != "fgraph":
                    raise ValueError
                n, m = int(parts[2]), int(parts[3])
            elif parts[0] == "f":
                if len(parts) != 3:
                    raise ValueError
                f[int(parts[1])] = int(parts[2])
            elif parts[0] == "e":
                if len(parts) != 3:
                    raise ValueError
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise ValueError
        except ValueError:
            raise GraphFormatError(f"line {lineno}: cannot parse {raw!r}")
    if n < 0:
        raise GraphFormatError("missing 'p fgraph <n> <m>' line")
    if len(edges) != m:
        raise GraphFormatError(f"expected {m} edges, found {len(edges)}")
    for v, k in f.items():
        if not 0 <= v < n:
            raise GraphFormatError(f"f-line vertex {v} out of range")
        if k < 0:
            raise GraphFormatError(f"f({v}) must be non-negative")
    graph = Multigraph(n, tuple(edges))
    bounds = DegreeBound(tuple(f.get(v, 1) for v in range(n)))
    return graph, bounds


def write_graph(graph: Multigraph, bounds: DegreeBound) -> str:
    lines = [f"p fgraph {graph.vertex_count} {graph.edge_count}"]
    lines += [f"f {v} {bounds[v]}" for v in range(graph.vertex_count)
              if bounds[v] != 1]
    lines += [f"e {u} {v}" for (u, v) in graph.edges]
    return "\n".join(lines) + "\n"


def parse_matching(text: str, graph: Multigraph,
                   bounds: DegreeBound) -> Matching:
    members = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            e = int(line)
        except ValueError:
            raise GraphFormatError(f"line {lineno}: bad edge id {raw!r}")
        if not 0 <= e < graph.edge_count:
            raise GraphFormatError(f"line {lineno}: edge id {e} out of range")
        members.append(e)
    return Matching(graph, bounds, members)


def write_matching(matching: Matching) -> str:
    return "".join(f"{e}\n" for e in sorted(matching.members))
