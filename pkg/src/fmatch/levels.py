"""Ordinary levels, petalevels, entrance sequences, trail tracking, and the
level graph used for the bottleneck-layer analysis.

A vertex reached on a matched edge is outer, on an unmatched edge inner.
The level of an outer vertex is y(v) - y(free); the inner level is
1 - (y(v) + y(free) + z-part).  Which z terms enter depends on the entrance
sequence: per positive blossom containing the vertex, whether the tracked
trail entered it on its base edge ('b') or on a petal ('p').
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .blossom import StructuredMatching
from .graph import Trail, TrailError


class IoType(Enum):
    INNER = "i"
    OUTER = "o"

    def flip(self) -> "IoType":
        return IoType.OUTER if self is IoType.INNER else IoType.INNER


def io_of_mtype(matched: bool) -> IoType:
    """The io-type a vertex gets when an edge of this M-type advances into it."""
    return IoType.OUTER if matched else IoType.INNER


BASE = "b"
PETAL = "p"

# an entrance sequence maps positive-blossom id -> BASE | PETAL
EntranceSequence = dict


class TrackingError(AssertionError):
    """A tracked trail violated the petalevel advancement inequality."""


def _positive_containing(s: StructuredMatching, v: int) -> list[int]:
    return [bid for bid in s.blossoms.chain_of_vertex(v)
            if s.duals.z_of(bid) > 0]


def ordinary_level(v: int, io: IoType, s: StructuredMatching) -> int:
    """Level of a vertex when every blossom is entered on its base edge."""
    y, phi = s.duals.y_of(v), s.duals.y_free
    if io is IoType.OUTER:
        return y - phi
    zv = sum(s.duals.z_of(bid) for bid in s.blossoms.chain_of_vertex(v))
    return 1 - (y + phi + zv)


def petalevel(v: int, io: IoType, entrance: EntranceSequence,
              s: StructuredMatching) -> int:
    """Level of a vertex under a given entrance sequence.

    The sequence must assign 'b' or 'p' to every positive blossom containing
    the vertex.  With 'b' everywhere this is the ordinary level.
    """
    positive = _positive_containing(s, v)
    missing = [bid for bid in positive if bid not in entrance]
    if missing:
        raise ValueError(f"entrance sequence misses blossoms {missing}")
    y, phi = s.duals.y_of(v), s.duals.y_free
    if io is IoType.OUTER:
        z_p = sum(s.duals.z_of(b) for b in positive if entrance[b] == PETAL)
        return y - phi + z_p
    z_b = sum(s.duals.z_of(b) for b in positive if entrance[b] == BASE)
    return 1 - (y + phi + z_b)


def entrance_at_start(start: int, s: StructuredMatching,
                      base_entered: "set[int] | None" = None) -> EntranceSequence:
    """Entrance sequence of a trail's first vertex.

    Natural mode: the artificial matched edge into a free vertex enters its
    free blossoms on their base, everything else on a petal.  Shortened mode
    keys the 'b' entries to the whole trail collection instead.
    """
    entrance: EntranceSequence = {}
    for bid in _positive_containing(s, start):
        if base_entered is not None:
            entrance[bid] = BASE if bid in base_entered else PETAL
        else:
            b = s.blossoms[bid]
            is_artificial_base = b.base_edge is None and b.base_vertex == start
            entrance[bid] = BASE if is_artificial_base else PETAL
    return entrance


def entrance_update_natural(entrance_tail: EntranceSequence, edge: int,
                            tail: int, head: int,
                            s: StructuredMatching) -> EntranceSequence:
    """Entrance sequence after advancing tail -> head along an edge.

    Inherited inside a blossom; 'b' when entering on the base edge;
    'p' on any other entry.
    """
    out: EntranceSequence = {}
    for bid in _positive_containing(s, head):
        if s.blossoms.contains_vertex(bid, tail):
            out[bid] = entrance_tail[bid]
        elif edge == s.blossoms[bid].base_edge:
            out[bid] = BASE
        else:
            out[bid] = PETAL
    return out


def entrance_update_shortened(entrance_tail: EntranceSequence, edge: int,
                              tail: int, head: int, s: StructuredMatching,
                              base_entered: set[int]) -> EntranceSequence:
    """Shortened variant: 'b' whenever any trail of the tracked collection
    enters the blossom on its base edge, regardless of this trail's entry."""
    out: EntranceSequence = {}
    for bid in _positive_containing(s, head):
        if s.blossoms.contains_vertex(bid, tail):
            out[bid] = entrance_tail[bid]
        else:
            out[bid] = BASE if bid in base_entered else PETAL
    return out


def compute_base_entered(trails: "list[Trail] | tuple[Trail, ...]",
                         s: StructuredMatching) -> set[int]:
    """Positive blossoms some trail of the collection enters on its base edge.

    A trail starting at a free vertex conceptually arrives there on the
    artificial matched edge, entering the free blossoms based there.
    Well defined because a base edge lies on at most one trail of an
    edge-disjoint collection.
    """
    entered: set[int] = set()
    for trail in trails:
        for bid in _positive_containing(s, trail.start):
            b = s.blossoms[bid]
            if b.base_edge is None and b.base_vertex == trail.start:
                entered.add(bid)
        at = trail.start
        for edge, head in trail.steps:
            for bid in _positive_containing(s, head):
                if (edge == s.blossoms[bid].base_edge
                        and not s.blossoms.contains_vertex(bid, at)):
                    entered.add(bid)
            at = head
    return entered


@dataclass(frozen=True)
class TrackedStep:
    edge: int | None
    head: int
    io: IoType
    entrance: tuple[tuple[int, str], ...]
    level: int

    def entrance_dict(self) -> EntranceSequence:
        return dict(self.entrance)


def track_trail(trail: Trail, s: StructuredMatching, mode: str = "natural",
                base_entered: "set[int] | None" = None,
                require_unit_steps: bool = False) -> list[TrackedStep]:
    """Track a trail through petalevels; one step per edge plus the start.

    Asserts the advancement inequality level <= previous + 1 on every edge
    (it holds for any structured matching); with ``require_unit_steps`` each
    edge must advance by exactly 1 (search-produced shortest trails).
    ``mode`` is "natural" or "shortened"; shortened mode needs the
    ``base_entered`` set of the trail collection under analysis.
    """
    if mode not in ("natural", "shortened"):
        raise ValueError(f"unknown tracking mode {mode!r}")
    if mode == "shortened":
        if base_entered is None:
            raise ValueError("shortened tracking needs base_entered")
    else:
        base_entered = None
    if trail.steps and trail.steps[0][0] in s.matching:
        raise TrailError("tracked trails must start with an unmatched edge")

    entrance = entrance_at_start(trail.start, s, base_entered)
    level = petalevel(trail.start, IoType.OUTER, entrance, s)
    steps = [TrackedStep(None, trail.start, IoType.OUTER,
                         tuple(sorted(entrance.items())), level)]
    at = trail.start
    for edge, head in trail.steps:
        io = io_of_mtype(edge in s.matching)
        if mode == "natural":
            entrance = entrance_update_natural(entrance, edge, at, head, s)
        else:
            entrance = entrance_update_shortened(entrance, edge, at, head, s,
                                                 base_entered)
        new_level = petalevel(head, io, entrance, s)
        if new_level > level + 1:
            raise TrackingError(
                f"edge {edge}: level {new_level} exceeds {level} + 1")
        if require_unit_steps and new_level != level + 1:
            raise TrackingError(
                f"edge {edge}: level {new_level} != {level} + 1")
        steps.append(TrackedStep(edge, head, io,
                                 tuple(sorted(entrance.items())), new_level))
        at = head
        level = new_level
    return steps


def check_advancement(edge: int, tail: int, head: int,
                      entrance_tail: EntranceSequence,
                      entrance_head: EntranceSequence,
                      s: StructuredMatching) -> tuple[bool, int]:
    """Slack of the advancement inequality across one directed edge, and the
    structural equality criterion: the edge is tight and alternates at every
    positive blossom it leaves (left on the base edge, or entered on the base).
    """
    from .blossom import EdgeStatus, classify_edge

    io_head = io_of_mtype(edge in s.matching)
    lhs = petalevel(head, io_head, entrance_head, s)
    rhs = petalevel(tail, io_head.flip(), entrance_tail, s) + 1
    slack = rhs - lhs
    if slack < 0:
        raise TrackingError(f"edge {edge}: negative advancement slack {slack}")
    alternates = True
    for bid in _positive_containing(s, tail):
        if s.blossoms.contains_vertex(bid, head):
            continue
        if entrance_tail.get(bid) != BASE and edge != s.blossoms[bid].base_edge:
            alternates = False
    equality = (classify_edge(edge, s) is EdgeStatus.TIGHT) and alternates
    return equality, slack


def shorten_delta(v: int, io: IoType, entrance: EntranceSequence,
                  shortened: EntranceSequence,
                  s: StructuredMatching) -> int:
    """Petalevel drop when turning petal entries into base entries.

    The two sequences may differ only by p -> b rewrites; the drop is at
    least twice the number of rewritten blossoms.
    """
    delta = 0
    for bid in set(entrance) | set(shortened):
        a, b = entrance.get(bid), shortened.get(bid)
        if a == b:
            continue
        if a == PETAL and b == BASE:
            delta += 1
        else:
            raise ValueError(
                f"blossom {bid}: sequences differ by {a} -> {b}, not p -> b")
    drop = (petalevel(v, io, entrance, s)
            - petalevel(v, io, shortened, s))
    assert drop >= 2 * delta, f"shortening dropped {drop} < {2 * delta}"
    return drop


# ---------------------------------------------------------------------------
# the level graph
# ---------------------------------------------------------------------------

@dataclass
class LevelGraph:
    """Layered graph over at most two petalevels per vertex.

    Nodes are (vertex, io-type) pairs placed at their shortened petalevel;
    layer t holds every edge instance that advances from level t to t+1.
    """

    last_level: int
    node_level: dict  # (vertex, IoType) -> level
    layer_edges: list  # per layer t: set of (edge, tail, head)
    base_entered: set

    @property
    def node_count(self) -> int:
        return len(self.node_level)

    def nodes_at(self, level: int) -> int:
        return sum(1 for lv in self.node_level.values() if lv == level)

    def level_counts(self) -> list[int]:
        counts = [0] * (self.last_level + 1)
        for lv in self.node_level.values():
            counts[lv] += 1
        return counts

    def has_edge(self, level: int, edge: int, tail: int, head: int) -> bool:
        return 0 <= level < len(self.layer_edges) and \
            (edge, tail, head) in self.layer_edges[level]


def build_level_graph(trails, s: StructuredMatching) -> LevelGraph:
    """The level graph of a collection of edge-disjoint augmenting trails.

    Every vertex contributes its two shortened petalevels (when they fall
    inside 0..1+2L); every graph edge joining nodes on consecutive levels is
    present in the corresponding layer.
    """
    trails = list(trails)
    for t in trails:
        t.validate_walk(s.graph)
    used: set[int] = set()
    for t in trails:
        for e in t.edge_ids():
            if e in used:
                raise TrailError("trail collection is not edge-disjoint")
            used.add(e)
    base_entered = compute_base_entered(trails, s)
    last = 1 + 2 * s.duals.dual_offset
    node_level: dict = {}
    for v in range(s.graph.vertex_count):
        entrance = {bid: (BASE if bid in base_entered else PETAL)
                    for bid in _positive_containing(s, v)}
        for io in (IoType.OUTER, IoType.INNER):
            lv = petalevel(v, io, entrance, s)
            if 0 <= lv <= last:
                node_level[(v, io)] = lv
    assert len(node_level) <= 2 * s.graph.vertex_count
    layer_edges: list[set] = [set() for _ in range(last)]
    for e in range(s.graph.edge_count):
        u, v = s.graph.endpoints(e)
        io = io_of_mtype(e in s.matching)
        for tail, head in ((u, v), (v, u)):
            lt = node_level.get((tail, io.flip()))
            lh = node_level.get((head, io))
            if lt is not None and lh == lt + 1:
                layer_edges[lt].add((e, tail, head))
    return LevelGraph(last, node_level, layer_edges, base_entered)


def bottleneck_layer(lg: LevelGraph) -> tuple[int, int, int]:
    """The layer with the fewest incident nodes.

    Returns (layer index, node count over its two levels, product bound on
    the number of edges crossing it).
    """
    counts = lg.level_counts()
    best = None
    for t in range(lg.last_level):
        pair = counts[t] + counts[t + 1]
        if best is None or pair < best[1]:
            best = (t, pair, counts[t] * counts[t + 1])
    if best is None:
        raise ValueError("level graph has no layers")
    return best
