"""The f-matching search: grow a forest of tight edges from the free
vertices, contract blossoms, adjust duals, and stop at an augmenting trail
of maximum incremental weight (a shortest augmenting trail) or at a
certificate that none exists.

Duals are held lazily: every vertex carries a base value, the dual offset it
was last touched at, and a rate in {-1, 0, +1}; blossom z-values grow at rate
2 while their node is a maximal part of the structure.  Threshold events
(an edge going tight) sit in a heap keyed by the dual offset at which they
fire, revalidated lazily on pop.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import os
from dataclasses import dataclass, field

from .blossom import (ATOM, SUB, Blossom, BlossomForest, DualState,
                      StructuredMatching, _p_trail, validate_structured)
from .graph import DegreeBound, Matching, MatchingError, Multigraph, Trail
from .levels import track_trail


class SearchInvariantError(AssertionError):
    """An internal invariant of the search broke (a bug, not bad input)."""


@dataclass
class SearchOutcome:
    """Result of one search: the structured matching at the end, and either
    a shortest augmenting trail or the certificate that none exists."""

    structured: StructuredMatching
    trail: Trail | None
    sat_length: int | None
    dual_offset: int
    free_deficiency: dict
    edge_subset: "frozenset[int] | None"
    trace: "list | None" = None

    @property
    def found(self) -> bool:
        return self.trail is not None


class _Node:
    __slots__ = ("nid", "kind", "io", "vertex", "blossom_id", "vertices",
                 "parent", "parent_edge", "children", "alive")

    def __init__(self, nid, kind, io, vertex=None, blossom_id=None,
                 vertices=None):
        self.nid = nid
        self.kind = kind          # "atom" | "blossom"
        self.io = io              # "outer" | "inner"
        self.vertex = vertex
        self.blossom_id = blossom_id
        self.vertices = vertices if vertices is not None else (
            {vertex} if vertex is not None else set())
        self.parent: _Node | None = None
        self.parent_edge: int | None = None
        self.children: list[_Node] = []
        self.alive = True

    def root(self) -> "_Node":
        node = self
        while node.parent is not None:
            node = node.parent
        return node


class SearchState:
    """One search over a (possibly restricted) graph and matching.

    ``edge_subset`` limits the edges the search may use; ``deficiency_override``
    replaces the deficiency map (both used by the blocking-set extraction).
    """

    def __init__(self, graph: Multigraph, bounds: DegreeBound,
                 matching: Matching, edge_subset=None,
                 deficiency_override=None, trace: bool = False):
        if matching.graph is not graph:
            raise MatchingError("matching belongs to a different graph")
        self.graph = graph
        self.bounds = bounds
        self.matching = matching
        self.enabled = (None if edge_subset is None
                        else frozenset(edge_subset))
        self.n = graph.vertex_count
        self.m = graph.edge_count
        self.cutoff = min(self.n, self.m)
        self.def_map = {
            v: (deficiency_override[v] if deficiency_override is not None
                else matching.deficiency(v))
            for v in range(self.n)
        }
        self.incident = graph.incidence()
        self.matched = [e in matching for e in range(self.m)]

        self.offset = 0  # L = -y(free)
        self._y_base = [0] * self.n
        self._y_snap = [0] * self.n
        self._y_rate = [0] * self.n
        self._z_base: dict[int, int] = {}
        self._z_snap: dict[int, int] = {}
        self._z_live: dict[int, bool] = {}

        self.node_of: list[_Node | None] = [None] * self.n
        self.forest = BlossomForest()
        self._next_node_id = 0
        self._next_blossom_id = 0
        self.heap: list[tuple[int, int]] = []
        self.result: Trail | None = None
        self.trace: list | None = [] if trace else None
        self.debug = os.environ.get("FMATCH_DEBUG_ASSERT") == "1"
        self.finished = False

        for v in range(self.n):
            if self.def_map[v] > 0:
                self._make_atom(v, "outer", parent=None, parent_edge=None)
        for v in range(self.n):
            if self.node_of[v] is not None:
                self._push_vertex(v)

    # -- duals ------------------------------------------------------------

    def y_of(self, v: int) -> int:
        return self._y_base[v] + self._y_rate[v] * (self.offset - self._y_snap[v])

    def _set_rate(self, v: int, rate: int) -> None:
        self._y_base[v] = self.y_of(v)
        self._y_snap[v] = self.offset
        self._y_rate[v] = rate

    def z_of(self, bid: int) -> int:
        base = self._z_base.get(bid, 0)
        if self._z_live.get(bid):
            return base + 2 * (self.offset - self._z_snap[bid])
        return base

    def _freeze_z(self, bid: int) -> None:
        self._z_base[bid] = self.z_of(bid)
        self._z_live[bid] = False

    def yz_hat(self, e: int) -> int:
        u, v = self.graph.endpoints(e)
        total = self.y_of(u) + self.y_of(v)
        if u == v:
            for bid in self.forest.chain_of_vertex(u):
                total += self.z_of(bid)
            return total
        chain_u = set(self.forest.chain_of_vertex(u))
        chain_v = set(self.forest.chain_of_vertex(v))
        for bid in chain_u | chain_v:
            if bid in chain_u and bid in chain_v:
                total += self.z_of(bid)
            elif self.matched[e] != (self.forest[bid].base_edge == e):
                total += self.z_of(bid)
        return total

    # -- event heap -------------------------------------------------------

    def _contribution(self, x: int, node: "_Node | None", e: int) -> int:
        if node is None:
            return 0
        if node.kind == "atom":
            return -1 if node.io == "outer" else 1
        rec = self.forest[node.blossom_id]
        in_incident = self.matched[e] != (rec.base_edge == e)
        return -1 + (2 if in_incident else 0)

    def _fire_at(self, e: int) -> int | None:
        """Dual offset at which edge e forces an event, or None."""
        if self.enabled is not None and e not in self.enabled:
            return None
        u, v = self.graph.endpoints(e)
        nu, nv = self.node_of[u], self.node_of[v]
        if nu is None and nv is None:
            return None
        if nu is nv:
            if nu.kind == "blossom":
                return None  # interior edge, frozen tight
            rate = 2 * self._contribution(u, nu, e)
        else:
            rate = self._contribution(u, nu, e) + self._contribution(v, nv, e)
        if self.matched[e]:
            if rate <= 0:
                return None
            slack = 2 - self.yz_hat(e)
        else:
            if rate >= 0:
                return None
            slack = self.yz_hat(e)
        if slack < 0:
            raise SearchInvariantError(f"edge {e}: negative slack {slack}")
        if slack % abs(rate):
            raise SearchInvariantError(f"edge {e}: slack {slack} not "
                                       f"divisible by rate {rate}")
        return self.offset + slack // abs(rate)

    def _push_edge(self, e: int) -> None:
        fire = self._fire_at(e)
        if fire is not None:
            heapq.heappush(self.heap, (fire, e))

    def _push_vertex(self, v: int) -> None:
        for e in self.incident[v]:
            self._push_edge(e)

    # -- nodes ------------------------------------------------------------

    def _make_atom(self, v: int, io: str, parent, parent_edge) -> _Node:
        node = _Node(self._next_node_id, "atom", io, vertex=v)
        self._next_node_id += 1
        node.parent = parent
        node.parent_edge = parent_edge
        if parent is not None:
            parent.children.append(node)
        self.node_of[v] = node
        self._set_rate(v, -1 if io == "outer" else 1)
        return node

    # -- steps ------------------------------------------------------------

    def grow_step(self, e: int) -> None:
        """Add the fresh endpoint of a tight edge to the structure."""
        u, v = self.graph.endpoints(e)
        if self.node_of[u] is None:
            u, v = v, u
        if self.node_of[u] is None or self.node_of[v] is not None:
            raise SearchInvariantError(f"edge {e} is not a grow edge")
        io = "outer" if self.matched[e] else "inner"
        self._make_atom(v, io, parent=self.node_of[u], parent_edge=e)
        self._push_vertex(v)
        self._trace("grow", e)
        self._debug_validate()

    def blossom_step(self, e: int) -> None:
        """Contract the closed trail closed by a tight bridge edge."""
        u, v = self.graph.endpoints(e)
        nu, nv = self.node_of[u], self.node_of[v]
        if nu is None or nv is None:
            raise SearchInvariantError(f"edge {e} is not inside the structure")
        if nu is nv:
            if nu.kind != "atom" or u != v:
                raise SearchInvariantError(f"edge {e} is interior to a node")
            cycle = [nu]
            cycle_edges = [e]
        else:
            chain_u = self._chain(nu)
            chain_v = self._chain(nv)
            in_v = {id(x) for x in chain_v}
            iu = next(i for i, x in enumerate(chain_u) if id(x) in in_v)
            lca = chain_u[iu]
            iv = next(i for i, x in enumerate(chain_v) if x is lca)
            upath = chain_u[:iu]
            vpath = chain_v[:iv]
            cycle = [lca] + list(reversed(upath)) + vpath
            cycle_edges = ([x.parent_edge for x in reversed(upath)]
                           + [e] + [x.parent_edge for x in vpath])
        lca = cycle[0]
        rec_nodes = tuple((ATOM, x.vertex) if x.kind == "atom"
                          else (SUB, x.blossom_id) for x in cycle)
        if lca.kind == "atom":
            heavy = self.matched[cycle_edges[0]]
            base_vertex = lca.vertex
        else:
            rec = self.forest[lca.blossom_id]
            heavy = rec.heavy
            base_vertex = rec.base_vertex
        bid = self._next_blossom_id
        self._next_blossom_id += 1
        record = Blossom(bid, heavy, base_vertex, lca.parent_edge,
                         rec_nodes, tuple(cycle_edges))
        self.forest.add(record)

        vertices: set[int] = set()
        for x in cycle:
            vertices |= x.vertices
        node = _Node(self._next_node_id, "blossom", lca.io,
                     blossom_id=bid, vertices=vertices)
        self._next_node_id += 1
        node.parent = lca.parent
        node.parent_edge = lca.parent_edge
        if lca.parent is not None:
            lca.parent.children[lca.parent.children.index(lca)] = node
        cycle_set = {id(x) for x in cycle}
        for x in cycle:
            x.alive = False
            for child in x.children:
                if id(child) not in cycle_set:
                    child.parent = node
                    node.children.append(child)
            if x.kind == "blossom":
                self._freeze_z(x.blossom_id)
        self._z_base[bid] = 0
        self._z_snap[bid] = self.offset
        self._z_live[bid] = True
        former_atoms = [x.vertex for x in cycle if x.kind == "atom"]
        for x in cycle:
            for w in sorted(x.vertices):
                self.node_of[w] = node
        for w in sorted(former_atoms):
            self._set_rate(w, -1)
            self._push_vertex(w)
        self._trace("blossom", e)
        self._debug_validate()

    def expand_step(self, node: _Node) -> None:
        """Replace a blossom node whose dual is 0 by the relevant part of
        its closed trail.

        Supported for nodes with at most one child arc (the configuration
        the operation is defined for); the constituents off the retained
        trail segment leave the structure.
        """
        if node.kind != "blossom" or not node.alive:
            raise SearchInvariantError("expand needs a live blossom node")
        if self.z_of(node.blossom_id) != 0:
            raise SearchInvariantError("expand needs a zero dual")
        if len(node.children) > 1:
            raise SearchInvariantError(
                "expand with several child arcs is not supported")
        rec = self.forest[node.blossom_id]
        k = len(rec.nodes)
        if node.children:
            child = node.children[0]
            jpos = next(j for j in range(k) if self.forest.node_contains(
                rec.nodes[j], self._edge_endpoint_in(child.parent_edge,
                                                     node.vertices)))
        else:
            child = None
            jpos = 0
        keep, arrival = self._expansion_path(rec, jpos, node.parent_edge,
                                             child.parent_edge if child else None)
        node.alive = False
        restored: list[_Node] = []
        parent = node.parent
        if parent is not None:
            parent.children.remove(node)
        for t, pos in enumerate(keep):
            sub = self._restore_node(rec.nodes[pos], arrival[t])
            sub.parent = parent
            sub.parent_edge = arrival[t]
            if parent is not None:
                parent.children.append(sub)
            parent = sub
            restored.append(sub)
        if child is not None:
            child.parent = restored[-1]
            restored[-1].children.append(child)
        kept_vertices: set[int] = set()
        for sub in restored:
            kept_vertices |= sub.vertices
        for w in sorted(node.vertices - kept_vertices):
            self.node_of[w] = None
            self._set_rate(w, 0)
            self._push_vertex(w)
        self.forest.remove(node.blossom_id)
        self._z_base.pop(node.blossom_id, None)
        self._z_live.pop(node.blossom_id, None)
        self._trace("expand", node.blossom_id)

    def _expansion_path(self, rec, jpos, parent_edge, child_edge):
        """Positions of the trail nodes kept by an expansion, base node
        first, and the forest arrival edge of each."""
        k = len(rec.nodes)
        for forward in (True, False):
            positions = [0]
            pos = 0
            while pos != jpos:
                pos = (pos + 1) % k if forward else (pos - 1) % k
                positions.append(pos)
            arrival = [parent_edge]
            ok = True
            for t in range(1, len(positions)):
                prev, here = positions[t - 1], positions[t]
                edge = rec.trail_edges[prev] if forward else \
                    rec.trail_edges[here]
                arrival.append(edge)
            closing = child_edge
            for t, pos in enumerate(positions):
                e_in = arrival[t]
                e_out = arrival[t + 1] if t + 1 < len(positions) else closing
                kind, ref = rec.nodes[pos]
                if kind == ATOM:
                    if e_in is not None and e_out is not None and \
                            self.matched[e_in] == self.matched[e_out]:
                        ok = False
                        break
                else:
                    # a blossom node must rejoin the forest by its base edge
                    eta = self.forest[ref].base_edge
                    if e_in != eta and not (e_in is None and t == 0):
                        ok = False
                        break
            if ok:
                return positions, arrival
        raise SearchInvariantError("no alternating expansion path")

    def _restore_node(self, ref, arrival_edge) -> _Node:
        kind, ident = ref
        if arrival_edge is None:
            io = "outer"
        else:
            io = "outer" if self.matched[arrival_edge] else "inner"
        if kind == ATOM:
            node = _Node(self._next_node_id, "atom", io, vertex=ident)
            self._next_node_id += 1
            self.node_of[ident] = node
            self._set_rate(ident, -1 if io == "outer" else 1)
            self._push_vertex(ident)
            return node
        node = _Node(self._next_node_id, "blossom", io, blossom_id=ident,
                     vertices=self.forest.vertices(ident))
        self._next_node_id += 1
        for w in sorted(node.vertices):
            self.node_of[w] = node
            self._set_rate(w, -1)
            self._push_vertex(w)
        self._z_snap[ident] = self.offset
        self._z_live[ident] = True
        return node

    def _edge_endpoint_in(self, e: int, vertices: set[int]) -> int:
        u, v = self.graph.endpoints(e)
        return u if u in vertices else v

    def dual_adjust(self, units: int = 1) -> None:
        """Lower the free-vertex dual by one unit per call.

        Requires a stalled search (no event fires at the current offset)
        and refuses to run past the point where any augmenting trail is
        already impossible.
        """
        for _ in range(units):
            fire = self._peek_fire()
            if fire == self.offset:
                raise SearchInvariantError(
                    "dual adjustment with an eligible tight edge pending")
            if self.offset + 1 > self.cutoff + 1:
                raise SearchInvariantError(
                    "dual adjustment beyond the augmenting-trail bound")
            self.offset += 1
        self._trace("adjust", None)

    # -- the main loop ------------------------------------------------------

    def _chain(self, node: _Node) -> list[_Node]:
        out = [node]
        while out[-1].parent is not None:
            out.append(out[-1].parent)
        return out

    def _peek_fire(self) -> int | None:
        while self.heap:
            fire, e = self.heap[0]
            actual = self._fire_at(e)
            if actual is None:
                heapq.heappop(self.heap)
                continue
            if actual != fire:
                heapq.heappop(self.heap)
                heapq.heappush(self.heap, (actual, e))
                continue
            return fire
        return None

    def run(self) -> SearchOutcome:
        if self.finished:
            raise SearchInvariantError("search already finished")
        while self.result is None:
            fire = self._peek_fire()
            if fire is None or fire > self.cutoff:
                break
            if fire > self.offset:
                self.offset = fire  # batched unit adjustments
                self._trace("adjust", None)
                continue
            _, e = heapq.heappop(self.heap)
            self._dispatch(e)
        self.finished = True
        return self._outcome()

    def _dispatch(self, e: int) -> None:
        u, v = self.graph.endpoints(e)
        nu, nv = self.node_of[u], self.node_of[v]
        if nu is None or nv is None:
            self.grow_step(e)
            return
        if nu is nv:
            if nu.kind != "atom":
                raise SearchInvariantError(f"interior edge {e} fired")
            # a loop at an atom closes a trail on its own
            if nu.parent is None and self.def_map[u] >= 2:
                self._finish_augment(Trail(u, ((e, u),)))
            else:
                self.blossom_step(e)
            return
        if nu.root() is not nv.root():
            self._augment_bridge(e, u, v)
            return
        chain_u = self._chain(nu)
        in_v = {id(x) for x in self._chain(nv)}
        lca = next(x for x in chain_u if id(x) in in_v)
        if lca.parent is None and lca.kind == "atom" and \
                self.def_map[lca.vertex] >= 2:
            self._augment_bridge(e, u, v)
        else:
            self.blossom_step(e)

    def _trail_to_root(self, x: int, want: bool) -> Trail:
        node = self.node_of[x]
        out = Trail(x)
        while True:
            if node.kind == "atom":
                if node.parent is None:
                    break
                e = node.parent_edge
                if self.matched[e] != want:
                    raise SearchInvariantError(
                        f"alternation broken at atom {x}")
            else:
                inside = _p_trail(x, node.blossom_id, want,
                                  self.forest, self.matching)
                out = out + inside
                x = out.end
                if node.parent is None:
                    return out
                e = node.parent_edge
            head = self.graph.other_end(e, x)
            out = out + Trail(x, ((e, head),))
            x = head
            node = node.parent
            want = not self.matched[e]
        return out

    def _augment_bridge(self, e: int, u: int, v: int) -> None:
        want = self.matched[e]
        left = self._trail_to_root(u, not want).reversed()
        right = self._trail_to_root(v, not want)
        trail = left + Trail(u, ((e, v),)) + right
        self._finish_augment(trail)

    def _finish_augment(self, trail: Trail) -> None:
        from .graph import classify_trail

        self.result = trail
        self._trace("augment", trail.edge_ids())
        structured = self.snapshot()
        if not classify_trail(trail, self.matching).augmenting:
            raise SearchInvariantError("returned trail is not augmenting")
        if trail.length != 1 + 2 * self.offset:
            raise SearchInvariantError(
                f"augmenting trail has length {trail.length}, expected "
                f"{1 + 2 * self.offset}")
        # the returned trail must advance one petalevel per edge
        track_trail(trail, structured, "natural", require_unit_steps=True)

    # -- snapshots ----------------------------------------------------------

    def snapshot(self) -> StructuredMatching:
        duals = DualState(
            y={v: self.y_of(v) for v in range(self.n) if self.y_of(v)},
            z={bid: self.z_of(bid) for bid in self.forest
               if self.z_of(bid) > 0},
            y_free=-self.offset,
        )
        return StructuredMatching(self.graph, self.bounds, self.matching,
                                  self.forest, duals)

    def _outcome(self) -> SearchOutcome:
        trail = self.result
        return SearchOutcome(
            structured=self.snapshot(),
            trail=trail,
            sat_length=trail.length if trail is not None else None,
            dual_offset=self.offset,
            free_deficiency=dict(self.def_map),
            edge_subset=self.enabled,
            trace=self.trace,
        )

    # -- diagnostics ----------------------------------------------------------

    def _trace(self, kind: str, payload) -> None:
        if self.trace is None:
            return
        duals = {"y": [self.y_of(v) for v in range(self.n)],
                 "z": {str(b): self.z_of(b) for b in self.forest}}
        digest = hashlib.sha256(
            json.dumps(duals, sort_keys=True).encode()).hexdigest()[:16]
        self.trace.append({"step": kind, "edge": payload,
                           "offset": self.offset, "duals_hash": digest})

    def _debug_validate(self) -> None:
        if not self.debug:
            return
        bad = validate_structured(self.snapshot(), free_override=self.def_map,
                                  edge_subset=self.enabled)
        if bad:
            raise SearchInvariantError("; ".join(bad))


def f_matching_search(graph: Multigraph, bounds: DegreeBound,
                      matching: Matching, edge_subset=None,
                      deficiency_override=None,
                      trace: bool = False) -> SearchOutcome:
    """Run one full search; see SearchState."""
    state = SearchState(graph, bounds, matching, edge_subset,
                        deficiency_override, trace)
    return state.run()


def grow_step(state: SearchState, e: int) -> SearchState:
    state.grow_step(e)
    return state


def blossom_step(state: SearchState, e: int) -> SearchState:
    state.blossom_step(e)
    return state


def expand_step(state: SearchState, node: _Node) -> SearchState:
    state.expand_step(node)
    return state


def dual_adjust(state: SearchState, units: int = 1) -> SearchState:
    state.dual_adjust(units)
    return state
