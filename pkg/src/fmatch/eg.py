"""Generator and verifier for the nested-blossom family EG(b).

EG(b) consists of b nested blossoms strung on a spine, a triangle at the
bottom, an alternating path of length 3b-1, and one cross edge per blossom
base.  Exactly two vertices are deficient; every shortest augmenting trail
has length 4b+1 and uses exactly one cross edge, and tracking the b
expected trails yields a quadratic number of distinct petalevels.

The published picture leaves two degrees of freedom implicit, which the
alternation constraints force: the top base carries the matched cross edge,
so its bound is 2 (deficiency still 1), and the far end of the path needs a
matched pendant edge to a helper vertex to stay saturated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .blossom import ATOM, SUB, Blossom, BlossomForest
from .graph import DegreeBound, Matching, Multigraph, Trail, classify_trail


@dataclass(frozen=True)
class EgInstance:
    b: int
    graph: Multigraph
    bounds: DegreeBound
    initial_edges: tuple[int, ...]
    labels: dict            # name -> vertex id  (p0.., q, beta1.., s_i_j, tri)
    path_edges: tuple[int, ...]
    cross_edges: tuple[int, ...]      # cross_edges[i-1] = e_i
    spine_edges: tuple[int, ...]      # spine_edges[i-2] = (beta_{i-1}, beta_i)
    blossoms: tuple[Blossom, ...]     # B_1 .. B_b, nested

    @property
    def expected_sat_length(self) -> int:
        return 4 * self.b + 1

    def initial_matching(self) -> Matching:
        return Matching(self.graph, self.bounds, self.initial_edges)

    def forest(self) -> BlossomForest:
        return BlossomForest({blm.id: blm for blm in self.blossoms})


def generate_eg(b: int) -> EgInstance:
    """Build EG(b) for even b >= 2."""
    if b < 2 or b % 2:
        raise ValueError("EG(b) needs an even b >= 2")
    labels: dict = {}
    vid = 0

    def new_vertex(name: str) -> int:
        nonlocal vid
        labels[name] = vid
        vid += 1
        return labels[name]

    p = [new_vertex(f"p{k}") for k in range(3 * b)]
    q = new_vertex("q")
    beta = {1: new_vertex("beta1")}
    beta1p = new_vertex("beta1'")
    tri = new_vertex("tri")               # the triangle corner s_{2,4}
    s: dict = {}
    for i in range(2, b + 1):
        beta[i] = new_vertex(f"beta{i}")
        for j in (1, 2, 3):
            s[(i, j)] = new_vertex(f"s{i}{j}")
        s[(i, 4)] = tri if i == 2 else s[(i - 1, 1)]

    edges: list[tuple[int, int]] = []
    matched: list[bool] = []

    def new_edge(u: int, v: int, in_matching: bool) -> int:
        edges.append((u, v))
        matched.append(in_matching)
        return len(edges) - 1

    path_edges = tuple(new_edge(p[k], p[k + 1], k % 2 == 1)
                       for k in range(3 * b - 1))
    new_edge(p[3 * b - 1], q, True)
    tri_e1 = new_edge(beta[1], beta1p, True)
    tri_e2 = new_edge(beta1p, tri, False)
    tri_e3 = new_edge(tri, beta[1], True)
    spine: dict = {}
    sedge: dict = {}
    block: dict = {}
    for i in range(2, b + 1):
        heavy_i = i % 2 == 1               # B_i is heavy for odd i (b even)
        spine[i] = new_edge(beta[i - 1], beta[i], heavy_i)
        sedge[i] = new_edge(beta[i], s[(i, 1)], heavy_i)
        block[(i, 1)] = new_edge(s[(i, 1)], s[(i, 2)], not heavy_i)
        block[(i, 2)] = new_edge(s[(i, 2)], s[(i, 3)], heavy_i)
        block[(i, 3)] = new_edge(s[(i, 3)], s[(i, 4)], not heavy_i)
    cross = tuple(new_edge(beta[i], p[1 + 3 * (b - i)], i % 2 == 0)
                  for i in range(1, b + 1))

    graph = Multigraph(vid, tuple(edges))
    degree = [0] * vid
    initial = tuple(e for e, flag in enumerate(matched) if flag)
    for e in initial:
        u, v = edges[e]
        degree[u] += 1
        degree[v] += 1
    f = list(degree)
    f[p[0]] += 1
    f[beta[b]] += 1
    bounds = DegreeBound(tuple(f))
    if any(x not in (1, 2) for x in f):
        raise AssertionError("EG bounds must all be 1 or 2")

    blossoms = [Blossom(
        id=0, heavy=True, base_vertex=beta[1], base_edge=spine[2],
        nodes=((ATOM, beta[1]), (ATOM, beta1p), (ATOM, tri)),
        trail_edges=(tri_e1, tri_e2, tri_e3),
    )]
    for i in range(2, b + 1):
        blossoms.append(Blossom(
            id=i - 1, heavy=i % 2 == 1, base_vertex=beta[i],
            base_edge=spine[i + 1] if i < b else None,
            nodes=((ATOM, beta[i]), (ATOM, s[(i, 1)]), (ATOM, s[(i, 2)]),
                   (ATOM, s[(i, 3)]), (SUB, i - 2)),
            trail_edges=(sedge[i], block[(i, 1)], block[(i, 2)],
                         block[(i, 3)], spine[i]),
        ))

    inst = EgInstance(
        b=b, graph=graph, bounds=bounds, initial_edges=initial,
        labels=labels, path_edges=path_edges, cross_edges=cross,
        spine_edges=tuple(spine[i] for i in range(2, b + 1)),
        blossoms=tuple(blossoms),
    )
    matching = inst.initial_matching()
    free = matching.free_vertices()
    assert free == sorted([p[0], beta[b]])
    assert all(matching.deficiency(v) == 1 for v in free)
    for i in range(1, b + 1):
        flags = classify_trail(expected_cross_trail(inst, i), matching)
        assert flags.augmenting, f"expected trail {i} is not augmenting"
    return inst


def expected_cross_trail(inst: EgInstance, i: int) -> Trail:
    """The augmenting trail through cross edge i, oriented from the top base
    down through the blossoms, across, and along the path to its end."""
    b = inst.b
    if not 1 <= i <= b:
        raise ValueError(f"cross index {i} out of range")
    lb = inst.labels
    graph = inst.graph
    edge_ix = {}
    for e, (u, v) in enumerate(graph.edges):
        edge_ix[(u, v)] = e
        edge_ix[(v, u)] = e

    def step(u: str, v: str) -> tuple[int, int]:
        return edge_ix[(lb[u], lb[v])], lb[v]

    steps = []
    for j in range(b, i, -1):
        steps.append(step(f"beta{j}", f"beta{j-1}"))
    if i == 1:
        steps.append(step("beta1", "tri"))
    else:
        steps.append(step(f"beta{i}", f"s{i}1"))
        for j in range(i, 1, -1):
            steps.append(step(f"s{j}1", f"s{j}2"))
            steps.append(step(f"s{j}2", f"s{j}3"))
            if j == 2:
                steps.append(step("s23", "tri"))
            else:
                steps.append(step(f"s{j}3", f"s{j-1}1"))
    steps.append(step("tri", "beta1'"))
    steps.append(step("beta1'", "beta1"))
    for j in range(2, i + 1):
        steps.append(step(f"beta{j-1}", f"beta{j}"))
    landing = 1 + 3 * (b - i)
    steps.append((inst.cross_edges[i - 1], lb[f"p{landing}"]))
    for k in range(landing, 0, -1):
        steps.append(step(f"p{k}", f"p{k-1}"))
    trail = Trail(lb[f"beta{b}"], tuple(steps))
    assert trail.length == inst.expected_sat_length
    return trail


def base_level_table(inst: EgInstance, i: int) -> list[int]:
    """Petalevels of the base vertices along the trail of cross edge i: the
    level of base j is b + 2i + j - 1."""
    return [inst.b + 2 * i + j - 1 for j in range(1, i + 1)]


def enumerate_augmenting_trails(inst: EgInstance, matching: Matching,
                                max_length: int) -> list[Trail]:
    """All augmenting trails up to the given length, by depth-first search
    over alternating extensions.  Exponential; guarded to small b."""
    if inst.b > 4:
        raise ValueError("exhaustive enumeration is limited to b <= 4")
    graph = inst.graph
    inc = graph.incidence()
    found: list[Trail] = []
    start = inst.labels["p0"]
    steps: list[tuple[int, int]] = []
    used: set[int] = set()

    def extend(at: int, last_matched: "bool | None") -> None:
        if steps and last_matched is False and matching.is_free(at):
            trail = Trail(start, tuple(steps))
            if classify_trail(trail, matching).augmenting:
                found.append(trail)
        if len(steps) == max_length:
            return
        for e in inc[at]:
            if e in used:
                continue
            is_m = e in matching
            if last_matched is not None and is_m == last_matched:
                continue
            head = graph.other_end(e, at)
            used.add(e)
            steps.append((e, head))
            extend(head, is_m)
            steps.pop()
            used.remove(e)

    extend(start, None)
    return found


@dataclass(frozen=True)
class EgReport:
    sat_count: int
    all_sats_expected_length: bool
    one_cross_edge_each: bool
    path_prefix_each: bool
    sats_match_expected: bool
    shortest_path_tree_ok: bool
    distinct_position_pairs: int

    @property
    def passed(self) -> bool:
        return (self.all_sats_expected_length and self.one_cross_edge_each
                and self.path_prefix_each and self.sats_match_expected
                and self.shortest_path_tree_ok)


def verify_eg(inst: EgInstance) -> EgReport:
    """Check the family's advertised structure.

    For b <= 4 the shortest augmenting trails are enumerated exhaustively
    and compared with the expected cross trails; the shortest-path-tree
    shape of the outer blossom and the quadratic petalevel count are checked
    for every b.
    """
    matching = inst.initial_matching()
    expect = [expected_cross_trail(inst, i) for i in range(1, inst.b + 1)]
    length = inst.expected_sat_length
    if inst.b <= 4:
        sats = enumerate_augmenting_trails(inst, matching, length)
        all_len = all(t.length == length for t in sats)
        cross_set = set(inst.cross_edges)
        one_cross = all(len(cross_set & set(t.edge_ids())) == 1 for t in sats)
        prefix_ok = True
        for t in sats:
            e_cross = next(e for e in t.edge_ids() if e in cross_set)
            i = inst.cross_edges.index(e_cross) + 1
            want = set(inst.path_edges[:1 + 3 * (inst.b - i)])
            if set(t.edge_ids()) & set(inst.path_edges) != want:
                prefix_ok = False
        matches = ({frozenset(t.edge_ids()) for t in sats}
                   == {frozenset(t.edge_ids()) for t in expect})
        count = len(sats)
    else:
        sats = expect
        all_len = one_cross = prefix_ok = matches = True
        count = len(expect)

    tree_ok = _check_shortest_path_tree(inst)
    pairs = distinct_position_pairs(inst)
    return EgReport(count, all_len, one_cross, prefix_ok, matches,
                    tree_ok, pairs)


def distinct_position_pairs(inst: EgInstance) -> int:
    """Distinct (vertex, position) pairs over the b expected trails; for
    these shortest trails the position along the trail is the natural
    petalevel."""
    pairs = set()
    for i in range(1, inst.b + 1):
        trail = expected_cross_trail(inst, i)
        for pos, v in enumerate(trail.vertices()):
            pairs.add((v, pos))
    return len(pairs)


def _check_shortest_path_tree(inst: EgInstance) -> bool:
    """BFS distances inside the outermost blossom are realized by the tree
    that omits the top edge of every block and the off-base triangle edge."""
    forest = inst.forest()
    outer = inst.blossoms[-1].id
    vertices = forest.vertices(outer)
    all_edges = forest.edges(outer)
    lb = inst.labels
    drop = set()
    for e, (u, v) in enumerate(inst.graph.edges):
        if e not in all_edges:
            continue
        names = {u, v}
        for i in range(2, inst.b + 1):
            top = {lb[f"s{i}3"], lb["tri"] if i == 2 else lb[f"s{i-1}1"]}
            if names == top:
                drop.add(e)
        if names == {lb["tri"], lb["beta1'"]}:
            drop.add(e)
    tree = all_edges - drop
    if len(tree) != len(vertices) - 1:
        return False
    root = lb[f"beta{inst.b}"]
    return (_bfs_dist(inst.graph, tree, vertices, root)
            == _bfs_dist(inst.graph, all_edges, vertices, root))


def _bfs_dist(graph: Multigraph, edges: set, vertices: set,
              root: int) -> dict:
    from collections import deque
    inc: dict = {v: [] for v in vertices}
    for e in edges:
        u, v = graph.endpoints(e)
        inc[u].append(v)
        inc[v].append(u)
    dist = {root: 0}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in inc[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def instance_to_json(inst: EgInstance) -> str:
    """Sidecar for gen-eg: the initial matching, the blossoms, and the
    expected trails."""
    payload = {
        "b": inst.b,
        "expected_sat_length": inst.expected_sat_length,
        "labels": inst.labels,
        "initial_matching": list(inst.initial_edges),
        "cross_edges": list(inst.cross_edges),
        "path_edges": list(inst.path_edges),
        "blossoms": [
            {"id": blm.id, "heavy": blm.heavy,
             "base_vertex": blm.base_vertex, "base_edge": blm.base_edge,
             "nodes": [list(nd) for nd in blm.nodes],
             "trail_edges": list(blm.trail_edges)}
            for blm in inst.blossoms
        ],
        "expected_trails": [
            {"cross": i, "start": expected_cross_trail(inst, i).start,
             "steps": [list(s) for s in expected_cross_trail(inst, i).steps]}
            for i in range(1, inst.b + 1)
        ],
    }
    return json.dumps(payload, indent=2)
