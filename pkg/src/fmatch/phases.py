"""Phase driver: per phase, search for a shortest augmenting trail, extract a
maximal set of edge-disjoint trails of that length over the tight edges, and
augment them all; repeat until the matching is maximum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .blossom import EdgeStatus, StructuredMatching, classify_edge, \
    validate_structured
from .graph import DegreeBound, Matching, Multigraph, Trail, augment, \
    classify_trail
from .oracles import brute_force_max_f_matching
from .search import SearchInvariantError, SearchOutcome, f_matching_search


@dataclass(frozen=True)
class BlockingSet:
    """A maximal collection of edge-disjoint shortest augmenting trails that
    can be augmented together."""

    trails: tuple[Trail, ...]
    sat_length: int


@dataclass(frozen=True)
class PhaseRecord:
    index: int
    sat_length: int
    trail_count: int
    cardinality_after: int
    dual_offset: int


@dataclass
class PhaseStats:
    records: list = field(default_factory=list)
    final_cardinality: int = 0
    final_outcome: "SearchOutcome | None" = None

    @property
    def phase_count(self) -> int:
        return len(self.records)

    @property
    def sat_lengths(self) -> list:
        return [r.sat_length for r in self.records]

    def as_dict(self) -> dict:
        return {
            "phases": [vars(r) for r in self.records],
            "phase_count": self.phase_count,
            "final_cardinality": self.final_cardinality,
        }


@dataclass
class PhaseObservation:
    """Raw material of one phase, for instrumentation hooks: the first
    search's outcome, the blocking set, the restricted searches that
    produced the later trails, and the matching the phase started from."""

    index: int
    outcome: SearchOutcome
    blocking: BlockingSet
    trail_outcomes: list
    matching_before: Matching


def tight_edges(s: StructuredMatching) -> set[int]:
    return {e for e in range(s.graph.edge_count)
            if classify_edge(e, s) is EdgeStatus.TIGHT}


def find_blocking_set(graph: Multigraph, bounds: DegreeBound,
                      matching: Matching, outcome: SearchOutcome,
                      collect_outcomes: "list | None" = None) -> BlockingSet:
    """Extend a found trail to a maximal edge-disjoint collection of trails
    of the same length.

    Later trails come from searches restricted to the unused tight edges of
    the phase's structured matching, with endpoint deficiencies reduced by
    the trails already taken; the loop stops when the restricted shortest
    length exceeds the phase's, so the collection is maximal.
    """
    if outcome.trail is None:
        raise ValueError("blocking extraction needs a found trail")
    s_len = outcome.sat_length
    trails = [outcome.trail]
    if collect_outcomes is not None:
        collect_outcomes.append(outcome)
    available = tight_edges(outcome.structured)
    residual_def = {v: matching.deficiency(v)
                    for v in range(graph.vertex_count)}

    def consume(trail: Trail) -> None:
        available.difference_update(trail.edge_ids())
        if trail.is_closed():
            residual_def[trail.start] -= 2
        else:
            residual_def[trail.start] -= 1
            residual_def[trail.end] -= 1

    consume(outcome.trail)
    while True:
        nxt = f_matching_search(graph, bounds, matching,
                                edge_subset=available,
                                deficiency_override=residual_def)
        if nxt.trail is None:
            break
        if nxt.sat_length < s_len:
            raise SearchInvariantError(
                f"restricted search found a shorter trail "
                f"({nxt.sat_length} < {s_len})")
        if nxt.sat_length > s_len:
            break
        trails.append(nxt.trail)
        if collect_outcomes is not None:
            collect_outcomes.append(nxt)
        consume(nxt.trail)
    return BlockingSet(tuple(trails), s_len)


def solve_max_f_matching(graph: Multigraph, bounds: DegreeBound,
                         initial: "Matching | None" = None,
                         on_phase=None) -> tuple[Matching, PhaseStats]:
    """Maximum-cardinality f-matching by repeated blocking augmentation.

    ``on_phase`` receives a PhaseObservation after each augmenting phase.
    """
    matching = initial.copy() if initial is not None else \
        Matching(graph, bounds)
    stats = PhaseStats()
    index = 0
    while True:
        outcome = f_matching_search(graph, bounds, matching)
        if outcome.trail is None:
            stats.final_outcome = outcome
            break
        trail_outcomes: list = []
        blocking = find_blocking_set(graph, bounds, matching, outcome,
                                     trail_outcomes)
        before = matching
        for trail in blocking.trails:
            matching = augment(matching, trail)
        stats.records.append(PhaseRecord(
            index=index,
            sat_length=blocking.sat_length,
            trail_count=len(blocking.trails),
            cardinality_after=matching.cardinality,
            dual_offset=outcome.dual_offset,
        ))
        if on_phase is not None:
            on_phase(PhaseObservation(index, outcome, blocking,
                                      trail_outcomes, before))
        if stats.phase_count > 1 and \
                blocking.sat_length <= stats.records[-2].sat_length:
            raise SearchInvariantError("sat length failed to increase")
        index += 1
    stats.final_cardinality = matching.cardinality
    return matching, stats


@dataclass(frozen=True)
class CertificateReport:
    valid: bool
    violations: tuple[str, ...] = ()
    brute_force_agrees: "bool | None" = None

    def __bool__(self) -> bool:
        return self.valid


def certify(graph: Multigraph, bounds: DegreeBound, matching: Matching,
            outcome: SearchOutcome, cross_check: bool = True) -> CertificateReport:
    """Certificate that a matching is maximum: the final search found no
    trail and left a valid structured matching.  Small instances are
    cross-checked against brute force."""
    violations: list[str] = []
    if outcome.trail is not None:
        violations.append("search returned an augmenting trail")
    violations.extend(validate_structured(
        outcome.structured, free_override=outcome.free_deficiency,
        edge_subset=(set(outcome.edge_subset)
                     if outcome.edge_subset is not None else None)))
    agrees = None
    if cross_check and graph.edge_count <= 24:
        exact = brute_force_max_f_matching(graph, bounds)
        agrees = exact.max_cardinality == matching.cardinality
        if not agrees:
            violations.append(
                f"brute force finds {exact.max_cardinality} edges, "
                f"matching has {matching.cardinality}")
    return CertificateReport(not violations, tuple(violations), agrees)
