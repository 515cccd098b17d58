"""The seven steps of the sorting loop.

Each step receives the current sorting state (source genome, identity target
and the virtual insertion ledger) and returns a :class:`StepPlan`, a short
operation list whose effect on (delta c, delta c_g) is measured by replaying
it and rebuilding the graph. Plans that do not reach their step's claim are
never returned.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import TYPE_CHECKING, Iterator, Mapping, Sequence

from .breakpoint_graph import (
    BALANCED,
    DIVERGENT,
    NEGATIVE,
    ORIENTED,
    POSITIVE,
    BreakpointGraph,
    CycleRecord,
    GraphMeasures,
    delta_measures,
    graph_of,
    measure_genomes,
)
from .genome_model import (
    INDEL_KINDS,
    Deletion,
    Genome,
    Insertion,
    InvalidOperationError,
    RearrangementOp,
    Reversal,
    Transposition,
    VirtualInsertion,
    apply_operation,
)

if TYPE_CHECKING:
    from .approx_algorithm import WeightScheme

logger = logging.getLogger("rearrangement_steps")

STEP_IDS = ("I", "II", "III", "IV", "V", "VI", "VII")

# (delta c, delta c_g) each step guarantees
CLAIMS = {
    "I": (0, 1),
    "II": (0, 1),
    "III": (2, 2),
    "IV": (2, 1),
    "V": (1, 1),
    "VI": (1, 1),
    "VII": (1, 2),
}

# step VII is accepted on (1, 1); see _accepts
_ACCEPT = {**CLAIMS, "VII": (1, 1)}

VirtualInsertionLedger = Mapping[int, int]


class StepPreconditionError(ValueError):
    """A step was asked to handle a cycle or state it does not cover."""


class StepSearchError(RuntimeError):
    """No plan satisfying a step's postcondition was found."""


@dataclass(frozen=True)
class SortingState:
    source: Genome
    target: Genome
    ledger: tuple[tuple[int, int], ...] = ()

    @cached_property
    def graph(self) -> BreakpointGraph:
        return graph_of(self.source, self.target, dict(self.ledger))

    @property
    def measures(self) -> GraphMeasures:
        return measure_genomes(self.source, self.target, dict(self.ledger))

    @property
    def ledger_map(self) -> dict[int, int]:
        return dict(self.ledger)

    def apply(self, op: RearrangementOp) -> "SortingState":
        if op.kind != "virtual":
            return SortingState(apply_operation(self.source, op), self.target, self.ledger)
        if op.amount <= 0:
            raise InvalidOperationError(f"virtual insertion amount must be positive, got {op.amount}")
        try:
            edge = self.graph.target_edge(op.gene)
        except KeyError:
            raise InvalidOperationError(f"no target edge t_{op.gene}") from None
        if edge.labeled:
            raise InvalidOperationError(f"target edge t_{op.gene} is labeled")
        ledger = self.ledger_map
        ledger[op.gene] = ledger.get(op.gene, 0) + op.amount
        return SortingState(self.source, self.target, tuple(sorted(ledger.items())))

    def replay(self, ops: Sequence[RearrangementOp]) -> "SortingState":
        state = self
        for op in ops:
            state = state.apply(op)
        return state

    def is_sorted(self) -> bool:
        return self.measures.b_g == 0

    def dump(self) -> str:
        return (
            f"source {self.source.describe()}\n"
            f"target {self.target.describe()}\n"
            f"ledger {self.ledger_map}"
        )


@dataclass(frozen=True)
class StepPlan:
    step_id: str
    ops: tuple[RearrangementOp, ...]
    claimed: tuple[int, int]
    measured: tuple[int, int]
    cycle: int | None = None  # leftmost position of the handled cycle

    @property
    def reversals(self) -> int:
        return sum(1 for op in self.ops if op.kind == "reversal")

    @property
    def transpositions(self) -> int:
        return sum(1 for op in self.ops if op.kind == "transposition")

    @property
    def indels(self) -> int:
        return sum(1 for op in self.ops if op.kind in INDEL_KINDS)


def _measured(state: SortingState, ops: Sequence[RearrangementOp]) -> tuple[int, int]:
    return delta_measures(state.measures, state.replay(ops).measures)


def _accepts(step_id: str, measured: tuple[int, int]) -> bool:
    dc, dcg = _ACCEPT[step_id]
    return measured[0] >= dc and measured[1] >= dcg


def _plan(state: SortingState, step_id: str, ops: Sequence[RearrangementOp], cycle: CycleRecord | None) -> StepPlan:
    measured = _measured(state, ops)
    if not _accepts(step_id, measured):
        raise StepSearchError(
            f"step {step_id} plan {[op.describe() for op in ops]} measured {measured}, "
            f"claim {CLAIMS[step_id]}\n{state.dump()}"
            + (f"\ncycle {cycle.describe()}" if cycle else "")
        )
    return StepPlan(step_id, tuple(ops), CLAIMS[step_id], measured, cycle.leftmost if cycle else None)


def _search_failed(step_id: str, state: SortingState, cycle: CycleRecord | None) -> StepSearchError:
    message = f"step {step_id}: no operation sequence meets {CLAIMS[step_id]}\n{state.dump()}"
    if cycle is not None:
        message += f"\ncycle {cycle.describe()}"
    logger.error(message)
    return StepSearchError(message)


# --- Candidate generation ---

def cycle_regions(cycle: CycleRecord) -> list[tuple[int, int]]:
    """(source region, origin edge index) pairs of a cycle, left to right."""
    return sorted((r, o.index) for o in cycle.origin_edges for r in o.regions)


def _cut_sets(cycle: CycleRecord, size: int) -> Iterator[tuple[int, ...]]:
    for picked in combinations(cycle_regions(cycle), size):
        if len({edge for _, edge in picked}) == size:
            yield tuple(r for r, _ in picked)


def reversal_outcomes(g: Genome, r1: int, r2: int) -> Iterator[Reversal]:
    """Reversals cutting regions r1 < r2, one per distinct resulting genome."""
    a, b = g.regions[r1 - 1], g.regions[r2 - 1]
    for s in range(a + b + 1):
        x = min(s, a)
        yield Reversal(r1, r2 - 1, x, s - x)


def transposition_outcomes(g: Genome, r1: int, r2: int, r3: int) -> Iterator[Transposition]:
    """Transpositions cutting regions r1 < r2 < r3, one per distinct result."""
    a, b, c = g.regions[r1 - 1], g.regions[r2 - 1], g.regions[r3 - 1]
    seen = set()
    for x, y, z in product(range(a + 1), range(b + 1), range(c + 1)):
        key = (x + b - y, z + a - x)
        if key in seen:
            continue
        seen.add(key)
        yield Transposition(r1, r2, r3, x, y, z)


def _splitting_reversals(state: SortingState, cycle: CycleRecord) -> Iterator[Reversal]:
    base = state.measures.c
    for r1, r2 in _cut_sets(cycle, 2):
        trial = state.apply(Reversal(r1, r2 - 1, 0, 0))
        if trial.measures.c - base != 1:
            continue
        yield from reversal_outcomes(state.source, r1, r2)


def _splitting_transpositions(state: SortingState, cycle: CycleRecord) -> Iterator[Transposition]:
    base = state.measures.c
    for r1, r2, r3 in _cut_sets(cycle, 3):
        trial = state.apply(Transposition(r1, r2, r3, 0, 0, 0))
        if trial.measures.c - base != 2:
            continue
        yield from transposition_outcomes(state.source, r1, r2, r3)


# --- Indel constructions ---

def _insertion_side_needs(target: Genome, x: int, nxt: int, forward: bool) -> tuple[int, int, tuple[int, ...]]:
    left_need, right_need = target.regions[x], target.regions[nxt - 1]
    interior = target.regions[x + 1 : nxt - 1]
    if forward:
        return left_need, right_need, interior
    return right_need, left_need, tuple(reversed(interior))


def _gene_insertion(state: SortingState, cycle: CycleRecord, region: int, weight: int) -> Insertion:
    """Insert the missing run of a trivial cycle's target edge into ``region``."""
    o, t = cycle.origin_edges[0], cycle.target_edges[0]
    forward = o.left.polarity == "+" and o.left.gene == t.gene
    lneed, rneed, interior = _insertion_side_needs(state.target, t.gene, t.next, forward)
    split = min(weight, lneed)
    genes = t.missing if forward else tuple(-g for g in reversed(t.missing))
    regions = (lneed - split,) + interior + (rneed - (weight - split),)
    return Insertion(region, genes, regions, split)


def trivial_fix(state: SortingState, cycle: CycleRecord) -> list[RearrangementOp]:
    """One or two indels turning a bad trivial cycle good."""
    o, t = cycle.origin_edges[0], cycle.target_edges[0]
    g = state.source
    ends = state.target.regions[t.gene] + state.target.regions[t.next - 1]
    ops: list[RearrangementOp] = []
    if o.labeled:
        first, last = o.regions[0], o.regions[-1]
        left, right = g.regions[first - 1], g.regions[last - 1]
        keep = min(left + right, ends if t.labeled else t.weight)
        x = min(left, keep)
        ops.append(Deletion(first, last, x, x + right - keep))
        region, weight = first, keep
    else:
        region, weight = o.regions[0], o.weight
    if t.labeled:
        if weight > ends:
            ops.append(Deletion(region, region, 0, weight - ends))
            weight = ends
        ops.append(_gene_insertion(state, cycle, region, weight))
    elif weight < t.weight:
        ops.append(Insertion(region, (), (t.weight - weight,), 0))
    elif weight > t.weight:
        ops.append(Deletion(region, region, 0, weight - t.weight))
    return ops


def _balancing_indel(cycle: CycleRecord) -> RearrangementOp:
    if cycle.balance == POSITIVE:
        return Insertion(cycle.origin_edges[0].regions[0], (), (cycle.imbalance,), 0)
    return VirtualInsertion(cycle.target_edges[0].gene, -cycle.imbalance)


def single_indel_fix(state: SortingState, cycle: CycleRecord) -> RearrangementOp | None:
    """An indel that makes ``cycle`` good on its own, when one exists."""
    if cycle.good:
        return None
    if cycle.trivial:
        ops = trivial_fix(state, cycle)
        return ops[0] if len(ops) == 1 else None
    if cycle.clean:
        return _balancing_indel(cycle)
    return None


def _fix_dirty(state: SortingState, budget: int) -> list[RearrangementOp]:
    """Greedily spend up to ``budget`` single-indel fixes, leftmost cycle first."""
    ops: list[RearrangementOp] = []
    while len(ops) < budget:
        fix = None
        for cycle in state.graph.cycles:
            fix = single_indel_fix(state, cycle)
            if fix is not None:
                break
        if fix is None:
            break
        ops.append(fix)
        state = state.apply(fix)
    return ops


# --- Steps ---

def step_trivial_bad(cycle: CycleRecord, ctx: SortingState) -> StepPlan:
    """Step I: one or two indels on a bad trivial cycle."""
    if not (cycle.trivial and cycle.bad):
        raise StepPreconditionError(f"step I needs a bad trivial cycle, got {cycle.describe()}")
    return _plan(ctx, "I", trivial_fix(ctx, cycle), cycle)


def step_unbalanced_clean(cycle: CycleRecord, ctx: SortingState) -> StepPlan:
    """Step II: one real or virtual insertion balancing a clean cycle."""
    if cycle.labeled or cycle.balance == BALANCED:
        raise StepPreconditionError(f"step II needs an unbalanced clean cycle, got {cycle.describe()}")
    return _plan(ctx, "II", [_balancing_indel(cycle)], cycle)


def _require_oriented(cycle: CycleRecord, good: bool, step_id: str) -> None:
    if cycle.orientation != ORIENTED or cycle.good != good:
        kind = "good" if good else "bad"
        raise StepPreconditionError(f"step {step_id} needs a {kind} oriented cycle, got {cycle.describe()}")


def _transposition_then_fixes(ctx: SortingState, cycle: CycleRecord, step_id: str, budget: int):
    """First transposition on ``cycle`` meeting the claim with the fewest indels."""
    candidates = list(_splitting_transpositions(ctx, cycle))
    for op in candidates:
        if _accepts(step_id, _measured(ctx, [op])):
            return [op]
    for op in candidates:
        after = ctx.apply(op)
        fixes = _fix_dirty(after, budget)
        if fixes and _accepts(step_id, _measured(ctx, [op, *fixes])):
            return [op, *fixes]
    return None


def prefers_three_transpositions(weights: "WeightScheme") -> bool:
    return 3 * weights.w_trans <= weights.w_trans + 2 * weights.w_indel


def _shuttle_deltas(
    positive: CycleRecord, negative: CycleRecord, g: Genome
) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(regions, changes) triples that move nucleotides from ``negative`` to ``positive``."""
    d = positive.imbalance
    gain = [r for o in positive.origin_edges for r in o.regions]
    loss = [r for o in negative.origin_edges for r in o.regions]
    others = [r for r in range(1, g.n + 2) if r not in gain and r not in loss]
    for p in gain:
        for n in loss:
            if g.regions[n - 1] >= d:
                for free in others + [r for r in gain + loss if r not in (p, n)]:
                    yield (p, n, free), (d, -d, 0)
    for p in gain:
        for n1, n2 in combinations(loss, 2):
            for e in range(1, d):
                if g.regions[n1 - 1] >= e and g.regions[n2 - 1] >= d - e:
                    yield (p, n1, n2), (d, -e, e - d)
    for p1, p2 in combinations(gain, 2):
        for n in loss:
            if g.regions[n - 1] >= d:
                for e in range(1, d):
                    yield (p1, p2, n), (e, d - e, -d)


def _shuttle(g: Genome, regions: tuple[int, ...], changes: tuple[int, ...]) -> list[Transposition] | None:
    """A transposition and its block-restoring inverse shifting region weights."""
    order = sorted(range(3), key=lambda i: regions[i])
    a, b, c = (regions[i] for i in order)
    da, db, dc = (changes[i] for i in order)
    ra, rb, rc = g.regions[a - 1], g.regions[b - 1], g.regions[c - 1]
    mid = a + (c - b)
    for x, y, z in product(range(ra + 1), range(rb + 1), range(rc + 1)):
        u1, u2, u3 = x + (rb - y), z + (ra - x), y + (rc - z)
        for y2 in range(u2 + 1):
            x2 = ra + da - u2 + y2
            if not 0 <= x2 <= u1:
                continue
            z2 = rb + db - u1 + x2
            if not 0 <= z2 <= u3:
                continue
            if y2 + u3 - z2 != rc + dc:
                continue
            return [Transposition(a, b, c, x, y, z), Transposition(a, mid, c, x2, y2, z2)]
    return None


def _three_transpositions(ctx: SortingState, cycle: CycleRecord) -> list[RearrangementOp] | None:
    for op in _splitting_transpositions(ctx, cycle):
        after = ctx.apply(op)
        if _accepts("III", _measured(ctx, [op])):
            return [op]
        unbalanced = [c for c in after.graph.cycles if c.clean and c.balance != BALANCED]
        positive = [c for c in unbalanced if c.balance == POSITIVE]
        negative = [c for c in unbalanced if c.balance == NEGATIVE]
        if len(positive) != 1 or len(negative) != 1:
            continue
        for regions, changes in _shuttle_deltas(positive[0], negative[0], after.source):
            pair = _shuttle(after.source, regions, changes)
            if pair and _accepts("III", _measured(ctx, [op, *pair])):
                return [op, *pair]
    return None


def step_good_oriented(cycle: CycleRecord, ctx: SortingState, weights: "WeightScheme") -> StepPlan:
    """Step III: three transpositions, or one transposition and up to two indels."""
    _require_oriented(cycle, good=True, step_id="III")
    if prefers_three_transpositions(weights):
        ops = _three_transpositions(ctx, cycle)
    else:
        ops = _transposition_then_fixes(ctx, cycle, "III", budget=2)
    if ops is None:
        raise _search_failed("III", ctx, cycle)
    return _plan(ctx, "III", ops, cycle)


def step_bad_oriented(cycle: CycleRecord, ctx: SortingState) -> StepPlan:
    """Step IV: one transposition and at most one indel."""
    _require_oriented(cycle, good=False, step_id="IV")
    ops = _transposition_then_fixes(ctx, cycle, "IV", budget=1)
    if ops is None:
        raise _search_failed("IV", ctx, cycle)
    return _plan(ctx, "IV", ops, cycle)


def step_labeled_divergent(cycle: CycleRecord, ctx: SortingState) -> StepPlan:
    """Step V: one reversal and at most one indel on a labeled divergent cycle."""
    if cycle.direction != DIVERGENT or not cycle.labeled:
        raise StepPreconditionError(f"step V needs a labeled divergent cycle, got {cycle.describe()}")
    candidates = list(_splitting_reversals(ctx, cycle))
    for op in candidates:
        if _accepts("V", _measured(ctx, [op])):
            return _plan(ctx, "V", [op], cycle)
    for op in candidates:
        fixes = _fix_dirty(ctx.apply(op), 1)
        if fixes and _accepts("V", _measured(ctx, [op, *fixes])):
            return _plan(ctx, "V", [op, *fixes], cycle)
    raise _search_failed("V", ctx, cycle)


def step_good_divergent(cycle: CycleRecord, ctx: SortingState) -> StepPlan:
    """Step VI: a single reversal splitting a good divergent cycle in two good ones."""
    if cycle.direction != DIVERGENT or not cycle.good:
        raise StepPreconditionError(f"step VI needs a good divergent cycle, got {cycle.describe()}")
    for op in _splitting_reversals(ctx, cycle):
        if _accepts("VI", _measured(ctx, [op])):
            return _plan(ctx, "VI", [op], cycle)
    raise _search_failed("VI", ctx, cycle)


def _best_split(state: SortingState, cycle: CycleRecord) -> Reversal | None:
    """The splitting reversal of ``cycle`` that leaves the most good cycles."""
    best, best_good = None, -1
    for op in _splitting_reversals(state, cycle):
        good = state.apply(op).measures.c_g
        if good > best_good:
            best, best_good = op, good
    return best


def _extensions(state: SortingState, ops: list, reversals_left: int, indels_left: int) -> Iterator[list]:
    yield ops
    fixes = _fix_dirty(state, indels_left)
    if fixes:
        yield ops + fixes
    if reversals_left == 0:
        return
    for cycle in state.graph.cycles:
        if cycle.direction != DIVERGENT:
            continue
        op = _best_split(state, cycle)
        if op is not None:
            yield from _extensions(state.apply(op), ops + [op], reversals_left - 1, indels_left)


def _no_divergent_candidates(ctx: SortingState, cycles: Sequence[CycleRecord], weights: "WeightScheme"):
    from .approx_algorithm import guaranteed_ratio

    floor = guaranteed_ratio(weights)
    best, best_key = None, None
    for cycle in cycles:
        for r1, r2 in _cut_sets(cycle, 2):
            for first in reversal_outcomes(ctx.source, r1, r2):
                for ops in _extensions(ctx.apply(first), [first], 2, 2):
                    measured = _measured(ctx, ops)
                    if not _accepts("VII", measured):
                        continue
                    ratio = weights.progress_ratio(measured[0], measured[1], ops)
                    if ratio < floor:
                        continue
                    key = (ratio, -len(ops))
                    if best_key is None or key > best_key:
                        best, best_key = ops, key
    return best


def step_no_divergent(graph_state: SortingState, weights: "WeightScheme") -> StepPlan:
    """Step VII: up to three reversals and two indels when no cycle is divergent.

    The first reversal cuts two origin edges of the leftmost non-trivial cycle;
    further reversals split divergent cycles it creates. Among the plans that
    gain at least one cycle and one good cycle and whose weighted progress per
    unit of weight reaches the smallest step value of ``weights``, the best
    ratio wins. If the leftmost cycle yields nothing, the remaining non-trivial
    cycles are tried.
    """
    cycles = graph_state.graph.cycles
    if any(c.direction == DIVERGENT for c in cycles):
        raise StepPreconditionError("step VII runs only when no cycle is divergent")
    dirty = [c for c in cycles if not c.trivial]
    if not dirty:
        raise StepPreconditionError("step VII needs a non-trivial cycle")
    ops = _no_divergent_candidates(graph_state, dirty[:1], weights)
    if ops is None and len(dirty) > 1:
        ops = _no_divergent_candidates(graph_state, dirty[1:], weights)
    if ops is None:
        raise _search_failed("VII", graph_state, dirty[0])
    return _plan(graph_state, "VII", ops, dirty[0])


def select_step(state: SortingState) -> tuple[str, CycleRecord | None] | None:
    """The highest-priority applicable step and its cycle, or None when sorted."""
    cycles = state.graph.cycles
    if all(c.trivial and c.good for c in cycles):
        return None
    rules = (
        ("I", lambda c: c.trivial and c.bad),
        ("II", lambda c: c.clean and c.balance != BALANCED),
        ("III", lambda c: c.good and c.orientation == ORIENTED),
        ("IV", lambda c: c.bad and c.orientation == ORIENTED),
        ("V", lambda c: c.labeled and c.direction == DIVERGENT),
        ("VI", lambda c: c.good and c.direction == DIVERGENT),
    )
    for step_id, applies in rules:
        for cycle in cycles:
            if applies(cycle):
                return step_id, cycle
    return "VII", None


def materialize_virtual_insertions(
    final_source: Genome, target: Genome, ledger: VirtualInsertionLedger
) -> list[Deletion]:
    """Trailing deletions replacing the virtual insertions of a finished run."""
    if final_source.genes != target.genes:
        raise StepSearchError(
            f"sorting ended on {final_source.describe()}, genes differ from {target.describe()}"
        )
    expected = list(target.regions)
    for gene, amount in ledger.items():
        if amount <= 0:
            raise StepSearchError(f"ledger entry t_{gene} has non-positive amount {amount}")
        expected[gene] += amount
    if tuple(expected) != final_source.regions:
        raise StepSearchError(
            f"ledger {dict(ledger)} does not explain {final_source.describe()} against {target.describe()}"
        )
    return [Deletion(gene + 1, gene + 1, 0, amount) for gene, amount in sorted(ledger.items())]
