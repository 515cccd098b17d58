"""Exact minimum-weight sorting for tiny instances.

Best-first search over concrete genomes. States are ordered by accumulated
weight plus the potential lower bound of the remaining distance, which never
overestimates and never decreases along an edge by more than the edge weight,
so the first time the target is popped its weight is optimal. With
``heuristic=False`` the search is plain uniform-cost.
"""

import heapq
import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator

from .approx_algorithm import WeightScheme, delta_max
from .breakpoint_graph import measure_genomes
from .genome_model import (
    ALPHA,
    Deletion,
    Genome,
    Insertion,
    NormalizedPair,
    RearrangementOp,
    Reversal,
    Transposition,
    apply_operation,
)
from .utils.run_log import log_step

logger = logging.getLogger("exact_oracle")


class OracleLimitError(ValueError):
    """Instance or search too large for exact solving."""


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValueError(f"{name} must be non-negative, got {value}")
    return value


@dataclass(frozen=True)
class OracleLimits:
    max_genes: int = 4
    max_nucleotides: int = 12
    max_states: int = 200_000

    @classmethod
    def from_env(cls) -> "OracleLimits":
        return cls(
            max_genes=_env_int("ORACLE_MAX_GENES", cls.max_genes),
            max_nucleotides=_env_int("ORACLE_MAX_NUCLEOTIDES", cls.max_nucleotides),
            max_states=_env_int("ORACLE_MAX_STATES", cls.max_states),
        )

    def admits(self, pair: NormalizedPair) -> bool:
        try:
            self.check(pair)
        except OracleLimitError:
            return False
        return True

    def check(self, pair: NormalizedPair) -> None:
        genes = max(pair.source.n, pair.target.n)
        if genes > self.max_genes:
            raise OracleLimitError(f"instance has {genes} genes, oracle limit is {self.max_genes}")
        nucleotides = max(pair.source.total_nucleotides, pair.target.total_nucleotides)
        if nucleotides > self.max_nucleotides:
            raise OracleLimitError(
                f"instance has {nucleotides} nucleotides in one genome, oracle limit is {self.max_nucleotides}"
            )


@dataclass(frozen=True)
class SearchState:
    genome: Genome
    accumulated_weight: Fraction


@dataclass(frozen=True)
class SearchContext:
    target: Genome
    weights: WeightScheme
    cap: int  # no reachable genome holds more nucleotides than this


@dataclass(frozen=True)
class OracleResult:
    weight: Fraction
    witness: tuple[RearrangementOp, ...]
    explored: int
    exactness_caveat: bool


def _splits(size: int) -> range:
    return range(size + 1)


def _compositions(total_max: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Non-negative tuples of length ``parts`` whose sum is at most ``total_max``."""
    if parts == 1:
        for value in range(total_max + 1):
            yield (value,)
        return
    for head in range(total_max + 1):
        for tail in _compositions(total_max - head, parts - 1):
            yield (head,) + tail


def _missing_runs(g: Genome, target: Genome) -> list[tuple[int, ...]]:
    """Contiguous runs (in target order) of target genes absent from ``g``."""
    present = g.gene_ids()
    runs = []
    missing = [x for x in target.genes if x not in present]
    for start in range(len(missing)):
        run = [missing[start]]
        runs.append(tuple(run))
        for x in missing[start + 1:]:
            if x != run[-1] + 1:
                break
            run.append(x)
            runs.append(tuple(run))
    return runs


def iter_operations(g: Genome, context: SearchContext) -> Iterator[RearrangementOp]:
    """Every valid operation on ``g`` whose result stays within the cap.

    Indels that differ only in where a region is split but produce the same
    genome are listed once: nucleotide-only insertions and deletions inside
    one region use ``x = 0``, and a split below the region size goes with an
    empty first inserted region (or, for deletions, a full trailing cut).
    """
    n, R = g.n, g.regions
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            for x, y in product(_splits(R[i - 1]), _splits(R[j])):
                yield Reversal(i, j, x, y)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            for k in range(j + 1, n + 2):
                for x, y, z in product(_splits(R[i - 1]), _splits(R[j - 1]), _splits(R[k - 1])):
                    yield Transposition(i, j, k, x, y, z)
    for i in range(1, n + 2):
        for y in range(1, R[i - 1] + 1):
            yield Deletion(i, i, 0, y)
        for j in range(i + 1, n + 2):
            if g.genes[j - 2] != ALPHA:
                break
            last = R[j - 1]
            for x, y in product(_splits(R[i - 1]), _splits(last)):
                if x < R[i - 1] and y < last:
                    continue
                yield Deletion(i, j, x, y)
    room = context.cap - g.total_nucleotides
    for amount in range(1, room + 1):
        for i in range(1, n + 2):
            yield Insertion(i, (), (amount,), 0)
    for run in _missing_runs(g, context.target):
        for genes in (run, tuple(-x for x in reversed(run))):
            for regions in _compositions(room, len(genes) + 1):
                for i in range(1, n + 2):
                    size = R[i - 1]
                    for x in _splits(size) if regions[0] == 0 else (size,):
                        yield Insertion(i, genes, regions, x)


def enumerate_moves(state: SearchState, context: SearchContext) -> list[tuple[RearrangementOp, SearchState]]:
    """Successors of ``state``, one per distinct resulting genome.

    When several operations lead to the same genome the cheapest is kept,
    ties going to the first in enumeration order.
    """
    best: dict[Genome, tuple[Fraction, RearrangementOp]] = {}
    for op in iter_operations(state.genome, context):
        nxt = apply_operation(state.genome, op)
        if nxt == state.genome:
            continue
        w = context.weights.op_weight(op)
        seen = best.get(nxt)
        if seen is None or w < seen[0]:
            best[nxt] = (w, op)
    return [
        (op, SearchState(genome, state.accumulated_weight + w))
        for genome, (w, op) in best.items()
    ]


def _estimate(g: Genome, context: SearchContext, top: Fraction) -> Fraction:
    return context.weights.potential(measure_genomes(g, context.target)) / top


def exact_distance(
    pair: NormalizedPair,
    weights: WeightScheme,
    limits: OracleLimits | None = None,
    upper_bound=None,
    heuristic: bool = True,
) -> OracleResult:
    """Minimum total weight of a sequence turning ``pair.source`` into ``pair.target``.

    ``upper_bound`` (the weight of any known sorting sequence) prunes states
    that cannot beat it. Among states of equal estimate the deeper one is
    expanded first.

    Insertions are bounded by the cap, the source and target totals combined.
    ``exactness_caveat`` is set when the cap kept some expanded state from
    inserting the whole target total at once and a detour above the cap (one
    insertion plus the deletion it forces) still fit within the optimal weight.
    """
    limits = limits or OracleLimits.from_env()
    limits.check(pair)
    context = SearchContext(
        target=pair.target,
        weights=weights,
        cap=pair.source.total_nucleotides + pair.target.total_nucleotides,
    )
    top = delta_max(weights)
    bound = Fraction(upper_bound) if upper_bound is not None else None

    def h(g: Genome) -> Fraction:
        return _estimate(g, context, top) if heuristic else Fraction(0)

    start = pair.source
    best_g = {start: Fraction(0)}
    parent: dict[Genome, tuple[Genome, RearrangementOp]] = {}
    heap = [(h(start), Fraction(0), start.genes, start.regions)]
    withheld: list[Fraction] = []  # accumulated weights of states the cap constrained
    detour = 2 * weights.w_indel
    explored = 0

    while heap:
        f, depth, genes, regions = heapq.heappop(heap)
        g_cost = -depth
        genome = Genome(genes, regions)
        if g_cost > best_g.get(genome, g_cost):
            continue
        if genome == pair.target:
            witness = []
            while genome in parent:
                genome, op = parent[genome]
                witness.append(op)
            witness.reverse()
            caveat = any(w + detour <= g_cost for w in withheld)
            log_step(
                "oracle", "exact weight %s after %d states (caveat=%s)", g_cost, explored, caveat
            )
            return OracleResult(g_cost, tuple(witness), explored, caveat)
        explored += 1
        if explored > limits.max_states:
            raise OracleLimitError(f"oracle explored more than {limits.max_states} states")
        if context.cap - genome.total_nucleotides < pair.target.total_nucleotides:
            withheld.append(g_cost)
        for op, nxt in enumerate_moves(SearchState(genome, g_cost), context):
            cost = nxt.accumulated_weight
            if cost >= best_g.get(nxt.genome, cost + 1):
                continue
            estimate = cost + h(nxt.genome)
            if bound is not None and estimate > bound:
                continue
            best_g[nxt.genome] = cost
            parent[nxt.genome] = (genome, op)
            heapq.heappush(heap, (estimate, -cost, nxt.genome.genes, nxt.genome.regions))

    raise OracleLimitError(
        f"no sorting sequence found within weight {bound}" if bound is not None
        else "search space exhausted without reaching the target"
    )
