"""Weighted sorting loop and its factor calculus.

All weights are exact rationals. ``run`` drives the step-prioritized loop
through the flow built in :mod:`src.flow`; the remaining functions are the
arithmetic used to state and check the approximation guarantee.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .breakpoint_graph import GraphMeasures, measure_genomes
from .genome_model import Genome, NormalizedPair, RearrangementOp, apply_sequence
from .rearrangement_steps import STEP_IDS, StepSearchError

logger = logging.getLogger("approx_algorithm")


class WeightSchemeError(ValueError):
    """Invalid operation weights or progress coefficients."""


def to_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction or a string such as ``3/2`` or ``1.5``."""
    try:
        return Fraction(str(value).strip()) if isinstance(value, str) else Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise WeightSchemeError(f"not an exact rational: {value!r}") from e


@dataclass(frozen=True)
class WeightScheme:
    w_rev: Fraction
    w_trans: Fraction
    w_indel: Fraction
    p1: Fraction
    p2: Fraction

    def __post_init__(self):
        for name in ("w_rev", "w_trans", "w_indel", "p1", "p2"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if min(self.w_rev, self.w_trans, self.w_indel) <= 0:
            raise WeightSchemeError("operation weights must be positive")
        if self.p1 < 0 or self.p2 < 0 or self.p1 + self.p2 <= 0:
            raise WeightSchemeError("p1 and p2 must be non-negative with a positive sum")

    @property
    def label(self) -> str:
        return f"{self.w_rev},{self.w_trans},{self.w_indel}:{self.p1},{self.p2}"

    def op_weight(self, op: RearrangementOp) -> Fraction:
        if op.kind == "reversal":
            return self.w_rev
        if op.kind == "transposition":
            return self.w_trans
        return self.w_indel

    def sequence_weight(self, ops: Sequence[RearrangementOp]) -> Fraction:
        return sum((self.op_weight(op) for op in ops), Fraction(0))

    def potential(self, m: GraphMeasures) -> Fraction:
        return self.p1 * m.b_g + self.p2 * m.b

    def progress_ratio(self, dc: int, dcg: int, ops: Sequence[RearrangementOp]) -> Fraction:
        return delta_ccg(self, dc, dcg, self.sequence_weight(ops))


def delta_ccg(weights: WeightScheme, dc: int, dcg: int, seq_weight) -> Fraction:
    """Weighted progress per unit of operation weight."""
    seq_weight = to_fraction(seq_weight)
    if seq_weight <= 0:
        raise WeightSchemeError("progress ratio needs a positive sequence weight")
    return (weights.p1 * dcg + weights.p2 * dc) / seq_weight


def delta_max(weights: WeightScheme) -> Fraction:
    """Largest progress ratio a single operation can reach."""
    p1, p2 = weights.p1, weights.p2
    return max(
        (p1 + p2) / weights.w_rev,
        2 * (p1 + p2) / weights.w_trans,
        p1 / weights.w_indel,
    )


def step_delta_values(weights: WeightScheme) -> dict[str, Fraction]:
    """Worst-case progress ratio of each step."""
    p1, p2 = weights.p1, weights.p2
    wr, wt, wd = weights.w_rev, weights.w_trans, weights.w_indel
    return {
        "I": p1 / (2 * wd),
        "II": p1 / wd,
        "III": (2 * p1 + 2 * p2) / min(3 * wt, wt + 2 * wd),
        "IV": (p1 + 2 * p2) / (wt + wd),
        "V": (p1 + p2) / (wr + wd),
        "VI": (p1 + p2) / wr,
        "VII": (2 * p1 + 2 * p2) / (3 * wr + 2 * wd),
    }


def guaranteed_ratio(weights: WeightScheme) -> Fraction:
    """Smallest per-step progress ratio; the factor is ``delta_max`` over it."""
    return min(step_delta_values(weights).values())


def approximation_factor(weights: WeightScheme) -> Fraction:
    worst = guaranteed_ratio(weights)
    if worst <= 0:
        zero = [step for step, value in step_delta_values(weights).items() if value == 0]
        raise WeightSchemeError(f"steps {zero} make no weighted progress; the factor is unbounded")
    return delta_max(weights) / worst


def step_table(weights: WeightScheme) -> list[tuple[str, Fraction, Fraction | None]]:
    """(step, progress ratio, delta_max / ratio) rows, one-indel step I included."""
    top = delta_max(weights)
    values = step_delta_values(weights)
    rows = [("I", values["I"]), ("I (one indel)", weights.p1 / weights.w_indel)]
    rows += [(step, values[step]) for step in STEP_IDS[1:]]
    return [(step, value, top / value if value else None) for step, value in rows]


def lower_bound(pair: NormalizedPair, weights: WeightScheme) -> Fraction:
    """Initial potential divided by delta_max; no sorting sequence weighs less."""
    start = measure_genomes(pair.source, pair.target)
    return weights.potential(start) / delta_max(weights)


@dataclass(frozen=True)
class IterationRecord:
    step_id: str
    ops: tuple[RearrangementOp, ...]
    claimed: tuple[int, int]
    measured: tuple[int, int]
    weight: Fraction
    ratio: Fraction
    potential_before: Fraction
    potential_after: Fraction


@dataclass(frozen=True)
class RunReport:
    sequence: tuple[RearrangementOp, ...]
    total_weight: Fraction
    iterations: tuple[IterationRecord, ...]
    lower_bound: Fraction
    factor: Fraction | None
    final_genome: Genome
    virtual_insertions: int
    materialized_deletions: int

    @property
    def min_local_ratio(self) -> Fraction | None:
        return min((it.ratio for it in self.iterations), default=None)


def run(pair: NormalizedPair, weights: WeightScheme) -> RunReport:
    """Sort ``pair.source`` into ``pair.target`` with the prioritized steps."""
    from .flow import create_sorting_flow

    shared = {
        "pair": pair,
        "weights": weights,
        # Outputs will be populated by the nodes
        "state": None,
        "pending": None,
        "iterations": [],
        "trailing": [],
    }
    create_sorting_flow().run(shared)

    iterations = tuple(shared["iterations"])
    loop_ops = [op for it in iterations for op in it.ops if op.kind != "virtual"]
    sequence = tuple(loop_ops + list(shared["trailing"]))
    final = apply_sequence(pair.source, sequence)
    if final != pair.target:
        raise StepSearchError(f"sequence ends on {final.describe()} instead of {pair.target.describe()}")

    try:
        factor = approximation_factor(weights)
    except WeightSchemeError:
        factor = None
    report = RunReport(
        sequence=sequence,
        total_weight=weights.sequence_weight(sequence),
        iterations=iterations,
        lower_bound=lower_bound(pair, weights),
        factor=factor,
        final_genome=final,
        virtual_insertions=sum(1 for it in iterations for op in it.ops if op.kind == "virtual"),
        materialized_deletions=len(shared["trailing"]),
    )
    logger.debug("run finished: %d operations, weight %s", len(sequence), report.total_weight)
    return report
