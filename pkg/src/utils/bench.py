import csv
import io
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..approx_algorithm import WeightScheme, WeightSchemeError, approximation_factor, run
from ..exact_oracle import OracleLimitError, OracleLimits, exact_distance
from ..genome_model import NormalizedPair
from .instances import InstanceSpec
from .pair_file import write_pair_file
from .run_log import log_step

CSV_HEADER = ("instance", "scheme", "alg_weight", "lower_bound", "oracle_weight", "ratio")


@dataclass(frozen=True)
class BenchRow:
    instance: str
    scheme: str
    alg_weight: Fraction
    lower_bound: Fraction
    oracle_weight: Fraction | None
    ratio: Fraction
    factor: Fraction | None

    @property
    def violations(self) -> list[str]:
        found = []
        if self.factor is not None and self.ratio > self.factor:
            found.append(f"ratio {self.ratio} exceeds factor {self.factor}")
        if self.lower_bound > self.alg_weight:
            found.append(f"lower bound {self.lower_bound} exceeds algorithm weight {self.alg_weight}")
        if self.oracle_weight is not None and not self.lower_bound <= self.oracle_weight <= self.alg_weight:
            found.append(
                f"oracle weight {self.oracle_weight} outside [{self.lower_bound}, {self.alg_weight}]"
            )
        return found

    def csv_fields(self) -> tuple[str, ...]:
        oracle = "" if self.oracle_weight is None else str(self.oracle_weight)
        return (
            self.instance, self.scheme, str(self.alg_weight), str(self.lower_bound), oracle, str(self.ratio)
        )


@dataclass(frozen=True)
class SchemeSummary:
    scheme: str
    rows: int
    max_ratio: Fraction
    mean_ratio: Fraction
    violations: int


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    pairs: dict[str, NormalizedPair] = field(default_factory=dict)

    @property
    def violations(self) -> list[BenchRow]:
        return [row for row in self.rows if row.violations]

    def violating_pairs(self) -> list[tuple[str, NormalizedPair]]:
        """Each instance with at least one violating row, once, in row order."""
        seen: dict[str, NormalizedPair] = {}
        for row in self.violations:
            if row.instance not in seen and row.instance in self.pairs:
                seen[row.instance] = self.pairs[row.instance]
        return list(seen.items())

    def summaries(self) -> list[SchemeSummary]:
        by_scheme: dict[str, list[BenchRow]] = {}
        for row in self.rows:
            by_scheme.setdefault(row.scheme, []).append(row)
        return [
            SchemeSummary(
                scheme=scheme,
                rows=len(rows),
                max_ratio=max(r.ratio for r in rows),
                mean_ratio=sum((r.ratio for r in rows), Fraction(0)) / len(rows),
                violations=sum(1 for r in rows if r.violations),
            )
            for scheme, rows in by_scheme.items()
        ]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow(row.csv_fields())
        return buffer.getvalue()


def bench_ratio(alg_weight: Fraction, lower: Fraction, oracle: Fraction | None) -> Fraction:
    """Algorithm weight over the best known lower estimate of the optimum."""
    denominator = max(lower, oracle) if oracle is not None else lower
    if denominator == 0:
        return Fraction(1) if alg_weight == 0 else Fraction(alg_weight)
    return Fraction(alg_weight) / denominator


def solve_instance(
    instance: str,
    pair: NormalizedPair,
    scheme_name: str,
    weights: WeightScheme,
    oracle_limits: OracleLimits | None = None,
) -> BenchRow:
    report = run(pair, weights)
    oracle = None
    if oracle_limits is not None and oracle_limits.admits(pair):
        try:
            oracle = exact_distance(pair, weights, oracle_limits, upper_bound=report.total_weight).weight
        except OracleLimitError as e:
            log_step("bench", "oracle skipped %s under %s: %s", instance, scheme_name, e)
    try:
        factor = approximation_factor(weights)
    except WeightSchemeError:
        factor = None
    return BenchRow(
        instance=instance,
        scheme=scheme_name,
        alg_weight=report.total_weight,
        lower_bound=report.lower_bound,
        oracle_weight=oracle,
        ratio=bench_ratio(report.total_weight, report.lower_bound, oracle),
        factor=factor,
    )


def write_violations(report: BenchReport, directory: str) -> list[str]:
    """One pair file per violating instance, for replay with ``dist``."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for instance, pair in report.violating_pairs():
        path = os.path.join(directory, f"{instance}.pair")
        with open(path, "w", encoding="utf-8") as f:
            f.write(write_pair_file(pair))
        written.append(path)
    return written


def bench(
    specs: Sequence[InstanceSpec],
    schemes: Sequence[tuple[str, WeightScheme]],
    oracle_limits: OracleLimits | None = None,
    output_path: str | None = None,
    violations_dir: str | None = None,
) -> BenchReport:
    """Run every scheme on every generated instance; rows follow instance then scheme order."""
    from ..flow import create_bench_flow

    shared = {
        "specs": list(specs),
        "schemes": list(schemes),
        "oracle_limits": oracle_limits,
        "output_path": output_path,
        "violations_dir": violations_dir,
        # Outputs will be populated by the nodes
        "instances": [],
        "rows": [],
        "report": None,
        "violation_files": [],
    }
    create_bench_flow().run(shared)
    return shared["report"]
