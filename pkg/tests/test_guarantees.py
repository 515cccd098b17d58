"""Seeded, large-sample checks of the per-operation bounds, the step claims and
the approximation factor. Each class runs in seconds to a few minutes."""

import random
import unittest
from collections import Counter

import pytest

from src.approx_algorithm import WeightScheme, approximation_factor, guaranteed_ratio, run
from src.breakpoint_graph import delta_measures, measure_genomes
from src.exact_oracle import OracleLimitError, OracleLimits, SearchContext, exact_distance, iter_operations
from src.genome_model import apply_operation
from src.rearrangement_steps import CLAIMS
from src.utils.instances import InstanceSpec, generate_instance

GUARANTEED_SCHEMES = [
    WeightScheme(2, 3, 2, 4, 1),
    WeightScheme(2, 3, 1, 1, 1),
    WeightScheme(1, 2, 1, 4, 1),
    WeightScheme(2, 4, 1, 1, 1),
]

# largest (delta c, delta c_g) one operation of each kind can reach
OPERATION_CAPS = {
    "reversal": (1, 1),
    "transposition": (2, 2),
    "insertion": (0, 1),
    "deletion": (0, 1),
}


def random_spec(rng: random.Random, max_genes: int, max_region: int) -> InstanceSpec:
    return InstanceSpec(
        m=rng.randint(1, max_genes),
        k=rng.randint(0, 4),
        max_region=rng.randint(0, max_region),
        exclusive_counts=(rng.randint(0, 1), rng.randint(0, 1)),
        seed=rng.getrandbits(32),
    )


@pytest.mark.slow
class TestOperationBounds(unittest.TestCase):

    SAMPLES_PER_KIND = 8

    def test_no_operation_exceeds_its_cap(self):
        rng = random.Random(20240601)
        counts = Counter()
        while sum(counts.values()) < 10_000:
            pair = generate_instance(random_spec(rng, max_genes=5, max_region=3))
            source, target = pair.source, pair.target
            context = SearchContext(
                target=target,
                weights=GUARANTEED_SCHEMES[0],
                cap=source.total_nucleotides + target.total_nucleotides,
            )
            by_kind: dict[str, list] = {}
            for op in iter_operations(source, context):
                by_kind.setdefault(op.kind, []).append(op)
            before = measure_genomes(source, target)
            for kind, ops in by_kind.items():
                for op in rng.sample(ops, min(len(ops), self.SAMPLES_PER_KIND)):
                    dc, dcg = delta_measures(before, measure_genomes(apply_operation(source, op), target))
                    cap_c, cap_cg = OPERATION_CAPS[kind]
                    self.assertLessEqual(dc, cap_c, f"{op.describe()} on {source}")
                    self.assertLessEqual(dcg, cap_cg, f"{op.describe()} on {source}")
                    counts[kind] += 1
        self.assertGreaterEqual(sum(counts.values()), 10_000)
        for kind in OPERATION_CAPS:
            self.assertGreater(counts[kind], 500, kind)


@pytest.mark.slow
class TestStepClaims(unittest.TestCase):

    def test_every_iteration_keeps_its_claim(self):
        rng = random.Random(7)
        steps = Counter()
        for number in range(1_000):
            weights = GUARANTEED_SCHEMES[number % len(GUARANTEED_SCHEMES)]
            pair = generate_instance(random_spec(rng, max_genes=6, max_region=4), weights)
            report = run(pair, weights)
            floor = guaranteed_ratio(weights)
            for it in report.iterations:
                dc, dcg = (1, 1) if it.step_id == "VII" else CLAIMS[it.step_id]
                self.assertEqual(it.claimed, CLAIMS[it.step_id])
                self.assertGreaterEqual(it.measured[0], dc, f"step {it.step_id} on {pair}")
                self.assertGreaterEqual(it.measured[1], dcg, f"step {it.step_id} on {pair}")
                self.assertLess(it.potential_after, it.potential_before)
                if it.step_id == "VII":
                    self.assertGreaterEqual(it.ratio, floor)
                steps[it.step_id] += 1
            self.assertEqual(report.final_genome, pair.target)
        self.assertGreater(steps["I"] + steps["II"], 0)
        self.assertGreater(steps["III"] + steps["IV"], 0)
        self.assertGreater(steps["V"] + steps["VI"], 0)


@pytest.mark.slow
class TestCertification(unittest.TestCase):

    def test_algorithm_within_factor_of_optimum(self):
        rng = random.Random(1234)
        limits = OracleLimits(max_genes=4, max_nucleotides=12, max_states=20_000)
        certified = Counter()
        attempts = 0
        while sum(certified.values()) < 500:
            attempts += 1
            self.assertLess(attempts, 5_000, f"only {sum(certified.values())} instances certified")
            index = attempts % len(GUARANTEED_SCHEMES)
            weights = GUARANTEED_SCHEMES[index]
            pair = generate_instance(random_spec(rng, max_genes=4, max_region=2), weights)
            if not limits.admits(pair):
                continue
            report = run(pair, weights)
            try:
                result = exact_distance(pair, weights, limits, upper_bound=report.total_weight)
            except OracleLimitError:
                continue
            self.assertLessEqual(report.lower_bound, result.weight, str(pair))
            self.assertLessEqual(result.weight, report.total_weight, str(pair))
            self.assertLessEqual(report.total_weight, approximation_factor(weights) * result.weight, str(pair))
            certified[index] += 1
        self.assertEqual(len(certified), len(GUARANTEED_SCHEMES))


if __name__ == "__main__":
    unittest.main()
