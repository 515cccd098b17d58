import os
import unittest
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from src.approx_algorithm import (
    WeightScheme,
    WeightSchemeError,
    approximation_factor,
    delta_ccg,
    delta_max,
    lower_bound,
    run,
    step_delta_values,
    step_table,
)
from src.genome_model import (
    Deletion,
    Genome,
    Insertion,
    NormalizedPair,
    Reversal,
    Transposition,
    apply_sequence,
)
from src.rearrangement_steps import CLAIMS, _ACCEPT
from src.utils.instances import InstanceSpec, generate_instance
from src.utils.pair_file import read_pair_file

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

GUARANTEED_SCHEMES = [
    (WeightScheme(2, 3, 2, 4, 1), Fraction(10, 3)),
    (WeightScheme(2, 3, 1, 1, 1), Fraction(8, 3)),
    (WeightScheme(1, 2, 1, 4, 1), Fraction(5, 2)),
    (WeightScheme(2, 4, 1, 1, 1), Fraction(2)),
]


class TestWeightScheme(unittest.TestCase):

    def test_values_are_exact(self):
        scheme = WeightScheme("3/2", "1.5", 1, 1, 0)
        self.assertEqual(scheme.w_rev, Fraction(3, 2))
        self.assertEqual(scheme.w_trans, Fraction(3, 2))
        self.assertEqual(scheme.label, "3/2,3/2,1:1,0")

    def test_invalid_schemes(self):
        with self.assertRaises(WeightSchemeError):
            WeightScheme(0, 1, 1, 1, 1)
        with self.assertRaises(WeightSchemeError):
            WeightScheme(1, 1, 1, -1, 2)
        with self.assertRaises(WeightSchemeError):
            WeightScheme(1, 1, 1, 0, 0)
        with self.assertRaises(WeightSchemeError):
            WeightScheme("x", 1, 1, 1, 1)

    def test_op_weights(self):
        scheme = WeightScheme(2, 3, 5, 1, 1)
        ops = [Reversal(1, 1, 0, 0), Transposition(1, 2, 3, 0, 0, 0), Deletion(1, 1, 0, 1)]
        self.assertEqual(scheme.sequence_weight(ops), 10)
        self.assertEqual(scheme.sequence_weight([]), 0)


class TestFactorCalculus(unittest.TestCase):

    def test_published_factors(self):
        for scheme, expected in GUARANTEED_SCHEMES:
            with self.subTest(scheme=scheme.label):
                self.assertEqual(approximation_factor(scheme), expected)

    def test_delta_values(self):
        scheme = WeightScheme(2, 3, 2, 4, 1)
        self.assertEqual(delta_max(scheme), Fraction(10, 3))
        values = step_delta_values(scheme)
        self.assertEqual(values["I"], 1)
        self.assertEqual(values["III"], Fraction(10, 7))
        self.assertEqual(values["VII"], 1)
        self.assertEqual(min(values.values()), 1)

    def test_delta_ccg(self):
        scheme = WeightScheme(2, 3, 2, 4, 1)
        self.assertEqual(delta_ccg(scheme, 1, 1, 2), Fraction(5, 2))
        with self.assertRaises(WeightSchemeError):
            delta_ccg(scheme, 1, 1, 0)

    def test_unbounded_factor(self):
        with self.assertRaises(WeightSchemeError):
            approximation_factor(WeightScheme(1, 1, 1, 0, 1))

    def test_step_table_lists_one_indel_row(self):
        rows = step_table(WeightScheme(2, 3, 2, 4, 1))
        names = [row[0] for row in rows]
        self.assertEqual(names[:2], ["I", "I (one indel)"])
        self.assertEqual(len(rows), 8)
        self.assertEqual(max(row[2] for row in rows), Fraction(10, 3))

    def test_lower_bound_three_gene_pair(self):
        pair = read_pair_file(os.path.join(DATA_DIR, "three_genes.pair"))
        self.assertEqual(lower_bound(pair, WeightScheme(2, 3, 2, 4, 1)), Fraction(51, 10))


class TestRun(unittest.TestCase):

    def test_three_gene_pair(self):
        pair = read_pair_file(os.path.join(DATA_DIR, "three_genes.pair"))
        report = run(pair, WeightScheme(2, 3, 2, 4, 1))
        self.assertEqual(report.total_weight, 6)
        self.assertEqual(report.final_genome, pair.target)
        self.assertEqual([it.step_id for it in report.iterations], ["I", "I", "VI"])
        kinds = sorted(op.kind for op in report.sequence)
        self.assertEqual(kinds, ["deletion", "deletion", "reversal"])
        self.assertLessEqual(report.total_weight, report.factor * report.lower_bound)
        self.assertEqual(report.virtual_insertions, 0)

    def test_nine_gene_pair_reaches_target(self):
        pair = read_pair_file(os.path.join(DATA_DIR, "nine_genes.pair"))
        for scheme, _ in GUARANTEED_SCHEMES:
            with self.subTest(scheme=scheme.label):
                report = run(pair, scheme)
                self.assertEqual(apply_sequence(pair.source, report.sequence), pair.target)
                self.assertGreaterEqual(report.total_weight, report.lower_bound)

    def test_identical_genomes(self):
        g = Genome((1, 2), (1, 2, 3))
        report = run(NormalizedPair(g, g), WeightScheme(2, 3, 2, 4, 1))
        self.assertEqual(report.sequence, ())
        self.assertEqual(report.total_weight, 0)
        self.assertIsNone(report.min_local_ratio)

    def test_insertion_then_reversal(self):
        pair = NormalizedPair(Genome((-1,), (0, 0)), Genome((1,), (0, 1)))
        report = run(pair, WeightScheme(2, 3, 2, 4, 1))
        self.assertEqual([it.step_id for it in report.iterations], ["II", "VI"])
        self.assertEqual(report.sequence, (Insertion(2, (), (1,), 0), Reversal(1, 1, 0, 0)))
        self.assertEqual(report.total_weight, 4)

    def test_virtual_insertion_is_materialized(self):
        pair = NormalizedPair(Genome((-1,), (0, 1)), Genome((1,), (0, 0)))
        report = run(pair, WeightScheme(2, 3, 2, 4, 1))
        self.assertEqual(report.virtual_insertions, 1)
        self.assertEqual(report.materialized_deletions, 1)
        self.assertEqual(report.sequence, (Reversal(1, 1, 0, 1), Deletion(1, 1, 0, 1)))
        self.assertEqual(report.total_weight, 4)

    def test_swap_is_one_transposition(self):
        pair = NormalizedPair(Genome((2, 1), (0, 0, 0)), Genome((1, 2), (0, 0, 0)))
        report = run(pair, WeightScheme(2, 3, 2, 4, 1))
        self.assertEqual(report.sequence, (Transposition(1, 2, 3, 0, 0, 0),))

    def test_reversed_triple(self):
        pair = NormalizedPair(Genome((3, 2, 1), (0, 0, 0, 0)), Genome((1, 2, 3), (0, 0, 0, 0)))
        report = run(pair, WeightScheme(2, 3, 2, 4, 1))
        self.assertEqual(report.iterations[0].step_id, "VII")
        self.assertEqual(report.final_genome, pair.target)


class TestRunProperties(unittest.TestCase):

    @settings(max_examples=40, deadline=None)
    @given(
        m=st.integers(1, 5),
        k=st.integers(0, 4),
        max_region=st.integers(0, 4),
        exclusive=st.tuples(st.integers(0, 2), st.integers(0, 2)),
        seed=st.integers(0, 2**32),
        scheme_index=st.integers(0, 3),
    )
    def test_every_iteration_meets_its_step(self, m, k, max_region, exclusive, seed, scheme_index):
        scheme = GUARANTEED_SCHEMES[scheme_index][0]
        pair = generate_instance(InstanceSpec(m, k, max_region, exclusive, seed), scheme)
        report = run(pair, scheme)
        self.assertEqual(report.final_genome, pair.target)
        self.assertGreaterEqual(report.total_weight, report.lower_bound)
        self.assertLessEqual(report.materialized_deletions, report.virtual_insertions)
        progress = None
        for it in report.iterations:
            dc, dcg = _ACCEPT[it.step_id]
            self.assertGreaterEqual(it.measured[0], dc)
            self.assertGreaterEqual(it.measured[1], dcg)
            self.assertEqual(it.claimed, CLAIMS[it.step_id])
            self.assertGreater(it.potential_before, it.potential_after)
            if progress is not None:
                self.assertEqual(progress, it.potential_before)
            progress = it.potential_after


if __name__ == "__main__":
    unittest.main()
