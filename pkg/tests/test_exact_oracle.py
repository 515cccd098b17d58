import os
import unittest
from collections import Counter
from fractions import Fraction
from unittest.mock import patch

from hypothesis import assume, given, settings, strategies as st

from src.approx_algorithm import WeightScheme, approximation_factor, lower_bound, run
from src.exact_oracle import (
    OracleLimitError,
    OracleLimits,
    SearchContext,
    SearchState,
    enumerate_moves,
    exact_distance,
    iter_operations,
)
from src.genome_model import ALPHA, Genome, NormalizedPair, apply_sequence
from src.utils.instances import InstanceSpec, generate_instance
from src.utils.pair_file import read_pair_file

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
DEFAULT = WeightScheme(2, 3, 2, 4, 1)
GUARANTEED_SCHEMES = [
    WeightScheme(2, 3, 2, 4, 1),
    WeightScheme(2, 3, 1, 1, 1),
    WeightScheme(1, 2, 1, 4, 1),
    WeightScheme(2, 4, 1, 1, 1),
]


class TestOracleLimits(unittest.TestCase):

    def setUp(self):
        self.original_env_vars = {}
        for var in ("ORACLE_MAX_GENES", "ORACLE_MAX_NUCLEOTIDES", "ORACLE_MAX_STATES"):
            if var in os.environ:
                self.original_env_vars[var] = os.environ.pop(var)

    def tearDown(self):
        for var in ("ORACLE_MAX_GENES", "ORACLE_MAX_NUCLEOTIDES", "ORACLE_MAX_STATES"):
            os.environ.pop(var, None)
        os.environ.update(self.original_env_vars)

    def test_defaults(self):
        self.assertEqual(OracleLimits.from_env(), OracleLimits(4, 12, 200_000))

    def test_environment_overrides(self):
        with patch.dict(os.environ, {"ORACLE_MAX_GENES": "3", "ORACLE_MAX_STATES": "50"}):
            self.assertEqual(OracleLimits.from_env(), OracleLimits(3, 12, 50))

    def test_invalid_environment_value(self):
        with patch.dict(os.environ, {"ORACLE_MAX_NUCLEOTIDES": "many"}):
            with self.assertRaises(ValueError) as ctx:
                OracleLimits.from_env()
            self.assertIn("ORACLE_MAX_NUCLEOTIDES", str(ctx.exception))

    def test_large_instance_refused(self):
        g = Genome((1, 2, 3, 4, 5), (0, 0, 0, 0, 0, 0))
        with self.assertRaises(OracleLimitError):
            exact_distance(NormalizedPair(g, g), DEFAULT, OracleLimits())
        heavy = Genome((1,), (7, 7))
        with self.assertRaises(OracleLimitError):
            exact_distance(NormalizedPair(heavy, heavy), DEFAULT, OracleLimits())


class TestMoves(unittest.TestCase):

    def test_hand_count_on_two_genes(self):
        g = Genome((1, 2), (1, 1, 1))
        context = SearchContext(target=g, weights=DEFAULT, cap=6)
        counts = Counter(op.kind for op in iter_operations(g, context))
        self.assertEqual(counts["reversal"], 12)
        self.assertEqual(counts["transposition"], 8)
        self.assertEqual(counts["deletion"], 3)
        # amounts 1..3 into each of 3 regions
        self.assertEqual(counts["insertion"], 9)

    def test_single_gene_moves(self):
        g = Genome((1,), (0, 0))
        context = SearchContext(target=Genome((1,), (3, 0)), weights=DEFAULT, cap=3)
        ops = list(iter_operations(g, context))
        reversals = [op for op in ops if op.kind == "reversal"]
        self.assertEqual(len(reversals), 1)
        self.assertFalse([op for op in ops if op.kind == "deletion"])
        amounts = sorted({op.regions[0] for op in ops if op.kind == "insertion"})
        self.assertEqual(amounts, [1, 2, 3])

    def test_alpha_can_be_deleted(self):
        g = Genome((ALPHA, 1), (1, 0, 0))
        context = SearchContext(target=Genome((1,), (0, 0)), weights=DEFAULT, cap=1)
        moves = enumerate_moves(SearchState(g, Fraction(0)), context)
        genomes = [state.genome for _, state in moves]
        self.assertIn(Genome((1,), (0, 0)), genomes)
        self.assertEqual(len(genomes), len(set(genomes)))
        self.assertNotIn(g, genomes)

    def test_missing_genes_can_be_inserted(self):
        g = Genome((1,), (0, 0))
        target = Genome((1, 2), (0, 0, 0))
        context = SearchContext(target=target, weights=DEFAULT, cap=0)
        inserted = {op.genes for op in iter_operations(g, context) if op.kind == "insertion"}
        self.assertEqual(inserted, {(2,), (-2,)})


class TestExactDistance(unittest.TestCase):

    def test_identical_genomes(self):
        g = Genome((1, -2), (1, 0, 2))
        result = exact_distance(NormalizedPair(g, g), DEFAULT, OracleLimits())
        self.assertEqual(result.weight, 0)
        self.assertEqual(result.witness, ())

    def test_single_forced_insertion(self):
        pair = NormalizedPair(Genome((1,), (0, 0)), Genome((1,), (3, 0)))
        for scheme in GUARANTEED_SCHEMES:
            result = exact_distance(pair, scheme, OracleLimits())
            self.assertEqual(result.weight, scheme.w_indel)
            self.assertEqual(len(result.witness), 1)
            self.assertEqual(result.witness[0].kind, "insertion")

    def test_three_gene_pair_sandwich(self):
        pair = read_pair_file(os.path.join(DATA_DIR, "three_genes.pair"))
        result = exact_distance(pair, DEFAULT, OracleLimits(), upper_bound=6)
        self.assertEqual(result.weight, 6)
        self.assertEqual(apply_sequence(pair.source, result.witness), pair.target)
        self.assertEqual(DEFAULT.sequence_weight(result.witness), result.weight)
        self.assertGreaterEqual(result.weight, lower_bound(pair, DEFAULT))

    def test_uniform_cost_agrees_with_heuristic(self):
        pair = NormalizedPair(Genome((2, 1), (0, 1, 0)), Genome((1, 2), (0, 1, 0)))
        guided = exact_distance(pair, DEFAULT, OracleLimits())
        plain = exact_distance(pair, DEFAULT, OracleLimits(), heuristic=False)
        self.assertEqual(guided.weight, plain.weight)
        self.assertLessEqual(guided.explored, plain.explored)

    def test_no_caveat_when_only_deletions_are_needed(self):
        pair = NormalizedPair(Genome((1,), (2, 2)), Genome((1,), (0, 0)))
        result = exact_distance(pair, DEFAULT, OracleLimits())
        self.assertEqual(result.weight, 4)
        self.assertFalse(result.exactness_caveat)

    def test_state_budget(self):
        pair = NormalizedPair(Genome((3, 2, 1), (1, 0, 0, 1)), Genome((1, 2, 3), (0, 1, 1, 0)))
        with self.assertRaises(OracleLimitError):
            exact_distance(pair, DEFAULT, OracleLimits(max_states=2), heuristic=False)


class TestCertification(unittest.TestCase):

    @settings(max_examples=25, deadline=None)
    @given(
        m=st.integers(1, 3),
        k=st.integers(0, 2),
        max_region=st.integers(0, 2),
        exclusive=st.tuples(st.integers(0, 1), st.integers(0, 1)),
        seed=st.integers(0, 2**32),
        scheme_index=st.integers(0, 3),
    )
    def test_algorithm_within_factor_of_optimum(self, m, k, max_region, exclusive, seed, scheme_index):
        scheme = GUARANTEED_SCHEMES[scheme_index]
        pair = generate_instance(InstanceSpec(m, k, max_region, exclusive, seed), scheme)
        limits = OracleLimits(max_genes=4, max_nucleotides=8, max_states=200_000)
        assume(limits.admits(pair))
        report = run(pair, scheme)
        result = exact_distance(pair, scheme, limits, upper_bound=report.total_weight)
        self.assertLessEqual(report.lower_bound, result.weight)
        self.assertLessEqual(result.weight, report.total_weight)
        self.assertLessEqual(report.total_weight, approximation_factor(scheme) * result.weight)


if __name__ == "__main__":
    unittest.main()
