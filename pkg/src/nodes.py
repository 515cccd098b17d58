import logging

from .approx_algorithm import IterationRecord
from .rearrangement_steps import (
    SortingState,
    StepSearchError,
    materialize_virtual_insertions,
    select_step,
    step_bad_oriented,
    step_good_divergent,
    step_good_oriented,
    step_labeled_divergent,
    step_no_divergent,
    step_trivial_bad,
    step_unbalanced_clean,
)
from .pocketflow import BatchNode, Node
from .utils.bench import BenchReport, solve_instance, write_violations
from .utils.instances import generate_instance
from .utils.run_log import log_step


# --- Sorting loop ---

class StartSorting(Node):
    def prep(self, shared):
        return shared["pair"]

    def exec(self, pair):
        return SortingState(pair.source, pair.target)

    def post(self, shared, prep_res, exec_res):
        shared["state"] = exec_res
        m = exec_res.measures
        log_step("select", "start: %s, b=%d, b_g=%d", prep_res.source.describe(), m.b, m.b_g)


class SelectStep(Node):
    """Picks the highest-priority step; the action is its id, or ``done``."""

    def prep(self, shared):
        return shared["state"]

    def exec(self, state):
        return select_step(state)

    def post(self, shared, prep_res, exec_res):
        shared["pending"] = exec_res
        if exec_res is None:
            return "done"
        step_id, cycle = exec_res
        log_step("select", "step %s on %s", step_id, cycle.describe() if cycle else "no divergent cycle")
        return step_id


class ApplyStep(Node):
    step_id = ""

    def plan(self, state, cycle, weights):
        raise NotImplementedError

    def prep(self, shared):
        _, cycle = shared["pending"]
        return shared["state"], cycle, shared["weights"]

    def exec(self, prep_res):
        state, cycle, weights = prep_res
        return self.plan(state, cycle, weights)

    def exec_fallback(self, prep_res, exc):
        log_step(self.step_id, "search failed: %s", exc, level=logging.ERROR)
        raise exc

    def post(self, shared, prep_res, exec_res):
        state, _, weights = prep_res
        plan = exec_res
        after = state.replay(plan.ops)
        before_m, after_m = state.measures, after.measures
        if after_m.b + after_m.b_g >= before_m.b + before_m.b_g:
            raise StepSearchError(
                f"step {self.step_id} made no progress: b+b_g {before_m.b + before_m.b_g} -> "
                f"{after_m.b + after_m.b_g}\n{state.dump()}"
            )
        record = IterationRecord(
            step_id=self.step_id,
            ops=plan.ops,
            claimed=plan.claimed,
            measured=plan.measured,
            weight=weights.sequence_weight(plan.ops),
            ratio=weights.progress_ratio(plan.measured[0], plan.measured[1], plan.ops),
            potential_before=weights.potential(before_m),
            potential_after=weights.potential(after_m),
        )
        shared["iterations"].append(record)
        shared["state"] = after
        log_step(
            self.step_id,
            "%s measured %s weight %s",
            "; ".join(op.describe() for op in plan.ops), plan.measured, record.weight,
        )
        return "default"


class RemoveTrivialBad(ApplyStep):
    step_id = "I"

    def plan(self, state, cycle, weights):
        return step_trivial_bad(cycle, state)


class BalanceCleanCycle(ApplyStep):
    step_id = "II"

    def plan(self, state, cycle, weights):
        return step_unbalanced_clean(cycle, state)


class SortGoodOriented(ApplyStep):
    step_id = "III"

    def plan(self, state, cycle, weights):
        return step_good_oriented(cycle, state, weights)


class SortBadOriented(ApplyStep):
    step_id = "IV"

    def plan(self, state, cycle, weights):
        return step_bad_oriented(cycle, state)


class SplitLabeledDivergent(ApplyStep):
    step_id = "V"

    def plan(self, state, cycle, weights):
        return step_labeled_divergent(cycle, state)


class SplitGoodDivergent(ApplyStep):
    step_id = "VI"

    def plan(self, state, cycle, weights):
        return step_good_divergent(cycle, state)


class SortNoDivergent(ApplyStep):
    step_id = "VII"

    def plan(self, state, cycle, weights):
        return step_no_divergent(state, weights)


class MaterializeVirtuals(Node):
    def prep(self, shared):
        return shared["state"]

    def exec(self, state):
        return materialize_virtual_insertions(state.source, state.target, state.ledger_map)

    def post(self, shared, prep_res, exec_res):
        shared["trailing"] = exec_res
        if exec_res:
            log_step("materialize", "%d trailing deletions", len(exec_res))


# --- Bench pipeline ---

class GenerateInstances(BatchNode):
    def prep(self, shared):
        schemes = shared["schemes"]
        # scrambling follows the first scheme's weights
        weights = schemes[0][1] if schemes else None
        return [(spec, weights) for spec in shared["specs"]]

    def exec(self, item):
        spec, weights = item
        return spec.instance_id, generate_instance(spec, weights)

    def post(self, shared, prep_res, exec_res_list):
        shared["instances"] = exec_res_list
        log_step("bench", "generated %d instances", len(exec_res_list))


class SolveInstances(BatchNode):
    def prep(self, shared):
        limits = shared.get("oracle_limits")
        return [
            (instance_id, pair, name, scheme, limits)
            for instance_id, pair in shared["instances"]
            for name, scheme in shared["schemes"]
        ]

    def exec(self, item):
        return solve_instance(*item)

    def post(self, shared, prep_res, exec_res_list):
        shared["rows"] = exec_res_list


class WriteReport(Node):
    def prep(self, shared):
        return shared["rows"], dict(shared["instances"]), shared.get("output_path")

    def exec(self, prep_res):
        rows, pairs, _ = prep_res
        return BenchReport(rows=list(rows), pairs=pairs)

    def post(self, shared, prep_res, exec_res):
        _, _, output_path = prep_res
        shared["report"] = exec_res
        if output_path:
            with open(output_path, "w", encoding="utf-8", newline="") as f:
                f.write(exec_res.to_csv())
        violations_dir = shared.get("violations_dir")
        if violations_dir and exec_res.violations:
            shared["violation_files"] = write_violations(exec_res, violations_dir)
        for summary in exec_res.summaries():
            log_step(
                "bench", "%s: %d rows, max ratio %s, %d violations",
                summary.scheme, summary.rows, summary.max_ratio, summary.violations,
            )
