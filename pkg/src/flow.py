from .pocketflow import Flow
from .nodes import (
    StartSorting,
    SelectStep,
    RemoveTrivialBad,
    BalanceCleanCycle,
    SortGoodOriented,
    SortBadOriented,
    SplitLabeledDivergent,
    SplitGoodDivergent,
    SortNoDivergent,
    MaterializeVirtuals,
    GenerateInstances,
    SolveInstances,
    WriteReport,
)

# Every iteration lowers b + b_g, so a loop can never need this many passes
MAX_TRANSITIONS = 100_000


def create_sorting_flow():
    """Creates the step-prioritized sorting loop."""

    start = StartSorting()
    select = SelectStep()
    materialize = MaterializeVirtuals()

    steps = {
        "I": RemoveTrivialBad(),
        "II": BalanceCleanCycle(),
        "III": SortGoodOriented(),
        "IV": SortBadOriented(),
        "V": SplitLabeledDivergent(),
        "VI": SplitGoodDivergent(),
        "VII": SortNoDivergent(),
    }

    start >> select
    for step_id, node in steps.items():
        select - step_id >> node
        node >> select
    select - "done" >> materialize

    return Flow(start=start, max_transitions=MAX_TRANSITIONS)


def create_bench_flow():
    """Creates the instance generation, solving and reporting pipeline."""

    generate = GenerateInstances()
    solve = SolveInstances()
    report = WriteReport()

    generate >> solve
    solve >> report

    return Flow(start=generate)
