"""Hybrid classical / simulated-variational-quantum unit commitment solver.

A three-part decomposition: per-time-step commitment subproblems solved by a
simulated QAOA over unit bits plus reserve slack bits, a penalized continuous
dispatch for the committed powers, and an outer loop alternating the two,
finished by a high-penalty dispatch polish.  Exhaustive and DP reference
solvers plus a full constraint audit validate the results.
"""

from importlib import resources

from .cost import (
    AuditTolerances,
    CostBreakdown,
    FeasibilityReport,
    audit,
    fuel_cost,
    production_cost,
    startup_cost,
)
from .dispatch import dispatch_objective, optimize_dispatch
from .hybrid import HybridConfig, HybridSolution, convergence_iteration, solve
from .model import (
    Dispatch,
    InitialCondition,
    Instance,
    Schedule,
    UnitSpec,
    compute_history,
    operating_range,
    parse_instance,
    serialize_instance,
)
from .optim import OptimProblem, OptimResult, minimize
from .qaoa import (
    QaoaConfig,
    QaoaResult,
    RelaxedSolution,
    StateVector,
    apply_phase_separator,
    apply_standard_mixer,
    apply_warm_start_mixer,
    expectation,
    init_standard,
    init_warm_start,
    run_qaoa,
    solve_relaxed,
)
from .qubo import (
    IsingModel,
    PenaltyWeights,
    QuboProblem,
    TimeStepContext,
    build_context,
    build_qubo,
    evaluate_qubo,
    qubo_to_ising,
    slack_bits_for_range,
)
from .reference import ReferenceLimits, solve_dp, solve_exact

__version__ = "0.1.0"


def packaged_instance(name: str) -> Instance:
    """Load one of the shipped benchmark instances by name (e.g. 'uc_4a')."""
    text = resources.files("uchybrid.data").joinpath(f"{name}.json").read_text()
    return parse_instance(text)


def packaged_solution(name: str, kind: str) -> dict:
    """Load a shipped solution fixture ('reference', 'standard', 'warm_start')."""
    import json

    text = (
        resources.files("uchybrid.data")
        .joinpath("solutions")
        .joinpath(f"{name}_{kind}.json")
        .read_text()
    )
    return json.loads(text)
