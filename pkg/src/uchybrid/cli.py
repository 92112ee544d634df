"""Command-line interface: run, evaluate, compare and reference modes."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from typing import Optional

import numpy as np

from .cost import audit, production_cost
from .hybrid import HybridConfig, solve
from .model import (
    Dispatch,
    InfeasibleInstanceError,
    Instance,
    ParseError,
    Schedule,
    ValidationError,
    parse_instance,
)
from .qaoa import QaoaConfig
from .qubo import build_context, build_qubo
from .reference import ReferenceLimits, SizeLimitError, solve_dp, solve_exact

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


def _load_instance(path: str) -> Instance:
    with open(path) as fh:
        return parse_instance(fh.read())


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _mode_key(mode: str) -> str:
    return mode.replace("-", "_")


def _hybrid_config(args, mode: str) -> HybridConfig:
    qaoa = QaoaConfig(
        layers=args.layers,
        mode=_mode_key(mode),
        shots=args.shots,
        maxiter=args.qaoa_maxiter,
        restarts=args.restarts,
        max_qubits=int(os.environ["UC_HYBRID_MAX_QUBITS"])
        if os.environ.get("UC_HYBRID_MAX_QUBITS")
        else None,
    )
    return HybridConfig(
        n_it=args.n_it,
        lambda_loop=args.lambda_loop,
        lambda_final=args.lambda_final,
        qaoa=qaoa,
        seed=args.seed,
    )


def _solution_payload(instance: Instance, solution) -> dict:
    return {
        "instance": instance.name,
        **solution.to_dict(),
    }


def cmd_run(args) -> int:
    instance = _load_instance(args.instance)
    cfg = _hybrid_config(args, args.mode)

    trace_hook = None
    qaoa_rows: list[dict] = []
    if args.trace_qaoa:
        def trace_hook(sweep, t, result):
            gammas, betas = result.optimal_params
            qaoa_rows.append(
                {
                    "sweep": sweep,
                    "t": t + 1,
                    "evaluations": result.evaluations,
                    "gammas": list(map(float, gammas)),
                    "betas": list(map(float, betas)),
                    "expectation": result.best_expectation,
                }
            )

    if args.dump_qubo:
        _dump_first_qubo(instance, cfg, args.dump_qubo)

    solution = solve(instance, cfg, trace_hook=trace_hook)
    payload = _solution_payload(instance, solution)
    payload["mode"] = _mode_key(args.mode)
    payload["seed"] = args.seed
    if not args.trace:
        payload.pop("trace")
    _emit(payload, args.out)
    if args.trace_qaoa:
        with open(args.trace_qaoa, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["evaluation", "sweep", "t", "gammas", "betas", "expectation"])
            for k, row in enumerate(qaoa_rows):
                writer.writerow(
                    [k, row["sweep"], row["t"], row["gammas"], row["betas"], row["expectation"]]
                )
    return EXIT_OK if solution.audit.feasible else EXIT_INFEASIBLE


def _dump_first_qubo(instance: Instance, cfg: HybridConfig, path: str) -> None:
    from .model import compute_history

    n, horizon = instance.n_units, instance.horizon
    y = np.zeros((n, horizon), dtype=np.int8)
    schedule = Schedule(y)
    history = compute_history(instance, schedule)
    powers = instance.p_max.astype(float)
    ctx = build_context(
        instance, schedule, Dispatch(p=np.zeros((n, horizon))), history, 0, powers=powers
    )
    problem = build_qubo(instance, ctx, cfg.weights)
    upper = [
        {"i": i, "j": j, "value": float(problem.quadratic[i, j])}
        for i in range(problem.n_bits)
        for j in range(i, problem.n_bits)
        if problem.quadratic[i, j] != 0.0
    ]
    doc = {
        "t": 1,
        "n_decision": problem.n_decision,
        "n_slack": problem.n_slack,
        "linear": problem.linear.tolist(),
        "quadratic_upper": upper,
        "constant": problem.constant,
        "slack_layout": [
            {"constraint": name, "bits": list(rng), "weights": list(weights)}
            for name, rng, weights in problem.slack_layout
        ],
        "covering_terms": [
            {
                "weight": term.weight,
                "coeffs": term.coeffs.tolist(),
                "target": term.target,
            }
            for term in problem.deficit_terms
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)


def cmd_evaluate(args) -> int:
    instance = _load_instance(args.instance)
    with open(args.solution) as fh:
        doc = json.load(fh)
    try:
        schedule = Schedule(np.array(doc["schedule"]))
        dispatch = Dispatch(np.array(doc["dispatch"]))
        cost = production_cost(instance, schedule, dispatch)
        report = audit(instance, schedule, dispatch)
    except (KeyError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    payload = {
        "instance": instance.name,
        "cost": cost.to_dict(),
        "feasibility": report.to_dict(),
    }
    _emit(payload, args.out)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_reference(args) -> int:
    instance = _load_instance(args.instance)
    limits = ReferenceLimits()
    try:
        if args.method == "exact":
            solution = solve_exact(instance, limits)
        else:
            solution = solve_dp(instance, limits)
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    payload = _solution_payload(instance, solution)
    payload["method"] = args.method
    payload.pop("trace")
    _emit(payload, args.out)
    return EXIT_OK if solution.audit.feasible else EXIT_INFEASIBLE


def _reference_for_compare(instance: Instance):
    limits = ReferenceLimits()
    if instance.n_units * instance.horizon <= limits.max_bits:
        return solve_exact(instance, limits)
    return solve_dp(instance, limits)


def cmd_compare(args) -> int:
    instance = _load_instance(args.instance)
    writer = csv.writer(sys.stdout if not args.out else open(args.out, "w", newline=""))
    writer.writerow(
        ["instance", "mode", "seed", "cost", "feasible", "convergence_iteration"]
    )
    if args.seeds <= 0:
        return EXIT_OK

    reference = _reference_for_compare(instance)
    writer.writerow(
        [instance.name, "reference", "", f"{reference.cost.total:.2f}",
         reference.audit.feasible, ""]
    )
    from collections import Counter

    for mode in ("standard", "warm-start"):
        outcomes = []
        for seed in range(args.seeds):
            cfg = _hybrid_config(args, mode)
            cfg = replace(cfg, seed=seed)
            try:
                sol = solve(instance, cfg)
            except Exception as exc:  # keep the table going, mark the row
                writer.writerow([instance.name, _mode_key(mode), seed, f"error: {exc}", "", ""])
                continue
            outcomes.append((round(sol.cost.total, 2), sol.audit.feasible, sol.convergence_iteration))
            writer.writerow(
                [instance.name, _mode_key(mode), seed, f"{sol.cost.total:.2f}",
                 sol.audit.feasible, sol.convergence_iteration]
            )
        if outcomes:
            modal_cost, modal_feasible, modal_conv = Counter(outcomes).most_common(1)[0][0]
            gap = (modal_cost - reference.cost.total) / reference.cost.total
            writer.writerow(
                [instance.name, f"summary_{_mode_key(mode)}", "modal",
                 f"{modal_cost:.2f}", modal_feasible, f"gap_to_reference={gap:.4f}"]
            )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uchybrid",
        description="Hybrid commitment/dispatch solver with a simulated "
        "variational quantum subsolver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--shots", type=int, default=4096)
        p.add_argument("--layers", type=int, default=1)
        p.add_argument("--n-it", dest="n_it", type=int, default=None)
        p.add_argument("--lambda-loop", dest="lambda_loop", type=float, default=0.5)
        p.add_argument("--lambda-final", dest="lambda_final", type=float, default=1e4)
        p.add_argument("--restarts", type=int, default=1)
        p.add_argument("--qaoa-maxiter", dest="qaoa_maxiter", type=int, default=1000)
        p.add_argument("--out", default=None)

    run = sub.add_parser("run", help="run the hybrid solver on an instance")
    run.add_argument("instance")
    run.add_argument("--mode", choices=["standard", "warm-start", "warm_start"],
                     default="warm-start")
    run.add_argument("--trace", action="store_true")
    run.add_argument("--trace-qaoa", dest="trace_qaoa", default=None)
    run.add_argument("--dump-qubo", dest="dump_qubo", default=None)
    add_common(run)
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("evaluate", help="cost and feasibility of a solution file")
    ev.add_argument("instance")
    ev.add_argument("solution")
    ev.add_argument("--out", default=None)
    ev.set_defaults(func=cmd_evaluate)

    comp = sub.add_parser("compare", help="standard vs warm-start vs reference CSV")
    comp.add_argument("instance")
    comp.add_argument("--seeds", type=int, default=5)
    add_common(comp)
    comp.set_defaults(func=cmd_compare)

    ref = sub.add_parser("reference", help="classical reference solver")
    ref.add_argument("instance")
    ref.add_argument("--method", choices=["exact", "dp"], default="exact")
    ref.add_argument("--out", default=None)
    ref.set_defaults(func=cmd_reference)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ParseError, InfeasibleInstanceError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
