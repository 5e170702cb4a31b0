"""Command-line front end.

Subcommands: ``solve``, ``evaluate``, ``simulate``, ``verify``,
``export-trellis``, ``export bar-loss`` and ``example``. All file arguments
accept ``-`` for the standard streams. Outputs are byte-stable: JSON is
emitted with sorted keys and floats fixed to 12 significant digits, DOT
labels carry 4 decimals, and nothing depends on wall-clock time.

Exit status is 0 on success, 1 on domain errors (reported as a single JSON
line on stderr) and 2 on usage errors. ``DYNINFER_SEED`` provides the
default for every ``--seed`` flag.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Any

import numpy as np

from . import examples as example_models
from .errors import DynamicInferenceError, InvalidModelError
from .evaluate import MarkovStrategy, evaluate_markov, simulate
from .model import Distribution, Problem, problem_to_dict, validate_problem
from .oracle import HistoryMode, OracleReport, brute_force_optimum, random_problem
from .reduction import bar_loss_table
from .solver import SolveResult, TieBreakRule, minimum_inference_loss, solve
from .trellis import export_trellis

GAP_TOLERANCE = 1e-9


def _round12(value: float) -> float:
    # fixed 12-significant-digit formatting keeps emitted JSON byte-stable
    return float(format(value, ".12g"))


def _canonical(obj: Any) -> Any:
    if isinstance(obj, float):
        return _round12(obj)
    if isinstance(obj, dict):
        return {key: _canonical(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(value) for value in obj]
    return obj


def _dump_json(obj: Any) -> str:
    return json.dumps(_canonical(obj), sort_keys=True, indent=2) + "\n"


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _read_json(path: str) -> Any:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InvalidModelError(f"{path}: not valid JSON: {exc}") from None


def _load_problem(path: str) -> Problem:
    return validate_problem(_read_json(path))


def _load_strategy(problem: Problem, path: str) -> MarkovStrategy:
    doc = _read_json(path)
    if not isinstance(doc, dict) or "policy" not in doc:
        raise InvalidModelError(f"{path}: strategy document must be an object with a 'policy' key")
    rows = doc["policy"]
    if not isinstance(rows, list):
        raise InvalidModelError(f"{path}: 'policy' must be an array of per-round objects")
    return MarkovStrategy.from_rows(problem, rows)


def _default_seed() -> int:
    return int(os.environ.get("DYNINFER_SEED", "0"))


def _parse_init(problem: Problem, text: str) -> Distribution:
    """An --init override: either a JSON label->probability object or a bare label."""
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidModelError(f"--init: not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise InvalidModelError("--init: expected an object mapping labels to probabilities")
        probs = np.zeros(len(problem.x_space))
        for label, value in doc.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidModelError(f"--init: probability for {label!r} must be a number")
            probs[problem.x_space.index(label)] = float(value)
        return Distribution(problem.x_space, probs)
    return Distribution.point_mass(problem.x_space, text)


def _solve_payload(problem: Problem, result: SolveResult, min_loss: float) -> dict:
    x_labels = problem.x_space.labels
    yhat_labels = problem.yhat_space.labels
    return {
        "n": problem.n,
        "tie_break": result.rule.value,
        "min_loss": min_loss,
        "v_star": [
            {x: float(result.v_star[k, xi]) for xi, x in enumerate(x_labels)}
            for k in range(problem.n)
        ],
        "q_star": [
            {
                x: {yhat: float(result.q_star[k, xi, ai]) for ai, yhat in enumerate(yhat_labels)}
                for xi, x in enumerate(x_labels)
            }
            for k in range(problem.n)
        ],
        "policy": [
            {x: yhat_labels[result.policy[k, xi]] for xi, x in enumerate(x_labels)}
            for k in range(problem.n)
        ],
        "ties": [
            {
                x: [yhat_labels[ai] for ai in result.tie_sets[k][xi]]
                for xi, x in enumerate(x_labels)
            }
            for k in range(problem.n)
        ],
    }


def _cmd_solve(args: argparse.Namespace) -> int:
    problem = _load_problem(args.model)
    result = solve(problem, TieBreakRule.from_name(args.tie_break))
    if args.init is not None:
        problem = dataclasses.replace(problem, init=_parse_init(problem, args.init))
    min_loss = minimum_inference_loss(problem, result)
    _write_text(args.output, _dump_json(_solve_payload(problem, result, min_loss)))
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    problem = _load_problem(args.model)
    strategy = _load_strategy(problem, args.strategy)
    result = evaluate_markov(problem, strategy)
    payload = {
        "j": result.j,
        "v": [
            {x: float(result.v[k, xi]) for xi, x in enumerate(problem.x_space.labels)}
            for k in range(problem.n)
        ],
    }
    _write_text(args.output, _dump_json(payload))
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    problem = _load_problem(args.model)
    strategy = _load_strategy(problem, args.strategy)
    result = simulate(problem, strategy, args.rollouts, args.seed)
    payload = {
        "mean": result.mean,
        "var": result.variance,
        "rollouts": result.rollouts,
        "seed": result.seed,
    }
    _write_text(args.output, _dump_json(payload))
    return 0


def _oracle_payload(report: OracleReport, instance: str | int, n: int, mode: HistoryMode) -> dict:
    x_labels = report.witness.x_labels
    y_labels = report.witness.y_labels
    yhat_labels = report.witness.yhat_labels
    witness = []
    for i, table in enumerate(report.witness.tables, start=1):
        for key in sorted(table):
            witness.append(
                {
                    "round": i,
                    "x_history": [x_labels[v] for v in key[:i]],
                    "y_history": [y_labels[v] for v in key[i:]],
                    "yhat": yhat_labels[table[key]],
                }
            )
    return {
        "instance": instance,
        "n": n,
        "mode": mode.value,
        "brute_min": report.brute_min,
        "dp_min": report.dp_min,
        "gap": report.gap,
        "strategies_searched": report.strategies_searched,
        "lemma1_pairs": [[lhs, rhs] for lhs, rhs in report.lemma1_pairs],
        "witness": witness,
    }


def _cmd_verify(args: argparse.Namespace) -> int:
    mode = HistoryMode(args.mode)
    gaps = []
    lines = []
    if args.instances is not None:
        rng = np.random.default_rng(args.seed)
        for index in range(args.instances):
            n = int(rng.integers(1, 4))
            problem = random_problem(rng, n)
            report = brute_force_optimum(problem, mode, args.limit)
            gaps.append(abs(report.gap))
            lines.append(_oracle_payload(report, index, n, mode))
    else:
        if args.model is None:
            raise InvalidModelError("verify needs --model or --instances")
        problem = _load_problem(args.model)
        report = brute_force_optimum(problem, mode, args.limit)
        gaps.append(abs(report.gap))
        lines.append(_oracle_payload(report, "model", problem.n, mode))
    gap_max = max(gaps)
    verdict = "PASS" if gap_max <= GAP_TOLERANCE else "FAIL"
    out = "".join(json.dumps(_canonical(line), sort_keys=True) + "\n" for line in lines)
    out += f"{verdict} gap_max={format(gap_max, '.3e')}\n"
    _write_text(args.output, out)
    return 0 if verdict == "PASS" else 1


def _cmd_export_trellis(args: argparse.Namespace) -> int:
    problem = _load_problem(args.model)
    result = solve(problem, TieBreakRule.from_name(args.tie_break))
    _write_text(args.output, export_trellis(problem, result, args.format))
    return 0


def _cmd_export_bar_loss(args: argparse.Namespace) -> int:
    problem = _load_problem(args.model)
    table = bar_loss_table(problem)
    rows = ["round,x,yhat,value"]
    for i in range(1, problem.n + 1):
        for xi, x in enumerate(problem.x_space):
            for ai, yhat in enumerate(problem.yhat_space):
                rows.append(f"{i},{x},{yhat},{format(table.values[i - 1, xi, ai], '.12g')}")
    _write_text(args.output, "\n".join(rows) + "\n")
    return 0


def _cmd_example(args: argparse.Namespace) -> int:
    if args.which == "section33":
        problem = example_models.example_section33(args.n)
    elif args.which == "stock":
        problem = example_models.example_stock(args.n)
    else:
        params = example_models.YieldParams(
            beta=args.beta,
            d_c=args.dc,
            grid=tuple(
                float(v)
                for v in np.arange(args.grid_min, args.grid_max + args.grid_step / 2, args.grid_step)
            ),
            c_missed=args.c_missed,
            c_danger=args.c_danger,
            planner=example_models.PlannerStyle(args.planner),
        )
        problem = example_models.example_yield(args.n, params)
    _write_text(args.output, _dump_json(problem_to_dict(problem)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyninfer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model(p: argparse.ArgumentParser, required: bool = True) -> None:
        p.add_argument("-m", "--model", required=required, default=None, help="model JSON file ('-' for stdin)")

    def add_output(p: argparse.ArgumentParser) -> None:
        p.add_argument("-o", "--output", default="-", help="output file ('-' for stdout)")

    p_solve = sub.add_parser("solve", help="solve a model by backward induction")
    add_model(p_solve)
    p_solve.add_argument("--tie-break", choices=["myopic", "first"], default="myopic")
    p_solve.add_argument("--init", default=None, help="override the initial distribution: a label or a JSON object")
    add_output(p_solve)
    p_solve.set_defaults(func=_cmd_solve)

    p_eval = sub.add_parser("evaluate", help="exactly evaluate a strategy")
    add_model(p_eval)
    p_eval.add_argument("-s", "--strategy", required=True, help="strategy JSON file ('-' for stdin)")
    add_output(p_eval)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_sim = sub.add_parser("simulate", help="seeded Monte Carlo rollouts of a strategy")
    add_model(p_sim)
    p_sim.add_argument("-s", "--strategy", required=True)
    p_sim.add_argument("--rollouts", type=int, default=10_000)
    p_sim.add_argument("--seed", type=int, default=_default_seed())
    add_output(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_verify = sub.add_parser("verify", help="brute-force check against the solver")
    add_model(p_verify, required=False)
    p_verify.add_argument("--mode", choices=["revealed", "unrevealed"], default="unrevealed")
    p_verify.add_argument("--limit", type=int, default=10**6, help="largest admissible strategy-space size")
    p_verify.add_argument("--instances", type=int, default=None, help="sweep K random binary instances instead of -m")
    p_verify.add_argument("--seed", type=int, default=_default_seed())
    add_output(p_verify)
    p_verify.set_defaults(func=_cmd_verify)

    p_trellis = sub.add_parser("export-trellis", help="render the solved trellis")
    add_model(p_trellis)
    p_trellis.add_argument("-f", "--format", choices=["dot", "text"], default="dot")
    p_trellis.add_argument("--tie-break", choices=["myopic", "first"], default="myopic")
    add_output(p_trellis)
    p_trellis.set_defaults(func=_cmd_export_trellis)

    p_export = sub.add_parser("export", help="export derived tables")
    export_sub = p_export.add_subparsers(dest="what", required=True)
    p_bar = export_sub.add_parser("bar-loss", help="observation-estimate loss table as CSV")
    add_model(p_bar)
    add_output(p_bar)
    p_bar.set_defaults(func=_cmd_export_bar_loss)

    p_example = sub.add_parser("example", help="write a built-in model to JSON")
    example_sub = p_example.add_subparsers(dest="which", required=True)
    for which in ("section33", "stock"):
        p_which = example_sub.add_parser(which)
        p_which.add_argument("--n", type=int, default=6)
        add_output(p_which)
        p_which.set_defaults(func=_cmd_example, which=which)
    p_yield = example_sub.add_parser("yield")
    p_yield.add_argument("--n", type=int, default=4)
    p_yield.add_argument("--beta", type=float, default=1.0)
    p_yield.add_argument("--dc", type=float, default=10.0)
    p_yield.add_argument("--grid-min", type=float, default=0.0)
    p_yield.add_argument("--grid-max", type=float, default=20.0)
    p_yield.add_argument("--grid-step", type=float, default=2.0)
    p_yield.add_argument("--c-missed", type=float, default=0.05)
    p_yield.add_argument("--c-danger", type=float, default=1.0)
    p_yield.add_argument("--planner", choices=["persist", "fall_back"], default="persist")
    add_output(p_yield)
    p_yield.set_defaults(func=_cmd_example, which="yield")

    return parser


def run(argv: list[str] | None = None) -> int:
    """Dispatch one invocation; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors and --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DynamicInferenceError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    except (OSError, UnicodeDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))
