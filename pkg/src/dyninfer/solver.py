"""Backward-induction solver for the optimal estimation strategy.

Solves the finite-horizon MDP view of a problem exactly: the final-round
action values are the observation-estimate losses, and each earlier round
adds the expected optimal value of the next observation under the controlled
transition kernel. Expectations are plain sums in label-index order, so
outputs are reproducible bit for bit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import MismatchedResult
from .model import Problem
from .reduction import bar_loss_table, myopic_bayes_estimate, myopic_bayes_index

TIE_TOLERANCE = 1e-9


class TieBreakRule(enum.Enum):
    """How to pick an estimate when several minimize the action-value row.

    MYOPIC_PREFERRED picks the single-round optimal estimate whenever it is
    among the minimizers, else the smallest index; FIRST_INDEX always picks
    the smallest index.
    """

    MYOPIC_PREFERRED = "myopic"
    FIRST_INDEX = "first"

    @classmethod
    def from_name(cls, name: str) -> "TieBreakRule":
        for rule in cls:
            if rule.value == name:
                return rule
        raise ValueError(f"unknown tie-break rule {name!r}; expected 'myopic' or 'first'")


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Value tables, optimal policy and tie diagnostics from one solve.

    ``v_star[i-1, xi]`` is the minimum expected remaining loss from round
    ``i`` at observation index ``xi``; ``q_star`` the per-estimate values;
    ``policy`` the chosen estimate indices; ``tie_sets[i-1][xi]`` every
    estimate index within ``TIE_TOLERANCE`` of the row minimum.
    """

    problem: Problem
    rule: TieBreakRule
    v_star: np.ndarray  # (n, |X|)
    q_star: np.ndarray  # (n, |X|, |Yhat|)
    policy: np.ndarray  # (n, |X|) estimate indices
    tie_sets: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def n(self) -> int:
        return self.problem.n

    def v_value(self, i: int, x: str) -> float:
        self.problem.check_round(i)
        return float(self.v_star[i - 1, self.problem.x_space.index(x)])

    def q_value(self, i: int, x: str, yhat: str) -> float:
        self.problem.check_round(i)
        return float(
            self.q_star[i - 1, self.problem.x_space.index(x), self.problem.yhat_space.index(yhat)]
        )

    def policy_label(self, i: int, x: str) -> str:
        self.problem.check_round(i)
        return self.problem.yhat_space.labels[self.policy[i - 1, self.problem.x_space.index(x)]]

    def tie_labels(self, i: int, x: str) -> tuple[str, ...]:
        self.problem.check_round(i)
        ties = self.tie_sets[i - 1][self.problem.x_space.index(x)]
        return tuple(self.problem.yhat_space.labels[ai] for ai in ties)


def solve(problem: Problem, rule: TieBreakRule = TieBreakRule.MYOPIC_PREFERRED) -> SolveResult:
    """Compute optimal value tables and a deterministic optimal policy."""
    bar = bar_loss_table(problem).values
    n, nx, na = problem.n, len(problem.x_space), len(problem.yhat_space)
    q_star = np.empty((n, nx, na))
    v_star = np.empty((n, nx))
    policy = np.empty((n, nx), dtype=np.int64)
    tie_sets: list[tuple[tuple[int, ...], ...]] = [()] * n

    for i in range(n, 0, -1):
        k = i - 1
        transition = problem.transitions[k] if i < n else None  # kernel for round i+1
        round_ties = []
        for xi in range(nx):
            for ai in range(na):
                value = bar[k, xi, ai]
                if transition is not None:
                    expected = 0.0
                    for xn in range(nx):
                        expected += transition.table[xi, ai, xn] * v_star[k + 1, xn]
                    value = value + expected
                q_star[k, xi, ai] = value
            row = q_star[k, xi]
            v_star[k, xi] = row.min()
            ties = tuple(ai for ai in range(na) if row[ai] <= v_star[k, xi] + TIE_TOLERANCE)
            round_ties.append(ties)
            if rule is TieBreakRule.MYOPIC_PREFERRED:
                myopic = myopic_bayes_index(problem, i, xi)
                policy[k, xi] = myopic if myopic in ties else ties[0]
            else:
                policy[k, xi] = ties[0]
        tie_sets[k] = tuple(round_ties)

    q_star.setflags(write=False)
    v_star.setflags(write=False)
    policy.setflags(write=False)
    return SolveResult(problem, rule, v_star, q_star, policy, tuple(tie_sets))


def ensure_result_matches(problem: Problem, result: SolveResult) -> None:
    """Raise MismatchedResult unless ``result`` was solved for this model.

    The initial distribution is deliberately ignored: value tables and the
    policy do not depend on it, which is what makes ``--init`` overrides safe.
    """
    source = result.problem
    same = (
        source.n == problem.n
        and source.x_space == problem.x_space
        and source.y_space == problem.y_space
        and source.yhat_space == problem.yhat_space
        and source.transitions == problem.transitions
        and source.quantities == problem.quantities
        and source.loss == problem.loss
    )
    if not same:
        raise MismatchedResult("solve result was produced from a different problem")


def minimum_inference_loss(problem: Problem, result: SolveResult) -> float:
    """Minimum expected accumulated loss: the initial expectation of round-1 values."""
    ensure_result_matches(problem, result)
    total = 0.0
    for xi in range(len(problem.x_space)):
        total += problem.init.probs[xi] * result.v_star[0, xi]
    return float(total)


@dataclass(frozen=True)
class ReportRow:
    """One (round, observation) line of a solution report."""

    round: int
    x: str
    v_star: float
    q_row: tuple[float, ...]
    chosen: str
    tie: bool
    tie_labels: tuple[str, ...]
    myopic: str
    differs_from_myopic: bool


def solution_report(result: SolveResult) -> tuple[ReportRow, ...]:
    """Flatten a solve result into per-(round, x) rows, fit for trellis export."""
    problem = result.problem
    rows = []
    for i in range(1, problem.n + 1):
        for x in problem.x_space:
            chosen = result.policy_label(i, x)
            myopic = myopic_bayes_estimate(problem, i, x)
            ties = result.tie_labels(i, x)
            rows.append(
                ReportRow(
                    round=i,
                    x=x,
                    v_star=result.v_value(i, x),
                    q_row=tuple(result.q_value(i, x, yhat) for yhat in problem.yhat_space),
                    chosen=chosen,
                    tie=len(ties) > 1,
                    tie_labels=ties,
                    myopic=myopic,
                    differs_from_myopic=chosen != myopic,
                )
            )
    return tuple(rows)
