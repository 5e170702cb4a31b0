"""Exact evaluation of per-round estimation strategies, plus a rollout simulator.

``evaluate_markov`` computes the expected accumulated loss of a strategy that
maps each round's observation to an estimate, together with the full table of
expected remaining losses from every (round, observation). ``simulate`` draws
seeded Monte Carlo rollouts of the same process; it is a deterministic
function of (problem, strategy, rollouts, seed) regardless of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidParams, ShapeMismatch
from .model import Problem
from .reduction import bar_loss_table, myopic_bayes_index
from .rng import uniform_matrix
from .solver import SolveResult

DEFAULT_TRAJECTORY_CAP = 10_000


@dataclass(frozen=True, eq=False)
class MarkovStrategy:
    """A deterministic per-round map from observations to estimates.

    ``choices[i-1, xi]`` is the estimate index used in round ``i`` when the
    observation has index ``xi``.
    """

    n: int
    x_labels: tuple[str, ...]
    yhat_labels: tuple[str, ...]
    choices: np.ndarray  # (n, |X|) of estimate indices

    def __post_init__(self) -> None:
        choices = np.asarray(self.choices, dtype=np.int64)
        if choices.shape != (self.n, len(self.x_labels)):
            raise ShapeMismatch(
                f"strategy table has shape {choices.shape}, expected {(self.n, len(self.x_labels))}"
            )
        if choices.size and (choices.min() < 0 or choices.max() >= len(self.yhat_labels)):
            raise ShapeMismatch("strategy table contains an out-of-range estimate index")
        choices.setflags(write=False)
        object.__setattr__(self, "choices", choices)

    @classmethod
    def from_rows(cls, problem: Problem, rows: Sequence[Mapping[str, str]]) -> "MarkovStrategy":
        """Build from the wire form: one {x label -> estimate label} object per round."""
        if len(rows) != problem.n:
            raise ShapeMismatch(f"strategy has {len(rows)} rounds, problem has {problem.n}")
        choices = np.empty((problem.n, len(problem.x_space)), dtype=np.int64)
        for k, row in enumerate(rows):
            missing = set(problem.x_space.labels) - set(row)
            if missing:
                raise ShapeMismatch(f"strategy round {k + 1} is missing observations {sorted(missing)}")
            for x in problem.x_space:
                choices[k, problem.x_space.index(x)] = problem.yhat_space.index(row[x])
        return cls(problem.n, problem.x_space.labels, problem.yhat_space.labels, choices)

    def to_rows(self) -> list[dict[str, str]]:
        return [
            {x: self.yhat_labels[self.choices[k, xi]] for xi, x in enumerate(self.x_labels)}
            for k in range(self.n)
        ]

    def label(self, i: int, x: str) -> str:
        return self.yhat_labels[self.choices[i - 1, self.x_labels.index(x)]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MarkovStrategy):
            return NotImplemented
        return (
            self.n == other.n
            and self.x_labels == other.x_labels
            and self.yhat_labels == other.yhat_labels
            and np.array_equal(self.choices, other.choices)
        )


def optimal_strategy(result: SolveResult) -> MarkovStrategy:
    """The solved policy as a strategy object."""
    problem = result.problem
    return MarkovStrategy(
        problem.n, problem.x_space.labels, problem.yhat_space.labels, result.policy.copy()
    )


def myopic_strategy(problem: Problem) -> MarkovStrategy:
    """The round-by-round single-round optimal strategy (ignores the future)."""
    choices = np.empty((problem.n, len(problem.x_space)), dtype=np.int64)
    for i in range(1, problem.n + 1):
        for xi in range(len(problem.x_space)):
            choices[i - 1, xi] = myopic_bayes_index(problem, i, xi)
    return MarkovStrategy(problem.n, problem.x_space.labels, problem.yhat_space.labels, choices)


def _check_strategy(problem: Problem, strategy: MarkovStrategy) -> None:
    if (
        strategy.n != problem.n
        or strategy.x_labels != problem.x_space.labels
        or strategy.yhat_labels != problem.yhat_space.labels
    ):
        raise ShapeMismatch("strategy is shaped for a different problem")


@dataclass(frozen=True, eq=False)
class EvalResult:
    """Exact inference loss ``j`` and per-(round, x) loss-to-go table ``v``."""

    problem: Problem
    strategy: MarkovStrategy
    j: float
    v: np.ndarray  # (n, |X|)


def evaluate_markov(problem: Problem, strategy: MarkovStrategy) -> EvalResult:
    """Exact expected accumulated loss of a strategy, by backward recursion.

    ``v[i-1, xi]`` is the expected loss accumulated from round ``i`` through
    the final round given the round-``i`` observation; ``j`` is its initial
    expectation.
    """
    _check_strategy(problem, strategy)
    bar = bar_loss_table(problem).values
    n, nx = problem.n, len(problem.x_space)
    v = np.empty((n, nx))
    for i in range(n, 0, -1):
        k = i - 1
        transition = problem.transitions[k] if i < n else None
        for xi in range(nx):
            ai = strategy.choices[k, xi]
            value = bar[k, xi, ai]
            if transition is not None:
                expected = 0.0
                for xn in range(nx):
                    expected += transition.table[xi, ai, xn] * v[k + 1, xn]
                value = value + expected
            v[k, xi] = value
    j = 0.0
    for xi in range(nx):
        j += problem.init.probs[xi] * v[0, xi]
    v.setflags(write=False)
    return EvalResult(problem, strategy, float(j), v)


def loss_to_go(result: EvalResult, i: int, x: str) -> float:
    """Expected remaining loss from round ``i`` at observation ``x``."""
    result.problem.check_round(i)
    return float(result.v[i - 1, result.problem.x_space.index(x)])


@dataclass(frozen=True)
class Trajectory:
    """One realized rollout: labels per round plus its accumulated loss."""

    id: str
    xs: tuple[str, ...]
    ys: tuple[str, ...]
    yhats: tuple[str, ...]
    loss: float


@dataclass(frozen=True, eq=False)
class SimulationResult:
    mean: float
    variance: float
    rollouts: int
    seed: int
    trajectories: tuple[Trajectory, ...] | None


def _row_cdfs(table: np.ndarray) -> np.ndarray:
    """Cumulative rows with the last entry pinned to 1.0 for inverse-CDF draws."""
    cdf = np.cumsum(table, axis=-1)
    cdf[..., -1] = 1.0
    return cdf


def _sample(cdf_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    # smallest index m with u < cdf[m], i.e. inverse CDF in label-index order
    return (u[:, None] >= cdf_rows).sum(axis=1)


def simulate(
    problem: Problem,
    strategy: MarkovStrategy,
    rollouts: int,
    seed: int,
    *,
    return_trajectories: bool = False,
    trajectory_cap: int = DEFAULT_TRAJECTORY_CAP,
) -> SimulationResult:
    """Seeded Monte Carlo rollouts of the estimation process.

    Rollout ``k`` consumes substream ``k`` of the SplitMix64 counter stream
    for ``seed`` (see :mod:`dyninfer.rng`), with ``2 n`` draws per rollout in
    the order: initial observation, then per round the quantity and (except
    in the final round) the next observation. Categorical draws invert the
    row CDF in label-index order. The mean is accumulated over rollouts in
    index order once all rollouts are complete, so the result does not depend
    on how the rollouts were scheduled.
    """
    _check_strategy(problem, strategy)
    if not isinstance(rollouts, int) or rollouts < 1:
        raise InvalidParams(f"rollouts must be an integer >= 1, got {rollouts!r}")
    n = problem.n
    uniforms = uniform_matrix(seed, rollouts, 2 * n)

    init_cdf = _row_cdfs(problem.init.probs[None, :])[0]
    quantity_cdfs = [_row_cdfs(k.table) for k in problem.quantities]
    transition_cdfs = [_row_cdfs(k.table) for k in problem.transitions]

    xs = (uniforms[:, 0][:, None] >= init_cdf[None, :]).sum(axis=1)
    losses = np.zeros(rollouts)
    keep = min(rollouts, trajectory_cap) if return_trajectories else 0
    xs_hist, ys_hist, yhats_hist = [], [], []
    for i in range(1, n + 1):
        k = i - 1
        ys = _sample(quantity_cdfs[k][xs], uniforms[:, 2 * k + 1])
        yhats = strategy.choices[k, xs]
        losses += problem.loss.table[xs, ys, yhats]
        if keep:
            xs_hist.append(xs[:keep].copy())
            ys_hist.append(ys[:keep].copy())
            yhats_hist.append(yhats[:keep].copy())
        if i < n:
            xs = _sample(transition_cdfs[k][xs, yhats], uniforms[:, 2 * k + 2])

    total = 0.0
    for value in losses.tolist():
        total += value
    mean = total / rollouts
    if rollouts > 1:
        square_sum = 0.0
        for value in losses.tolist():
            square_sum += (value - mean) ** 2
        variance = square_sum / (rollouts - 1)
    else:
        variance = 0.0

    trajectories: tuple[Trajectory, ...] | None = None
    if return_trajectories:
        x_labels = problem.x_space.labels
        y_labels = problem.y_space.labels
        yhat_labels = problem.yhat_space.labels
        trajectories = tuple(
            Trajectory(
                id=f"{seed}:{r}",
                xs=tuple(x_labels[xs_hist[k][r]] for k in range(n)),
                ys=tuple(y_labels[ys_hist[k][r]] for k in range(n)),
                yhats=tuple(yhat_labels[yhats_hist[k][r]] for k in range(n)),
                loss=float(losses[r]),
            )
            for r in range(keep)
        )
    return SimulationResult(mean, variance, rollouts, seed, trajectories)
