"""Brute-force ground truth on small instances.

Everything here works from first principles on the joint distribution of the
process: exact losses are plain sums over complete trajectories, and the
optimum over history-dependent strategies is found by exhausting the decision
at every syntactically possible history. None of it reuses the solver's
value recursion, which is exactly what makes it a useful cross-check.

Strategy spaces grow as a double exponential, so every search is gated by a
limit on the number of strategy functions in the space.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

import numpy as np

from .errors import HistoryIncomplete, SearchSpaceTooLarge, ShapeMismatch
from .evaluate import MarkovStrategy
from .model import Alphabet, ContextualLoss, Distribution, Problem, QuantityKernel, TransitionKernel
from .reduction import bar_loss_table
from .solver import TieBreakRule, minimum_inference_loss, solve

DEFAULT_STRATEGY_LIMIT = 10**6
DEFAULT_PAIR_LIMIT = 10**7

Key = tuple[int, ...]


class HistoryMode(enum.Enum):
    """Whether past quantities are revealed to the estimator after each round."""

    REVEALED = "revealed"
    UNREVEALED = "unrevealed"


@dataclass(frozen=True, eq=False)
class HistoryStrategy:
    """A per-round decision table over full histories.

    In REVEALED mode the round-``i`` key is the index tuple
    ``(x_1..x_i, y_1..y_{i-1})`` flattened; in UNREVEALED mode it is
    ``(x_1..x_i)``. ``tables[i-1]`` must cover every history the caller will
    ask about; missing entries raise :class:`HistoryIncomplete`.
    """

    mode: HistoryMode
    n: int
    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]
    yhat_labels: tuple[str, ...]
    tables: tuple[Mapping[Key, int], ...]

    def key(self, xs: tuple[int, ...], ys: tuple[int, ...]) -> Key:
        return xs if self.mode is HistoryMode.UNREVEALED else xs + ys

    def decision(self, i: int, xs: tuple[int, ...], ys: tuple[int, ...]) -> int:
        try:
            return self.tables[i - 1][self.key(xs, ys)]
        except KeyError:
            raise HistoryIncomplete(
                f"no decision for round {i} history x={xs!r}, y={ys!r} ({self.mode.value} mode)"
            ) from None

    @classmethod
    def from_markov(
        cls, problem: Problem, strategy: MarkovStrategy, mode: HistoryMode = HistoryMode.UNREVEALED
    ) -> "HistoryStrategy":
        """Lift a per-observation strategy to a total history strategy."""
        return build_history_strategy(
            problem, mode, lambda i, xs, ys: int(strategy.choices[i - 1, xs[-1]])
        )


def _round_histories(problem: Problem, mode: HistoryMode, i: int) -> Iterator[tuple[Key, Key]]:
    """All syntactic (x-history, y-history) index pairs of round ``i``, in lexicographic order."""
    nx, ny = len(problem.x_space), len(problem.y_space)
    y_len = i - 1 if mode is HistoryMode.REVEALED else 0
    for xs in itertools.product(range(nx), repeat=i):
        for ys in itertools.product(range(ny), repeat=y_len):
            yield xs, ys


def build_history_strategy(
    problem: Problem,
    mode: HistoryMode,
    decide: Callable[[int, tuple[int, ...], tuple[int, ...]], int],
) -> HistoryStrategy:
    """Materialize a total history strategy from a decision function."""
    tables = []
    for i in range(1, problem.n + 1):
        table = {}
        for xs, ys in _round_histories(problem, mode, i):
            key = xs if mode is HistoryMode.UNREVEALED else xs + ys
            table[key] = decide(i, xs, ys)
        tables.append(table)
    return HistoryStrategy(
        mode,
        problem.n,
        problem.x_space.labels,
        problem.y_space.labels,
        problem.yhat_space.labels,
        tuple(tables),
    )


def random_history_strategy(
    problem: Problem, mode: HistoryMode, rng: np.random.Generator
) -> HistoryStrategy:
    na = len(problem.yhat_space)
    return build_history_strategy(problem, mode, lambda i, xs, ys: int(rng.integers(na)))


def _check_history_strategy(problem: Problem, strategy: HistoryStrategy) -> None:
    if (
        strategy.n != problem.n
        or strategy.x_labels != problem.x_space.labels
        or strategy.y_labels != problem.y_space.labels
        or strategy.yhat_labels != problem.yhat_space.labels
    ):
        raise ShapeMismatch("history strategy is shaped for a different problem")


def exact_loss_history(problem: Problem, strategy: HistoryStrategy) -> float:
    """Expected accumulated loss by plain summation over complete trajectories.

    Enumerates every (x-sequence, y-sequence) with positive probability in
    lexicographic order, weighting the accumulated loss of each by its exact
    probability under the strategy. No sampling, no value recursion.
    """
    _check_history_strategy(problem, strategy)
    n, nx, ny = problem.n, len(problem.x_space), len(problem.y_space)
    loss = problem.loss.table
    init = problem.init.probs
    total = 0.0

    def visit(i: int, xs: tuple[int, ...], ys: tuple[int, ...], prob: float, acc: float) -> None:
        nonlocal total
        x = xs[-1]
        ai = strategy.decision(i, xs, ys)
        quantity = problem.quantities[i - 1].table
        for yi in range(ny):
            p_y = quantity[x, yi]
            if p_y == 0.0:
                continue
            step = acc + loss[x, yi, ai]
            if i == n:
                total += prob * p_y * step
            else:
                transition = problem.transitions[i - 1].table
                for xn in range(nx):
                    p_x = transition[x, ai, xn]
                    if p_x == 0.0:
                        continue
                    visit(i + 1, xs + (xn,), ys + (yi,), prob * p_y * p_x, step)

    for x1 in range(nx):
        if init[x1] > 0.0:
            visit(1, (x1,), (), float(init[x1]), 0.0)
    return float(total)


def history_count(problem: Problem, mode: HistoryMode) -> int:
    """Number of syntactic histories across all rounds (exact integer)."""
    nx, ny = len(problem.x_space), len(problem.y_space)
    total = 0
    for i in range(1, problem.n + 1):
        histories = nx**i
        if mode is HistoryMode.REVEALED:
            histories *= ny ** (i - 1)
        total += histories
    return total


def strategy_count(problem: Problem, mode: HistoryMode) -> int:
    """Size of the deterministic history-strategy space (exact integer)."""
    return len(problem.yhat_space) ** history_count(problem, mode)


def enumerate_history_strategies(
    problem: Problem, mode: HistoryMode, limit: int = DEFAULT_STRATEGY_LIMIT
) -> Iterator[HistoryStrategy]:
    """Yield every deterministic history strategy exactly once.

    Order is lexicographic over the vector of decisions, with histories
    ordered round-by-round and lexicographically within each round, and the
    last history's decision varying fastest. The limit check happens at call
    time, before the first strategy is produced.
    """
    count = strategy_count(problem, mode)
    if count > limit:
        raise SearchSpaceTooLarge(
            f"{count} history strategies ({mode.value} mode) exceed the limit of {limit}"
        )
    keyed: list[tuple[int, Key]] = []
    for i in range(1, problem.n + 1):
        for xs, ys in _round_histories(problem, mode, i):
            keyed.append((i, xs if mode is HistoryMode.UNREVEALED else xs + ys))

    def generate() -> Iterator[HistoryStrategy]:
        for assignment in itertools.product(range(len(problem.yhat_space)), repeat=len(keyed)):
            tables: list[dict[Key, int]] = [dict() for _ in range(problem.n)]
            for (i, key), ai in zip(keyed, assignment):
                tables[i - 1][key] = ai
            yield HistoryStrategy(
                mode,
                problem.n,
                problem.x_space.labels,
                problem.y_space.labels,
                problem.yhat_space.labels,
                tuple(tables),
            )

    return generate()


def enumeration_minimum(
    problem: Problem,
    mode: HistoryMode,
    limit: int = DEFAULT_STRATEGY_LIMIT,
    pair_limit: int = DEFAULT_PAIR_LIMIT,
) -> tuple[float, HistoryStrategy]:
    """Literal brute force: evaluate every enumerated strategy, keep the best.

    Feasible only on tiny instances; besides the strategy-space ``limit`` it
    enforces ``pair_limit`` on strategy-trajectory pairs, since every strategy
    is priced by full trajectory enumeration. Ties keep the strategy yielded
    first, i.e. the lexicographically first minimizer.
    """
    count = strategy_count(problem, mode)
    trajectories = (len(problem.x_space) * len(problem.y_space)) ** problem.n
    if count * trajectories > pair_limit:
        raise SearchSpaceTooLarge(
            f"{count * trajectories} strategy-trajectory pairs exceed the limit of {pair_limit}"
        )
    best: tuple[float, HistoryStrategy] | None = None
    for strategy in enumerate_history_strategies(problem, mode, limit):
        loss = exact_loss_history(problem, strategy)
        if best is None or loss < best[0]:
            best = (loss, strategy)
    assert best is not None  # the strategy space is never empty
    return best


def verify_lemma1(problem: Problem, strategy: HistoryStrategy) -> tuple[float, float]:
    """Both sides of the loss-marginalization identity for one strategy.

    The left side sums the raw contextual loss over complete (x, y)
    trajectories; the right side sums the observation-estimate loss over
    histories, with the current round's quantity marginalized analytically.
    They must agree for every strategy, history-dependent or not.
    """
    _check_history_strategy(problem, strategy)
    lhs = exact_loss_history(problem, strategy)

    bar = bar_loss_table(problem).values
    n, nx, ny = problem.n, len(problem.x_space), len(problem.y_space)
    revealed = strategy.mode is HistoryMode.REVEALED
    rhs = 0.0

    def visit(i: int, xs: tuple[int, ...], ys: tuple[int, ...], prob: float) -> None:
        nonlocal rhs
        x = xs[-1]
        ai = strategy.decision(i, xs, ys)
        rhs += prob * bar[i - 1, x, ai]
        if i == n:
            return
        transition = problem.transitions[i - 1].table
        if revealed:
            quantity = problem.quantities[i - 1].table
            for yi in range(ny):
                p_y = quantity[x, yi]
                if p_y == 0.0:
                    continue
                for xn in range(nx):
                    p_x = transition[x, ai, xn]
                    if p_x > 0.0:
                        visit(i + 1, xs + (xn,), ys + (yi,), prob * p_y * p_x)
        else:
            for xn in range(nx):
                p_x = transition[x, ai, xn]
                if p_x > 0.0:
                    visit(i + 1, xs + (xn,), ys, prob * p_x)

    for x1 in range(nx):
        if problem.init.probs[x1] > 0.0:
            visit(1, (x1,), (), float(problem.init.probs[x1]))
    return lhs, float(rhs)


@dataclass(frozen=True, eq=False)
class OracleReport:
    """Outcome of one brute-force-vs-solver comparison."""

    brute_min: float
    dp_min: float
    gap: float
    witness: HistoryStrategy
    strategies_searched: int
    lemma1_pairs: tuple[tuple[float, float], ...]


def brute_force_optimum(
    problem: Problem, mode: HistoryMode, limit: int = DEFAULT_STRATEGY_LIMIT
) -> OracleReport:
    """Exact minimum over every deterministic history strategy.

    The whole strategy space is exhausted by optimizing the decision at each
    syntactic history bottom-up over the history tree, which covers the same
    function space as enumerating the ``strategy_count`` individual
    strategies (the enumeration view is cross-checked in the test suite on
    instances small enough to enumerate literally). Decisions at ties go to
    the smallest estimate index, so the witness is the lexicographically
    first minimizer. ``lemma1_pairs`` holds the loss-marginalization pair for
    the witness.

    Raises SearchSpaceTooLarge when the strategy space exceeds ``limit``.
    """
    count = strategy_count(problem, mode)
    if count > limit:
        raise SearchSpaceTooLarge(
            f"{count} history strategies ({mode.value} mode) exceed the limit of {limit}"
        )
    n = problem.n
    nx, ny, na = len(problem.x_space), len(problem.y_space), len(problem.yhat_space)
    loss = problem.loss.table
    revealed = mode is HistoryMode.REVEALED

    values: dict[tuple[int, Key, Key], float] = {}
    decisions: list[dict[Key, int]] = [dict() for _ in range(n)]
    for i in range(n, 0, -1):
        quantity = problem.quantities[i - 1].table
        transition = problem.transitions[i - 1].table if i < n else None
        for xs, ys in _round_histories(problem, mode, i):
            x = xs[-1]
            best_value = None
            best_action = 0
            for ai in range(na):
                value = 0.0
                for yi in range(ny):
                    value += quantity[x, yi] * loss[x, yi, ai]
                if transition is not None:
                    if revealed:
                        for yi in range(ny):
                            p_y = quantity[x, yi]
                            if p_y == 0.0:
                                continue
                            for xn in range(nx):
                                p_x = transition[x, ai, xn]
                                if p_x != 0.0:
                                    value += p_y * p_x * values[(i + 1, xs + (xn,), ys + (yi,))]
                    else:
                        for xn in range(nx):
                            p_x = transition[x, ai, xn]
                            if p_x != 0.0:
                                value += p_x * values[(i + 1, xs + (xn,), ys)]
                if best_value is None or value < best_value:
                    best_value, best_action = value, ai
            values[(i, xs, ys)] = best_value
            key = xs if mode is HistoryMode.UNREVEALED else xs + ys
            decisions[i - 1][key] = best_action

    brute_min = 0.0
    for x1 in range(nx):
        brute_min += problem.init.probs[x1] * values[(1, (x1,), ())]
    brute_min = float(brute_min)

    witness = HistoryStrategy(
        mode, n, problem.x_space.labels, problem.y_space.labels, problem.yhat_space.labels, tuple(decisions)
    )
    dp_min = minimum_inference_loss(problem, solve(problem, TieBreakRule.MYOPIC_PREFERRED))
    return OracleReport(
        brute_min=brute_min,
        dp_min=dp_min,
        gap=brute_min - dp_min,
        witness=witness,
        strategies_searched=count,
        lemma1_pairs=(verify_lemma1(problem, witness),),
    )


def enumerate_markov_strategies(problem: Problem) -> Iterator[MarkovStrategy]:
    """Every deterministic per-observation strategy, lexicographically."""
    n, nx, na = problem.n, len(problem.x_space), len(problem.yhat_space)
    for assignment in itertools.product(range(na), repeat=n * nx):
        choices = np.asarray(assignment, dtype=np.int64).reshape(n, nx)
        yield MarkovStrategy(n, problem.x_space.labels, problem.yhat_space.labels, choices)


def random_problem(
    rng: np.random.Generator, n: int, nx: int = 2, ny: int = 2, nyhat: int = 2
) -> Problem:
    """A random instance with strictly positive kernels and losses in [0, 1]."""
    x_space = Alphabet(tuple(str(k) for k in range(nx)))
    y_space = Alphabet(tuple(str(k) for k in range(ny)))
    yhat_space = Alphabet(tuple(str(k) for k in range(nyhat)))

    def random_rows(*shape: int) -> np.ndarray:
        rows = rng.random(shape) + 1e-3
        return rows / rows.sum(axis=-1, keepdims=True)

    init = Distribution(x_space, random_rows(nx))
    transitions = tuple(
        TransitionKernel(i, x_space, yhat_space, random_rows(nx, nyhat, nx)) for i in range(2, n + 1)
    )
    quantities = tuple(QuantityKernel(i, x_space, y_space, random_rows(nx, ny)) for i in range(1, n + 1))
    loss = ContextualLoss(x_space, y_space, yhat_space, rng.random((nx, ny, nyhat)))
    return Problem(n, x_space, y_space, yhat_space, init, transitions, quantities, loss)
