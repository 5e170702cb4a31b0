"""Problem definition: spaces, kernels, loss and horizon, with validation.

A :class:`Problem` describes one finite sequential-estimation instance: an
observation space, a quantity space and an estimate space (each a finite
:class:`Alphabet`), the distribution of the first observation, one controlled
observation-transition kernel per round 2..n, one quantity kernel per round
1..n, and a contextual loss table over (observation, quantity, estimate)
triples. Rounds are 1-indexed; the transition kernel for round ``i`` gives
the law of the round-``i`` observation given the previous observation and the
previous estimate.

All containers are validated at construction and immutable afterwards, so a
Problem can be shared freely across threads. Probability rows whose sum
drifts from 1 by at most ``ROW_SUM_TOLERANCE`` are renormalized exactly once;
larger drift is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    HorizonMismatch,
    InvalidModelError,
    NotStochastic,
    RoundOutOfRange,
    UnknownLabel,
)

ROW_SUM_TOLERANCE = 1e-9


def _normalize_row(row: np.ndarray, what: str) -> np.ndarray:
    if np.any(row < 0.0):
        raise NotStochastic(f"{what} has a negative entry: {row.tolist()}")
    total = float(row.sum())
    if not (1.0 - ROW_SUM_TOLERANCE <= total <= 1.0 + ROW_SUM_TOLERANCE):
        raise NotStochastic(f"{what} sums to {total!r}, outside 1 +/- {ROW_SUM_TOLERANCE}")
    return row / total


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of distinct string labels with a stable index."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        if not labels:
            raise InvalidModelError("an alphabet must contain at least one label")
        if any(not isinstance(label, str) for label in labels):
            raise InvalidModelError(f"alphabet labels must be strings: {labels!r}")
        if len(set(labels)) != len(labels):
            raise InvalidModelError(f"alphabet labels must be distinct: {labels!r}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", {label: k for k, label in enumerate(labels)})

    def index(self, label: str) -> int:
        try:
            return self._index[label]  # type: ignore[attr-defined]
        except KeyError:
            raise UnknownLabel(f"label {label!r} not in alphabet {self.labels}") from None

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self._index  # type: ignore[attr-defined]


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over an alphabet; validated and renormalized."""

    alphabet: Alphabet
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (len(self.alphabet),):
            raise DimensionMismatch(
                f"distribution has shape {probs.shape}, alphabet has {len(self.alphabet)} labels"
            )
        object.__setattr__(self, "probs", _freeze(_normalize_row(probs, "distribution")))

    @classmethod
    def point_mass(cls, alphabet: Alphabet, label: str) -> "Distribution":
        probs = np.zeros(len(alphabet))
        probs[alphabet.index(label)] = 1.0
        return cls(alphabet, probs)

    def prob(self, label: str) -> float:
        return float(self.probs[self.alphabet.index(label)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.probs, other.probs)


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Law of the round-``round`` observation given (previous x, previous estimate).

    ``table[x_prev, yhat_prev, x_next]`` is a probability; every
    (x_prev, yhat_prev) row is a valid distribution over the x alphabet.
    """

    round: int
    x_space: Alphabet
    yhat_space: Alphabet
    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=np.float64)
        nx, na = len(self.x_space), len(self.yhat_space)
        if table.shape != (nx, na, nx):
            raise DimensionMismatch(
                f"transition kernel for round {self.round} has shape {table.shape}, expected {(nx, na, nx)}"
            )
        out = np.empty_like(table)
        for xi, x in enumerate(self.x_space):
            for ai, yhat in enumerate(self.yhat_space):
                out[xi, ai] = _normalize_row(
                    table[xi, ai], f"transition row (round {self.round}, x={x!r}, yhat={yhat!r})"
                )
        object.__setattr__(self, "table", _freeze(out))

    def row(self, x: str, yhat: str) -> Distribution:
        return Distribution(self.x_space, self.table[self.x_space.index(x), self.yhat_space.index(yhat)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransitionKernel):
            return NotImplemented
        return (
            self.round == other.round
            and self.x_space == other.x_space
            and self.yhat_space == other.yhat_space
            and np.array_equal(self.table, other.table)
        )


@dataclass(frozen=True, eq=False)
class QuantityKernel:
    """Law of the round-``round`` quantity given the current observation."""

    round: int
    x_space: Alphabet
    y_space: Alphabet
    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=np.float64)
        nx, ny = len(self.x_space), len(self.y_space)
        if table.shape != (nx, ny):
            raise DimensionMismatch(
                f"quantity kernel for round {self.round} has shape {table.shape}, expected {(nx, ny)}"
            )
        out = np.empty_like(table)
        for xi, x in enumerate(self.x_space):
            out[xi] = _normalize_row(table[xi], f"quantity row (round {self.round}, x={x!r})")
        object.__setattr__(self, "table", _freeze(out))

    def row(self, x: str) -> Distribution:
        return Distribution(self.y_space, self.table[self.x_space.index(x)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuantityKernel):
            return NotImplemented
        return (
            self.round == other.round
            and self.x_space == other.x_space
            and self.y_space == other.y_space
            and np.array_equal(self.table, other.table)
        )


@dataclass(frozen=True, eq=False)
class ContextualLoss:
    """Loss of estimating ``yhat`` when the quantity is ``y`` under observation ``x``."""

    x_space: Alphabet
    y_space: Alphabet
    yhat_space: Alphabet
    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=np.float64)
        shape = (len(self.x_space), len(self.y_space), len(self.yhat_space))
        if table.shape != shape:
            raise DimensionMismatch(f"loss table has shape {table.shape}, expected {shape}")
        if not np.all(np.isfinite(table)):
            raise InvalidModelError("loss table contains a non-finite entry")
        object.__setattr__(self, "table", _freeze(table.copy()))

    def value(self, x: str, y: str, yhat: str) -> float:
        return float(
            self.table[self.x_space.index(x), self.y_space.index(y), self.yhat_space.index(yhat)]
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContextualLoss):
            return NotImplemented
        return (
            self.x_space == other.x_space
            and self.y_space == other.y_space
            and self.yhat_space == other.yhat_space
            and np.array_equal(self.table, other.table)
        )


@dataclass(frozen=True, eq=False)
class Problem:
    """A complete, validated instance over ``n`` rounds.

    Immutable after construction; safe for concurrent read access.
    """

    n: int
    x_space: Alphabet
    y_space: Alphabet
    yhat_space: Alphabet
    init: Distribution
    transitions: tuple[TransitionKernel, ...]
    quantities: tuple[QuantityKernel, ...]
    loss: ContextualLoss

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidModelError(f"horizon must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "quantities", tuple(self.quantities))
        if len(self.transitions) != self.n - 1:
            raise HorizonMismatch(
                f"expected {self.n - 1} transition kernels for n={self.n}, got {len(self.transitions)}"
            )
        if len(self.quantities) != self.n:
            raise HorizonMismatch(
                f"expected {self.n} quantity kernels for n={self.n}, got {len(self.quantities)}"
            )
        if self.init.alphabet != self.x_space:
            raise DimensionMismatch("initial distribution is not indexed by the x alphabet")
        for offset, kernel in enumerate(self.transitions):
            if kernel.round != offset + 2:
                raise HorizonMismatch(
                    f"transition kernel at position {offset} is stamped round {kernel.round}, expected {offset + 2}"
                )
            if kernel.x_space != self.x_space or kernel.yhat_space != self.yhat_space:
                raise DimensionMismatch(f"transition kernel for round {kernel.round} uses foreign alphabets")
        for offset, kernel in enumerate(self.quantities):
            if kernel.round != offset + 1:
                raise HorizonMismatch(
                    f"quantity kernel at position {offset} is stamped round {kernel.round}, expected {offset + 1}"
                )
            if kernel.x_space != self.x_space or kernel.y_space != self.y_space:
                raise DimensionMismatch(f"quantity kernel for round {kernel.round} uses foreign alphabets")
        if (
            self.loss.x_space != self.x_space
            or self.loss.y_space != self.y_space
            or self.loss.yhat_space != self.yhat_space
        ):
            raise DimensionMismatch("loss table uses foreign alphabets")

    def transition_for_round(self, i: int) -> TransitionKernel:
        """Kernel of the round-``i`` observation, i in 2..n."""
        if not 2 <= i <= self.n:
            raise RoundOutOfRange(f"transition round {i} outside 2..{self.n}")
        return self.transitions[i - 2]

    def quantity_for_round(self, i: int) -> QuantityKernel:
        if not 1 <= i <= self.n:
            raise RoundOutOfRange(f"round {i} outside 1..{self.n}")
        return self.quantities[i - 1]

    def check_round(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise RoundOutOfRange(f"round {i} outside 1..{self.n}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Problem):
            return NotImplemented
        return (
            self.n == other.n
            and self.x_space == other.x_space
            and self.y_space == other.y_space
            and self.yhat_space == other.yhat_space
            and self.init == other.init
            and self.transitions == other.transitions
            and self.quantities == other.quantities
            and self.loss == other.loss
        )


def make_stationary_problem(
    n: int,
    init: Distribution,
    transition_table: np.ndarray | Sequence | None,
    quantity_table: np.ndarray | Sequence,
    loss: ContextualLoss,
) -> Problem:
    """Build a Problem whose per-round kernels are copies of one-round tables.

    ``transition_table`` may be None when ``n == 1`` (no transitions exist).
    Alphabets are taken from ``init`` (observations) and ``loss`` (quantities
    and estimates).
    """
    if not isinstance(n, int) or n < 1:
        raise InvalidModelError(f"horizon must be an integer >= 1, got {n!r}")
    x_space = init.alphabet
    if loss.x_space != x_space:
        raise DimensionMismatch("loss and initial distribution disagree on the x alphabet")
    y_space, yhat_space = loss.y_space, loss.yhat_space
    transitions: tuple[TransitionKernel, ...] = ()
    if n > 1:
        if transition_table is None:
            raise HorizonMismatch(f"a transition table is required for n={n}")
        base = np.asarray(transition_table, dtype=np.float64)
        transitions = tuple(
            TransitionKernel(i, x_space, yhat_space, base.copy()) for i in range(2, n + 1)
        )
    quantity = np.asarray(quantity_table, dtype=np.float64)
    quantities = tuple(QuantityKernel(i, x_space, y_space, quantity.copy()) for i in range(1, n + 1))
    return Problem(n, x_space, y_space, yhat_space, init, transitions, quantities, loss)


# ---------------------------------------------------------------------------
# Model document format (JSON-shaped dicts)
# ---------------------------------------------------------------------------


def _require(doc: Mapping, key: str):
    if key not in doc:
        raise InvalidModelError(f"model document is missing key {key!r}")
    return doc[key]


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidModelError(f"{what} must be a number, got {value!r}")
    return float(value)


def _space_from(doc: Mapping, key: str) -> Alphabet:
    raw = _require(doc, key)
    if not isinstance(raw, list):
        raise InvalidModelError(f"{key} must be an array of strings")
    return Alphabet(tuple(raw))


def _row_from_object(obj, alphabet: Alphabet, what: str) -> np.ndarray:
    if not isinstance(obj, Mapping):
        raise InvalidModelError(f"{what} must be an object mapping labels to numbers")
    unknown = set(obj) - set(alphabet.labels)
    if unknown:
        raise DimensionMismatch(f"{what} has entries for unknown labels {sorted(unknown)}")
    missing = set(alphabet.labels) - set(obj)
    if missing:
        raise DimensionMismatch(f"{what} is missing entries for labels {sorted(missing)}")
    return np.array([_number(obj[label], f"{what}[{label!r}]") for label in alphabet])


def _parse_pair_key(key: str, x_space: Alphabet, yhat_space: Alphabet) -> tuple[str, str]:
    matches = [
        (x, yhat) for x in x_space for yhat in yhat_space if f"{x}|{yhat}" == key
    ]
    if len(matches) != 1:
        raise InvalidModelError(
            f"transition key {key!r} does not identify exactly one 'x_prev|yhat_prev' pair"
        )
    return matches[0]


def _transition_from_object(obj, i: int, x_space: Alphabet, yhat_space: Alphabet) -> TransitionKernel:
    if not isinstance(obj, Mapping):
        raise InvalidModelError(f"transitions[{i - 2}] must be an object")
    table = np.full((len(x_space), len(yhat_space), len(x_space)), np.nan)
    seen = set()
    for key, row in obj.items():
        x, yhat = _parse_pair_key(key, x_space, yhat_space)
        if (x, yhat) in seen:
            raise InvalidModelError(f"transition key {key!r} appears twice in round {i}")
        seen.add((x, yhat))
        table[x_space.index(x), yhat_space.index(yhat)] = _row_from_object(
            row, x_space, f"transition row (round {i}, key {key!r})"
        )
    missing = [
        f"{x}|{yhat}" for x in x_space for yhat in yhat_space if (x, yhat) not in seen
    ]
    if missing:
        raise DimensionMismatch(f"transitions for round {i} are missing rows {missing}")
    return TransitionKernel(i, x_space, yhat_space, table)


def _quantity_from_object(obj, i: int, x_space: Alphabet, y_space: Alphabet) -> QuantityKernel:
    if not isinstance(obj, Mapping):
        raise InvalidModelError(f"quantities[{i - 1}] must be an object")
    unknown = set(obj) - set(x_space.labels)
    if unknown:
        raise DimensionMismatch(f"quantities for round {i} have rows for unknown labels {sorted(unknown)}")
    missing = set(x_space.labels) - set(obj)
    if missing:
        raise DimensionMismatch(f"quantities for round {i} are missing rows for {sorted(missing)}")
    table = np.stack(
        [_row_from_object(obj[x], y_space, f"quantity row (round {i}, x={x!r})") for x in x_space]
    )
    return QuantityKernel(i, x_space, y_space, table)


def _loss_from_records(records, x_space: Alphabet, y_space: Alphabet, yhat_space: Alphabet) -> ContextualLoss:
    if not isinstance(records, list):
        raise InvalidModelError("loss must be an array of {x, y, yhat, value} records")
    table = np.full((len(x_space), len(y_space), len(yhat_space)), np.nan)
    for record in records:
        if not isinstance(record, Mapping):
            raise InvalidModelError(f"loss record {record!r} is not an object")
        try:
            x, y, yhat = record["x"], record["y"], record["yhat"]
        except KeyError as exc:
            raise InvalidModelError(f"loss record {record!r} is missing key {exc}") from None
        xi, yi, ai = x_space.index(x), y_space.index(y), yhat_space.index(yhat)
        if not np.isnan(table[xi, yi, ai]):
            raise InvalidModelError(f"loss record for ({x!r}, {y!r}, {yhat!r}) appears twice")
        value = _number(record.get("value"), f"loss value for ({x!r}, {y!r}, {yhat!r})")
        if not np.isfinite(value):
            raise InvalidModelError(f"loss value for ({x!r}, {y!r}, {yhat!r}) is not finite")
        table[xi, yi, ai] = value
    if np.any(np.isnan(table)):
        first = np.argwhere(np.isnan(table))[0]
        raise InvalidModelError(
            "loss is missing a record for "
            f"({x_space.labels[first[0]]!r}, {y_space.labels[first[1]]!r}, {yhat_space.labels[first[2]]!r})"
        )
    return ContextualLoss(x_space, y_space, yhat_space, table)


def validate_problem(candidate: Mapping) -> Problem:
    """Validate a raw model document (a parsed JSON dict) into a Problem.

    Accepts the documented model format, including the ``stationary: true``
    flag that expands length-1 ``transitions``/``quantities`` arrays to the
    full horizon.
    """
    if not isinstance(candidate, Mapping):
        raise InvalidModelError(f"model document must be an object, got {type(candidate).__name__}")
    n_raw = _require(candidate, "n")
    if isinstance(n_raw, bool) or not isinstance(n_raw, int) or n_raw < 1:
        raise InvalidModelError(f"n must be an integer >= 1, got {n_raw!r}")
    n = n_raw
    x_space = _space_from(candidate, "x_space")
    y_space = _space_from(candidate, "y_space")
    yhat_space = _space_from(candidate, "yhat_space")
    init = Distribution(x_space, _row_from_object(_require(candidate, "init"), x_space, "init"))
    stationary = bool(candidate.get("stationary", False))

    raw_transitions = _require(candidate, "transitions")
    raw_quantities = _require(candidate, "quantities")
    if not isinstance(raw_transitions, list) or not isinstance(raw_quantities, list):
        raise InvalidModelError("transitions and quantities must be arrays")
    if stationary:
        if len(raw_transitions) > 1 or (n > 1 and len(raw_transitions) != 1):
            raise HorizonMismatch(
                f"stationary model expects a single transition entry, got {len(raw_transitions)}"
            )
        if len(raw_quantities) != 1:
            raise HorizonMismatch(
                f"stationary model expects a single quantity entry, got {len(raw_quantities)}"
            )
        raw_transitions = list(raw_transitions) * (n - 1) if n > 1 else []
        raw_quantities = list(raw_quantities) * n
    if len(raw_transitions) != n - 1:
        raise HorizonMismatch(f"expected {n - 1} transition entries for n={n}, got {len(raw_transitions)}")
    if len(raw_quantities) != n:
        raise HorizonMismatch(f"expected {n} quantity entries for n={n}, got {len(raw_quantities)}")

    transitions = tuple(
        _transition_from_object(obj, i + 2, x_space, yhat_space) for i, obj in enumerate(raw_transitions)
    )
    quantities = tuple(
        _quantity_from_object(obj, i + 1, x_space, y_space) for i, obj in enumerate(raw_quantities)
    )
    loss = _loss_from_records(_require(candidate, "loss"), x_space, y_space, yhat_space)
    return Problem(n, x_space, y_space, yhat_space, init, transitions, quantities, loss)


def _transition_to_object(kernel: TransitionKernel) -> dict:
    return {
        f"{x}|{yhat}": {
            x_next: float(kernel.table[xi, ai, ni])
            for ni, x_next in enumerate(kernel.x_space)
        }
        for xi, x in enumerate(kernel.x_space)
        for ai, yhat in enumerate(kernel.yhat_space)
    }


def _quantity_to_object(kernel: QuantityKernel) -> dict:
    return {
        x: {y: float(kernel.table[xi, yi]) for yi, y in enumerate(kernel.y_space)}
        for xi, x in enumerate(kernel.x_space)
    }


def problem_to_dict(problem: Problem, stationary: bool | str = "auto") -> dict:
    """Serialize a Problem to the documented model format.

    ``stationary`` may be True, False or "auto"; "auto" emits the compact
    length-1 form whenever every round shares identical tables (and n >= 2).
    """
    if stationary == "auto":
        stationary = (
            problem.n >= 2
            and all(np.array_equal(k.table, problem.transitions[0].table) for k in problem.transitions)
            and all(np.array_equal(k.table, problem.quantities[0].table) for k in problem.quantities)
        )
    doc = {
        "n": problem.n,
        "x_space": list(problem.x_space.labels),
        "y_space": list(problem.y_space.labels),
        "yhat_space": list(problem.yhat_space.labels),
        "init": {x: float(problem.init.probs[xi]) for xi, x in enumerate(problem.x_space)},
    }
    if stationary:
        doc["stationary"] = True
        doc["transitions"] = [_transition_to_object(problem.transitions[0])]
        doc["quantities"] = [_quantity_to_object(problem.quantities[0])]
    else:
        doc["transitions"] = [_transition_to_object(k) for k in problem.transitions]
        doc["quantities"] = [_quantity_to_object(k) for k in problem.quantities]
    doc["loss"] = [
        {"x": x, "y": y, "yhat": yhat, "value": float(problem.loss.table[xi, yi, ai])}
        for xi, x in enumerate(problem.x_space)
        for yi, y in enumerate(problem.y_space)
        for ai, yhat in enumerate(problem.yhat_space)
    ]
    return doc
