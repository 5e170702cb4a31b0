"""Validation, construction and document round-trips for problem instances."""

import numpy as np
import pytest

from dyninfer import (
    Alphabet,
    ContextualLoss,
    DimensionMismatch,
    Distribution,
    HorizonMismatch,
    InvalidModelError,
    NotStochastic,
    Problem,
    QuantityKernel,
    RoundOutOfRange,
    UnknownLabel,
    example_section33,
    example_stock,
    make_stationary_problem,
    problem_to_dict,
    random_problem,
    validate_problem,
)

BINARY = Alphabet(("0", "1"))


def zero_one_loss():
    table = np.zeros((2, 2, 2))
    table[:, 0, 1] = 1.0
    table[:, 1, 0] = 1.0
    return ContextualLoss(BINARY, BINARY, BINARY, table)


def section33_dict(n=6):
    return {
        "n": n,
        "stationary": True,
        "x_space": ["0", "1"],
        "y_space": ["0", "1"],
        "yhat_space": ["0", "1"],
        "init": {"0": 1.0, "1": 0.0},
        "transitions": [
            {
                "0|0": {"0": 0.0, "1": 1.0},
                "0|1": {"0": 1.0, "1": 0.0},
                "1|0": {"0": 1.0, "1": 0.0},
                "1|1": {"0": 0.0, "1": 1.0},
            }
        ],
        "quantities": [{"0": {"0": 0.9, "1": 0.1}, "1": {"0": 0.4, "1": 0.6}}],
        "loss": [
            {"x": x, "y": y, "yhat": yhat, "value": 0.0 if y == yhat else 1.0}
            for x in "01"
            for y in "01"
            for yhat in "01"
        ],
    }


# ---- alphabets and distributions ----


def test_alphabet_rejects_duplicates_and_empty():
    with pytest.raises(InvalidModelError):
        Alphabet(("a", "a"))
    with pytest.raises(InvalidModelError):
        Alphabet(())
    with pytest.raises(InvalidModelError):
        Alphabet((1, 2))  # type: ignore[arg-type]


def test_alphabet_index_is_stable_bijection():
    alphabet = Alphabet(("lo", "mid", "hi"))
    assert [alphabet.index(label) for label in alphabet] == [0, 1, 2]
    with pytest.raises(UnknownLabel):
        alphabet.index("nope")


def test_distribution_point_mass_and_lookup():
    dist = Distribution.point_mass(BINARY, "1")
    assert dist.prob("1") == 1.0 and dist.prob("0") == 0.0
    with pytest.raises(UnknownLabel):
        dist.prob("2")


def test_distribution_rejects_wrong_shape():
    with pytest.raises(DimensionMismatch):
        Distribution(BINARY, np.array([1.0, 0.0, 0.0]))


# ---- stochasticity ----


def test_row_summing_above_tolerance_is_rejected():
    with pytest.raises(NotStochastic):
        QuantityKernel(1, BINARY, BINARY, np.array([[0.5, 0.6], [0.5, 0.5]]))


def test_negative_entry_is_rejected():
    with pytest.raises(NotStochastic):
        Distribution(BINARY, np.array([1.1, -0.1]))


def test_tiny_drift_is_renormalized_exactly():
    dist = Distribution(BINARY, np.array([0.5, 0.5 + 4e-10]))
    assert abs(float(dist.probs.sum()) - 1.0) <= 1e-12


def test_validated_rows_sum_to_one():
    rng = np.random.default_rng(11)
    for _ in range(20):
        problem = random_problem(rng, n=3, nx=3, ny=2, nyhat=2)
        assert abs(float(problem.init.probs.sum()) - 1.0) <= 1e-12
        for kernel in problem.transitions:
            assert np.all(np.abs(kernel.table.sum(axis=-1) - 1.0) <= 1e-12)
        for kernel in problem.quantities:
            assert np.all(np.abs(kernel.table.sum(axis=-1) - 1.0) <= 1e-12)


# ---- horizon and alphabet wiring ----


def test_horizon_mismatch_on_kernel_counts():
    quantity = QuantityKernel(1, BINARY, BINARY, np.full((2, 2), 0.5))
    with pytest.raises(HorizonMismatch):
        Problem(2, BINARY, BINARY, BINARY, Distribution.point_mass(BINARY, "0"), (), (quantity,), zero_one_loss())


def test_foreign_alphabet_is_rejected():
    other = Alphabet(("a", "b"))
    quantity = QuantityKernel(1, other, other, np.full((2, 2), 0.5))
    loss = ContextualLoss(other, other, other, np.zeros((2, 2, 2)))
    with pytest.raises(DimensionMismatch):
        Problem(1, BINARY, BINARY, BINARY, Distribution.point_mass(BINARY, "0"), (), (quantity,), loss)


def test_n1_problem_has_no_transitions():
    problem = example_section33(1)
    assert problem.transitions == ()
    assert len(problem.quantities) == 1
    with pytest.raises(RoundOutOfRange):
        problem.transition_for_round(2)


# ---- stationary construction ----


def test_make_stationary_matches_example_builders():
    transition = np.zeros((2, 2, 2))
    for x in (0, 1):
        transition[x, 0, 1 - x] = 1.0
        transition[x, 1, x] = 1.0
    quantity = np.array([[0.9, 0.1], [0.4, 0.6]])
    built = make_stationary_problem(
        6, Distribution.point_mass(BINARY, "0"), transition, quantity, zero_one_loss()
    )
    assert built == example_section33(6)

    stock_transition = np.zeros((2, 2, 2))
    stock_transition[:, 0, 0] = 1.0
    stock_transition[:, 1, 1] = 1.0
    stock_quantity = np.array([[0.6, 0.4], [0.3, 0.7]])
    built_stock = make_stationary_problem(
        3, Distribution.point_mass(BINARY, "0"), stock_transition, stock_quantity, zero_one_loss()
    )
    assert built_stock == example_stock(3)


def test_make_stationary_n1_needs_no_transition():
    problem = make_stationary_problem(
        1, Distribution.point_mass(BINARY, "0"), None, np.array([[0.9, 0.1], [0.4, 0.6]]), zero_one_loss()
    )
    assert problem.n == 1 and problem.transitions == ()


# ---- document parsing ----


def test_section33_document_validates():
    problem = validate_problem(section33_dict())
    assert problem == example_section33(6)


def test_round_trip_is_field_by_field_equal():
    for problem in (example_section33(6), example_stock(3), example_section33(1)):
        for stationary in (True, False, "auto"):
            if stationary is True and problem.n == 1:
                continue
            doc = problem_to_dict(problem, stationary=stationary)
            assert validate_problem(doc) == problem


def test_stationary_flag_expands_single_entries():
    doc = section33_dict(4)
    problem = validate_problem(doc)
    assert len(problem.transitions) == 3
    assert all(np.array_equal(k.table, problem.transitions[0].table) for k in problem.transitions)
    assert problem.transitions[1].round == 3


def test_stationary_flag_rejects_full_arrays():
    doc = section33_dict()
    doc["quantities"] = doc["quantities"] * 6
    with pytest.raises(HorizonMismatch):
        validate_problem(doc)


def test_plain_document_requires_full_arrays():
    doc = section33_dict()
    doc.pop("stationary")
    with pytest.raises(HorizonMismatch):
        validate_problem(doc)


def test_missing_loss_record_is_an_error():
    doc = section33_dict()
    doc["loss"] = doc["loss"][:-1]
    with pytest.raises(InvalidModelError, match="missing a record"):
        validate_problem(doc)


def test_duplicate_loss_record_is_an_error():
    doc = section33_dict()
    doc["loss"] = doc["loss"] + [doc["loss"][0]]
    with pytest.raises(InvalidModelError, match="twice"):
        validate_problem(doc)


def test_init_must_cover_every_label():
    doc = section33_dict()
    doc["init"] = {"0": 1.0}
    with pytest.raises(DimensionMismatch):
        validate_problem(doc)


def test_unknown_label_in_row_is_an_error():
    doc = section33_dict()
    doc["quantities"][0]["0"]["2"] = 0.0
    with pytest.raises(DimensionMismatch):
        validate_problem(doc)


def test_bad_json_types_are_rejected():
    doc = section33_dict()
    doc["n"] = "6"
    with pytest.raises(InvalidModelError):
        validate_problem(doc)
    doc = section33_dict()
    doc["init"]["0"] = True
    with pytest.raises(InvalidModelError):
        validate_problem(doc)


def test_ambiguous_composite_key_is_rejected():
    # labels are chosen so "a|b|b" parses as both ("a", "b|b") and ("a|b", "b")
    doc = {
        "n": 2,
        "x_space": ["a", "a|b"],
        "y_space": ["0", "1"],
        "yhat_space": ["b", "b|b"],
        "init": {"a": 1.0, "a|b": 0.0},
        "transitions": [
            {
                "a|b": {"a": 1.0, "a|b": 0.0},
                "a|b|b": {"a": 1.0, "a|b": 0.0},
                "a|b|b|b": {"a": 1.0, "a|b": 0.0},
            }
        ],
        "quantities": [
            {"a": {"0": 1.0, "1": 0.0}, "a|b": {"0": 1.0, "1": 0.0}},
        ]
        * 2,
        "loss": [],
    }
    with pytest.raises(InvalidModelError, match="exactly one"):
        validate_problem(doc)


def test_non_finite_loss_is_rejected():
    with pytest.raises(InvalidModelError):
        ContextualLoss(BINARY, BINARY, BINARY, np.full((2, 2, 2), np.nan))
    doc = section33_dict()
    doc["loss"][0]["value"] = float("nan")
    with pytest.raises(InvalidModelError, match="not finite"):
        validate_problem(doc)


def test_problem_is_immutable():
    problem = example_stock(3)
    with pytest.raises(Exception):
        problem.n = 4  # type: ignore[misc]
    with pytest.raises(ValueError):
        problem.loss.table[0, 0, 0] = 5.0
