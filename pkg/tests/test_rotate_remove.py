import random

from hypothesis import given, settings
from hypothesis import strategies as st

from legalassign import (Assignment, dominates, enumerate_stable, gs_student,
                         is_stable, legal_fixed_point, legal_subinstance,
                         rotate_remove, school_optimal_legal, stable_edges,
                         student_optimal_legal)

from _markets import random_market

STUDENT_OPT_EX3 = Assignment({"a1": "b2", "a2": "b2", "a3": "b3",
                              "a4": "b1", "a5": "b3", "a6": "b1"})
SCHOOL_OPT_EX3 = Assignment({"a1": "b1", "a2": "b2", "a3": "b2",
                             "a4": "b1", "a5": "b3", "a6": "b3"})


def test_school_rotations_reach_student_optimal_legal(ex3):
    run = rotate_remove(ex3, "schools")
    assert run.assignment == STUDENT_OPT_EX3
    assert run.removed_edges == (("a2", "b1"),)


def test_student_rotations_reach_school_optimal_legal(ex3):
    run = rotate_remove(ex3, "students")
    assert run.assignment == SCHOOL_OPT_EX3
    assert run.removed_edges == (("a1", "b3"),)


def test_optimal_legal_wrappers(ex3):
    assert student_optimal_legal(ex3) == STUDENT_OPT_EX3
    assert school_optimal_legal(ex3) == SCHOOL_OPT_EX3


def test_legal_optima_dominate_in_order(ex3):
    m0 = gs_student(ex3).assignment
    assert dominates(ex3, STUDENT_OPT_EX3, m0)
    assert dominates(ex3, m0, SCHOOL_OPT_EX3)


def test_student_optimal_legal_ex1(ex1):
    assert student_optimal_legal(ex1) == Assignment({"1": "A", "2": "B", "3": "C"})


def test_legal_subinstance_ex1(ex1):
    report = legal_subinstance(ex1)
    assert report.legal_edges == frozenset({("1", "A"), ("1", "B"), ("2", "A"),
                                            ("2", "B"), ("3", "C")})
    assert report.illegal_edges == frozenset({("1", "C"), ("3", "A")})
    assert report.student_optimal == Assignment({"1": "A", "2": "B", "3": "C"})
    assert report.school_optimal == Assignment({"1": "B", "2": "A", "3": "C"})
    assert report.instance.n_edges == 5


def test_legal_subinstance_keeps_everything_when_all_edges_legal(ex9):
    report = legal_subinstance(ex9)
    assert report.illegal_edges == frozenset()
    assert report.instance.n_edges == 16


def test_stable_edges_ex1(ex1):
    # the instance has a single stable assignment
    assert stable_edges(ex1) == frozenset({("1", "B"), ("2", "A"), ("3", "C")})


@given(st.integers(0, 10 ** 6))
@settings(max_examples=80, deadline=None)
def test_subinstance_stable_set_is_the_legal_set(seed):
    inst = random_market(random.Random(seed))
    legal, _ = legal_fixed_point(inst)
    report = legal_subinstance(inst)
    assert set(enumerate_stable(report.instance)) == set(legal)
    assert report.legal_edges == frozenset(
        (a, b) for m in legal for a, b in m.matched_pairs)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=80, deadline=None)
def test_removed_edges_lie_on_no_legal_assignment(seed):
    inst = random_market(random.Random(seed))
    legal, _ = legal_fixed_point(inst)
    on_legal = {(a, b) for m in legal for a, b in m.matched_pairs}
    for side in ("students", "schools"):
        run = rotate_remove(inst, side)
        assert not on_legal.intersection(run.removed_edges)
        assert run.assignment in legal


@given(st.integers(0, 10 ** 6))
@settings(max_examples=60, deadline=None)
def test_outputs_are_lattice_extremes_of_the_legal_set(seed):
    inst = random_market(random.Random(seed))
    legal, _ = legal_fixed_point(inst)
    lo = school_optimal_legal(inst)
    hi = student_optimal_legal(inst)
    for m in legal:
        assert dominates(inst, hi, m)
        assert dominates(inst, m, lo)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=60, deadline=None)
def test_stable_edges_matches_enumeration(seed):
    inst = random_market(random.Random(seed))
    expected = {(a, b) for m in enumerate_stable(inst) for a, b in m.matched_pairs}
    assert stable_edges(inst) == expected


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40, deadline=None)
def test_subinstance_optima_are_stable_in_it(seed):
    inst = random_market(random.Random(seed))
    report = legal_subinstance(inst)
    assert is_stable(report.instance, report.student_optimal)
    assert is_stable(report.instance, report.school_optimal)
