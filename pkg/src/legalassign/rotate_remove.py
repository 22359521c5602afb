"""Rotate-remove: compute legal assignments and the legal subinstance.

Eliminating school-rotations while deleting the edges exposed at sinks walks
from the student-optimal stable assignment up to the student-optimal legal
assignment; the student-side mirror walks from the school-optimal stable
assignment down to the school-optimal legal one.  Gluing the two walks to the
stable lattice in the middle yields every legal edge, hence the subinstance
whose stable assignments are exactly the legal assignments.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .engine import (CONSENT, ENUMERATE, LEGAL, EngineCounters, EngineRun,
                     all_rotations, school_side_run, student_side_run)
from .gs import GSCounters, gs_school, gs_student
from .model import Assignment, Instance, SCHOOLS, STUDENTS, _check_side
from .rotations import (Rotation, _cycle_to_rotation, build_rotation_digraph,
                        eliminate, sigma_inverse)

__all__ = [
    "rotate_remove", "rotate_remove_naive", "NaiveRun",
    "student_optimal_legal", "school_optimal_legal",
    "stable_edges", "legal_subinstance", "LegalSubinstanceReport",
]


def rotate_remove(inst: Instance, side: str = SCHOOLS, *,
                  order: list[str] | None = None) -> EngineRun:
    """Eliminate every rotation of the given side, deleting illegal edges at
    sinks.  side=schools yields the student-optimal legal assignment,
    side=students the school-optimal one.  `order` only permutes the walk;
    the outputs are invariant under it."""
    _check_side(side)
    if side == SCHOOLS:
        return school_side_run(inst, mode=LEGAL, order=order)
    return student_side_run(inst, mode=LEGAL, order=order)


def student_optimal_legal(inst: Instance) -> Assignment:
    return school_side_run(inst).assignment


def school_optimal_legal(inst: Instance) -> Assignment:
    return student_side_run(inst).assignment


@dataclass(frozen=True)
class NaiveRun:
    assignment: Assignment
    rotations: tuple[Rotation, ...]
    removed_edges: tuple[tuple[str, str], ...]


def rotate_remove_naive(inst: Instance, side: str = SCHOOLS, *,
                        rng: random.Random | None = None,
                        consenting: dict[str, bool] | None = None) -> NaiveRun:
    """Digraph-rebuild reference: at each step pick, uniformly at random, one
    applicable action (delete the edge under a sink, or eliminate a cycle).
    Exercises the choice freedom the fast walk never uses."""
    _check_side(side)
    if consenting is not None and side != SCHOOLS:
        raise ValueError("consent applies to school-side elimination only")
    rng = rng if rng is not None else random.Random()
    sp = {a: list(row) for a, row in inst.student_prefs.items()}
    bp = {b: list(row) for b, row in inst.school_prefs.items()}
    cur = Instance(inst.students, inst.schools, inst.quota, sp, bp)
    m = (gs_student(cur) if side == SCHOOLS else gs_school(cur)).assignment
    x_ids = set(inst.schools if side == SCHOOLS else inst.students)
    removed: list[tuple[str, str]] = []
    rotations: list[Rotation] = []
    while True:
        dg = build_rotation_digraph(cur, m, side)
        if not dg.arcs:
            break
        actions: list[tuple] = [("cycle", c) for c in dg.cycles()]
        for x, y in dg.arcs.items():
            if x not in x_ids or y is None:
                continue
            nxt = dg.arcs.get(y)  # next agent past the successor y
            if nxt is None or nxt not in dg.arcs:
                actions.append(("remove", x, y))
        if not actions:
            raise AssertionError("digraph has arcs but no applicable action")
        act = actions[rng.randrange(len(actions))]
        if act[0] == "cycle":
            rho = _cycle_to_rotation(cur, side, act[1])
            m = eliminate(cur, m, rho)
            rotations.append(rho)
            continue
        _, x, y = act
        a, b = (y, x) if side == SCHOOLS else (x, y)
        doomed = [(a, b)]
        if consenting is not None and not consenting.get(a, True):
            below = bp[b][bp[b].index(a) + 1:]
            doomed += [(a2, b) for a2 in below]
        for a2, b2 in doomed:
            sp[a2].remove(b2)
            bp[b2].remove(a2)
            removed.append((a2, b2))
        cur = Instance(inst.students, inst.schools, inst.quota, sp, bp)
    return NaiveRun(m, tuple(rotations), tuple(removed))


def stable_edges(inst: Instance) -> frozenset[tuple[str, str]]:
    """Edges on some stable assignment: the school-optimal one plus every
    (x_i, y_i) pair of a student-rotation."""
    out = set(gs_school(inst).assignment.matched_pairs)
    for rho in all_rotations(inst, STUDENTS):
        out.update(rho.pairs)
    return frozenset(out)


def _sum_counters(runs: list[EngineRun]) -> EngineCounters:
    return EngineCounters(
        sum(r.counters.edge_scans for r in runs),
        sum(r.counters.path_extensions for r in runs),
        sum(r.counters.rotations_eliminated for r in runs),
        sum(r.counters.edges_removed for r in runs),
        GSCounters(sum(r.counters.gs.proposals for r in runs),
                   sum(r.counters.gs.cells_scanned for r in runs)),
    )


@dataclass(frozen=True)
class LegalSubinstanceReport:
    instance: Instance                     # original preferences minus illegal edges
    legal_edges: frozenset[tuple[str, str]]
    illegal_edges: frozenset[tuple[str, str]]
    student_optimal: Assignment
    school_optimal: Assignment
    rotations: tuple[Rotation, ...]        # student-rotations of the subinstance,
                                           # ordered from student- to school-optimal
    counters: EngineCounters


def legal_subinstance(inst: Instance) -> LegalSubinstanceReport:
    """Restrict the instance to its legal edges.

    The student-rotations of the restricted instance split into three runs:
    the mirror images of the school-rotations eliminated on the way up to the
    student-optimal legal assignment, the student-rotations of the original
    instance, and the ones eliminated on the way down to the school-optimal
    legal assignment.  The legal edge set is assembled from them twice, once
    from each end, and the two forms are checked against each other.
    """
    up = school_side_run(inst)
    down = student_side_run(inst)
    mid = student_side_run(inst, mode=ENUMERATE)
    rotations = (tuple(sigma_inverse(tau) for tau in reversed(up.rotations))
                 + mid.rotations + down.rotations)

    from_bottom = set(down.assignment.matched_pairs)
    for rho in rotations:
        from_bottom.update(rho.pairs)
    from_top = set(up.assignment.matched_pairs)
    for rho in rotations:
        pairs = rho.pairs
        r = len(pairs)
        from_top.update((pairs[i][0], pairs[(i + 1) % r][1]) for i in range(r))
    if from_bottom != from_top:
        raise AssertionError("legal edge set differs between the two walks")

    legal = frozenset(from_bottom)
    illegal = frozenset(e for e in inst.edges() if e not in legal)
    sp = {a: [b for b in inst.student_prefs[a] if (a, b) in legal]
          for a in inst.students}
    bp = {b: [a for a in inst.school_prefs[b] if (a, b) in legal]
          for b in inst.schools}
    sub = Instance(inst.students, inst.schools, inst.quota, sp, bp)
    return LegalSubinstanceReport(sub, legal, illegal, up.assignment,
                                  down.assignment, rotations,
                                  _sum_counters([up, down, mid]))
