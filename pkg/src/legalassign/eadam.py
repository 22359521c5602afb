"""Efficiency-adjusted deferred acceptance, three outcome-equivalent ways.

kesten_eadam re-runs a traced deferred acceptance, each round dropping the
interrupting pairs settled latest; simplified_eadam re-runs it freezing the
students whose schools nobody envies; rotate_remove_consent walks school
rotations once, sealing a school's list whenever a nonconsenting student
would have been bypassed.  All three return the same assignment; the first
two exist as readable references and benchmark baselines, the third is the
O(|E|) production path.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .engine import CONSENT, EngineRun, school_side_run
from .gs import (GSCounters, _as_assignment, _gs_core,
                 gs_student_traced, interrupting_pairs)
from .model import Assignment, Instance, InvalidInstanceError, dominates
from .oracle import enumerate_assignments

__all__ = [
    "ConsentSet", "EadamResult", "kesten_eadam", "simplified_eadam",
    "rotate_remove_consent", "underdemanded_schools", "is_constrained_efficient",
]


@dataclass(frozen=True)
class ConsentSet:
    """The students who consent to waiving their priorities."""
    consenting: frozenset[str]

    @classmethod
    def of(cls, students: Iterable[str]) -> "ConsentSet":
        return cls(frozenset(students))

    @classmethod
    def everyone(cls, inst: Instance) -> "ConsentSet":
        return cls(frozenset(inst.students))

    @classmethod
    def everyone_but(cls, inst: Instance, refusing: Iterable[str]) -> "ConsentSet":
        return cls(frozenset(inst.students) - frozenset(refusing))

    def consents(self, student: str) -> bool:
        return student in self.consenting

    def validate(self, inst: Instance) -> None:
        stray = self.consenting - frozenset(inst.students)
        if stray:
            raise InvalidInstanceError(
                f"consent set names unknown students: {sorted(stray)}")


def _consent_flags(inst: Instance, consent: ConsentSet | None) -> list[bool]:
    if consent is None:
        return [True] * inst.n_students
    consent.validate(inst)
    return [a in consent.consenting for a in inst.students]


@dataclass(frozen=True)
class EadamResult:
    assignment: Assignment
    removed_edges: tuple[tuple[str, str], ...]  # in removal order
    gs_runs: int                                # deferred-acceptance invocations
    gs: GSCounters


def _fresh_alive(inst: Instance) -> list[bytearray]:
    return [bytearray(b"\x01" * len(row)) for row in inst._s_pref]


def kesten_eadam(inst: Instance, consent: ConsentSet | None = None) -> EadamResult:
    """Repeatedly re-run deferred acceptance, each time deleting all the
    interrupting pairs at the latest step that has a consenting interrupter."""
    flags = _consent_flags(inst, consent)
    s_index, s_rank = inst._s_index, inst._s_rank
    b_index = inst._b_index
    alive = _fresh_alive(inst)
    removed: list[tuple[str, str]] = []
    proposals = runs = 0
    while True:
        res = gs_student_traced(inst, alive)
        runs += 1
        proposals += sum(len(r) for r in res.trace.rounds)
        pairs = interrupting_pairs(res.trace)  # latest step first
        step = next((k for a, _, k in pairs if flags[s_index[a]]), None)
        if step is None:
            return EadamResult(res.assignment, tuple(removed), runs,
                               GSCounters(proposals, 0))
        for a, b, k in pairs:
            if k == step and flags[s_index[a]]:
                alive[s_index[a]][s_rank[s_index[a]][b_index[b]]] = 0
                removed.append((a, b))


def underdemanded_schools(inst: Instance, m: Assignment) -> set[str]:
    """Schools that no student strictly prefers to his current match."""
    demanded = [False] * inst.n_schools
    s_pref = inst._s_pref
    match_pos = [len(s_pref[i]) if m.school_of(a) is None
                 else inst.student_rank(a, m.school_of(a))
                 for i, a in enumerate(inst.students)]
    for i in range(inst.n_students):
        row = s_pref[i]
        for pos in range(match_pos[i]):
            demanded[row[pos]] = True
    return {b for j, b in enumerate(inst.schools) if not demanded[j]}


def simplified_eadam(inst: Instance, consent: ConsentSet | None = None) -> EadamResult:
    """Re-run deferred acceptance on the reduced problem; after each run,
    students matched to an underdemanded school (or unmatched) are settled:
    their strictly-better edges are deleted, and a nonconsenting settled
    student drags down with each deleted edge ab every a'b with a' below a.
    Stops once every school is underdemanded.

    A school is underdemanded exactly when it rejected nobody during the run,
    so the scan reuses the per-school rejection flags.  Each round the
    surviving preference rows are rebuilt and the unmodified solver is rerun
    on them; this is the deliberately plain reference implementation.
    """
    flags = _consent_flags(inst, consent)
    s_pref, b_pref = inst._s_pref, inst._b_pref
    s_srank = inst._s_srank
    s_rank, b_rank = inst._s_rank, inst._b_rank
    alive = _fresh_alive(inst)
    removed: list[tuple[str, str]] = []
    proposals = cells = runs = 0
    while True:
        rows = [[row[j] for j in range(len(row)) if mask[j]]
                for row, mask in zip(s_pref, alive)]
        ranks = [[row[j] for j in range(len(row)) if mask[j]]
                 for row, mask in zip(s_srank, alive)]
        state, counters, rejected = _gs_core(rows, ranks, b_pref, inst._quota)
        runs += 1
        proposals += counters.proposals
        cells += counters.cells_scanned
        if not any(rejected):
            return EadamResult(_as_assignment(inst, state.match_school),
                               tuple(removed), runs,
                               GSCounters(proposals, cells))
        for a in range(inst.n_students):
            b = state.match_school[a]
            if b >= 0 and rejected[b]:
                continue  # a's school is still demanded; a is not settled yet
            row, mask = s_pref[a], alive[a]
            for pos in range(len(row)):
                b2 = row[pos]
                if b2 == b:
                    break  # everything above the match is now gone
                if not mask[pos]:
                    continue
                mask[pos] = 0
                removed.append((inst.students[a], inst.schools[b2]))
                if flags[a]:
                    continue
                prow = b_pref[b2]
                my = b_rank[b2][a]
                for k in range(my + 1, len(prow)):
                    a2 = prow[k]
                    pos2 = s_rank[a2][b2]
                    if alive[a2][pos2]:
                        alive[a2][pos2] = 0
                        removed.append((inst.students[a2], inst.schools[b2]))


def rotate_remove_consent(inst: Instance, consent: ConsentSet | None = None, *,
                          order: list[str] | None = None) -> EngineRun:
    """School-rotate-remove with the nonconsent cascade; single deferred-
    acceptance invocation plus an O(|E|) walk."""
    return school_side_run(inst, mode=CONSENT,
                           consenting=_consent_flags(inst, consent), order=order)


def _violated_priority(inst: Instance, m: Assignment, a: str) -> bool:
    """a strictly prefers some school that admitted a student below him."""
    mb = m.school_of(a)
    top = inst.student_rank(a, mb) if mb is not None else len(inst._s_pref[inst._s_index[a]])
    row = inst._s_pref[inst._s_index[a]]
    for pos in range(top):
        b = inst.schools[row[pos]]
        r = inst.school_rank(b, a)
        if any(inst.school_rank(b, a2) > r for a2 in m.students_of(b)):
            return True
    return False


def is_constrained_efficient(inst: Instance, consent: ConsentSet | None,
                             m: Assignment, cap: int = 10 ** 6) -> bool:
    """True iff m respects every nonconsenting student's priority and every
    assignment the students strictly prefer violates one.  Enumerates all
    assignments, so this is a test oracle for small instances only."""
    flags = _consent_flags(inst, consent)
    refusing = [a for i, a in enumerate(inst.students) if not flags[i]]
    if any(_violated_priority(inst, m, a) for a in refusing):
        return False
    for m2 in enumerate_assignments(inst, cap):
        # strict preferences: m2 strictly dominates m iff it weakly does and differs
        if m2 == m or not dominates(inst, m2, m):
            continue
        if not any(_violated_priority(inst, m2, a) for a in refusing):
            return False
    return True
