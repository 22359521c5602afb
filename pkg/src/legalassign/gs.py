"""Deferred acceptance, linear-time and trace-producing variants.

The fast solvers run in O(|E|): every proposal consumes a preference cell,
and each school's pointer to its least preferred tentative student only
sweeps its list once.  The traced variant replays the classic simultaneous
round mechanics and records every accept/reject/displace event, which is
what interrupter detection consumes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

from .model import Assignment, Instance

ACCEPTED = "accepted"
REJECTED = "rejected"
DISPLACED = "displaced"

_UNRANKED = 1 << 60  # worse than any real rank


@dataclass(frozen=True)
class GSCounters:
    proposals: int
    cells_scanned: int


@dataclass(frozen=True)
class GSResult:
    assignment: Assignment
    counters: GSCounters
    #: schools that rejected or displaced at least one student during the run;
    #: equivalently, the schools some student ends up strictly preferring.
    rejecting_schools: frozenset[str]


class _MatchState(NamedTuple):
    """Index-level solver output, reused by downstream engines."""
    match_school: list[int]  # per student: school index or -1
    match_pos: list[int]     # per student: own-list position of match, len(list) if unmatched
    fill: list[int]          # per school: seats taken


def _as_assignment(inst: Instance, match_school: Sequence[int]) -> Assignment:
    schools = inst.schools
    return Assignment({a: (schools[j] if j >= 0 else None)
                       for a, j in zip(inst.students, match_school)})


def _gs_core(s_pref: list[list[int]], s_srank: list[list[int]],
             b_pref: list[list[int]], quota: Sequence[int],
             ) -> tuple[_MatchState, GSCounters, bytearray]:
    """Student-proposing run on raw index rows.

    Returns the match state, counters, and a per-school rejection flag.
    match_pos entries are positions within the rows given here.
    """
    n_a, n_b = len(s_pref), len(b_pref)
    match_pos = [len(row) for row in s_pref]
    match_school = [-1] * n_a
    ptr = [0] * n_a
    fill = [0] * n_b
    worst = [-1] * n_b                      # list position of worst tentative student
    held = [None] * n_b                     # lazily allocated position-flag arrays
    rejected_flag = bytearray(n_b)
    proposals = 0
    cells = 0

    stack = [a for a in range(n_a - 1, -1, -1) if s_pref[a]]
    while stack:
        a = stack.pop()
        row = s_pref[a]
        cranks = s_srank[a]
        pos = ptr[a]
        n = len(row)
        while pos < n:
            cells += 1
            b = row[pos]
            rank = cranks[pos]
            proposals += 1
            flags = held[b]
            if flags is None:
                flags = held[b] = bytearray(len(b_pref[b]))
            if fill[b] < quota[b]:
                flags[rank] = 1
                fill[b] += 1
                if rank > worst[b]:
                    worst[b] = rank
                match_school[a] = b
                match_pos[a] = pos
                ptr[a] = pos + 1
                break
            if rank > worst[b]:
                rejected_flag[b] = 1
                pos += 1
                continue
            # displace b's worst tentative student
            rejected_flag[b] = 1
            w = worst[b]
            loser = b_pref[b][w]
            flags[w] = 0
            flags[rank] = 1
            match_school[loser] = -1
            match_pos[loser] = len(s_pref[loser])
            stack.append(loser)
            # rank < old worst and flags[rank] is set, so this stops at >= rank
            w -= 1
            while not flags[w]:
                w -= 1
                cells += 1
            worst[b] = w
            match_school[a] = b
            match_pos[a] = pos
            ptr[a] = pos + 1
            break
        else:
            ptr[a] = pos  # exhausted: stays unmatched

    return (_MatchState(match_school, match_pos, fill),
            GSCounters(proposals, cells), rejected_flag)


def _gs_student_arrays(inst: Instance) -> tuple[_MatchState, GSCounters, bytearray]:
    return _gs_core(inst._s_pref, inst._s_srank, inst._b_pref, inst._quota)


def gs_student(inst: Instance) -> GSResult:
    """Student-proposing deferred acceptance; student-optimal stable assignment."""
    state, counters, rej = _gs_student_arrays(inst)
    return GSResult(_as_assignment(inst, state.match_school), counters,
                    frozenset(b for b, f in zip(inst.schools, rej) if f))


def _gs_school_arrays(inst: Instance) -> tuple[_MatchState, GSCounters]:
    """School-proposing run on index arrays (school-optimal stable assignment)."""
    b_pref, b_rrank = inst._b_pref, inst._b_rrank
    s_pref = inst._s_pref
    n_a, n_b = inst.n_students, inst.n_schools
    quota = inst._quota

    cur_rank = [_UNRANKED] * n_a            # rank of held school on the student's list
    match_school = [-1] * n_a
    fill = [0] * n_b
    ptr = [0] * n_b
    proposals = 0

    stack = [b for b in range(n_b - 1, -1, -1) if b_pref[b]]
    while stack:
        b = stack.pop()
        row = b_pref[b]
        cranks = b_rrank[b]
        pos = ptr[b]
        n = len(row)
        while fill[b] < quota[b] and pos < n:
            a = row[pos]
            rank = cranks[pos]
            pos += 1
            proposals += 1
            if rank < cur_rank[a]:
                old = match_school[a]
                if old >= 0:
                    fill[old] -= 1
                    stack.append(old)
                cur_rank[a] = rank
                match_school[a] = b
                fill[b] += 1
        ptr[b] = pos

    match_pos = [cur_rank[a] if cur_rank[a] != _UNRANKED else len(s_pref[a])
                 for a in range(n_a)]
    return (_MatchState(match_school, match_pos, fill),
            GSCounters(proposals, proposals))


def gs_school(inst: Instance) -> GSResult:
    state, counters = _gs_school_arrays(inst)
    return GSResult(_as_assignment(inst, state.match_school), counters, frozenset())


# -- traced variant ----------------------------------------------------------

@dataclass(frozen=True)
class GSEvent:
    round: int
    student: str
    school: str
    outcome: str  # accepted | rejected | displaced


@dataclass(frozen=True)
class GSTrace:
    rounds: tuple[tuple[GSEvent, ...], ...]

    def events(self) -> Iterator[GSEvent]:
        for r in self.rounds:
            yield from r

    def dump(self) -> str:
        return "\n".join(f"{e.round} {e.student} {e.school} {e.outcome}"
                         for e in self.events()) + ("\n" if self.rounds else "")


class TracedGS(NamedTuple):
    assignment: Assignment
    trace: GSTrace


def gs_student_traced(inst: Instance, alive: Sequence[bytearray] | None = None) -> TracedGS:
    """Simultaneous-rounds student-proposing run with a full event log.

    Each round every unmatched student with list remaining proposes to his
    next school; each school keeps the best q of incumbents plus proposers.
    A student whose list runs out simply stops (no event).  The final
    assignment equals gs_student's.
    """
    students, schools = inst.students, inst.schools
    s_pref = inst._s_pref
    b_rank = {b: {a: r for r, a in enumerate(inst.school_prefs[b])} for b in schools}
    quota = inst.quota

    ptr = {a: 0 for a in students}
    cur: dict[str, str | None] = {a: None for a in students}
    holding: dict[str, set[str]] = {b: set() for b in schools}
    rounds: list[tuple[GSEvent, ...]] = []
    rnd = 0
    while True:
        rnd += 1
        proposals: dict[str, list[str]] = {}
        for i, a in enumerate(students):
            if cur[a] is not None:
                continue
            row = s_pref[i]
            pos = ptr[a]
            if alive is not None:
                while pos < len(row) and not alive[i][pos]:
                    pos += 1
            if pos >= len(row):
                ptr[a] = pos
                continue
            b = schools[row[pos]]
            ptr[a] = pos + 1
            proposals.setdefault(b, []).append(a)
        if not proposals:
            break
        events: list[GSEvent] = []
        for b in schools:
            props = proposals.get(b)
            if not props:
                continue
            rank = b_rank[b]
            pool = sorted(holding[b] | set(props), key=rank.get)
            kept = set(pool[:quota[b]])
            for a in props:
                if a in kept:
                    events.append(GSEvent(rnd, a, b, ACCEPTED))
                    cur[a] = b
                else:
                    events.append(GSEvent(rnd, a, b, REJECTED))
            for a in holding[b] - kept:
                events.append(GSEvent(rnd, a, b, DISPLACED))
                cur[a] = None
            holding[b] = kept
        rounds.append(tuple(events))
    return TracedGS(Assignment(cur), GSTrace(tuple(rounds)))


def interrupting_pairs(trace: GSTrace) -> list[tuple[str, str, int]]:
    """Pairs (a, b, k') where a was tentatively accepted by b at some round k,
    pushed out at round k', and b rejected or displaced somebody in rounds
    k..k'-1.  Sorted by k' descending, then by student and school id.
    """
    accepted_at: dict[tuple[str, str], int] = {}
    rejections: dict[str, list[int]] = {}
    out: list[tuple[str, str, int]] = []
    for e in trace.events():
        if e.outcome == ACCEPTED:
            accepted_at[(e.student, e.school)] = e.round
        else:
            rejections.setdefault(e.school, []).append(e.round)
            if e.outcome == DISPLACED:
                k = accepted_at[(e.student, e.school)]
                if any(k <= r < e.round for r in rejections[e.school]):
                    out.append((e.student, e.school, e.round))
    out.sort(key=lambda t: (-t[2], t[0], t[1]))
    return out
