"""Linear-time path-following solvers over rotation digraphs.

Instead of materializing a rotation digraph per iteration, the solvers grow
a single directed path, school (or student) by school, using per-agent scan
positions that only move forward.  Reaching a sink deletes one edge and pops
one path entry; closing a cycle eliminates the corresponding rotation and
truncates the path.  Every preference cell is scanned at most once, plus one
re-scan per eliminated rotation, so a full run costs O(|E|).

Three behaviours share the machinery:
  - legal:     rotate-remove; sinks delete illegal edges (finds legal optima)
  - consent:   legal plus the nonconsent cascade that seals a school's list
               when the student losing out did not consent
  - enumerate: no deletions; a sink permanently retires the whole path,
               which walks the stable lattice and reports every rotation
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .gs import GSCounters, _as_assignment, _gs_school_arrays, _gs_student_arrays
from .model import Assignment, Instance, SCHOOLS, STUDENTS, _check_side
from .rotations import Rotation

_EMPTY = -1  # shared empty sink; also the "no student" marker in path entries

LEGAL = "legal"
CONSENT = "consent"
ENUMERATE = "enumerate"


@dataclass(frozen=True)
class EngineCounters:
    edge_scans: int
    path_extensions: int
    rotations_eliminated: int
    edges_removed: int
    gs: GSCounters

    @property
    def total_scans(self) -> int:
        """Preference cells touched by the initial solve plus the walk."""
        return self.edge_scans + self.gs.cells_scanned


@dataclass(frozen=True)
class EngineRun:
    assignment: Assignment
    rotations: tuple[Rotation, ...]          # in elimination order
    removed_edges: tuple[tuple[str, str], ...]  # (student, school)
    counters: EngineCounters


def _order_indices(ids: Sequence[str], index: dict[str, int],
                   order: Sequence[str] | None) -> list[int]:
    if order is None:
        return list(range(len(ids)))
    out = [index[x] for x in order]
    if sorted(out) != list(range(len(ids))):
        raise ValueError("order must be a permutation of all agents on the side")
    return out


def _school_worst(inst: Instance, match_school: list[int],
                  match_pos: list[int]) -> tuple[list[int], list[int]]:
    """fill count and worst-member position (on the school's own list)."""
    fill = [0] * inst.n_schools
    worst = [-1] * inst.n_schools
    s_srank = inst._s_srank
    for a, b in enumerate(match_school):
        if b < 0:
            continue
        fill[b] += 1
        r = s_srank[a][match_pos[a]]
        if r > worst[b]:
            worst[b] = r
    return fill, worst


def _run_school_side(inst: Instance, match_school: list[int], match_pos: list[int],
                     mode: str, consenting: Sequence[bool] | None,
                     order: Sequence[str] | None, gs_counters: GSCounters) -> EngineRun:
    b_pref, b_rrank = inst._b_pref, inst._b_rrank
    n_b = inst.n_schools
    deg = [len(row) for row in b_pref]
    quota = inst._quota
    fill, worst = _school_worst(inst, match_school, match_pos)

    # schools with a free seat can never gain a suitor here: in a stable
    # assignment nobody prefers them, and students only improve from now on
    p = [worst[b] if fill[b] == quota[b] else deg[b] for b in range(n_b)]
    restart = _order_indices(inst.schools, inst._b_index, order)
    f = 0
    path_a: list[int] = []   # student arriving at each entry; _EMPTY at the head
    path_b: list[int] = []   # school of each entry; _EMPTY is the shared sink
    on_path = [0] * n_b      # school -> path index + 1
    removed: list[tuple[int, int]] = []
    rotations: list[list[tuple[int, int]]] = []
    scans = extensions = 0

    while True:
        if not path_b:
            while f < n_b and p[restart[f]] >= deg[restart[f]]:
                f += 1
            if f == n_b:
                break
            head = restart[f]
            path_a.append(_EMPTY)
            path_b.append(head)
            on_path[head] = 1
        tail = path_b[-1]
        if tail == _EMPTY or p[tail] >= deg[tail]:
            if mode == ENUMERATE:
                # the whole path is permanently stuck (its successor chain
                # dead-ends here forever), so retire every school on it
                for b in path_b:
                    if b >= 0:
                        p[b] = deg[b]
                        on_path[b] = 0
                path_a.clear()
                path_b.clear()
                continue
            a_in = path_a.pop()
            path_b.pop()
            if tail >= 0:
                on_path[tail] = 0
                p[tail] = deg[tail]
            if a_in >= 0:
                b_prev = path_b[-1]
                removed.append((a_in, b_prev))
                if consenting is not None and not consenting[a_in]:
                    # seal b_prev below the lost student; it becomes a sink
                    for k in range(p[b_prev] + 1, deg[b_prev]):
                        removed.append((b_pref[b_prev][k], b_prev))
                    p[b_prev] = deg[b_prev]
            continue
        # find the successor of tail: next student below p preferring tail
        row_a = b_pref[tail]
        row_r = b_rrank[tail]
        d = deg[tail]
        pos = start = p[tail]
        found = -1
        while True:
            pos += 1
            if pos >= d:
                scans += pos - start - 1
                break
            a = row_a[pos]
            if row_r[pos] < match_pos[a]:
                found = a
                scans += pos - start
                break
        p[tail] = pos
        if found < 0:
            continue  # sink; handled at the top
        nxt = match_school[found]
        if nxt >= 0 and on_path[nxt]:
            # cycle: entries from l onward plus the closing student
            l = on_path[nxt] - 1
            cyc = path_b[l:]
            partners = [found] + path_a[l + 1:]
            rotations.append(list(zip(cyc, partners)))
            for b in cyc:
                a_new = b_pref[b][p[b]]
                match_school[a_new] = b
                match_pos[a_new] = b_rrank[b][p[b]]
                on_path[b] = 0
            del path_b[l:]
            del path_a[l:]
            if l > 0:
                p[path_b[-1]] -= 1  # its successor edge needs one re-scan
            continue
        path_a.append(found)
        path_b.append(nxt)  # _EMPTY when found is unmatched
        if nxt >= 0:
            on_path[nxt] = len(path_b)
        extensions += 1

    students, schools = inst.students, inst.schools
    return EngineRun(
        _as_assignment(inst, match_school),
        tuple(Rotation(SCHOOLS, tuple([(schools[b], students[a]) for b, a in rot]))
              for rot in rotations),
        tuple([(students[a], schools[b]) for a, b in removed]),
        EngineCounters(scans, extensions, len(rotations), len(removed), gs_counters),
    )


def _run_student_side(inst: Instance, match_school: list[int], match_pos: list[int],
                      mode: str, order: Sequence[str] | None,
                      gs_counters: GSCounters) -> EngineRun:
    s_pref, s_srank = inst._s_pref, inst._s_srank
    b_pref = inst._b_pref
    n_a, n_b = inst.n_students, inst.n_schools
    deg = [len(row) for row in s_pref]
    quota = inst._quota
    fill, worst = _school_worst(inst, match_school, match_pos)
    under_quota = [fill[b] < quota[b] for b in range(n_b)]
    held = [bytearray(len(b_pref[b])) for b in range(n_b)]
    for a, b in enumerate(match_school):
        if b >= 0:
            held[b][s_srank[a][match_pos[a]]] = 1

    # an unmatched student stays unmatched: no school with a free seat lists
    # him (stability), and full schools only improve their worst member
    p = [match_pos[a] if match_school[a] >= 0 else deg[a] for a in range(n_a)]
    restart = _order_indices(inst.students, inst._s_index, order)
    f = 0
    path_b: list[int] = []   # school arriving at each entry; _EMPTY at the head
    path_a: list[int] = []   # student of each entry; _EMPTY is the shared sink
    on_path = [0] * n_a
    removed: list[tuple[int, int]] = []
    rotations: list[list[tuple[int, int]]] = []
    scans = extensions = 0

    while True:
        if not path_a:
            while f < n_a and p[restart[f]] >= deg[restart[f]]:
                f += 1
            if f == n_a:
                break
            head = restart[f]
            path_b.append(_EMPTY)
            path_a.append(head)
            on_path[head] = 1
        tail = path_a[-1]
        if tail == _EMPTY or p[tail] >= deg[tail]:
            if mode == ENUMERATE:
                for a in path_a:
                    if a >= 0:
                        p[a] = deg[a]
                        on_path[a] = 0
                path_b.clear()
                path_a.clear()
                continue
            b_in = path_b.pop()
            path_a.pop()
            if tail >= 0:
                on_path[tail] = 0
                p[tail] = deg[tail]
            if b_in >= 0:
                removed.append((path_a[-1], b_in))
            continue
        row_b = s_pref[tail]
        row_r = s_srank[tail]
        d = deg[tail]
        pos = start = p[tail]
        found = -1
        while True:
            pos += 1
            if pos >= d:
                scans += pos - start - 1
                break
            b = row_b[pos]
            if under_quota[b] or row_r[pos] < worst[b]:
                found = b
                scans += pos - start
                break
        p[tail] = pos
        if found < 0:
            continue
        nxt = _EMPTY if under_quota[found] else b_pref[found][worst[found]]
        if nxt >= 0 and on_path[nxt]:
            l = on_path[nxt] - 1
            cyc = path_a[l:]
            partners = [found] + path_b[l + 1:]
            rotations.append(list(zip(cyc, partners)))
            for a in cyc:
                pos = p[a]
                b = s_pref[a][pos]
                flags = held[b]
                flags[worst[b]] = 0          # its worst member moves on
                r = s_srank[a][pos]
                flags[r] = 1
                w = worst[b] - 1
                while not flags[w]:
                    w -= 1
                worst[b] = w
                match_school[a] = b
                match_pos[a] = pos
                on_path[a] = 0
            del path_a[l:]
            del path_b[l:]
            if l > 0:
                p[path_a[-1]] -= 1
            continue
        path_b.append(found)
        path_a.append(nxt)
        if nxt >= 0:
            on_path[nxt] = len(path_a)
        extensions += 1

    students, schools = inst.students, inst.schools
    return EngineRun(
        _as_assignment(inst, match_school),
        tuple(Rotation(STUDENTS, tuple([(students[a], schools[b]) for a, b in rot]))
              for rot in rotations),
        tuple([(students[a], schools[b]) for a, b in removed]),
        EngineCounters(scans, extensions, len(rotations), len(removed), gs_counters),
    )


def school_side_run(inst: Instance, *, mode: str = LEGAL,
                    consenting: Sequence[bool] | None = None,
                    order: Sequence[str] | None = None) -> EngineRun:
    """Walk school-rotations upward from a stable assignment.

    legal/consent start at the student-optimal stable assignment and climb to
    the student-optimal legal (resp. EADAM) assignment; enumerate starts at
    the school-optimal one and reports every school-rotation on the way up.
    """
    if mode not in (LEGAL, CONSENT, ENUMERATE):
        raise ValueError(f"unknown mode {mode!r}")
    if (consenting is not None) != (mode == CONSENT):
        raise ValueError("consenting is required exactly in consent mode")
    if mode == ENUMERATE:
        state, gs_counters = _gs_school_arrays(inst)
    else:
        state, gs_counters, _ = _gs_student_arrays(inst)
    return _run_school_side(inst, state.match_school, state.match_pos,
                            mode, consenting, order, gs_counters)


def student_side_run(inst: Instance, *, mode: str = LEGAL,
                     order: Sequence[str] | None = None) -> EngineRun:
    """Walk student-rotations downward; the mirror of school_side_run.

    legal starts at the school-optimal stable assignment and descends to the
    school-optimal legal assignment; enumerate starts at the student-optimal
    one and reports every student-rotation on the way down.
    """
    if mode not in (LEGAL, ENUMERATE):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == ENUMERATE:
        state, gs_counters, _ = _gs_student_arrays(inst)
    else:
        state, gs_counters = _gs_school_arrays(inst)
    return _run_student_side(inst, state.match_school, state.match_pos,
                             mode, order, gs_counters)


def all_rotations(inst: Instance, side: str) -> list[Rotation]:
    """Every rotation of the given side exposed in any stable assignment,
    in one elimination order (the set does not depend on the order)."""
    _check_side(side)
    if side == SCHOOLS:
        return list(school_side_run(inst, mode=ENUMERATE).rotations)
    return list(student_side_run(inst, mode=ENUMERATE).rotations)
