"""Core market model: instances, assignments, blocking, dominance, reduction.

An instance is a bipartite market between students and schools.  Every agent
ranks a subset of the other side (strict order, most preferred first), school
``b`` additionally has a seat quota ``q_b >= 1``.  Adjacency is symmetric:
``b`` appears on ``a``'s list iff ``a`` appears on ``b``'s.  Being unmatched
is always an agent's least preferred outcome.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

STUDENTS = "students"
SCHOOLS = "schools"

SIDES = (STUDENTS, SCHOOLS)


class InvalidInstanceError(ValueError):
    """Raised when instance data violates a structural invariant."""


class ParseError(ValueError):
    """Raised on malformed instance text; carries a 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class UnstableAssignmentError(ValueError):
    """Raised when an operation requiring a stable assignment finds a blocking pair."""

    def __init__(self, student: str, school: str):
        self.pair = (student, school)
        super().__init__(f"assignment is not stable: ({student}, {school}) is a blocking pair")


def _check_side(side: str) -> None:
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")


class Instance:
    """Immutable one-to-many market.

    Construction validates all structural invariants.  Identifiers are opaque
    strings; internally agents are densely indexed and every preference cell
    carries the cross rank of the owner on the listed agent's list, so solver
    comparisons are plain integer comparisons.
    """

    __slots__ = (
        "_students", "_schools", "_quota", "_s_index", "_b_index",
        "_s_pref", "_b_pref", "_s_srank", "_b_rrank", "_n_edges",
        "__dict__",  # cached_property storage
    )

    def __init__(
        self,
        students: Sequence[str],
        schools: Sequence[str],
        quota: Mapping[str, int],
        student_prefs: Mapping[str, Sequence[str]],
        school_prefs: Mapping[str, Sequence[str]],
    ):
        self._students = tuple(students)
        self._schools = tuple(schools)
        s_index = {a: i for i, a in enumerate(self._students)}
        b_index = {b: i for i, b in enumerate(self._schools)}
        if len(s_index) != len(self._students):
            raise InvalidInstanceError("duplicate student identifier")
        if len(b_index) != len(self._schools):
            raise InvalidInstanceError("duplicate school identifier")
        overlap = s_index.keys() & b_index.keys()
        if overlap:
            raise InvalidInstanceError(f"identifier on both sides: {sorted(overlap)[0]!r}")
        self._s_index = s_index
        self._b_index = b_index

        quotas = []
        for b in self._schools:
            q = quota.get(b, 1)
            if not isinstance(q, int) or q < 1:
                raise InvalidInstanceError(f"school {b!r} has quota {q!r}; quotas must be integers >= 1")
            quotas.append(q)
        for b in quota:
            if b not in b_index:
                raise InvalidInstanceError(f"quota given for unknown school {b!r}")
        self._quota = tuple(quotas)

        for a in student_prefs:
            if a not in s_index:
                raise InvalidInstanceError(f"preference list for unknown student {a!r}")
        for b in school_prefs:
            if b not in b_index:
                raise InvalidInstanceError(f"preference list for unknown school {b!r}")

        s_pref: list[list[int]] = []
        for a in self._students:
            row = []
            seen = set()
            for b in student_prefs.get(a, ()):
                j = b_index.get(b)
                if j is None:
                    raise InvalidInstanceError(f"student {a!r} ranks unknown school {b!r}")
                if j in seen:
                    raise InvalidInstanceError(f"student {a!r} ranks school {b!r} twice")
                seen.add(j)
                row.append(j)
            s_pref.append(row)
        b_pref: list[list[int]] = []
        for b in self._schools:
            row = []
            seen = set()
            for a in school_prefs.get(b, ()):
                i = s_index.get(a)
                if i is None:
                    raise InvalidInstanceError(f"school {b!r} ranks unknown student {a!r}")
                if i in seen:
                    raise InvalidInstanceError(f"school {b!r} ranks student {a!r} twice")
                seen.add(i)
                row.append(i)
            b_pref.append(row)

        # adjacency symmetry + cross ranks
        b_rank_of = [{a: r for r, a in enumerate(row)} for row in b_pref]
        s_rank_of = [{b: r for r, b in enumerate(row)} for row in s_pref]
        s_srank: list[list[int]] = []
        for i, row in enumerate(s_pref):
            cranks = []
            for j in row:
                r = b_rank_of[j].get(i)
                if r is None:
                    raise InvalidInstanceError(
                        f"asymmetric adjacency: {self._students[i]!r} ranks "
                        f"{self._schools[j]!r} but not vice versa")
                cranks.append(r)
            s_srank.append(cranks)
        b_rrank: list[list[int]] = []
        n_edges = 0
        for j, row in enumerate(b_pref):
            cranks = []
            for i in row:
                r = s_rank_of[i].get(j)
                if r is None:
                    raise InvalidInstanceError(
                        f"asymmetric adjacency: {self._schools[j]!r} ranks "
                        f"{self._students[i]!r} but not vice versa")
                cranks.append(r)
            n_edges += len(row)
            b_rrank.append(cranks)

        self._s_pref = s_pref
        self._b_pref = b_pref
        self._s_srank = s_srank
        self._b_rrank = b_rrank
        self._n_edges = n_edges

    @classmethod
    def _from_arrays(
        cls,
        students: Sequence[str],
        schools: Sequence[str],
        quota: Sequence[int],
        s_pref: list[list[int]],
        b_pref: list[list[int]],
        s_srank: list[list[int]],
        b_rrank: list[list[int]],
    ) -> "Instance":
        """Trusted fast path for generators that already hold index arrays."""
        inst = object.__new__(cls)
        inst._students = tuple(students)
        inst._schools = tuple(schools)
        inst._quota = tuple(quota)
        inst._s_index = {a: i for i, a in enumerate(inst._students)}
        inst._b_index = {b: j for j, b in enumerate(inst._schools)}
        inst._s_pref = s_pref
        inst._b_pref = b_pref
        inst._s_srank = s_srank
        inst._b_rrank = b_rrank
        inst._n_edges = sum(len(r) for r in s_pref)
        return inst

    # -- public views ------------------------------------------------------

    @property
    def students(self) -> tuple[str, ...]:
        return self._students

    @property
    def schools(self) -> tuple[str, ...]:
        return self._schools

    @property
    def n_students(self) -> int:
        return len(self._students)

    @property
    def n_schools(self) -> int:
        return len(self._schools)

    @property
    def n_edges(self) -> int:
        return self._n_edges

    @cached_property
    def quota(self) -> Mapping[str, int]:
        return {b: q for b, q in zip(self._schools, self._quota)}

    def quota_of(self, b: str) -> int:
        return self._quota[self._school_idx(b)]

    @cached_property
    def student_prefs(self) -> Mapping[str, tuple[str, ...]]:
        return {a: tuple(self._schools[j] for j in row)
                for a, row in zip(self._students, self._s_pref)}

    @cached_property
    def school_prefs(self) -> Mapping[str, tuple[str, ...]]:
        return {b: tuple(self._students[i] for i in row)
                for b, row in zip(self._schools, self._b_pref)}

    @cached_property
    def _s_rank(self) -> list[dict[int, int]]:
        return [{j: r for r, j in enumerate(row)} for row in self._s_pref]

    @cached_property
    def _b_rank(self) -> list[dict[int, int]]:
        return [{i: r for r, i in enumerate(row)} for row in self._b_pref]

    def _student_idx(self, a: str) -> int:
        try:
            return self._s_index[a]
        except KeyError:
            raise ValueError(f"unknown student {a!r}") from None

    def _school_idx(self, b: str) -> int:
        try:
            return self._b_index[b]
        except KeyError:
            raise ValueError(f"unknown school {b!r}") from None

    def has_edge(self, a: str, b: str) -> bool:
        return self._b_index[b] in self._s_rank[self._student_idx(a)] if b in self._b_index else False

    def edges(self) -> Iterator[tuple[str, str]]:
        for a, row in zip(self._students, self._s_pref):
            for j in row:
                yield (a, self._schools[j])

    def student_rank(self, a: str, b: str) -> int:
        """0-based rank of school b on a's list; raises on a non-edge."""
        r = self._s_rank[self._student_idx(a)].get(self._school_idx(b))
        if r is None:
            raise ValueError(f"({a!r}, {b!r}) is not an edge")
        return r

    def school_rank(self, b: str, a: str) -> int:
        """0-based rank of student a on b's list; raises on a non-edge."""
        r = self._b_rank[self._school_idx(b)].get(self._student_idx(a))
        if r is None:
            raise ValueError(f"({a!r}, {b!r}) is not an edge")
        return r

    def student_degree(self, a: str) -> int:
        return len(self._s_pref[self._student_idx(a)])

    def school_degree(self, b: str) -> int:
        return len(self._b_pref[self._school_idx(b)])

    def validate(self) -> None:
        """Re-check structural invariants (useful for generated instances)."""
        Instance(self._students, self._schools, self.quota,
                 self.student_prefs, self.school_prefs)

    def to_text(self) -> str:
        """Serialize in the instance file format; round-trips via parse_instance."""
        lines = ["instance v1"]
        lines.append("students: " + " ".join(self._students))
        lines.append("schools: " + " ".join(
            b if q == 1 else f"{b}[{q}]" for b, q in zip(self._schools, self._quota)))
        for a, row in zip(self._students, self._s_pref):
            if row:
                lines.append(f"{a}: " + " ".join(self._schools[j] for j in row))
        for b, row in zip(self._schools, self._b_pref):
            if row:
                lines.append(f"{b}: " + " ".join(self._students[i] for i in row))
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return (f"Instance({self.n_students} students, {self.n_schools} schools, "
                f"{self.n_edges} edges)")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (self._students == other._students and self._schools == other._schools
                and self._quota == other._quota and self._s_pref == other._s_pref
                and self._b_pref == other._b_pref)

    def __hash__(self) -> int:
        return hash((self._students, self._schools, self._quota))


class Assignment:
    """Immutable student-to-school matching.

    Maps every student to a school or to ``None`` (unmatched).  Equality and
    hashing go by the set of matched pairs, so assignments built from
    different student orders compare equal.
    """

    __slots__ = ("_match", "_pairs", "_by_school")

    def __init__(self, match: Mapping[str, str | None]):
        self._match = dict(match)
        self._pairs: frozenset[tuple[str, str]] | None = None
        self._by_school: dict[str, frozenset[str]] | None = None

    @classmethod
    def from_pairs(cls, inst: Instance, pairs: Iterable[tuple[str, str]]) -> "Assignment":
        """Validating constructor: pairs must be edges and respect quotas."""
        match: dict[str, str | None] = {a: None for a in inst.students}
        load: dict[str, int] = {b: 0 for b in inst.schools}
        for a, b in pairs:
            inst.student_rank(a, b)  # raises on unknown agent / non-edge
            if match[a] is not None:
                raise ValueError(f"student {a!r} assigned twice")
            match[a] = b
            load[b] += 1
            if load[b] > inst.quota_of(b):
                raise ValueError(f"school {b!r} over quota")
        return cls(match)

    def school_of(self, a: str) -> str | None:
        return self._match[a]

    def __getitem__(self, a: str) -> str | None:
        return self._match[a]

    def __contains__(self, a: str) -> bool:
        return a in self._match

    @property
    def mapping(self) -> Mapping[str, str | None]:
        return dict(self._match)

    @property
    def matched_pairs(self) -> frozenset[tuple[str, str]]:
        if self._pairs is None:
            self._pairs = frozenset((a, b) for a, b in self._match.items() if b is not None)
        return self._pairs

    def students_of(self, b: str) -> frozenset[str]:
        if self._by_school is None:
            by: dict[str, set[str]] = {}
            for a, s in self._match.items():
                if s is not None:
                    by.setdefault(s, set()).add(a)
            self._by_school = {s: frozenset(v) for s, v in by.items()}
        return self._by_school.get(b, frozenset())

    def format(self, inst: Instance) -> str:
        """One `student school` line per student in instance order; `-` if unmatched."""
        return "\n".join(
            f"{a} {self._match.get(a) or '-'}" for a in inst.students) + "\n"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.matched_pairs == other.matched_pairs

    def __hash__(self) -> int:
        return hash(self.matched_pairs)

    def __repr__(self) -> str:
        inner = ", ".join(f"{a}-{b}" for a, b in sorted(self.matched_pairs))
        return f"Assignment({{{inner}}})"


# -- blocking and dominance -------------------------------------------------

def is_blocking_pair(inst: Instance, m: Assignment, a: str, b: str) -> bool:
    """True iff edge (a, b) blocks m.

    The pair blocks when a strictly prefers b to his current school and b
    either has a free seat or prefers a to one of its current students.
    """
    rank_ab = inst.student_rank(a, b)  # raises on non-edge
    cur = m.school_of(a)
    if cur is not None and inst.student_rank(a, cur) <= rank_ab:
        return False
    assigned = m.students_of(b)
    if len(assigned) < inst.quota_of(b):
        return True
    rank_ba = inst.school_rank(b, a)
    return any(inst.school_rank(b, x) > rank_ba for x in assigned)


def blocking_pairs(inst: Instance, m: Assignment) -> Iterator[tuple[str, str]]:
    """All edges that block m, in instance edge order."""
    for a, b in inst.edges():
        if is_blocking_pair(inst, m, a, b):
            yield (a, b)


def is_stable(inst: Instance, m: Assignment) -> bool:
    return next(blocking_pairs(inst, m), None) is None


def blocks(inst: Instance, m_blocking: Assignment, m: Assignment) -> bool:
    """True iff some edge of m_blocking blocks m."""
    return any(is_blocking_pair(inst, m, a, b) for a, b in m_blocking.matched_pairs)


def dominates(inst: Instance, m1: Assignment, m2: Assignment) -> bool:
    """True iff every student weakly prefers his m1 school to his m2 school."""
    for a in inst.students:
        b1, b2 = m1.school_of(a), m2.school_of(a)
        if b1 == b2:
            continue
        if b1 is None:  # unmatched is worst, and b2 differs
            return False
        if b2 is not None and inst.student_rank(a, b1) > inst.student_rank(a, b2):
            return False
    return True


# -- instance file format ----------------------------------------------------

def parse_instance(text: str) -> Instance:
    """Parse the `instance v1` text format.

    Blank lines and `#` comments are ignored.  After the header come the
    `students:` and `schools:` rosters (quotas as `b[q]`, default 1), then one
    preference line per agent, most preferred first.  Agents without a line
    have an empty list.
    """
    students: list[str] | None = None
    schools: list[str] | None = None
    quota: dict[str, int] = {}
    s_prefs: dict[str, list[str]] = {}
    b_prefs: dict[str, list[str]] = {}
    header_seen = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header_seen:
            if line != "instance v1":
                raise ParseError("expected header 'instance v1'", lineno)
            header_seen = True
            continue
        if line.startswith("students:"):
            if students is not None:
                raise ParseError("duplicate students: line", lineno)
            students = line[len("students:"):].split()
            continue
        if line.startswith("schools:"):
            if schools is not None:
                raise ParseError("duplicate schools: line", lineno)
            schools = []
            for tok in line[len("schools:"):].split():
                if tok.endswith("]") and "[" in tok:
                    name, _, qpart = tok.partition("[")
                    qtext = qpart[:-1]
                    try:
                        q = int(qtext)
                    except ValueError:
                        raise ParseError(f"bad quota {qtext!r} for school {name!r}", lineno) from None
                    if q < 1:
                        raise ParseError(f"school {name!r} has quota {q}; must be >= 1", lineno)
                    schools.append(name)
                    quota[name] = q
                else:
                    schools.append(tok)
            continue
        if ":" not in line:
            raise ParseError(f"cannot parse {line!r}", lineno)
        name, _, rest = line.partition(":")
        name = name.strip()
        entries = rest.split()
        if students is None or schools is None:
            raise ParseError("preference line before students:/schools: rosters", lineno)
        if name in s_prefs or name in b_prefs:
            raise ParseError(f"duplicate preference line for {name!r}", lineno)
        if name in set(students):
            s_prefs[name] = entries
        elif name in set(schools):
            b_prefs[name] = entries
        else:
            raise ParseError(f"unknown identifier {name!r}", lineno)

    if not header_seen:
        raise ParseError("missing header 'instance v1'", 1)
    if students is None:
        raise ParseError("missing students: line")
    if schools is None:
        raise ParseError("missing schools: line")
    try:
        return Instance(students, schools, quota, s_prefs, b_prefs)
    except InvalidInstanceError as e:
        raise ParseError(str(e)) from e


# -- one-to-one reduction ----------------------------------------------------

@dataclass(frozen=True)
class OneToOneReduction:
    """A quota-1 copy of a market where school b becomes seats b^1..b^q.

    Seats replace b in every student's list in seat order and inherit b's
    preference list.  ``pi`` maps an assignment of the original market to the
    corresponding seat matching (i-th best student of b gets seat b^i);
    ``pi_inverse`` undoes it.  Stable sets correspond one to one under pi;
    legal sets in general do not.
    """

    original: Instance
    instance: Instance
    seat_school: Mapping[str, str]
    school_seats: Mapping[str, tuple[str, ...]]

    def pi(self, m: Assignment) -> Assignment:
        match: dict[str, str | None] = {a: None for a in self.original.students}
        for b, seats in self.school_seats.items():
            ranked = sorted(m.students_of(b), key=lambda a: self.original.school_rank(b, a))
            for seat, a in zip(seats, ranked):
                match[a] = seat
        return Assignment(match)

    def pi_inverse(self, m: Assignment) -> Assignment:
        return Assignment({a: (self.seat_school[s] if s is not None else None)
                           for a, s in ((a, m.school_of(a)) for a in self.instance.students)})


def reduce_one_to_one(inst: Instance) -> OneToOneReduction:
    """Expand each school into unit-quota seats (seat names `b^i`)."""
    seat_school: dict[str, str] = {}
    school_seats: dict[str, tuple[str, ...]] = {}
    seats_order: list[str] = []
    taken = set(inst.students)
    for b in inst.schools:
        q = inst.quota_of(b)
        seats = tuple(f"{b}^{k}" for k in range(1, q + 1))
        for s in seats:
            if s in taken:
                raise InvalidInstanceError(f"seat name {s!r} collides with a student id")
            seat_school[s] = b
        school_seats[b] = seats
        seats_order.extend(seats)
    s_prefs = {}
    for a in inst.students:
        row: list[str] = []
        for b in inst.student_prefs[a]:
            row.extend(school_seats[b])
        s_prefs[a] = row
    b_prefs = {s: list(inst.school_prefs[seat_school[s]]) for s in seats_order}
    reduced = Instance(inst.students, seats_order, {s: 1 for s in seats_order},
                       s_prefs, b_prefs)
    return OneToOneReduction(inst, reduced, seat_school, school_seats)
