"""Finite groups in Cayley-table form.

Permutation constructors, subgroups, double cosets, and the
exact-factorization predicates used by the groupoid constructions.
Permutations are tuples of 0-based images acting on the right of
points; products compose left to right (in ``a*b``, apply ``a`` first).
"""

from __future__ import annotations

from itertools import permutations as _permutations
from typing import Iterable, List, Optional, Sequence, Tuple

from .intlinalg import (
    FinAbGroup,
    IntMatrix,
    InvalidInput,
    ResourceBound,
    smith_normal_form,
)

__all__ = [
    "DEFAULT_ORDER_BOUND",
    "parse_perm_word",
    "compose_perms",
    "inverse_perm",
    "identity_perm",
    "cycle_notation",
    "cycle_type",
    "FiniteGroup",
    "Subgroup",
    "symmetric_group",
    "cyclic_group",
    "subgroup_generated",
    "double_cosets",
    "trivially_intersects_all_conjugates",
    "is_exact_group_factorization",
    "conjugate_subgroup",
    "abelian_invariants",
    "subgroup_cycle_types",
    "group_to_descriptor",
    "group_from_descriptor",
    "subgroup_to_descriptor",
    "subgroup_from_descriptor",
]

DEFAULT_ORDER_BOUND = 5040


# ---------------------------------------------------------------------------
# permutations
# ---------------------------------------------------------------------------

def identity_perm(n: int) -> Tuple[int, ...]:
    return tuple(range(n))


def compose_perms(sigma: Sequence[int], tau: Sequence[int]) -> Tuple[int, ...]:
    """Left-to-right product: a point passes through sigma, then tau."""
    return tuple(tau[s] for s in sigma)


def inverse_perm(sigma: Sequence[int]) -> Tuple[int, ...]:
    inv = [0] * len(sigma)
    for i, s in enumerate(sigma):
        inv[s] = i
    return tuple(inv)


def parse_perm_word(word: str, n: int) -> Tuple[int, ...]:
    """Parse a cycle word like ``"(1 2 3)(4 5)"`` on the points 1..n.

    Returns the tuple of 0-based images.  Cycles are applied left to
    right; the empty word and ``"()"`` denote the identity.
    """
    text = word.strip()
    if text in ("", "()"):
        return identity_perm(n)
    if not (text.startswith("(") and text.endswith(")")):
        raise InvalidInput("grp.perm", f"malformed cycle word {word!r}")
    result = list(identity_perm(n))
    for chunk in text[1:-1].split(")("):
        points = [p for p in chunk.replace(",", " ").split() if p]
        cycle = []
        for p in points:
            try:
                k = int(p)
            except ValueError:
                raise InvalidInput("grp.perm", f"bad point {p!r} in {word!r}")
            if not 1 <= k <= n:
                raise InvalidInput(
                    "grp.perm", f"point {k} outside 1..{n} in {word!r}"
                )
            cycle.append(k - 1)
        if len(set(cycle)) != len(cycle):
            raise InvalidInput("grp.perm", f"repeated point in cycle {chunk!r}")
        if len(cycle) < 2:
            continue
        images = list(identity_perm(n))
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            images[a] = b
        result = list(compose_perms(result, images))
    return tuple(result)


def _cycles_of(sigma: Sequence[int]) -> List[List[int]]:
    seen = [False] * len(sigma)
    cycles = []
    for start in range(len(sigma)):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        p = sigma[start]
        while p != start:
            cyc.append(p)
            seen[p] = True
            p = sigma[p]
        cycles.append(cyc)
    return cycles


def cycle_notation(sigma: Sequence[int]) -> str:
    """Canonical cycle word: cycles by least point, fixed points omitted."""
    parts = []
    for cyc in _cycles_of(sigma):
        if len(cyc) > 1:
            parts.append("(" + " ".join(str(p + 1) for p in cyc) + ")")
    return "".join(parts) if parts else "()"


def cycle_type(sigma: Sequence[int]) -> Tuple[int, ...]:
    """Cycle lengths in decreasing order, fixed points included."""
    return tuple(sorted((len(c) for c in _cycles_of(sigma)), reverse=True))


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------

class FiniteGroup:
    """Finite group given by its Cayley table of element indices.

    ``cayley[a][b]`` is the product a*b (apply a first, then b).  Labels
    carry the concrete elements (image tuples for permutation groups,
    residues for cyclic groups) and are optional.
    """

    __slots__ = ("order", "cayley", "identity", "inverse", "labels", "kind",
                 "kind_n", "_index")

    def __init__(
        self,
        cayley: Sequence[Sequence[int]],
        labels: Optional[Sequence] = None,
        check: bool = False,
        bound: int = DEFAULT_ORDER_BOUND,
        kind: str = "table",
        kind_n: Optional[int] = None,
    ):
        n = len(cayley)
        if n == 0:
            raise InvalidInput("grp.table", "empty Cayley table")
        if n > bound:
            raise ResourceBound(
                "grp.bound", f"group order {n} exceeds configured bound {bound}"
            )
        rows = []
        for row in cayley:
            row = list(row)
            if len(row) != n or any(not 0 <= x < n for x in row):
                raise InvalidInput("grp.table", "table is not order x order")
            rows.append(row)
        self.order = n
        self.cayley = rows
        self.labels = list(labels) if labels is not None else list(range(n))
        if len(self.labels) != n:
            raise InvalidInput("grp.table", "label count differs from order")
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if check:
            self._check_table()
        self.identity = self._find_identity()
        self.inverse = self._find_inverses()
        self.kind = kind
        self.kind_n = kind_n

    def _check_table(self) -> None:
        n = self.order
        full = set(range(n))
        for a in range(n):
            if set(self.cayley[a]) != full:
                raise InvalidInput("grp.table", f"row {a} is not a permutation")
            if {self.cayley[x][a] for x in range(n)} != full:
                raise InvalidInput("grp.table", f"column {a} is not a permutation")
        for a in range(n):
            for b in range(n):
                ab = self.cayley[a][b]
                for c in range(n):
                    if self.cayley[ab][c] != self.cayley[a][self.cayley[b][c]]:
                        raise InvalidInput(
                            "grp.table",
                            f"associativity fails on ({a}, {b}, {c})",
                        )

    def _find_identity(self) -> int:
        n = self.order
        for e in range(n):
            if all(self.cayley[e][x] == x for x in range(n)) and all(
                self.cayley[x][e] == x for x in range(n)
            ):
                return e
        raise InvalidInput("grp.table", "table has no two-sided identity")

    def _find_inverses(self) -> List[int]:
        n = self.order
        ident = self.identity
        inv = [-1] * n
        for a in range(n):
            for b in range(n):
                if self.cayley[a][b] == ident:
                    if self.cayley[b][a] != ident:
                        raise InvalidInput(
                            "grp.table", f"element {a} has no two-sided inverse"
                        )
                    inv[a] = b
                    break
            if inv[a] < 0:
                raise InvalidInput("grp.table", f"element {a} has no inverse")
        return inv

    def mul(self, a: int, b: int) -> int:
        return self.cayley[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    def element_order(self, a: int) -> int:
        k = 1
        x = a
        while x != self.identity:
            x = self.cayley[x][a]
            k += 1
        return k

    def index_of_label(self, label) -> int:
        try:
            return self._index[label]
        except (KeyError, TypeError):
            raise InvalidInput("grp.range", f"label {label!r} not in group")

    def index_of_word(self, word: str) -> int:
        """Index of the element named by a permutation cycle word."""
        if not self.labels or not isinstance(self.labels[0], tuple):
            raise InvalidInput(
                "grp.perm", "group elements are not labeled by permutations"
            )
        return self.index_of_label(parse_perm_word(word, len(self.labels[0])))

    @classmethod
    def from_table(
        cls,
        cayley: Sequence[Sequence[int]],
        labels: Optional[Sequence] = None,
        bound: int = DEFAULT_ORDER_BOUND,
    ) -> "FiniteGroup":
        """Build from an untrusted table; validates all group laws (O(n^3))."""
        return cls(cayley, labels=labels, check=True, bound=bound, kind="table")

    def __repr__(self) -> str:
        return f"FiniteGroup(order={self.order}, kind={self.kind!r})"


def symmetric_group(n: int, bound: int = DEFAULT_ORDER_BOUND) -> FiniteGroup:
    """S_n on the points 1..n, elements labeled by 0-based image tuples."""
    if n < 1:
        raise InvalidInput("grp.range", "n must be at least 1")
    order = 1
    for k in range(2, n + 1):
        order *= k
    if order > bound:
        raise ResourceBound(
            "grp.bound", f"symmetric group order {order} exceeds bound {bound}"
        )
    perms = sorted(_permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    cayley = [
        [index[tuple(q[x] for x in p)] for q in perms]
        for p in perms
    ]
    return FiniteGroup(cayley, labels=perms, kind="symmetric", kind_n=n)


def cyclic_group(n: int, bound: int = DEFAULT_ORDER_BOUND) -> FiniteGroup:
    """Z/n with elements the residues 0..n-1 under addition."""
    if n < 1:
        raise InvalidInput("grp.range", "n must be at least 1")
    if n > bound:
        raise ResourceBound(
            "grp.bound", f"cyclic group order {n} exceeds bound {bound}"
        )
    cayley = [[(a + b) % n for b in range(n)] for a in range(n)]
    return FiniteGroup(cayley, labels=list(range(n)), kind="cyclic", kind_n=n)


# ---------------------------------------------------------------------------
# subgroups
# ---------------------------------------------------------------------------

class Subgroup:
    """A validated subgroup: sorted element indices of a parent group."""

    __slots__ = ("parent", "elements", "order", "gens", "_set")

    def __init__(
        self,
        parent: FiniteGroup,
        elements: Iterable[int],
        gens: Optional[Sequence[int]] = None,
    ):
        elems = sorted(set(elements))
        if any(not 0 <= x < parent.order for x in elems):
            raise InvalidInput("grp.range", "subgroup element out of range")
        eset = set(elems)
        if parent.identity not in eset:
            raise InvalidInput("grp.subgroup", "subgroup misses the identity")
        for a in elems:
            if parent.inverse[a] not in eset:
                raise InvalidInput(
                    "grp.subgroup", f"subgroup not closed under inverse at {a}"
                )
            row = parent.cayley[a]
            for b in elems:
                if row[b] not in eset:
                    raise InvalidInput(
                        "grp.subgroup",
                        f"subgroup not closed under product at ({a}, {b})",
                    )
        self.parent = parent
        self.elements = tuple(elems)
        self.order = len(elems)
        self.gens = tuple(gens) if gens is not None else None
        self._set = eset

    def contains(self, a: int) -> bool:
        return a in self._set

    def as_group(self) -> FiniteGroup:
        """The subgroup as a standalone group, labels inherited."""
        pos = {e: i for i, e in enumerate(self.elements)}
        cayley = [
            [pos[self.parent.cayley[a][b]] for b in self.elements]
            for a in self.elements
        ]
        labels = [self.parent.labels[e] for e in self.elements]
        return FiniteGroup(cayley, labels=labels, kind="table")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.parent is other.parent and self.elements == other.elements

    def __hash__(self):
        return hash((id(self.parent), self.elements))

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order} of {self.parent!r})"


def subgroup_generated(g: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    """Smallest subgroup containing ``gens``, by breadth-first closure."""
    gen_list = sorted(set(gens))
    if any(not 0 <= x < g.order for x in gen_list):
        raise InvalidInput("grp.range", "generator index out of range")
    elems = {g.identity}
    frontier = [g.identity]
    while frontier:
        fresh = []
        for x in frontier:
            row = g.cayley[x]
            for s in gen_list:
                y = row[s]
                if y not in elems:
                    elems.add(y)
                    fresh.append(y)
        frontier = fresh
    return Subgroup(g, elems, gens=gen_list)


def conjugate_subgroup(h: Subgroup, g: int) -> Subgroup:
    """The subgroup g H g^{-1} inside the same parent."""
    parent = h.parent
    if not 0 <= g < parent.order:
        raise InvalidInput("grp.range", "conjugating element out of range")
    ginv = parent.inverse[g]
    elems = {parent.cayley[parent.cayley[g][x]][ginv] for x in h.elements}
    gens = None
    if h.gens is not None:
        gens = [parent.cayley[parent.cayley[g][x]][ginv] for x in h.gens]
    return Subgroup(parent, elems, gens=gens)


# ---------------------------------------------------------------------------
# double cosets and factorization predicates
# ---------------------------------------------------------------------------

def _same_parent(v: Subgroup, h: Subgroup) -> FiniteGroup:
    if v.parent is not h.parent:
        raise InvalidInput("grp.parent", "subgroups live in different groups")
    return v.parent


def double_cosets(v: Subgroup, h: Subgroup) -> List[Tuple[int, Tuple[int, ...]]]:
    """Partition of the parent into V\\D/H classes.

    Returns (representative, sorted members) per class, classes ordered
    by least member.  The class of the identity is represented by the
    identity; every other class by its least member.
    """
    g = _same_parent(v, h)
    seen = [False] * g.order
    classes = []
    for x in range(g.order):
        if seen[x]:
            continue
        members = set()
        for a in v.elements:
            ax = g.cayley[a][x]
            row = g.cayley[ax]
            for b in h.elements:
                members.add(row[b])
        for m in members:
            seen[m] = True
        rep = g.identity if g.identity in members else min(members)
        classes.append((rep, tuple(sorted(members))))
    return classes


def trivially_intersects_all_conjugates(v: Subgroup, h: Subgroup) -> bool:
    """True iff V meets every conjugate g H g^{-1} only at the identity."""
    g = _same_parent(v, h)
    vset = v._set
    for x in range(g.order):
        xinv = g.inverse[x]
        for a in h.elements:
            conj = g.cayley[g.cayley[x][a]][xinv]
            if conj != g.identity and conj in vset:
                return False
    return True


def is_exact_group_factorization(d: FiniteGroup, v: Subgroup, h: Subgroup) -> bool:
    """True iff every element of D factors uniquely as v * h."""
    if v.parent is not d or h.parent is not d:
        raise InvalidInput("grp.parent", "subgroups do not live in the given group")
    if v.order * h.order != d.order:
        return False
    return v._set & h._set == {d.identity}


# ---------------------------------------------------------------------------
# abelian invariants
# ---------------------------------------------------------------------------

def abelian_invariants(g) -> FinAbGroup:
    """Invariant factors of the abelianization of a group or subgroup.

    Presentation with one generator per element and the relations
    e_a + e_b - e_{ab}; the cokernel of the relation matrix is G/[G,G].
    """
    if isinstance(g, Subgroup):
        g = g.as_group()
    n = g.order
    entries = []
    r = 0
    for a in range(n):
        row = g.cayley[a]
        for b in range(n):
            c = row[b]
            cols = {}
            for col, val in ((a, 1), (b, 1), (c, -1)):
                cols[col] = cols.get(col, 0) + val
            for col, val in cols.items():
                if val:
                    entries.append((r, col, val))
            r += 1
    rel = IntMatrix.from_triplets(r, n, entries)
    diag = smith_normal_form(rel).diagonal
    torsion = [d for d in diag if d > 1]
    free = n - len([d for d in diag if d])
    return FinAbGroup(free, torsion)


def subgroup_cycle_types(s: Subgroup) -> Tuple[Tuple[int, ...], ...]:
    """Sorted multiset of cycle types of the non-identity elements.

    Conjugate subgroups of a permutation group have equal multisets, so
    differing multisets certify non-conjugacy.
    """
    labels = s.parent.labels
    if not labels or not isinstance(labels[0], tuple):
        raise InvalidInput("grp.perm", "parent is not a permutation group")
    types = [
        cycle_type(labels[a]) for a in s.elements if a != s.parent.identity
    ]
    return tuple(sorted(types))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def group_to_descriptor(g: FiniteGroup) -> dict:
    if g.kind == "symmetric":
        return {"kind": "symmetric", "n": g.kind_n}
    if g.kind == "cyclic":
        return {"kind": "cyclic", "n": g.kind_n}
    return {"kind": "table", "cayley": [list(row) for row in g.cayley]}


def group_from_descriptor(desc: dict, bound: int = DEFAULT_ORDER_BOUND) -> FiniteGroup:
    kind = desc.get("kind")
    if kind == "symmetric":
        return symmetric_group(int(desc["n"]), bound=bound)
    if kind == "cyclic":
        return cyclic_group(int(desc["n"]), bound=bound)
    if kind == "table":
        return FiniteGroup.from_table(desc["cayley"], bound=bound)
    raise InvalidInput("grp.descriptor", f"unknown group kind {kind!r}")


def subgroup_to_descriptor(s: Subgroup) -> list:
    """Generators as cycle words when labeled by permutations, else indices."""
    gens = s.gens if s.gens is not None else [
        e for e in s.elements if e != s.parent.identity
    ]
    labels = s.parent.labels
    if labels and isinstance(labels[0], tuple):
        return [cycle_notation(labels[x]) for x in gens]
    return list(gens)


def subgroup_from_descriptor(g: FiniteGroup, items: Sequence) -> Subgroup:
    """Subgroup generated by cycle words (strings) or element indices (ints)."""
    gens = []
    for item in items:
        if isinstance(item, str):
            gens.append(g.index_of_word(item))
        elif isinstance(item, int):
            if not 0 <= item < g.order:
                raise InvalidInput("grp.range", f"element index {item} out of range")
            gens.append(item)
        else:
            raise InvalidInput("grp.descriptor", f"bad generator entry {item!r}")
    return subgroup_generated(g, gens)
