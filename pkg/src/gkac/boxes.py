"""Normalized box arrays over a matched pair and their chain calculus.

An (r, s)-array is a top chain of s composable H-arrows and a right
chain of r composable V-arrows glued at a point; all top entries except
the last and all right entries except the first must be non-identities.
Face maps merge adjacent entries or drop the outermost one; a merge
that lands an identity in a constrained slot collapses to zero (the
normalized-complex convention, which is forced by the homotopy identity
and d^2 = 0, both asserted in the tests).  The diagonal groupoid acts
on arrays through both action tables; the orbit of every array contains
exactly one "strict" array (identities at both glue slots), which
exhibits each K B^[r,s] as a free module.
"""

from typing import Dict, List, NamedTuple, Tuple

from .intlinalg import IntMatrix, InvalidInput, ResourceBound
from .matched import MatchedPair

__all__ = [
    "BoxArray",
    "BoxSpace",
    "array_point",
    "faces_H",
    "faces_V",
    "act_h",
    "act_v",
    "diagonal_action",
    "reduce_array",
    "free_module_iso",
    "matrix_triplets",
]

DEFAULT_BOX_BOUND = 5_000_000


class BoxArray(NamedTuple):
    """Top H-chain and right V-chain glued at r(top[-1]) = t(right[0])."""

    top: Tuple[int, ...]
    right: Tuple[int, ...]


def array_point(mp: MatchedPair, a: BoxArray):
    """The glue point p(A): target of the top chain = source of the
    right chain."""
    if a.right:
        return mp.v.src[a.right[0]]
    return mp.h.tgt[a.top[-1]]


# ---------------------------------------------------------------------------
# face maps, homotopy, normalization collapse
# ---------------------------------------------------------------------------

def _normalize_top(mp: MatchedPair, top: Tuple[int, ...]):
    """None if an identity sits anywhere but the last slot."""
    idents = mp._h_idents
    for x in top[:-1]:
        if x in idents:
            return None
    return top


def _normalize_right(mp: MatchedPair, right: Tuple[int, ...]):
    idents = mp._v_idents
    for g in right[1:]:
        if g in idents:
            return None
    return right


def faces_H(mp: MatchedPair, a: BoxArray) -> List[Tuple[int, BoxArray]]:
    """Merge top neighbours and drop the first top arrow; collapsed
    results are reported as (sign, None)."""
    h = mp.h
    s = len(a.top)
    out = []
    for j in range(s - 1):
        sign = -1 if (s - j - 2) % 2 else 1
        merged = a.top[:j] + (h.compose(a.top[j], a.top[j + 1]),) + a.top[j + 2:]
        merged = _normalize_top(mp, merged)
        out.append((sign, BoxArray(merged, a.right) if merged is not None else None))
    out.append((1 if (s - 1) % 2 == 0 else -1, BoxArray(a.top[1:], a.right)))
    return out


def faces_V(mp: MatchedPair, a: BoxArray) -> List[Tuple[int, BoxArray]]:
    """Merge right neighbours and drop the last right arrow."""
    v = mp.v
    r = len(a.right)
    out = []
    for i in range(r - 1):
        sign = -1 if i % 2 else 1
        merged = a.right[:i] + (v.compose(a.right[i], a.right[i + 1]),) + a.right[i + 2:]
        merged = _normalize_right(mp, merged)
        out.append((sign, BoxArray(a.top, merged) if merged is not None else None))
    out.append((1 if (r - 1) % 2 == 0 else -1, BoxArray(a.top, a.right[:-1])))
    return out


def homotopy_prepend(mp: MatchedPair, a: BoxArray):
    """Prepend the identity at p(A) to the right chain; None when that
    puts an identity in a constrained slot."""
    p = array_point(mp, a)
    right = (mp.v.identity_of[p],) + a.right
    right = _normalize_right(mp, right)
    if right is None:
        return None
    return BoxArray(a.top, right)


# ---------------------------------------------------------------------------
# diagonal action
# ---------------------------------------------------------------------------

def act_h(mp: MatchedPair, y: int, a: BoxArray) -> BoxArray:
    """Act by an H-arrow y with r(y) = p(A): divide it off the top
    chain and slide it down the right chain."""
    if mp.h.tgt[y] != array_point(mp, a):
        raise InvalidInput("box.degree", "H-arrow does not end at the glue point")
    top = a.top
    if top:
        top = top[:-1] + (mp.h.compose(top[-1], mp.h.inverse[y]),)
    w = y
    right = []
    for g in a.right:
        right.append(mp.tri[(w, g)])
        w = mp.trl[(w, g)]
    return BoxArray(top, tuple(right))


def act_v(mp: MatchedPair, g: int, a: BoxArray) -> BoxArray:
    """Act by a V-arrow g with b(g) = p(A): compose onto the right
    chain and push the inverse through the top chain."""
    if mp.v.tgt[g] != array_point(mp, a):
        raise InvalidInput("box.degree", "V-arrow does not end at the glue point")
    right = a.right
    if right:
        right = (mp.v.compose(g, right[0]),) + right[1:]
    z = mp.v.inverse[g]
    top = list(a.top)
    for j in range(len(top) - 1, -1, -1):
        x = top[j]
        top[j] = mp.trl[(x, z)]
        z = mp.tri[(x, z)]
    return BoxArray(tuple(top), right)


def diagonal_action(space: "BoxSpace", r: int, s: int):
    """Dense action tables on basis indices: keys (arrow, index)."""
    mp = space.mp
    base = space.basis(r, s)
    index = space.index(r, s)
    h_by_tgt: Dict = {}
    for y in range(mp.h.n_arrows):
        h_by_tgt.setdefault(mp.h.tgt[y], []).append(y)
    v_by_tgt: Dict = {}
    for g in range(mp.v.n_arrows):
        v_by_tgt.setdefault(mp.v.tgt[g], []).append(g)
    tab_h: Dict[Tuple[int, int], int] = {}
    tab_v: Dict[Tuple[int, int], int] = {}
    for i, a in enumerate(base):
        p = array_point(mp, a)
        for y in h_by_tgt.get(p, ()):
            tab_h[(y, i)] = index[act_h(mp, y, a)]
        for g in v_by_tgt.get(p, ()):
            tab_v[(g, i)] = index[act_v(mp, g, a)]
    return tab_h, tab_v


# ---------------------------------------------------------------------------
# strict representatives and the free-module isomorphism
# ---------------------------------------------------------------------------

def reduce_array(mp: MatchedPair, a: BoxArray):
    """Unique strict representative of the orbit of a, with witnesses:
    returns (y, g, strict) where strict = g'.(y.a) for g' the inverse
    of y |> right[0], so a = y^{-1}.(g'^{-1}.strict)."""
    y = a.top[-1]
    g = mp.v.inverse[mp.tri[(y, a.right[0])]]
    return y, g, act_v(mp, g, act_h(mp, y, a))


def free_module_iso(space: "BoxSpace", r: int, s: int):
    """(phi, psi): phi splits an array into its diagonal witness pair
    and strict representative; psi rebuilds the array."""
    mp = space.mp

    def phi(a: BoxArray):
        y, g, strict = reduce_array(mp, a)
        return (y, g), strict

    def psi(pair, strict: BoxArray) -> BoxArray:
        y, g = pair
        return act_h(mp, mp.h.inverse[y], act_v(mp, mp.v.inverse[g], strict))

    return phi, psi


# ---------------------------------------------------------------------------
# the basis space with matrices
# ---------------------------------------------------------------------------

class BoxSpace:
    """Cached enumeration of the normalized arrays over one matched
    pair, with the boundary/homotopy matrices in that basis order.

    Matrices have shape (len target basis, len source basis); column j
    is the image of basis element j.
    """

    __slots__ = ("mp", "bound", "_basis", "_index", "_h_nonid_into",
                 "_h_any_into", "_v_nonid_from", "_v_any_from")

    def __init__(self, mp: MatchedPair, bound: int = DEFAULT_BOX_BOUND):
        self.mp = mp
        self.bound = bound
        self._basis: Dict = {}
        self._index: Dict = {}
        h, v = mp.h, mp.v
        h_ids, v_ids = mp._h_idents, mp._v_idents
        self._h_any_into = {p: [] for p in mp.d.objects}
        self._h_nonid_into = {p: [] for p in mp.d.objects}
        for x in range(h.n_arrows):
            self._h_any_into[h.tgt[x]].append(x)
            if x not in h_ids:
                self._h_nonid_into[h.tgt[x]].append(x)
        self._v_any_from = {p: [] for p in mp.d.objects}
        self._v_nonid_from = {p: [] for p in mp.d.objects}
        for g in range(v.n_arrows):
            self._v_any_from[v.src[g]].append(g)
            if g not in v_ids:
                self._v_nonid_from[v.src[g]].append(g)

    # -- counting ------------------------------------------------------------

    def _top_counts(self, s: int, nonid_last: bool = False) -> Dict:
        """Chains of length s ending at each point, first s-1 entries
        non-identity (all s when nonid_last)."""
        mp = self.mp
        counts = {p: 1 for p in mp.d.objects}
        for step in range(s):
            pool = self._h_nonid_into if (step < s - 1 or nonid_last) else self._h_any_into
            counts = {
                p: sum(counts[mp.h.src[x]] for x in pool[p]) for p in counts
            }
        return counts

    def _right_counts(self, r: int, nonid_first: bool = False) -> Dict:
        """Chains of length r starting at each point, entries after the
        first non-identity (all r when nonid_first).  Chains grow by
        prepending, so the unconstrained slot is filled last."""
        mp = self.mp
        counts = {p: 1 for p in mp.d.objects}
        for step in range(r):
            pool = (
                self._v_any_from
                if (step == r - 1 and not nonid_first)
                else self._v_nonid_from
            )
            counts = {
                p: sum(counts[mp.v.tgt[g]] for g in pool[p]) for p in counts
            }
        return counts

    def count(self, r: int, s: int) -> int:
        if r == 0 and s == 0:
            return 0
        if s == 0:
            return sum(self._right_counts(r).values()) if r else 0
        if r == 0:
            return sum(self._top_counts(s).values())
        tops = self._top_counts(s)
        rights = self._right_counts(r)
        # rights counted from start point; tops from end point
        return sum(tops[p] * rights[p] for p in tops)

    def strict_count(self, r: int, s: int) -> int:
        """Size of strict_basis(r, s) without enumerating it."""
        if r < 1 or s < 1:
            return 0
        tops = self._top_counts(s - 1, nonid_last=True)
        rights = self._right_counts(r - 1, nonid_first=True)
        return sum(tops[p] * rights[p] for p in tops)

    # -- enumeration -----------------------------------------------------------

    def _top_chains(self, s: int, nonid_last: bool = False) -> Dict:
        """All chains by endpoint, deterministic (lexicographic) order."""
        mp = self.mp
        chains = {p: [()] for p in mp.d.objects}
        for step in range(s):
            pool = self._h_nonid_into if (step < s - 1 or nonid_last) else self._h_any_into
            chains = {
                p: [c + (x,) for x in sorted(pool[p]) for c in chains[mp.h.src[x]]]
                for p in chains
            }
        return chains

    def _right_chains(self, r: int, nonid_first: bool = False) -> Dict:
        """All chains by start point; grown by prepending, so the
        unconstrained first slot is filled on the final step."""
        mp = self.mp
        chains = {p: [()] for p in mp.d.objects}
        for step in range(r):
            pool = (
                self._v_any_from
                if (step == r - 1 and not nonid_first)
                else self._v_nonid_from
            )
            chains = {
                p: [(g,) + c for g in sorted(pool[p]) for c in chains[mp.v.tgt[g]]]
                for p in chains
            }
        return chains

    def basis(self, r: int, s: int) -> List[BoxArray]:
        key = (r, s)
        if key not in self._basis:
            n = self.count(r, s)
            if n > self.bound:
                raise ResourceBound(
                    "box.bound",
                    f"array space ({r},{s}) would hold {n} elements,"
                    f" over the bound {self.bound}",
                )
            if s == 0:
                if r == 0:
                    out = []
                else:
                    chains = self._right_chains(r)
                    out = [BoxArray((), c) for p in sorted(chains) for c in chains[p]]
            elif r == 0:
                chains = self._top_chains(s)
                out = [BoxArray(c, ()) for p in sorted(chains) for c in chains[p]]
            else:
                tops = self._top_chains(s)
                rights = self._right_chains(r)
                out = [
                    BoxArray(t, g)
                    for p in sorted(tops)
                    for t in tops[p]
                    for g in rights[p]
                ]
            out.sort()
            self._basis[key] = out
            self._index[key] = {a: i for i, a in enumerate(out)}
        return self._basis[key]

    def index(self, r: int, s: int) -> Dict[BoxArray, int]:
        self.basis(r, s)
        return self._index[(r, s)]

    def strict_basis(self, r: int, s: int) -> List[BoxArray]:
        """Arrays with identities at both glue slots: top ends with id,
        right starts with id; the rest fully non-identity."""
        mp = self.mp
        tops = self._top_chains(s - 1, nonid_last=True)
        rights = self._right_chains(r - 1, nonid_first=True)
        out = []
        for p in sorted(tops):
            e_h = mp.h.identity_of[p]
            e_v = mp.v.identity_of[p]
            for t in tops[p]:
                for g in rights[p]:
                    out.append(BoxArray(t + (e_h,), (e_v,) + g))
        out.sort()
        return out

    # -- matrices ---------------------------------------------------------------

    def _matrix(self, src_key, tgt_key, face_fn) -> IntMatrix:
        source = self.basis(*src_key)
        target_index = self.index(*tgt_key)
        acc: Dict[Tuple[int, int], int] = {}
        for j, a in enumerate(source):
            for sign, b in face_fn(a):
                if b is not None:
                    key = (target_index[b], j)
                    acc[key] = acc.get(key, 0) + sign
        triplets = [(r, c, v) for (r, c), v in acc.items() if v]
        return IntMatrix.from_triplets(len(self.basis(*tgt_key)), len(source), triplets)

    def boundary_H(self, r: int, s: int) -> IntMatrix:
        """K B^[r,s] -> K B^[r,s-1]."""
        return self._matrix((r, s), (r, s - 1), lambda a: faces_H(self.mp, a))

    def boundary_V(self, r: int, s: int) -> IntMatrix:
        """K B^[r,s] -> K B^[r-1,s]."""
        return self._matrix((r, s), (r - 1, s), lambda a: faces_V(self.mp, a))

    def homotopy_V(self, r: int, s: int) -> IntMatrix:
        """K B^[r,s] -> K B^[r+1,s], prepending the identity."""
        return self._matrix(
            (r, s), (r + 1, s),
            lambda a: [(1, homotopy_prepend(self.mp, a))],
        )


def matrix_triplets(m: IntMatrix) -> str:
    """Sparse `row col value` lines, sorted, for external cross-checks."""
    lines = [f"{r} {c} {v}" for (r, c), v in sorted(m._data.items())]
    return "\n".join(lines)
