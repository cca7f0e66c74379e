"""Matched pairs of groupoids and their box calculus.

From an exact factorization of a groupoid into wide subgroupoids V and
H, every composite x*g (H-arrow then V-arrow) refactors uniquely as
(x |> g)*(x <| g) with the V-part first; the two resulting action
tables satisfy three compatibility laws tying them to composition on
either side.  Pairs (x, g) with matching endpoints are "boxes", which
compose horizontally (shared vertical edge) and vertically (shared
horizontal edge); the diagonal groupoid glues V and H along the actions
and is isomorphic to the ambient groupoid.
"""

from typing import Dict, List, NamedTuple, Tuple

from .factorizations import check_exact_factorization
from .groupoids import FiniteGroupoid, GroupoidMorphism
from .intlinalg import InvalidInput, InvariantViolation

__all__ = [
    "Box",
    "MatchedPair",
    "derive_actions",
    "horizontal_identity",
    "vertical_identity",
    "horizontal_compose",
    "vertical_compose",
    "diagonal_groupoid",
    "diagonal_isomorphism",
    "box_to_dict",
]


class Box(NamedTuple):
    """A composable pair: top H-arrow x, right V-arrow g."""

    x: int
    g: int


class MatchedPair:
    """Wide subgroupoids v, h of a common ambient groupoid d plus the
    two action tables on composable (H-arrow, V-arrow) pairs.

    ``tri[(x, g)]`` is the V-arrow x |> g (the left edge of the box),
    ``trl[(x, g)]`` the H-arrow x <| g (the bottom edge).
    """

    __slots__ = ("d", "v", "h", "tri", "trl", "_h_to_d", "_v_to_d", "_boxes",
                 "_h_idents", "_v_idents")

    def __init__(self, d: FiniteGroupoid, v: FiniteGroupoid, h: FiniteGroupoid,
                 tri: Dict[Tuple[int, int], int], trl: Dict[Tuple[int, int], int],
                 check: bool = True):
        self.d = d
        self.v = v
        self.h = h
        self.tri = tri
        self.trl = trl
        self._h_idents = frozenset(h.identity_of.values())
        self._v_idents = frozenset(v.identity_of.values())
        self._h_to_d = [
            d.arrow_index[(h.src[i], h.tgt[i], h.payload[i])] for i in range(h.n_arrows)
        ]
        self._v_to_d = [
            d.arrow_index[(v.src[i], v.tgt[i], v.payload[i])] for i in range(v.n_arrows)
        ]
        self._boxes = None
        if check:
            self.check()

    # -- box edges ---------------------------------------------------------

    def left_edge(self, b: Box) -> int:
        return self.tri[(b.x, b.g)]

    def bottom_edge(self, b: Box) -> int:
        return self.trl[(b.x, b.g)]

    def base_point(self, b: Box):
        """The shared corner r(x) = t(g)."""
        return self.v.src[b.g]

    def all_boxes(self) -> List[Box]:
        """Every composable pair, lexicographic in (x, g); one box per
        pair (vacancy)."""
        if self._boxes is None:
            v_by_src: Dict = {}
            for g in range(self.v.n_arrows):
                v_by_src.setdefault(self.v.src[g], []).append(g)
            self._boxes = [
                Box(x, g)
                for x in range(self.h.n_arrows)
                for g in v_by_src.get(self.h.tgt[x], ())
            ]
        return self._boxes

    # -- validation ---------------------------------------------------------

    def _fail(self, what: str) -> None:
        raise InvariantViolation("mp.axioms", what)

    def check(self) -> None:
        """Quantify the action and compatibility laws over all tuples."""
        v, h, tri, trl = self.v, self.h, self.tri, self.trl
        pairs = self.all_boxes()
        if set(tri) != set(pairs) or set(trl) != set(pairs):
            self._fail("action tables must be keyed by the composable pairs")
        for x, g in pairs:
            left, bottom = tri[(x, g)], trl[(x, g)]
            if v.src[left] != h.src[x] or v.tgt[left] != h.src[bottom]:
                self._fail(f"left edge of ({x}, {g}) has wrong endpoints")
            if h.tgt[bottom] != v.tgt[g]:
                self._fail(f"bottom edge of ({x}, {g}) has wrong endpoints")
            if x == h.identity_of[h.src[x]] and (left != g or bottom != h.identity_of[v.tgt[g]]):
                self._fail(f"identity top must act trivially at ({x}, {g})")
            if g == v.identity_of[v.src[g]] and (bottom != x or left != v.identity_of[h.src[x]]):
                self._fail(f"identity right edge must act trivially at ({x}, {g})")
        h_by_tgt: Dict = {}
        for x in range(h.n_arrows):
            h_by_tgt.setdefault(h.tgt[x], []).append(x)
        v_by_src: Dict = {}
        for g in range(v.n_arrows):
            v_by_src.setdefault(v.src[g], []).append(g)
        for x, g in pairs:
            left, bottom = tri[(x, g)], trl[(x, g)]
            for g2 in v_by_src.get(v.tgt[g], ()):
                gg = v.compose(g, g2)
                if tri[(x, gg)] != v.compose(left, tri[(bottom, g2)]):
                    self._fail(f"left-action law fails at ({x}, {g}, {g2})")
                if trl[(x, gg)] != trl[(bottom, g2)]:
                    self._fail(f"right-action law fails at ({x}, {g}, {g2})")
            for w in h_by_tgt.get(h.src[x], ()):
                wx = h.compose(w, x)
                if trl[(wx, g)] != h.compose(trl[(w, tri[(x, g)])], bottom):
                    self._fail(f"bottom-merge law fails at ({w}, {x}, {g})")
                if tri[(wx, g)] != tri[(w, tri[(x, g)])]:
                    self._fail(f"top-merge law fails at ({w}, {x}, {g})")


def derive_actions(d: FiniteGroupoid, v: FiniteGroupoid, h: FiniteGroupoid,
                   check: bool = True) -> MatchedPair:
    """Factor every composite x*g through the unique-decomposition table
    of the ambient groupoid."""
    if not check_exact_factorization(d, v, h):
        raise InvalidInput("fact.exact", "the pair is not an exact factorization")
    v_to_d = [d.arrow_index[(v.src[i], v.tgt[i], v.payload[i])] for i in range(v.n_arrows)]
    h_to_d = [d.arrow_index[(h.src[i], h.tgt[i], h.payload[i])] for i in range(h.n_arrows)]
    h_by_src: Dict = {}
    for x in range(h.n_arrows):
        h_by_src.setdefault(h.src[x], []).append(x)
    decomposition: Dict[int, Tuple[int, int]] = {}
    for g in range(v.n_arrows):
        for x in h_by_src.get(v.tgt[g], ()):
            decomposition[d.compose(v_to_d[g], h_to_d[x])] = (g, x)
    tri: Dict[Tuple[int, int], int] = {}
    trl: Dict[Tuple[int, int], int] = {}
    v_by_src: Dict = {}
    for g in range(v.n_arrows):
        v_by_src.setdefault(v.src[g], []).append(g)
    for x in range(h.n_arrows):
        for g in v_by_src.get(h.tgt[x], ()):
            left, bottom = decomposition[d.compose(h_to_d[x], v_to_d[g])]
            tri[(x, g)] = left
            trl[(x, g)] = bottom
    return MatchedPair(d, v, h, tri, trl, check=check)


# ---------------------------------------------------------------------------
# box composition
# ---------------------------------------------------------------------------

def horizontal_identity(mp: MatchedPair, g: int) -> Box:
    """The box (id at t(g), g); both vertical edges equal g."""
    return Box(mp.h.identity_of[mp.v.src[g]], g)


def vertical_identity(mp: MatchedPair, x: int) -> Box:
    """The box (x, id at r(x)); both horizontal edges equal x."""
    return Box(x, mp.v.identity_of[mp.h.tgt[x]])


def horizontal_compose(mp: MatchedPair, a: Box, b: Box) -> Box:
    """Glue along the shared vertical edge: needs right(a) = left(b)."""
    if mp.left_edge(b) != a.g:
        raise InvalidInput(
            "mp.compose", "boxes do not share a vertical edge"
        )
    return Box(mp.h.compose(a.x, b.x), b.g)


def vertical_compose(mp: MatchedPair, a: Box, b: Box) -> Box:
    """Glue along the shared horizontal edge: needs bottom(a) = top(b)."""
    if mp.bottom_edge(a) != b.x:
        raise InvalidInput(
            "mp.compose", "boxes do not share a horizontal edge"
        )
    return Box(a.x, mp.v.compose(a.g, b.g))


def box_to_dict(mp: MatchedPair, b: Box) -> dict:
    """Render a box with all four edges as (src, tgt, payload) triples."""
    def arrow(gpd, i):
        return [gpd.src[i], gpd.tgt[i], gpd.payload[i]]

    return {
        "x": arrow(mp.h, b.x),
        "g": arrow(mp.v, b.g),
        "h": arrow(mp.v, mp.left_edge(b)),
        "y": arrow(mp.h, mp.bottom_edge(b)),
    }


# ---------------------------------------------------------------------------
# diagonal groupoid
# ---------------------------------------------------------------------------

def diagonal_groupoid(mp: MatchedPair) -> FiniteGroupoid:
    """Arrows are pairs (g, x) with b(g) = l(x); composition twists the
    middle factors through the actions."""
    v, h = mp.v, mp.h
    h_by_src: Dict = {}
    for x in range(h.n_arrows):
        h_by_src.setdefault(h.src[x], []).append(x)
    arrows = []
    for g in range(v.n_arrows):
        for x in h_by_src.get(v.tgt[g], ()):
            arrows.append((v.src[g], h.tgt[x], (g, x)))

    def compose_payload(p1, p2):
        g1, x1 = p1
        g2, x2 = p2
        return (v.compose(g1, mp.tri[(x1, g2)]), h.compose(mp.trl[(x1, g2)], x2))

    def identity_payload(p):
        return (v.identity_of[p], h.identity_of[p])

    return FiniteGroupoid(
        mp.d.objects, arrows, compose_payload, identity_payload,
        meta={"kind": "diagonal"},
    )


def diagonal_isomorphism(mp: MatchedPair, diag: FiniteGroupoid) -> GroupoidMorphism:
    """The functor (g, x) -> g*x onto the ambient groupoid; checked to
    be bijective on arrows."""
    amap = []
    for i in range(diag.n_arrows):
        g, x = diag.payload[i]
        amap.append(mp.d.compose(mp._v_to_d[g], mp._h_to_d[x]))
    morphism = GroupoidMorphism(diag, mp.d, amap, check=True)
    if diag.n_arrows != mp.d.n_arrows or len(set(amap)) != mp.d.n_arrows:
        raise InvariantViolation("mp.diag", "diagonal comparison is not bijective")
    return morphism
