"""Finite groupoids over a base set of objects.

Arrows are (source, target, payload) triples; composition acts left to
right and is defined exactly when the target of the first arrow equals
the source of the second.  Includes the connected model of a group over
a point set, wide subgroupoids cut out by per-class subgroup data,
skeleton equivalences with explicit witnesses, similarity of functors,
and module bundles (fiberwise abelian groups with arrow actions).
"""

from __future__ import annotations

from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .groups import (
    FiniteGroup,
    Subgroup,
    group_from_descriptor,
    group_to_descriptor,
)
from .intlinalg import InvalidInput, InvariantViolation, ResourceBound

__all__ = [
    "FiniteGroupoid",
    "GroupoidMorphism",
    "Skeleton",
    "ModuleBundle",
    "connected_components",
    "vertex_group",
    "connected_model",
    "wide_subgroupoid",
    "identity_morphism",
    "is_similar",
    "skeleton",
    "trivial_bundle",
    "groupoid_to_descriptor",
    "groupoid_from_descriptor",
]


class FiniteGroupoid:
    """Finite groupoid with explicit arrow list and payload composition.

    ``compose_payload(a, b)`` must return the payload of the composite
    of two arrows carrying payloads a, b whenever their endpoints chain;
    ``identity_payload(P)`` names the identity arrow at P.  Inverses are
    located eagerly, so construction fails on non-groupoids.
    """

    __slots__ = (
        "objects",
        "src",
        "tgt",
        "payload",
        "n_arrows",
        "arrow_index",
        "identity_of",
        "inverse",
        "meta",
        "_compose_payload",
        "_hom",
    )

    def __init__(
        self,
        objects: Iterable,
        arrows: Sequence[Tuple],
        compose_payload: Callable,
        identity_payload: Callable,
        meta: Optional[dict] = None,
    ):
        objs = tuple(sorted(set(objects)))
        if not objs:
            raise InvalidInput("gpd.objects", "groupoid needs at least one object")
        obj_set = set(objs)
        src: List = []
        tgt: List = []
        payload: List = []
        arrow_index: Dict = {}
        hom: Dict = {}
        for triple in arrows:
            s, t, p = triple
            if s not in obj_set or t not in obj_set:
                raise InvalidInput("gpd.objects", f"arrow endpoint not an object: {triple!r}")
            key = (s, t, p)
            if key in arrow_index:
                raise InvalidInput("gpd.dup", f"duplicate arrow {key!r}")
            arrow_index[key] = len(src)
            hom.setdefault((s, t), []).append(len(src))
            src.append(s)
            tgt.append(t)
            payload.append(p)
        self.objects = objs
        self.src = src
        self.tgt = tgt
        self.payload = payload
        self.n_arrows = len(src)
        self.arrow_index = arrow_index
        self._hom = {k: tuple(v) for k, v in hom.items()}
        self._compose_payload = compose_payload
        self.meta = meta or {}

        identity_of = {}
        for p_obj in objs:
            key = (p_obj, p_obj, identity_payload(p_obj))
            if key not in arrow_index:
                raise InvalidInput("gpd.id", f"missing identity arrow at {p_obj!r}")
            identity_of[p_obj] = arrow_index[key]
        self.identity_of = identity_of

        inverse = [-1] * self.n_arrows
        for i in range(self.n_arrows):
            e_src = identity_of[src[i]]
            e_tgt = identity_of[tgt[i]]
            for j in self._hom.get((tgt[i], src[i]), ()):
                if self.compose(i, j) == e_src and self.compose(j, i) == e_tgt:
                    inverse[i] = j
                    break
            if inverse[i] < 0:
                raise InvalidInput("gpd.inverse", f"arrow {i} has no inverse")
        self.inverse = inverse

    def hom(self, p, q) -> Tuple[int, ...]:
        return self._hom.get((p, q), ())

    def compose(self, i: int, j: int) -> int:
        """Composite arrow index of i followed by j."""
        if self.tgt[i] != self.src[j]:
            raise InvalidInput(
                "gpd.comp",
                f"arrows {i} and {j} do not chain: target {self.tgt[i]!r}"
                f" != source {self.src[j]!r}",
            )
        key = (self.src[i], self.tgt[j], self._compose_payload(self.payload[i], self.payload[j]))
        k = self.arrow_index.get(key)
        if k is None:
            raise InvariantViolation(
                "gpd.closed", f"composite of arrows {i}, {j} is not an arrow"
            )
        return k

    def check(self, triple_bound: int = 500_000) -> None:
        """Validate all groupoid laws exhaustively (see triple_bound)."""
        for i in range(self.n_arrows):
            e_s = self.identity_of[self.src[i]]
            e_t = self.identity_of[self.tgt[i]]
            if self.compose(e_s, i) != i or self.compose(i, e_t) != i:
                raise InvalidInput("gpd.idlaw", f"identity law fails at arrow {i}")
            j = self.inverse[i]
            if self.compose(i, j) != e_s or self.compose(j, i) != e_t:
                raise InvalidInput("gpd.inverse", f"inverse law fails at arrow {i}")
        by_src: Dict = {}
        for j in range(self.n_arrows):
            by_src.setdefault(self.src[j], []).append(j)
        count = 0
        for i in range(self.n_arrows):
            for j in by_src.get(self.tgt[i], ()):
                ij = self.compose(i, j)
                for k in by_src.get(self.tgt[j], ()):
                    count += 1
                    if count > triple_bound:
                        raise ResourceBound(
                            "gpd.bound",
                            f"more than {triple_bound} composable triples",
                        )
                    if self.compose(ij, k) != self.compose(i, self.compose(j, k)):
                        raise InvalidInput(
                            "gpd.assoc",
                            f"associativity fails on arrows ({i}, {j}, {k})",
                        )

    def __repr__(self) -> str:
        return (
            f"FiniteGroupoid(objects={len(self.objects)},"
            f" arrows={self.n_arrows})"
        )


# ---------------------------------------------------------------------------
# components, vertex groups, models
# ---------------------------------------------------------------------------

def connected_components(g: FiniteGroupoid) -> List[Tuple]:
    """Partition of the objects by mutual reachability, sorted by minimum."""
    neighbors: Dict = {p: set() for p in g.objects}
    for i in range(g.n_arrows):
        neighbors[g.src[i]].add(g.tgt[i])
        neighbors[g.tgt[i]].add(g.src[i])
    seen = set()
    parts = []
    for p in g.objects:
        if p in seen:
            continue
        comp = {p}
        frontier = [p]
        while frontier:
            q = frontier.pop()
            for r in neighbors[q]:
                if r not in comp:
                    comp.add(r)
                    frontier.append(r)
        seen |= comp
        parts.append(tuple(sorted(comp)))
    return parts


def vertex_group(g: FiniteGroupoid, p) -> FiniteGroup:
    """Group of loops at p; element labels are the loop arrow indices."""
    if p not in g.identity_of:
        raise InvalidInput("gpd.object", f"{p!r} is not an object")
    loops = g.hom(p, p)
    pos = {a: i for i, a in enumerate(loops)}
    cayley = [[pos[g.compose(a, b)] for b in loops] for a in loops]
    return FiniteGroup(cayley, labels=list(loops), kind="table")


def connected_model(d: FiniteGroup, points: Iterable, o) -> FiniteGroupoid:
    """The groupoid D x P^2: arrows (x, P, Q) with payload the index x.

    Composition is (x,P,Q)(y,Q,R) = (xy,P,R); every hom-set is a copy
    of D, so the model is connected with vertex group D everywhere.
    """
    pts = tuple(sorted(set(points)))
    if o not in pts:
        raise InvalidInput("gpd.object", f"base point {o!r} not among the points")
    arrows = [(p, q, x) for p in pts for q in pts for x in range(d.order)]
    return FiniteGroupoid(
        pts,
        arrows,
        d.mul,
        lambda _p: d.identity,
        meta={"kind": "model", "group": d, "base": o},
    )


def wide_subgroupoid(
    d_model: FiniteGroupoid,
    classes: Sequence[Tuple[Iterable, Subgroup, Dict]],
) -> FiniteGroupoid:
    """Wide subgroupoid of a connected model from per-class (H_U, lambda).

    Each class is (objects, H_U, lambda) with lambda a map object ->
    element index of D; arrows between P, Q in one class carry the
    payloads lambda_P^{-1} * a * lambda_Q over a in H_U.  The lambda at
    the base point (minimal object) of each class must lie in H_U.
    """
    if d_model.meta.get("kind") != "model":
        raise InvalidInput("gpd.model", "expected a connected model groupoid")
    d: FiniteGroup = d_model.meta["group"]
    covered: List = []
    for objs, _h_u, _lam in classes:
        covered.extend(objs)
    if sorted(covered) != list(d_model.objects) or len(covered) != len(set(covered)):
        raise InvalidInput("gpd.partition", "classes do not partition the objects")
    arrows = []
    norm_classes = []
    for objs, h_u, lam in classes:
        objs = tuple(sorted(objs))
        if h_u.parent is not d:
            raise InvalidInput("grp.parent", "subgroup does not live in the model group")
        base = objs[0]
        for p_obj in objs:
            if p_obj not in lam:
                raise InvalidInput("gpd.lambda", f"lambda missing at {p_obj!r}")
            if not 0 <= lam[p_obj] < d.order:
                raise InvalidInput("gpd.lambda", f"lambda at {p_obj!r} out of range")
        if not h_u.contains(lam[base]):
            raise InvalidInput(
                "gpd.lambda",
                f"lambda at base point {base!r} must lie in the class subgroup",
            )
        norm_classes.append((objs, h_u, dict(lam)))
        for p_obj in objs:
            lp_inv = d.inv(lam[p_obj])
            for q_obj in objs:
                lq = lam[q_obj]
                for a in h_u.elements:
                    arrows.append((p_obj, q_obj, d.mul(d.mul(lp_inv, a), lq)))
    return FiniteGroupoid(
        d_model.objects,
        arrows,
        d.mul,
        lambda _p: d.identity,
        meta={"kind": "wide", "group": d, "classes": norm_classes, "model": d_model},
    )


# ---------------------------------------------------------------------------
# morphisms, similarity, skeleton
# ---------------------------------------------------------------------------

class GroupoidMorphism:
    """A functor between finite groupoids, stored as an arrow map."""

    __slots__ = ("domain", "codomain", "arrow_map", "object_map")

    def __init__(
        self,
        domain: FiniteGroupoid,
        codomain: FiniteGroupoid,
        arrow_map: Sequence[int],
        check: bool = True,
    ):
        if len(arrow_map) != domain.n_arrows:
            raise InvalidInput("gpd.functor", "arrow map has wrong length")
        amap = list(arrow_map)
        if any(not 0 <= a < codomain.n_arrows for a in amap):
            raise InvalidInput("gpd.functor", "arrow map image out of range")
        object_map = {}
        for p in domain.objects:
            img = amap[domain.identity_of[p]]
            q = codomain.src[img]
            if img != codomain.identity_of[q]:
                raise InvalidInput(
                    "gpd.functor", f"identity at {p!r} not sent to an identity"
                )
            object_map[p] = q
        self.domain = domain
        self.codomain = codomain
        self.arrow_map = amap
        self.object_map = object_map
        if check:
            self._check_functorial()

    def _check_functorial(self) -> None:
        dom, cod = self.domain, self.codomain
        for i in range(dom.n_arrows):
            img = self.arrow_map[i]
            if (
                cod.src[img] != self.object_map[dom.src[i]]
                or cod.tgt[img] != self.object_map[dom.tgt[i]]
            ):
                raise InvalidInput(
                    "gpd.functor", f"arrow {i} endpoints not preserved"
                )
        by_src: Dict = {}
        for j in range(dom.n_arrows):
            by_src.setdefault(dom.src[j], []).append(j)
        for i in range(dom.n_arrows):
            for j in by_src.get(dom.tgt[i], ()):
                if self.arrow_map[dom.compose(i, j)] != cod.compose(
                    self.arrow_map[i], self.arrow_map[j]
                ):
                    raise InvalidInput(
                        "gpd.functor",
                        f"composition not preserved on arrows ({i}, {j})",
                    )

    def then(self, other: "GroupoidMorphism") -> "GroupoidMorphism":
        """Composite functor: apply self first, then other."""
        if self.codomain is not other.domain:
            raise InvalidInput("gpd.functor", "functors do not chain")
        return GroupoidMorphism(
            self.domain,
            other.codomain,
            [other.arrow_map[a] for a in self.arrow_map],
            check=False,
        )


def identity_morphism(g: FiniteGroupoid) -> GroupoidMorphism:
    return GroupoidMorphism(g, g, list(range(g.n_arrows)), check=False)


def is_similar(
    phi: GroupoidMorphism, psi: GroupoidMorphism
) -> Optional[Dict]:
    """A natural isomorphism tau with phi(g) tau(e(g)) = tau(s(g)) psi(g).

    Returns a map object -> codomain arrow index, or None.  The search
    fixes tau at one root per component and propagates along arrows.
    """
    if phi.domain is not psi.domain or phi.codomain is not psi.codomain:
        raise InvalidInput("gpd.parent", "functors do not share domain/codomain")
    dom, cod = phi.domain, phi.codomain
    adjacency: Dict = {p: [] for p in dom.objects}
    for i in range(dom.n_arrows):
        adjacency[dom.src[i]].append((i, False))
        adjacency[dom.tgt[i]].append((i, True))
    tau: Dict = {}
    for comp in connected_components(dom):
        root = comp[0]
        comp_arrows = [
            i for i in range(dom.n_arrows) if dom.src[i] in comp
        ]
        found = None
        for cand in cod.hom(phi.object_map[root], psi.object_map[root]):
            trial = {root: cand}
            stack = [root]
            ok = True
            while stack and ok:
                p = stack.pop()
                for i, reverse in adjacency[p]:
                    q = dom.src[i] if reverse else dom.tgt[i]
                    if q in trial:
                        continue
                    # tau(e(g)) = phi(g)^{-1} tau(s(g)) psi(g)
                    if reverse:
                        t_q = cod.compose(
                            cod.compose(phi.arrow_map[i], trial[dom.tgt[i]]),
                            cod.inverse[psi.arrow_map[i]],
                        )
                    else:
                        t_q = cod.compose(
                            cod.compose(cod.inverse[phi.arrow_map[i]], trial[p]),
                            psi.arrow_map[i],
                        )
                    trial[q] = t_q
                    stack.append(q)
            for i in comp_arrows:
                if cod.compose(phi.arrow_map[i], trial[dom.tgt[i]]) != cod.compose(
                    trial[dom.src[i]], psi.arrow_map[i]
                ):
                    ok = False
                    break
            if ok:
                found = trial
                break
        if found is None:
            return None
        tau.update(found)
    return tau


class Skeleton:
    """Skeleton data: the skeletal groupoid, functors, and tau witness."""

    __slots__ = ("groupoid", "phi", "psi", "tau", "bases")

    def __init__(self, groupoid, phi, psi, tau, bases):
        self.groupoid = groupoid
        self.phi = phi
        self.psi = psi
        self.tau = tau
        self.bases = bases


def skeleton(g: FiniteGroupoid) -> Skeleton:
    """Deformation of g onto its vertex groups at per-component bases.

    Chooses the minimal object of each component as base, tau_Q as the
    first arrow base -> Q (tau at the base is the identity), and returns
    phi(a) = tau_{s(a)} a tau_{e(a)}^{-1} with psi the inclusion.  The
    exact equations phi(psi(h)) = h and psi(phi(a)) tau = tau a are
    certified before returning.
    """
    comps = connected_components(g)
    bases = {}
    tau = {}
    for comp in comps:
        base = comp[0]
        for q in comp:
            bases[q] = base
            if q == base:
                tau[q] = g.identity_of[base]
            else:
                arrows = g.hom(base, q)
                if not arrows:
                    raise InvariantViolation(
                        "gpd.skeleton", f"no arrow {base!r} -> {q!r} in component"
                    )
                tau[q] = arrows[0]
    base_objs = tuple(sorted({bases[p] for p in g.objects}))
    sk_arrows = []
    for b in base_objs:
        for loop in g.hom(b, b):
            sk_arrows.append((b, b, loop))
    sk = FiniteGroupoid(
        base_objs,
        sk_arrows,
        g.compose,
        lambda p: g.identity_of[p],
        meta={"kind": "skeleton", "of": g},
    )
    phi_map = []
    for i in range(g.n_arrows):
        loop = g.compose(
            g.compose(tau[g.src[i]], i), g.inverse[tau[g.tgt[i]]]
        )
        b = bases[g.src[i]]
        phi_map.append(sk.arrow_index[(b, b, loop)])
    psi_map = [sk.payload[k] for k in range(sk.n_arrows)]
    phi = GroupoidMorphism(g, sk, phi_map)
    psi = GroupoidMorphism(sk, g, psi_map)
    for k in range(sk.n_arrows):
        if phi_map[psi_map[k]] != k:
            raise InvariantViolation("gpd.skeleton", "phi after psi is not the identity")
    for i in range(g.n_arrows):
        lhs = g.compose(psi_map[phi_map[i]], tau[g.tgt[i]])
        rhs = g.compose(tau[g.src[i]], i)
        if lhs != rhs:
            raise InvariantViolation(
                "gpd.skeleton", f"similarity equation fails at arrow {i}"
            )
    return Skeleton(sk, phi, psi, tau, bases)


# ---------------------------------------------------------------------------
# module bundles
# ---------------------------------------------------------------------------

def _mat_mul(a, b):
    rows = len(a)
    inner = len(b)
    cols = len(b[0]) if inner else 0
    return tuple(
        tuple(sum(a[r][k] * b[k][c] for k in range(inner)) for c in range(cols))
        for r in range(rows)
    )


def _mat_reduce(a, moduli):
    # entries of row r live in Z/moduli[r] (0 meaning Z)
    return tuple(
        tuple(v % m if m else v for v in row) for row, m in zip(a, moduli)
    )


class ModuleBundle:
    """Fiberwise abelian groups Z/m_1 + ... + Z/m_k with arrow actions.

    fibers maps each object to a tuple of moduli (0 means Z); actions
    maps each arrow index to an integer matrix sending the fiber at the
    arrow's target to the fiber at its source (rows indexed by the
    source fiber).
    """

    __slots__ = ("groupoid", "fibers", "actions")

    def __init__(self, groupoid: FiniteGroupoid, fibers: Dict, actions: Dict):
        for p in groupoid.objects:
            if p not in fibers:
                raise InvalidInput("gpd.bundle", f"fiber missing at object {p!r}")
        self.groupoid = groupoid
        self.fibers = {p: tuple(fibers[p]) for p in groupoid.objects}
        acts = {}
        for i in range(groupoid.n_arrows):
            if i not in actions:
                raise InvalidInput("gpd.bundle", f"action missing for arrow {i}")
            mat = tuple(tuple(row) for row in actions[i])
            nr = len(self.fibers[groupoid.src[i]])
            nc = len(self.fibers[groupoid.tgt[i]])
            if len(mat) != nr or any(len(row) != nc for row in mat):
                raise InvalidInput(
                    "gpd.bundle", f"action at arrow {i} has wrong shape"
                )
            acts[i] = _mat_reduce(mat, self.fibers[groupoid.src[i]])
        self.actions = acts

    def dim(self, p) -> int:
        return len(self.fibers[p])

    def apply(self, i: int, vector: Sequence[int]) -> Tuple[int, ...]:
        """Image of a fiber(target) vector under the action of arrow i."""
        mat = self.actions[i]
        moduli = self.fibers[self.groupoid.src[i]]
        if len(vector) != len(self.fibers[self.groupoid.tgt[i]]):
            raise InvalidInput("gpd.bundle", "vector has wrong fiber dimension")
        out = []
        for r, row in enumerate(mat):
            v = sum(c * x for c, x in zip(row, vector))
            out.append(v % moduli[r] if moduli[r] else v)
        return tuple(out)

    def check(self) -> None:
        g = self.groupoid
        for p in g.objects:
            i = g.identity_of[p]
            mat = self.actions[i]
            moduli = self.fibers[p]
            for r in range(len(moduli)):
                for c in range(len(moduli)):
                    want = 1 if r == c else 0
                    diff = mat[r][c] - want
                    bad = diff % moduli[r] != 0 if moduli[r] else diff != 0
                    if bad:
                        raise InvalidInput(
                            "gpd.bundle", f"identity at {p!r} does not act as identity"
                        )
        by_src: Dict = {}
        for j in range(g.n_arrows):
            by_src.setdefault(g.src[j], []).append(j)
        for i in range(g.n_arrows):
            for j in by_src.get(g.tgt[i], ()):
                k = g.compose(i, j)
                moduli = self.fibers[g.src[i]]
                prod = _mat_reduce(_mat_mul(self.actions[i], self.actions[j]), moduli)
                if prod != _mat_reduce(self.actions[k], moduli):
                    raise InvalidInput(
                        "gpd.bundle",
                        f"action not functorial on arrows ({i}, {j})",
                    )


def trivial_bundle(g: FiniteGroupoid, moduli: Sequence[int]) -> ModuleBundle:
    """Constant fiber with every arrow acting as the identity."""
    moduli = tuple(moduli)
    k = len(moduli)
    ident = tuple(tuple(1 if r == c else 0 for c in range(k)) for r in range(k))
    return ModuleBundle(
        g,
        {p: moduli for p in g.objects},
        {i: ident for i in range(g.n_arrows)},
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def groupoid_to_descriptor(g: FiniteGroupoid) -> dict:
    if g.meta.get("kind") == "model":
        return {
            "model": {
                "group": group_to_descriptor(g.meta["group"]),
                "points": len(g.objects),
                "base": g.meta["base"],
            }
        }
    raise InvalidInput("gpd.descriptor", "only model groupoids serialize directly")


def groupoid_from_descriptor(desc: dict) -> FiniteGroupoid:
    if "model" in desc:
        spec = desc["model"]
        d = group_from_descriptor(spec["group"])
        points = list(range(int(spec["points"])))
        base = spec.get("base", 0)
        return connected_model(d, points, base)
    raise InvalidInput("gpd.descriptor", "unknown groupoid descriptor")
