"""Exact factorizations of a connected groupoid into a pair of wide
subgroupoids.

The ambient groupoid is the connected model of a finite group D over a
point set; the two factors are wide subgroupoids, a connected one built
from a single subgroup V (all conjugating elements trivial) and one
built from a partition of the points with a subgroup and base-point
translations per class.  ``check_exact_factorization`` tests the
defining property — every arrow is a unique composite of a V-arrow
followed by an H-arrow — and ``check_conditions_connectedV`` tests the
equivalent group-level criterion: per class, the translated double
cosets partition D and V meets every conjugate of the class subgroup
trivially.
"""

from .groupoids import FiniteGroupoid, connected_model, wide_subgroupoid
from .groups import (
    FiniteGroup,
    Subgroup,
    cyclic_group,
    double_cosets,
    group_from_descriptor,
    group_to_descriptor,
    is_exact_group_factorization,
    subgroup_from_descriptor,
    subgroup_generated,
    subgroup_to_descriptor,
    symmetric_group,
    trivially_intersects_all_conjugates,
)
from .intlinalg import InvalidInput

__all__ = [
    "FactorizationData",
    "check_exact_factorization",
    "check_conditions_connectedV",
    "build_case1",
    "build_case2",
    "build_case3",
    "example_case1_sym",
    "example_case2_sym",
    "example_case2_cyclic",
    "example_case3_regular",
    "example_case3_cycles",
    "named_example",
    "factorization_to_descriptor",
    "factorization_from_descriptor",
]


class FactorizationData:
    """A group D with a point set, the subgroup V of the connected
    factor, and the class data (objects, subgroup, translations) of the
    second factor."""

    __slots__ = ("group", "points", "base", "v", "h_classes", "name", "_realized")

    def __init__(self, group: FiniteGroup, points, base, v: Subgroup,
                 h_classes, name: str = "custom"):
        points = tuple(sorted(points))
        if not points or len(set(points)) != len(points):
            raise InvalidInput("fact.points", "points must be nonempty and distinct")
        if base not in points:
            raise InvalidInput("fact.points", f"base {base!r} is not a point")
        if v.parent is not group:
            raise InvalidInput("grp.parent", "V must be a subgroup of the ambient group")
        norm = []
        covered = []
        for objs, h_u, lam in h_classes:
            objs = tuple(sorted(objs))
            if h_u.parent is not group:
                raise InvalidInput("grp.parent", "class subgroup has a different parent")
            lam = {p: int(lam[p]) for p in objs}
            for p, g in lam.items():
                if not 0 <= g < group.order:
                    raise InvalidInput("fact.lambda", f"translation at {p!r} out of range")
            if not h_u.contains(lam[objs[0]]):
                raise InvalidInput(
                    "fact.lambda",
                    f"translation at the class base {objs[0]!r} must lie in the class subgroup",
                )
            covered.extend(objs)
            norm.append((objs, h_u, lam))
        if sorted(covered) != list(points):
            raise InvalidInput("fact.partition", "classes must partition the points")
        self.group = group
        self.points = points
        self.base = base
        self.v = v
        self.h_classes = norm
        self.name = name
        self._realized = None

    def realize(self):
        """Build (ambient model, V-groupoid, H-groupoid); cached."""
        if self._realized is None:
            model = connected_model(self.group, self.points, self.base)
            ident = self.group.identity
            v_gpd = wide_subgroupoid(
                model, [(self.points, self.v, {p: ident for p in self.points})]
            )
            h_gpd = wide_subgroupoid(model, self.h_classes)
            self._realized = (model, v_gpd, h_gpd)
        return self._realized


def _require_subgroupoid(d: FiniteGroupoid, part: FiniteGroupoid, tag: str):
    if tuple(part.objects) != tuple(d.objects):
        raise InvalidInput("fact.sub", f"{tag} factor is not wide in the ambient groupoid")
    indices = []
    for i in range(part.n_arrows):
        key = (part.src[i], part.tgt[i], part.payload[i])
        j = d.arrow_index.get(key)
        if j is None:
            raise InvalidInput("fact.sub", f"{tag} factor has an arrow outside the ambient groupoid")
        indices.append(j)
    return indices


def check_exact_factorization(d: FiniteGroupoid, v: FiniteGroupoid,
                              h: FiniteGroupoid) -> bool:
    """True iff every arrow of d is g*x for exactly one V-arrow g and
    H-arrow x."""
    v_idx = _require_subgroupoid(d, v, "V")
    h_idx = _require_subgroupoid(d, h, "H")
    h_by_src = {}
    for xi, dj in zip(range(h.n_arrows), h_idx):
        h_by_src.setdefault(h.src[xi], []).append(dj)
    counts = [0] * d.n_arrows
    for gi, dg in zip(range(v.n_arrows), v_idx):
        for dx in h_by_src.get(v.tgt[gi], ()):
            counts[d.compose(dg, dx)] += 1
    return all(c == 1 for c in counts)


def check_conditions_connectedV(data: FactorizationData) -> bool:
    """Group-level criterion: for each class, the sets V*lam_P^{-1}*H_U
    over its points partition D, and V meets every conjugate of H_U
    trivially."""
    g = data.group
    full = set(range(g.order))
    for objs, h_u, lam in data.h_classes:
        seen = set()
        for p in objs:
            mid = g.inv(lam[p])
            coset = {
                g.mul(g.mul(a, mid), b)
                for a in data.v.elements
                for b in h_u.elements
            }
            if len(coset) != data.v.order * h_u.order or coset & seen:
                return False
            seen |= coset
        if seen != full:
            return False
        if not trivially_intersects_all_conjugates(data.v, h_u):
            return False
    return True


# ---------------------------------------------------------------------------
# case constructors
# ---------------------------------------------------------------------------

def build_case1(d: FiniteGroup, v: Subgroup, subgroups) -> FactorizationData:
    """One point per subgroup; each pair (V, H_P) must factor D exactly."""
    subgroups = list(subgroups)
    if not subgroups:
        raise InvalidInput("fact.points", "need at least one point subgroup")
    for p, h_p in enumerate(subgroups):
        if not is_exact_group_factorization(d, v, h_p):
            raise InvalidInput(
                "fact.exact", f"(V, H_{p}) is not an exact factorization of the group"
            )
    classes = [((p,), h_p, {p: d.identity}) for p, h_p in enumerate(subgroups)]
    return FactorizationData(d, range(len(subgroups)), 0, v, classes, name="case1")


def _ordered_cosets(d: FiniteGroup, v: Subgroup, h: Subgroup, reps=None):
    """Double cosets with the identity class first; returns [(rep, members)]."""
    classes = double_cosets(v, h)
    if reps is not None:
        reps = [int(r) for r in reps]
        if len(reps) != len(classes):
            raise InvalidInput("fact.lambda", "need exactly one representative per class")
        chosen = []
        for rep, members in classes:
            hits = [r for r in reps if r in members]
            if len(hits) != 1:
                raise InvalidInput(
                    "fact.lambda", "representatives must hit each double coset exactly once"
                )
            chosen.append((hits[0], members))
        classes = chosen
    classes.sort(key=lambda cm: (d.identity not in cm[1], cm[1][0]))
    rep0 = classes[0][0]
    if not h.contains(rep0):
        raise InvalidInput(
            "fact.lambda", "the identity-class representative must lie in H"
        )
    return classes


def build_case2(d: FiniteGroup, v: Subgroup, h: Subgroup, reps=None) -> FactorizationData:
    """Points are the double cosets V\\D/H; translations are inverses of
    the representatives.  Requires V to meet every conjugate of H
    trivially."""
    if not trivially_intersects_all_conjugates(v, h):
        raise InvalidInput("fact.trivint", "V meets a conjugate of H nontrivially")
    classes = _ordered_cosets(d, v, h, reps)
    k = len(classes)
    lam = {p: d.inv(rep) for p, (rep, _) in enumerate(classes)}
    data = FactorizationData(
        d, range(k), 0, v, [(tuple(range(k)), h, lam)], name="case2"
    )
    return data


def build_case3(d: FiniteGroup, v: Subgroup, h1: Subgroup, h2: Subgroup) -> FactorizationData:
    """Base point carries H_1 (an exact group factor); the remaining
    points are the double cosets V\\D/H_2."""
    if not is_exact_group_factorization(d, v, h1):
        raise InvalidInput("fact.exact", "(V, H_1) is not an exact factorization of the group")
    if not trivially_intersects_all_conjugates(v, h2):
        raise InvalidInput("fact.trivint", "V meets a conjugate of H_2 nontrivially")
    classes = _ordered_cosets(d, v, h2)
    k = len(classes)
    lam2 = {p + 1: d.inv(rep) for p, (rep, _) in enumerate(classes)}
    h_classes = [((0,), h1, {0: d.identity}), (tuple(range(1, k + 1)), h2, lam2)]
    return FactorizationData(d, range(k + 1), 0, v, h_classes, name="case3")


# ---------------------------------------------------------------------------
# named examples
# ---------------------------------------------------------------------------

def _long_cycle_index(d: FiniteGroup, n: int) -> int:
    word = "(" + " ".join(str(i + 1) for i in range(n)) + ")"
    return d.index_of_word(word)


def _stabilizer(d: FiniteGroup, fixed) -> Subgroup:
    fixed = set(fixed)
    members = [
        e for e, lab in enumerate(d.labels)
        if all(lab[i] == i for i in fixed)
    ]
    return Subgroup(d, members)


def example_case1_sym(m: int) -> FactorizationData:
    """D = Sym(m), V the long cycle, one point stabilizer per point."""
    d = symmetric_group(m)
    v = subgroup_generated(d, [_long_cycle_index(d, m)])
    subs = [_stabilizer(d, [i]) for i in range(m)]
    data = build_case1(d, v, subs)
    data.name = f"case1-sym({m})"
    return data


def example_case2_sym(m: int, k: int, r: int) -> FactorizationData:
    """D = Sym(m), V of order k inside the long cycle, H the pointwise
    stabilizer of the first r points."""
    if m < 2 or not 1 <= r <= m or k < 1 or m % k:
        raise InvalidInput("fact.params", "need 1 <= r <= m and k dividing m")
    d = symmetric_group(m)
    full = d.labels[_long_cycle_index(d, m)]
    power = full
    for _ in range(m // k - 1):
        power = tuple(full[i] for i in power)
    v = subgroup_generated(d, [d.index_of_label(power)])
    h = _stabilizer(d, range(r))
    data = build_case2(d, v, h)
    data.name = f"case2-sym({m},{k},{r})"
    return data


def example_case2_cyclic(p: int, q: int, n: int) -> FactorizationData:
    """D = Z/(pqn), V of order p, H of order q; needs gcd(p, q) = 1."""
    if min(p, q, n) < 1:
        raise InvalidInput("fact.params", "parameters must be positive")
    d = cyclic_group(p * q * n)
    v = subgroup_generated(d, [(q * n) % d.order])
    h = subgroup_generated(d, [(p * n) % d.order])
    data = build_case2(d, v, h)
    data.name = f"case2-cyclic({p},{q},{n})"
    return data


def _regular_generator(n: int):
    """Permutation of the first n points given by adding 1 in Z/n."""
    c = cyclic_group(n)
    return tuple(c.cayley[i][1] for i in range(n))


def example_case3_regular(n: int) -> FactorizationData:
    """D = Sym(n+1), V the long cycle, H_1 the last-point stabilizer,
    H_2 the regular cyclic subgroup on the first n points."""
    if n < 2:
        raise InvalidInput("fact.params", "need n >= 2")
    d = symmetric_group(n + 1)
    v = subgroup_generated(d, [_long_cycle_index(d, n + 1)])
    h1 = _stabilizer(d, [n])
    gen = _regular_generator(n) + (n,)
    h2 = subgroup_generated(d, [d.index_of_label(gen)])
    data = build_case3(d, v, h1, h2)
    data.name = f"case3-regular({n})"
    return data


def example_case3_cycles(r: int, s: int) -> FactorizationData:
    """D = Sym(rs), V the last-point stabilizer, H_1 the long cycle,
    H_2 generated by s disjoint r-cycles."""
    if r < 2 or s < 1:
        raise InvalidInput("fact.params", "need r >= 2 and s >= 1")
    n = r * s
    d = symmetric_group(n)
    v = _stabilizer(d, [n - 1])
    h1 = subgroup_generated(d, [_long_cycle_index(d, n)])
    gen = tuple(b * r + (i - b * r + 1) % r for b in range(s) for i in range(b * r, b * r + r))
    h2 = subgroup_generated(d, [d.index_of_label(gen)])
    data = build_case3(d, v, h1, h2)
    data.name = f"case3-cycles({r},{s})"
    return data


_NAMED = {
    "case1-sym": example_case1_sym,
    "case2-sym": example_case2_sym,
    "case2-cyclic": example_case2_cyclic,
    "case3-regular": example_case3_regular,
    "case3-cycles": example_case3_cycles,
}


def named_example(name: str, params) -> FactorizationData:
    fn = _NAMED.get(name)
    if fn is None:
        known = ", ".join(sorted(_NAMED))
        raise InvalidInput("fact.name", f"unknown example {name!r}; known: {known}")
    return fn(*[int(x) for x in params])


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

def _case_number(data: FactorizationData) -> int:
    base = data.name.split("(")[0]
    if base.startswith("case1"):
        return 1
    if base.startswith("case2"):
        return 2
    if base.startswith("case3"):
        return 3
    return 0


def factorization_to_descriptor(data: FactorizationData) -> dict:
    g = data.group
    classes = []
    for objs, h_u, lam in data.h_classes:
        classes.append({
            "objects": list(objs),
            "subgroup": subgroup_to_descriptor(h_u),
            "lambda": [[p, g.labels[lam[p]] if g.kind == "cyclic"
                        else _word_of(g, lam[p])] for p in objs],
        })
    case = _case_number(data)
    desc = {
        "case": case,
        "name": data.name,
        "group": group_to_descriptor(g),
        "V": subgroup_to_descriptor(data.v),
        "points": len(data.points),
        "base": data.base,
        "classes": classes,
    }
    if case == 1:
        desc["H"] = [subgroup_to_descriptor(h_u) for _, h_u, _ in data.h_classes]
    elif case == 2:
        desc["H"] = subgroup_to_descriptor(data.h_classes[0][1])
    elif case == 3:
        desc["H"] = [subgroup_to_descriptor(data.h_classes[0][1]),
                     subgroup_to_descriptor(data.h_classes[1][1])]
    return desc


def _word_of(g: FiniteGroup, e: int):
    from .groups import cycle_notation
    lab = g.labels[e]
    if isinstance(lab, tuple):
        return cycle_notation(lab)
    return e


def factorization_from_descriptor(desc: dict) -> FactorizationData:
    case = desc.get("case")
    d = group_from_descriptor(desc["group"])
    v = subgroup_from_descriptor(d, desc["V"])
    if case == 1:
        subs = [subgroup_from_descriptor(d, s) for s in desc["H"]]
        return build_case1(d, v, subs)
    if case == 2:
        return build_case2(d, v, subgroup_from_descriptor(d, desc["H"]))
    if case == 3:
        h1 = subgroup_from_descriptor(d, desc["H"][0])
        h2 = subgroup_from_descriptor(d, desc["H"][1])
        return build_case3(d, v, h1, h2)
    raise InvalidInput("fact.descriptor", f"unknown case {case!r}")
