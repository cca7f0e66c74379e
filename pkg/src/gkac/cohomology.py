"""Cohomology of finite groupoids with module-bundle coefficients.

The complex in degree n >= 1 has one basis block per composable n-tuple
of non-identity arrows, with coordinates in the fiber at the source of
the tuple's first arrow; degree 0 is the sections of the bundle over
the objects.  The differential sends f to

    (df)(g_0, ..., g_n) = g_0 . f(g_1, ..., g_n)
                          + sum_i (-1)^i f(..., g_{i-1} g_i, ...)
                          + (-1)^{n+1} f(g_0, ..., g_{n-1}),

where a merged tuple containing an identity contributes nothing, and in
degree 0 by (df)(g) = g . f(t(g)) - f(s(g)).

Cohomology groups are read off with exact integer linear algebra; for
Z/M coefficients a fiber Z/m with m properly dividing M is handled by
scaling the rows of the outgoing differential by M/m (so that kernels
are taken fiberwise) and by adding the relations m*e_i on the incoming
side.
"""

from typing import Dict, List, Optional, Sequence, Tuple

from .intlinalg import (
    Coefficients,
    FinAbGroup,
    IntMatrix,
    InvalidInput,
    InvariantViolation,
    KxCohomology,
    ResourceBound,
    CohomologyPresentation,
    kx_emulated_at,
    presentation_at,
)
from .groupoids import (
    FiniteGroupoid,
    ModuleBundle,
    connected_components,
    trivial_bundle,
)

DEFAULT_COCHAIN_BOUND = 2_000_000


# ---------------------------------------------------------------------------
# nerve enumeration
# ---------------------------------------------------------------------------

def _composable_tuples(g: FiniteGroupoid, n: int, skip_identities: bool) -> List[Tuple[int, ...]]:
    idents = frozenset(g.identity_of.values())
    allowed = [
        i for i in range(g.n_arrows)
        if not (skip_identities and i in idents)
    ]
    by_src: Dict = {}
    for i in allowed:
        by_src.setdefault(g.src[i], []).append(i)
    out: List[Tuple[int, ...]] = []
    prefix: List[int] = []

    def extend(at):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for i in by_src.get(at, ()):
            prefix.append(i)
            extend(g.tgt[i])
            prefix.pop()

    for i in allowed:
        prefix.append(i)
        extend(g.tgt[i])
        prefix.pop()
    return out


def nerve(g: FiniteGroupoid, n: int) -> list:
    """Composable n-tuples of arrows; for n = 0 the identity arrows."""
    if n < 0:
        raise InvalidInput("coh.degree", "nerve degree must be nonnegative")
    if n == 0:
        return [g.identity_of[p] for p in g.objects]
    return _composable_tuples(g, n, skip_identities=False)


def normalized_nerve(g: FiniteGroupoid, n: int) -> list:
    """Composable n-tuples of non-identity arrows; objects for n = 0."""
    if n < 0:
        raise InvalidInput("coh.degree", "nerve degree must be nonnegative")
    if n == 0:
        return list(g.objects)
    return _composable_tuples(g, n, skip_identities=True)


# ---------------------------------------------------------------------------
# the cochain complex
# ---------------------------------------------------------------------------

class CochainComplex:
    """Normalized cochain complex of a groupoid in a module bundle.

    basis(n) lists the degree-n basis blocks (objects in degree 0,
    composable tuples of non-identity arrows above); each block carries
    the fiber at its source object, flattened into dim(n) integer
    coordinates with moduli(n) giving the modulus of each coordinate
    (0 for a free one).  differential(n) is the integer matrix of
    d: C^n -> C^{n+1}.
    """

    __slots__ = (
        "groupoid", "bundle", "max_degree",
        "_bases", "_offsets", "_dims", "_moduli", "_index", "_diffs",
    )

    def __init__(self, g: FiniteGroupoid, e: ModuleBundle, max_degree: int,
                 bound: int = DEFAULT_COCHAIN_BOUND):
        if e.groupoid is not g:
            raise InvalidInput("coh.bundle", "bundle lives on a different groupoid")
        if max_degree < 0:
            raise InvalidInput("coh.degree", "max_degree must be nonnegative")
        self.groupoid = g
        self.bundle = e
        self.max_degree = max_degree

        idents = frozenset(g.identity_of.values())
        fdim = {p: len(e.fibers[p]) for p in g.objects}

        counts = {p: {} for p in g.objects}
        for i in range(g.n_arrows):
            if i in idents:
                continue
            row = counts[g.src[i]]
            row[g.tgt[i]] = row.get(g.tgt[i], 0) + 1
        sizes = [sum(fdim[p] for p in g.objects)]
        per_start = {p: 1 for p in g.objects}
        for n in range(1, max_degree + 1):
            per_start = {
                p: sum(k * per_start[q] for q, k in counts[p].items())
                for p in g.objects
            }
            sizes.append(sum(fdim[p] * per_start[p] for p in g.objects))
        for n, size in enumerate(sizes):
            if size > bound:
                raise ResourceBound(
                    "coh.bound",
                    f"degree {n} needs {size} coordinates (bound {bound})",
                )

        self._bases = [list(g.objects)]
        for n in range(1, max_degree + 1):
            self._bases.append(_composable_tuples(g, n, skip_identities=True))
        self._offsets = []
        self._dims = []
        self._moduli = []
        self._index = []
        for n, basis in enumerate(self._bases):
            offs = [0]
            moduli: List[int] = []
            for elt in basis:
                p = elt if n == 0 else g.src[elt[0]]
                moduli.extend(e.fibers[p])
                offs.append(len(moduli))
            self._offsets.append(offs)
            self._dims.append(len(moduli))
            self._moduli.append(tuple(moduli))
            self._index.append({elt: k for k, elt in enumerate(basis)})

        self._diffs = [self._build_differential(n) for n in range(max_degree)]

    # -- bookkeeping --------------------------------------------------------

    def basis(self, n: int) -> list:
        self._need(n)
        return list(self._bases[n])

    def dim(self, n: int) -> int:
        self._need(n)
        return self._dims[n]

    def moduli(self, n: int) -> Tuple[int, ...]:
        self._need(n)
        return self._moduli[n]

    def differential(self, n: int) -> IntMatrix:
        if not 0 <= n < self.max_degree:
            raise InvalidInput(
                "coh.degree",
                f"differential {n} not built (degrees 0..{self.max_degree - 1})",
            )
        return self._diffs[n]

    def _need(self, n: int):
        if not 0 <= n <= self.max_degree:
            raise InvalidInput(
                "coh.degree", f"degree {n} outside 0..{self.max_degree}"
            )

    def coordinates_of(self, n: int, mapping: Dict) -> List[int]:
        """Flat coordinate vector of a cochain given per-block values."""
        self._need(n)
        vec = [0] * self._dims[n]
        offs = self._offsets[n]
        index = self._index[n]
        for key, val in mapping.items():
            pos = index.get(key)
            if pos is None:
                raise InvalidInput(
                    "coh.basis", f"not a degree-{n} basis element: {key!r}"
                )
            width = offs[pos + 1] - offs[pos]
            if isinstance(val, int):
                if width != 1:
                    raise InvalidInput(
                        "coh.basis", f"fiber at {key!r} has {width} coordinates"
                    )
                vec[offs[pos]] = val
            else:
                if len(val) != width:
                    raise InvalidInput(
                        "coh.basis", f"fiber at {key!r} has {width} coordinates"
                    )
                for r, x in enumerate(val):
                    vec[offs[pos] + r] = x
        return vec

    # -- differentials ------------------------------------------------------

    def _build_differential(self, n: int) -> IntMatrix:
        g = self.groupoid
        e = self.bundle
        idents = frozenset(g.identity_of.values())
        entries: Dict[Tuple[int, int], int] = {}

        def add_block_identity(roff, coff, width, sign):
            for r in range(width):
                entries[roff + r, coff + r] = entries.get((roff + r, coff + r), 0) + sign

        def add_block_action(roff, coff, arrow):
            mat = e.actions[arrow]
            for r, row in enumerate(mat):
                for c, v in enumerate(row):
                    if v:
                        entries[roff + r, coff + c] = entries.get((roff + r, coff + c), 0) + v

        rows_basis = self._bases[n + 1]
        row_offs = self._offsets[n + 1]
        col_index = self._index[n]
        col_offs = self._offsets[n]

        if n == 0:
            for k, t in enumerate(rows_basis):
                a = t[0]
                roff = row_offs[k]
                add_block_action(roff, col_offs[col_index[g.tgt[a]]], a)
                add_block_identity(
                    roff, col_offs[col_index[g.src[a]]],
                    len(e.fibers[g.src[a]]), -1,
                )
        else:
            for k, t in enumerate(rows_basis):
                roff = row_offs[k]
                width = len(e.fibers[g.src[t[0]]])
                add_block_action(roff, col_offs[col_index[t[1:]]], t[0])
                for i in range(1, n + 1):
                    merged = g.compose(t[i - 1], t[i])
                    if merged in idents:
                        continue
                    s = t[:i - 1] + (merged,) + t[i + 1:]
                    add_block_identity(
                        roff, col_offs[col_index[s]], width,
                        -1 if i % 2 else 1,
                    )
                add_block_identity(
                    roff, col_offs[col_index[t[:-1]]], width,
                    -1 if (n + 1) % 2 else 1,
                )
        trips = [(r, c, v) for (r, c), v in entries.items() if v]
        return IntMatrix.from_triplets(self._dims[n + 1], self._dims[n], trips)

    def check(self) -> None:
        """d . d vanishes fiberwise in every built degree."""
        for n in range(self.max_degree - 1):
            comp = self._diffs[n + 1] @ self._diffs[n]
            mod_top = self._moduli[n + 2]
            for (r, _c), v in comp._data.items():
                m = mod_top[r]
                if (v % m) if m else v:
                    raise InvariantViolation(
                        "coh.d2", f"differential does not square to zero at degree {n}"
                    )


def cochain_complex(g: FiniteGroupoid, e: ModuleBundle, max_degree: int,
                    bound: int = DEFAULT_COCHAIN_BOUND) -> CochainComplex:
    return CochainComplex(g, e, max_degree, bound)


# ---------------------------------------------------------------------------
# cohomology groups
# ---------------------------------------------------------------------------

def _check_coefficients(e: ModuleBundle, coeffs: Coefficients):
    if coeffs.is_modular:
        m_big = coeffs.modulus
        for p, fib in e.fibers.items():
            for m in fib:
                if m <= 0 or m_big % m:
                    raise InvalidInput(
                        "coh.torsion",
                        f"fiber at {p!r} is not {m_big}-torsion",
                    )
    else:
        for p, fib in e.fibers.items():
            if any(fib):
                raise InvalidInput(
                    "coh.coeffs",
                    f"integral coefficients need free fibers, got {fib} at {p!r}",
                )


def _presentation_from(cx: CochainComplex, n: int, coeffs: Coefficients) -> CohomologyPresentation:
    d_in = cx.differential(n - 1) if n >= 1 else IntMatrix.zero(cx.dim(0), 0)
    d_out = cx.differential(n)
    if not coeffs.is_modular:
        return presentation_at(d_in, d_out, coeffs)
    m_big = coeffs.modulus
    out_mod = cx.moduli(n + 1)
    if any(m != m_big for m in out_mod):
        d_out = IntMatrix.diagonal([m_big // m for m in out_mod]) @ d_out
    rel = [
        (i, k, m)
        for k, (i, m) in enumerate(
            (i, m) for i, m in enumerate(cx.moduli(n)) if m != m_big
        )
    ]
    extra = None
    if rel:
        extra = IntMatrix.from_triplets(cx.dim(n), len(rel), rel)
    return presentation_at(d_in, d_out, coeffs, extra_relations=extra)


def cohomology_presentation(
    g: FiniteGroupoid,
    e: ModuleBundle,
    n: int,
    coeffs: Coefficients,
    bound: int = DEFAULT_COCHAIN_BOUND,
) -> Tuple[CohomologyPresentation, CochainComplex]:
    """Presentation of H^n(g, e) plus the complex it was read from."""
    if n < 0:
        raise InvalidInput("coh.degree", "cohomological degree must be nonnegative")
    _check_coefficients(e, coeffs)
    cx = cochain_complex(g, e, n + 1, bound)
    return _presentation_from(cx, n, coeffs), cx


def groupoid_cohomology(
    g: FiniteGroupoid,
    e: ModuleBundle,
    n: int,
    coeffs: Coefficients,
    bound: int = DEFAULT_COCHAIN_BOUND,
) -> FinAbGroup:
    """H^n(g, e) over the integers or Z/M."""
    return cohomology_presentation(g, e, n, coeffs, bound)[0].group


# ---------------------------------------------------------------------------
# vertex reduction
# ---------------------------------------------------------------------------

def _vertex_data(g: FiniteGroupoid, e: ModuleBundle, p):
    """One-object groupoid of loops at p with the restricted bundle."""
    loops = list(g.hom(p, p))
    arrows = [(p, p, g.payload[i]) for i in loops]
    vg = FiniteGroupoid(
        [p], arrows, g._compose_payload,
        lambda q, _pay=g.payload[g.identity_of[p]]: _pay,
        meta={"kind": "vertex", "point": p},
    )
    ve = ModuleBundle(
        vg, {p: e.fibers[p]},
        {j: e.actions[loops[j]] for j in range(len(loops))},
    )
    return vg, ve, loops


def vertex_reduction(
    g: FiniteGroupoid,
    e: ModuleBundle,
    n: int,
    coeffs: Coefficients,
    compare: bool = True,
    bound: int = DEFAULT_COCHAIN_BOUND,
) -> Tuple[FinAbGroup, dict]:
    """H^n(g, e) as the direct sum over one vertex group per component.

    The certificate lists the component data and, when compare is set,
    the full groupoid computation it was checked against.
    """
    if n < 0:
        raise InvalidInput("coh.degree", "cohomological degree must be nonnegative")
    _check_coefficients(e, coeffs)
    rank = 0
    torsion: List[int] = []
    comps = []
    for comp in connected_components(g):
        p = min(comp)
        vg, ve, loops = _vertex_data(g, e, p)
        pres, _cx = cohomology_presentation(vg, ve, n, coeffs, bound)
        rank += pres.group.free_rank
        torsion.extend(pres.group.invariant_factors)
        comps.append({
            "objects": list(comp),
            "representative": p,
            "vertex_group_order": len(loops),
            "cohomology": pres.group.to_json(),
        })
    result = FinAbGroup(rank, torsion)
    full = None
    agrees: Optional[bool] = None
    if compare:
        full = groupoid_cohomology(g, e, n, coeffs, bound)
        agrees = full == result
        if not agrees:
            raise InvariantViolation(
                "coh.vertex",
                f"vertex reduction {result} disagrees with the full complex {full}",
            )
    certificate = {
        "degree": n,
        "components": comps,
        "compared": bool(compare),
        "agrees": agrees,
        "full": full.to_json() if full is not None else None,
    }
    return result, certificate


# ---------------------------------------------------------------------------
# restriction along a wide subgroupoid
# ---------------------------------------------------------------------------

def _subgroupoid_arrow_map(g: FiniteGroupoid, h: FiniteGroupoid) -> List[int]:
    if tuple(h.objects) != tuple(g.objects):
        raise InvalidInput("coh.sub", "subgroupoid must keep every object")
    amap = []
    for j in range(h.n_arrows):
        key = (h.src[j], h.tgt[j], h.payload[j])
        i = g.arrow_index.get(key)
        if i is None:
            raise InvalidInput("coh.sub", f"arrow {key!r} is not in the ambient groupoid")
        amap.append(i)
    by_src: Dict = {}
    for j in range(h.n_arrows):
        by_src.setdefault(h.src[j], []).append(j)
    for j in range(h.n_arrows):
        for k in by_src.get(h.tgt[j], ()):
            if amap[h.compose(j, k)] != g.compose(amap[j], amap[k]):
                raise InvalidInput(
                    "coh.sub", "composition in the candidate disagrees with the ambient groupoid"
                )
    return amap


def _restrict_matrix(cx_small: CochainComplex, cx_big: CochainComplex,
                     amap: Sequence[int], n: int) -> IntMatrix:
    """Matrix of cochain restriction C^n(big) -> C^n(small)."""
    trips = []
    offs_s = cx_small._offsets[n]
    offs_b = cx_big._offsets[n]
    index_b = cx_big._index[n]
    for pos, elt in enumerate(cx_small.basis(n)):
        big_elt = elt if n == 0 else tuple(amap[a] for a in elt)
        bpos = index_b[big_elt]
        width = offs_s[pos + 1] - offs_s[pos]
        for r in range(width):
            trips.append((offs_s[pos] + r, offs_b[bpos] + r, 1))
    return IntMatrix.from_triplets(cx_small.dim(n), cx_big.dim(n), trips)


def _vertex_side(g, e, p, n, coeffs, bound, pres, cx):
    """Vertex-group presentation at p, reusing the ambient one when the
    groupoid already is its own vertex group."""
    loops = list(g.hom(p, p))
    if len(g.objects) == 1 and loops == list(range(g.n_arrows)):
        return pres, cx, loops
    vg, ve, loops = _vertex_data(g, e, p)
    pres_v, cx_v = cohomology_presentation(vg, ve, n, coeffs, bound)
    return pres_v, cx_v, loops


def restriction(
    g: FiniteGroupoid,
    h_wide: FiniteGroupoid,
    e: ModuleBundle,
    n: int,
    coeffs: Coefficients,
    bound: int = DEFAULT_COCHAIN_BOUND,
) -> dict:
    """H^n(g, e) -> H^n(h_wide, e) induced by a wide subgroupoid.

    Returns domain and codomain groups, the generator images in the
    codomain's invariant-factor coordinates, and a certificate that the
    map commutes with reduction to the vertex groups at a shared base.
    """
    amap = _subgroupoid_arrow_map(g, h_wide)
    if len(connected_components(g)) != 1 or len(connected_components(h_wide)) != 1:
        raise InvalidInput("coh.connected", "restriction expects connected groupoids")
    _check_coefficients(e, coeffs)
    e_h = ModuleBundle(
        h_wide,
        {p: e.fibers[p] for p in h_wide.objects},
        {j: e.actions[amap[j]] for j in range(h_wide.n_arrows)},
    )
    pres_g, cx_g = cohomology_presentation(g, e, n, coeffs, bound)
    pres_h, cx_h = cohomology_presentation(h_wide, e_h, n, coeffs, bound)
    rmat = _restrict_matrix(cx_h, cx_g, amap, n)

    ngen = len(pres_g.group.invariant_factors) + pres_g.group.free_rank
    reps = []
    images = []
    for i in range(ngen):
        unit = [0] * ngen
        unit[i] = 1
        rep = pres_g.rep_of(unit)
        reps.append(rep)
        images.append(pres_h.class_of(rmat.apply(rep)))

    base = g.objects[0]
    pres_vg, cx_vg, loops_g = _vertex_side(g, e, base, n, coeffs, bound, pres_g, cx_g)
    pres_vh, cx_vh, loops_h = _vertex_side(h_wide, e_h, base, n, coeffs, bound, pres_h, cx_h)
    pos_in_vg = {gi: j for j, gi in enumerate(loops_g)}
    vincl = [pos_in_vg[amap[loops_h[j]]] for j in range(len(loops_h))]
    r_g_vertex = _restrict_matrix(cx_vg, cx_g, loops_g, n)
    r_h_vertex = _restrict_matrix(cx_vh, cx_h, loops_h, n)
    r_vv = _restrict_matrix(cx_vh, cx_vg, vincl, n)
    for i in range(ngen):
        rep_h = pres_h.rep_of(images[i])
        via_h = pres_vh.class_of(r_h_vertex.apply(rep_h))
        cls_vg = pres_vg.class_of(r_g_vertex.apply(reps[i]))
        rep_vg = pres_vg.rep_of(cls_vg)
        via_vertex = pres_vh.class_of(r_vv.apply(rep_vg))
        if via_h != via_vertex:
            raise InvariantViolation(
                "coh.restrict",
                f"restriction does not commute with vertex reduction on generator {i}",
            )
    return {
        "domain": pres_g.group,
        "codomain": pres_h.group,
        "matrix": images,
        "vertex_square": {
            "base": base,
            "generators_checked": ngen,
            "commutes": True,
        },
    }


# ---------------------------------------------------------------------------
# 2-cocycles and emulated multiplicative coefficients
# ---------------------------------------------------------------------------

def validate_2cocycle(g: FiniteGroupoid, sigma: Dict, modulus: int = 0) -> bool:
    """Check sigma(a, bc) + sigma(b, c) = sigma(ab, c) + sigma(a, b) on
    all composable triples; sigma must cover every composable pair."""
    if modulus < 0:
        raise InvalidInput("coh.cocycle", "modulus must be nonnegative")
    by_src: Dict = {}
    for i in range(g.n_arrows):
        by_src.setdefault(g.src[i], []).append(i)
    for i in range(g.n_arrows):
        for j in by_src.get(g.tgt[i], ()):
            if (i, j) not in sigma:
                raise InvalidInput(
                    "coh.cocycle", f"sigma undefined on the composable pair ({i}, {j})"
                )
    for a in range(g.n_arrows):
        for b in by_src.get(g.tgt[a], ()):
            ab = g.compose(a, b)
            for c in by_src.get(g.tgt[b], ()):
                diff = (
                    sigma[(a, g.compose(b, c))] + sigma[(b, c)]
                    - sigma[(ab, c)] - sigma[(a, b)]
                )
                if modulus:
                    diff %= modulus
                if diff:
                    return False
    return True


def kx_cohomology(
    g: FiniteGroupoid,
    n: int,
    modulus: int,
    stability_factor: Optional[int] = None,
    integral_check: bool = False,
    bound: int = DEFAULT_COCHAIN_BOUND,
) -> KxCohomology:
    """H^n of g with coefficients in the units of an algebraically closed
    field of characteristic zero, emulated at the given modulus over the
    trivial rank-one bundle."""
    if n < 0:
        raise InvalidInput("coh.degree", "cohomological degree must be nonnegative")
    e = trivial_bundle(g, (0,))
    top = n + 2 if integral_check else n + 1
    cx = cochain_complex(g, e, top, bound)
    d_in = cx.differential(n - 1) if n >= 1 else IntMatrix.zero(cx.dim(0), 0)
    d_out = cx.differential(n)
    d_next = cx.differential(n + 1) if integral_check else None
    return kx_emulated_at(
        d_in, d_out, modulus,
        stability_factor=stability_factor, d_next=d_next,
    )
