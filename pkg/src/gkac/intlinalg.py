"""Exact integer linear algebra: sparse matrices, Smith normal form,
finitely generated abelian groups, and cohomology of integer cochain
complexes (integral, mod M, and multiplicatively emulated).

All arithmetic is exact.  The Smith normal form runs on a compiled
kernel when the extension is built, with a pure-Python sparse
elimination as fallback; fixed-width overflow in the kernel is detected
and escalated to the exact path, never wrapped.
"""

from __future__ import annotations

from math import gcd
from typing import Iterable, Optional, Sequence

__all__ = [
    "InvalidInput",
    "InvariantViolation",
    "ResourceBound",
    "IntMatrix",
    "SNFResult",
    "smith_normal_form",
    "available_backends",
    "FinAbGroup",
    "Coefficients",
    "cohomology_at",
    "presentation_at",
    "CohomologyPresentation",
    "kx_emulated_at",
    "KxCohomology",
    "subgroup_order",
]


class InvalidInput(ValueError):
    """Caller-supplied data violates a precondition (exit code 2)."""

    def __init__(self, law: str, message: str):
        super().__init__(f"[{law}] {message}")
        self.law = law


class InvariantViolation(RuntimeError):
    """A mathematical law that must hold was found broken (exit code 1)."""

    def __init__(self, law: str, message: str):
        super().__init__(f"[{law}] {message}")
        self.law = law


class ResourceBound(RuntimeError):
    """A computation exceeded a configured size bound (exit code 3)."""

    def __init__(self, law: str, message: str):
        super().__init__(f"[{law}] {message}")
        self.law = law


# ---------------------------------------------------------------------------
# sparse integer matrices
# ---------------------------------------------------------------------------

class IntMatrix:
    """Immutable-by-convention sparse integer matrix.

    Entries are stored as a dict mapping (row, col) to a nonzero int.

    >>> m = IntMatrix.from_dense([[1, 0], [0, 2]])
    >>> m.nnz
    2
    >>> (m @ m).to_dense()
    [[1, 0], [0, 4]]
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Optional[dict] = None):
        if rows < 0 or cols < 0:
            raise InvalidInput("mat.shape", f"negative dimensions {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self._data = {} if data is None else data

    @classmethod
    def from_triplets(cls, rows: int, cols: int, triplets: Iterable) -> "IntMatrix":
        data = {}
        for r, c, v in triplets:
            if not (0 <= r < rows and 0 <= c < cols):
                raise InvalidInput(
                    "mat.bounds", f"triplet ({r},{c}) outside {rows}x{cols}"
                )
            if (r, c) in data:
                raise InvalidInput("mat.dup", f"duplicate triplet at ({r},{c})")
            if v:
                data[r, c] = v
            else:
                data[r, c] = 0  # mark for duplicate detection, dropped below
        return cls(rows, cols, {k: v for k, v in data.items() if v})

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]]) -> "IntMatrix":
        rows = len(dense)
        cols = len(dense[0]) if rows else 0
        data = {}
        for i, row in enumerate(dense):
            if len(row) != cols:
                raise InvalidInput("mat.ragged", "ragged dense input")
            for j, v in enumerate(row):
                if v:
                    data[i, j] = v
        return cls(rows, cols, data)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntMatrix":
        data = {}
        for j, col in enumerate(columns):
            if len(col) != rows:
                raise InvalidInput("mat.shape", "column of wrong length")
            for i, v in enumerate(col):
                if v:
                    data[i, j] = v
        return cls(rows, len(columns), data)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def zero(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols)

    @classmethod
    def diagonal(cls, values: Sequence[int]) -> "IntMatrix":
        n = len(values)
        return cls(n, n, {(i, i): v for i, v in enumerate(values) if v})

    @classmethod
    def hstack(cls, a: "IntMatrix", b: "IntMatrix") -> "IntMatrix":
        if a.rows != b.rows:
            raise InvalidInput("mat.shape", "hstack with mismatched row counts")
        data = dict(a._data)
        for (r, c), v in b._data.items():
            data[r, c + a.cols] = v
        return cls(a.rows, a.cols + b.cols, data)

    @classmethod
    def vstack(cls, a: "IntMatrix", b: "IntMatrix") -> "IntMatrix":
        if a.cols != b.cols:
            raise InvalidInput("mat.shape", "vstack with mismatched column counts")
        data = dict(a._data)
        for (r, c), v in b._data.items():
            data[r + a.rows, c] = v
        return cls(a.rows + b.rows, a.cols, data)

    @property
    def nnz(self) -> int:
        return len(self._data)

    def entry(self, r: int, c: int) -> int:
        return self._data.get((r, c), 0)

    def triplets(self) -> list:
        return sorted((r, c, v) for (r, c), v in self._data.items())

    def export_lines(self) -> list:
        return [f"{r} {c} {v}" for r, c, v in self.triplets()]

    def to_dense(self) -> list:
        out = [[0] * self.cols for _ in range(self.rows)]
        for (r, c), v in self._data.items():
            out[r][c] = v
        return out

    def is_zero(self) -> bool:
        return not self._data

    def mod(self, m: int) -> "IntMatrix":
        data = {}
        for k, v in self._data.items():
            w = v % m
            if w:
                data[k] = w
        return IntMatrix(self.rows, self.cols, data)

    def scaled(self, s: int) -> "IntMatrix":
        if s == 0:
            return IntMatrix(self.rows, self.cols)
        return IntMatrix(
            self.rows, self.cols, {k: s * v for k, v in self._data.items()}
        )

    def column(self, j: int) -> list:
        out = [0] * self.rows
        for (r, c), v in self._data.items():
            if c == j:
                out[r] = v
        return out

    def column_slice(self, j0: int, j1: int) -> "IntMatrix":
        data = {}
        for (r, c), v in self._data.items():
            if j0 <= c < j1:
                data[r, c - j0] = v
        return IntMatrix(self.rows, j1 - j0, data)

    def apply(self, vec: Sequence[int]) -> list:
        """Matrix-vector product."""
        if len(vec) != self.cols:
            raise InvalidInput("mat.shape", "vector length does not match columns")
        out = [0] * self.rows
        for (r, c), v in self._data.items():
            x = vec[c]
            if x:
                out[r] += v * x
        return out

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise InvalidInput("mat.shape", "sum of mismatched shapes")
        data = dict(self._data)
        for k, v in other._data.items():
            w = data.get(k, 0) + v
            if w:
                data[k] = w
            else:
                data.pop(k, None)
        return IntMatrix(self.rows, self.cols, data)

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + other.scaled(-1)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise InvalidInput(
                "mat.shape",
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}",
            )
        by_row = {}
        for (r, c), v in other._data.items():
            by_row.setdefault(r, []).append((c, v))
        acc = {}
        for (r, c), v in self._data.items():
            for c2, v2 in by_row.get(c, ()):
                k = (r, c2)
                acc[k] = acc.get(k, 0) + v * v2
        return IntMatrix(
            self.rows, other.cols, {k: v for k, v in acc.items() if v}
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self._data == other._data
        )

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self._data.items())))

    def __repr__(self) -> str:
        return f"IntMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

try:  # compiled kernel is optional
    from gkac import _snfcore as _kernel
except ImportError:  # pragma: no cover - depends on build environment
    _kernel = None

_INT64_GUARD = 1 << 62
_DENSE_CELL_LIMIT = 60_000_000


def available_backends() -> tuple:
    """Names of the SNF backends usable on this install."""
    if _kernel is not None:
        return ("cython", "pure")
    return ("pure",)


class SNFResult:
    """Diagonalization U @ m @ V == S with unimodular U, V.

    With a modulus the equations hold modulo it instead, all transform
    entries are reduced, and the diagonal entries are divisors of the
    modulus (a zero integral pivot is reported as the modulus itself).
    """

    __slots__ = (
        "rows", "cols", "diagonal", "U", "Uinv", "V", "Vinv",
        "modulus", "backend", "escalated",
    )

    def __init__(self, rows, cols, diagonal, U, Uinv, V, Vinv, modulus,
                 backend, escalated):
        self.rows = rows
        self.cols = cols
        self.diagonal = diagonal
        self.U = U
        self.Uinv = Uinv
        self.V = V
        self.Vinv = Vinv
        self.modulus = modulus
        self.backend = backend
        self.escalated = escalated

    @property
    def S(self) -> IntMatrix:
        return IntMatrix(
            self.rows,
            self.cols,
            {(i, i): d for i, d in enumerate(self.diagonal) if d},
        )

    @property
    def invariant_factors(self) -> list:
        return [d for d in self.diagonal if d]

    @property
    def rank(self) -> int:
        if self.modulus is not None:
            raise InvalidInput(
                "snf.rank", "integral rank undefined for a modular reduction"
            )
        return len(self.invariant_factors)


def _dense_from_matrix(m: IntMatrix) -> list:
    flat = [0] * (m.rows * m.cols)
    cols = m.cols
    for (r, c), v in m._data.items():
        flat[r * cols + c] = v
    return flat


def _snf_pure(m: IntMatrix, want_u: bool, want_v: bool, modulus):
    """Sparse exact elimination.  Returns (diagonal, U, Uinv, V, Vinv)."""
    nrows, ncols = m.rows, m.cols
    mat = {}
    colrows = {}
    for (r, c), v in m._data.items():
        if modulus is not None:
            v = _balance(v, modulus)
            if not v:
                continue
        mat.setdefault(r, {})[c] = v
        colrows.setdefault(c, set()).add(r)

    U = [[1 if i == j else 0 for j in range(nrows)] for i in range(nrows)] if want_u else None
    Uinv = [[1 if i == j else 0 for j in range(nrows)] for i in range(nrows)] if want_u else None
    V = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)] if want_v else None
    Vinv = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)] if want_v else None

    def reduce_row_entries(i):
        row = mat.get(i)
        if row is None:
            return
        dead = []
        for c in row:
            row[c] = _balance(row[c], modulus)
            if not row[c]:
                dead.append(c)
        for c in dead:
            del row[c]
            colrows[c].discard(i)
        if not row:
            del mat[i]

    def row_axpy(i, k, q):
        # row_i -= q * row_k
        if not q:
            return
        ri = mat.setdefault(i, {})
        for c, v in mat.get(k, {}).items():
            w = ri.get(c, 0) - q * v
            if modulus is not None:
                w = _balance(w, modulus)
            if w:
                ri[c] = w
                colrows.setdefault(c, set()).add(i)
            else:
                ri.pop(c, None)
                colrows.get(c, set()).discard(i)
        if not ri:
            mat.pop(i, None)
        if U is not None:
            urow_i, urow_k = U[i], U[k]
            for j in range(nrows):
                if urow_k[j]:
                    urow_i[j] -= q * urow_k[j]
                    if modulus is not None:
                        urow_i[j] = _balance(urow_i[j], modulus)
            for r in range(nrows):
                if Uinv[r][i]:
                    Uinv[r][k] += q * Uinv[r][i]
                    if modulus is not None:
                        Uinv[r][k] = _balance(Uinv[r][k], modulus)

    def col_axpy(j, l, q):
        # col_j -= q * col_l
        if not q:
            return
        for r in list(colrows.get(l, ())):
            v = mat[r][l]
            w = mat[r].get(j, 0) - q * v
            if modulus is not None:
                w = _balance(w, modulus)
            if w:
                mat[r][j] = w
                colrows.setdefault(j, set()).add(r)
            else:
                mat[r].pop(j, None)
                colrows.get(j, set()).discard(r)
                if not mat[r]:
                    del mat[r]
        if V is not None:
            for r in range(ncols):
                if V[r][l]:
                    V[r][j] -= q * V[r][l]
                    if modulus is not None:
                        V[r][j] = _balance(V[r][j], modulus)
            vrow_l, vrow_j = Vinv[l], Vinv[j]
            for cc in range(ncols):
                if vrow_j[cc]:
                    vrow_l[cc] += q * vrow_j[cc]
                    if modulus is not None:
                        vrow_l[cc] = _balance(vrow_l[cc], modulus)

    def swap_rows(i, k):
        if i == k:
            return
        ri, rk = mat.get(i, {}), mat.get(k, {})
        for c in set(ri) | set(rk):
            s = colrows[c]
            has_i, has_k = c in ri, c in rk
            if has_i and not has_k:
                s.discard(i)
                s.add(k)
            elif has_k and not has_i:
                s.discard(k)
                s.add(i)
        if ri:
            mat[k] = ri
        else:
            mat.pop(k, None)
        if rk:
            mat[i] = rk
        else:
            mat.pop(i, None)
        if U is not None:
            U[i], U[k] = U[k], U[i]
            for r in range(nrows):
                Uinv[r][i], Uinv[r][k] = Uinv[r][k], Uinv[r][i]

    def swap_cols(j, l):
        if j == l:
            return
        for r in colrows.get(j, set()) | colrows.get(l, set()):
            row = mat[r]
            vj, vl = row.get(j), row.get(l)
            if vj is None:
                del row[l]
            else:
                row[l] = vj
            if vl is None:
                del row[j]
            else:
                row[j] = vl
        colrows[j], colrows[l] = colrows.get(l, set()), colrows.get(j, set())
        if V is not None:
            for r in range(ncols):
                V[r][j], V[r][l] = V[r][l], V[r][j]
            Vinv[j], Vinv[l] = Vinv[l], Vinv[j]

    def negate_row(i):
        for c in mat.get(i, {}):
            mat[i][c] = -mat[i][c]
        if U is not None:
            U[i] = [-x for x in U[i]]
            for r in range(nrows):
                Uinv[r][i] = -Uinv[r][i]

    n = min(nrows, ncols)
    t = 0
    while t < n:
        # pivot: smallest |value| in the active submatrix
        best = None
        for r, row in mat.items():
            if r < t:
                continue
            for c, v in row.items():
                if c < t:
                    continue
                a = abs(v)
                if best is None or a < best[0]:
                    best = (a, r, c)
                    if a == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])

        while True:
            while True:
                # Clear column t below the pivot, one row at a time.  Balanced
                # quotients keep remainders at most half the pivot, so entry
                # growth stays polynomial instead of compounding across passes.
                pending = [r for r in colrows.get(t, ()) if r > t]
                while pending:
                    for r in pending:
                        while t in mat.get(r, {}):
                            q = _bq(mat[r][t], mat[t][t])
                            if q:
                                row_axpy(r, t, q)
                            if mat.get(r, {}).get(t):
                                swap_rows(t, r)
                    pending = [r for r in colrows.get(t, ()) if r > t]
                # Column t is clear below the pivot, so clearing row t touches
                # only row t itself -- unless a swap pulls a dirty column in.
                col_dirty = False
                for c in list(mat.get(t, {})):
                    if c <= t:
                        continue
                    while c in mat.get(t, {}):
                        q = _bq(mat[t][c], mat[t][t])
                        if q:
                            col_axpy(c, t, q)
                        if mat.get(t, {}).get(c):
                            swap_cols(t, c)
                            col_dirty = True
                if not col_dirty:
                    break
            if modulus is not None:
                p = mat[t][t]
                g = gcd(p, modulus)
                if g != abs(p):
                    mat[t][t] = g  # row op against the implicit modulus row
            if mat[t][t] < 0:
                negate_row(t)
            p = mat[t][t]
            bad = None
            if p != 1:
                for r, row in mat.items():
                    if r <= t:
                        continue
                    for c, v in row.items():
                        if c > t and v % p:
                            bad = r
                            break
                    if bad is not None:
                        break
            if bad is None:
                break
            row_axpy(t, bad, -1)
        t += 1

    diagonal = []
    for i in range(n):
        d = abs(mat.get(i, {}).get(i, 0))
        if modulus is not None:
            d = gcd(d, modulus) if d else modulus
        diagonal.append(d)
    return diagonal, U, Uinv, V, Vinv


def _balance(v: int, modulus) -> int:
    if modulus is None:
        return v
    v %= modulus
    if 2 * v > modulus:
        v -= modulus
    return v


def _bq(v: int, p: int) -> int:
    """Quotient q minimizing |v - q*p| (ties keep the floor quotient)."""
    q, r = divmod(v, p)
    if 2 * abs(r) > abs(p):
        q += 1
    return q


def _lists_to_matrix(lists, n) -> Optional[IntMatrix]:
    if lists is None:
        return None
    data = {}
    for i, row in enumerate(lists):
        for j, v in enumerate(row):
            if v:
                data[i, j] = v
    return IntMatrix(n, n, data)


_PREPASS_MIN_CELLS = 200_000
_PREPASS_COST_CAP = 512


def _snf_sparse_prepass(m: IntMatrix, want_v: bool, modulus) -> Optional[SNFResult]:
    """Unit-pivot compression for large sparse matrices.

    Repeatedly eliminates at entries that are units (cheapest Markowitz
    pivots first), tracking only the column transforms, then
    diagonalizes the remaining core with the regular backends.  Each
    unit pivot contributes an invariant factor 1, so the composed
    result is a valid Smith form.  Pivots whose elimination would touch
    too many entries are skipped, and the pass stops early if fill-in
    grows past a budget, so worst-case inputs fall back to the dense
    code after a bounded amount of work.  Returns None when no cheap
    unit entry exists.
    """
    import heapq

    rows_: dict = {}
    colrows: dict = {}
    for (r, c), v in m._data.items():
        v = _balance(v, modulus)
        if not v:
            continue
        rows_.setdefault(r, {})[c] = v
        colrows.setdefault(c, set()).add(r)

    nnz = sum(len(row) for row in rows_.values())
    fill_budget = 3 * nnz + 65_536

    if modulus is None:
        def is_unit(v):
            return v == 1 or v == -1
    else:
        def is_unit(v):
            return gcd(v, modulus) == 1

    heap = []
    for r, row in rows_.items():
        rl = len(row) - 1
        for c, v in row.items():
            if is_unit(v):
                heap.append((rl * (len(colrows[c]) - 1), r, c))
    if not heap:
        return None
    heapq.heapify(heap)

    ncols = m.cols
    V = {c: {c: 1} for c in range(ncols)} if want_v else None
    Vinv = {c: {c: 1} for c in range(ncols)} if want_v else None
    dead_rows: set = set()
    dead_cols: set = set()
    pivots = []
    parked = []
    progressed = True
    overflow = False

    while not overflow and nnz <= fill_budget:
        if not heap:
            if not parked or not progressed:
                break
            progressed = False
            refreshed = []
            for r, c in parked:
                if r in dead_rows or c in dead_cols:
                    continue
                u = rows_.get(r, {}).get(c)
                if u is None or not is_unit(u):
                    continue
                refreshed.append(
                    ((len(rows_[r]) - 1) * (len(colrows[c]) - 1), r, c)
                )
            parked = []
            if not refreshed:
                break
            heap = refreshed
            heapq.heapify(heap)
            if heap[0][0] > _PREPASS_COST_CAP:
                break
            continue
        cost, r, c = heapq.heappop(heap)
        if r in dead_rows or c in dead_cols:
            continue
        u = rows_.get(r, {}).get(c)
        if u is None or not is_unit(u):
            continue
        actual = (len(rows_[r]) - 1) * (len(colrows[c]) - 1)
        if actual > _PREPASS_COST_CAP:
            parked.append((r, c))
            continue
        if actual > cost and heap and actual > heap[0][0]:
            heapq.heappush(heap, (actual, r, c))
            continue

        uinv = u if modulus is None else pow(u % modulus, -1, modulus)
        col_c_rows = [i for i in colrows[c] if i != r]
        for j, a in list(rows_[r].items()):
            if j == c:
                continue
            f = _balance(a * uinv, modulus)
            if f:
                cj = colrows.setdefault(j, set())
                for i in col_c_rows:
                    row_i = rows_[i]
                    w = _balance(row_i.get(j, 0) - f * row_i[c], modulus)
                    if w:
                        if j not in row_i:
                            cj.add(i)
                            nnz += 1
                        row_i[j] = w
                        if w >= _INT64_GUARD or -w >= _INT64_GUARD:
                            overflow = True
                        if is_unit(w):
                            heapq.heappush(
                                heap,
                                ((len(row_i) - 1) * (len(cj) - 1), i, j),
                            )
                    elif j in row_i:
                        del row_i[j]
                        cj.discard(i)
                        nnz -= 1
                if want_v:
                    vj = V[j]
                    for rr, x in V[c].items():
                        y = _balance(vj.get(rr, 0) - f * x, modulus)
                        if y:
                            vj[rr] = y
                        elif rr in vj:
                            del vj[rr]
                    wc = Vinv[c]
                    for cc, x in Vinv[j].items():
                        y = _balance(wc.get(cc, 0) + f * x, modulus)
                        if y:
                            wc[cc] = y
                        elif cc in wc:
                            del wc[cc]
            colrows[j].discard(r)
        nnz -= len(rows_[r])
        for i in col_c_rows:
            if rows_[i].pop(c, None) is not None:
                nnz -= 1
        del rows_[r]
        colrows.pop(c, None)
        dead_rows.add(r)
        dead_cols.add(c)
        pivots.append((r, c, u))
        progressed = True

    if not pivots:
        return None

    if want_v:
        for _r, c, u in pivots:
            if modulus is None:
                if u == -1:
                    V[c] = {k: -x for k, x in V[c].items()}
                    Vinv[c] = {k: -x for k, x in Vinv[c].items()}
            else:
                uinv = pow(u % modulus, -1, modulus)
                if uinv != 1:
                    V[c] = {k: _balance(x * uinv, modulus) for k, x in V[c].items()}
                    Vinv[c] = {k: _balance(x * u, modulus) for k, x in Vinv[c].items()}

    live_rows = sorted(r for r, row in rows_.items() if row)
    kept_cols = [c for c in range(ncols) if c not in dead_cols]
    row_pos = {r: k for k, r in enumerate(live_rows)}
    col_pos = {c: k for k, c in enumerate(kept_cols)}
    core_data = {}
    for r in live_rows:
        for c, v in rows_[r].items():
            core_data[row_pos[r], col_pos[c]] = v
    core = IntMatrix(len(live_rows), len(kept_cols), core_data)
    sub = _snf_run_backends(core, False, want_v, modulus, None)

    diag = [1] * len(pivots) + list(sub.diagonal)
    v_mat = vinv_mat = None
    if want_v:
        t = len(pivots)
        v_data = {}
        vinv_data = {}
        for k, (_r, c, _u) in enumerate(pivots):
            for rr, x in V[c].items():
                v_data[rr, k] = x
            for cc, x in Vinv[c].items():
                vinv_data[k, cc] = x
        sub_v_bycol: dict = {}
        for (i, j), x in sub.V._data.items():
            sub_v_bycol.setdefault(j, []).append((i, x))
        for j, terms in sub_v_bycol.items():
            acc: dict = {}
            for i, x in terms:
                for rr, y in V[kept_cols[i]].items():
                    w = _balance(acc.get(rr, 0) + x * y, modulus)
                    if w:
                        acc[rr] = w
                    elif rr in acc:
                        del acc[rr]
            for rr, w in acc.items():
                v_data[rr, t + j] = w
        sub_vinv_byrow: dict = {}
        for (j, i), x in sub.Vinv._data.items():
            sub_vinv_byrow.setdefault(j, []).append((i, x))
        for j, terms in sub_vinv_byrow.items():
            acc = {}
            for i, x in terms:
                for cc, y in Vinv[kept_cols[i]].items():
                    w = _balance(acc.get(cc, 0) + x * y, modulus)
                    if w:
                        acc[cc] = w
                    elif cc in acc:
                        del acc[cc]
            for cc, w in acc.items():
                vinv_data[t + j, cc] = w
        v_mat = IntMatrix(ncols, ncols, v_data)
        vinv_mat = IntMatrix(ncols, ncols, vinv_data)

    return SNFResult(
        m.rows, m.cols, diag, None, None, v_mat, vinv_mat,
        modulus, "sparse+" + sub.backend, sub.escalated,
    )


def smith_normal_form(
    m: IntMatrix,
    transforms: str = "both",
    modulus: Optional[int] = None,
    backend: Optional[str] = None,
) -> SNFResult:
    """Smith normal form of an integer matrix.

    transforms: "both" tracks U and V (with inverses), "cols" only V,
    "none" only the diagonal.  With a modulus, all equations hold mod M
    and diagonal entries are divisors of M (see SNFResult).

    >>> res = smith_normal_form(IntMatrix.from_dense([[2, 4], [6, 8]]))
    >>> res.diagonal
    [2, 4]
    """
    if transforms not in ("both", "cols", "none"):
        raise InvalidInput("snf.transforms", f"unknown transforms mode {transforms!r}")
    if modulus is not None and modulus < 2:
        raise InvalidInput("snf.modulus", "modulus must be at least 2")
    if backend is not None and backend not in available_backends():
        raise InvalidInput("snf.backend", f"backend {backend!r} not available")
    want_u = transforms == "both"
    want_v = transforms in ("both", "cols")

    if backend is None and not want_u and m.rows * m.cols > _PREPASS_MIN_CELLS:
        pre = _snf_sparse_prepass(m, want_v, modulus)
        if pre is not None:
            return pre

    return _snf_run_backends(m, want_u, want_v, modulus, backend)


def _snf_run_backends(
    m: IntMatrix,
    want_u: bool,
    want_v: bool,
    modulus: Optional[int],
    backend: Optional[str],
) -> SNFResult:
    chosen = backend or ("cython" if _kernel is not None else "pure")
    if chosen == "cython":
        cells = m.rows * m.cols
        if want_u:
            cells += 2 * m.rows * m.rows
        if want_v:
            cells += 2 * m.cols * m.cols
        if cells > _DENSE_CELL_LIMIT:
            chosen = "pure"
        elif any(abs(v) >= _INT64_GUARD for v in m._data.values()):
            chosen = "pure"

    escalated = False
    if chosen == "cython":
        try:
            diag, U, Uinv, V, Vinv = _kernel.snf_dense(
                _dense_from_matrix(m),
                m.rows,
                m.cols,
                1 if want_u else 0,
                1 if want_v else 0,
                0 if modulus is None else modulus,
            )
        except OverflowError:
            chosen = "pure"
            escalated = True
    if chosen == "pure":
        diag, U, Uinv, V, Vinv = _snf_pure(m, want_u, want_v, modulus)

    return SNFResult(
        m.rows,
        m.cols,
        list(diag),
        _lists_to_matrix(U, m.rows),
        _lists_to_matrix(Uinv, m.rows),
        _lists_to_matrix(V, m.cols),
        _lists_to_matrix(Vinv, m.cols),
        modulus,
        chosen,
        escalated,
    )


# ---------------------------------------------------------------------------
# finitely generated abelian groups
# ---------------------------------------------------------------------------

def _prime_factorization(n: int) -> list:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _canonical_chain(factors: Iterable[int]) -> tuple:
    per_prime = {}
    for f in factors:
        if f < 1:
            raise InvalidInput("finab.factor", f"torsion factor {f} is not positive")
        for p, e in _prime_factorization(f):
            per_prime.setdefault(p, []).append(e)
    if not per_prime:
        return ()
    width = max(len(v) for v in per_prime.values())
    chain = []
    for slot in range(width):
        d = 1
        for p, exps in per_prime.items():
            exps = sorted(exps, reverse=True)
            if slot < len(exps):
                d *= p ** exps[slot]
        chain.append(d)
    chain.reverse()
    return tuple(chain)


class FinAbGroup:
    """Finitely generated abelian group in invariant-factor form.

    >>> FinAbGroup(0, [4, 2, 3]).invariant_factors
    (2, 12)
    >>> str(FinAbGroup(0, [4, 2, 3]))
    'Z/2 + Z/12'
    """

    __slots__ = ("free_rank", "invariant_factors")

    def __init__(self, free_rank: int, torsion: Iterable[int]):
        if free_rank < 0:
            raise InvalidInput("finab.rank", "negative free rank")
        self.free_rank = free_rank
        self.invariant_factors = _canonical_chain(torsion)

    def order(self) -> Optional[int]:
        if self.free_rank:
            return None
        n = 1
        for d in self.invariant_factors:
            n *= d
        return n

    def exponent(self) -> Optional[int]:
        if self.free_rank:
            return None
        return self.invariant_factors[-1] if self.invariant_factors else 1

    def is_trivial(self) -> bool:
        return not self.free_rank and not self.invariant_factors

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.invariant_factors)}

    @classmethod
    def from_json(cls, obj: dict) -> "FinAbGroup":
        return cls(obj["free_rank"], obj["torsion"])

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinAbGroup):
            return NotImplemented
        return (
            self.free_rank == other.free_rank
            and self.invariant_factors == other.invariant_factors
        )

    def __hash__(self):
        return hash((self.free_rank, self.invariant_factors))

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{d}" for d in self.invariant_factors)
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"FinAbGroup({self.free_rank}, {list(self.invariant_factors)})"


class Coefficients:
    """Coefficient ring selector: the integers or Z/M."""

    __slots__ = ("kind", "modulus")

    def __init__(self, kind: str, modulus: Optional[int]):
        if kind not in ("integers", "mod"):
            raise InvalidInput("coeffs.kind", f"unknown coefficient kind {kind!r}")
        if kind == "mod" and (modulus is None or modulus < 2):
            raise InvalidInput("coeffs.modulus", "modulus must be at least 2")
        self.kind = kind
        self.modulus = modulus if kind == "mod" else None

    @classmethod
    def integers(cls) -> "Coefficients":
        return cls("integers", None)

    @classmethod
    def mod(cls, m: int) -> "Coefficients":
        return cls("mod", m)

    @property
    def is_modular(self) -> bool:
        return self.kind == "mod"

    def __eq__(self, other):
        if not isinstance(other, Coefficients):
            return NotImplemented
        return (self.kind, self.modulus) == (other.kind, other.modulus)

    def __repr__(self):
        return "Coefficients.integers()" if not self.is_modular else f"Coefficients.mod({self.modulus})"


# ---------------------------------------------------------------------------
# cohomology of a two-step integer complex
# ---------------------------------------------------------------------------

def _validate_complex(d_in: IntMatrix, d_out: IntMatrix, coeffs: Coefficients):
    if d_out.cols != d_in.rows:
        raise InvalidInput(
            "coh.shape",
            f"d_out acts on dimension {d_out.cols} but d_in lands in {d_in.rows}",
        )
    comp = d_out @ d_in
    if coeffs.is_modular:
        comp = comp.mod(coeffs.modulus)
    if not comp.is_zero():
        raise InvalidInput("coh.d2", "d_out . d_in is nonzero: not a complex")


class CohomologyPresentation:
    """Cohomology at the middle of C^{n-1} -> C^n -> C^{n+1}, with
    coordinates: class_of maps a cocycle to its coordinates in the
    invariant-factor decomposition, rep_of picks a representative.

    For integral coefficients the coordinate tuple lists the torsion
    coordinates first (one per invariant factor) followed by the free
    coordinates.
    """

    __slots__ = (
        "coeffs", "dim", "group",
        "_d_out", "_Vinv", "_gen_orders", "_need", "_keep", "_rank",
        "_K", "_U2", "_U2inv", "_t", "_keep_torsion", "_keep_free",
    )

    def __init__(self, d_in, d_out, coeffs, extra_relations=None):
        _validate_complex(d_in, d_out, coeffs)
        if extra_relations is not None and extra_relations.rows != d_out.cols:
            raise InvalidInput("coh.shape", "extra relations of wrong dimension")
        self.coeffs = coeffs
        self.dim = d_out.cols
        self._d_out = d_out
        modulus = coeffs.modulus

        snf1 = smith_normal_form(d_out, transforms="cols", modulus=modulus)
        self._Vinv = snf1.Vinv
        V = snf1.V
        n = self.dim

        if coeffs.is_modular:
            diag = list(snf1.diagonal) + [modulus] * (n - len(snf1.diagonal))
            self._gen_orders = diag
            self._need = [modulus // d for d in diag]
            # generators of order 1 carry nothing: keep the rest
            keep = [i for i in range(n) if diag[i] > 1]
            self._keep = keep
            self._rank = None
            pos = {i: p for p, i in enumerate(keep)}
            kdata = {}
            for (r, c), v in V._data.items():
                p = pos.get(c)
                if p is not None:
                    w = (self._need[c] * v) % modulus
                    if w:
                        kdata[r, p] = w
            self._K = IntMatrix(n, len(keep), kdata)
            ngens = len(keep)
        else:
            rank = snf1.rank
            self._gen_orders = None
            self._need = None
            self._keep = None
            self._rank = rank
            self._K = V.column_slice(rank, n)
            ngens = n - rank

        rel_cols = self._relation_coords(d_in, law="coh.d2")
        if extra_relations is not None:
            rel_cols.extend(self._relation_coords(extra_relations, law="coh.extra"))
        X = IntMatrix.from_columns(rel_cols, ngens)
        if coeffs.is_modular:
            # the generator orders all divide the modulus and sit inside
            # the relation image, so the quotient is unchanged mod M and
            # the elimination stays bounded
            orders = [self._gen_orders[i] for i in self._keep]
            R = IntMatrix.hstack(X, IntMatrix.diagonal(orders))
            snf2 = smith_normal_form(R, transforms="both", modulus=modulus)
        else:
            R = X
            snf2 = smith_normal_form(R, transforms="both")
        self._U2 = snf2.U
        self._U2inv = snf2.Uinv
        t = list(snf2.diagonal) + [0] * (ngens - len(snf2.diagonal))
        self._t = t
        self._keep_torsion = [j for j in range(ngens) if t[j] > 1]
        self._keep_free = [j for j in range(ngens) if t[j] == 0]
        self.group = FinAbGroup(
            len(self._keep_free), [t[j] for j in self._keep_torsion]
        )

    def _kernel_coords(self, vec, law="coh.cocycle"):
        """Coordinates of a cocycle in the kernel-generator basis."""
        c = self._Vinv.apply(vec)
        if self.coeffs.is_modular:
            m = self.coeffs.modulus
            for i, ci in enumerate(c):
                if ci % self._need[i]:
                    raise InvalidInput(law, "vector is not a cocycle")
            return [
                ((c[i] % m) // self._need[i]) % self._gen_orders[i]
                for i in self._keep
            ]
        rank = self._rank
        for i in range(rank):
            if c[i]:
                raise InvalidInput(law, "vector is not a cocycle")
        return c[rank:]

    def _relation_coords(self, mat, law):
        """Kernel-basis coordinates for every column of mat at once."""
        cmat = self._Vinv @ mat
        bycol = {}
        for (i, j), v in cmat._data.items():
            bycol.setdefault(j, {})[i] = v
        out = []
        if self.coeffs.is_modular:
            m = self.coeffs.modulus
            for j in range(mat.cols):
                cj = bycol.get(j, {})
                for i, ci in cj.items():
                    if ci % self._need[i]:
                        raise InvalidInput(law, "vector is not a cocycle")
                out.append([
                    ((cj.get(i, 0) % m) // self._need[i]) % self._gen_orders[i]
                    for i in self._keep
                ])
        else:
            rank = self._rank
            for j in range(mat.cols):
                cj = bycol.get(j, {})
                for i, ci in cj.items():
                    if i < rank and ci:
                        raise InvalidInput(law, "vector is not a cocycle")
                out.append([cj.get(i, 0) for i in range(rank, self.dim)])
        return out

    def is_cocycle(self, vec) -> bool:
        img = self._d_out.apply(list(vec))
        if self.coeffs.is_modular:
            return all(x % self.coeffs.modulus == 0 for x in img)
        return not any(img)

    def class_of(self, vec) -> tuple:
        if len(vec) != self.dim:
            raise InvalidInput("coh.shape", "cochain of wrong dimension")
        if not self.is_cocycle(vec):
            raise InvalidInput("coh.cocycle", "vector is not a cocycle")
        a = self._kernel_coords(list(vec))
        b = self._U2.apply(a)
        coords = [b[j] % self._t[j] for j in self._keep_torsion]
        coords.extend(b[j] for j in self._keep_free)
        return tuple(coords)

    def rep_of(self, coords) -> list:
        expected = len(self._keep_torsion) + len(self._keep_free)
        if len(coords) != expected:
            raise InvalidInput("coh.coords", f"expected {expected} coordinates")
        ngens = len(self._t)
        b = [0] * ngens
        for j, x in zip(self._keep_torsion, coords):
            b[j] = x % self._t[j]
        for j, x in zip(self._keep_free, coords[len(self._keep_torsion):]):
            b[j] = x
        a = self._U2inv.apply(b)
        vec = self._K.apply(a)
        if self.coeffs.is_modular:
            vec = [x % self.coeffs.modulus for x in vec]
        return vec

    def is_coboundary(self, vec) -> bool:
        return all(x == 0 for x in self.class_of(vec))


def presentation_at(d_in, d_out, coeffs, extra_relations=None) -> CohomologyPresentation:
    return CohomologyPresentation(d_in, d_out, coeffs, extra_relations)


def cohomology_at(d_in: IntMatrix, d_out: IntMatrix, coeffs: Coefficients) -> FinAbGroup:
    """ker(d_out)/im(d_in) over the given coefficients.

    >>> cohomology_at(IntMatrix.from_dense([[6]]), IntMatrix.zero(0, 1),
    ...               Coefficients.integers())
    FinAbGroup(0, [6])
    """
    return presentation_at(d_in, d_out, coeffs).group


# ---------------------------------------------------------------------------
# multiplicative-coefficient emulation
# ---------------------------------------------------------------------------

class KxCohomology:
    """Cohomology with coefficients in the units of an algebraically
    closed field of characteristic zero, emulated exactly.

    The torsion part is computed as coker(H^n(C, Z) -> H^n(C, Z/M)),
    which equals the torsion of H^{n+1}(C, Z); the free part counts
    divisible factors (one per free rank of H^n(C, Z)).  The modular
    presentation supports class_of/rep_of on mod-M cocycles.
    """

    __slots__ = ("group", "presentation", "modulus", "invariant_gcds", "free_rank")

    def __init__(self, group, presentation, modulus, invariant_gcds, free_rank):
        self.group = group
        self.presentation = presentation
        self.modulus = modulus
        self.invariant_gcds = invariant_gcds
        self.free_rank = free_rank


def kx_emulated_at(
    d_in: IntMatrix,
    d_out: IntMatrix,
    modulus: int,
    stability_factor: Optional[int] = None,
    d_next: Optional[IntMatrix] = None,
) -> KxCohomology:
    """Emulated multiplicative cohomology at the middle slot.

    stability_factor re-derives the answer at modulus*factor and
    requires agreement (a failed check means the modulus misses some
    torsion and the result would be wrong -- reported, never silent).
    d_next, when given, adds the independent integral cross-check
    against the torsion of the next integral cohomology group.
    """
    coeffs = Coefficients.mod(modulus)
    _validate_complex(d_in, d_out, Coefficients.integers())
    snf_out = smith_normal_form(d_out, transforms="cols")
    factors = snf_out.invariant_factors
    gcds = [gcd(d, modulus) for d in factors]
    torsion = [g for g in gcds if g > 1]
    if stability_factor is not None and stability_factor > 1:
        bigger = [g for g in (gcd(d, modulus * stability_factor) for d in factors) if g > 1]
        if FinAbGroup(0, bigger) != FinAbGroup(0, torsion):
            raise InvariantViolation(
                "kx.stability",
                f"modulus {modulus} does not capture the full torsion: "
                f"factors {sorted(torsion)} at M vs {sorted(bigger)} at "
                f"M*{stability_factor}; increase the modulus",
            )
    rank_out = snf_out.rank
    rank_in = smith_normal_form(d_in, transforms="none").rank
    free_rank = (d_out.cols - rank_out) - rank_in

    kernel_basis = snf_out.V.column_slice(rank_out, d_out.cols)
    pres = presentation_at(
        d_in, d_out, coeffs, extra_relations=kernel_basis.mod(modulus)
    )
    if pres.group != FinAbGroup(0, torsion):
        raise InvariantViolation(
            "kx.agree",
            f"presentation quotient {pres.group} disagrees with the "
            f"invariant-factor computation {FinAbGroup(0, torsion)}",
        )
    if d_next is not None:
        nxt = cohomology_at(d_out, d_next, Coefficients.integers())
        if nxt.invariant_factors != FinAbGroup(0, torsion).invariant_factors:
            raise InvariantViolation(
                "kx.integral",
                f"emulated torsion {FinAbGroup(0, torsion)} does not match "
                f"the integral torsion {FinAbGroup(0, list(nxt.invariant_factors))} "
                "one degree up",
            )
    return KxCohomology(
        group=FinAbGroup(free_rank, torsion),
        presentation=pres,
        modulus=modulus,
        invariant_gcds=gcds,
        free_rank=free_rank,
    )


# ---------------------------------------------------------------------------
# small helpers on finite modules
# ---------------------------------------------------------------------------

def subgroup_order(orders: Sequence[int], gens: Sequence[Sequence[int]]) -> int:
    """Order of the subgroup generated by coordinate vectors inside
    Z/orders[0] + ... + Z/orders[-1].

    >>> subgroup_order([4, 6], [[2, 3]])
    2
    """
    k = len(orders)
    total = 1
    for o in orders:
        if o < 1:
            raise InvalidInput("finab.factor", "ambient orders must be positive")
        total *= o
    if k == 0 or not gens:
        return 1
    cols = []
    for g in gens:
        if len(g) != k:
            raise InvalidInput("mat.shape", "generator of wrong length")
        cols.append(list(g))
    m = IntMatrix.hstack(
        IntMatrix.from_columns(cols, k), IntMatrix.diagonal(list(orders))
    )
    coker = 1
    for d in smith_normal_form(m, transforms="none").invariant_factors:
        coker *= d
    return total // coker
