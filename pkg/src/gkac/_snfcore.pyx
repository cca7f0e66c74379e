# cython: boundscheck=False, wraparound=False, cdivision=True
"""Dense int64 Smith normal form kernel.

Raises OverflowError the moment any intermediate value leaves the
guarded int64 range; the caller then escalates to the exact pure-Python
path.  With a modulus all entries (matrix and transforms) are kept as
balanced residues, so magnitudes stay small.
"""

import array

from cpython cimport array

cdef long long GUARD = (<long long>1) << 61


cdef inline long long llabs_(long long v) nogil:
    return -v if v < 0 else v


cdef inline long long _balance(long long v, long long m) nogil:
    v = v % m
    if v < 0:
        v += m
    if 2 * v > m:
        v -= m
    return v


cdef inline long long _bq(long long v, long long p) nogil:
    # quotient minimizing |v - q*p| (C division truncates toward zero)
    cdef long long q = v / p
    cdef long long r = v - q * p
    if 2 * llabs_(r) > llabs_(p):
        if (r > 0) == (p > 0):
            q += 1
        else:
            q -= 1
    return q


cdef inline long long _gcd(long long a, long long b) nogil:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


cdef int _axpy(long long[::1] buf, Py_ssize_t ib, Py_ssize_t kb,
               Py_ssize_t start, Py_ssize_t stop, long long q,
               long long modulus) except -1:
    """buf[ib+j] -= q * buf[kb+j] for j in [start, stop), guarded."""
    cdef Py_ssize_t j
    cdef long long v, w
    if q == 0:
        return 0
    for j in range(start, stop):
        v = buf[kb + j]
        if v == 0:
            continue
        if llabs_(v) > GUARD / llabs_(q):
            raise OverflowError("int64 guard exceeded")
        w = buf[ib + j] - q * v
        if modulus != 0:
            w = _balance(w, modulus)
        elif w > GUARD or w < -GUARD:
            raise OverflowError("int64 guard exceeded")
        buf[ib + j] = w
    return 0


cdef int _axpy_col(long long[::1] buf, Py_ssize_t cols, Py_ssize_t j,
                   Py_ssize_t l, Py_ssize_t start, Py_ssize_t stop,
                   long long q, long long modulus) except -1:
    """buf[i*cols+j] -= q * buf[i*cols+l] for i in [start, stop)."""
    cdef Py_ssize_t i, base
    cdef long long v, w
    if q == 0:
        return 0
    for i in range(start, stop):
        base = i * cols
        v = buf[base + l]
        if v == 0:
            continue
        if llabs_(v) > GUARD / llabs_(q):
            raise OverflowError("int64 guard exceeded")
        w = buf[base + j] - q * v
        if modulus != 0:
            w = _balance(w, modulus)
        elif w > GUARD or w < -GUARD:
            raise OverflowError("int64 guard exceeded")
        buf[base + j] = w
    return 0


cdef void _swap_rows_a(long long[::1] a, Py_ssize_t ncols, Py_ssize_t i,
                       Py_ssize_t k, Py_ssize_t start) nogil:
    cdef Py_ssize_t j
    cdef long long tmp
    for j in range(start, ncols):
        tmp = a[i * ncols + j]
        a[i * ncols + j] = a[k * ncols + j]
        a[k * ncols + j] = tmp


cdef void _swap_u(long long[::1] U, long long[::1] Uinv, Py_ssize_t nrows,
                  Py_ssize_t i, Py_ssize_t k) nogil:
    cdef Py_ssize_t j, base
    cdef long long tmp
    for j in range(nrows):
        tmp = U[i * nrows + j]
        U[i * nrows + j] = U[k * nrows + j]
        U[k * nrows + j] = tmp
    for j in range(nrows):
        base = j * nrows
        tmp = Uinv[base + i]
        Uinv[base + i] = Uinv[base + k]
        Uinv[base + k] = tmp


cdef void _swap_cols_a(long long[::1] a, Py_ssize_t nrows, Py_ssize_t ncols,
                       Py_ssize_t j, Py_ssize_t l, Py_ssize_t start) nogil:
    cdef Py_ssize_t i, base
    cdef long long tmp
    for i in range(start, nrows):
        base = i * ncols
        tmp = a[base + j]
        a[base + j] = a[base + l]
        a[base + l] = tmp


cdef void _swap_v(long long[::1] V, long long[::1] Vinv, Py_ssize_t ncols,
                  Py_ssize_t j, Py_ssize_t l) nogil:
    cdef Py_ssize_t i, base
    cdef long long tmp
    for i in range(ncols):
        base = i * ncols
        tmp = V[base + j]
        V[base + j] = V[base + l]
        V[base + l] = tmp
    for i in range(ncols):
        tmp = Vinv[j * ncols + i]
        Vinv[j * ncols + i] = Vinv[l * ncols + i]
        Vinv[l * ncols + i] = tmp


cdef int _uinv_colop(long long[::1] Uinv, Py_ssize_t nrows, Py_ssize_t src,
                     Py_ssize_t dst, long long q, long long modulus) except -1:
    """Uinv[:, dst] += q * Uinv[:, src] (inverse of a tracked row op)."""
    cdef Py_ssize_t i, base
    cdef long long v, w
    if q == 0:
        return 0
    for i in range(nrows):
        base = i * nrows
        v = Uinv[base + src]
        if v == 0:
            continue
        if llabs_(v) > GUARD / llabs_(q):
            raise OverflowError("int64 guard exceeded")
        w = Uinv[base + dst] + q * v
        if modulus != 0:
            w = _balance(w, modulus)
        elif w > GUARD or w < -GUARD:
            raise OverflowError("int64 guard exceeded")
        Uinv[base + dst] = w
    return 0


def snf_dense(entries, Py_ssize_t nrows, Py_ssize_t ncols,
              int want_u, int want_v, long long modulus):
    """Smith form of a dense row-major int64 matrix.

    Returns (diagonal, U, Uinv, V, Vinv) with transforms as
    list-of-lists or None.
    """
    cdef array.array abuf = array.array("q", entries)
    cdef long long[::1] a = abuf
    cdef array.array ubuf, uibuf, vbuf, vibuf
    cdef long long[::1] U = None, Uinv = None, V = None, Vinv = None
    cdef Py_ssize_t i, j, r, c, t, n, br, bc, base
    cdef long long v, p, q, best, g
    cdef bint col_dirty

    if want_u:
        ubuf = array.array("q", bytes(8 * nrows * nrows))
        uibuf = array.array("q", bytes(8 * nrows * nrows))
        U = ubuf
        Uinv = uibuf
        for i in range(nrows):
            U[i * nrows + i] = 1
            Uinv[i * nrows + i] = 1
    if want_v:
        vbuf = array.array("q", bytes(8 * ncols * ncols))
        vibuf = array.array("q", bytes(8 * ncols * ncols))
        V = vbuf
        Vinv = vibuf
        for i in range(ncols):
            V[i * ncols + i] = 1
            Vinv[i * ncols + i] = 1

    if modulus != 0:
        for i in range(nrows * ncols):
            a[i] = _balance(a[i], modulus)

    n = nrows if nrows < ncols else ncols
    t = 0
    while t < n:
        # pivot search: smallest |value| in the active submatrix
        best = 0
        br = -1
        bc = -1
        for i in range(t, nrows):
            base = i * ncols
            for j in range(t, ncols):
                v = a[base + j]
                if v != 0 and (best == 0 or llabs_(v) < best):
                    best = llabs_(v)
                    br = i
                    bc = j
                    if best == 1:
                        break
            if best == 1:
                break
        if br < 0:
            break
        if br != t:
            _swap_rows_a(a, ncols, t, br, t)
            if want_u:
                _swap_u(U, Uinv, nrows, t, br)
        if bc != t:
            _swap_cols_a(a, nrows, ncols, t, bc, t)
            if want_v:
                _swap_v(V, Vinv, ncols, t, bc)

        while True:
            while True:
                col_dirty = False
                # clear column t
                for r in range(t + 1, nrows):
                    while a[r * ncols + t] != 0:
                        p = a[t * ncols + t]
                        q = _bq(a[r * ncols + t], p)
                        _axpy(a, r * ncols, t * ncols, t, ncols, q, modulus)
                        if want_u:
                            _axpy(U, r * nrows, t * nrows, 0, nrows, q, modulus)
                            _uinv_colop(Uinv, nrows, r, t, q, modulus)
                        if a[r * ncols + t] != 0:
                            _swap_rows_a(a, ncols, t, r, t)
                            if want_u:
                                _swap_u(U, Uinv, nrows, t, r)
                # clear row t
                for c in range(t + 1, ncols):
                    while a[t * ncols + c] != 0:
                        p = a[t * ncols + t]
                        q = _bq(a[t * ncols + c], p)
                        _axpy_col(a, ncols, c, t, t, nrows, q, modulus)
                        if want_v:
                            _axpy_col(V, ncols, c, t, 0, ncols, q, modulus)
                            _axpy(Vinv, t * ncols, c * ncols, 0, ncols, -q, modulus)
                        if a[t * ncols + c] != 0:
                            _swap_cols_a(a, nrows, ncols, t, c, t)
                            if want_v:
                                _swap_v(V, Vinv, ncols, t, c)
                            col_dirty = True
                if not col_dirty:
                    break

            if modulus != 0:
                p = a[t * ncols + t]
                g = _gcd(p, modulus)
                if g != llabs_(p):
                    a[t * ncols + t] = g
            if a[t * ncols + t] < 0:
                for j in range(t, ncols):
                    a[t * ncols + j] = -a[t * ncols + j]
                if want_u:
                    for j in range(nrows):
                        U[t * nrows + j] = -U[t * nrows + j]
                    for i in range(nrows):
                        Uinv[i * nrows + t] = -Uinv[i * nrows + t]

            p = a[t * ncols + t]
            br = -1
            if p != 1:
                for i in range(t + 1, nrows):
                    base = i * ncols
                    for j in range(t + 1, ncols):
                        if a[base + j] % p != 0:
                            br = i
                            break
                    if br >= 0:
                        break
            if br < 0:
                break
            # fold the offending row into the pivot row and redo
            _axpy(a, t * ncols, br * ncols, t, ncols, -1, modulus)
            if want_u:
                _axpy(U, t * nrows, br * nrows, 0, nrows, -1, modulus)
                _uinv_colop(Uinv, nrows, t, br, -1, modulus)
        t += 1

    diagonal = []
    for i in range(n):
        v = llabs_(a[i * ncols + i])
        if modulus != 0:
            v = _gcd(v, modulus) if v != 0 else modulus
        diagonal.append(v)

    return (
        diagonal,
        _unflatten(U, nrows) if want_u else None,
        _unflatten(Uinv, nrows) if want_u else None,
        _unflatten(V, ncols) if want_v else None,
        _unflatten(Vinv, ncols) if want_v else None,
    )


cdef _unflatten(long long[::1] buf, Py_ssize_t k):
    out = []
    cdef Py_ssize_t i, j
    for i in range(k):
        out.append([buf[i * k + j] for j in range(k)])
    return out
