# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled column kernels.

Each column x0 needs the length of the union of the vertical slices
[b f(x0 - u) + v - d, (b + th) f(x0 - u) + v + d] of many rectangles. Rectangles
are swept in index order and folded into a running connected hull while they
overlap it; the hulls ("runs") are then sorted and coalesced. Neighbouring
indices of a tangency-compressed stage overlap heavily, so the run list is far
shorter than the rectangle list.
"""
from libc.math cimport exp
from libc.stdlib cimport malloc, realloc, free, qsort

ctypedef struct Run:
    double lo
    double hi


cdef int _cmp_run(const void* p, const void* q) noexcept nogil:
    cdef double a = (<Run*>p).lo
    cdef double b = (<Run*>q).lo
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


cdef inline double _profile(int kind, double t) noexcept nogil:
    if kind == 0:
        return t * t
    if kind == 1:
        return t * t + t
    return exp(t)


cdef Py_ssize_t _merge_pass(Run* src, Run* dst, Py_ssize_t* bounds, Py_ssize_t nseq) noexcept nogil:
    """Merge ascending sequences pairwise; returns the new sequence count."""
    cdef Py_ssize_t s, i, j, k, iend, jend, out = 0
    s = 0
    while s < nseq:
        i = bounds[s]
        k = i
        if s + 1 == nseq:
            while i < bounds[s + 1]:
                dst[k] = src[i]
                i += 1
                k += 1
            bounds[out] = bounds[s]
            out += 1
            break
        iend = bounds[s + 1]
        j = iend
        jend = bounds[s + 2]
        while i < iend and j < jend:
            if src[j].lo < src[i].lo:
                dst[k] = src[j]
                j += 1
            else:
                dst[k] = src[i]
                i += 1
            k += 1
        while i < iend:
            dst[k] = src[i]
            i += 1
            k += 1
        while j < jend:
            dst[k] = src[j]
            j += 1
            k += 1
        bounds[out] = bounds[s]
        out += 1
        s += 2
    bounds[out] = bounds[nseq]
    return out


cdef double _sum_sorted(Run* runs, Py_ssize_t nruns) noexcept nogil:
    cdef Py_ssize_t i
    cdef double total = 0.0, cl, ch
    if nruns == 0:
        return 0.0
    cl = runs[0].lo
    ch = runs[0].hi
    for i in range(1, nruns):
        if runs[i].lo <= ch:
            if runs[i].hi > ch:
                ch = runs[i].hi
        else:
            total += ch - cl
            cl = runs[i].lo
            ch = runs[i].hi
    return total + (ch - cl)


cdef double _coalesce(Run* runs, Py_ssize_t nruns) noexcept nogil:
    """Union length of the runs; sorts by lo using a natural merge sort.

    Runs come out of the index-order sweep as a modest number of ascending
    sequences, so merging those costs n log(#sequences) instead of n log n.
    Falls back to qsort if the scratch allocation fails.
    """
    cdef Py_ssize_t i, nseq = 1
    cdef Py_ssize_t* bounds
    cdef Run* aux
    cdef Run* src
    cdef Run* dst
    cdef Run* tmp
    cdef double total
    for i in range(1, nruns):
        if runs[i].lo < runs[i - 1].lo:
            nseq += 1
    if nruns == 0 or nseq == 1:
        return _sum_sorted(runs, nruns)
    bounds = <Py_ssize_t*>malloc((nseq + 1) * sizeof(Py_ssize_t))
    aux = <Run*>malloc(nruns * sizeof(Run))
    if bounds == NULL or aux == NULL:
        free(bounds)
        free(aux)
        qsort(runs, nruns, sizeof(Run), _cmp_run)
        return _sum_sorted(runs, nruns)
    bounds[0] = 0
    nseq = 1
    for i in range(1, nruns):
        if runs[i].lo < runs[i - 1].lo:
            bounds[nseq] = i
            nseq += 1
    bounds[nseq] = nruns
    src = runs
    dst = aux
    while nseq > 1:
        nseq = _merge_pass(src, dst, bounds, nseq)
        tmp = src
        src = dst
        dst = tmp
    total = _sum_sorted(src, nruns)
    free(bounds)
    free(aux)
    return total


cdef struct RunBuf:
    Run* data
    Py_ssize_t size
    Py_ssize_t cap


cdef int _push(RunBuf* buf, double lo, double hi) noexcept nogil:
    cdef Run* grown
    if buf.size == buf.cap:
        grown = <Run*>realloc(buf.data, 2 * buf.cap * sizeof(Run))
        if grown == NULL:
            return -1
        buf.data = grown
        buf.cap *= 2
    buf.data[buf.size].lo = lo
    buf.data[buf.size].hi = hi
    buf.size += 1
    return 0


cdef int _fold_set(RunBuf* buf, int kind, const double[::1] b, const double[::1] u,
                   const double[::1] v, double th, double d, double x0) noexcept nogil:
    """Sweep one rectangle set in index order, pushing maximal connected runs."""
    cdef Py_ssize_t i, n = b.shape[0]
    cdef double t, F, lo, hi, cl = 0.0, ch = 0.0
    cdef bint opened = 0
    for i in range(n):
        t = x0 - u[i]
        if (t < 0.0) | (t > 1.0):
            continue
        if kind == 0:
            F = t * t
        elif kind == 1:
            F = t * t + t
        else:
            F = exp(t)
        lo = b[i] * F + v[i] - d
        hi = (b[i] + th) * F + v[i] + d
        if opened & (lo <= ch) & (hi >= cl):
            cl = lo if lo < cl else cl
            ch = hi if hi > ch else ch
        else:
            if opened and _push(buf, cl, ch) != 0:
                return -1
            cl = lo
            ch = hi
            opened = 1
    if opened:
        return _push(buf, cl, ch)
    return 0


def column_lengths(int kind,
                   const double[::1] b1, const double[::1] u1, const double[::1] v1,
                   double th1, double d1,
                   const double[::1] b2, const double[::1] u2, const double[::1] v2,
                   double th2, double d2,
                   const double[::1] xs, double[::1] out):
    """Union length at each x in xs of the slices of one or two rectangle sets.

    ``kind`` selects the preset profile (0: t^2, 1: t^2 + t, 2: e^t). Pass
    empty arrays for the second set when only one is needed. Releases the GIL.
    """
    cdef Py_ssize_t c, ncol = xs.shape[0]
    cdef RunBuf buf
    cdef int status = 0
    if kind < 0 or kind > 2:
        raise ValueError("kind must be 0, 1 or 2")
    buf.cap = 1024
    buf.size = 0
    buf.data = <Run*>malloc(buf.cap * sizeof(Run))
    if buf.data == NULL:
        raise MemoryError()
    with nogil:
        for c in range(ncol):
            buf.size = 0
            status = _fold_set(&buf, kind, b1, u1, v1, th1, d1, xs[c])
            if status == 0 and b2.shape[0]:
                status = _fold_set(&buf, kind, b2, u2, v2, th2, d2, xs[c])
            if status != 0:
                break
            out[c] = _coalesce(buf.data, buf.size)
    free(buf.data)
    if status != 0:
        raise MemoryError()


def union_length(const double[::1] lo, const double[::1] hi):
    """Length of the union of [lo[i], hi[i]], folding runs in the given order."""
    cdef Py_ssize_t i, n = lo.shape[0]
    cdef RunBuf buf
    cdef double cl = 0.0, ch = 0.0, total
    cdef bint open_run = 0
    cdef int status = 0
    buf.cap = 1024
    buf.size = 0
    buf.data = <Run*>malloc(buf.cap * sizeof(Run))
    if buf.data == NULL:
        raise MemoryError()
    with nogil:
        for i in range(n):
            if open_run and lo[i] <= ch and hi[i] >= cl:
                if lo[i] < cl:
                    cl = lo[i]
                if hi[i] > ch:
                    ch = hi[i]
            else:
                if open_run:
                    status = _push(&buf, cl, ch)
                    if status != 0:
                        break
                cl = lo[i]
                ch = hi[i]
                open_run = 1
        if status == 0 and open_run:
            status = _push(&buf, cl, ch)
        total = _coalesce(buf.data, buf.size) if status == 0 else 0.0
    free(buf.data)
    if status != 0:
        raise MemoryError()
    return total
