"""Compiled kernel backend.

Cython translation of ``_pure.py``.  Every exported function must return
bit-identical results to its pure-Python counterpart: the RNG is integer
exact, transcendental calls go through the same libm/scipy routines, and
floating-point accumulations follow the same operation order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, fabs, floor, log, sqrt
from libc.string cimport memcpy
from scipy.special.cython_special cimport gammaln as cgammaln
from scipy.special.cython_special cimport ndtri as cndtri

cnp.import_array()

BACKEND_NAME = "cython"

ctypedef unsigned long long u64
ctypedef long long i64

cdef extern from *:
    """
    static inline unsigned long long subscan_mulhi64(unsigned long long a,
                                                     unsigned long long b) {
        return (unsigned long long)(((__uint128_t)a * b) >> 64);
    }
    """
    u64 subscan_mulhi64(u64 a, u64 b) nogil

cdef u64 GOLDEN_C = <u64>0x9E3779B97F4A7C15
cdef u64 MIX_A = <u64>0xBF58476D1CE4E5B9
cdef u64 MIX_B = <u64>0x94D049BB133111EB
cdef double INV53 = 1.0 / 9007199254740992.0
cdef double PTRS_CUTOFF = 10.0

cdef enum:
    D_ENTRY = 1
    D_DRAW = 2
    D_SHUFFLE = 3
    D_REPLICATE = 4
    D_OBSERVED = 5
    D_SCAN = 6
    D_RESTART = 7
    D_SIZE = 8
    D_TRIAL = 9
    D_CELL = 10

cdef enum:
    F_GAUSSIAN = 0
    F_CENTERED_POISSON = 1
    F_RADEMACHER = 2

cdef enum:
    K_UNIDIMENSIONAL = 0
    K_BIDIMENSIONAL = 1

# Python-visible mirrors of the contract constants.
DOM_ENTRY = 1
DOM_DRAW = 2
DOM_SHUFFLE = 3
DOM_REPLICATE = 4
DOM_OBSERVED = 5
DOM_SCAN = 6
DOM_RESTART = 7
DOM_SIZE = 8
DOM_TRIAL = 9
DOM_CELL = 10

FAMILY_GAUSSIAN = 0
FAMILY_CENTERED_POISSON = 1
FAMILY_RADEMACHER = 2

KIND_UNIDIMENSIONAL = 0
KIND_BIDIMENSIONAL = 1

_PYMASK = (1 << 64) - 1


cdef inline u64 cmix64(u64 z) nogil:
    z ^= z >> 30
    z = z * MIX_A
    z ^= z >> 27
    z = z * MIX_B
    z ^= z >> 31
    return z


cdef inline u64 cderive(u64 seed, u64 index) nogil:
    return cmix64(seed + (index + 1) * GOLDEN_C)


cdef struct Rng:
    u64 state
    u64 count


cdef inline void rng_init(Rng* s, u64 state) nogil:
    s.state = state
    s.count = 0


cdef inline u64 rng_next(Rng* s) nogil:
    s.count += 1
    return cmix64(s.state + s.count * GOLDEN_C)


cdef inline double rng_uniform(Rng* s) nogil:
    return (<double>(rng_next(s) >> 11) + 0.5) * INV53


cdef inline i64 rng_below(Rng* s, u64 n) nogil:
    return <i64>subscan_mulhi64(rng_next(s), n)


def mix64(seed):
    return int(cmix64(<u64>(seed & _PYMASK)))


def derive(seed, index):
    return int(cderive(<u64>(seed & _PYMASK), <u64>(index & _PYMASK)))


def uniform_stream(seed, int count):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count, dtype=np.float64)
    cdef Rng st
    cdef int i
    rng_init(&st, <u64>(seed & _PYMASK))
    for i in range(count):
        out[i] = rng_uniform(&st)
    return out


# ---------------------------------------------------------------- sampling #


cdef double draw_poisson(Rng* st, double lam) nogil:
    cdef double u, p, f, slam, loglam, b, a, invalpha, vr, v, us, kd
    cdef i64 k
    if lam < PTRS_CUTOFF:
        u = rng_uniform(st)
        p = exp(-lam)
        f = p
        k = 0
        while u > f and p > 0.0:
            k += 1
            p *= lam / <double>k
            f += p
        return <double>k
    slam = sqrt(lam)
    loglam = log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = rng_uniform(st) - 0.5
        v = rng_uniform(st)
        us = 0.5 - fabs(u)
        kd = floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= vr:
            return kd
        if kd < 0.0 or (us < 0.013 and v > us):
            continue
        if (log(v) + log(invalpha) - log(a / (us * us) + b)) <= (
            -lam + kd * loglam - cgammaln(kd + 1.0)
        ):
            return kd


cdef inline double cdraw(Rng* st, int family, double theta) nogil:
    cdef double ep, em
    if family == F_GAUSSIAN:
        return theta + cndtri(rng_uniform(st))
    if family == F_CENTERED_POISSON:
        return draw_poisson(st, exp(theta)) - 1.0
    ep = exp(theta)
    em = exp(-theta)
    return 1.0 if rng_uniform(st) < ep / (ep + em) else -1.0


def tilted_draws(int family, double theta, int count, seed):
    if family not in (0, 1, 2):
        raise ValueError(f"unknown family code {family}")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count, dtype=np.float64)
    cdef u64 root = cderive(<u64>(seed & _PYMASK), D_DRAW)
    cdef Rng st
    cdef int t
    with nogil:
        for t in range(count):
            rng_init(&st, cderive(root, <u64>t))
            out[t] = cdraw(&st, family, theta)
    return out


def generate_matrix(int family, double theta, int M, int N, int m, int n, seed):
    if family not in (0, 1, 2):
        raise ValueError(f"unknown family code {family}")
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((M, N), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef u64 root = cderive(<u64>(seed & _PYMASK), D_ENTRY)
    cdef u64 row_node
    cdef Rng st
    cdef int i, j
    cdef double th
    with nogil:
        for i in range(M):
            row_node = cderive(root, <u64>i)
            for j in range(N):
                th = theta if (i < m and j < n) else 0.0
                rng_init(&st, cderive(row_node, <u64>j))
                o[i, j] = cdraw(&st, family, th)
    return out


# ---------------------------------------------------------------- shuffles #


cdef void cfy(double* a, i64 L, Rng* st) nogil:
    cdef i64 i, j
    cdef double t
    for i in range(L - 1, 0, -1):
        j = rng_below(st, <u64>(i + 1))
        t = a[i]
        a[i] = a[j]
        a[j] = t


cdef void cshuffle_into(double* src, double* dst, i64 M, i64 N, int kind,
                        u64 pseed) nogil:
    cdef Rng st
    cdef i64 i
    memcpy(dst, src, <size_t>(M * N) * sizeof(double))
    rng_init(&st, cderive(pseed, D_SHUFFLE))
    if kind == K_UNIDIMENSIONAL:
        for i in range(M):
            cfy(dst + i * N, N, &st)
    else:
        cfy(dst, M * N, &st)


def shuffle_within_rows(X, seed):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] src = np.ascontiguousarray(
        X, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty_like(src)
    cdef i64 M = src.shape[0], N = src.shape[1]
    cdef double[:, ::1] s = src
    cdef double[:, ::1] d = out
    cdef u64 sd = <u64>(seed & _PYMASK)
    with nogil:
        cshuffle_into(&s[0, 0], &d[0, 0], M, N, K_UNIDIMENSIONAL, sd)
    return out


def shuffle_all(X, seed):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] src = np.ascontiguousarray(
        X, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty_like(src)
    cdef i64 M = src.shape[0], N = src.shape[1]
    cdef double[:, ::1] s = src
    cdef double[:, ::1] d = out
    cdef u64 sd = <u64>(seed & _PYMASK)
    with nogil:
        cshuffle_into(&s[0, 0], &d[0, 0], M, N, K_BIDIMENSIONAL, sd)
    return out


# ---------------------------------------------------------------- LAS scan #


cdef struct LasWS:
    double* rowacc
    double* colacc
    i64* heap
    i64* rows_cur
    i64* rows_prev
    i64* cols_cur
    i64* cols_prev
    i64* perm
    char* mask


cdef inline bint idx_gt(double* v, i64 a, i64 b) nogil:
    if v[a] > v[b]:
        return True
    return v[a] == v[b] and a < b


cdef void sift_down(double* v, i64* h, i64 root, i64 end) nogil:
    cdef i64 child, t
    while True:
        child = 2 * root + 1
        if child >= end:
            break
        if child + 1 < end and idx_gt(v, h[child + 1], h[child]):
            child += 1
        if idx_gt(v, h[child], h[root]):
            t = h[root]
            h[root] = h[child]
            h[child] = t
            root = child
        else:
            break


cdef void top_k_select(double* v, i64 L, i64 k, i64* heap, char* mask,
                       i64* out) nogil:
    # k largest under the total order (value desc, index asc), emitted in
    # ascending index order; matches a stable argsort of negated values.
    cdef i64 i, e, t
    for i in range(L):
        heap[i] = i
    for i in range((L - 2) // 2, -1, -1):
        sift_down(v, heap, i, L)
    e = L
    for i in range(k):
        mask[heap[0]] = 1
        e -= 1
        heap[0] = heap[e]
        sift_down(v, heap, 0, e)
    t = 0
    for i in range(L):
        if mask[i]:
            out[t] = i
            t += 1
            mask[i] = 0


cdef void acc_update(double* acc, double* src, i64 stride, i64* olda, i64 olen,
                     i64* newa, i64 nlen) nogil:
    # Removals first, then additions, each in ascending index order; the
    # pure backend applies the same sequence to keep sums bit-identical.
    cdef i64 a = 0, b = 0, idx, k
    cdef double* vec
    while a < olen:
        idx = olda[a]
        while b < nlen and newa[b] < idx:
            b += 1
        if b < nlen and newa[b] == idx:
            a += 1
            b += 1
            continue
        vec = src + idx * stride
        for k in range(stride):
            acc[k] -= vec[k]
        a += 1
    a = 0
    b = 0
    while b < nlen:
        idx = newa[b]
        while a < olen and olda[a] < idx:
            a += 1
        if a < olen and olda[a] == idx:
            a += 1
            b += 1
            continue
        vec = src + idx * stride
        for k in range(stride):
            acc[k] += vec[k]
        b += 1


cdef inline bint arrays_equal(i64* a, i64* b, i64 L) nogil:
    cdef i64 i
    for i in range(L):
        if a[i] != b[i]:
            return False
    return True


cdef double clas_single(double* X, double* XT, i64 M, i64 N, i64 m, i64 n,
                        int max_iters, u64 rseed, LasWS* ws,
                        int* out_iters) nogil:
    cdef i64 i, j, t, pr_len
    cdef int it
    cdef Rng st
    cdef bint has_prev = False, conv
    cdef double* vec
    cdef double v

    if n == N:
        for j in range(N):
            ws.cols_prev[j] = j
    else:
        rng_init(&st, rseed)
        for j in range(N):
            ws.perm[j] = j
        for i in range(n):
            j = i + rng_below(&st, <u64>(N - i))
            t = ws.perm[i]
            ws.perm[i] = ws.perm[j]
            ws.perm[j] = t
        for i in range(n):
            ws.mask[ws.perm[i]] = 1
        t = 0
        for j in range(N):
            if ws.mask[j]:
                ws.cols_prev[t] = j
                t += 1
                ws.mask[j] = 0

    for i in range(M):
        ws.rowacc[i] = 0.0
    for j in range(N):
        ws.colacc[j] = 0.0
    for t in range(n):
        vec = XT + ws.cols_prev[t] * M
        for i in range(M):
            ws.rowacc[i] += vec[i]

    pr_len = 0
    it = 0
    while it < max_iters:
        it += 1
        if m == M:
            for i in range(M):
                ws.rows_cur[i] = i
        else:
            top_k_select(ws.rowacc, M, m, ws.heap, ws.mask, ws.rows_cur)
        acc_update(ws.colacc, X, N, ws.rows_prev, pr_len, ws.rows_cur, m)
        if n == N:
            for j in range(N):
                ws.cols_cur[j] = j
        else:
            top_k_select(ws.colacc, N, n, ws.heap, ws.mask, ws.cols_cur)
        acc_update(ws.rowacc, XT, M, ws.cols_prev, n, ws.cols_cur, n)
        conv = (
            has_prev
            and arrays_equal(ws.rows_cur, ws.rows_prev, m)
            and arrays_equal(ws.cols_cur, ws.cols_prev, n)
        )
        memcpy(ws.rows_prev, ws.rows_cur, <size_t>m * sizeof(i64))
        memcpy(ws.cols_prev, ws.cols_cur, <size_t>n * sizeof(i64))
        pr_len = m
        has_prev = True
        if conv:
            break

    v = 0.0
    for i in range(m):
        vec = X + ws.rows_prev[i] * N
        for j in range(n):
            v += vec[ws.cols_prev[j]]
    out_iters[0] = it
    return v


cdef double clas_scan(double* X, double* XT, i64 M, i64 N, i64 m, i64 n,
                      int restarts, int max_iters, u64 seed, LasWS* ws,
                      i64* best_rows, i64* best_cols, i64* total_iters,
                      int* rused, bint use_threshold, double threshold) nogil:
    cdef double best = -INFINITY, v
    cdef int eff, r, it
    cdef i64 i, j
    cdef u64 rstate

    if m == M and n == N:
        v = 0.0
        for i in range(M):
            for j in range(N):
                v += X[i * N + j]
        for i in range(M):
            best_rows[i] = i
        for j in range(N):
            best_cols[j] = j
        total_iters[0] = 0
        rused[0] = 1
        return v

    eff = 1 if (m == M or n == N) else restarts
    rused[0] = eff
    total_iters[0] = 0
    rstate = cderive(seed, D_RESTART)
    for r in range(eff):
        v = clas_single(X, XT, M, N, m, n, max_iters, cderive(rstate, <u64>r),
                        ws, &it)
        total_iters[0] += it
        if v > best:
            best = v
            memcpy(best_rows, ws.rows_prev, <size_t>m * sizeof(i64))
            memcpy(best_cols, ws.cols_prev, <size_t>n * sizeof(i64))
        if use_threshold and best >= threshold:
            break
    return best


cdef class _Scratch:
    # Keeps the numpy buffers backing a LasWS alive.  Callers allocate a
    # fresh instance per scan: reusing one instance across many scans was
    # measured up to 1.8x slower when the allocator paired hot buffers at
    # aliasing addresses, while per-scan allocation (~10 us) stays fast.
    cdef object arrs
    cdef LasWS ws

    def __cinit__(self, i64 M, i64 N):
        cdef i64 L = M if M > N else N
        rowacc = np.zeros(M, dtype=np.float64)
        colacc = np.zeros(N, dtype=np.float64)
        heap = np.zeros(L, dtype=np.int64)
        rows_cur = np.zeros(M, dtype=np.int64)
        rows_prev = np.zeros(M, dtype=np.int64)
        cols_cur = np.zeros(N, dtype=np.int64)
        cols_prev = np.zeros(N, dtype=np.int64)
        perm = np.zeros(N, dtype=np.int64)
        mask = np.zeros(L, dtype=np.int8)
        self.arrs = (rowacc, colacc, heap, rows_cur, rows_prev, cols_cur,
                     cols_prev, perm, mask)
        self.ws.rowacc = <double*>cnp.PyArray_DATA(<cnp.ndarray>rowacc)
        self.ws.colacc = <double*>cnp.PyArray_DATA(<cnp.ndarray>colacc)
        self.ws.heap = <i64*>cnp.PyArray_DATA(<cnp.ndarray>heap)
        self.ws.rows_cur = <i64*>cnp.PyArray_DATA(<cnp.ndarray>rows_cur)
        self.ws.rows_prev = <i64*>cnp.PyArray_DATA(<cnp.ndarray>rows_prev)
        self.ws.cols_cur = <i64*>cnp.PyArray_DATA(<cnp.ndarray>cols_cur)
        self.ws.cols_prev = <i64*>cnp.PyArray_DATA(<cnp.ndarray>cols_prev)
        self.ws.perm = <i64*>cnp.PyArray_DATA(<cnp.ndarray>perm)
        self.ws.mask = <char*>cnp.PyArray_DATA(<cnp.ndarray>mask)


def las_scan(X, int m, int n, int restarts, int max_iters, seed):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] Xa = np.ascontiguousarray(
        X, dtype=np.float64
    )
    cdef i64 M = Xa.shape[0], N = Xa.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] XTa = np.ascontiguousarray(
        Xa.T
    )
    cdef _Scratch sc = _Scratch(M, N)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rows = np.empty(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cols = np.empty(n, dtype=np.int64)
    cdef double[:, ::1] Xv = Xa
    cdef double[:, ::1] XTv = XTa
    cdef i64 total_iters = 0
    cdef int rused = 0
    cdef double v = clas_scan(
        &Xv[0, 0], &XTv[0, 0], M, N, m, n, restarts, max_iters,
        <u64>(seed & _PYMASK), &sc.ws,
        <i64*>cnp.PyArray_DATA(rows), <i64*>cnp.PyArray_DATA(cols),
        &total_iters, &rused, False, 0.0,
    )
    return v, rows, cols, int(total_iters), int(rused)


def las_exceeds(X, int m, int n, int restarts, int max_iters, seed,
                double threshold, XT=None):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] Xa = np.ascontiguousarray(
        X, dtype=np.float64
    )
    cdef i64 M = Xa.shape[0], N = Xa.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] XTa
    if XT is None:
        XTa = np.ascontiguousarray(Xa.T)
    else:
        XTa = np.ascontiguousarray(XT, dtype=np.float64)
    cdef _Scratch sc = _Scratch(M, N)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rows = np.empty(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cols = np.empty(n, dtype=np.int64)
    cdef double[:, ::1] Xv = Xa
    cdef double[:, ::1] XTv = XTa
    cdef i64 total_iters = 0
    cdef int rused = 0
    cdef double v = clas_scan(
        &Xv[0, 0], &XTv[0, 0], M, N, m, n, restarts, max_iters,
        <u64>(seed & _PYMASK), &sc.ws,
        <i64*>cnp.PyArray_DATA(rows), <i64*>cnp.PyArray_DATA(cols),
        &total_iters, &rused, True, threshold,
    )
    return v >= threshold


# ------------------------------------------------- sampling w/o replacement #


def without_replacement_means(population, int m, int trials, seed):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vals = np.array(
        population, dtype=np.float64
    )
    cdef i64 J = vals.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(trials, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] jbuf = np.empty(m, dtype=np.int64)
    cdef double[::1] vv = vals
    cdef double[::1] ov = out
    cdef i64[::1] jb = jbuf
    cdef u64 tstate = cderive(<u64>(seed & _PYMASK), D_TRIAL)
    cdef Rng st
    cdef i64 t, i, j
    cdef double acc, tmp
    with nogil:
        for t in range(trials):
            rng_init(&st, cderive(tstate, <u64>t))
            for i in range(m):
                j = i + rng_below(&st, <u64>(J - i))
                jb[i] = j
                tmp = vv[i]
                vv[i] = vv[j]
                vv[j] = tmp
            acc = 0.0
            for i in range(m):
                acc += vv[i]
            ov[t] = acc / m
            for i in range(m - 1, -1, -1):
                j = jb[i]
                tmp = vv[i]
                vv[i] = vv[j]
                vv[j] = tmp
    return out
