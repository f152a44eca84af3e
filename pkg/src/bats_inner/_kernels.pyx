# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: GF(q) row reduction and the batch simulator.

Mirrors ``_kernels_py`` exactly, including the SplitMix64 streams.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, uint32_t
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "compiled"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0

cdef enum:
    XOR_MODE = 0
    PRIME_MODE = 1
    ZECH_MODE = 2


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t derive2(uint64_t master, uint64_t a, uint64_t b) nogil:
    cdef uint64_t h = mix64(master ^ 0x6A09E667F3BCC909ULL)
    h = mix64(h + mix64(a + GOLDEN))
    h = mix64(h + mix64(b + GOLDEN))
    return h


cdef inline uint64_t next_u64(uint64_t* state) nogil:
    state[0] += GOLDEN
    return mix64(state[0])


cdef inline double next_uniform(uint64_t* state) nogil:
    return <double>(next_u64(state) >> 11) * INV_2_53


cdef inline int64_t next_below(uint64_t* state, uint64_t n) nogil:
    cdef uint64_t two32 = 4294967296ULL
    cdef uint64_t limit = two32 - (two32 % n)
    cdef uint64_t u
    while True:
        u = next_u64(state) >> 32
        if u < limit:
            return <int64_t>(u % n)


cdef struct FieldC:
    int mode
    int64_t p
    int64_t q
    int64_t order
    int64_t minus_one
    int64_t* exp
    int64_t* log
    int64_t* zech


cdef inline int64_t f_mul(FieldC* F, int64_t a, int64_t b) nogil:
    if a == 0 or b == 0:
        return 0
    if F.mode == PRIME_MODE:
        return (a * b) % F.p
    return F.exp[F.log[a] + F.log[b]]


cdef inline int64_t f_add(FieldC* F, int64_t a, int64_t b) nogil:
    cdef int64_t la, d, z
    if F.mode == XOR_MODE:
        return a ^ b
    if F.mode == PRIME_MODE:
        return (a + b) % F.p
    if a == 0:
        return b
    if b == 0:
        return a
    la = F.log[a]
    d = (F.log[b] - la) % F.order
    if d < 0:
        d += F.order
    z = F.zech[d]
    if z < 0:
        return 0
    return F.exp[la + z]


cdef inline int64_t f_neg(FieldC* F, int64_t a) nogil:
    if F.mode == XOR_MODE:
        return a
    if F.mode == PRIME_MODE:
        return (F.p - a) % F.p
    return f_mul(F, a, F.minus_one)


cdef inline int64_t f_inv(FieldC* F, int64_t a) nogil:
    return F.exp[(F.order - F.log[a]) % F.order]


cdef int echelon(FieldC* F, int64_t* mat, int n_rows, int n_cols, int stride) nogil:
    """Row-reduce an ``n_rows x n_cols`` block (row stride ``stride``); return its rank.

    The first ``rank`` rows are left holding a basis of the row space.
    """
    cdef int r = 0, c, i, j, piv
    cdef int64_t inv, f, tmp
    cdef int64_t* prow
    cdef int64_t* row
    for c in range(n_cols):
        if r == n_rows:
            break
        piv = -1
        for i in range(r, n_rows):
            if mat[i * stride + c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(n_cols):
                tmp = mat[r * stride + j]
                mat[r * stride + j] = mat[piv * stride + j]
                mat[piv * stride + j] = tmp
        prow = mat + r * stride
        inv = f_inv(F, prow[c])
        for j in range(n_cols):
            prow[j] = f_mul(F, inv, prow[j])
        for i in range(r + 1, n_rows):
            row = mat + i * stride
            f = row[c]
            if f != 0:
                f = f_neg(F, f)
                for j in range(c, n_cols):
                    if prow[j] != 0:
                        row[j] = f_add(F, row[j], f_mul(F, f, prow[j]))
        r += 1
    return r


cdef class _FieldHolder:
    cdef FieldC f
    cdef object keep

    def __init__(self, F):
        cdef cnp.int64_t[::1] exp_v, log_v, zech_v
        exp_arr = np.ascontiguousarray(F.exp, dtype=np.int64)
        log_arr = np.ascontiguousarray(F.log, dtype=np.int64)
        if F.p == 2:
            self.f.mode = XOR_MODE
            zech_arr = np.zeros(1, dtype=np.int64)
        elif F.m == 1:
            self.f.mode = PRIME_MODE
            zech_arr = np.zeros(1, dtype=np.int64)
        else:
            self.f.mode = ZECH_MODE
            zech_arr = np.ascontiguousarray(F.kernel_zech(), dtype=np.int64)
        self.keep = (exp_arr, log_arr, zech_arr)
        exp_v = exp_arr
        log_v = log_arr
        zech_v = zech_arr
        self.f.p = F.p
        self.f.q = F.q
        self.f.order = F.q - 1
        self.f.minus_one = F.minus_one
        self.f.exp = &exp_v[0]
        self.f.log = &log_v[0]
        self.f.zech = &zech_v[0]


def gf_rank(mat, F):
    cdef _FieldHolder H = _FieldHolder(F)
    arr = np.array(mat, dtype=np.int64, order="C", copy=True)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        return 0
    cdef cnp.int64_t[:, ::1] a = arr
    return echelon(&H.f, &a[0, 0], a.shape[0], a.shape[1], a.shape[1])


def simulate_block(F, t, eps, int M, master, long long start, long long count):
    cdef _FieldHolder H = _FieldHolder(F)
    cdef FieldC* fc = &H.f
    t_arr = np.ascontiguousarray(t, dtype=np.int64)
    e_arr = np.ascontiguousarray(eps, dtype=np.float64)
    cdef cnp.int64_t[::1] tv = t_arr
    cdef double[::1] ev = e_arr
    cdef int l = tv.shape[0]
    cdef int width = M
    cdef int k
    for k in range(l):
        if tv[k] > width:
            width = <int>tv[k]
    ranks_arr = np.zeros(count, dtype=np.int64)
    reached_arr = np.zeros(count, dtype=np.int64)
    cdef cnp.int64_t[::1] ranks = ranks_arr
    cdef cnp.int64_t[::1] reached = reached_arr
    cdef uint64_t m64 = <uint64_t>(int(master) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t q = <uint64_t>F.q

    cdef int64_t* basis = <int64_t*>malloc(sizeof(int64_t) * M * width)
    cdef int64_t* newm = <int64_t*>malloc(sizeof(int64_t) * M * width)
    cdef int64_t* phi = <int64_t*>malloc(sizeof(int64_t) * width * width)
    cdef int* recv = <int*>malloc(sizeof(int) * width)
    cdef int64_t* swap
    cdef long long b
    cdef uint64_t loss_state, code_state
    cdef int r, c, n, hops, tk, i, j, s, jj
    cdef double ek
    cdef int64_t acc, a
    if basis == NULL or newm == NULL or phi == NULL or recv == NULL:
        free(basis); free(newm); free(phi); free(recv)
        raise MemoryError()
    try:
        with nogil:
            for b in range(count):
                loss_state = derive2(m64, <uint64_t>(start + b), 0)
                code_state = derive2(m64, <uint64_t>(start + b), 1)
                for i in range(M):
                    for j in range(M):
                        basis[i * width + j] = 1 if i == j else 0
                r = M
                c = M
                hops = 0
                for k in range(l):
                    tk = <int>tv[k]
                    ek = ev[k]
                    n = 0
                    for j in range(tk):
                        if not (next_uniform(&loss_state) < ek):
                            recv[n] = j
                            n += 1
                    if n == 0:
                        r = 0
                        break
                    hops += 1
                    if r == 0:
                        c = n
                        continue
                    for s in range(c):
                        for j in range(tk):
                            phi[s * width + j] = next_below(&code_state, q)
                    for i in range(r):
                        for jj in range(n):
                            j = recv[jj]
                            acc = 0
                            for s in range(c):
                                a = basis[i * width + s]
                                if a != 0:
                                    acc = f_add(fc, acc, f_mul(fc, a, phi[s * width + j]))
                            newm[i * width + jj] = acc
                    r = echelon(fc, newm, r, n, width)
                    c = n
                    swap = basis
                    basis = newm
                    newm = swap
                ranks[b] = r
                reached[b] = hops
    finally:
        free(basis); free(newm); free(phi); free(recv)
    return ranks_arr, reached_arr
