# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: Gray-code Ryser and contingency-table summation.

Both kernels process one partition of their iteration space and return
partial results that the Python layer merges in a fixed order, so the
answer does not depend on how many threads ran the partitions.
"""

from libc.math cimport exp, INFINITY, fabs
import numpy as np

BACKEND = "compiled"

DEF MAXN = 64
DEF MAXM = 16
DEF MAXF = 225


cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil
    int __builtin_popcountll(unsigned long long) nogil


# ---------------------------------------------------------------- double-double

cdef inline void _two_sum(double a, double b, double* s, double* e) noexcept nogil:
    cdef double ss = a + b
    cdef double bb = ss - a
    e[0] = (a - (ss - bb)) + (b - bb)
    s[0] = ss


cdef inline void _two_prod(double a, double b, double* p, double* e) noexcept nogil:
    cdef double pp = a * b
    cdef double c = 134217729.0 * a
    cdef double ah = c - (c - a)
    cdef double al = a - ah
    c = 134217729.0 * b
    cdef double bh = c - (c - b)
    cdef double bl = b - bh
    e[0] = ((ah * bh - pp) + ah * bl + al * bh) + al * bl
    p[0] = pp


cdef inline void _dd_add(double* xh, double* xl, double yh, double yl) noexcept nogil:
    cdef double s, e
    _two_sum(xh[0], yh, &s, &e)
    e += xl[0] + yl
    xh[0] = s + e
    xl[0] = e - (xh[0] - s)


cdef inline void _dd_mul(double* xh, double* xl, double yh, double yl) noexcept nogil:
    cdef double p, e
    _two_prod(xh[0], yh, &p, &e)
    e += xh[0] * yl + xl[0] * yh
    xh[0] = p + e
    xl[0] = e - (xh[0] - p)


# ---------------------------------------------------------------- Ryser

def ryser_tasks(int n):
    """Split Gray-code indices ``1 .. 2**n - 1`` into at most 64 ranges."""
    cdef unsigned long long total = (1ULL << n) - 1
    cdef unsigned long long parts = min(total, 64ULL)
    cdef unsigned long long step = total // parts
    bounds = [1 + i * step for i in range(parts)] + [total + 1]
    return [(bounds[i], bounds[i + 1]) for i in range(parts)]


def ryser_task(const double[:, ::1] a, task):
    """Signed Ryser sum over Gray-code indices ``start <= k < stop``.

    Returns the partial sum as a double-double ``(hi, lo)`` pair.
    """
    cdef int n = a.shape[0]
    cdef unsigned long long start = task[0]
    cdef unsigned long long stop = task[1]
    cdef double rh[MAXN]
    cdef double rl[MAXN]
    cdef double th = 0.0, tl = 0.0, ph, pl, x
    cdef unsigned long long k, g, prev
    cdef int i, j
    if n > MAXN - 1:
        raise ValueError("dimension too large for the compiled Ryser kernel")
    with nogil:
        for i in range(n):
            rh[i] = 0.0
            rl[i] = 0.0
        prev = (start - 1) ^ ((start - 1) >> 1)
        for j in range(n):
            if prev & (1ULL << j):
                for i in range(n):
                    _dd_add(&rh[i], &rl[i], a[i, j], 0.0)
        for k in range(start, stop):
            g = k ^ (k >> 1)
            j = __builtin_ctzll(g ^ prev)
            if g & (1ULL << j):
                for i in range(n):
                    _dd_add(&rh[i], &rl[i], a[i, j], 0.0)
            else:
                for i in range(n):
                    _dd_add(&rh[i], &rl[i], -a[i, j], 0.0)
            prev = g
            ph = rh[0]
            pl = rl[0]
            for i in range(1, n):
                _dd_mul(&ph, &pl, rh[i], rl[i])
            if (n - __builtin_popcountll(g)) & 1:
                _dd_add(&th, &tl, -ph, -pl)
            else:
                _dd_add(&th, &tl, ph, pl)
    return th, tl


# ---------------------------------------------------------------- tables

cdef inline double _wlog(int x, double lb, const double* lf) noexcept nogil:
    # -ln(x!) + x ln b, with 0 * ln 0 treated as 0
    if x == 0:
        return 0.0
    return x * lb - lf[x]


def table_partition(int m, int n, const double[:, ::1] logb, const double[::1] lf, int first):
    """Log-sum-exp of ``sum(q ln b) - sum(ln q!)`` over tables with ``q[0,0] == first``.

    Only the ``(m-1)**2`` free entries are searched; the last row and column
    are forced by the margins. Returns ``(shift, scaled_sum, count,
    best_term, best_free)`` where the partition's log-sum equals
    ``shift + ln(scaled_sum)``.
    """
    cdef int k = m - 1
    cdef int nf = k * k
    cdef int target = (m - 2) * n
    cdef int q[MAXF]
    cdef int lo[MAXF]
    cdef int hi[MAXF]
    cdef int best[MAXF]
    cdef double part[MAXF + 1]
    cdef int rowfree[MAXM]
    cdef int colfree[MAXM]
    cdef double lb[MAXM * MAXM]
    cdef int c, r, s, i, total = 0, capc, capr, qlo, qhi
    cdef bint fresh = 1
    cdef double term, mx = -INFINITY, acc = 0.0, comp = 0.0, x, t, scale
    cdef double best_term = -INFINITY
    cdef long long count = 0
    cdef const double* lfp = &lf[0]

    if m < 2 or m > MAXM or nf > MAXF:
        raise ValueError("table_partition needs 2 <= m <= 16")
    if lf.shape[0] < n + 1:
        raise ValueError("log-factorial table too short")
    for r in range(m):
        for s in range(m):
            lb[r * m + s] = logb[r, s]
    for r in range(k):
        rowfree[r] = 0
        colfree[r] = 0
    part[0] = 0.0
    for i in range(nf):
        best[i] = 0

    with nogil:
        c = 0
        while c >= 0:
            r = c // k
            s = c % k
            if fresh:
                qhi = n - rowfree[r]
                if n - colfree[s] < qhi:
                    qhi = n - colfree[s]
                capc = 0
                for i in range(k):
                    capc += n - colfree[i]
                if s == k - 1:
                    capr = (k - 1 - r) * n
                    qlo = target - total - capr
                    if qlo < 0:
                        qlo = 0
                    if total + capc < target:
                        qlo = qhi + 1
                else:
                    capr = (n - rowfree[r]) + (k - 1 - r) * n
                    qlo = 0
                    if total + (capr if capr < capc else capc) < target:
                        qlo = qhi + 1
                if c == 0:
                    if first < qlo or first > qhi:
                        qlo = 1
                        qhi = 0
                    else:
                        qlo = first
                        qhi = first
                lo[c] = qlo
                hi[c] = qhi
                if qlo > qhi:
                    fresh = 0
                    c -= 1
                    continue
                q[c] = qlo
            else:
                rowfree[r] -= q[c]
                colfree[s] -= q[c]
                total -= q[c]
                q[c] += 1
                if q[c] > hi[c]:
                    c -= 1
                    continue
            rowfree[r] += q[c]
            colfree[s] += q[c]
            total += q[c]
            part[c + 1] = part[c] + _wlog(q[c], lb[r * m + s], lfp)

            if c < nf - 1:
                c += 1
                fresh = 1
                continue

            # leaf: complete the forced last column, last row and corner
            term = part[nf]
            for i in range(k):
                term += _wlog(n - rowfree[i], lb[i * m + k], lfp)
                term += _wlog(n - colfree[i], lb[k * m + i], lfp)
            term += _wlog(total - target, lb[k * m + k], lfp)
            count += 1
            fresh = 0
            if term == -INFINITY:
                continue
            if term > mx:
                scale = exp(mx - term)
                acc *= scale
                comp *= scale
                mx = term
                x = 1.0
            else:
                x = exp(term - mx)
            t = acc + x
            if fabs(acc) >= fabs(x):
                comp += (acc - t) + x
            else:
                comp += (x - t) + acc
            acc = t
            if term > best_term:
                best_term = term
                for i in range(nf):
                    best[i] = q[i]

    return mx, acc + comp, count, best_term, tuple(best[i] for i in range(nf))
