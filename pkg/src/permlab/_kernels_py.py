"""Pure-Python fallback for the compiled kernels in ``_kernels.pyx``.

Same call signatures and return conventions; partitions differ, which is
fine because every caller merges partials without assuming a layout.
Ryser runs in numpy long double with the column set split into a low
half (tabulated once) and a high half (one vectorised pass per mask).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_LOW_BITS = 12
_MAX_TASKS = 64


def ryser_tasks(n):
    low = min(n, _LOW_BITS)
    high_count = 1 << (n - low)
    parts = min(high_count, _MAX_TASKS)
    step = high_count // parts
    bounds = [i * step for i in range(parts)] + [high_count]
    return [(bounds[i], bounds[i + 1]) for i in range(parts)]


def _low_table(a, low):
    n = a.shape[0]
    table = np.zeros((1 << low, n), dtype=np.longdouble)
    for b in range(low):
        size = 1 << b
        table[size : 2 * size] = table[:size] + a[:, b]
    parity = np.zeros(1 << low, dtype=np.int64)
    for b in range(low):
        size = 1 << b
        parity[size : 2 * size] = parity[:size] ^ 1
    return table, parity


def ryser_task(a, task):
    a = np.asarray(a, dtype=np.longdouble)
    n = a.shape[0]
    low = min(n, _LOW_BITS)
    table, parity = _low_table(a, low)
    high_cols = a[:, low:]
    high_bits = n - low
    total = np.longdouble(0.0)
    comp = np.longdouble(0.0)
    for h in range(task[0], task[1]):
        mask = np.array([(h >> b) & 1 for b in range(high_bits)], dtype=np.longdouble)
        base = high_cols @ mask if high_bits else np.zeros(n, dtype=np.longdouble)
        prods = np.prod(table + base, axis=1)
        # sign (-1)^(n - |S|)
        odd = (parity + bin(h).count("1") + n) & 1
        x = np.sum(np.where(odd == 1, -prods, prods))
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    total = total + comp
    hi = float(total)
    lo = float(total - np.longdouble(hi))
    return hi, lo


def _wlog(x, lb, lf):
    x = np.asarray(x)
    with np.errstate(invalid="ignore"):
        val = np.where(x > 0, x * lb, 0.0)
    return val - lf[x]


def table_partition(m, n, logb, lf, first):
    k = m - 1
    nf = k * k
    target = (m - 2) * n
    logb = np.asarray(logb, dtype=np.float64)
    lf = np.asarray(lf, dtype=np.float64)
    if m < 2:
        raise ValueError("table_partition needs m >= 2")

    rowfree = [0] * k
    colfree = [0] * k
    q = [0] * nf
    state = {"mx": -math.inf, "acc": 0.0, "comp": 0.0, "count": 0,
             "best_term": -math.inf, "best": (0,) * nf}

    def bounds(c, total):
        r, s = divmod(c, k)
        qhi = min(n - rowfree[r], n - colfree[s])
        capc = sum(n - x for x in colfree)
        if s == k - 1:
            capr = (k - 1 - r) * n
            qlo = max(0, target - total - capr)
            if total + capc < target:
                return 1, 0
        else:
            capr = (n - rowfree[r]) + (k - 1 - r) * n
            qlo = 0
            if total + min(capr, capc) < target:
                return 1, 0
        if c == 0:
            if first < qlo or first > qhi:
                return 1, 0
            return first, first
        return qlo, qhi

    def leaf_block(qs, part, total):
        # qs: candidate values of the last free cell (k-1, k-1)
        r = s = k - 1
        terms = part + _wlog(qs, logb[r, s], lf)
        for i in range(k):
            extra = qs if i == r else 0
            terms = terms + _wlog(n - rowfree[i] - extra, logb[i, k], lf)
            terms = terms + _wlog(n - colfree[i] - extra, logb[k, i], lf)
        terms = terms + _wlog(total + qs - target, logb[k, k], lf)
        state["count"] += qs.size
        finite = terms[np.isfinite(terms)]
        if finite.size == 0:
            return
        top = float(finite.max())
        if top > state["mx"]:
            scale = math.exp(state["mx"] - top)
            state["acc"] *= scale
            state["comp"] *= scale
            state["mx"] = top
        x = float(np.sum(np.exp(finite - state["mx"])))
        acc = state["acc"]
        t = acc + x
        if abs(acc) >= abs(x):
            state["comp"] += (acc - t) + x
        else:
            state["comp"] += (x - t) + acc
        state["acc"] = t
        j = int(np.argmax(terms))
        if terms[j] > state["best_term"]:
            state["best_term"] = float(terms[j])
            q[nf - 1] = int(qs[j])
            state["best"] = tuple(q)

    def walk(c, part, total):
        lo, hi = bounds(c, total)
        if lo > hi:
            return
        r, s = divmod(c, k)
        if c == nf - 1:
            leaf_block(np.arange(lo, hi + 1), part, total)
            return
        for v in range(lo, hi + 1):
            q[c] = v
            rowfree[r] += v
            colfree[s] += v
            walk(c + 1, part + float(_wlog(v, logb[r, s], lf)), total + v)
            rowfree[r] -= v
            colfree[s] -= v

    walk(0, 0.0, 0)
    return (state["mx"], state["acc"] + state["comp"], state["count"],
            state["best_term"], state["best"])
