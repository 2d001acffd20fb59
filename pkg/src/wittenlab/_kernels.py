"""Hot inner loops of the eigensolver, JIT-compiled when numba is present.

The pure-numpy fallbacks execute the identical arithmetic in the identical
order, so results do not depend on whether the JIT path is active.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:          # pragma: no cover - mirror of the numba path
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def counts_acyclic(diag, off2, lams, floor):
    nb = lams.shape[0]
    n = diag.shape[0]
    out = np.zeros(nb, dtype=np.int64)
    for j in range(nb):
        lam = lams[j]
        d = diag[0] - lam
        cnt = 1 if d < 0.0 else 0
        for i in range(1, n):
            if abs(d) < floor:
                d = -floor if d < 0.0 else floor
            d = (diag[i] - lam) - off2[i - 1] / d
            if d < 0.0:
                cnt += 1
        out[j] = cnt
    return out


@njit(cache=True)
def counts_cyclic(diag, off, lams, corner, floor, clip):
    nb = lams.shape[0]
    n = diag.shape[0]
    out = np.zeros(nb, dtype=np.int64)
    for j in range(nb):
        lam = lams[j]
        d = diag[0] - lam
        last = diag[n - 1] - lam
        b = corner
        cnt = 0
        for i in range(n - 2):
            if d < 0.0:
                cnt += 1
            ds = d
            if abs(ds) < floor:
                ds = -floor if ds < 0.0 else floor
            if b > clip:
                b = clip
            elif b < -clip:
                b = -clip
            corr = b * b / ds
            if corr > clip:
                corr = clip
            elif corr < -clip:
                corr = -clip
            last -= corr
            b_next = -off[i] * b / ds
            if i + 1 == n - 2:
                b_next += off[n - 2]
            d = (diag[i + 1] - lam) - off[i] * off[i] / ds
            b = b_next
        if d < 0.0:
            cnt += 1
        ds = d
        if abs(ds) < floor:
            ds = -floor if ds < 0.0 else floor
        if b > clip:
            b = clip
        elif b < -clip:
            b = -clip
        corr = b * b / ds
        if corr > clip:
            corr = clip
        elif corr < -clip:
            corr = -clip
        last -= corr
        if last < 0.0:
            cnt += 1
        out[j] = cnt
    return out


@njit(cache=True)
def ldl_factor(diag, off, sigma, floor):
    """No-pivot LDL^T of (T - sigma I); returns (d, l, negatives, min_abs_piv)."""
    n = diag.shape[0]
    d = np.empty(n)
    l = np.empty(n - 1)
    d[0] = diag[0] - sigma
    neg = 0
    min_piv = abs(d[0])
    for i in range(n - 1):
        piv = d[i]
        ap = abs(piv)
        if ap < min_piv:
            min_piv = ap
        if ap < floor:
            piv = -floor if piv < 0.0 else floor
            d[i] = piv
        if piv < 0.0:
            neg += 1
        l[i] = off[i] / piv
        d[i + 1] = (diag[i + 1] - sigma) - l[i] * off[i]
    ap = abs(d[n - 1])
    if ap < min_piv:
        min_piv = ap
    if ap < floor:
        d[n - 1] = -floor if d[n - 1] < 0.0 else floor
    if d[n - 1] < 0.0:
        neg += 1
    return d, l, neg, min_piv


@njit(cache=True)
def ldl_solve(d, l, rhs):
    n = d.shape[0]
    y = rhs.copy()
    for i in range(n - 1):
        y[i + 1] -= l[i] * y[i]
    for i in range(n):
        y[i] /= d[i]
    for i in range(n - 2, -1, -1):
        y[i] -= l[i] * y[i + 1]
    return y


if not HAVE_NUMBA:
    # vectorized stand-ins with the same contract (slower, same arithmetic)
    def counts_acyclic(diag, off2, lams, floor):   # noqa: F811
        d = diag[0] - lams
        count = (d < 0).astype(np.int64)
        for i in range(1, len(diag)):
            d = np.where(np.abs(d) < floor, np.where(d < 0, -floor, floor), d)
            d = (diag[i] - lams) - off2[i - 1] / d
            count += d < 0
        return count

    def counts_cyclic(diag, off, lams, corner, floor, clip):   # noqa: F811
        n = len(diag)
        count = np.zeros(len(lams), dtype=np.int64)
        d = diag[0] - lams
        last = diag[n - 1] - lams
        b = np.full(len(lams), corner)
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(n - 2):
                count += d < 0
                ds = np.where(np.abs(d) < floor, np.where(d < 0, -floor, floor), d)
                b = np.clip(b, -clip, clip)
                last = last - np.clip(b * b / ds, -clip, clip)
                b_next = -off[i] * b / ds
                if i + 1 == n - 2:
                    b_next = b_next + off[n - 2]
                d = (diag[i + 1] - lams) - off[i] ** 2 / ds
                b = b_next
            count += d < 0
            ds = np.where(np.abs(d) < floor, np.where(d < 0, -floor, floor), d)
            b = np.clip(b, -clip, clip)
            last = last - np.clip(b * b / ds, -clip, clip)
        count += last < 0
        return count

    def ldl_factor(diag, off, sigma, floor):   # noqa: F811
        n = len(diag)
        d = np.empty(n)
        l = np.empty(n - 1)
        d[0] = diag[0] - sigma
        neg = 0
        min_piv = abs(d[0])
        for i in range(n - 1):
            piv = d[i]
            ap = abs(piv)
            min_piv = min(min_piv, ap)
            if ap < floor:
                piv = -floor if piv < 0 else floor
                d[i] = piv
            if piv < 0:
                neg += 1
            l[i] = off[i] / piv
            d[i + 1] = (diag[i + 1] - sigma) - l[i] * off[i]
        min_piv = min(min_piv, abs(d[n - 1]))
        if abs(d[n - 1]) < floor:
            d[n - 1] = -floor if d[n - 1] < 0 else floor
        if d[n - 1] < 0:
            neg += 1
        return d, l, neg, min_piv

    def ldl_solve(d, l, rhs):   # noqa: F811
        n = len(d)
        y = rhs.astype(float).copy()
        for i in range(n - 1):
            y[i + 1] -= l[i] * y[i]
        y /= d
        for i in range(n - 2, -1, -1):
            y[i] -= l[i] * y[i + 1]
        return y
