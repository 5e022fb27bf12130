"""Compiled inner loops for the ball-pair scans."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def pair_grid_kernel(D, below, ecc, x, y):
    """Eccentricity data of ``B(x, s) ∩ B(y, t)`` for all realized ``s, t``.

    ``below[c, p]`` is the largest distance realized from ``c`` strictly below
    ``d(c, p)`` (-1 if none) and ``ecc[c]`` the largest distance from ``c``.
    The inradius at ``c`` is the minimum of ``below[c, p]`` over points ``p``
    outside the set (``ecc[c]`` if there are none); a center outside the set
    meets itself and scores -1. Ties go to the smallest center index.
    """
    n = D.shape[0]
    sx = np.unique(D[x])
    ty = np.unique(D[y])
    A = sx.shape[0]
    B = ty.shape[0]
    ix = np.searchsorted(sx, D[x])
    iy = np.searchsorted(ty, D[y])

    count = np.zeros((A, B), dtype=np.int64)
    for p in range(n):
        count[ix[p], iy[p]] += 1
    for a in range(A):
        for b in range(1, B):
            count[a, b] += count[a, b - 1]
    for a in range(1, A):
        for b in range(B):
            count[a, b] += count[a - 1, b]

    big = np.int64(1) << 62
    circ = np.full((A, B), big, dtype=np.int64)
    cc = np.zeros((A, B), dtype=np.int64)
    inrad = np.full((A, B), -1, dtype=np.int64)
    ic = np.zeros((A, B), dtype=np.int64)
    G = np.empty((A, B), dtype=np.int64)
    hx = np.empty(A, dtype=np.int64)
    hy = np.empty(B, dtype=np.int64)

    for c in range(n):
        G[:, :] = -1
        hx[:] = ecc[c]
        hy[:] = ecc[c]
        for p in range(n):
            a = ix[p]
            b = iy[p]
            if D[c, p] > G[a, b]:
                G[a, b] = D[c, p]
            # points with ix == a lie outside every set with row index < a
            if a > 0 and below[c, p] < hx[a - 1]:
                hx[a - 1] = below[c, p]
            if b > 0 and below[c, p] < hy[b - 1]:
                hy[b - 1] = below[c, p]
        for a in range(A - 2, -1, -1):
            if hx[a + 1] < hx[a]:
                hx[a] = hx[a + 1]
        for b in range(B - 2, -1, -1):
            if hy[b + 1] < hy[b]:
                hy[b] = hy[b + 1]
        for a in range(A):
            for b in range(B):
                g = G[a, b]
                if b > 0 and G[a, b - 1] > g:
                    g = G[a, b - 1]
                if a > 0 and G[a - 1, b] > g:
                    g = G[a - 1, b]
                G[a, b] = g
                if count[a, b] > 0:
                    if g < circ[a, b]:
                        circ[a, b] = g
                        cc[a, b] = c
                    v = hx[a] if hx[a] < hy[b] else hy[b]
                    if v > inrad[a, b]:
                        inrad[a, b] = v
                        ic[a, b] = c
    for a in range(A):
        for b in range(B):
            if count[a, b] == 0:
                circ[a, b] = -1
                inrad[a, b] = -1
    return sx, ix, ty, iy, count, inrad, ic, circ, cc
