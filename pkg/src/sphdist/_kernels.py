"""Compiled pairwise kernels.

Every kernel walks rows ``r0 <= i < r1`` and columns ``j > i`` in index
order, so the work for a row block is a pure function of the block bounds.
Callers split the rows into fixed blocks and reduce block results in block
order, which keeps results independent of how many threads ran the blocks.
"""

import numpy as np
from numba import njit

KEY_SCALE = 1e12

_EMPTY = np.iinfo(np.int64).min


@njit(cache=True, nogil=True)
def _dot(P, i, j):
    return P[i, 0] * P[j, 0] + P[i, 1] * P[j, 1] + P[i, 2] * P[j, 2]


@njit(cache=True, nogil=True)
def angle(P, i, j):
    cx = P[i, 1] * P[j, 2] - P[i, 2] * P[j, 1]
    cy = P[i, 2] * P[j, 0] - P[i, 0] * P[j, 2]
    cz = P[i, 0] * P[j, 1] - P[i, 1] * P[j, 0]
    return np.arctan2(np.sqrt(cx * cx + cy * cy + cz * cz), _dot(P, i, j))


@njit(cache=True, nogil=True)
def chord(P, i, j):
    dx = P[i, 0] - P[j, 0]
    dy = P[i, 1] - P[j, 1]
    dz = P[i, 2] - P[j, 2]
    return np.sqrt(dx * dx + dy * dy + dz * dz)


@njit(cache=True, nogil=True)
def dot_keys(P, r0, r1, out):
    """Fill ``out`` with rounded dot-product keys of the pairs i < j."""
    n = P.shape[0]
    k = 0
    for i in range(r0, r1):
        for j in range(i + 1, n):
            out[k] = np.int64(np.rint(_dot(P, i, j) * KEY_SCALE))
            k += 1
    return k


@njit(cache=True, nogil=True)
def pair_dots(P, r0, r1, out):
    """Fill ``out`` with the dot products of the pairs i < j, rows [r0, r1)."""
    n = P.shape[0]
    k = 0
    for i in range(r0, r1):
        for j in range(i + 1, n):
            out[k] = _dot(P, i, j)
            k += 1
    return k


@njit(cache=True, nogil=True)
def sorted_key_runs(dots):
    """Distinct keys of sorted dot products, their counts and first dots."""
    n = dots.shape[0]
    keys = np.empty(n, dtype=np.int64)
    counts = np.empty(n, dtype=np.int64)
    firsts = np.empty(n)
    m = -1
    prev = _EMPTY
    for k in range(n):
        key = np.int64(np.rint(dots[k] * KEY_SCALE))
        if key != prev:
            m += 1
            keys[m] = key
            counts[m] = 0
            firsts[m] = dots[k]
            prev = key
        counts[m] += 1
    return keys[: m + 1].copy(), counts[: m + 1].copy(), firsts[: m + 1].copy()


@njit(cache=True, nogil=True)
def _slot(key, mask):
    h = np.uint64(key) * np.uint64(0x9E3779B97F4A7C15)
    return np.int64(h >> np.uint64(20)) & mask


@njit(cache=True, nogil=True)
def _insert(keys, counts, mins, key, add, d):
    mask = keys.shape[0] - 1
    s = _slot(key, mask)
    while True:
        kk = keys[s]
        if kk == key:
            counts[s] += add
            # branch-free: near-tied dots make this comparison unpredictable
            mins[s] = min(mins[s], d)
            return 0
        if kk == _EMPTY:
            keys[s] = key
            counts[s] = add
            mins[s] = d
            return 1
        s = (s + 1) & mask


@njit(cache=True, nogil=True)
def hash_dot_keys(P, r0, r1, keys, counts, mins, used):
    """Count dot keys of rows [r0, r1) into an open-addressing table.

    ``mins`` keeps the smallest dot product seen under each key. Stops at a row boundary once the table is half full and returns the next
    unprocessed row together with the new occupancy.
    """
    n = P.shape[0]
    limit = keys.shape[0] // 2
    for i in range(r0, r1):
        if used + (n - i - 1) > limit:
            return i, used
        for j in range(i + 1, n):
            d = _dot(P, i, j)
            key = np.int64(np.rint(d * KEY_SCALE))
            used += _insert(keys, counts, mins, key, 1, d)
    return r1, used


@njit(cache=True, nogil=True)
def rehash(keys, counts, mins, new_size):
    nk = np.full(new_size, _EMPTY, dtype=np.int64)
    nc = np.zeros(new_size, dtype=np.int64)
    nm = np.empty(new_size)
    for s in range(keys.shape[0]):
        if keys[s] != _EMPTY:
            _insert(nk, nc, nm, keys[s], counts[s], mins[s])
    return nk, nc, nm


@njit(cache=True, nogil=True)
def energy_rows(P, r0, r1, beta, chordal):
    """Neumaier-compensated sum of dist**(-beta) over pairs i < j.

    Returns (sum, compensation, i, j); i >= 0 flags a zero-distance pair.
    """
    n = P.shape[0]
    s = 0.0
    c = 0.0
    for i in range(r0, r1):
        for j in range(i + 1, n):
            if chordal:
                d = chord(P, i, j)
            else:
                d = angle(P, i, j)
            if d == 0.0:
                return s, c, i, j
            if beta == 1.0:
                v = 1.0 / d
            elif beta == 0.0:
                v = 1.0
            else:
                v = d ** (-beta)
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
    return s, c, -1, -1


@njit(cache=True, nogil=True)
def angles_upper(P):
    n = P.shape[0]
    out = np.empty(n * (n - 1) // 2)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            out[k] = angle(P, i, j)
            k += 1
    return out


@njit(cache=True, nogil=True)
def min_angle(P):
    n = P.shape[0]
    best = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            a = angle(P, i, j)
            if a < best:
                best = a
    return best


@njit(cache=True, nogil=True)
def pair_histogram(X, Y, W, pairs, lo, width, nbins, chordal, out):
    """Accumulate the pushforward of cap-pair node weights into ``out``.

    ``X`` and ``Y`` hold the first- and second-factor quadrature nodes of
    every cap, shape (caps, nodes, 3); ``W`` the shared node weights.
    ``pairs`` rows are (a, b, multiplicity).
    """
    m = X.shape[1]
    for p in range(pairs.shape[0]):
        a = pairs[p, 0]
        b = pairs[p, 1]
        mult = pairs[p, 2]
        for k in range(m):
            xk0 = X[a, k, 0]
            xk1 = X[a, k, 1]
            xk2 = X[a, k, 2]
            wk = W[a, k] * mult
            for l in range(m):
                t = xk0 * Y[b, l, 0] + xk1 * Y[b, l, 1] + xk2 * Y[b, l, 2]
                if t > 1.0:
                    t = 1.0
                elif t < -1.0:
                    t = -1.0
                if chordal:
                    t = np.sqrt(2.0 - 2.0 * t)
                idx = np.int64(np.floor((t - lo) / width))
                if idx < 0:
                    idx = 0
                elif idx >= nbins:
                    idx = nbins - 1
                out[idx] += wk * W[b, l]


@njit(cache=True, nogil=True)
def _cell(p, origin, h, dims):
    ix = np.int64((p[0] - origin[0]) / h)
    iy = np.int64((p[1] - origin[1]) / h)
    iz = np.int64((p[2] - origin[2]) / h)
    ix = min(max(ix, 0), dims[0] - 1)
    iy = min(max(iy, 0), dims[1] - 1)
    iz = min(max(iz, 0), dims[2] - 1)
    return ix, iy, iz


@njit(cache=True, nogil=True)
def dart_throw(C, sep, origin, h, dims, head, nxt, pts, count, fails, stop_factor):
    """Sequential dart throwing over candidate rows of ``C``.

    A candidate is accepted when its angular distance to every accepted
    point is >= ``sep``; neighbours are found in a dense uniform grid of
    cell size ``h`` >= chord(sep). Returns (consumed, count, fails, done).
    ``done`` is 1 when the consecutive-failure budget ran out and 2 when
    the point buffer is full.
    """
    cap = pts.shape[0]
    for c in range(C.shape[0]):
        if fails >= stop_factor * max(count, 1):
            return c, count, fails, 1
        if count >= cap:
            return c, count, fails, 2
        ix, iy, iz = _cell(C[c], origin, h, dims)
        ok = True
        for dx in range(-1, 2):
            jx = ix + dx
            if jx < 0 or jx >= dims[0]:
                continue
            for dy in range(-1, 2):
                jy = iy + dy
                if jy < 0 or jy >= dims[1]:
                    continue
                for dz in range(-1, 2):
                    jz = iz + dz
                    if jz < 0 or jz >= dims[2]:
                        continue
                    q = head[(jx * dims[1] + jy) * dims[2] + jz]
                    while q >= 0:
                        cx = C[c, 1] * pts[q, 2] - C[c, 2] * pts[q, 1]
                        cy = C[c, 2] * pts[q, 0] - C[c, 0] * pts[q, 2]
                        cz = C[c, 0] * pts[q, 1] - C[c, 1] * pts[q, 0]
                        d = C[c, 0] * pts[q, 0] + C[c, 1] * pts[q, 1] + C[c, 2] * pts[q, 2]
                        if np.arctan2(np.sqrt(cx * cx + cy * cy + cz * cz), d) < sep:
                            ok = False
                            break
                        q = nxt[q]
                    if not ok:
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            pts[count, 0] = C[c, 0]
            pts[count, 1] = C[c, 1]
            pts[count, 2] = C[c, 2]
            flat = (ix * dims[1] + iy) * dims[2] + iz
            nxt[count] = head[flat]
            head[flat] = count
            count += 1
            fails = 0
        else:
            fails += 1
    return C.shape[0], count, fails, 0
