"""Compiled kernels for the implicit Vietoris-Rips H1 computation.

Triangles are never materialised.  A triangle ``a < b < c`` is encoded as a
single int64 key ``rank * n**3 + (a * n + b) * n + c`` where ``rank`` is the
position of its filtration value among the distinct edge values.  Integer
order on keys is exactly the canonical (value, dim, lex) order restricted to
triangles.
"""

import numpy as np
from numba import njit, types
from numba.typed import Dict


@njit(cache=True)
def h0_death_mask(n, edge_i, edge_j):
    """Kruskal pass: True for edges that merge two components."""
    parent = np.arange(n)
    merged = np.zeros(edge_i.shape[0], dtype=np.bool_)
    for e in range(edge_i.shape[0]):
        a = edge_i[e]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = edge_j[e]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            merged[e] = True
    return merged


@njit(cache=True)
def triangle_key(a, b, c, r, n):
    return r * n * n * n + (a * n + b) * n + c


@njit(cache=True)
def sorted_triple(i, j, k):
    # requires i < j
    if k < i:
        return k, i, j
    if k < j:
        return i, k, j
    return i, j, k


@njit(cache=True)
def neighbor_lists(n, edge_i, edge_j):
    """Per vertex, its neighbours in edge order, hence sorted by edge rank."""
    count = np.zeros(n, dtype=np.int64)
    for e in range(edge_i.shape[0]):
        count[edge_i[e]] += 1
        count[edge_j[e]] += 1
    order = np.empty((n, max(n - 1, 1)), dtype=np.int64)
    fill = np.zeros(n, dtype=np.int64)
    for e in range(edge_i.shape[0]):
        i = edge_i[e]
        j = edge_j[e]
        order[i, fill[i]] = j
        fill[i] += 1
        order[j, fill[j]] = i
        fill[j] += 1
    return order, count


@njit(cache=True)
def _push(keys, tags, size, key, tag):
    if size == keys.shape[0]:
        k2 = np.empty(2 * size, dtype=np.int64)
        t2 = np.empty(2 * size, dtype=np.int64)
        k2[:size] = keys[:size]
        t2[:size] = tags[:size]
        keys = k2
        tags = t2
    pos = size
    keys[pos] = key
    tags[pos] = tag
    while pos > 0:
        parent = (pos - 1) >> 1
        if keys[parent] <= keys[pos]:
            break
        keys[parent], keys[pos] = keys[pos], keys[parent]
        tags[parent], tags[pos] = tags[pos], tags[parent]
        pos = parent
    return keys, tags, size + 1


@njit(cache=True)
def _pop(keys, tags, size):
    key = keys[0]
    tag = tags[0]
    size -= 1
    keys[0] = keys[size]
    tags[0] = tags[size]
    pos = 0
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        if child + 1 < size and keys[child + 1] < keys[child]:
            child += 1
        if keys[pos] <= keys[child]:
            break
        keys[pos], keys[child] = keys[child], keys[pos]
        tags[pos], tags[child] = tags[child], tags[pos]
        pos = child
    return key, tag, size


@njit(cache=True)
def _expand(s, st_i, st_j, st_r, st_pi, st_pj, order, count, rank, n, keys, tags, size, group):
    """Emit the next equal-value group of cofacets of stream ``s``.

    A stream walks the rank-sorted neighbour lists of both endpoints.  Apex
    ``k`` completes a triangle once both of its edges have been passed; the
    first group gathers every apex at or below the edge's own rank.  After the
    group a marker keyed just below the next possible value is pushed, so the
    stream is resumed before anything of larger value surfaces.
    """
    i = st_i[s]
    j = st_j[s]
    r = st_r[s]
    pi = st_pi[s]
    pj = st_pj[s]
    ci = count[i]
    cj = count[j]
    big = np.iinfo(np.int64).max
    hi = rank[i, order[i, pi]] if pi < ci else big
    hj = rank[j, order[j, pj]] if pj < cj else big
    v = hi if hi < hj else hj
    if v == big:
        return keys, tags, size
    if v < r:
        v = r
    m = 0
    while pi < ci:
        k = order[i, pi]
        rik = rank[i, k]
        if rik > v:
            break
        pi += 1
        if k == j:
            continue
        rjk = rank[j, k]
        if rjk >= 0 and rjk <= v:
            group[m] = k
            m += 1
    while pj < cj:
        k = order[j, pj]
        rjk = rank[j, k]
        if rjk > v:
            break
        pj += 1
        if k == i:
            continue
        rik = rank[i, k]
        # apexes whose other edge also sits at v were taken from i's list
        if rik >= 0 and rik < v and rjk == v and v > r:
            group[m] = k
            m += 1
    st_pi[s] = pi
    st_pj[s] = pj
    grp = np.sort(group[:m])
    n3 = n * n * n
    for q in range(m):
        a, b, c = sorted_triple(i, j, grp[q])
        keys, tags, size = _push(keys, tags, size, triangle_key(a, b, c, v, n), -1)
    hi = rank[i, order[i, pi]] if pi < ci else big
    hj = rank[j, order[j, pj]] if pj < cj else big
    nxt = hi if hi < hj else hj
    if nxt != big:
        keys, tags, size = _push(keys, tags, size, nxt * n3 - 1, s)
    return keys, tags, size


@njit(cache=True)
def _cancel_pairs(chain):
    # numba's quicksort degrades on presorted runs; merge sort does not
    chain = chain[np.argsort(chain, kind="mergesort")]
    out = np.empty(chain.shape[0], dtype=np.int64)
    m = 0
    p = 0
    while p < chain.shape[0]:
        q = p
        while q < chain.shape[0] and chain[q] == chain[p]:
            q += 1
        if (q - p) % 2 == 1:
            out[m] = chain[p]
            m += 1
        p = q
    return out[:m]


@njit(cache=True)
def _table_new(expected):
    cap = 16
    while cap < 2 * expected:
        cap *= 2
    keys = np.full(cap, -1, dtype=np.int64)
    vals = np.empty(cap, dtype=np.int64)
    return keys, vals


@njit(cache=True)
def _slot(keys, key):
    mask = np.uint64(keys.shape[0] - 1)
    # keys often differ only above bit 27, so fold the high product bits down
    h = np.uint64(key) * np.uint64(0x9E3779B97F4A7C15)
    h ^= h >> np.uint64(32)
    p = np.int64(h & mask)
    while keys[p] != -1 and keys[p] != key:
        p = (p + 1) & mask
    return p


@njit(cache=True)
def _table_get(keys, vals, key):
    """Owner of a pivot, or -1.  Open addressing; keys are never removed."""
    p = _slot(keys, key)
    if keys[p] == -1:
        return -1
    return vals[p]


@njit(cache=True)
def _table_put(keys, vals, key, value):
    p = _slot(keys, key)
    keys[p] = key
    vals[p] = value


@njit(cache=True)
def _fpush(hk, hv, size, key, val):
    if size == hk.shape[0]:
        hk2 = np.empty(2 * size, dtype=np.float64)
        hv2 = np.empty(2 * size, dtype=np.int64)
        hk2[:size] = hk[:size]
        hv2[:size] = hv[:size]
        hk = hk2
        hv = hv2
    pos = size
    hk[pos] = key
    hv[pos] = val
    while pos > 0:
        parent = (pos - 1) >> 1
        if hk[parent] <= hk[pos]:
            break
        hk[parent], hk[pos] = hk[pos], hk[parent]
        hv[parent], hv[pos] = hv[pos], hv[parent]
        pos = parent
    return hk, hv, size + 1


@njit(cache=True)
def _fpop(hk, hv, size):
    key = hk[0]
    val = hv[0]
    size -= 1
    hk[0] = hk[size]
    hv[0] = hv[size]
    pos = 0
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        if child + 1 < size and hk[child + 1] < hk[child]:
            child += 1
        if hk[pos] <= hk[child]:
            break
        hk[pos], hk[child] = hk[child], hk[pos]
        hv[pos], hv[child] = hv[child], hv[pos]
        pos = child
    return key, val, size


@njit(cache=True)
def _seam_heights(e, rank, values, n, edge_i, edge_j, edge_rank, order, count):
    """Circle coordinates for the loop that ``e`` closes.

    The shortest path from one end of ``e`` to the other over earlier edges,
    closed by ``e``, is a cycle; arc length along it is the coordinate of
    its vertices.  Every other vertex takes the coordinate of the cycle
    vertex it has the shortest edge to, so parallel strands of a thick loop
    share coordinates.  Returns the coordinates and the path length.
    """
    u = edge_i[e]
    w = edge_j[e]
    r = edge_rank[e]
    inf = np.inf
    dist = np.full(n, inf)
    pred = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    dist[u] = 0.0
    hk = np.empty(64, dtype=np.float64)
    hv = np.empty(64, dtype=np.int64)
    hk, hv, size = _fpush(hk, hv, 0, 0.0, u)
    while size > 0:
        dx, x, size = _fpop(hk, hv, size)
        if done[x]:
            continue
        done[x] = True
        if x == w:
            break
        for q in range(count[x]):
            y = order[x, q]
            ry = rank[x, y]
            if ry > r:
                break
            if ry == r:
                a = x if x < y else y
                b = y if x < y else x
                # same value: only edges earlier in the lex tie-break
                if a > edge_i[e] or (a == edge_i[e] and b >= edge_j[e]):
                    continue
            nd = dx + values[ry]
            if nd < dist[y]:
                dist[y] = nd
                pred[y] = x
                hk, hv, size = _fpush(hk, hv, size, nd, y)
    coord = np.zeros(n)
    if not done[w]:
        return coord, 0.0
    cycle = np.empty(n, dtype=np.int64)
    on_cycle = np.zeros(n, dtype=np.bool_)
    m = 0
    x = w
    while x >= 0:
        cycle[m] = x
        on_cycle[x] = True
        coord[x] = dist[x]
        m += 1
        x = pred[x]
    for x in range(n):
        if on_cycle[x]:
            continue
        best = np.iinfo(np.int64).max
        rx = rank[x]
        for q in range(m):
            c = cycle[q]
            rc = rx[c]
            if rc >= 0 and rc < best:
                best = rc
                coord[x] = dist[c]
    return coord, dist[w]


@njit(cache=True)
def _seam_sides(e, dist, half, rank, edge_i, edge_j, edge_rank, order, count):
    """Two-colouring of the earlier-edge graph that flips across every jumping edge.

    Adding its coboundary to the jump set clears all earlier edges.  Returns
    the colours and whether every earlier edge agreed with them.
    """
    n = dist.shape[0]
    r = edge_rank[e]
    side = np.zeros(n, dtype=np.uint8)
    seen = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    consistent = True
    for s0 in range(n):
        if seen[s0]:
            continue
        seen[s0] = True
        top = 0
        stack[0] = s0
        top = 1
        while top > 0:
            top -= 1
            x = stack[top]
            for q in range(count[x]):
                y = order[x, q]
                ry = rank[x, y]
                if ry > r:
                    break
                if ry == r:
                    lo = x if x < y else y
                    hi = y if x < y else x
                    if lo > edge_i[e] or (lo == edge_i[e] and hi >= edge_j[e]):
                        continue
                want = side[x]
                if abs(dist[x] - dist[y]) > half:
                    want ^= 1
                if seen[y]:
                    if side[y] != want:
                        consistent = False
                else:
                    seen[y] = True
                    side[y] = want
                    stack[top] = y
                    top += 1
    return side, consistent


@njit(cache=True)
def _lowest_odd(zlist, member, rank, n, edge_i, edge_j, edge_rank, order, count):
    """Smallest triangle key in the coboundary of the cochain ``member``."""
    big = np.iinfo(np.int64).max
    best = big
    best_rank = big
    for q in range(zlist.shape[0]):
        f = zlist[q]
        a = edge_i[f]
        b = edge_j[f]
        if member[a, b] == 0:
            continue
        rab = edge_rank[f]
        if rab > best_rank:
            break
        ra = rank[a]
        rb = rank[b]
        za = member[a]
        zb = member[b]
        # apexes in rank order from a's side; none past best_rank can win
        for p in range(count[a]):
            k = order[a, p]
            rak = ra[k]
            if rak > best_rank:
                break
            rbk = rb[k]
            if rbk < 0 or rbk > best_rank or k == b:
                continue
            if (za[k] ^ zb[k]) == 1:
                continue
            v = rab
            if rak > v:
                v = rak
            if rbk > v:
                v = rbk
            x, y, z = sorted_triple(a, b, k)
            key = triangle_key(x, y, z, v, n)
            if key < best:
                best = key
                best_rank = v
    if best == big:
        return -1
    return best


@njit(cache=True)
def _apex_range(a, c, q0, q1, three, perm, dist, half, rank, n, rac, best, best_rank):
    """Best odd apex for the jumping pair ``ac`` among sorted positions ``q0:q1``.

    ``three`` selects apexes that jump against both ends, otherwise apexes
    that jump against neither.
    """
    ra = rank[a]
    rc = rank[c]
    for q in range(q0, q1):
        b = perm[q]
        rab = ra[b]
        rcb = rc[b]
        if rab < 0 or rcb < 0 or rab > best_rank or rcb > best_rank:
            continue
        ja = abs(dist[b] - dist[a]) > half
        jc = abs(dist[b] - dist[c]) > half
        if three:
            if not (ja and jc):
                continue
        elif ja or jc:
            continue
        v = rac
        if rab > v:
            v = rab
        if rcb > v:
            v = rcb
        x, y, z = sorted_triple(a, c, b)
        key = triangle_key(x, y, z, v, n)
        if key < best:
            best = key
            best_rank = v
    return best, best_rank


@njit(cache=True)
def _lowest_odd_heights(dist, half, rank, n, edge_i, edge_j, edge_rank):
    """``_lowest_odd`` for an untouched seam cochain.

    The cochain differs from the jump set by a coboundary, so a triangle is
    odd exactly when one or three of its pairs jump.  For a jumping pair the apexes of either
    kind form contiguous windows in height order.
    """
    perm = np.argsort(dist, kind="mergesort")
    ds = dist[perm]
    slack = 1e-9 * (1.0 + half)
    big = np.iinfo(np.int64).max
    best = big
    best_rank = big
    n_pts = ds.shape[0]
    # earlier jumping edges count too: a triangle whose only jump is one of
    # them is still odd
    for f in range(edge_i.shape[0]):
        rac = edge_rank[f]
        if rac > best_rank:
            break
        a = edge_i[f]
        c = edge_j[f]
        if not abs(dist[a] - dist[c]) > half:
            continue
        lo = min(dist[a], dist[c])
        hi = max(dist[a], dist[c])
        q0 = np.searchsorted(ds, hi - half - slack)
        q1 = np.searchsorted(ds, lo + half + slack, side="right")
        best, best_rank = _apex_range(a, c, q0, q1, False, perm, dist, half, rank, n, rac,
                                      best, best_rank)
        # apexes beyond half on both sides: below, above, or between the ends
        q1 = np.searchsorted(ds, lo - half + slack, side="right")
        best, best_rank = _apex_range(a, c, 0, q1, True, perm, dist, half, rank, n, rac,
                                      best, best_rank)
        q0 = np.searchsorted(ds, hi + half - slack)
        best, best_rank = _apex_range(a, c, q0, n_pts, True, perm, dist, half, rank, n, rac,
                                      best, best_rank)
        if hi - lo > 2.0 * half - 2.0 * slack:
            q0 = np.searchsorted(ds, lo + half - slack)
            q1 = np.searchsorted(ds, hi - half + slack, side="right")
            best, best_rank = _apex_range(a, c, q0, q1, True, perm, dist, half, rank, n, rac,
                                          best, best_rank)
    if best == big:
        return -1
    return best


@njit(cache=True)
def _first_above(rank_row, order_row, cnt, lo):
    """First position in a rank-sorted neighbour list whose rank exceeds ``lo``."""
    left = 0
    right = cnt
    while left < right:
        mid = (left + right) >> 1
        if rank_row[order_row[mid]] > lo:
            right = mid
        else:
            left = mid + 1
    return left


@njit(cache=True)
def _push_odd(a, b, rab, zab, member, rank, n, order, count, lo, hi, keys, tags, size):
    """Push the odd cofacets of edge ``ab`` whose rank lies in ``(lo, hi]``."""
    ra = rank[a]
    rb = rank[b]
    za = member[a]
    zb = member[b]
    oa = order[a]
    ob = order[b]
    # an apex lifts the value above lo only through an edge above lo
    start = 0 if rab > lo else _first_above(ra, oa, count[a], lo)
    for p in range(start, count[a]):
        k = oa[p]
        rak = ra[k]
        if rak > hi:
            break
        rbk = rb[k]
        if rbk < 0 or rbk > hi or k == b or (zab ^ za[k] ^ zb[k]) == 0:
            continue
        v = rab
        if rak > v:
            v = rak
        if rbk > v:
            v = rbk
        x, y, z = sorted_triple(a, b, k)
        keys, tags, size = _push(keys, tags, size, triangle_key(x, y, z, v, n), -1)
    if rab <= lo:
        # apexes reached through b's side only: a's edge at or below lo
        for p in range(_first_above(rb, ob, count[b], lo), count[b]):
            k = ob[p]
            rbk = rb[k]
            if rbk > hi:
                break
            rak = ra[k]
            if rak < 0 or rak > lo or k == a or (zab ^ za[k] ^ zb[k]) == 0:
                continue
            x, y, z = sorted_triple(a, b, k)
            keys, tags, size = _push(keys, tags, size, triangle_key(x, y, z, rbk, n), -1)
    return keys, tags, size


@njit(cache=True)
def _collect_odd(edges, m, member, rank, n, edge_i, edge_j, edge_rank, order, count, lo, hi,
                 keys, tags, size, members_only):
    """Push every odd cofacet with rank in ``(lo, hi]`` of the first ``m`` listed edges.

    Every odd cofacet has an edge in the cochain, so scanning members alone
    finds them all; ``members_only=False`` also scans the other edges.
    """
    for q in range(m):
        f = edges[q]
        a = edge_i[f]
        b = edge_j[f]
        rab = edge_rank[f]
        zab = member[a, b]
        if (members_only and zab == 0) or rab > hi:
            continue
        keys, tags, size = _push_odd(a, b, rab, zab, member, rank, n, order, count, lo, hi,
                                     keys, tags, size)
    return keys, tags, size


@njit(cache=True)
def _pop_odd(keys, tags, size, member, n):
    """Pop candidates until one is odd under ``member``; ``-1`` when none is left."""
    nn = n * n
    while size > 0:
        key, _, size = _pop(keys, tags, size)
        while size > 0 and keys[0] == key:
            _, _, size = _pop(keys, tags, size)
        rem = key % (nn * n)
        x = rem // nn
        y = (rem // n) % n
        z = rem % n
        if member[x, y] ^ member[x, z] ^ member[y, z]:
            return key, size
    return -1, size


@njit(cache=True)
def _widen(values, bound, growth):
    """Next candidate bound: values grow by ``growth``, ranks by at least 1/64."""
    last = values.shape[0] - 1
    by_value = np.searchsorted(values, values[bound] * (1.0 + growth), side="right") - 1
    by_rank = bound + 1 + bound // 64
    nxt = by_value if by_value > by_rank else by_rank
    return nxt if nxt < last else last


@njit(cache=True)
def _seam_column(e, rank, values, n, edge_i, edge_j, edge_rank, order, count, own_k, own_v,
                 chains):
    """Reduce the column of ``e`` starting from a seam cochain.

    The reduced pivot depends only on ``e`` modulo cochains on later edges,
    so any start in that coset gives the same answer.  For a long-lived loop
    the standard walk adds thousands of columns.  Instead the start is a
    circle-valued coordinate turned into a cochain: an edge jumps when its
    endpoints' coordinates differ by more than half the loop length, and the
    coboundary of a two-colouring of the earlier-edge graph cancels the
    earlier jumps.  That cochain is usually a cocycle already.

    The remaining reduction keeps a heap of candidate cofacets: every odd
    cofacet up to a rank bound is in it, next to stale entries that are
    dropped when popped.  Toggled edges push their new odd cofacets, and the
    bound widens geometrically when the heap runs dry.
    """
    dist, length = _seam_heights(e, rank, values, n, edge_i, edge_j, edge_rank, order, count)
    half = 0.5 * length
    n_edges = edge_i.shape[0]
    last = values.shape[0] - 1
    member = np.zeros((n, n), dtype=np.uint8)
    listed = np.zeros((n, n), dtype=np.uint8)
    edges = np.empty(max(n_edges - e, 16), dtype=np.int64)
    m = 0
    side, pure = _seam_sides(e, dist, half, rank, edge_i, edge_j, edge_rank, order, count)
    u = edge_i[e]
    w = edge_j[e]
    # e itself is always in the start, so it has to sit in the jump set plus coboundary too
    if (abs(dist[u] - dist[w]) > half) == (side[u] != side[w]):
        pure = False
    for f in range(e, n_edges):
        a = edge_i[f]
        b = edge_j[f]
        jump = abs(dist[a] - dist[b]) > half
        if f == e or jump != (side[a] != side[b]):
            member[a, b] = 1
            member[b, a] = 1
            listed[a, b] = 1
            edges[m] = f
            m += 1
    # when the sides agree everywhere the start differs from the jump set by a
    # coboundary, so its odd triangles are those of the jump set
    if pure:
        low = _lowest_odd_heights(dist, half, rank, n, edge_i, edge_j, edge_rank)
    else:
        low = _lowest_odd(edges[:m], member, rank, n, edge_i, edge_j, edge_rank, order, count)
    keys = np.empty(256, dtype=np.int64)
    tags = np.empty(256, dtype=np.int64)
    size = 0
    growth = 0.02
    bound = -1
    floor = -1
    if low >= 0:
        # nothing is odd below the first low, so only later values are collected
        floor = low // (n * n * n) - 1
        bound = _widen(values, floor + 1, growth)
        keys, tags, size = _collect_odd(edges, m, member, rank, n, edge_i, edge_j, edge_rank,
                                        order, count, floor, bound, keys, tags, size, True)
    while low >= 0:
        other = _table_get(own_k, own_v, low)
        if other < 0:
            break
        if other in chains:
            add = chains[other]
        else:
            add = np.empty(1, dtype=np.int64)
            add[0] = other
        for f in add:
            a = edge_i[f]
            b = edge_j[f]
            member[a, b] ^= 1
            member[b, a] ^= 1
            if listed[a, b] == 0:
                listed[a, b] = 1
                if m == edges.shape[0]:
                    grown = np.empty(2 * m, dtype=np.int64)
                    grown[:m] = edges[:m]
                    edges = grown
                edges[m] = f
                m += 1
        keys, tags, size = _collect_odd(add, add.shape[0], member, rank, n, edge_i, edge_j,
                                        edge_rank, order, count, floor, bound, keys, tags, size,
                                        False)
        low, size = _pop_odd(keys, tags, size, member, n)
        while low < 0 and bound < last:
            lo = bound
            bound = _widen(values, bound, growth)
            growth = min(2.0 * growth, 0.5)
            keys, tags, size = _collect_odd(edges, m, member, rank, n, edge_i, edge_j,
                                            edge_rank, order, count, lo, bound, keys, tags, size,
                                            True)
            low, size = _pop_odd(keys, tags, size, member, n)
    c = 0
    for q in range(m):
        f = edges[q]
        if member[edge_i[f], edge_j[f]] == 1:
            c += 1
    chain = np.empty(c, dtype=np.int64)
    c = 0
    for q in range(m):
        f = edges[q]
        if member[edge_i[f], edge_j[f]] == 1:
            chain[c] = f
            c += 1
    chain = chain[np.argsort(chain, kind="mergesort")]
    return low, chain


@njit(cache=True)
def h1_pivots(rank, values, n, edge_i, edge_j, edge_rank, cleared, seam_after=64):
    """Coboundary reduction of the edge columns of a Rips filtration.

    Edges are visited in reverse canonical order; columns of edges that kill
    an H0 class are skipped (clearing).  An edge whose lowest cofacet shares
    its value and is not yet claimed is paired without building its column.
    Otherwise the working column is a heap fed by lazy cofacet streams, one
    per edge of the reduction chain, so a column that resolves early never
    touches the high-valued part of its coboundary.  Duplicate keys cancel
    over GF(2) when they reach the top.  A column still unresolved after
    ``seam_after`` additions is restarted from a seam cocycle (see
    ``_seam_column``); a negative value forces that path for every column.

    Returns, per edge, the key of the triangle it is paired with, ``-1`` for
    an essential class and ``-2`` for cleared edges.
    """
    n_edges = edge_i.shape[0]
    # a table sized for every edge never fills past one half
    own_k, own_v = _table_new(n_edges)
    chains = Dict.empty(key_type=types.int64, value_type=types.int64[::1])
    partner = np.full(n_edges, -2, dtype=np.int64)
    order, count = neighbor_lists(n, edge_i, edge_j)
    keys = np.empty(256, dtype=np.int64)
    tags = np.empty(256, dtype=np.int64)
    group = np.empty(max(n, 1), dtype=np.int64)
    cap = 64
    st_i = np.empty(cap, dtype=np.int64)
    st_j = np.empty(cap, dtype=np.int64)
    st_r = np.empty(cap, dtype=np.int64)
    st_pi = np.empty(cap, dtype=np.int64)
    st_pj = np.empty(cap, dtype=np.int64)
    st_e = np.empty(cap, dtype=np.int64)
    for e in range(n_edges - 1, -1, -1):
        if cleared[e]:
            continue
        i = edge_i[e]
        j = edge_j[e]
        r = edge_rank[e]
        # the lowest cofacet at the edge's own value is the one with smallest apex
        apex = -1
        for k in range(n):
            if k == i or k == j:
                continue
            rik = rank[i, k]
            if rik < 0 or rik > r:
                continue
            rjk = rank[j, k]
            if rjk < 0 or rjk > r:
                continue
            apex = k
            break
        if apex >= 0:
            a, b, c = sorted_triple(i, j, apex)
            key = triangle_key(a, b, c, r, n)
            if _table_get(own_k, own_v, key) < 0:
                _table_put(own_k, own_v, key, e)
                partner[e] = key
                continue
        size = 0
        nstreams = 0
        pending = np.empty(1, dtype=np.int64)
        pending[0] = e
        partner[e] = -1
        adds = 0
        while True:
            if adds > seam_after:
                low, chain = _seam_column(e, rank, values, n, edge_i, edge_j, edge_rank, order,
                                          count, own_k, own_v, chains)
                if low >= 0:
                    _table_put(own_k, own_v, low, e)
                    partner[e] = low
                    if chain.shape[0] > 1:
                        chains[e] = chain
                break
            for f in pending:
                if nstreams == st_i.shape[0]:
                    cap = 2 * nstreams
                    st_i2 = np.empty(cap, dtype=np.int64)
                    st_j2 = np.empty(cap, dtype=np.int64)
                    st_r2 = np.empty(cap, dtype=np.int64)
                    st_pi2 = np.empty(cap, dtype=np.int64)
                    st_pj2 = np.empty(cap, dtype=np.int64)
                    st_e2 = np.empty(cap, dtype=np.int64)
                    st_i2[:nstreams] = st_i[:nstreams]
                    st_j2[:nstreams] = st_j[:nstreams]
                    st_r2[:nstreams] = st_r[:nstreams]
                    st_pi2[:nstreams] = st_pi[:nstreams]
                    st_pj2[:nstreams] = st_pj[:nstreams]
                    st_e2[:nstreams] = st_e[:nstreams]
                    st_i, st_j, st_r, st_pi, st_pj, st_e = st_i2, st_j2, st_r2, st_pi2, st_pj2, st_e2
                st_i[nstreams] = edge_i[f]
                st_j[nstreams] = edge_j[f]
                st_r[nstreams] = edge_rank[f]
                st_pi[nstreams] = 0
                st_pj[nstreams] = 0
                st_e[nstreams] = f
                keys, tags, size = _expand(nstreams, st_i, st_j, st_r, st_pi, st_pj, order, count,
                                           rank, n, keys, tags, size, group)
                nstreams += 1
            low = -1
            while size > 0:
                key, tag, size = _pop(keys, tags, size)
                if tag >= 0:
                    keys, tags, size = _expand(tag, st_i, st_j, st_r, st_pi, st_pj, order, count,
                                               rank, n, keys, tags, size, group)
                    continue
                mult = 1
                while size > 0 and keys[0] == key and tags[0] < 0:
                    _, _, size = _pop(keys, tags, size)
                    mult += 1
                if size > 0 and keys[0] == key:
                    # a marker never shares a key with a triangle
                    raise RuntimeError("heap key collision")
                if mult % 2 == 1:
                    keys, tags, size = _push(keys, tags, size, key, -1)
                    low = key
                    break
            if low < 0:
                break
            other = _table_get(own_k, own_v, low)
            if other < 0:
                _table_put(own_k, own_v, low, e)
                partner[e] = low
                if nstreams > 1:
                    chains[e] = _cancel_pairs(st_e[:nstreams].copy())
                break
            adds += 1
            if other in chains:
                pending = chains[other]
            else:
                pending = np.empty(1, dtype=np.int64)
                pending[0] = other
    return partner


@njit(cache=True)
def enumerate_triangles(rank, n):
    """All triangles of the flag complex as ``(a, b, c, rank)`` rows."""
    count = 0
    for a in range(n):
        for b in range(a + 1, n):
            if rank[a, b] < 0:
                continue
            for c in range(b + 1, n):
                if rank[a, c] >= 0 and rank[b, c] >= 0:
                    count += 1
    out = np.empty((count, 4), dtype=np.int64)
    m = 0
    for a in range(n):
        for b in range(a + 1, n):
            rab = rank[a, b]
            if rab < 0:
                continue
            for c in range(b + 1, n):
                rac = rank[a, c]
                rbc = rank[b, c]
                if rac >= 0 and rbc >= 0:
                    t = rab
                    if rac > t:
                        t = rac
                    if rbc > t:
                        t = rbc
                    out[m, 0] = a
                    out[m, 1] = b
                    out[m, 2] = c
                    out[m, 3] = t
                    m += 1
    return out
