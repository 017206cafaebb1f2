"""Compiled inner loops: exact k-NN search, components, unit-capacity flows.

Everything here is deterministic integer/float work with no RNG access.
All comparisons that decide neighbour order use squared distances with
(distance, index) tie-breaks, so results are exact and reproducible
regardless of grid geometry or evaluation order.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def knn_query(x, y, pcx, pcy, order, cell_start, nx, ny, cell_side, kk, out_idx, out_d2):
    """Exact k-nearest-neighbour lists via expanding rings over a cell grid.

    For each point, rings of cells at Chebyshev distance R are scanned
    outward.  Any unscanned point then sits at Euclidean distance at least
    R*cell_side, so the search stops once the current k-th best squared
    distance is strictly below (R*cell_side)**2; on equality one more ring
    is scanned so that (distance, index) ties resolve exactly as brute
    force would.
    """
    m = x.shape[0]
    for q in range(m):
        qx = x[q]
        qy = y[q]
        cqx = pcx[q]
        cqy = pcy[q]
        filled = 0
        # max ring needed to cover the whole grid from this cell
        r_last = max(max(cqx, nx - 1 - cqx), max(cqy, ny - 1 - cqy))
        radius = 0
        while True:
            lox = cqx - radius
            hix = cqx + radius
            loy = cqy - radius
            hiy = cqy + radius
            for cx in range(max(lox, 0), min(hix, nx - 1) + 1):
                for cy in range(max(loy, 0), min(hiy, ny - 1) + 1):
                    # ring cells only: skip the interior already scanned
                    if radius > 0 and cx != lox and cx != hix and cy != loy and cy != hiy:
                        continue
                    c = cy * nx + cx
                    for t in range(cell_start[c], cell_start[c + 1]):
                        p = order[t]
                        if p == q:
                            continue
                        dx = x[p] - qx
                        dy = y[p] - qy
                        d2 = dx * dx + dy * dy
                        if filled < kk:
                            # insertion keeping (d2, index) order
                            pos = filled
                            while pos > 0 and (
                                out_d2[q, pos - 1] > d2
                                or (out_d2[q, pos - 1] == d2 and out_idx[q, pos - 1] > p)
                            ):
                                out_d2[q, pos] = out_d2[q, pos - 1]
                                out_idx[q, pos] = out_idx[q, pos - 1]
                                pos -= 1
                            out_d2[q, pos] = d2
                            out_idx[q, pos] = p
                            filled += 1
                        elif d2 < out_d2[q, kk - 1] or (
                            d2 == out_d2[q, kk - 1] and p < out_idx[q, kk - 1]
                        ):
                            pos = kk - 1
                            while pos > 0 and (
                                out_d2[q, pos - 1] > d2
                                or (out_d2[q, pos - 1] == d2 and out_idx[q, pos - 1] > p)
                            ):
                                out_d2[q, pos] = out_d2[q, pos - 1]
                                out_idx[q, pos] = out_idx[q, pos - 1]
                                pos -= 1
                            out_d2[q, pos] = d2
                            out_idx[q, pos] = p
            if radius >= r_last:
                break
            if filled == kk:
                bound = radius * cell_side
                if out_d2[q, kk - 1] < bound * bound:
                    break
            radius += 1


@njit(cache=True)
def gilbert_count(x, y, pcx, pcy, order, cell_start, nx, ny, window, r2):
    m = x.shape[0]
    count = 0
    for q in range(m):
        qx = x[q]
        qy = y[q]
        for cx in range(max(pcx[q] - window, 0), min(pcx[q] + window, nx - 1) + 1):
            for cy in range(max(pcy[q] - window, 0), min(pcy[q] + window, ny - 1) + 1):
                c = cy * nx + cx
                for t in range(cell_start[c], cell_start[c + 1]):
                    p = order[t]
                    if p <= q:
                        continue
                    dx = x[p] - qx
                    dy = y[p] - qy
                    if dx * dx + dy * dy <= r2:
                        count += 1
    return count


@njit(cache=True)
def gilbert_fill(x, y, pcx, pcy, order, cell_start, nx, ny, window, r2, eu, ev):
    m = x.shape[0]
    pos = 0
    for q in range(m):
        qx = x[q]
        qy = y[q]
        for cx in range(max(pcx[q] - window, 0), min(pcx[q] + window, nx - 1) + 1):
            for cy in range(max(pcy[q] - window, 0), min(pcy[q] + window, ny - 1) + 1):
                c = cy * nx + cx
                for t in range(cell_start[c], cell_start[c + 1]):
                    p = order[t]
                    if p <= q:
                        continue
                    dx = x[p] - qx
                    dy = y[p] - qy
                    if dx * dx + dy * dy <= r2:
                        eu[pos] = q
                        ev[pos] = p
                        pos += 1
    return pos


@njit(cache=True)
def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@njit(cache=True)
def components_from_outlists(out_idx, kcols, labels):
    """Union-find over the first kcols out-neighbour columns; returns count.

    Labels are assigned in first-vertex order, so they are deterministic.
    """
    m = out_idx.shape[0]
    parent = np.arange(m)
    for q in range(m):
        for c in range(kcols):
            j = out_idx[q, c]
            if j >= 0:
                ra = _find(parent, q)
                rb = _find(parent, j)
                if ra != rb:
                    parent[ra] = rb
    root_label = np.full(m, -1)
    nc = 0
    for i in range(m):
        r = _find(parent, i)
        if root_label[r] < 0:
            root_label[r] = nc
            nc += 1
        labels[i] = root_label[r]
    return nc


@njit(cache=True)
def components_from_edges(m, eu, ev, labels):
    parent = np.arange(m)
    for i in range(eu.shape[0]):
        ra = _find(parent, eu[i])
        rb = _find(parent, ev[i])
        if ra != rb:
            parent[ra] = rb
    root_label = np.full(m, -1)
    nc = 0
    for i in range(m):
        r = _find(parent, i)
        if root_label[r] < 0:
            root_label[r] = nc
            nc += 1
        labels[i] = root_label[r]
    return nc


@njit(cache=True)
def _unit_flow(node_ptr, arc_to, arc_tail, arc_rev, cap, s, t, cutoff, parent, visited, token, queue, dirty, dirty_list, n_dirty):
    """Unit-capacity max-flow from s to t by BFS augmenting paths.

    Stops at `cutoff` augmentations; each augmentation is one BFS that
    terminates at sink discovery.  Every modified arc is recorded once
    in dirty_list so the caller can restore the clean capacities without
    copying the whole array.  Returns (flow, token, n_dirty).
    """
    flow = 0
    while flow < cutoff:
        token += 1
        head = 0
        tail_q = 0
        visited[s] = token
        parent[s] = -1
        queue[tail_q] = s
        tail_q += 1
        found = False
        while head < tail_q and not found:
            u = queue[head]
            head += 1
            for ai in range(node_ptr[u], node_ptr[u + 1]):
                if cap[ai] > 0:
                    w = arc_to[ai]
                    if visited[w] != token:
                        visited[w] = token
                        parent[w] = ai
                        if w == t:
                            found = True
                            break
                        queue[tail_q] = w
                        tail_q += 1
        if not found:
            break
        w = t
        while parent[w] >= 0:
            ai = parent[w]
            ri = arc_rev[ai]
            if dirty[ai] == 0:
                dirty[ai] = 1
                dirty_list[n_dirty] = ai
                n_dirty += 1
            if dirty[ri] == 0:
                dirty[ri] = 1
                dirty_list[n_dirty] = ri
                n_dirty += 1
            cap[ai] -= 1
            cap[ri] += 1
            w = arc_tail[ai]
        flow += 1
    return flow, token, n_dirty


@njit(cache=True)
def _seeded_bfs(node_ptr, arc_to, cap, src, sink, sites, n_sites, max_seeds, budget, parked, parent, visited, token, queue):
    """One BFS over positive-capacity arcs from src plus parked-flow seeds.

    Seeds walk the site list newest first, taking at most max_seeds sites
    that still hold parked units; expansion stops after `budget` pops, so
    a miss under a finite budget is inconclusive rather than a proof of
    unreachability.  Returns (found, token); on success the parent chain
    from sink leads back to whichever seed grew the path.
    """
    token += 1
    visited[src] = token
    parent[src] = -1
    queue[0] = src
    tail_q = 1
    seeded = 0
    j = n_sites - 1
    while j >= 0 and seeded < max_seeds:
        q = sites[j]
        if parked[q] > 0 and visited[q] != token:
            visited[q] = token
            parent[q] = -1
            queue[tail_q] = q
            tail_q += 1
            seeded += 1
        j -= 1
    found = False
    head = 0
    while head < tail_q and not found and head < budget:
        u = queue[head]
        head += 1
        for ai in range(node_ptr[u], node_ptr[u + 1]):
            if cap[ai] > 0:
                w = arc_to[ai]
                if visited[w] != token:
                    visited[w] = token
                    parent[w] = ai
                    if w == sink:
                        found = True
                        break
                    queue[tail_q] = w
                    tail_q += 1
    return found, token


@njit(cache=True)
def kappa_capped(
    node_ptr,
    arc_to,
    arc_tail,
    arc_rev,
    cap0,
    v,
    targets,
    pairs_a,
    pairs_b,
    init_cap,
    exit_below,
):
    """Minimum vertex cut size around v, capped at init_cap.

    Runs s-t flows on the vertex-split digraph from v to every listed
    target, then between the listed neighbour pairs, keeping a running
    minimum that also serves as the cutoff of later flows.  Returns as
    soon as the minimum drops below exit_below.
    """
    nn = node_ptr.shape[0] - 1
    n_arcs = arc_to.shape[0]
    cap = cap0.copy()
    parent = np.empty(nn, np.int64)
    visited = np.zeros(nn, np.int64)
    queue = np.empty(nn, np.int64)
    dirty = np.zeros(n_arcs, np.int8)
    dirty_list = np.empty(n_arcs, np.int64)
    token = 0
    best = init_cap
    src = 2 * v + 1  # out-node of v

    # Target phase with preflow reuse: flow pushed for earlier targets is
    # never torn down.  Units that reached an old sink stay parked there
    # and become extra BFS sources; a unit counts for the current target
    # only when it arrives at the current sink.  Max-flow/min-cut gives
    # exactness: if neither the source nor any parked unit can reach the
    # sink, the arrived count equals the true source-sink max flow.
    # The caller sorts targets by hop distance, so parked flow usually
    # drains to the next sink through a handful of arcs.
    parked = np.zeros(nn, np.int64)
    sites = np.empty(targets.shape[0], np.int64)
    n_sites = 0
    n_dirty = 0
    for i in range(targets.shape[0]):
        sink = 2 * targets[i]
        d = 0
        while d < best:
            # Cheap tier first: with Z-ordered targets the latest parked
            # sites sit a few arcs from the sink.  The unbudgeted all-seed
            # tier doubles as the exactness certificate when it fails.
            found, token = _seeded_bfs(
                node_ptr, arc_to, cap, src, sink, sites, n_sites, 32, 4096, parked, parent, visited, token, queue
            )
            if not found:
                found, token = _seeded_bfs(
                    node_ptr, arc_to, cap, src, sink, sites, n_sites, n_sites + 1, nn + 1, parked, parent, visited, token, queue
                )
            if not found:
                break
            w = sink
            while parent[w] >= 0:
                ai = parent[w]
                ri = arc_rev[ai]
                if dirty[ai] == 0:
                    dirty[ai] = 1
                    dirty_list[n_dirty] = ai
                    n_dirty += 1
                if dirty[ri] == 0:
                    dirty[ri] = 1
                    dirty_list[n_dirty] = ri
                    n_dirty += 1
                cap[ai] -= 1
                cap[ri] += 1
                w = arc_tail[ai]
            if w != src:
                parked[w] -= 1
            d += 1
        if d < best:
            best = d
        if best < exit_below or best == 0:
            return best
        if d > 0:
            parked[sink] += d
            sites[n_sites] = sink
            n_sites += 1

    # Pair phase needs clean capacities; undo the whole target phase once.
    for j in range(n_dirty):
        ai = dirty_list[j]
        cap[ai] = cap0[ai]
        dirty[ai] = 0
    for i in range(pairs_a.shape[0]):
        if best < exit_below or best == 0:
            return best
        f, token, n_dirty = _unit_flow(
            node_ptr,
            arc_to,
            arc_tail,
            arc_rev,
            cap,
            2 * pairs_a[i] + 1,
            2 * pairs_b[i],
            best,
            parent,
            visited,
            token,
            queue,
            dirty,
            dirty_list,
            0,
        )
        for j in range(n_dirty):
            ai = dirty_list[j]
            cap[ai] = cap0[ai]
            dirty[ai] = 0
        if f < best:
            best = f
    return best


@njit(cache=True)
def forest_labels(m, sptr, sadj, seid, n_edges):
    """Scan-first-search forest partition of the edge set.

    Labels every undirected edge with the index of the maximal spanning
    forest it joins (1-based).  Keeping the edges labelled <= L yields a
    subgraph whose vertex connectivity, capped at L, equals that of the
    full graph.  Scans always pick a vertex of maximum current count,
    maintained in bucket lists; O(vertices + arcs) total.
    """
    label = np.zeros(n_edges, np.int64)
    r = np.zeros(m, np.int64)
    scanned = np.zeros(m, np.uint8)
    head = np.full(m + 1, -1, np.int64)
    nxt = np.full(m, -1, np.int64)
    prv = np.full(m, -1, np.int64)
    for x in range(m - 1, -1, -1):
        nxt[x] = head[0]
        if head[0] >= 0:
            prv[head[0]] = x
        head[0] = x
    maxr = 0
    for _ in range(m):
        while head[maxr] < 0:
            maxr -= 1
        x = head[maxr]
        head[maxr] = nxt[x]
        if nxt[x] >= 0:
            prv[nxt[x]] = -1
        scanned[x] = 1
        for ai in range(sptr[x], sptr[x + 1]):
            y = sadj[ai]
            if scanned[y] == 0:
                ry = r[y]
                label[seid[ai]] = ry + 1
                if prv[y] >= 0:
                    nxt[prv[y]] = nxt[y]
                else:
                    head[ry] = nxt[y]
                if nxt[y] >= 0:
                    prv[nxt[y]] = prv[y]
                r[y] = ry + 1
                nxt[y] = head[ry + 1]
                if head[ry + 1] >= 0:
                    prv[head[ry + 1]] = y
                prv[y] = -1
                head[ry + 1] = y
                if ry + 1 > maxr:
                    maxr = ry + 1
    return label


@njit(cache=True)
def prim_bottleneck(x, y):
    """Largest edge length in a Euclidean minimum spanning tree.

    The bottleneck value is the same for every minimum spanning tree, so
    tie-breaking inside Prim's scan does not affect the result.
    """
    m = x.shape[0]
    if m < 2:
        return 0.0
    in_tree = np.zeros(m, np.bool_)
    best = np.full(m, np.inf)
    in_tree[0] = True
    cur = 0
    max_e2 = 0.0
    for _ in range(m - 1):
        cx = x[cur]
        cy = y[cur]
        pick = -1
        pick_d2 = np.inf
        for j in range(m):
            if in_tree[j]:
                continue
            dx = x[j] - cx
            dy = y[j] - cy
            d2 = dx * dx + dy * dy
            if d2 < best[j]:
                best[j] = d2
            if best[j] < pick_d2:
                pick_d2 = best[j]
                pick = j
        in_tree[pick] = True
        if pick_d2 > max_e2:
            max_e2 = pick_d2
        cur = pick
    return np.sqrt(max_e2)


@njit(cache=True)
def pair_diameter2(px, py):
    """Exact squared diameter by brute force over all pairs."""
    m = px.shape[0]
    best = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            dx = px[j] - px[i]
            dy = py[j] - py[i]
            d2 = dx * dx + dy * dy
            if d2 > best:
                best = d2
    return best
