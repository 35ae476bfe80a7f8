"""numba hot loops for the two proposal kernels.

Both kernels mutate a flat chain state in place:

    assign[V]    district label per vertex
    dpops[n]     district populations
    dsize[n]     district vertex counts
    cut_deg[V]   number of cut edges incident to each vertex
    bnd_list[V]  boundary vertices (first scal[0] entries are live)
    bnd_pos[V]   position in bnd_list, -1 if not on the boundary
    scal         [boundary size, cut edge count, bfs stamp, component stamp,
                  consecutive rejections, state code]

On small graphs ``powers[v] = n**v`` and scal[5] tracks the plan as a base-n
integer, emitted per proposal in ``out_code``; elsewhere powers are zero.

Per-proposal outcomes go to ``out_reason`` (0 accepted, 1 contiguity,
2 tolerance, 3 metropolis), ``out_weight`` and ``out_cut``. Randomness comes
from numba's generator, reseeded at the top of every call.
"""
import numpy as np
from numba import njit

ACCEPTED = 0
INVALID_CONTIGUITY = 1
TOLERANCE = 2
METROPOLIS = 3


@njit(cache=True)
def _excess(dpops, ideal, tol):
    if tol >= 1.0:
        return 0.0
    bound = tol * ideal
    s = 0.0
    for i in range(dpops.shape[0]):
        d = abs(dpops[i] - ideal)
        if d > bound:
            s += d - bound
    return s


@njit(cache=True)
def _energy(dpops, ideal, cut, n_edges, bpop, bcomp):
    e = 0.0
    if bpop != 0.0:
        s = 0.0
        for i in range(dpops.shape[0]):
            s += abs(dpops[i] - ideal)
        e += bpop * s
    if bcomp != 0.0:
        e += bcomp * cut / n_edges
    return e


@njit(cache=True)
def _set_boundary(v, is_b, bnd_list, bnd_pos, scal):
    if is_b:
        if bnd_pos[v] < 0:
            bnd_pos[v] = scal[0]
            bnd_list[scal[0]] = v
            scal[0] += 1
    elif bnd_pos[v] >= 0:
        p = bnd_pos[v]
        last = bnd_list[scal[0] - 1]
        bnd_list[p] = last
        bnd_pos[last] = p
        bnd_pos[v] = -1
        scal[0] -= 1


@njit(cache=True)
def _refresh_vertex(v, indptr, indices, assign, cut_deg, bnd_list, bnd_pos, scal):
    c = 0
    a = assign[v]
    for t in range(indptr[v], indptr[v + 1]):
        if assign[indices[t]] != a:
            c += 1
    cut_deg[v] = c
    _set_boundary(v, c > 0, bnd_list, bnd_pos, scal)


@njit(cache=True)
def _removal_keeps_connected(indptr, indices, assign, v, label, mark, queue, scal):
    """Would district ``label`` stay connected if ``v`` left it?

    Searches from one same-label neighbour of ``v`` and stops as soon as
    every other same-label neighbour has been reached.
    """
    scal[2] += 1
    st = scal[2]
    need = 0
    start = -1
    for t in range(indptr[v], indptr[v + 1]):
        u = indices[t]
        if assign[u] == label:
            need += 1
            mark[u] = -st
            if start < 0:
                start = u
    if need == 0:
        return False
    mark[v] = st
    mark[start] = st
    found = 1
    head = 0
    tail = 1
    queue[0] = start
    while head < tail and found < need:
        x = queue[head]
        head += 1
        for t in range(indptr[x], indptr[x + 1]):
            y = indices[t]
            if assign[y] == label and mark[y] != st:
                if mark[y] == -st:
                    found += 1
                mark[y] = st
                queue[tail] = y
                tail += 1
    return found == need


@njit(cache=True)
def _district_connected(indptr, indices, assign, start, label, size, mark, queue, scal):
    scal[2] += 1
    st = scal[2]
    mark[start] = st
    queue[0] = start
    head = 0
    tail = 1
    while head < tail:
        x = queue[head]
        head += 1
        for t in range(indptr[x], indptr[x + 1]):
            y = indices[t]
            if assign[y] == label and mark[y] != st:
                mark[y] = st
                queue[tail] = y
                tail += 1
    return tail == size


@njit(cache=True)
def single_vertex_run(indptr, indices, pops, assign, dpops, dsize, cut_deg,
                      bnd_list, bnd_pos, scal, n_edges, ideal,
                      tol_arr, bcomp_arr, bpop_arr, step0,
                      max_props, target_acc, stall_cap, hastings, seed,
                      out_reason, out_weight, out_cut, out_code, powers, mark, queue):
    np.random.seed(seed)
    n_acc = 0
    since = scal[4]
    i = 0
    stalled = False
    while i < max_props and (target_acc < 0 or n_acc < target_acc):
        k = step0 + i
        tol = tol_arr[min(k, tol_arr.shape[0] - 1)]
        bcomp = bcomp_arr[min(k, bcomp_arr.shape[0] - 1)]
        bpop = bpop_arr[min(k, bpop_arr.shape[0] - 1)]
        nb = scal[0]
        cut = scal[1]
        e_old = _energy(dpops, ideal, cut, n_edges, bpop, bcomp)

        v = bnd_list[np.random.randint(0, nb)]
        old = assign[v]
        r = np.random.randint(0, cut_deg[v])
        j = -1
        for t in range(indptr[v], indptr[v + 1]):
            a = assign[indices[t]]
            if a != old:
                if r == 0:
                    j = a
                    break
                r -= 1
        c_vi = 0
        c_vj = 0
        for t in range(indptr[v], indptr[v + 1]):
            a = assign[indices[t]]
            if a == old:
                c_vi += 1
            elif a == j:
                c_vj += 1

        reason = ACCEPTED
        if dsize[old] == 1:
            reason = INVALID_CONTIGUITY
        elif not _removal_keeps_connected(indptr, indices, assign, v, old, mark, queue, scal):
            reason = INVALID_CONTIGUITY

        if reason == ACCEPTED:
            p = pops[v]
            ex_old = _excess(dpops, ideal, tol)
            dpops[old] -= p
            dpops[j] += p
            ex_new = _excess(dpops, ideal, tol)
            new_cut = cut + c_vi - c_vj
            e_new = _energy(dpops, ideal, new_cut, n_edges, bpop, bcomp)
            dpops[old] += p
            dpops[j] -= p
            if ex_new > ex_old:
                reason = TOLERANCE
            else:
                log_ratio = e_old - e_new
                if hastings:
                    deg = indptr[v + 1] - indptr[v]
                    nb_new = nb
                    if deg - c_vj == 0:
                        nb_new -= 1
                    for t in range(indptr[v], indptr[v + 1]):
                        u = indices[t]
                        a = assign[u]
                        if a == old:
                            if cut_deg[u] == 0:
                                nb_new += 1
                        elif a == j:
                            if cut_deg[u] == 1:
                                nb_new -= 1
                    # forward: 1/nb * c_vj/cut_deg[v]; reverse: 1/nb_new * c_vi/(deg - c_vj)
                    log_ratio += (np.log(nb) - np.log(nb_new)
                                  + np.log(c_vi) - np.log(deg - c_vj)
                                  - np.log(c_vj) + np.log(cut_deg[v]))
                if log_ratio < 0.0 and np.random.random() >= np.exp(log_ratio):
                    reason = METROPOLIS
            if reason == ACCEPTED:
                assign[v] = j
                scal[5] += (j - old) * powers[v]
                dpops[old] -= p
                dpops[j] += p
                dsize[old] -= 1
                dsize[j] += 1
                scal[1] = new_cut
                _refresh_vertex(v, indptr, indices, assign, cut_deg, bnd_list, bnd_pos, scal)
                for t in range(indptr[v], indptr[v + 1]):
                    u = indices[t]
                    a = assign[u]
                    if a == old:
                        cut_deg[u] += 1
                        _set_boundary(u, True, bnd_list, bnd_pos, scal)
                    elif a == j:
                        cut_deg[u] -= 1
                        _set_boundary(u, cut_deg[u] > 0, bnd_list, bnd_pos, scal)
                e_old = e_new

        out_reason[i] = reason
        out_weight[i] = np.exp(-e_old)
        out_cut[i] = scal[1]
        out_code[i] = scal[5]
        i += 1
        if reason == ACCEPTED:
            n_acc += 1
            since = 0
        else:
            since += 1
            if since > stall_cap:
                stalled = True
                break
    scal[4] = since
    return i, n_acc, stalled


@njit(cache=True)
def flip_run(indptr, indices, pops, assign, dpops, dsize, cut_deg,
             bnd_list, bnd_pos, scal, n_edges, ideal,
             tol_arr, bcomp_arr, bpop_arr, step0,
             max_props, target_acc, stall_cap, flip_prob, swap_rate, coin, seed,
             out_reason, out_weight, out_cut, out_code, powers, mark, queue,
             comp_mark, comp_of, comp_verts, comp_start, chosen, comp_src,
             comp_target, chosen_list, flipped, dmark, dbuf, order):
    np.random.seed(seed)
    n_acc = 0
    since = scal[4]
    i = 0
    stalled = False
    gap = -1
    if flip_prob > 0.0:
        gap = np.random.geometric(flip_prob) - 1
    while i < max_props and (target_acc < 0 or n_acc < target_acc):
        k = step0 + i
        tol = tol_arr[min(k, tol_arr.shape[0] - 1)]
        bcomp = bcomp_arr[min(k, bcomp_arr.shape[0] - 1)]
        bpop = bpop_arr[min(k, bpop_arr.shape[0] - 1)]
        cut = scal[1]
        e_old = _energy(dpops, ideal, cut, n_edges, bpop, bcomp)

        # boundary components under a lazily drawn flip labelling: each
        # monochromatic edge gets its coin the first time a search reaches an
        # unvisited endpoint across it, so no edge is drawn twice. Coins come
        # from geometric gaps between successes (same Bernoulli process).
        scal[3] += 1
        cst = scal[3]
        ncomp = 0
        nverts = 0
        for q in range(scal[0]):
            b = bnd_list[q]
            if comp_mark[b] == cst:
                continue
            comp_start[ncomp] = nverts
            comp_mark[b] = cst
            comp_of[b] = ncomp
            comp_verts[nverts] = b
            nverts += 1
            head = comp_start[ncomp]
            while head < nverts:
                x = comp_verts[head]
                head += 1
                ax = assign[x]
                for t in range(indptr[x], indptr[x + 1]):
                    y = indices[t]
                    if assign[y] == ax and comp_mark[y] != cst:
                        if gap > 0:
                            gap -= 1
                        elif flip_prob > 0.0:
                            gap = np.random.geometric(flip_prob) - 1
                            comp_mark[y] = cst
                            comp_of[y] = ncomp
                            comp_verts[nverts] = y
                            nverts += 1
            chosen[ncomp] = 0
            ncomp += 1
        comp_start[ncomp] = nverts

        # random greedy non-adjacent subset with uniform target districts:
        # visit components in random order (partial Fisher-Yates) and take
        # each non-adjacent one on a fair coin, or until ``want`` are taken
        n_chosen = 0
        if coin:
            want = ncomp
        else:
            want = 1
            if swap_rate > 0.0:
                want += np.random.poisson(swap_rate)
        for oi in range(ncomp):
            order[oi] = oi
        for oi in range(ncomp):
            if n_chosen >= want:
                break
            sw = np.random.randint(oi, ncomp)
            c = order[sw]
            order[sw] = order[oi]
            order[oi] = c
            if coin and np.random.random() >= 0.5:
                continue
            label = assign[comp_verts[comp_start[c]]]
            adjacent = False
            nd = 0
            for s in range(comp_start[c], comp_start[c + 1]):
                x = comp_verts[s]
                for t in range(indptr[x], indptr[x + 1]):
                    y = indices[t]
                    if comp_mark[y] == cst and comp_of[y] != c and chosen[comp_of[y]]:
                        adjacent = True
                        break
                    a = assign[y]
                    if a != label and dmark[a] == 0:
                        dmark[a] = 1
                        dbuf[nd] = a
                        nd += 1
                if adjacent:
                    break
            for s in range(nd):
                dmark[dbuf[s]] = 0
            if adjacent:
                continue
            chosen[c] = 1
            comp_src[c] = label
            comp_target[c] = dbuf[np.random.randint(0, nd)]
            chosen_list[n_chosen] = c
            n_chosen += 1

        # apply the flips
        nflip = 0
        dcut = 0
        for s in range(n_chosen):
            c = chosen_list[s]
            tgt = comp_target[c]
            d = comp_src[c]
            for q in range(comp_start[c], comp_start[c + 1]):
                x = comp_verts[q]
                for t in range(indptr[x], indptr[x + 1]):
                    y = indices[t]
                    if comp_mark[y] == cst and comp_of[y] == c:
                        continue
                    ay = assign[y]
                    dcut += (ay != tgt) - (ay != d)
                flipped[nflip] = x
                nflip += 1
        ex_old = _excess(dpops, ideal, tol)
        for s in range(nflip):
            x = flipped[s]
            c = comp_of[x]
            d = comp_src[c]
            tgt = comp_target[c]
            assign[x] = tgt
            dpops[d] -= pops[x]
            dpops[tgt] += pops[x]
            dsize[d] -= 1
            dsize[tgt] += 1

        # contiguity: only districts that lost vertices can break. Every
        # component of such a district contains a neighbour of the vertices
        # it lost, so it is connected iff those neighbours are mutually
        # reachable (targets never need a check: each incoming component is
        # connected and touches an unflipped vertex of its target)
        reason = ACCEPTED
        for s in range(n_chosen):
            src = comp_src[chosen_list[s]]
            if dmark[src] == cst:
                continue
            dmark[src] = cst
            if dsize[src] == 0:
                reason = INVALID_CONTIGUITY
                break
            scal[2] += 1
            st = scal[2]
            need = 0
            start = -1
            for s2 in range(s, n_chosen):
                c = chosen_list[s2]
                if comp_src[c] != src:
                    continue
                for q in range(comp_start[c], comp_start[c + 1]):
                    x = comp_verts[q]
                    for t in range(indptr[x], indptr[x + 1]):
                        y = indices[t]
                        if assign[y] == src and mark[y] != -st:
                            mark[y] = -st
                            need += 1
                            if start < 0:
                                start = y
            if need == 0:
                reason = INVALID_CONTIGUITY
                break
            mark[start] = st
            found = 1
            head = 0
            tail = 1
            queue[0] = start
            while head < tail and found < need:
                x = queue[head]
                head += 1
                for t in range(indptr[x], indptr[x + 1]):
                    y = indices[t]
                    if assign[y] == src and mark[y] != st:
                        if mark[y] == -st:
                            found += 1
                        mark[y] = st
                        queue[tail] = y
                        tail += 1
            if found < need:
                reason = INVALID_CONTIGUITY
                break
        for s in range(n_chosen):
            dmark[comp_src[chosen_list[s]]] = 0

        new_cut = cut + dcut
        e_new = e_old
        if reason == ACCEPTED:
            ex_new = _excess(dpops, ideal, tol)
            if ex_new > ex_old:
                reason = TOLERANCE
            else:
                e_new = _energy(dpops, ideal, new_cut, n_edges, bpop, bcomp)
                log_ratio = e_old - e_new
                if log_ratio < 0.0 and np.random.random() >= np.exp(log_ratio):
                    reason = METROPOLIS

        if reason == ACCEPTED:
            scal[1] = new_cut
            for s in range(nflip):
                x = flipped[s]
                c = comp_of[x]
                scal[5] += (comp_target[c] - comp_src[c]) * powers[x]
                _refresh_vertex(x, indptr, indices, assign, cut_deg, bnd_list, bnd_pos, scal)
                for t in range(indptr[x], indptr[x + 1]):
                    _refresh_vertex(indices[t], indptr, indices, assign, cut_deg,
                                    bnd_list, bnd_pos, scal)
            e_old = e_new
        else:
            for s in range(nflip):
                x = flipped[s]
                d = comp_src[comp_of[x]]
                tgt = assign[x]
                assign[x] = d
                dpops[tgt] -= pops[x]
                dpops[d] += pops[x]
                dsize[tgt] -= 1
                dsize[d] += 1

        out_reason[i] = reason
        out_weight[i] = np.exp(-e_old)
        out_cut[i] = scal[1]
        out_code[i] = scal[5]
        i += 1
        if reason == ACCEPTED:
            n_acc += 1
            since = 0
        else:
            since += 1
            if since > stall_cap:
                stalled = True
                break
    scal[4] = since
    return i, n_acc, stalled
