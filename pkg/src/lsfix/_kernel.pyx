# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernel_py``; same contracts."""

from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc


cdef struct Search:
    int n
    int64_t *cost          # flattened candidate costs
    int *cost_off          # offset of variable v in cost
    int *ncand
    int64_t *floor         # suffix sums of cheapest costs
    unsigned char *flags   # flattened membership flags of all nogood entries
    int *ent_var           # per entry: variable
    int *ent_off           # per entry: offset into flags
    int *lvl_start         # nogoods grouped by their last variable
    int *lvl_ng
    int *ng_last           # per nogood: entry index of its last variable
    int *ng_first          # per nogood: first entry index of the others
    int *ng_count          # per nogood: number of other entries
    int *assign
    int64_t best
    bint has_best
    long long explored
    long long max_nodes
    long long max_solutions
    int abort


cdef void _rec(Search *s, int v, int64_t partial, list solutions):
    cdef int c, k, g, e, j, u, off
    cdef int64_t total
    cdef bint blocked, hit
    cdef int nc = s.ncand[v]
    off = s.cost_off[v]
    for c in range(nc):
        total = partial + s.cost[off + c]
        if s.has_best and total + s.floor[v + 1] > s.best:
            break
        s.explored += 1
        if s.explored > s.max_nodes:
            s.abort = -1
            return
        blocked = False
        for k in range(s.lvl_start[v], s.lvl_start[v + 1]):
            g = s.lvl_ng[k]
            e = s.ng_last[g]
            if not s.flags[s.ent_off[e] + c]:
                continue
            hit = True
            for j in range(s.ng_first[g], s.ng_first[g] + s.ng_count[g]):
                u = s.ent_var[j]
                if not s.flags[s.ent_off[j] + s.assign[u]]:
                    hit = False
                    break
            if hit:
                blocked = True
                break
        if blocked:
            continue
        s.assign[v] = c
        if v + 1 == s.n:
            if not s.has_best or total < s.best:
                s.best = total
                s.has_best = True
                del solutions[:]
                solutions.append(tuple([s.assign[i] for i in range(s.n)]))
            else:
                solutions.append(tuple([s.assign[i] for i in range(s.n)]))
                if len(solutions) > s.max_solutions:
                    s.abort = -2
                    return
        else:
            _rec(s, v + 1, total, solutions)
            if s.abort:
                return


def _sorted_groups(nogoods):
    # entries sorted so the last one carries the highest variable
    return [sorted((var, sorted(set(allowed))) for var, allowed in g) for g in nogoods]


def min_cost_assignments(costs, nogoods, long long max_nodes, long long max_solutions):
    cdef int n = len(costs)
    if n == 0:
        return 0, [()], 0
    for row in costs:
        if not row:
            return None, [], 0

    groups = _sorted_groups(nogoods)
    n_ent = 0
    flag_len = 0
    for grp in groups:
        n_ent += len(grp)
        for ent in grp:
            flag_len += len(costs[ent[0]])

    cdef Search s
    s.n = n
    s.abort = 0
    s.explored = 0
    s.has_best = False
    s.best = 0
    s.max_nodes = max_nodes
    s.max_solutions = max_solutions
    total_c = sum(len(r) for r in costs)
    s.cost = <int64_t *> malloc(max(total_c, 1) * sizeof(int64_t))
    s.cost_off = <int *> malloc(n * sizeof(int))
    s.ncand = <int *> malloc(n * sizeof(int))
    s.floor = <int64_t *> malloc((n + 1) * sizeof(int64_t))
    s.flags = <unsigned char *> malloc(max(flag_len, 1))
    s.ent_var = <int *> malloc(max(n_ent, 1) * sizeof(int))
    s.ent_off = <int *> malloc(max(n_ent, 1) * sizeof(int))
    s.lvl_start = <int *> malloc((n + 1) * sizeof(int))
    s.lvl_ng = <int *> malloc(max(len(groups), 1) * sizeof(int))
    s.ng_last = <int *> malloc(max(len(groups), 1) * sizeof(int))
    s.ng_first = <int *> malloc(max(len(groups), 1) * sizeof(int))
    s.ng_count = <int *> malloc(max(len(groups), 1) * sizeof(int))
    s.assign = <int *> malloc(n * sizeof(int))
    cdef int i, v, c, pos, e, fpos, gi
    try:
        pos = 0
        for v in range(n):
            s.cost_off[v] = pos
            s.ncand[v] = len(costs[v])
            s.assign[v] = 0
            for c in range(len(costs[v])):
                s.cost[pos] = costs[v][c]
                pos += 1
        s.floor[n] = 0
        for v in range(n - 1, -1, -1):
            s.floor[v] = s.floor[v + 1] + s.cost[s.cost_off[v]]
        for i in range(flag_len):
            s.flags[i] = 0
        e = 0
        fpos = 0
        for gi in range(len(groups)):
            grp = groups[gi]
            s.ng_first[gi] = e
            s.ng_count[gi] = len(grp) - 1
            for ent in grp:
                v = ent[0]
                s.ent_var[e] = v
                s.ent_off[e] = fpos
                for c in ent[1]:
                    s.flags[fpos + c] = 1
                fpos += s.ncand[v]
                e += 1
            s.ng_last[gi] = e - 1
        levels = [[] for _ in range(n)]
        for gi in range(len(groups)):
            v = groups[gi][len(groups[gi]) - 1][0]
            levels[v].append(gi)
        pos = 0
        for v in range(n):
            s.lvl_start[v] = pos
            for gi in levels[v]:
                s.lvl_ng[pos] = gi
                pos += 1
        s.lvl_start[n] = pos

        solutions = []
        _rec(&s, 0, 0, solutions)
        best = s.best if s.has_best else None
        if s.abort:
            return best, solutions, s.abort
        return best, solutions, s.explored
    finally:
        free(s.cost); free(s.cost_off); free(s.ncand); free(s.floor); free(s.flags)
        free(s.ent_var); free(s.ent_off); free(s.lvl_start); free(s.lvl_ng)
        free(s.ng_last); free(s.ng_first); free(s.ng_count); free(s.assign)


cdef struct Cover:
    int m
    int nbits
    uint64_t full
    uint64_t *masks
    int64_t *weights
    int64_t *cheapest
    int *holders        # flattened per element
    int *hold_off
    int *hold_n
    int *chosen
    int nchosen
    int64_t best
    bint has_best
    long long explored
    long long max_nodes
    bint abort


cdef inline int _lowbit(uint64_t x):
    cdef int e = 0
    while not (x & 1):
        x >>= 1
        e += 1
    return e


cdef void _cover_rec(Cover *s, uint64_t covered, int64_t weight, set out):
    cdef uint64_t rest, low
    cdef int e, k, pick, pick_n, j, i
    cdef int64_t lb
    cdef bint dup
    s.explored += 1
    if s.explored > s.max_nodes:
        s.abort = True
        return
    if covered == s.full:
        key = tuple(sorted([s.chosen[j] for j in range(s.nchosen)]))
        if not s.has_best or weight < s.best:
            s.best = weight
            s.has_best = True
            out.clear()
            out.add(key)
        elif weight == s.best:
            out.add(key)
        return
    rest = s.full & ~covered
    lb = 0
    pick = -1
    pick_n = s.m + 1
    while rest:
        low = rest & (~rest + 1)
        e = _lowbit(low)
        if s.cheapest[e] > lb:
            lb = s.cheapest[e]
        if s.hold_n[e] < pick_n:
            pick = e
            pick_n = s.hold_n[e]
        rest ^= low
    if s.has_best and weight + lb > s.best:
        return
    for k in range(s.hold_off[pick], s.hold_off[pick] + s.hold_n[pick]):
        i = s.holders[k]
        dup = False
        for j in range(s.nchosen):
            if s.chosen[j] == i:
                dup = True
                break
        if dup:
            continue
        s.chosen[s.nchosen] = i
        s.nchosen += 1
        _cover_rec(s, covered | s.masks[i], weight + s.weights[i], out)
        s.nchosen -= 1
        if s.abort:
            return


def optimal_covers(masks, weights, long long max_nodes):
    cdef int m = len(masks)
    full_py = 0
    for mk in masks:
        full_py |= mk
    if full_py == 0:
        return 0, [()], 0
    if full_py.bit_length() > 64:
        raise OverflowError("compiled cover kernel handles at most 64 elements")
    cdef Cover s
    cdef int e, i, pos
    s.m = m
    s.nbits = full_py.bit_length()
    s.full = full_py
    s.masks = <uint64_t *> malloc(m * sizeof(uint64_t))
    s.weights = <int64_t *> malloc(m * sizeof(int64_t))
    s.cheapest = <int64_t *> malloc(s.nbits * sizeof(int64_t))
    s.holders = <int *> malloc(max(m * s.nbits, 1) * sizeof(int))
    s.hold_off = <int *> malloc(s.nbits * sizeof(int))
    s.hold_n = <int *> malloc(s.nbits * sizeof(int))
    s.chosen = <int *> malloc(max(m, 1) * sizeof(int))
    s.nchosen = 0
    s.has_best = False
    s.best = 0
    s.explored = 0
    s.max_nodes = max_nodes
    s.abort = False
    try:
        for i in range(m):
            s.masks[i] = masks[i]
            s.weights[i] = weights[i]
        pos = 0
        for e in range(s.nbits):
            s.hold_off[e] = pos
            s.hold_n[e] = 0
            s.cheapest[e] = 0
            for i in range(m):
                if (s.masks[i] >> e) & 1:
                    if s.hold_n[e] == 0 or s.weights[i] < s.cheapest[e]:
                        s.cheapest[e] = s.weights[i]
                    s.holders[pos] = i
                    pos += 1
                    s.hold_n[e] += 1
        out = set()
        _cover_rec(&s, 0, 0, out)
        best = s.best if s.has_best else None
        return best, sorted(out), (-1 if s.abort else s.explored)
    finally:
        free(s.masks); free(s.weights); free(s.cheapest); free(s.holders)
        free(s.hold_off); free(s.hold_n); free(s.chosen)
