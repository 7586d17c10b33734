"""Pure-Python search kernels (reference implementation and fallback).

Both kernels work on plain integers so the compiled twin in ``_kernel.pyx``
can mirror them line for line.
"""

from __future__ import annotations


def min_cost_assignments(costs, nogoods, max_nodes, max_solutions):
    """Enumerate every minimum-cost choice of one candidate per variable.

    ``costs[v]`` lists the (ascending, nonnegative) integer costs of the
    candidates of variable ``v``. ``nogoods`` is a list of conjunctions
    ``[(v, allowed), ...]``: an assignment is forbidden when every listed
    variable picks a candidate in its ``allowed`` collection.

    Returns ``(best, solutions, explored)``; ``best`` is ``None`` when no
    assignment avoids all nogoods. ``explored`` exceeding ``max_nodes`` or
    the solution count exceeding ``max_solutions`` aborts the search early
    with ``explored = -1`` (nodes) or ``-2`` (solutions).
    """
    n = len(costs)
    if n == 0:
        return 0, [()], 0
    member = []
    by_level = [[] for _ in range(n)]
    for g in nogoods:
        entries = []
        for v, allowed in g:
            flags = bytearray(len(costs[v]))
            for c in allowed:
                flags[c] = 1
            entries.append((v, flags))
        entries.sort()
        last_v, last_flags = entries[-1]
        by_level[last_v].append((last_flags, entries[:-1]))
        member.append(entries)
    floor = [0] * (n + 1)
    for v in range(n - 1, -1, -1):
        if not costs[v]:
            return None, [], 0
        floor[v] = floor[v + 1] + costs[v][0]

    assign = [0] * n
    state = {"best": None, "solutions": [], "explored": 0, "abort": 0}

    def rec(v, partial):
        checks = by_level[v]
        row = costs[v]
        for c in range(len(row)):
            total = partial + row[c]
            best = state["best"]
            if best is not None and total + floor[v + 1] > best:
                break
            state["explored"] += 1
            if state["explored"] > max_nodes:
                state["abort"] = -1
                return
            blocked = False
            for flags, rest in checks:
                if not flags[c]:
                    continue
                for u, uf in rest:
                    if not uf[assign[u]]:
                        break
                else:
                    blocked = True
                    break
            if blocked:
                continue
            assign[v] = c
            if v + 1 == n:
                if best is None or total < best:
                    state["best"] = total
                    state["solutions"] = [tuple(assign)]
                else:
                    state["solutions"].append(tuple(assign))
                    if len(state["solutions"]) > max_solutions:
                        state["abort"] = -2
                        return
            else:
                rec(v + 1, total)
                if state["abort"]:
                    return

    rec(0, 0)
    if state["abort"]:
        return state["best"], state["solutions"], state["abort"]
    return state["best"], state["solutions"], state["explored"]


def optimal_covers(masks, weights, max_nodes):
    """All minimum-weight covers of ``full = OR(masks)`` by integer-weighted sets.

    ``masks[i]`` is the element bitmask of set ``i`` and ``weights[i] > 0``.
    Branches on the uncovered element with the fewest covering sets.
    Returns ``(best, covers, explored)`` with covers as sorted index tuples;
    ``explored == -1`` signals the node limit.
    """
    m = len(masks)
    full = 0
    for mk in masks:
        full |= mk
    if full == 0:
        return 0, [()], 0
    nbits = full.bit_length()
    holders = [[i for i in range(m) if masks[i] >> e & 1] for e in range(nbits)]
    cheapest = [min((weights[i] for i in h), default=0) for h in holders]
    state = {"best": None, "covers": set(), "explored": 0, "abort": False}
    chosen = []

    def bound(covered):
        # every uncovered element needs some set; the dearest cheapest-holder is a lower bound
        lb = 0
        rest = full & ~covered
        while rest:
            low = rest & -rest
            e = low.bit_length() - 1
            if cheapest[e] > lb:
                lb = cheapest[e]
            rest ^= low
        return lb

    def rec(covered, weight):
        state["explored"] += 1
        if state["explored"] > max_nodes:
            state["abort"] = True
            return
        if covered == full:
            best = state["best"]
            key = tuple(sorted(chosen))
            if best is None or weight < best:
                state["best"] = weight
                state["covers"] = {key}
            elif weight == best:
                state["covers"].add(key)
            return
        best = state["best"]
        if best is not None and weight + bound(covered) > best:
            return
        rest = full & ~covered
        pick, pick_n = -1, m + 1
        while rest:
            low = rest & -rest
            e = low.bit_length() - 1
            k = len(holders[e])
            if k < pick_n:
                pick, pick_n = e, k
            rest ^= low
        for i in holders[pick]:
            if i in chosen:
                continue
            chosen.append(i)
            rec(covered | masks[i], weight + weights[i])
            chosen.pop()
            if state["abort"]:
                return

    rec(0, 0)
    if state["abort"]:
        return state["best"], sorted(state["covers"]), -1
    return state["best"], sorted(state["covers"]), state["explored"]
