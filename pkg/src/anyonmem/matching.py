"""Exact minimum-weight perfect matching on general weighted graphs.

The solver is a primal-dual blossom algorithm over flat integer arrays,
compiled with numba so that decoder-sized instances (a few hundred
nodes, dense) run in milliseconds.  Duals are kept integral by the
usual device of doubling edge weights internally, so optimality is
exact with no floating point anywhere.

Minimum weight is reduced to maximum weight by the inflation map
``w -> K + C - w`` with ``C`` one more than the largest weight and
``K = n*C``.  Inflation makes every larger-cardinality matching beat
every smaller one, so the maximum-weight matching is perfect exactly
when a perfect matching exists, and among perfect matchings the
original weight is minimized.

A bitmask dynamic program over node subsets serves as the brute-force
oracle for differential tests on small instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from numba import njit

__all__ = [
    "WeightedGraph",
    "brute_force_mwpm",
    "matching_weight",
    "min_weight_perfect_matching",
]


def _as_weight(w):
    """Coerce a weight to int or Fraction; floats must be integral."""
    if isinstance(w, (int, np.integer)):
        return int(w)
    if isinstance(w, Fraction):
        return int(w) if w.denominator == 1 else w
    if isinstance(w, float):
        if w.is_integer():
            return int(w)
        raise ValueError(
            f"non-integral float weight {w!r}; pass a Fraction for exact rationals"
        )
    raise TypeError(f"unsupported weight type {type(w).__name__}")


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with non-negative integer or rational edge weights."""

    n: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("node count must be non-negative")
        object.__setattr__(
            self,
            "edges",
            tuple((int(u), int(v), _as_weight(w)) for u, v, w in self.edges),
        )
        for u, v, w in self.edges:
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if w < 0:
                raise ValueError("negative weight")

    def integer_edges(self) -> tuple[tuple[int, int, int], ...]:
        """Edges with weights scaled by the common denominator."""
        scale = math.lcm(
            *(w.denominator for _, _, w in self.edges if isinstance(w, Fraction)),
            1,
        )
        if scale == 1:
            return self.edges
        return tuple((u, v, int(w * scale)) for u, v, w in self.edges)


def matching_weight(graph: WeightedGraph, pairs) -> int:
    """Total weight of a matching, taking the cheapest parallel edge."""
    best: dict[tuple[int, int], int] = {}
    for u, v, w in graph.edges:
        key = (u, v) if u < v else (v, u)
        if key not in best or w < best[key]:
            best[key] = w
    total = 0
    for u, v in pairs:
        total += best[(u, v) if u < v else (v, u)]
    return total


def min_weight_perfect_matching(
    graph: WeightedGraph,
) -> Optional[tuple[tuple[int, int], ...]]:
    """Exact minimum-weight perfect matching, or None when none exists."""
    n = graph.n
    if n == 0:
        return ()
    if n % 2 or not graph.edges:
        return None
    edges = graph.integer_edges()
    wmax = max(w for _, _, w in edges)
    c = wmax + 1
    k = n * c
    dense = np.zeros((n + 1, n + 1), dtype=np.int64)
    for u, v, w in edges:
        t = k + c - w  # larger transformed weight = cheaper edge
        if t > dense[u + 1, v + 1]:
            dense[u + 1, v + 1] = t
            dense[v + 1, u + 1] = t
    match = _blossom(n, dense)
    if match[1:].min() == 0:
        return None
    return tuple(
        (u - 1, int(match[u]) - 1) for u in range(1, n + 1) if u < match[u]
    )


def brute_force_mwpm(
    graph: WeightedGraph,
) -> Optional[tuple[tuple[int, int], ...]]:
    """Exhaustive minimum-weight perfect matching for n <= 14."""
    n = graph.n
    if n > 14:
        raise ValueError("brute force is limited to 14 nodes")
    if n == 0:
        return ()
    if n % 2:
        return None
    none = 1 << 62
    dense = np.full((n, n), none, dtype=np.int64)
    for u, v, w in graph.integer_edges():
        if w < dense[u, v]:
            dense[u, v] = w
            dense[v, u] = w
    full = (1 << n) - 1
    cost = np.full(full + 1, none, dtype=np.int64)
    take = np.zeros(full + 1, dtype=np.int64)
    cost[0] = 0
    for mask in range(1, full + 1):
        u = (mask & -mask).bit_length() - 1
        if not (bin(mask).count("1") % 2 == 0):
            continue
        rest = mask ^ (1 << u)
        v = rest
        while v:
            b = v & -v
            j = b.bit_length() - 1
            prev = cost[mask ^ (1 << u) ^ b]
            if prev < none and dense[u, j] < none and prev + dense[u, j] < cost[mask]:
                cost[mask] = prev + dense[u, j]
                take[mask] = (1 << u) | b
            v ^= b
    if cost[full] >= none:
        return None
    pairs = []
    mask = full
    while mask:
        pair = int(take[mask])
        u = (pair & -pair).bit_length() - 1
        j = (pair ^ (pair & -pair)).bit_length() - 1
        pairs.append((min(u, j), max(u, j)))
        mask ^= pair
    return tuple(sorted(pairs))


# ----------------------------------------------------------------------
# blossom core: flat arrays, 1-indexed nodes, ids n+1.. for blossoms


@njit(cache=True)
def _delta(gu, gv, gw, lab, a, b):
    eu, ev = gu[a, b], gv[a, b]
    return lab[eu] + lab[ev] - gw[eu, ev] * 2


@njit(cache=True)
def _update_slack(gu, gv, gw, lab, slack, u, x):
    if slack[x] == 0 or _delta(gu, gv, gw, lab, u, x) < _delta(
        gu, gv, gw, lab, slack[x], x
    ):
        slack[x] = u


@njit(cache=True)
def _set_slack(gu, gv, gw, lab, slack, st, S, n, x):
    slack[x] = 0
    for u in range(1, n + 1):
        if gw[u, x] > 0 and st[u] != x and S[st[u]] == 0:
            _update_slack(gu, gv, gw, lab, slack, u, x)


@njit(cache=True)
def _q_push(q, meta, flower, flower_len, n, x):
    # push the real members of x onto the queue, depth first
    stack = np.empty(2 * n + 2, np.int64)
    top = 0
    stack[0] = x
    while top >= 0:
        y = stack[top]
        top -= 1
        if y <= n:
            q[meta[3] % q.shape[0]] = y
            meta[3] += 1
        else:
            for i in range(flower_len[y]):
                top += 1
                stack[top] = flower[y, i]


@njit(cache=True)
def _set_st(st, flower, flower_len, n, x, b):
    stack = np.empty(2 * n + 2, np.int64)
    top = 0
    stack[0] = x
    while top >= 0:
        y = stack[top]
        top -= 1
        st[y] = b
        if y > n:
            for i in range(flower_len[y]):
                top += 1
                stack[top] = flower[y, i]


@njit(cache=True)
def _get_pr(flower, flower_len, b, xr):
    ln = flower_len[b]
    pr = 0
    for i in range(ln):
        if flower[b, i] == xr:
            pr = i
            break
    if pr % 2 == 1:
        # walk the cycle the other way round, keeping slot 0
        lo, hi = 1, ln - 1
        while lo < hi:
            flower[b, lo], flower[b, hi] = flower[b, hi], flower[b, lo]
            lo += 1
            hi -= 1
        return ln - pr
    return pr


@njit(cache=True)
def _set_match(gu, gv, match, flower, flower_len, flower_from, n, u0, v0):
    stack_u = np.empty(4 * n + 4, np.int64)
    stack_v = np.empty(4 * n + 4, np.int64)
    top = 0
    stack_u[0], stack_v[0] = u0, v0
    while top >= 0:
        u, v = stack_u[top], stack_v[top]
        top -= 1
        match[u] = gv[u, v]
        if u <= n:
            continue
        xr = flower_from[u, gu[u, v]]
        pr = _get_pr(flower, flower_len, u, xr)
        for i in range(pr):
            top += 1
            stack_u[top], stack_v[top] = flower[u, i], flower[u, i ^ 1]
        top += 1
        stack_u[top], stack_v[top] = xr, v
        # rotate the cycle so xr leads; children tasks reference their
        # own flowers, so doing this now is safe
        ln = flower_len[u]
        tmp = np.empty(ln, np.int64)
        for i in range(ln):
            tmp[i] = flower[u, (pr + i) % ln]
        for i in range(ln):
            flower[u, i] = tmp[i]


@njit(cache=True)
def _augment(gu, gv, match, st, pa, flower, flower_len, flower_from, n, u, v):
    while True:
        xnv = st[match[u]]
        _set_match(gu, gv, match, flower, flower_len, flower_from, n, u, v)
        if xnv == 0:
            return
        _set_match(
            gu, gv, match, flower, flower_len, flower_from, n, xnv, st[pa[xnv]]
        )
        u, v = st[pa[xnv]], xnv


@njit(cache=True)
def _get_lca(match, st, pa, vis, meta, u, v):
    meta[4] += 1
    t = meta[4]
    while u != 0 or v != 0:
        if u != 0:
            if vis[u] == t:
                return u
            vis[u] = t
            u = st[match[u]]
            if u != 0:
                u = st[pa[u]]
        u, v = v, u
    return 0


@njit(cache=True)
def _add_blossom(
    gu, gv, gw, lab, match, slack, st, pa, S, flower, flower_len, flower_from,
    q, meta, n, u, lca, v,
):
    b = n + 1
    while b <= meta[1] and st[b] != 0:
        b += 1
    if b > meta[1]:
        meta[1] += 1
    lab[b] = 0
    S[b] = 0
    match[b] = match[lca]
    flower_len[b] = 0
    flower[b, 0] = lca
    flower_len[b] = 1
    x = u
    while x != lca:
        flower[b, flower_len[b]] = x
        flower_len[b] += 1
        y = st[match[x]]
        flower[b, flower_len[b]] = y
        flower_len[b] += 1
        _q_push(q, meta, flower, flower_len, n, y)
        x = st[pa[y]]
    # reverse everything after slot 0 so the u-path runs backwards
    lo, hi = 1, flower_len[b] - 1
    while lo < hi:
        flower[b, lo], flower[b, hi] = flower[b, hi], flower[b, lo]
        lo += 1
        hi -= 1
    x = v
    while x != lca:
        flower[b, flower_len[b]] = x
        flower_len[b] += 1
        y = st[match[x]]
        flower[b, flower_len[b]] = y
        flower_len[b] += 1
        _q_push(q, meta, flower, flower_len, n, y)
        x = st[pa[y]]
    _set_st(st, flower, flower_len, n, b, b)
    for x in range(1, meta[1] + 1):
        gw[b, x] = 0
        gw[x, b] = 0
    for x in range(1, n + 1):
        flower_from[b, x] = 0
    for i in range(flower_len[b]):
        xs = flower[b, i]
        for x in range(1, meta[1] + 1):
            if gw[b, x] == 0 or (
                gw[xs, x] > 0
                and _delta(gu, gv, gw, lab, xs, x) < _delta(gu, gv, gw, lab, b, x)
            ):
                gu[b, x], gv[b, x], gw[b, x] = gu[xs, x], gv[xs, x], gw[xs, x]
                gu[x, b], gv[x, b], gw[x, b] = gu[x, xs], gv[x, xs], gw[x, xs]
        for x in range(1, n + 1):
            if flower_from[xs, x] != 0:
                flower_from[b, x] = xs
    _set_slack(gu, gv, gw, lab, slack, st, S, n, b)


@njit(cache=True)
def _expand_blossom(
    gu, gv, gw, lab, slack, st, pa, S, flower, flower_len, flower_from,
    q, meta, n, b,
):
    for i in range(flower_len[b]):
        _set_st(st, flower, flower_len, n, flower[b, i], flower[b, i])
    xr = flower_from[b, gu[b, pa[b]]]
    pr = _get_pr(flower, flower_len, b, xr)
    i = 0
    while i < pr:
        xs = flower[b, i]
        xns = flower[b, i + 1]
        pa[xs] = gu[xns, xs]
        S[xs] = 1
        S[xns] = 0
        slack[xs] = 0
        _set_slack(gu, gv, gw, lab, slack, st, S, n, xns)
        _q_push(q, meta, flower, flower_len, n, xns)
        i += 2
    S[xr] = 1
    pa[xr] = pa[b]
    for i in range(pr + 1, flower_len[b]):
        xs = flower[b, i]
        S[xs] = -1
        _set_slack(gu, gv, gw, lab, slack, st, S, n, xs)
    st[b] = 0


@njit(cache=True)
def _on_found_edge(
    gu, gv, gw, lab, match, slack, st, pa, S, vis, flower, flower_len,
    flower_from, q, meta, n, eu, ev,
):
    # returns True when an augmenting path was applied
    u, v = st[eu], st[ev]
    if S[v] == -1:
        pa[v] = eu
        S[v] = 1
        nu = st[match[v]]
        slack[v] = 0
        slack[nu] = 0
        S[nu] = 0
        _q_push(q, meta, flower, flower_len, n, nu)
    elif S[v] == 0:
        lca = _get_lca(match, st, pa, vis, meta, u, v)
        if lca == 0:
            _augment(gu, gv, match, st, pa, flower, flower_len, flower_from, n, u, v)
            _augment(gu, gv, match, st, pa, flower, flower_len, flower_from, n, v, u)
            return True
        _add_blossom(
            gu, gv, gw, lab, match, slack, st, pa, S, flower, flower_len,
            flower_from, q, meta, n, u, lca, v,
        )
    return False


@njit(cache=True)
def _matching_round(
    gu, gv, gw, lab, match, slack, st, pa, S, vis, flower, flower_len,
    flower_from, q, meta, n,
):
    # one augmentation attempt; True if the matching grew
    for x in range(1, meta[1] + 1):
        S[x] = -1
        slack[x] = 0
    meta[2] = 0
    meta[3] = 0
    for x in range(1, meta[1] + 1):
        if st[x] == x and match[x] == 0:
            pa[x] = 0
            S[x] = 0
            _q_push(q, meta, flower, flower_len, n, x)
    if meta[2] == meta[3]:
        return False
    cap = q.shape[0]
    while True:
        while meta[2] < meta[3]:
            u = q[meta[2] % cap]
            meta[2] += 1
            if S[st[u]] == 1:
                continue
            for v in range(1, n + 1):
                if gw[u, v] > 0 and st[u] != st[v]:
                    if _delta(gu, gv, gw, lab, u, v) == 0:
                        if _on_found_edge(
                            gu, gv, gw, lab, match, slack, st, pa, S, vis,
                            flower, flower_len, flower_from, q, meta, n, u, v,
                        ):
                            return True
                    else:
                        _update_slack(gu, gv, gw, lab, slack, u, st[v])
        d = np.int64(1 << 60)
        for b in range(n + 1, meta[1] + 1):
            if st[b] == b and S[b] == 1 and lab[b] // 2 < d:
                d = lab[b] // 2
        for x in range(1, meta[1] + 1):
            if st[x] == x and slack[x] != 0:
                if S[x] == -1:
                    dx = _delta(gu, gv, gw, lab, slack[x], x)
                    if dx < d:
                        d = dx
                elif S[x] == 0:
                    dx = _delta(gu, gv, gw, lab, slack[x], x) // 2
                    if dx < d:
                        d = dx
        stuck = True
        for u in range(1, n + 1):
            if S[st[u]] == 0:
                if lab[u] <= d:
                    return False
                lab[u] -= d
                stuck = False
            elif S[st[u]] == 1:
                lab[u] += d
                stuck = False
        if stuck:
            return False
        for b in range(n + 1, meta[1] + 1):
            if st[b] == b:
                if S[b] == 0:
                    lab[b] += 2 * d
                elif S[b] == 1:
                    lab[b] -= 2 * d
        meta[2] = 0
        meta[3] = 0
        for x in range(1, meta[1] + 1):
            if (
                st[x] == x
                and slack[x] != 0
                and st[slack[x]] != x
                and _delta(gu, gv, gw, lab, slack[x], x) == 0
            ):
                if _on_found_edge(
                    gu, gv, gw, lab, match, slack, st, pa, S, vis, flower,
                    flower_len, flower_from, q, meta, n, slack[x], x,
                ):
                    return True
        for b in range(n + 1, meta[1] + 1):
            if st[b] == b and S[b] == 1 and lab[b] == 0:
                _expand_blossom(
                    gu, gv, gw, lab, slack, st, pa, S, flower, flower_len,
                    flower_from, q, meta, n, b,
                )


@njit(cache=True)
def _blossom(n, dense):
    m = 2 * n + 1
    gu = np.zeros((m, m), np.int64)
    gv = np.zeros((m, m), np.int64)
    gw = np.zeros((m, m), np.int64)
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            gu[u, v] = u
            gv[u, v] = v
            gw[u, v] = dense[u, v]
    lab = np.zeros(m, np.int64)
    match = np.zeros(m, np.int64)
    slack = np.zeros(m, np.int64)
    st = np.zeros(m, np.int64)
    pa = np.zeros(m, np.int64)
    S = np.full(m, -1, np.int64)
    vis = np.zeros(m, np.int64)
    flower = np.zeros((m, n + 2), np.int64)
    flower_len = np.zeros(m, np.int64)
    flower_from = np.zeros((m, n + 1), np.int64)
    q = np.zeros(4 * m, np.int64)
    meta = np.zeros(6, np.int64)
    meta[0] = n
    meta[1] = n
    for x in range(m):
        st[x] = x
    for u in range(1, n + 1):
        flower_from[u, u] = u
    wmax = np.int64(0)
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            if dense[u, v] > wmax:
                wmax = dense[u, v]
    for u in range(1, n + 1):
        lab[u] = wmax
    while _matching_round(
        gu, gv, gw, lab, match, slack, st, pa, S, vis, flower, flower_len,
        flower_from, q, meta, n,
    ):
        pass
    return match[: n + 1]
