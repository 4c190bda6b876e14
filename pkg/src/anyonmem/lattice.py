"""Lattice geometry: square grids on the sphere and torus.

Sites are indexed row-major; on top of that sits the serpentine site order
(left to right on even rows, right to left on odd ones), which plays two
roles.  It is the linear order along which all anyons are registered, and
it defines how a lattice edge is deformed into a sequence of
nearest-neighbor exchanges: moving along an edge means sliding along the
serpentine, passing every site whose order value lies strictly between
the endpoints.

The sphere is a flat open-boundary grid (with charge-conserving dynamics
a disc with an inert boundary behaves as a sphere) carrying four
distinguished code sites at the edge midpoints.  The torus wraps both
directions; its wraparound edges are the seams, and crossing one is the
event that topological bookkeeping hangs off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

__all__ = ["Lattice", "LinearizedMove", "build_lattice"]


@dataclass(frozen=True)
class LinearizedMove:
    """A lattice edge deformed into serpentine pass steps.

    Each step names a site whose content the mover exchanges past, the
    pass relation (this construction always goes over) and the travel
    direction along the serpentine.  Seam crossings are listed separately
    with their orientation.
    """

    start: int
    terminal: int
    steps: tuple[tuple[int, str, str], ...]  # (site, "over"|"under", "left"|"right")
    seams: tuple[tuple[str, int], ...]  # ("h"|"v", +1|-1)

    def reversed(self) -> "LinearizedMove":
        flip = {"left": "right", "right": "left"}
        steps = tuple((s, rel, flip[d]) for s, rel, d in reversed(self.steps))
        seams = tuple((name, -o) for name, o in reversed(self.seams))
        return LinearizedMove(self.terminal, self.start, steps, seams)


@dataclass(frozen=True)
class Lattice:
    topology: str  # "sphere" | "torus"
    L: int
    rank_of: tuple[int, ...] = field(repr=False)  # site -> serpentine position
    site_of: tuple[int, ...] = field(repr=False)  # serpentine position -> site
    edges: tuple[tuple[int, int], ...] = field(repr=False)  # canonical direction
    code_sites: tuple[int, ...]  # (top, right, bottom, left) on the sphere

    @property
    def n_sites(self) -> int:
        return self.L * self.L

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def site_index(self, row: int, col: int) -> int:
        return row * self.L + col

    def row_col(self, site: int) -> tuple[int, int]:
        return divmod(site, self.L)

    def neighbors(self, site: int) -> tuple[int, ...]:
        return self._neighbors[site]

    # ------------------------------------------------------------------

    def seam_label(self, edge: tuple[int, int]) -> Optional[tuple[str, int]]:
        """(seam name, orientation) for torus wraparound edges, else None.

        Orientation +1 is the canonical crossing direction: rightward
        through the v seam (last column to first), downward through the h
        seam (last row to first).
        """
        a, b = edge
        name = self._seams.get((a, b) if a < b else (b, a))
        if name is None:
            return None
        canon = self._seam_canon[(a, b) if a < b else (b, a)]
        return name, 1 if (a, b) == canon else -1

    def linearize_edge(self, edge: tuple[int, int]) -> LinearizedMove:
        """Deform a directed edge into serpentine pass steps.

        The mover passes over every site ranked strictly between the
        endpoints, in rank order along the travel direction.
        """
        a, b = edge
        ra, rb = self.rank_of[a], self.rank_of[b]
        if a == b or b not in self._neighbors[a]:
            raise ValueError(f"({a}, {b}) is not a lattice edge")
        direction = "right" if rb > ra else "left"
        lo, hi = (ra, rb) if ra < rb else (rb, ra)
        ranks = range(lo + 1, hi) if direction == "right" else range(hi - 1, lo, -1)
        steps = tuple((self.site_of[r], "over", direction) for r in ranks)
        label = self.seam_label(edge)
        seams = (label,) if label is not None else ()
        return LinearizedMove(a, b, steps, seams)

    def graph_distance(self, i: int, j: int) -> int:
        ri, ci = divmod(i, self.L)
        rj, cj = divmod(j, self.L)
        dr, dc = abs(ri - rj), abs(ci - cj)
        if self.topology == "torus":
            dr = min(dr, self.L - dr)
            dc = min(dc, self.L - dc)
        return dr + dc

    def shortest_path(
        self, i: int, j: int, avoid: Iterable[int] = ()
    ) -> Optional[list[int]]:
        """Deterministic minimum-length site path from i to j.

        Ties are broken toward the lowest serpentine rank at every step.
        Sites in ``avoid`` are excluded as interior nodes (endpoints are
        always allowed).  Returns None when ``avoid`` disconnects the
        endpoints.
        """
        if i == j:
            return [i]
        blocked = set(avoid) - {i, j}
        # breadth-first distances from the target, then a greedy descent
        dist = {j: 0}
        frontier = [j]
        while frontier and i not in dist:
            nxt = []
            for s in frontier:
                for t in self._neighbors[s]:
                    if t not in dist and t not in blocked:
                        dist[t] = dist[s] + 1
                        nxt.append(t)
            frontier = nxt
        if i not in dist:
            return None
        path = [i]
        cur = i
        while cur != j:
            cur = min(
                (t for t in self._neighbors[cur] if dist.get(t, -1) == dist[cur] - 1),
                key=lambda t: self.rank_of[t],
            )
            path.append(cur)
        return path

    # populated by build_lattice
    _neighbors: tuple[tuple[int, ...], ...] = field(default=(), repr=False)
    _seams: dict = field(default_factory=dict, repr=False)
    _seam_canon: dict = field(default_factory=dict, repr=False)


def build_lattice(topology: str, L: int) -> Lattice:
    """Construct a sphere or torus lattice of linear size L (even, >= 4)."""
    if topology not in ("sphere", "torus"):
        raise ValueError(f"unknown topology: {topology!r}")
    if L < 4 or L % 2:
        raise ValueError("L must be even and at least 4")

    def index(r: int, c: int) -> int:
        return r * L + c

    rank_of = [0] * (L * L)
    site_of = [0] * (L * L)
    for r in range(L):
        for c in range(L):
            pos = r * L + (c if r % 2 == 0 else L - 1 - c)
            rank_of[index(r, c)] = pos
            site_of[pos] = index(r, c)

    edges: list[tuple[int, int]] = []
    seams: dict[tuple[int, int], str] = {}
    seam_canon: dict[tuple[int, int], tuple[int, int]] = {}
    for r in range(L):
        for c in range(L):
            s = index(r, c)
            if c + 1 < L:
                edges.append((s, index(r, c + 1)))
            elif topology == "torus":
                e = (s, index(r, 0))  # canonical: rightward wrap
                edges.append(e)
                key = (min(e), max(e))
                seams[key] = "v"
                seam_canon[key] = e
            if r + 1 < L:
                edges.append((s, index(r + 1, c)))
            elif topology == "torus":
                e = (s, index(0, c))  # canonical: downward wrap
                edges.append(e)
                key = (min(e), max(e))
                seams[key] = "h"
                seam_canon[key] = e

    nbrs: list[list[int]] = [[] for _ in range(L * L)]
    for a, b in edges:
        nbrs[a].append(b)
        nbrs[b].append(a)
    neighbors = tuple(tuple(sorted(ns, key=lambda s: rank_of[s])) for ns in nbrs)

    if topology == "sphere":
        half = L // 2
        code = (index(0, half), index(half, L - 1), index(L - 1, half), index(half, 0))
    else:
        code = ()

    lat = Lattice(
        topology=topology,
        L=L,
        rank_of=tuple(rank_of),
        site_of=tuple(site_of),
        edges=tuple(edges),
        code_sites=code,
        _neighbors=neighbors,
        _seams=seams,
        _seam_canon=seam_canon,
    )
    return lat
