"""Iterative decoders driving a live anyon system toward the code space.

Three strategies share the same physical toolkit (decohere to learn the
charge layout, sweep charges along site paths, fuse at a terminal):

* simple clustering: every charged site seeds a cluster; each round
  every cluster fuses internally, settled clusters retire (bulk
  clusters once they carry vacuum, code-site clusters once they carry
  exactly the sigma they are supposed to hold), and the rest grow by a
  fixed graph-distance increment and merge on overlap.  On the torus
  the loop instead stops when one cluster is left; if that survivor
  still carries charge the decoder reports a detected failure.  Code
  sites are pre-seeded with their own clusters so wandering code
  anyons are returned, and any ball that grows over a code site roots
  its fusion result there.
* fusion-aware clustering: the same engine run twice, first sweeping
  only sigma-carrying sites, then only fermion sites.  During the
  fermion phase the code sites are fenced off from sweeps so restored
  sigmas stay put; a fermion cluster whose ball reaches a code site
  retires by absorbing its fermion into the code sigma instead.
* perfect matching: pair up same-species charges via a minimum-weight
  perfect matching on graph distances and fuse matched pairs along
  deterministic shortest paths.  The four-corner memory adds one
  virtual partner per real node, priced at the distance to the nearest
  code site, with a zero-weight virtual clique; charges matched to
  their virtual partner are fused into that code site.  On the torus an
  odd species count admits no pairing and decoding fails outright.

Every fusion outcome is drawn through the system's tableau, so decoder
runs are deterministic given the trial's random stream.  Reports count
elementary fusions (objects merged minus one per gather), which makes
the zero-noise run report exactly zero work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil
from typing import Optional

from .model import Charge
from .matching import WeightedGraph, min_weight_perfect_matching

__all__ = [
    "Cluster",
    "DecoderReport",
    "CONVERGED",
    "FAILURE_DETECTED",
    "decode_cluster_simple",
    "decode_cluster_aware",
    "decode_pma",
]

CONVERGED = "converged"
FAILURE_DETECTED = "failure-detected"


@dataclass
class DecoderReport:
    rounds: int
    fusions: int
    status: str

    def __post_init__(self) -> None:
        if self.status not in (CONVERGED, FAILURE_DETECTED):
            raise ValueError(f"unknown status {self.status!r}")


@dataclass
class Cluster:
    members: set[int]
    radius: int
    root: int
    alive: bool = True
    ball: frozenset[int] = field(default_factory=frozenset)
    leftover: bool = False


def _lattice_diameter(lattice) -> int:
    if lattice.topology == "torus":
        return 2 * (lattice.L // 2)
    return 2 * (lattice.L - 1)


def _choose_root(lattice, members, code_sites) -> int:
    """Lowest serpentine-rank member, but code sites take precedence."""
    anchored = members & code_sites
    pool = anchored if anchored else members
    return min(pool, key=lambda s: lattice.rank_of[s])


def _grow_ball(lattice, members, radius) -> frozenset[int]:
    seen = set(members)
    frontier = list(members)
    for _ in range(radius):
        nxt = []
        for s in frontier:
            for t in lattice.neighbors(s):
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    return frozenset(seen)


def _count_objects(system, sites) -> int:
    return sum(system.n_sigma(s) + system.n_psi[s] for s in sites)


def _gather(
    system, ball, root, blocked=frozenset(), sigma_only=False
) -> tuple[Charge, int, bool]:
    """Sweep charges in the ball to the root along a breadth-first tree
    and fuse them there.

    Blocked sites are fenced off entirely; with sigma_only, sites that
    hold no sigma at sweep time stay put (resting fermions are left for
    a later phase).  Returns the fused charge, the number of elementary
    fusions performed, and whether any charge in the ball was left
    behind (unreachable around a fence, or off-species)."""
    lattice = system.lattice
    parent = {root: root}
    order = [root]
    frontier = [root]
    while frontier:
        nxt = []
        for s in frontier:
            for t in lattice.neighbors(s):
                if t in ball and t not in blocked and t not in parent:
                    parent[t] = s
                    order.append(t)
                    nxt.append(t)
        frontier = nxt
    before = {s: _count_objects(system, (s,)) for s in order}
    gathered = before[root]
    for s in reversed(order):  # children strictly before parents
        if s == root:
            continue
        if sigma_only and not system.n_sigma(s):
            continue
        if system.occupied(s):
            gathered += before[s]
            system.hop((s, parent[s]))
    charge = system.decohere_site(root)
    remains = system.n_sigma if sigma_only else system.occupied
    leftover = any(
        remains(s) for s in ball if s != root and s not in blocked
    )
    return charge, max(gathered - 1, 0), leftover


def _site_charge(system, site) -> Charge:
    if system.n_sigma(site):
        return Charge.SIGMA
    if system.n_psi[site]:
        return Charge.FERMION
    return Charge.VACUUM


def _bulk_charges(system, code_sites) -> list[Charge]:
    """Decohere every bulk site and report the charges seen.

    Code sites are never blindly decohered: fusing a freshly deposited
    noise sigma with the code sigma at measure time scrambles the
    stored channel, so their content is reported without fusing."""
    out = []
    for s in range(system.lattice.n_sites):
        if s in code_sites:
            out.append(_site_charge(system, s))
        else:
            out.append(system.decohere_site(s))
    return out


def _peel_code_site(system, cs, allowed) -> bool:
    """Move one stacked extra sigma off a code site into the bulk.

    The mover is the registry slot facing the dump site, so when the
    dump is the neighbor the noise pair came from, the code anyon
    itself is the one that stays behind.  A sigma's creation partner is
    itself a sigma, so dump preference runs sigma neighbor, then any
    occupied neighbor, then anywhere allowed.  Returns whether a move
    was possible (a radius-zero cluster has nowhere to dump yet)."""
    lattice = system.lattice
    cands = [t for t in lattice.neighbors(cs) if t in allowed]
    if not cands:
        return False
    pool = (
        [t for t in cands if system.n_sigma(t)]
        or [t for t in cands if system.occupied(t)]
        or cands
    )
    dump = min(pool, key=lambda t: lattice.rank_of[t])
    system.hop_one((cs, dump))
    return True


def _gather_anchored(
    system, ball, root, member_code, code_sites, seed_charges, sigma_only=False
) -> tuple[Charge, int, bool]:
    """Gather for a cluster that contains code sites.

    Stacked extras are peeled off the code anyons first, then bulk
    content is fused at a bulk staging site so that junk which
    annihilates with itself never scrambles a code sigma.  Only a net
    residue interacts with the code sites: a sigma moves in where a
    site stands empty (restoration), a fermion is absorbed by a held
    sigma, and anything else is parked in the bulk while the cluster
    keeps hunting for its partner."""
    lattice = system.lattice
    fusions = 0
    bulk = frozenset(s for s in ball if s not in code_sites)
    for cs in sorted(member_code, key=lambda s: lattice.rank_of[s]):
        while system.n_sigma(cs) > 1:
            if not _peel_code_site(system, cs, bulk):
                break
    bulk_occupied = sorted(
        (s for s in bulk if system.occupied(s)),
        key=lambda s: lattice.rank_of[s],
    )
    if bulk_occupied:
        staging = bulk_occupied[0]
        outcome, n, _ = _gather(
            system, ball, staging, blocked=code_sites, sigma_only=sigma_only
        )
        fusions += n
        if outcome is Charge.SIGMA:
            empty = [cs for cs in member_code if not system.n_sigma(cs)]
            if empty:
                target = min(
                    empty,
                    key=lambda s: (
                        lattice.graph_distance(staging, s),
                        lattice.rank_of[s],
                    ),
                )
                fusions += _fuse_along(
                    system, staging, target, code_sites, absorb=False
                )
        elif outcome is Charge.FERMION and Charge.FERMION in seed_charges:
            # a gathered fermion only ever cancels a fermion already
            # resting on a code site; feeding it to a clean code sigma
            # would twist the stored channel, so otherwise it parks in
            # the bulk until growth uncovers its partner
            resident = [cs for cs in member_code if system.n_psi[cs]]
            if resident:
                target = min(
                    resident,
                    key=lambda s: (
                        lattice.graph_distance(staging, s),
                        lattice.rank_of[s],
                    ),
                )
                fusions += _fuse_along(
                    system, staging, target, code_sites, absorb=False
                )
    charge = _site_charge(system, root)
    remains = system.n_sigma if sigma_only else system.occupied
    leftover = any(remains(s) for s in bulk)
    return charge, fusions, leftover


def _merge_overlapping(lattice, clusters, code_sites) -> list[Cluster]:
    alive = [c for c in clusters if c.alive]
    owner: dict[int, int] = {}
    link = list(range(len(alive)))

    def find(i: int) -> int:
        while link[i] != i:
            link[i] = link[link[i]]
            i = link[i]
        return i

    for idx, c in enumerate(alive):
        for s in c.ball:
            if s in owner:
                a, b = find(owner[s]), find(idx)
                if a != b:
                    link[max(a, b)] = min(a, b)
            else:
                owner[s] = idx
    groups: dict[int, list[Cluster]] = {}
    for idx, c in enumerate(alive):
        groups.setdefault(find(idx), []).append(c)
    merged = []
    for parts in groups.values():
        if len(parts) == 1:
            merged.append(parts[0])
            continue
        members = set().union(*(p.members for p in parts))
        radius = max(p.radius for p in parts)
        merged.append(
            Cluster(
                members=members,
                radius=radius,
                root=_choose_root(lattice, members, code_sites),
                ball=frozenset().union(*(p.ball for p in parts)),
            )
        )
    merged.sort(key=lambda c: lattice.rank_of[c.root])
    return merged


def _cluster_phase(
    system, code, seed_charges, increment, shield_code=False, sigma_only=False
) -> tuple[int, int, Optional[Charge]]:
    """One run of the clustering loop restricted to the given species.

    Returns rounds used, fusions performed, and the terminal residue
    charge on the torus when a lone charged cluster could not be
    cleared (None whenever the phase fully settled)."""
    lattice = system.lattice
    ifc = code.code == "ifc"
    code_sites = frozenset(lattice.code_sites) if ifc else frozenset()
    anchorable = code_sites if not shield_code else frozenset()
    blocked = code_sites if shield_code else frozenset()
    charges = _bulk_charges(system, code_sites)
    clusters = [
        Cluster(members={s}, radius=0, root=s, ball=frozenset((s,)))
        for s, c in enumerate(charges)
        if (s in anchorable) or (c in seed_charges and s not in blocked)
    ]

    rounds = 0
    fusions = 0
    bound = ceil(_lattice_diameter(lattice) / increment) + 1
    while clusters:
        survivors = []
        residue = None
        for c in clusters:
            anchored = bool(c.members & anchorable)
            if anchored:
                member_code = c.members & code_sites
                charge, n, leftover = _gather_anchored(
                    system,
                    c.ball,
                    c.root,
                    member_code,
                    code_sites,
                    seed_charges,
                    sigma_only=sigma_only,
                )
                settled = not leftover and all(
                    system.n_sigma(cs) == 1
                    and (sigma_only or not system.n_psi[cs])
                    for cs in member_code
                )
            else:
                charge, n, leftover = _gather(
                    system, c.ball, c.root, blocked=blocked, sigma_only=sigma_only
                )
                resident = {
                    s for s in c.ball & code_sites if system.n_psi[s]
                }
                if (
                    shield_code
                    and charge in seed_charges
                    and charge is not Charge.VACUUM
                    and resident
                ):
                    # retire a fermion cluster that reached the boundary
                    # by cancelling against a fermion already resting on
                    # a code site there; a clean code sigma is never fed
                    target = min(
                        resident,
                        key=lambda s: (
                            lattice.graph_distance(c.root, s),
                            lattice.rank_of[s],
                        ),
                    )
                    n += _fuse_along(system, c.root, target, code_sites)
                    charge = Charge.VACUUM
                settled = charge is Charge.VACUUM and not leftover
            fusions += n
            if settled:
                c.alive = False
            elif (
                not anchored
                and charge is not Charge.VACUUM
                and charge not in seed_charges
            ):
                c.alive = False  # off-species residue, left for a later phase
            else:
                residue = charge
                c.leftover = leftover
                survivors.append(c)
        clusters = survivors
        if not clusters:
            break
        if len(clusters) == 1:
            c = clusters[0]
            cancelable = residue is Charge.FERMION and any(
                system.n_psi[cs] for cs in code_sites
            )
            if (
                not c.leftover
                and not cancelable
                and all(
                    system.n_sigma(cs) == 1 for cs in c.members & code_sites
                )
            ):
                # the lone cluster has fused everything it covers down
                # to an unpairable residue; no partner is left anywhere,
                # so growing further cannot clear it.  It keeps growing
                # instead while its ball is partitioned by blocked code
                # sites, or while a fermion resting on a code site could
                # still cancel its own fermion residue
                return rounds, fusions, residue
        if rounds >= bound:
            # pathological crawls (a consumed code sigma hunting for a
            # replacement across the lattice) are declared lost rather
            # than decoded past the round budget
            return rounds, fusions, residue if residue is not None else Charge.SIGMA
        rounds += 1
        for c in clusters:
            c.radius += increment
            c.ball = _grow_ball(lattice, c.members, c.radius)
        clusters = _merge_overlapping(lattice, clusters, code_sites)
        for c in clusters:
            covered = (c.ball & anchorable) - c.members
            if covered:
                c.members |= covered
                c.root = _choose_root(lattice, c.members, code_sites)
    if Charge.FERMION in seed_charges and any(
        system.n_psi[cs] for cs in code_sites
    ):
        # a fermion still resting on a code site with no partner left in
        # the bulk can never be cleared without twisting the channel
        return rounds, fusions, Charge.FERMION
    return rounds, fusions, None


def decode_cluster_simple(system, code, *, growth_increment: int = 1) -> DecoderReport:
    rounds, fusions, residue = _cluster_phase(
        system, code, (Charge.SIGMA, Charge.FERMION), growth_increment
    )
    status = CONVERGED if residue is None else FAILURE_DETECTED
    return DecoderReport(rounds=rounds, fusions=fusions, status=status)


def decode_cluster_aware(system, code, *, growth_increment: int = 1) -> DecoderReport:
    """Sigma-only clustering followed by fermion-only clustering.

    The reported round count is the deeper of the two phases, the
    fusion count their total.
    """
    r1, f1, res1 = _cluster_phase(
        system, code, (Charge.SIGMA,), growth_increment, sigma_only=True
    )
    r2, f2, res2 = _cluster_phase(
        system, code, (Charge.FERMION,), growth_increment, shield_code=True
    )
    status = CONVERGED if res1 is None and res2 is None else FAILURE_DETECTED
    return DecoderReport(rounds=max(r1, r2), fusions=f1 + f2, status=status)


# ----------------------------------------------------------------------
# perfect matching


def _nearest_code_site(lattice, site) -> tuple[int, int]:
    """(distance, code site), ties toward the lowest serpentine rank."""
    return min(
        ((lattice.graph_distance(site, cs), cs) for cs in lattice.code_sites),
        key=lambda t: (t[0], lattice.rank_of[t[1]]),
    )


def _species_graph(lattice, nodes, ifc, prune_k, virtual_penalty=0,
                   barred=frozenset()):
    """Matching graph over charged sites; virtual partners when ifc.

    ``virtual_penalty`` is added to every real-virtual edge.  The sigma
    round keeps it at zero so that anyons hugging the code sites take
    the boundary route; the fermion round prices absorption above any
    pairing, because a fermion fed to a code sigma twists the stored
    channel while fermions always cancel pairwise.  Nodes in ``barred``
    get a virtual edge no minimum matching can touch while any real
    pairing remains: a fermion resting on a code site sits at distance
    zero, which would otherwise make it the cheapest virtual candidate
    whenever parity forces one node onto the boundary.  Global parity
    makes a real partner available to every fermion on the sphere, so
    barring them never strands the matching."""
    n = len(nodes)
    edges = []
    if prune_k is not None and n > prune_k + 1:
        keep = set()
        for i in range(n):
            by_dist = sorted(
                (j for j in range(n) if j != i),
                key=lambda j: (
                    lattice.graph_distance(nodes[i], nodes[j]),
                    lattice.rank_of[nodes[j]],
                ),
            )
            for j in by_dist[:prune_k]:
                keep.add((min(i, j), max(i, j)))
        pairs = sorted(keep)
    else:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    # weights are doubled and virtual edges get +1 so that an exact tie
    # between pairing two anyons and absorbing both at code sites goes
    # to the pairing; absorption at an occupied code site consumes the
    # code anyon, so it must only win when strictly shorter
    for i, j in pairs:
        edges.append((i, j, 2 * lattice.graph_distance(nodes[i], nodes[j])))
    if ifc:
        big = 2 * (n + 2) * (_lattice_diameter(lattice) + virtual_penalty + 1)
        for i in range(n):
            dist, _ = _nearest_code_site(lattice, nodes[i])
            pen = big if nodes[i] in barred else virtual_penalty
            edges.append((i, n + i, 2 * dist + 1 + pen))
        for i in range(n):
            for j in range(i + 1, n):
                edges.append((n + i, n + j, 0))
        return WeightedGraph(2 * n, tuple(edges))
    return WeightedGraph(n, tuple(edges))


def _fuse_along(system, src, dst, spare=frozenset(), absorb=True) -> int:
    """Bring the charge at src to dst and fuse everything there.

    The preferred route detours around every occupied site and sweeps
    nothing but the mover.  When congestion leaves no such route the
    mover is carried straight through the crowd, braiding past each
    bystander without displacing it.  Sites in ``spare`` are never
    crossed either way; the callers pass the code sites so a detour can
    never drag a code anyon off its site.  With ``absorb`` off a
    fermion produced by the terminal fusion is left resting at dst
    instead of being folded into a surviving sigma there."""
    lattice = system.lattice
    if src == dst:
        objects = _count_objects(system, (dst,))
        system.decohere_site(dst, absorb_fermion=absorb)
        return max(objects - 1, 0)
    occupied = {s for s in range(lattice.n_sites) if system.occupied(s)}
    path = lattice.shortest_path(src, dst, avoid=(occupied | spare) - {src, dst})
    if path is not None:
        objects = _count_objects(system, path)
        system.fuse_path(path, absorb_fermion=absorb)
        return max(objects - 1, 0)
    path = lattice.shortest_path(src, dst, avoid=spare - {src, dst})
    if path is None:
        return 0
    if system.n_sigma(src):
        system.transport_sigma(path)
    elif system.n_psi[src]:
        if system.transport_psi(path) is None:
            return 1  # annihilated against a resident ψ on the way
    else:
        return 0
    system.decohere_site(dst, absorb_fermion=absorb)
    return 1


def _pma_single(system, code, species, prune_k):
    """One matching round for one species.

    Returns (fusions, failure status or None, whether nodes existed).
    """
    lattice = system.lattice
    ifc = code.code == "ifc"
    code_set = frozenset(lattice.code_sites) if ifc else frozenset()
    charges = _bulk_charges(system, code_set)
    if ifc:
        bulk = frozenset(range(lattice.n_sites)) - code_set
        touched = set()
        for cs in lattice.code_sites:
            while system.n_sigma(cs) > 1 and _peel_code_site(system, cs, bulk):
                pass
            for t in lattice.neighbors(cs):
                touched.add(t)
        for t in sorted(touched - code_set):
            charges[t] = system.decohere_site(t)
    nodes = [
        s
        for s, c in enumerate(charges)
        if c is species and not (ifc and s in code_set)
    ]
    if ifc and species is Charge.FERMION:
        nodes.extend(cs for cs in lattice.code_sites if system.n_psi[cs])
        nodes.sort()
    if not nodes:
        return 0, None, False
    if not ifc and len(nodes) % 2:
        return 0, FAILURE_DETECTED, True
    penalty = (
        2 * _lattice_diameter(lattice) if species is Charge.FERMION else 0
    )
    barred = code_set if species is Charge.FERMION else frozenset()
    graph = _species_graph(lattice, nodes, ifc, prune_k, penalty, barred)
    matched = min_weight_perfect_matching(graph)
    if matched is None and prune_k is not None:
        graph = _species_graph(lattice, nodes, ifc, None, penalty, barred)
        matched = min_weight_perfect_matching(graph)
    if matched is None:
        return 0, FAILURE_DETECTED, True
    n = len(nodes)
    jobs = []
    for u, v in matched:
        if u >= n:  # virtual with virtual: no action
            continue
        if v < n:  # real pair: terminal at the lower serpentine rank,
            # or at the code site when one end is a resident fermion
            # (a code anyon is never the one transported)
            a, b = nodes[u], nodes[v]
            if a in code_set:
                a, b = b, a
            elif b not in code_set and lattice.rank_of[a] < lattice.rank_of[b]:
                a, b = b, a
            jobs.append((lattice.rank_of[b], a, b))
        else:  # absorbed at its nearest code site, which is the terminal
            a = nodes[u]
            _, cs = _nearest_code_site(lattice, a)
            jobs.append((lattice.rank_of[a], a, cs))
    fusions = 0
    for _, a, b in sorted(jobs):
        # a fusion ending on a code site must not fold its fermion
        # outcome into the code sigma on the spot; the fermion stays
        # put as a record and a later round either cancels it against
        # its twin or closes it with the in-place correction (a == b)
        keep = b in code_set and a != b
        fusions += _fuse_along(system, a, b, code_set, absorb=not keep)
    return fusions, None, True


def decode_pma(
    system,
    code,
    *,
    prune_neighbors: int = 20,
    prune: Optional[bool] = None,
) -> DecoderReport:
    """Matching decoder: one sigma round, then up to three fermion
    rounds while fermions survive (sigma fusions can produce them)."""
    if prune is None:
        prune = system.lattice.L > 24
    prune_k = prune_neighbors if prune else None
    rounds = 0
    fusions = 0
    n, failure, had_nodes = _pma_single(system, code, Charge.SIGMA, prune_k)
    fusions += n
    rounds += had_nodes
    if failure:
        return DecoderReport(rounds=rounds, fusions=fusions, status=failure)
    for _ in range(3):
        if not any(system.n_psi):
            break
        n, failure, had_nodes = _pma_single(system, code, Charge.FERMION, prune_k)
        fusions += n
        rounds += had_nodes
        if failure:
            return DecoderReport(rounds=rounds, fusions=fusions, status=failure)
        if n == 0:
            break
    code_set = (
        frozenset(system.lattice.code_sites)
        if code.code == "ifc"
        else frozenset()
    )
    clean = all(
        system.n_sigma(s) == 1 and not system.n_psi[s]
        if s in code_set
        else not system.occupied(s)
        for s in range(system.lattice.n_sites)
    )
    status = CONVERGED if clean else FAILURE_DETECTED
    return DecoderReport(rounds=rounds, fusions=fusions, status=status)
