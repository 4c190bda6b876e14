"""Live simulation state: anyons on a lattice plus their fusion-space record.

The registry picture
--------------------
Every σ in the system occupies a slot in a single linear order, the
concatenation of per-site registry blocks taken in serpentine site order.
Slots are labelled by tableau mode ids and the labels never move: braids
exchange the *contents* of two adjacent slots, and transporting an anyon
along the lattice is a cascade of such exchanges after which the slot
labels are re-partitioned between the sites along the way.  Because
every elementary move exchanges adjacent slots exactly once, linearized
lattice moves reproduce the braid group action of the original 2D
process.

ψ charges need no fusion-space record (their fusion is unique), so they
live in per-site parity flags.  Transporting a ψ past anything produces
at most a global phase and is therefore pure bookkeeping, except at
torus seams where it winds a ψ loop and toggles the matching parity
counter.

Torus bookkeeping
-----------------
On the torus, the state additionally carries the eigenvalues λ_h, λ_v of
the two non-contractible ψ loops and the ψ-winding parities w_h, w_v.
A σ carried across seam s is braided through the ψ loop conjugate to s:
it flips that loop's eigenvalue, and if its own loop has λ_s = −1 the
σ's Majorana operator changes sign.  A ψ carried across seam s toggles
w_s.  All of this commutes with the slot cascades, so seam corrections
are applied to the mover's final slot after each edge traversal.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .lattice import Lattice, LinearizedMove
from .model import Charge
from .tableau import MajoranaProduct, MajoranaTableau, TableauError, _inversions

__all__ = ["AnyonSystem"]

_CONJUGATE_SEAM = {"h": "v", "v": "h"}


class AnyonSystem:
    """Charge configuration, stabilizer tableau and topological sector.

    The four elementary processes (pair creation, hopping, exchange,
    decoherence) plus region fusion are the only mutators.  A different
    tableau implementation with the same interface can be injected for
    cross-checking.
    """

    def __init__(
        self,
        lattice: Lattice,
        rng: Optional[np.random.Generator] = None,
        tableau=None,
    ) -> None:
        self.lattice = lattice
        self.rng = rng if rng is not None else np.random.default_rng()
        self.tableau = tableau if tableau is not None else MajoranaTableau()
        self.blocks: list[list[int]] = [[] for _ in range(lattice.n_sites)]
        self.n_psi: list[int] = [0] * lattice.n_sites
        if lattice.topology == "torus":
            self.sector = {"lam_h": 1, "lam_v": 1, "w_h": 0, "w_v": 0}
        else:
            self.sector = None

    # ------------------------------------------------------------------
    # queries

    def occupied(self, site: int) -> bool:
        return bool(self.blocks[site]) or bool(self.n_psi[site])

    def n_sigma(self, site: int) -> int:
        return len(self.blocks[site])

    def total_sigma(self) -> int:
        return sum(len(b) for b in self.blocks)

    def read_sector(self) -> tuple[int, int, int, int]:
        """(λ_h, λ_v, w_h, w_v); only defined on the torus."""
        if self.sector is None:
            raise ValueError("the sphere has no topological sector to read")
        s = self.sector
        return s["lam_h"], s["lam_v"], s["w_h"], s["w_v"]

    # ------------------------------------------------------------------
    # elementary processes

    def pair_create(
        self, edge: tuple[int, int], q: Charge
    ) -> Optional[tuple[int, int]]:
        """Create a vacuum pair of charge q at site i, partner carried to j.

        For q = σ, returns the slots (one kept at i, one arrived at j).
        """
        i, j = edge
        move = self.lattice.linearize_edge(edge)
        if q is Charge.FERMION:
            self.n_psi[i] ^= 1
            self.n_psi[j] ^= 1
            for name, _orient in move.seams:
                self.sector[f"w_{name}"] ^= 1
            return None
        if q is not Charge.SIGMA:
            raise ValueError("only σ or ψ pairs can be created")
        u, v = self.tableau.insert_vacuum_pair()
        rightward = self.lattice.rank_of[j] > self.lattice.rank_of[i]
        # the fresh generator is -i c_u c_v, so u must take the lower
        # global slot for the pair to read as vacuum in position order
        if rightward:
            self.blocks[i].append(u)
            kept, carry = u, v
        else:
            self.blocks[i].insert(0, v)
            kept, carry = v, u
        carry = self._traverse_sigma(carry, move)
        if rightward:
            self.blocks[j].insert(0, carry)
        else:
            self.blocks[j].append(carry)
        return kept, carry

    def uncreate_pair(self, edge: tuple[int, int], slots: tuple[int, int]) -> None:
        """Exactly invert a σ pair_create that has seen no measurement since.

        The transport braids are unitary, so running them backwards
        restores the pre-creation state bit for bit; the pair is then
        back in its vacuum channel and can be dropped.
        """
        i, j = edge
        kept, arrived = slots
        back = self.lattice.linearize_edge(edge).reversed()
        rightward = self.lattice.rank_of[j] > self.lattice.rank_of[i]
        if rightward:
            if self.blocks[j][0] != arrived:
                raise TableauError("arrived slot is no longer at the head of j")
            self.blocks[j].pop(0)
        else:
            if self.blocks[j][-1] != arrived:
                raise TableauError("arrived slot is no longer at the tail of j")
            self.blocks[j].pop()
        carry = self._traverse_sigma(arrived, back)
        blk = self.blocks[i]
        if rightward:
            if blk[-1] != kept:
                raise TableauError("kept slot is no longer at the tail of i")
            blk.pop()
        else:
            if blk[0] != kept:
                raise TableauError("kept slot is no longer at the head of i")
            blk.pop(0)
        self.tableau.remove_pair(kept, carry)

    def hop(self, edge: tuple[int, int]) -> None:
        """Move every charge at site i across the edge to site j."""
        i, j = edge
        if not self.occupied(i):
            raise ValueError(f"hop from empty site {i}")
        move = self.lattice.linearize_edge(edge)
        rightward = self.lattice.rank_of[j] > self.lattice.rank_of[i]
        while self.blocks[i]:
            carry = self.blocks[i].pop() if rightward else self.blocks[i].pop(0)
            carry = self._traverse_sigma(carry, move)
            if rightward:
                self.blocks[j].insert(0, carry)
            else:
                self.blocks[j].append(carry)
        if self.n_psi[i]:
            self.n_psi[i] = 0
            self.n_psi[j] ^= 1
            for name, _orient in move.seams:
                self.sector[f"w_{name}"] ^= 1

    def hop_one(self, edge: tuple[int, int]) -> None:
        """Move a single σ from site i across the edge to site j.

        The mover is the registry slot on i's side facing j, which for a
        freshly created pair straddling the site is the partner the
        noise just delivered.  ψ parity stays put, as does every other
        σ at i.
        """
        i, j = edge
        if not self.blocks[i]:
            raise ValueError(f"no σ to move at site {i}")
        move = self.lattice.linearize_edge(edge)
        rightward = self.lattice.rank_of[j] > self.lattice.rank_of[i]
        carry = self.blocks[i].pop() if rightward else self.blocks[i].pop(0)
        carry = self._traverse_sigma(carry, move)
        if rightward:
            self.blocks[j].insert(0, carry)
        else:
            self.blocks[j].append(carry)

    def exchange(self, edge: tuple[int, int], clockwise: bool = True) -> None:
        """Swap the full contents of the two sites, braiding them past
        each other once in the given sense."""
        i, j = edge
        if not (self.occupied(i) or self.occupied(j)):
            raise ValueError("exchange needs at least one occupied endpoint")
        if self.lattice.rank_of[i] > self.lattice.rank_of[j]:
            i, j = j, i  # the operation is symmetric under naming order
        move = self.lattice.linearize_edge((i, j))
        # carry i's block up to j's near edge
        staged: list[int] = []
        while self.blocks[i]:
            carry = self.blocks[i].pop()
            staged.insert(0, self._traverse_sigma(carry, move))
        # braid the two blocks through each other: each cross-pair once
        run = staged + self.blocks[j]
        m, n = len(staged), len(self.blocks[j])
        for start in reversed(range(m)):
            for a in range(start, start + n):
                self.tableau.braid(run[a], run[a + 1], clockwise)
        self.blocks[j] = run[n:]
        # return j's prior content to i by the reverse sequence
        back = move.reversed()
        for carry in run[:n]:
            self.blocks[i].append(self._traverse_sigma(carry, back))
        if self.n_psi[i] != self.n_psi[j]:
            for name, _orient in move.seams:
                self.sector[f"w_{name}"] ^= 1
        self.n_psi[i], self.n_psi[j] = self.n_psi[j], self.n_psi[i]

    def decohere_site(
        self,
        site: int,
        forced: Optional[int] = None,
        absorb_fermion: bool = True,
    ) -> Charge:
        """Projectively fuse everything at one site to a single charge.

        ``forced`` pins the outcome of the first pair fusion (used when a
        caller has already drawn the outcome from a peeked distribution).
        With ``absorb_fermion`` off a fermion sharing the site with a
        lone σ is left in place instead of being fused into it, so the
        caller can keep it visible as a correctable record rather than
        twisting the σ's channel on the spot.
        """
        blk = self.blocks[site]
        while len(blk) >= 2:
            first, second = blk[0], blk[1]
            op = MajoranaProduct.pair(first, second)
            if self.tableau.measure(op, self.rng, forced) == -1:
                self.n_psi[site] ^= 1
            forced = None
            self.tableau.remove_pair(first, second)
            del blk[:2]
        if blk and self.n_psi[site] and absorb_fermion:
            # ψ × σ = σ: absorb the fermion into the surviving σ
            self.tableau.negate_mode(blk[0])
            self.n_psi[site] = 0
        if blk:
            return Charge.SIGMA
        return Charge.FERMION if self.n_psi[site] else Charge.VACUUM

    def fuse_path(
        self, path: Sequence[int], absorb_fermion: bool = True
    ) -> Charge:
        """Sweep all charges along the path into its terminal site and
        fuse them there."""
        for a, b in zip(path, path[1:]):
            if self.occupied(a):
                self.hop((a, b))
        return self.decohere_site(path[-1], absorb_fermion=absorb_fermion)

    def transport_sigma(self, path: Sequence[int]) -> None:
        """Carry one σ from path[0] to path[-1], braiding it past any
        anyon it meets on the way instead of displacing it.

        The mover is the slot at path[0] facing the first edge.  At an
        occupied transit site the mover crosses the resident stack on
        the over side when travelling right and the under side when
        travelling left, so retracing a path inverts it exactly.
        Bystander blocks and ψ parities are left as found.
        """
        if len(path) < 2:
            return
        lattice = self.lattice
        blk = self.blocks[path[0]]
        if not blk:
            raise ValueError(f"no σ to carry at site {path[0]}")
        rightward = lattice.rank_of[path[1]] > lattice.rank_of[path[0]]
        carry = blk.pop() if rightward else blk.pop(0)
        for a, b, nxt in zip(path, path[1:], list(path[2:]) + [None]):
            rightward = lattice.rank_of[b] > lattice.rank_of[a]
            carry = self._traverse_sigma(carry, lattice.linearize_edge((a, b)))
            if nxt is None:
                break
            exit_right = lattice.rank_of[nxt] > lattice.rank_of[b]
            if exit_right != rightward or not self.blocks[b]:
                continue  # U-turn or empty site: already at the exit face
            block = self.blocks[b]
            if exit_right:
                run = [carry] + block
                for k in range(len(run) - 1):
                    self.tableau.braid(run[k], run[k + 1], True)
                self.blocks[b] = run[:-1]
                carry = run[-1]
            else:
                run = block + [carry]
                for k in reversed(range(len(run) - 1)):
                    self.tableau.braid(run[k], run[k + 1], False)
                self.blocks[b] = run[1:]
                carry = run[0]
        if rightward:
            self.blocks[path[-1]].insert(0, carry)
        else:
            self.blocks[path[-1]].append(carry)

    def transport_psi(self, path: Sequence[int]) -> Optional[int]:
        """Walk one ψ along the path site by site.

        Returns the terminal site, or None if the mover stepped onto a
        resident ψ en route and the two annihilated.  Crossing a site
        that holds only σ's is pure bookkeeping and leaves it unchanged.
        """
        if not self.n_psi[path[0]]:
            raise ValueError(f"no ψ to carry at site {path[0]}")
        for a, b in zip(path, path[1:]):
            move = self.lattice.linearize_edge((a, b))
            self.n_psi[a] ^= 1
            self.n_psi[b] ^= 1
            for name, _orient in move.seams:
                self.sector[f"w_{name}"] ^= 1
            if not self.n_psi[b]:
                return None
        return path[-1]

    def site_view(self) -> list[Charge]:
        """Decohere every site and report the resulting charges."""
        return [self.decohere_site(s) for s in range(self.lattice.n_sites)]

    # ------------------------------------------------------------------
    # state management

    def snapshot(self):
        return (
            self.tableau.snapshot(),
            [list(b) for b in self.blocks],
            list(self.n_psi),
            dict(self.sector) if self.sector is not None else None,
        )

    def restore(self, snap) -> None:
        tab, blocks, n_psi, sector = snap
        self.tableau.restore(tab)
        self.blocks = [list(b) for b in blocks]
        self.n_psi = list(n_psi)
        self.sector = dict(sector) if sector is not None else None

    def audit(self) -> None:
        """Check every registry invariant (meant for tests; slow)."""
        self.tableau.validate()
        listed = [m for b in self.blocks for m in b]
        if sorted(listed) != sorted(self.tableau.mode_ids):
            raise TableauError("registry blocks do not cover the live modes")
        if len(listed) % 2:
            raise TableauError("odd number of σ slots")
        if any(p not in (0, 1) for p in self.n_psi):
            raise TableauError("ψ parity out of range")
        if self.lattice.topology == "sphere" and listed:
            op = self._global_parity_op()
            want = (1.0, 0.0) if sum(self.n_psi) % 2 == 0 else (0.0, 1.0)
            if self.tableau.outcome_distribution(op) != want:
                raise TableauError("global fermion parity drifted")

    def _global_parity_op(self) -> MajoranaProduct:
        """Total fermion parity of the tracked modes, in registry order."""
        ids = [m for rank in range(self.lattice.n_sites)
               for m in self.blocks[self.lattice.site_of[rank]]]
        k = (3 * (len(ids) // 2) + 2 * _inversions(ids)) & 3
        return MajoranaProduct(tuple(sorted(ids)), k)

    # ------------------------------------------------------------------
    # slot transport

    def _traverse_sigma(self, carry: int, move: LinearizedMove) -> int:
        """Slide one σ slot through a linearized move; returns the slot
        label holding the mover afterwards."""
        for site, relation, direction in move.steps:
            block = self.blocks[site]
            if not block:
                continue
            sense = (relation == "over") == (direction == "right")
            if direction == "right":
                run = [carry] + block
                for a in range(len(run) - 1):
                    self.tableau.braid(run[a], run[a + 1], sense)
                self.blocks[site] = run[:-1]
                carry = run[-1]
            else:
                run = block + [carry]
                for a in reversed(range(len(run) - 1)):
                    self.tableau.braid(run[a], run[a + 1], sense)
                self.blocks[site] = run[1:]
                carry = run[0]
        for name, _orient in move.seams:
            if self.sector[f"lam_{name}"] == -1:
                self.tableau.negate_mode(carry)
            self.sector[f"lam_{_CONJUGATE_SEAM[name]}"] *= -1
        return carry

    def __repr__(self) -> str:
        occ = sum(1 for s in range(self.lattice.n_sites) if self.occupied(s))
        return (f"AnyonSystem({self.lattice.topology} L={self.lattice.L}, "
                f"{self.total_sigma()} σ, {sum(self.n_psi)} ψ, "
                f"{occ} occupied sites)")
