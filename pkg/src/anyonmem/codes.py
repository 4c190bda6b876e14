"""Preparation and verification of the two Ising anyon memories.

On the sphere a qubit lives in the collective fusion space of four σ
charges pinned at the edge-midpoint code sites.  Its basis states are
labelled by the fusion channel of a preferred site pair: "zero" pins the
top-right channel to vacuum, "plus" pins the right-bottom channel, the
eigenbasis of the logical operator given by a right-bottom monodromy.
On the torus no charges are pinned at all and the codespace is the
topological sector itself, so preparation and verification reduce to
writing and reading the tracked loop data.

Preparation distributes vacuum σ pairs to the code sites by nearest
neighbor transport and pins the defining channel directly.  One wrinkle
deserves a note.  Whenever the two site pairs of a label interleave
along the registration order (which of the two depends on the parity of
L/2), the movers' worldlines must cross an odd number of times, and the
naive pair parity of the partner sites then reads -1 at total vacuum
charge.  That is honest fusion-ordering physics, not an error: for four
σ's registered on a line, interleaved channels anti-correlate, and the
partner pair's -1 just says its vacuum channel threads past a third
charge in registration order.  Verification therefore pins down the
defining pair operator alone; total charge conservation makes the
partner parity deterministic at the sign the registration pattern
forces, which preparation checks as an internal invariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lattice import Lattice
from .model import Charge
from .system import AnyonSystem
from .tableau import MajoranaProduct, TableauError

__all__ = [
    "CodeState",
    "IFC_ZERO",
    "IFC_PLUS",
    "defining_pairs",
    "prepare",
    "verify",
]


@dataclass(frozen=True)
class CodeState:
    """One preferred codestate of either memory.

    ``code`` is "ifc" (sphere, fusion-space qubit) or "itc" (torus,
    sector codespace).  The label is "zero" or "plus" for the former and
    a (λ_h, λ_v) sign pair for the latter.
    """

    code: str
    label: object

    def __post_init__(self) -> None:
        if self.code == "ifc":
            if self.label not in ("zero", "plus"):
                raise ValueError(f"unknown fusion-code label {self.label!r}")
        elif self.code == "itc":
            lab = tuple(self.label)
            if len(lab) != 2 or any(s not in (1, -1) for s in lab):
                raise ValueError(f"sector label must be two signs, got {self.label!r}")
            object.__setattr__(self, "label", lab)
        else:
            raise ValueError(f"unknown code {self.code!r}")

    @property
    def topology(self) -> str:
        return "sphere" if self.code == "ifc" else "torus"


IFC_ZERO = CodeState("ifc", "zero")
IFC_PLUS = CodeState("ifc", "plus")


def defining_pairs(lattice: Lattice, label: str) -> tuple[tuple[int, int], tuple[int, int]]:
    """Site pairs whose vacuum channels define an IFC codestate.

    The first pair is the defining one (its channel is the stored bit);
    the second becomes deterministic through total charge conservation
    once the first is pinned.  Pair members are ordered by registration
    rank, the order in which a vacuum channel's parity reads +1.
    """
    top, right, bottom, left = lattice.code_sites
    if label == "zero":
        return (top, right), (left, bottom)
    if label == "plus":
        return (right, bottom), (top, left)
    raise ValueError(f"unknown fusion-code label {label!r}")


def prepare(
    lattice: Lattice,
    state: CodeState,
    rng: Optional[np.random.Generator] = None,
    tableau=None,
) -> AnyonSystem:
    """Build a fresh system holding the requested codestate.

    The returned system carries ``rng`` (or a fresh generator) for later
    stochastic evolution; preparation itself draws no randomness.
    """
    if lattice.topology != state.topology:
        raise ValueError(
            f"{state.code} needs a {state.topology} lattice, got {lattice.topology}"
        )
    system = AnyonSystem(lattice, rng=rng, tableau=tableau)
    if state.code == "itc":
        lam_h, lam_v = state.label
        system.sector["lam_h"] = lam_h
        system.sector["lam_v"] = lam_v
        return system

    pairs = defining_pairs(lattice, state.label)
    for home, dest in pairs:
        stage = _staging_neighbor(system, home, dest)
        system.pair_create((home, stage), Charge.SIGMA)
        path = lattice.shortest_path(stage, dest, avoid=_blocked(system, dest))
        if path is None:
            raise TableauError("no free transport path to a code site")
        for a, b in zip(path, path[1:]):
            system.hop((a, b))

    ops = [
        MajoranaProduct.pair(system.blocks[a][0], system.blocks[b][0])
        for a, b in pairs
    ]
    _pin_vacuum_channel(system.tableau, ops[0], ops[1])
    # charge conservation must now fix the partner channel, at the sign
    # the registration pattern of the two site pairs forces
    expect = (1.0, 0.0) if _pairing_sign(lattice, pairs) > 0 else (0.0, 1.0)
    if system.tableau.outcome_distribution(ops[1]) != expect:
        raise TableauError("partner pair channel not fixed by total charge")
    return system


def verify(system: AnyonSystem, state: CodeState) -> bool:
    """Decide whether the system still holds the prepared codestate.

    Fuses out the bulk, so callers run it once, after decoding.  The
    torus criterion asks for full restoration of the tracked sector,
    which can never report a false success.
    """
    lattice = system.lattice
    if state.code == "itc":
        clean = all(q is Charge.VACUUM for q in system.site_view())
        lam_h, lam_v = state.label
        return clean and system.read_sector() == (lam_h, lam_v, 0, 0)

    code_set = frozenset(lattice.code_sites)
    clean = True
    for site in range(lattice.n_sites):
        if site in code_set:
            continue
        if system.decohere_site(site) is not Charge.VACUUM:
            clean = False
    for site in code_set:
        if system.n_sigma(site) != 1 or system.n_psi[site]:
            clean = False
    if not clean:
        return False
    (a, b), _ = defining_pairs(lattice, state.label)
    op = MajoranaProduct.pair(system.blocks[a][0], system.blocks[b][0])
    return system.tableau.outcome_distribution(op) == (1.0, 0.0)


# ----------------------------------------------------------------------
# preparation helpers

def _staging_neighbor(system: AnyonSystem, home: int, dest: int) -> int:
    """First free non-code neighbor of ``home`` on the ``dest`` side.

    Staging on the destination side in registry rank keeps the mover
    from ever passing back over its own partner, so the pair arrives in
    creation order and its fusion parity still reads +1 positionally.
    """
    lattice = system.lattice
    code_set = frozenset(lattice.code_sites)
    outward = lattice.rank_of[dest] > lattice.rank_of[home]
    for nbr in lattice.neighbors(home):
        if (lattice.rank_of[nbr] > lattice.rank_of[home]) != outward:
            continue
        if nbr not in code_set and not system.occupied(nbr):
            return nbr
    raise TableauError(f"code site {home} has no free staging neighbor")


def _blocked(system: AnyonSystem, dest: int) -> set[int]:
    lattice = system.lattice
    blocked = {s for s in range(lattice.n_sites) if system.occupied(s)}
    blocked |= set(lattice.code_sites)
    blocked.discard(dest)
    return blocked


def _pairing_sign(lattice: Lattice, pairs) -> int:
    """+1 when the two site pairs nest or sit side by side in
    registration order, -1 when they interleave."""
    (a, b), (c, d) = pairs
    lo, hi = sorted((lattice.rank_of[a], lattice.rank_of[b]))
    inside = sum(1 for s in (c, d) if lo < lattice.rank_of[s] < hi)
    return -1 if inside == 1 else 1


def _pin_vacuum_channel(tableau, primary: MajoranaProduct, partner: MajoranaProduct) -> None:
    """Drive the defining pair parity to +1.

    An undisturbed distribution is left alone; a scrambled one is pinned
    by a forced nondemolition measurement (measure-and-correct in one
    step); a deterministic -1, the mark of an odd worldline crossing
    between the pairs, is repaired by a fermion loop around one member
    of each pair, which flips both channels and leaves the total fermion
    parity untouched.
    """
    dist = tableau.outcome_distribution(primary)
    if dist == (1.0, 0.0):
        return
    if dist == (0.0, 1.0):
        tableau.negate_mode(primary.modes[0])
        tableau.negate_mode(partner.modes[0])
        return
    tableau.measure(primary, forced=+1)
