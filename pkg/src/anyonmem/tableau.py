"""Stabilizer bookkeeping for systems of paired Majorana modes.

A collection of 2m Majorana modes prepared by pair creation, braiding and
pair fusion is always in a stabilizer state: it is the joint +1 eigenstate
of m commuting Hermitian mode-operator products.  This module tracks such
states exactly.  Each generator is a product ``i**k * c[m1] c[m2] ...``
with the modes in ascending id order, stored as bit masks, together with a
destabilizer row per generator in the style of the usual binary stabilizer
formalism: destabilizer j anticommutes with generator j and commutes with
every other generator.  Destabilizer phases are never observable through
the supported operations and are not tracked.

Mode ids are stable: braiding, fusing and removing pairs never renumbers
the surviving modes.  Freed ids and generator rows are recycled.

The supported operations are pair creation from vacuum, pairwise braids,
sign flips of a single mode (a passive relabel ``c -> -c``), projective
measurement of Hermitian even products, and removal of a fused pair.
Measurement outcomes of such products are always certain or a fair coin;
`outcome_distribution` reports which without disturbing the state.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterator, Optional

__all__ = ["MajoranaProduct", "MajoranaTableau", "PositionalTableau", "TableauError"]


class TableauError(RuntimeError):
    """The tracked state was asked to do something inconsistent."""


def _bits(mask: int) -> Iterator[int]:
    """Yield set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _odd_rank_mask(mask: int) -> int:
    """Bit region where an id is preceded by an odd number of ``mask`` bits.

    For a mask with an even popcount and set bits p0 < p1 < ... the result
    has bits [p0, p1), [p2, p3), ... set.  An id y lies in the region
    exactly when ``|{x in mask : x <= y}|`` is odd, which is the piece of
    information needed to count anticommutation swaps against ``mask``.
    """
    out = 0
    run = list(_bits(mask))
    for lo, hi in zip(run[::2], run[1::2]):
        out |= (1 << hi) - (1 << lo)
    return out


def _inv_parity(left_mask: int, right_mask: int) -> int:
    """Parity of {(x, y) : x in left, y in right, x > y}.

    This is the sign picked up when the concatenation of two ascending
    mode-operator strings is re-sorted into a single ascending string.
    ``left_mask`` must have even popcount.
    """
    return (_odd_rank_mask(left_mask) & right_mask).bit_count() & 1


@dataclass(frozen=True)
class MajoranaProduct:
    """The operator ``i**k * c[modes[0]] c[modes[1]] ...``, ids ascending."""

    modes: tuple[int, ...]
    k: int

    def __post_init__(self) -> None:
        if any(a >= b for a, b in zip(self.modes, self.modes[1:])):
            raise ValueError("mode ids must be strictly ascending")
        object.__setattr__(self, "k", self.k & 3)
        mask = 0
        for m in self.modes:
            mask |= 1 << m
        object.__setattr__(self, "_mask", mask)

    @classmethod
    def pair(cls, first: int, second: int) -> "MajoranaProduct":
        """Fusion parity ``-i c[first] c[second]`` of an ordered pair.

        Equals +1 on a pair created from vacuum in this order and -1 when
        the pair carries a fermion.
        """
        if first == second:
            raise ValueError("a pair needs two distinct modes")
        if first < second:
            return cls((first, second), 3)
        return cls((second, first), 1)

    @property
    def mask(self) -> int:
        return self._mask  # type: ignore[attr-defined]

    @property
    def weight(self) -> int:
        return len(self.modes)

    def is_hermitian(self) -> bool:
        w = len(self.modes)
        return (self.k - w * (w - 1) // 2) % 2 == 0

    def times(self, other: "MajoranaProduct") -> "MajoranaProduct":
        """Operator product of two disjoint-support products."""
        if self.mask & other.mask:
            raise ValueError("products with shared modes are not supported")
        k = self.k + other.k + 2 * _inv_parity(self.mask, other.mask)
        return MajoranaProduct(tuple(sorted(self.modes + other.modes)), k)


class MajoranaTableau:
    """Exact simulator for braiding and fusing paired Majorana modes."""

    def __init__(self) -> None:
        self._srow: list[int] = []  # generator row -> mode mask (0 = free row)
        self._drow: list[int] = []  # destabilizer row -> mode mask
        self._scol: list[int] = []  # mode id -> generator row mask
        self._dcol: list[int] = []  # mode id -> destabilizer row mask
        self._abit: int = 0  # row mask: sign bit a of the phase i**(2a+b)
        self._bbit: int = 0  # row mask: imaginary bit b
        self._free_rows: list[int] = []
        self._free_ids: list[int] = []
        self._live: set[int] = set()

    # ------------------------------------------------------------------
    # inspection

    @property
    def num_modes(self) -> int:
        return len(self._live)

    @property
    def mode_ids(self) -> list[int]:
        return sorted(self._live)

    def row_count(self) -> int:
        return sum(1 for r in self._srow if r)

    def generators(self) -> list[MajoranaProduct]:
        """The current stabilizer generators (a copy, for inspection)."""
        out = []
        for r, row in enumerate(self._srow):
            if row:
                out.append(MajoranaProduct(tuple(_bits(row)), self._row_k(r)))
        return out

    # ------------------------------------------------------------------
    # allocation helpers

    def _alloc_id(self) -> int:
        if self._free_ids:
            return heapq.heappop(self._free_ids)
        self._scol.append(0)
        self._dcol.append(0)
        return len(self._scol) - 1

    def _alloc_row(self) -> int:
        if self._free_rows:
            return heapq.heappop(self._free_rows)
        self._srow.append(0)
        self._drow.append(0)
        return len(self._srow) - 1

    def _row_k(self, r: int) -> int:
        return (((self._abit >> r) & 1) << 1) | ((self._bbit >> r) & 1)

    def _set_row_k(self, r: int, k: int) -> None:
        low = 1 << r
        if k & 1:
            self._bbit |= low
        else:
            self._bbit &= ~low
        if k & 2:
            self._abit |= low
        else:
            self._abit &= ~low

    def _fold_scol(self, op: MajoranaProduct) -> int:
        anti = 0
        for m in op.modes:
            anti ^= self._scol[m]
        return anti

    def _fold_dcol(self, op: MajoranaProduct) -> int:
        anti = 0
        for m in op.modes:
            anti ^= self._dcol[m]
        return anti

    def _check_op(self, op: MajoranaProduct) -> None:
        if not op.modes:
            raise TableauError("empty operator")
        if op.weight % 2:
            raise TableauError("only even products are physical operations")
        if not op.is_hermitian():
            raise TableauError("measurement needs a Hermitian operator")
        for m in op.modes:
            if m not in self._live:
                raise TableauError(f"mode {m} is not present")

    # ------------------------------------------------------------------
    # operations

    def insert_vacuum_pair(self) -> tuple[int, int]:
        """Create a fresh pair from vacuum; returns its (first, second) ids."""
        u = self._alloc_id()
        v = self._alloc_id()
        r = self._alloc_row()
        low = 1 << r
        op = MajoranaProduct.pair(u, v)
        self._srow[r] = op.mask
        for m in op.modes:
            self._scol[m] |= low
        self._set_row_k(r, op.k)
        self._drow[r] = 1 << u
        self._dcol[u] |= low
        self._live.add(u)
        self._live.add(v)
        return u, v

    def braid(self, u: int, v: int, clockwise: bool = True) -> None:
        """Exchange modes u and v.

        Clockwise sense maps ``c[u] -> c[v]`` and ``c[v] -> -c[u]``;
        anticlockwise is the inverse.
        """
        if u == v or u not in self._live or v not in self._live:
            raise TableauError(f"cannot braid modes {u}, {v}")
        su, sv = self._scol[u], self._scol[v]
        lo, hi = (u, v) if u < v else (v, u)
        between = (1 << hi) - (1 << (lo + 1))
        uv_bits = (1 << u) | (1 << v)

        flips = 0
        m = su ^ sv  # rows holding exactly one of the two modes
        while m:
            low = m & -m
            r = low.bit_length() - 1
            m ^= low
            if (self._srow[r] & between).bit_count() & 1:
                flips ^= low
            self._srow[r] ^= uv_bits
        # the mode mapped to a negated partner contributes one more sign
        flips ^= (sv & ~su) if clockwise else (su & ~sv)
        self._abit ^= flips
        self._scol[u], self._scol[v] = sv, su

        du, dv = self._dcol[u], self._dcol[v]
        m = du ^ dv
        while m:
            low = m & -m
            r = low.bit_length() - 1
            m ^= low
            self._drow[r] ^= uv_bits
        self._dcol[u], self._dcol[v] = dv, du

    def negate_mode(self, u: int) -> None:
        """Relabel ``c[u] -> -c[u]`` (flips the sign of rows holding u)."""
        if u not in self._live:
            raise TableauError(f"mode {u} is not present")
        self._abit ^= self._scol[u]

    def is_deterministic(self, op: MajoranaProduct) -> bool:
        self._check_op(op)
        return self._fold_scol(op) == 0

    def outcome_distribution(self, op: MajoranaProduct) -> tuple[float, float]:
        """(p_plus, p_minus) for measuring ``op``, without disturbing anything.

        Always one of (1, 0), (0, 1) or (0.5, 0.5).
        """
        self._check_op(op)
        if self._fold_scol(op):
            return (0.5, 0.5)
        return (1.0, 0.0) if self._deterministic_sign(op) > 0 else (0.0, 1.0)

    def measure(self, op: MajoranaProduct, rng=None, forced: Optional[int] = None) -> int:
        """Projectively measure ``op``; returns the outcome, +1 or -1.

        A random outcome draws from ``rng`` (anything with a ``random()``
        method) unless ``forced`` pins it.  Forcing a deterministic
        measurement to its impossible outcome raises.
        """
        self._check_op(op)
        anti = self._fold_scol(op)
        if anti == 0:
            s = self._deterministic_sign(op)
            if forced is not None and forced != s:
                raise TableauError("forced outcome has probability zero")
            return s
        if forced is not None:
            s = 1 if forced > 0 else -1
        elif rng is not None:
            s = 1 if rng.random() < 0.5 else -1
        else:
            raise TableauError("random outcome needs an rng or a forced value")
        self._project(op, anti, s)
        return s

    def _deterministic_sign(self, op: MajoranaProduct) -> int:
        anti_d = self._fold_dcol(op)
        if anti_d == 0:
            raise TableauError("operator is not determined by the tracked state")
        acc_mask = 0
        acc_k = 0
        m = anti_d
        while m:
            low = m & -m
            r = low.bit_length() - 1
            m ^= low
            row = self._srow[r]
            inv = _inv_parity(acc_mask, row)
            acc_k = (acc_k + self._row_k(r) + 2 * inv) & 3
            acc_mask ^= row
        if acc_mask != op.mask:
            raise TableauError("internal mismatch resolving a certain outcome")
        d = (acc_k - op.k) & 3
        if d == 0:
            return 1
        if d == 2:
            return -1
        raise TableauError("phase mismatch resolving a certain outcome")

    def _project(self, op: MajoranaProduct, anti: int, s: int) -> None:
        low = anti & -anti
        p = low.bit_length() - 1
        rest = anti ^ low
        prow = self._srow[p]
        odd = _odd_rank_mask(prow)
        pa = (self._abit >> p) & 1
        pb = (self._bbit >> p) & 1

        # other anticommuting generators absorb the pivot: S_r <- S_p S_r
        flips = 0
        m = rest
        while m:
            lowr = m & -m
            r = lowr.bit_length() - 1
            m ^= lowr
            row = self._srow[r]
            inv = (odd & row).bit_count() & 1
            if pa ^ inv ^ (pb & (self._bbit >> r) & 1):
                flips ^= lowr
            self._srow[r] = row ^ prow
        self._abit ^= flips
        if pb:
            self._bbit ^= rest
        touched = rest | low
        for mm in _bits(prow):
            self._scol[mm] ^= touched

        # anticommuting destabilizers absorb the pivot too (supports only)
        drest = self._fold_dcol(op) & ~low
        m = drest
        while m:
            lowr = m & -m
            m ^= lowr
            self._drow[lowr.bit_length() - 1] ^= prow
        for mm in _bits(prow):
            self._dcol[mm] ^= drest

        # the old pivot generator becomes the new destabilizer at p
        for mm in _bits(self._drow[p]):
            self._dcol[mm] &= ~low
        self._drow[p] = prow
        for mm in _bits(prow):
            self._dcol[mm] |= low

        # and the measured operator, with its outcome sign, takes row p
        self._srow[p] = op.mask
        for mm in op.modes:
            self._scol[mm] |= low
        self._set_row_k(p, op.k if s > 0 else (op.k + 2) & 3)

    def remove_pair(self, u: int, v: int) -> None:
        """Drop a fused pair from the tracked system, freeing both ids.

        The pair parity must already be certain (fuse it first); the rest
        of the state is untouched.
        """
        op = MajoranaProduct.pair(u, v)
        self._check_op(op)
        if self._fold_scol(op):
            raise TableauError("cannot remove a pair whose parity is uncertain")
        anti_d = self._fold_dcol(op)
        if anti_d == 0:
            raise TableauError("operator is not determined by the tracked state")
        low = anti_d & -anti_d
        p = low.bit_length() - 1
        merge = anti_d ^ low

        # fold the other witnesses into the pivot row so that S_p = +/- pair op
        acc_mask = self._srow[p]
        acc_k = self._row_k(p)
        m = merge
        while m:
            lowr = m & -m
            r = lowr.bit_length() - 1
            m ^= lowr
            row = self._srow[r]
            inv = _inv_parity(acc_mask, row)
            acc_k = (acc_k + self._row_k(r) + 2 * inv) & 3
            acc_mask ^= row
        if acc_mask != op.mask:
            raise TableauError("internal mismatch isolating a fused pair")
        changed = self._srow[p] ^ acc_mask
        for mm in _bits(changed):
            self._scol[mm] ^= low
        self._srow[p] = acc_mask
        self._set_row_k(p, acc_k)

        # keep duality: merged rows' destabilizers absorb D_p
        dp = self._drow[p]
        m = merge
        while m:
            lowr = m & -m
            m ^= lowr
            self._drow[lowr.bit_length() - 1] ^= dp
        for mm in _bits(dp):
            self._dcol[mm] ^= merge

        # scrub the dying modes out of every other row
        uv_mask = op.mask
        pk = acc_k
        both = self._scol[u] & self._scol[v] & ~low
        if (self._scol[u] ^ self._scol[v]) & ~low:
            raise TableauError("a generator holds half of a fused pair")
        m = both
        while m:
            lowr = m & -m
            r = lowr.bit_length() - 1
            m ^= lowr
            row = self._srow[r]
            inv = _inv_parity(row, uv_mask)
            self._set_row_k(r, (self._row_k(r) + pk + 2 * inv) & 3)
            self._srow[r] = row ^ uv_mask
        self._scol[u] ^= both
        self._scol[v] ^= both

        dboth = (self._dcol[u] | self._dcol[v]) & ~low
        if (self._dcol[u] ^ self._dcol[v]) & ~low:
            raise TableauError("a destabilizer holds half of a fused pair")
        m = dboth
        while m:
            lowr = m & -m
            m ^= lowr
            self._drow[lowr.bit_length() - 1] ^= uv_mask
        self._dcol[u] &= low
        self._dcol[v] &= low

        # retire row p and the two mode ids
        for mm in _bits(self._drow[p]):
            self._dcol[mm] &= ~low
        self._srow[p] = 0
        self._drow[p] = 0
        self._set_row_k(p, 0)
        self._scol[u] = self._scol[v] = 0
        self._dcol[u] = self._dcol[v] = 0
        heapq.heappush(self._free_rows, p)
        heapq.heappush(self._free_ids, u)
        heapq.heappush(self._free_ids, v)
        self._live.discard(u)
        self._live.discard(v)

    # ------------------------------------------------------------------
    # state management

    def snapshot(self):
        """Cheap copyable image of the full state (see `restore`)."""
        return (
            list(self._srow),
            list(self._drow),
            list(self._scol),
            list(self._dcol),
            self._abit,
            self._bbit,
            list(self._free_rows),
            list(self._free_ids),
            set(self._live),
        )

    def restore(self, snap) -> None:
        (srow, drow, scol, dcol, abit, bbit, frows, fids, live) = snap
        self._srow = list(srow)
        self._drow = list(drow)
        self._scol = list(scol)
        self._dcol = list(dcol)
        self._abit = abit
        self._bbit = bbit
        self._free_rows = list(frows)
        self._free_ids = list(fids)
        self._live = set(live)

    def fingerprint(self):
        """Canonical image of the live state, independent of arena layout.

        Two tableaux whose histories are physically equivalent compare
        equal here even if they retired different row or id slots along
        the way.
        """
        dead = set(self._free_rows)
        rows = tuple(
            (self._srow[r], self._drow[r],
             (self._abit >> r) & 1, (self._bbit >> r) & 1)
            for r in range(len(self._srow)) if r not in dead)
        cols = tuple((i, self._scol[i], self._dcol[i]) for i in sorted(self._live))
        return rows, cols

    def validate(self) -> None:
        """Check every structural invariant; raises TableauError on failure.

        Quadratic in the number of generators, meant for tests.
        """
        live_rows = [r for r, row in enumerate(self._srow) if row]
        if 2 * len(live_rows) != len(self._live):
            raise TableauError("generator count does not match mode count")
        cover = 0
        for r in live_rows:
            row = self._srow[r]
            w = row.bit_count()
            if w % 2:
                raise TableauError(f"row {r} has odd weight")
            if ((self._bbit >> r) & 1) != (w // 2) % 2:
                raise TableauError(f"row {r} phase is not Hermitian")
            if row & ~self._mask_of_live():
                raise TableauError(f"row {r} touches a dead mode")
            cover |= row
        if cover != self._mask_of_live():
            raise TableauError("some live mode is in no generator")
        for i, r in enumerate(live_rows):
            for rr in live_rows[i + 1 :]:
                if (self._srow[r] & self._srow[rr]).bit_count() % 2:
                    raise TableauError(f"rows {r}, {rr} anticommute")
        for r in live_rows:
            drow = self._drow[r]
            if not drow:
                raise TableauError(f"row {r} has an empty destabilizer")
            for rr in live_rows:
                overlap = (drow & self._srow[rr]).bit_count() % 2
                if overlap != (1 if r == rr else 0):
                    raise TableauError(f"destabilizer {r} pairs wrongly with row {rr}")
        for m_id in range(len(self._scol)):
            scol_ref = 0
            dcol_ref = 0
            for r in live_rows:
                if (self._srow[r] >> m_id) & 1:
                    scol_ref |= 1 << r
                if (self._drow[r] >> m_id) & 1:
                    dcol_ref |= 1 << r
            if scol_ref != self._scol[m_id] or dcol_ref != self._dcol[m_id]:
                raise TableauError(f"column cache for mode {m_id} is stale")

    def _mask_of_live(self) -> int:
        mask = 0
        for m in self._live:
            mask |= 1 << m
        return mask


def _inversions(seq: list[int]) -> int:
    inv = 0
    for i, a in enumerate(seq):
        for b in seq[i + 1 :]:
            if a > b:
                inv += 1
    return inv


class PositionalTableau:
    """Positional view of the stabilizer engine.

    Here modes are addressed by position in a linear order instead of by
    id, which is the natural frame for anyons registered along a line:
    inserting a vacuum pair at position p shifts every mode from p
    onwards up by two, and a braid acts on two adjacent positions.  The
    engine underneath keys everything by stable ids, so this wrapper only
    maintains the order and converts operator phases between the two
    mode orderings (reordering an operator string costs a sign per
    transposition).
    """

    def __init__(self) -> None:
        self._engine = MajoranaTableau()
        self._order: list[int] = []  # position -> engine id

    @property
    def num_modes(self) -> int:
        return len(self._order)

    def insert_vacuum_pair(self, position: Optional[int] = None) -> int:
        """Create a fresh vacuum pair at (position, position + 1).

        Defaults to appending at the end.  Returns the position of the
        first new mode.
        """
        n = len(self._order)
        if position is None:
            position = n
        if not 0 <= position <= n:
            raise ValueError(f"position {position} out of range 0..{n}")
        u, v = self._engine.insert_vacuum_pair()
        self._order[position:position] = [u, v]
        return position

    def braid(self, alpha: int, clockwise: bool = True) -> None:
        """Exchange positions alpha and alpha + 1 (a single crossing)."""
        self._engine.braid(self._order[alpha], self._order[alpha + 1], clockwise)

    def negate_mode(self, alpha: int) -> None:
        self._engine.negate_mode(self._order[alpha])

    def _to_engine_op(self, positions: tuple[int, ...], k: int) -> MajoranaProduct:
        if any(a >= b for a, b in zip(positions, positions[1:])):
            raise ValueError("positions must be strictly ascending")
        ids = [self._order[p] for p in positions]
        k = (k + 2 * _inversions(ids)) & 3
        return MajoranaProduct(tuple(sorted(ids)), k)

    def is_deterministic(self, positions: tuple[int, ...], k: int) -> bool:
        return self._engine.is_deterministic(self._to_engine_op(positions, k))

    def outcome_distribution(
        self, positions: tuple[int, ...], k: int
    ) -> tuple[float, float]:
        return self._engine.outcome_distribution(self._to_engine_op(positions, k))

    def measure(
        self,
        positions: tuple[int, ...],
        k: int,
        rng=None,
        forced: Optional[int] = None,
    ) -> int:
        return self._engine.measure(self._to_engine_op(positions, k), rng, forced)

    def remove_pair(self, position: int) -> None:
        """Drop the pair at (position, position + 1); must be certain."""
        u, v = self._order[position], self._order[position + 1]
        self._engine.remove_pair(u, v)
        del self._order[position : position + 2]

    def generators(self) -> list[tuple[tuple[int, ...], int]]:
        """Stabilizer generators as (ascending positions, phase power)."""
        pos_of = {m: p for p, m in enumerate(self._order)}
        out = []
        for op in self._engine.generators():
            positions = [pos_of[m] for m in op.modes]
            k = (op.k + 2 * _inversions(positions)) & 3
            out.append((tuple(sorted(positions)), k))
        return sorted(out)

    def snapshot(self):
        return self._engine.snapshot(), list(self._order)

    def restore(self, snap) -> None:
        engine_snap, order = snap
        self._engine.restore(engine_snap)
        self._order = list(order)

    def validate(self) -> None:
        self._engine.validate()
        if sorted(self._order) != sorted(self._engine.mode_ids):
            raise TableauError("positional order does not cover the live ids")
