"""Physics checks for the anyon registry: transport, fusion, monodromy,
torus sector bookkeeping, and a dense-simulator twin for everything at once."""

from collections import Counter

import numpy as np
import pytest

from anyonmem.dense import DenseMajoranaSim
from anyonmem.lattice import build_lattice
from anyonmem.model import Charge
from anyonmem.system import AnyonSystem
from anyonmem.tableau import MajoranaProduct, MajoranaTableau, TableauError

I, PSI, SIG = Charge.VACUUM, Charge.FERMION, Charge.SIGMA


class TwinTableau:
    """Stabilizer engine and dense vector simulator run in lockstep.

    Every measurement first compares the two outcome distributions, then
    forces the dense side to reproduce the engine's sample, so a
    divergence raises at the first observable point instead of biasing
    later statistics.
    """

    def __init__(self):
        self.engine = MajoranaTableau()
        self.dense = DenseMajoranaSim()

    @property
    def num_modes(self):
        return self.engine.num_modes

    @property
    def mode_ids(self):
        return self.engine.mode_ids

    def insert_vacuum_pair(self):
        u, v = self.engine.insert_vacuum_pair()
        self.dense.insert_vacuum_pair(u, v)
        return u, v

    def braid(self, u, v, clockwise=True):
        self.engine.braid(u, v, clockwise)
        self.dense.braid(u, v, clockwise)

    def negate_mode(self, u):
        self.engine.negate_mode(u)
        self.dense.negate_mode(u)

    def _agree(self, op):
        pe = self.engine.outcome_distribution(op)
        pd = self.dense.outcome_distribution(op)
        assert pe == pytest.approx(pd, abs=1e-9), f"engine {pe} vs dense {pd}"
        return pe

    def is_deterministic(self, op):
        self._agree(op)
        return self.engine.is_deterministic(op)

    def outcome_distribution(self, op):
        return self._agree(op)

    def measure(self, op, rng=None, forced=None):
        self._agree(op)
        s = self.engine.measure(op, rng=rng, forced=forced)
        assert self.dense.measure(op, forced=s) == s
        return s

    def remove_pair(self, u, v):
        self.engine.remove_pair(u, v)
        self.dense.release_pair(u, v)

    def snapshot(self):
        return self.engine.snapshot(), self.dense.snapshot()

    def restore(self, snap):
        self.engine.restore(snap[0])
        self.dense.restore(snap[1])

    def validate(self):
        self.engine.validate()


def fresh(topology="sphere", L=4, seed=0, twin=False):
    rng = np.random.default_rng(seed)
    tableau = TwinTableau() if twin else None
    return AnyonSystem(build_lattice(topology, L), rng=rng, tableau=tableau)


def row_sites(system, row=0):
    lat = system.lattice
    return [lat.site_index(row, c) for c in range(lat.L)]


class TestElementaryOps:
    def test_sigma_pair_registers_and_refuses_to_vacuum(self):
        sys_ = fresh(twin=True)
        kept, arrived = sys_.pair_create((0, 1), SIG)
        assert sys_.blocks[0] == [kept] and sys_.blocks[1] == [arrived]
        assert sys_.n_sigma(0) == sys_.n_sigma(1) == 1
        sys_.audit()
        sys_.hop((1, 0))
        assert sys_.blocks[0] == [kept, arrived]
        assert sys_.decohere_site(0) is I
        assert sys_.total_sigma() == 0
        sys_.audit()

    def test_pair_charge_validation(self):
        sys_ = fresh()
        with pytest.raises(ValueError):
            sys_.pair_create((0, 1), I)

    def test_psi_pair_annihilates_on_rejoin(self):
        sys_ = fresh(twin=True)
        assert sys_.pair_create((0, 1), PSI) is None
        assert sys_.n_psi[0] == sys_.n_psi[1] == 1
        sys_.hop((1, 0))
        assert sys_.n_psi[0] == 0 and sys_.n_psi[1] == 0
        assert all(q is I for q in sys_.site_view())
        sys_.audit()

    def test_hop_moves_every_charge(self):
        sys_ = fresh(twin=True)
        far = sys_.lattice.site_index(1, 0)
        sys_.pair_create((0, 1), SIG)
        sys_.pair_create((0, 1), SIG)
        sys_.pair_create((0, far), PSI)
        assert sys_.n_sigma(0) == 2 and sys_.n_psi[0] == 1
        sys_.hop((0, 1))
        assert not sys_.occupied(0)
        assert sys_.n_sigma(1) == 4 and sys_.n_psi[1] == 1
        sys_.audit()

    def test_hop_and_exchange_preconditions(self):
        sys_ = fresh()
        with pytest.raises(ValueError):
            sys_.hop((0, 1))
        with pytest.raises(ValueError):
            sys_.exchange((0, 1))

    def test_exchange_swaps_empty_site_contents(self):
        sys_ = fresh(twin=True)
        kept, arrived = sys_.pair_create((0, 1), SIG)
        far = sys_.lattice.site_index(1, 1)
        sys_.pair_create((1, far), PSI)
        sys_.exchange((1, 2))
        assert sys_.blocks[1] == [] and sys_.blocks[2] == [arrived]
        assert sys_.n_psi[1] == 0 and sys_.n_psi[2] == 1
        sys_.audit()
        # moved apart and rejoined, the pair still fuses to vacuum;
        # only the passenger fermion is left standing at the site
        sys_.exchange((1, 2))
        sys_.hop((1, 0))
        assert sys_.decohere_site(0) is PSI
        assert sys_.decohere_site(far) is PSI
        sys_.audit()

    def test_fermion_absorption_flips_the_pair_channel(self):
        # put a fermion on top of one member of a vacuum sigma pair:
        # sigma x psi = sigma, and the pair as a whole becomes a psi pair
        sys_ = fresh(twin=True)
        sys_.pair_create((0, 1), SIG)
        far = sys_.lattice.site_index(2, 0)
        mid = sys_.lattice.site_index(1, 0)
        sys_.pair_create((0, mid), PSI)
        sys_.hop((mid, far))
        assert sys_.decohere_site(0) is SIG
        assert sys_.n_psi[0] == 0
        sys_.hop((0, 1))
        assert sys_.decohere_site(1) is PSI
        assert sys_.decohere_site(far) is PSI
        sys_.audit()
        view = sys_.site_view()
        assert [s for s, q in enumerate(view) if q is PSI] == [1, far]
        assert sum(q is not I for q in view) == 2

    def test_two_pairs_fused_together_leave_vacuum(self):
        for seed in range(12):
            sys_ = fresh(seed=seed, twin=True)
            sys_.pair_create((0, 1), SIG)
            sys_.pair_create((0, 1), SIG)
            sys_.hop((0, 1))
            assert sys_.decohere_site(1) is I
            sys_.audit()


class TestTransport:
    """Slot cascades through intermediate registry positions."""

    def test_vertical_hop_slides_past_occupied_spectators(self):
        # moving (0,c) -> (1,c) passes every serpentine rank in between;
        # park spectator pairs there and check nobody is disturbed
        sys_ = fresh(L=4, twin=True)
        lat = sys_.lattice
        a, b = lat.site_index(0, 1), lat.site_index(1, 1)
        sys_.pair_create((a, b), SIG)
        spect_edge = (lat.site_index(0, 2), lat.site_index(0, 3))
        sys_.pair_create(spect_edge, SIG)
        sys_.hop((a, b))
        sys_.audit()
        # the traveling pair fuses to vacuum where it stands
        assert sys_.decohere_site(b) is I
        # the spectator pair was slid past twice and is untouched
        sys_.hop(spect_edge)
        assert sys_.decohere_site(spect_edge[1]) is I
        sys_.audit()

    def test_double_exchange_through_spectators_makes_fermions(self):
        # the monodromy result must not depend on how long the
        # linearized runway between the two sites is
        sys_ = fresh(L=4, twin=True)
        lat = sys_.lattice
        a, b = lat.site_index(0, 1), lat.site_index(1, 1)
        left = (lat.site_index(0, 0), a)
        right = (lat.site_index(1, 0), b)
        sys_.pair_create(left, SIG)
        sys_.pair_create(right, SIG)
        spect = (lat.site_index(0, 2), lat.site_index(0, 3))
        sys_.pair_create(spect, SIG)
        sys_.exchange((a, b))
        sys_.exchange((a, b))
        sys_.audit()
        assert sys_.fuse_path(left) is PSI
        assert sys_.fuse_path(right) is PSI
        assert sys_.fuse_path(spect) is I
        sys_.audit()


class TestFusionStatistics:
    def test_cross_fusion_is_uniform_and_complementary(self):
        # fuse one member from each of two independent vacuum pairs:
        # the outcome is a fair coin, and the leftover members must
        # fuse to the same charge so the total stays vacuum
        hits = Counter()
        for seed in range(400):
            sys_ = fresh(seed=seed)
            lat = sys_.lattice
            sys_.pair_create((0, 1), SIG)
            sys_.pair_create((2, 3), SIG)
            q_mid = sys_.fuse_path((1, 2))
            # bring the outer members together on a detour around the
            # site where the first fusion product was deposited
            detour = [0] + [lat.site_index(1, c) for c in range(4)] + [3]
            q_rest = sys_.fuse_path(detour)
            assert (q_mid is I and q_rest is I) or (q_mid is PSI and q_rest is PSI)
            hits[q_mid] += 1
        frac = hits[PSI] / 400
        assert abs(frac - 0.5) < 0.08

    def test_fuse_path_sweeps_everything_along(self):
        sys_ = fresh(twin=True)
        sites = row_sites(sys_)
        sys_.pair_create((sites[0], sites[1]), SIG)
        sys_.pair_create((sites[1], sites[2]), PSI)
        q = sys_.fuse_path(sites)
        # sigma pair closes to vacuum, stray psi pair annihilates with
        # itself along the sweep, nothing remains anywhere
        assert q is I
        assert all(not sys_.occupied(s) for s in range(sys_.lattice.n_sites))
        sys_.audit()


def monodromy_cycle(seed, decohere_between=False, measure_mid=False):
    """One create/exchange/exchange/fuse cycle on four sites in a row.

    Returns (q_left, q_right, mids) where mids holds any nondemolition
    worldline-pair measurements that were taken along the way.
    """
    sys_ = fresh(seed=seed)
    s0, s1, s2, s3 = row_sites(sys_)[:4]
    sys_.pair_create((s0, s1), SIG)
    sys_.pair_create((s2, s3), SIG)
    sys_.exchange((s1, s2))
    mids = []
    if decohere_between:
        for s in (s0, s1, s2, s3):
            assert sys_.decohere_site(s) is SIG
    if measure_mid:
        # nondemolition charge measurement of each pair as positioned:
        # after one crossing these mix the original pairs, so the
        # outcome is a fair (but perfectly correlated) coin
        op_a = MajoranaProduct.pair(sys_.blocks[s0][0], sys_.blocks[s1][0])
        op_b = MajoranaProduct.pair(sys_.blocks[s2][0], sys_.blocks[s3][0])
        mids.append((sys_.tableau.measure(op_a, sys_.rng),
                     sys_.tableau.measure(op_b, sys_.rng)))
    sys_.exchange((s1, s2))
    if measure_mid:
        op_a = MajoranaProduct.pair(sys_.blocks[s0][0], sys_.blocks[s1][0])
        op_b = MajoranaProduct.pair(sys_.blocks[s2][0], sys_.blocks[s3][0])
        mids.append((sys_.tableau.measure(op_a, sys_.rng),
                     sys_.tableau.measure(op_b, sys_.rng)))
    q_left = sys_.fuse_path((s0, s1))
    q_right = sys_.fuse_path((s2, s3))
    sys_.audit()
    return q_left, q_right, mids


class TestMonodromy:
    def test_no_braid_control_fuses_to_vacuum(self):
        for seed in range(50):
            sys_ = fresh(seed=seed)
            s0, s1, s2, s3 = row_sites(sys_)[:4]
            sys_.pair_create((s0, s1), SIG)
            sys_.pair_create((s2, s3), SIG)
            assert sys_.fuse_path((s0, s1)) is I
            assert sys_.fuse_path((s2, s3)) is I

    def test_double_exchange_is_deterministic_fermions(self):
        for seed in range(200):
            assert monodromy_cycle(seed)[:2] == (PSI, PSI)

    def test_site_decoherence_between_crossings_changes_nothing(self):
        # every site holds a single sigma in between, so decohering
        # there is a physical no-op and determinism must survive it
        for seed in range(200):
            assert monodromy_cycle(seed, decohere_between=True)[:2] == (PSI, PSI)

    def test_single_exchange_gives_correlated_coin(self):
        hits = Counter()
        for seed in range(400):
            sys_ = fresh(seed=seed)
            s0, s1, s2, s3 = row_sites(sys_)[:4]
            sys_.pair_create((s0, s1), SIG)
            sys_.pair_create((s2, s3), SIG)
            sys_.exchange((s1, s2))
            qa = sys_.fuse_path((s0, s1))
            qb = sys_.fuse_path((s2, s3))
            assert qa is qb
            hits[qa] += 1
        assert abs(hits[PSI] / 400 - 0.5) < 0.08

    def test_midway_charge_measurement_breaks_determinism(self):
        n = 600
        t1_plus = t2_plus = 0
        t2_given_t1 = Counter()
        for seed in range(n):
            qa, qb, mids = monodromy_cycle(seed, measure_mid=True)
            (a1, b1), (a2, b2) = mids
            assert a1 == b1 and a2 == b2  # pairs stay perfectly correlated
            assert qa is qb
            # the final fusion just confirms the second measurement
            assert (qa is PSI) == (a2 == -1)
            t1_plus += a1 == 1
            t2_plus += a2 == 1
            t2_given_t1[(a1, a2)] += 1
        assert abs(t1_plus / n - 0.5) < 0.07
        assert abs(t2_plus / n - 0.5) < 0.07
        # second crossing rerandomizes the charge regardless of t1
        for first in (1, -1):
            total = t2_given_t1[(first, 1)] + t2_given_t1[(first, -1)]
            assert abs(t2_given_t1[(first, 1)] / total - 0.5) < 0.10


def hop_chain(sys_, coords):
    """Hop along consecutive (row, col) coordinates."""
    lat = sys_.lattice
    for a, b in zip(coords, coords[1:]):
        sys_.hop((lat.site_index(*a), lat.site_index(*b)))


class TestTorusSector:
    def test_fresh_sector_and_sphere_refusal(self):
        assert fresh("torus").read_sector() == (1, 1, 0, 0)
        with pytest.raises(ValueError):
            fresh("sphere").read_sector()

    def test_sigma_row_winding_flips_conjugate_loop(self):
        # partner stays at (1,0); the mover circles the row ring back to
        # it, crossing the column-wrap seam exactly once
        sys_ = fresh("torus", seed=3, twin=True)
        i = sys_.lattice.site_index(1, 0)
        sys_.pair_create((i, sys_.lattice.site_index(1, 1)), SIG)
        hop_chain(sys_, [(1, 1), (1, 2), (1, 3), (1, 0)])
        assert sys_.n_sigma(i) == 2
        assert sys_.read_sector() == (-1, 1, 0, 0)
        assert sys_.decohere_site(i) is I
        sys_.audit()

    def test_sigma_row_winding_through_negative_loop_leaves_fermion(self):
        sys_ = fresh("torus", seed=3, twin=True)
        sys_.sector["lam_v"] = -1
        i = sys_.lattice.site_index(1, 0)
        sys_.pair_create((i, sys_.lattice.site_index(1, 1)), SIG)
        hop_chain(sys_, [(1, 1), (1, 2), (1, 3), (1, 0)])
        assert sys_.read_sector() == (-1, -1, 0, 0)
        assert sys_.decohere_site(i) is PSI
        sys_.audit()

    def test_sigma_column_winding_flips_conjugate_loop(self):
        sys_ = fresh("torus", seed=5, twin=True)
        i = sys_.lattice.site_index(0, 2)
        sys_.pair_create((i, sys_.lattice.site_index(1, 2)), SIG)
        hop_chain(sys_, [(1, 2), (2, 2), (3, 2), (0, 2)])
        assert sys_.n_sigma(i) == 2
        assert sys_.read_sector() == (1, -1, 0, 0)
        assert sys_.decohere_site(i) is I
        sys_.audit()

    def test_psi_windings_toggle_winding_parities(self):
        sys_ = fresh("torus")
        lat = sys_.lattice
        sys_.pair_create((lat.site_index(0, 0), lat.site_index(0, 1)), PSI)
        hop_chain(sys_, [(0, 1), (0, 2), (0, 3), (0, 0)])
        assert all(not sys_.occupied(s) for s in range(lat.n_sites))
        assert sys_.read_sector() == (1, 1, 0, 1)
        sys_.pair_create((lat.site_index(2, 1), lat.site_index(3, 1)), PSI)
        hop_chain(sys_, [(3, 1), (0, 1), (1, 1), (2, 1)])
        assert all(not sys_.occupied(s) for s in range(lat.n_sites))
        assert sys_.read_sector() == (1, 1, 1, 1)

    def test_contractible_sigma_loop_is_trivial(self):
        sys_ = fresh("torus", seed=9, twin=True)
        lat = sys_.lattice
        sys_.pair_create((lat.site_index(0, 0), lat.site_index(0, 1)), SIG)
        hop_chain(sys_, [(0, 1), (1, 1), (1, 0), (0, 0)])
        assert sys_.read_sector() == (1, 1, 0, 0)
        assert sys_.decohere_site(lat.site_index(0, 0)) is I
        sys_.audit()

    def test_sigma_loop_around_a_fermion_is_still_trivial(self):
        # sigma x psi has a unique fusion channel, so a full encirclement
        # is a global phase: the wound pair must still close to vacuum
        sys_ = fresh(seed=11, twin=True)
        lat = sys_.lattice
        sys_.pair_create((lat.site_index(1, 1), lat.site_index(1, 2)), PSI)
        sys_.hop((lat.site_index(1, 2), lat.site_index(1, 3)))
        sys_.pair_create((lat.site_index(0, 0), lat.site_index(0, 1)), SIG)
        ring = [(0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0), (0, 0)]
        hop_chain(sys_, ring)
        assert sys_.decohere_site(lat.site_index(0, 0)) is I
        assert sys_.n_psi[lat.site_index(1, 1)] == 1
        sys_.audit()


def physical_state(sys_):
    """Everything observable about a system, arena layout factored out."""
    return (sys_.tableau.fingerprint(), [list(b) for b in sys_.blocks],
            list(sys_.n_psi),
            None if sys_.sector is None else dict(sys_.sector))


class TestUncreate:
    @pytest.mark.parametrize("topology", ["sphere", "torus"])
    def test_uncreate_restores_the_exact_state(self, topology):
        sys_ = fresh(topology, seed=2)
        lat = sys_.lattice
        sys_.pair_create((0, 1), SIG)
        sys_.pair_create((lat.site_index(2, 1), lat.site_index(2, 2)), PSI)
        before = physical_state(sys_)
        edges = [(1, 2), (lat.site_index(0, 3), lat.site_index(1, 3))]
        if topology == "torus":
            edges.append((lat.site_index(1, lat.L - 1), lat.site_index(1, 0)))
        for edge in edges:
            slots = sys_.pair_create(edge, SIG)
            sys_.uncreate_pair(edge, slots)
            assert physical_state(sys_) == before
            sys_.audit()

    def test_uncreate_with_negative_loop_seam(self):
        sys_ = fresh("torus", seed=4)
        lat = sys_.lattice
        sys_.sector["lam_v"] = -1
        before = physical_state(sys_)
        edge = (lat.site_index(2, lat.L - 1), lat.site_index(2, 0))
        slots = sys_.pair_create(edge, SIG)
        sys_.uncreate_pair(edge, slots)
        assert physical_state(sys_) == before

    def test_uncreate_is_last_in_first_out(self):
        sys_ = fresh(seed=6)
        before = physical_state(sys_)
        first = sys_.pair_create((1, 2), SIG)
        second = sys_.pair_create((1, 2), SIG)
        # the newer pair sits between the older one and the edge, so the
        # older one cannot be unwound first
        with pytest.raises(TableauError):
            sys_.uncreate_pair((1, 2), first)
        sys_.uncreate_pair((1, 2), second)
        sys_.uncreate_pair((1, 2), first)
        assert physical_state(sys_) == before


class TestTwinChurn:
    """Random walks over every operation, mirrored in the dense simulator."""

    @pytest.mark.parametrize("topology", ["sphere", "torus"])
    @pytest.mark.parametrize("seed", range(4))
    def test_random_operation_walk(self, topology, seed):
        sys_ = fresh(topology, L=4, seed=seed, twin=True)
        rng = np.random.default_rng(1000 + seed)
        lat = sys_.lattice
        inserted = 0
        for step in range(40):
            choice = rng.random()
            if choice < 0.30 and inserted < 9:
                edge = lat.edges[rng.integers(lat.n_edges)]
                q = SIG if rng.random() < 0.7 else PSI
                sys_.pair_create(edge, q)
                inserted += q is SIG
            elif choice < 0.45:
                occupied = [s for s in range(lat.n_sites) if sys_.occupied(s)]
                if occupied:
                    a = int(occupied[rng.integers(len(occupied))])
                    nbrs = lat.neighbors(a)
                    sys_.hop((a, int(nbrs[rng.integers(len(nbrs))])))
            elif choice < 0.70:
                edge = lat.edges[rng.integers(lat.n_edges)]
                if sys_.occupied(edge[0]) or sys_.occupied(edge[1]):
                    sys_.exchange(edge, clockwise=bool(rng.integers(2)))
            elif choice < 0.85:
                sys_.decohere_site(int(rng.integers(lat.n_sites)))
            else:
                occupied = [s for s in range(lat.n_sites) if sys_.occupied(s)]
                if occupied:
                    a = int(occupied[rng.integers(len(occupied))])
                    b = int(rng.integers(lat.n_sites))
                    path = lat.shortest_path(a, b)
                    if path is not None and len(path) <= 4:
                        sys_.fuse_path(path)
            if step % 5 == 4:
                sys_.audit()
        sys_.audit()
        for q in sys_.site_view():
            assert q in (I, PSI, SIG)
        sys_.audit()
