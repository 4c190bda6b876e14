"""Codestate preparation and verification, cross-checked dense."""

import numpy as np
import pytest

from anyonmem.codes import (
    CodeState,
    IFC_PLUS,
    IFC_ZERO,
    defining_pairs,
    prepare,
    verify,
)
from anyonmem.lattice import build_lattice
from anyonmem.model import Charge
from anyonmem.tableau import MajoranaProduct

from test_system import TwinTableau, hop_chain

I, PSI, SIG = Charge.VACUUM, Charge.FERMION, Charge.SIGMA


def pair_op(system, a, b):
    return MajoranaProduct.pair(system.blocks[a][0], system.blocks[b][0])


def prepared(state, L=4, seed=0, twin=False):
    lat = build_lattice(state.topology, L)
    tableau = TwinTableau() if twin else None
    return prepare(lat, state, rng=np.random.default_rng(seed), tableau=tableau)


class TestCodeState:
    def test_labels_validate(self):
        assert CodeState("ifc", "zero").topology == "sphere"
        assert CodeState("itc", [1, -1]).label == (1, -1)
        with pytest.raises(ValueError):
            CodeState("ifc", "one")
        with pytest.raises(ValueError):
            CodeState("itc", (1, 0))
        with pytest.raises(ValueError):
            CodeState("toric", "zero")

    def test_topology_mismatch_rejected(self):
        with pytest.raises(ValueError):
            prepare(build_lattice("torus", 4), IFC_ZERO)
        with pytest.raises(ValueError):
            prepare(build_lattice("sphere", 4), CodeState("itc", (1, 1)))


class TestPrepareIFC:
    @pytest.mark.parametrize("label", ["zero", "plus"])
    @pytest.mark.parametrize("L", [4, 6])
    def test_distribution_against_dense_oracle(self, label, L):
        # the twin tableau compares engine and statevector distributions
        # at every peek and measurement inside prepare
        state = CodeState("ifc", label)
        system = prepared(state, L=L, twin=True)
        lat = system.lattice
        for site in range(lat.n_sites):
            want = 1 if site in lat.code_sites else 0
            assert system.n_sigma(site) == want
            assert system.n_psi[site] == 0
        (a, b), _ = defining_pairs(lat, label)
        assert system.tableau.outcome_distribution(pair_op(system, a, b)) == (1.0, 0.0)
        system.audit()

    def test_partner_channel_sign_tracks_interleaving(self):
        # whichever label's site pairs interleave along the registration
        # order carries a deterministic -1 partner parity; the labels
        # swap roles between L=4 and L=6
        for L, flipped in ((4, "zero"), (6, "plus")):
            for label in ("zero", "plus"):
                system = prepared(CodeState("ifc", label), L=L)
                _, (c, d) = defining_pairs(system.lattice, label)
                dist = system.tableau.outcome_distribution(pair_op(system, c, d))
                assert dist == ((0.0, 1.0) if label == flipped else (1.0, 0.0))

    def test_zero_and_plus_are_conjugate(self):
        zero = prepared(IFC_ZERO)
        (a, b), _ = defining_pairs(zero.lattice, "plus")
        assert zero.tableau.outcome_distribution(pair_op(zero, a, b)) == (0.5, 0.5)
        plus = prepared(IFC_PLUS)
        (a, b), _ = defining_pairs(plus.lattice, "zero")
        assert plus.tableau.outcome_distribution(pair_op(plus, a, b)) == (0.5, 0.5)

    def test_preparation_draws_no_randomness(self):
        rng = np.random.default_rng(123)
        before = rng.bit_generator.state
        prepare(build_lattice("sphere", 4), IFC_ZERO, rng=rng)
        assert rng.bit_generator.state == before


class TestPrepareITC:
    @pytest.mark.parametrize("lam", [(1, 1), (1, -1), (-1, 1), (-1, -1)])
    def test_sector_written(self, lam):
        system = prepared(CodeState("itc", lam))
        assert system.read_sector() == (*lam, 0, 0)
        assert system.total_sigma() == 0 and sum(system.n_psi) == 0


class TestVerify:
    @pytest.mark.parametrize("L", [4, 6, 8])
    @pytest.mark.parametrize("label", ["zero", "plus"])
    def test_roundtrip_ifc(self, L, label):
        state = CodeState("ifc", label)
        assert verify(prepared(state, L=L), state)

    @pytest.mark.parametrize("lam", [(1, 1), (1, -1), (-1, 1), (-1, -1)])
    def test_roundtrip_itc(self, lam):
        state = CodeState("itc", lam)
        assert verify(prepared(state), state)

    def test_monodromy_logical_action(self):
        # a full winding of one code anyon about another negates both
        # their modes; it acts as a logical flip on exactly the label
        # whose defining pair it straddles with one leg
        def wound(label, around):
            state = CodeState("ifc", label)
            system = prepared(state)
            top, right, bottom, left = system.lattice.code_sites
            sites = {"tr": (top, right), "rb": (right, bottom)}[around]
            for s in sites:
                system.tableau.negate_mode(system.blocks[s][0])
            system.audit()
            return verify(system, state)

        assert wound("zero", "rb") is False
        assert wound("zero", "tr") is True
        assert wound("plus", "tr") is False
        assert wound("plus", "rb") is True

    def test_residual_bulk_charge_fails(self):
        system = prepared(IFC_ZERO)
        system.pair_create((0, 1), Charge.FERMION)
        assert verify(system, IFC_ZERO) is False

    def test_fermion_on_code_site_fails(self):
        # park both halves of a fermion pair on code sites, leaving the
        # bulk clean, so only the code-site checks can trip
        system = prepared(IFC_ZERO)
        lat = system.lattice
        top, right = lat.code_sites[0], lat.code_sites[1]
        near_top = next(n for n in lat.neighbors(top) if not system.occupied(n))
        system.pair_create((near_top, top), Charge.FERMION)
        path = lat.shortest_path(near_top, right, avoid=set(lat.code_sites) - {right})
        for a, b in zip(path, path[1:]):
            system.hop((a, b))
        assert all(
            system.n_psi[s] == (1 if s in (top, right) else 0)
            for s in range(lat.n_sites)
        )
        assert verify(system, IFC_ZERO) is False

    def test_displaced_code_anyon_fails(self):
        system = prepared(IFC_ZERO)
        top = system.lattice.code_sites[0]
        free = next(
            n for n in system.lattice.neighbors(top) if not system.occupied(n)
        )
        system.hop((top, free))
        assert verify(system, IFC_ZERO) is False

    def test_itc_winding_fails(self):
        state = CodeState("itc", (1, 1))
        system = prepared(state, seed=5)
        lat = system.lattice
        row = [(1, c) for c in range(lat.L)]
        system.pair_create((lat.site_index(*row[0]), lat.site_index(*row[1])), Charge.SIGMA)
        hop_chain(system, row[1:] + row[:1])
        assert system.decohere_site(lat.site_index(*row[0])) is I
        assert verify(system, state) is False
        assert system.read_sector() == (-1, 1, 0, 0)

    def test_itc_trivial_loop_preserves(self):
        state = CodeState("itc", (1, -1))
        system = prepared(state, seed=7)
        lat = system.lattice
        loop = [(1, 1), (1, 2), (2, 2), (2, 1), (1, 1)]
        system.pair_create((lat.site_index(1, 1), lat.site_index(1, 2)), Charge.SIGMA)
        hop_chain(system, loop[1:])
        assert system.decohere_site(lat.site_index(1, 1)) is I
        assert verify(system, state) is True
