"""The two noise samplers: fixed relative rates and Metropolis.

Fixed-rate sampling draws a uniformly random directed edge per event,
keeps the processes that would act nontrivially given the endpoint
occupations (creation always; hopping needs an occupied origin; exchange
needs either endpoint occupied), picks one proportional to its rate, and
then flips an independent decoherence coin for every site.

Metropolis sampling keeps the system in a fully decohered configuration
and proposes only pair creations: charge 𝕀 with probability 1/2 (a
no-op), and ψ/σ with conditional probabilities chosen so the induced
two-site transition matrix is symmetric.  The proposal's fusion outcomes
are drawn from distributions peeked off the tableau, the energy change
of the resulting configuration decides acceptance, and only accepted
outcomes are committed (as forced measurements); a rejected proposal
unwinds its transport braids, which are unitary, so the state is left
untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .model import Charge
from .system import AnyonSystem
from .tableau import MajoranaProduct

__all__ = [
    "MetropolisParams",
    "NoiseRates",
    "StepRecord",
    "fixed_rate_step",
    "metropolis_step",
    "propose_on_edge",
    "sample_event_count",
]


@dataclass(frozen=True)
class NoiseRates:
    """Relative rates of the elementary processes plus decoherence.

    The four γ's are normalized to sum to 1; only their ratios matter,
    the overall scale is absorbed into the simulation time.
    """

    gamma_c_psi: float = 0.0
    gamma_c_sigma: float = 0.0
    gamma_h: float = 0.0
    gamma_e: float = 0.0
    p_d: float = 0.0

    def __post_init__(self) -> None:
        gs = (self.gamma_c_psi, self.gamma_c_sigma, self.gamma_h, self.gamma_e)
        if any(g < 0 for g in gs):
            raise ValueError("rates must be non-negative")
        total = sum(gs)
        if total <= 0:
            raise ValueError("at least one process rate must be positive")
        if not 0 <= self.p_d <= 1:
            raise ValueError("p_d must lie in [0, 1]")
        object.__setattr__(self, "gamma_c_psi", self.gamma_c_psi / total)
        object.__setattr__(self, "gamma_c_sigma", self.gamma_c_sigma / total)
        object.__setattr__(self, "gamma_h", self.gamma_h / total)
        object.__setattr__(self, "gamma_e", self.gamma_e / total)


@dataclass(frozen=True)
class MetropolisParams:
    """Masses and inverse temperature for thermal sampling."""

    beta: float
    m_psi: float = 1.0
    m_sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.beta < 0 or self.m_psi < 0 or self.m_sigma < 0:
            raise ValueError("masses and inverse temperature must be >= 0")

    def site_energy(self, q: Charge) -> float:
        if q is Charge.SIGMA:
            return self.m_sigma
        if q is Charge.FERMION:
            return self.m_psi
        return 0.0


class StepRecord(NamedTuple):
    """What one sampler step did (mainly for tests and diagnostics)."""

    process: str  # "create" | "hop" | "exchange" | "none"
    charge: Optional[Charge]
    edge: Optional[tuple[int, int]]
    accepted: bool


def sample_event_count(
    t_sim: float, edge_count: int, rng: np.random.Generator
) -> int:
    """Number of noise events for a run of duration t_sim."""
    if t_sim < 0:
        raise ValueError("t_sim must be >= 0")
    return int(rng.poisson(t_sim * edge_count))


def _random_directed_edge(
    system: AnyonSystem, rng: np.random.Generator
) -> tuple[int, int]:
    edges = system.lattice.edges
    idx = int(rng.integers(2 * len(edges)))
    a, b = edges[idx >> 1]
    return (b, a) if idx & 1 else (a, b)


def fixed_rate_step(
    system: AnyonSystem, rates: NoiseRates, rng: np.random.Generator
) -> StepRecord:
    """One event of the fixed-rate channel (Poisson-clock picture)."""
    i, j = _random_directed_edge(system, rng)
    occ_i, occ_j = system.occupied(i), system.occupied(j)

    weights = [rates.gamma_c_psi, rates.gamma_c_sigma]
    actions = ["create_psi", "create_sigma"]
    if occ_i:
        weights.append(rates.gamma_h)
        actions.append("hop")
    if occ_i or occ_j:
        weights.append(rates.gamma_e)
        actions.append("exchange")

    total = sum(weights)
    record = StepRecord("none", None, (i, j), False)
    if total > 0:
        r = rng.random() * total
        acc = 0.0
        chosen = actions[-1]
        for w, a in zip(weights, actions):
            acc += w
            if r < acc:
                chosen = a
                break
        if chosen == "create_psi":
            system.pair_create((i, j), Charge.FERMION)
            record = StepRecord("create", Charge.FERMION, (i, j), True)
        elif chosen == "create_sigma":
            system.pair_create((i, j), Charge.SIGMA)
            record = StepRecord("create", Charge.SIGMA, (i, j), True)
        elif chosen == "hop":
            system.hop((i, j))
            record = StepRecord("hop", None, (i, j), True)
        else:
            system.exchange((i, j), clockwise=bool(rng.integers(2)))
            record = StepRecord("exchange", None, (i, j), True)

    if rates.p_d >= 1.0:
        for s in range(system.lattice.n_sites):
            system.decohere_site(s)
    elif rates.p_d > 0.0:
        coins = rng.random(system.lattice.n_sites)
        for s in np.flatnonzero(coins < rates.p_d):
            system.decohere_site(int(s))
    return record


# ----------------------------------------------------------------------
# Metropolis sampling


def _site_charge(system: AnyonSystem, site: int) -> Charge:
    n = system.n_sigma(site)
    if n > 1:
        raise ValueError("metropolis stepping needs a fully decohered system")
    if n == 1:
        if system.n_psi[site]:
            raise ValueError("metropolis stepping needs a fully decohered system")
        return Charge.SIGMA
    return Charge.FERMION if system.n_psi[site] else Charge.VACUUM


def _proposal_charge(q_i: Charge, q_j: Charge, rng: np.random.Generator) -> Charge:
    """P(𝕀)=1/2; P(ψ), P(σ) split the rest, with ψ barred on (σ,σ)."""
    both_sigma = q_i is Charge.SIGMA and q_j is Charge.SIGMA
    r = rng.random()
    if r < 0.5:
        return Charge.VACUUM
    if both_sigma:
        return Charge.SIGMA
    return Charge.FERMION if r < 0.75 else Charge.SIGMA


def _accept(delta_e: float, beta: float, rng: np.random.Generator) -> bool:
    if delta_e <= 0:
        return True
    return rng.random() < math.exp(-beta * delta_e)


def _draw_joint(
    system: AnyonSystem,
    op_i: Optional[MajoranaProduct],
    op_j: Optional[MajoranaProduct],
    rng: np.random.Generator,
) -> tuple[Optional[int], Optional[int]]:
    """Sample fusion outcomes for up to two commuting pair operators.

    Marginals of such operators are deterministic or uniform; when both
    are uniform their product operator decides whether they are locked
    together or independent.  This reads the joint law off the tableau
    without performing any measurement.
    """

    def marginal(op):
        p_plus, _ = system.tableau.outcome_distribution(op)
        if p_plus == 1.0:
            return 1
        if p_plus == 0.0:
            return -1
        return 0  # uniform

    s_i = marginal(op_i) if op_i is not None else None
    s_j = marginal(op_j) if op_j is not None else None
    if s_i == 0 and s_j == 0:
        corr = marginal(op_i.times(op_j))
        s_i = 1 if rng.random() < 0.5 else -1
        s_j = corr * s_i if corr else (1 if rng.random() < 0.5 else -1)
    else:
        if s_i == 0:
            s_i = 1 if rng.random() < 0.5 else -1
        if s_j == 0:
            s_j = 1 if rng.random() < 0.5 else -1
    return s_i, s_j


def metropolis_step(
    system: AnyonSystem, params: MetropolisParams, rng: np.random.Generator
) -> StepRecord:
    """One proposal of the thermal sampler."""
    edge = _random_directed_edge(system, rng)
    return propose_on_edge(system, params, rng, edge)


def propose_on_edge(
    system: AnyonSystem,
    params: MetropolisParams,
    rng: np.random.Generator,
    edge: tuple[int, int],
) -> StepRecord:
    """The Metropolis proposal/acceptance cycle for one directed edge."""
    i, j = edge
    q_i, q_j = _site_charge(system, i), _site_charge(system, j)
    q = _proposal_charge(q_i, q_j, rng)
    if q is Charge.VACUUM:
        return StepRecord("none", Charge.VACUUM, edge, True)

    e_before = params.site_energy(q_i) + params.site_energy(q_j)

    if q is Charge.FERMION:
        # ψ delivery is deterministic: ψ×ψ=𝕀 and ψ×σ=σ
        new_i = _charge_after_psi(q_i)
        new_j = _charge_after_psi(q_j)
        delta = params.site_energy(new_i) + params.site_energy(new_j) - e_before
        if not _accept(delta, params.beta, rng):
            return StepRecord("create", Charge.FERMION, edge, False)
        system.pair_create(edge, Charge.FERMION)
        system.decohere_site(i)
        system.decohere_site(j)
        return StepRecord("create", Charge.FERMION, edge, True)

    if q_i is not Charge.SIGMA and q_j is not Charge.SIGMA:
        # both deliveries land without fusion randomness: q ⊗ σ -> σ
        delta = 2 * params.m_sigma - e_before
        if not _accept(delta, params.beta, rng):
            return StepRecord("create", Charge.SIGMA, edge, False)
        system.pair_create(edge, Charge.SIGMA)
        system.decohere_site(i)
        system.decohere_site(j)
        return StepRecord("create", Charge.SIGMA, edge, True)

    # at least one endpoint already holds a σ: delivery forces a fusion
    # there, whose outcome decides the proposed configuration
    slots = system.pair_create(edge, Charge.SIGMA)
    op_i = _first_pair_op(system, i)
    op_j = _first_pair_op(system, j)
    s_i, s_j = _draw_joint(system, op_i, op_j, rng)
    new_i = _fused_charge(q_i, s_i)
    new_j = _fused_charge(q_j, s_j)
    delta = params.site_energy(new_i) + params.site_energy(new_j) - e_before
    if _accept(delta, params.beta, rng):
        system.decohere_site(i, forced=s_i)
        system.decohere_site(j, forced=s_j)
        return StepRecord("create", Charge.SIGMA, edge, True)
    system.uncreate_pair(edge, slots)
    return StepRecord("create", Charge.SIGMA, edge, False)


def _charge_after_psi(q: Charge) -> Charge:
    if q is Charge.SIGMA:
        return Charge.SIGMA
    return Charge.VACUUM if q is Charge.FERMION else Charge.FERMION


def _fused_charge(q_old: Charge, outcome: Optional[int]) -> Charge:
    """Site charge after the delivered σ merges with the prior content."""
    if q_old is Charge.SIGMA:
        return Charge.VACUUM if outcome == 1 else Charge.FERMION
    return Charge.SIGMA  # σ absorbed the prior 𝕀 or ψ


def _first_pair_op(
    system: AnyonSystem, site: int
) -> Optional[MajoranaProduct]:
    blk = system.blocks[site]
    if len(blk) < 2:
        return None
    return MajoranaProduct.pair(blk[0], blk[1])
