"""Monte Carlo orchestration: trials, failure-rate tables, thresholds.

A trial is prepare, then a Poisson number of noise events, then decode,
then verify; everything downstream is bookkeeping.  Failure-rate curves
per lattice size cross near the critical simulation time, and the
crossing of the two largest sizes is the threshold estimate, with a
bootstrap confidence interval.  For a code protecting more than one
basis state the code threshold is the minimum of the per-state
quasi-thresholds.  Lifetime scans repeat the threshold estimate per
bath temperature and fit the Arrhenius law through the results.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .codes import CodeState, prepare, verify
from .decoders import (
    DecoderReport,
    decode_cluster_aware,
    decode_cluster_simple,
    decode_pma,
)
from .lattice import build_lattice
from .noise import (
    MetropolisParams,
    NoiseRates,
    fixed_rate_step,
    metropolis_step,
    sample_event_count,
)

__all__ = [
    "CSV_COLUMNS",
    "ExperimentConfig",
    "PointResult",
    "ThresholdEstimate",
    "TrialRecord",
    "code_threshold",
    "curves_from_rows",
    "estimate_threshold",
    "iid_equivalent",
    "lifetime_scan",
    "run_experiment",
    "run_trial",
    "write_csv",
]

CSV_COLUMNS = (
    "code",
    "decoder",
    "noise_model",
    "L",
    "t_sim",
    "trials",
    "failures",
    "failure_rate",
    "std_err",
    "seed",
)

_DECODERS: dict[str, Callable] = {
    "pma": decode_pma,
    "cluster-simple": decode_cluster_simple,
    "cluster-aware": decode_cluster_aware,
}

_STATE_TOKENS = {
    "zero": "zero",
    "plus": "plus",
    "++": (1, 1),
    "+-": (1, -1),
    "-+": (-1, 1),
    "--": (-1, -1),
}


def parse_code(token: str) -> CodeState:
    """'ifc:zero', 'ifc:plus' or 'itc:++' .. 'itc:--' to a CodeState."""
    kind, _, label = token.partition(":")
    if label not in _STATE_TOKENS:
        raise ValueError(f"unknown code state token {token!r}")
    return CodeState(kind, _STATE_TOKENS[label])


@dataclass(frozen=True)
class ExperimentConfig:
    """One failure-rate surface: a code, a decoder, a noise channel and
    the (L, t) grid to sample it on."""

    code: str
    sizes: tuple[int, ...]
    decoder: str
    noise: Union[NoiseRates, MetropolisParams]
    t_grid: tuple[float, ...]
    trials: int
    base_seed: int
    out: Optional[str] = None
    decoder_params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        parse_code(self.code)
        if self.decoder not in _DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sizes or any(L < 4 for L in self.sizes):
            raise ValueError("sizes must be lattice sizes >= 4")
        if list(self.t_grid) != sorted(set(self.t_grid)):
            raise ValueError("t_grid must be strictly increasing")
        if any(t < 0 for t in self.t_grid):
            raise ValueError("t_grid entries must be >= 0")
        object.__setattr__(self, "sizes", tuple(self.sizes))
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        object.__setattr__(self, "decoder_params", dict(self.decoder_params))

    @property
    def noise_label(self) -> str:
        if isinstance(self.noise, MetropolisParams):
            p = self.noise
            return f"metropolis[beta={p.beta:g} m={p.m_psi:g}/{p.m_sigma:g}]"
        r = self.noise
        return (
            f"fixed[gcp={r.gamma_c_psi:g} gcs={r.gamma_c_sigma:g} "
            f"gh={r.gamma_h:g} ge={r.gamma_e:g} pd={r.p_d:g}]"
        )

    def points(self) -> list[tuple[int, int, float]]:
        """(point index, L, t) in deterministic order: sizes outer."""
        return [
            (i * len(self.t_grid) + j, L, t)
            for i, L in enumerate(self.sizes)
            for j, t in enumerate(self.t_grid)
        ]


@dataclass(frozen=True)
class TrialRecord:
    point_id: int
    seed: tuple[int, int, int]
    event_count: int
    report: DecoderReport
    verdict: str  # "success" | "failure"


@dataclass(frozen=True)
class PointResult:
    L: int
    t_sim: float
    trials: int
    failures: int

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials

    @property
    def std_err(self) -> float:
        p = self.failure_rate
        return math.sqrt(p * (1.0 - p) / self.trials)


@dataclass(frozen=True)
class ThresholdEstimate:
    t_star: float
    ci: tuple[float, float]
    method: Mapping[str, object]

    def __post_init__(self) -> None:
        lo, hi = self.ci
        if not lo <= self.t_star <= hi:
            raise ValueError("confidence interval must contain the estimate")


def run_trial(config: ExperimentConfig, point_id: int, trial: int) -> TrialRecord:
    """One prepare/noise/decode/verify cycle, deterministic in its seed."""
    _, L, t = config.points()[point_id]
    return _trial_inner(config, point_id, L, t, trial)


def _trial_inner(
    config: ExperimentConfig, point_id: int, L: int, t: float, trial: int
) -> TrialRecord:
    state = parse_code(config.code)
    seed_key = (config.base_seed, point_id, trial)
    rng = np.random.default_rng(np.random.SeedSequence(seed_key))
    lattice = build_lattice(state.topology, L)
    system = prepare(lattice, state, rng=rng)
    system.rng = rng
    events = sample_event_count(t, lattice.n_edges, rng)
    if isinstance(config.noise, MetropolisParams):
        for _ in range(events):
            metropolis_step(system, config.noise, rng)
    else:
        for _ in range(events):
            fixed_rate_step(system, config.noise, rng)
    decoder = _DECODERS[config.decoder]
    report = decoder(system, state, **config.decoder_params)
    verdict = "success" if verify(system, state) else "failure"
    return TrialRecord(point_id, seed_key, events, report, verdict)


def _run_point(args) -> PointResult:
    config, point_id, L, t = args
    failures = 0
    for trial in range(config.trials):
        record = _trial_inner(config, point_id, L, t, trial)
        failures += record.verdict == "failure"
    return PointResult(L=L, t_sim=t, trials=config.trials, failures=failures)


def run_experiment(
    config: ExperimentConfig,
    workers: int = 1,
    progress: Optional[Callable[[PointResult], None]] = None,
) -> list[PointResult]:
    """Failure counts for every (L, t) point, in point order.

    Trials are independent and deterministically seeded, so the result
    is identical for any worker count.
    """
    jobs = [(config, pid, L, t) for pid, L, t in config.points()]
    if workers <= 1:
        results = []
        for job in jobs:
            results.append(_run_point(job))
            if progress is not None:
                progress(results[-1])
        return results
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_run_point, jobs))
    if progress is not None:
        for r in results:
            progress(r)
    return results


def rows_for_csv(config: ExperimentConfig, results: Iterable[PointResult]):
    for r in results:
        yield {
            "code": config.code,
            "decoder": config.decoder,
            "noise_model": config.noise_label,
            "L": r.L,
            "t_sim": repr(r.t_sim),
            "trials": r.trials,
            "failures": r.failures,
            "failure_rate": repr(r.failure_rate),
            "std_err": repr(r.std_err),
            "seed": config.base_seed,
        }


def write_csv(config: ExperimentConfig, results: Iterable[PointResult]) -> str:
    """Render the exact results-table contract; returns the text."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows_for_csv(config, results):
        writer.writerow(row)
    return buf.getvalue()


def curves_from_rows(
    rows: Iterable[Mapping[str, object]],
) -> dict[int, list[tuple[float, int, int]]]:
    """Group result rows into per-size curves of (t, failures, trials)."""
    curves: dict[int, list[tuple[float, int, int]]] = {}
    for row in rows:
        curves.setdefault(int(row["L"]), []).append(
            (float(row["t_sim"]), int(row["failures"]), int(row["trials"]))
        )
    for pts in curves.values():
        pts.sort()
    return curves


def _crossing(
    small: Sequence[tuple[float, float]], big: Sequence[tuple[float, float]]
) -> Optional[float]:
    """Where the larger size's failure curve overtakes the smaller's."""
    ts = sorted({t for t, _ in small} & {t for t, _ in big})
    if len(ts) < 2:
        return None
    f_small = PchipInterpolator(*zip(*small))
    f_big = PchipInterpolator(*zip(*big))

    def diff(t: float) -> float:
        return float(f_big(t) - f_small(t))

    grid = np.linspace(ts[0], ts[-1], 257)
    vals = [diff(t) for t in grid]
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa < 0.0 <= fb:
            if fb == 0.0:
                return float(b)
            return float(brentq(diff, a, b))
    return None


def estimate_threshold(
    curves: Mapping[int, Sequence[tuple[float, int, int]]],
    bootstrap: int = 500,
    rng: Optional[np.random.Generator] = None,
) -> ThresholdEstimate:
    """Crossing of the two largest sizes' failure-rate curves.

    The interpolation is shape-preserving monotone-cubic; the interval
    is a percentile bootstrap that resamples every point's failure
    count at its empirical rate.
    """
    if len(curves) < 2:
        raise ValueError("need curves for at least two lattice sizes")
    if any(len(pts) < 4 for pts in curves.values()):
        raise ValueError("need at least four grid points per size")
    L_small, L_big = sorted(curves)[-2:]
    small = [(t, f / n) for t, f, n in curves[L_small]]
    big = [(t, f / n) for t, f, n in curves[L_big]]
    t_star = _crossing(small, big)
    if t_star is None:
        raise ValueError(
            f"no crossing of the L={L_small} and L={L_big} curves in range"
        )
    if rng is None:
        rng = np.random.default_rng(0)
    draws = []
    for _ in range(bootstrap):
        r_small = [
            (t, rng.binomial(n, f / n) / n) for t, f, n in curves[L_small]
        ]
        r_big = [(t, rng.binomial(n, f / n) / n) for t, f, n in curves[L_big]]
        c = _crossing(r_small, r_big)
        if c is not None:
            draws.append(c)
    if draws:
        lo, hi = np.percentile(draws, [2.5, 97.5])
        lo, hi = min(float(lo), t_star), max(float(hi), t_star)
    else:
        lo = hi = t_star
    return ThresholdEstimate(
        t_star=t_star,
        ci=(lo, hi),
        method={
            "sizes": (L_small, L_big),
            "bootstrap": bootstrap,
            "resolved": len(draws),
            "grid": (small[0][0], small[-1][0]),
        },
    )


def code_threshold(
    quasi: Mapping[str, ThresholdEstimate],
) -> tuple[str, ThresholdEstimate]:
    """The code's threshold is the worst of its per-state estimates."""
    if not quasi:
        raise ValueError("no quasi-thresholds given")
    name = min(quasi, key=lambda k: quasi[k].t_star)
    return name, quasi[name]


def iid_equivalent(t_sim: float) -> float:
    """Independent-flip error probability matching a simulation time."""
    if t_sim < 0:
        raise ValueError("t_sim must be >= 0")
    return (1.0 - math.exp(-2.0 * t_sim)) / 2.0


def lifetime_scan(
    temperatures: Sequence[float],
    make_config: Callable[[float], ExperimentConfig],
    workers: int = 1,
    bootstrap: int = 500,
    progress: Optional[Callable[[float, ThresholdEstimate], None]] = None,
) -> dict:
    """Threshold per bath temperature plus the Arrhenius fit.

    ``temperatures`` are k_B T in units of the particle mass;
    ``make_config`` maps one temperature to the experiment sampling it
    (a Metropolis-noise config over a suitable time grid).  The fit is
    least squares on log t* against m*beta, reported as (a, b) in
    t* = a * exp(b * m * beta) with its log-scale R^2.
    """
    if len(temperatures) < 4:
        raise ValueError("need at least four temperatures")
    table = []
    for T in temperatures:
        config = make_config(T)
        if not isinstance(config.noise, MetropolisParams):
            raise ValueError("lifetime scans need Metropolis noise")
        results = run_experiment(config, workers=workers)
        curves = curves_from_rows(rows_for_csv(config, results))
        estimate = estimate_threshold(curves, bootstrap=bootstrap)
        if progress is not None:
            progress(T, estimate)
        m = config.noise.m_sigma
        table.append(
            {
                "temperature": float(T),
                "m_beta": m * config.noise.beta,
                "t_star": estimate.t_star,
                "ci": estimate.ci,
                "points": [
                    (r.L, r.t_sim, r.trials, r.failures) for r in results
                ],
            }
        )
    x = np.array([row["m_beta"] for row in table])
    y = np.log([row["t_star"] for row in table])
    b, log_a = np.polyfit(x, y, 1)
    fitted = b * x + log_a
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return {
        "table": table,
        "fit": {"a": float(np.exp(log_a)), "b": float(b), "r_squared": r_squared},
    }


def summary_json(payload: Mapping[str, object]) -> str:
    """Canonical serialization for the summary sidecar file."""

    def default(obj):
        if isinstance(obj, ThresholdEstimate):
            return {"t_star": obj.t_star, "ci": obj.ci, "method": dict(obj.method)}
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        raise TypeError(f"cannot serialize {type(obj).__name__}")

    return json.dumps(payload, indent=2, sort_keys=True, default=default) + "\n"
