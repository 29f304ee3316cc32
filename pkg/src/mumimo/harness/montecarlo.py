"""Monte Carlo sum-rate experiments.

Randomness is pre-assigned: every ``(K, snr index)`` cell owns a 64-bit seed
derived from the master seed, and trial ``t`` of that cell regenerates its
channel from ``(cell_seed, t)``. All modes in a cell see the same channels,
so mode comparisons are paired, and results do not depend on execution
order or on the number of workers.
"""
from __future__ import annotations

import enum
import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..asymptotics import (
    bdzf_asymptotic_rate,
    cmf_asymptotic_rate,
    czf_rate_at_load,
    modified_cmf_rate,
    modified_czf_rate,
)
from ..channel import (
    ChannelRealization,
    StreamAllocation,
    SystemConfig,
    generate_channels,
    select_antennas,
    stack_equivalent_channel,
    stream_for,
    user_blocks,
)
from ..errors import InvalidArguments
from ..oracle import DEFAULT_MAX_EVALS, _check_cap, brute_force_best
from ..precoding import BdzfConfig, bdzf_precoder, cmf_precoder, czf_precoder, stream_sinrs, sum_rate
from ..strategy import (
    SelectedMode,
    allocate_cmf_streams,
    allocate_czf_streams,
    compute_mode_intervals,
    select_mode,
)

THREADS_ENV = "MUMIMO_THREADS"


class SimMode(str, enum.Enum):
    BDZF = "BDZF"
    CZF = "CZF"
    CMF = "CMF"
    MODIFIED_CZF = "ModifiedCZF"
    MODIFIED_CMF = "ModifiedCMF"
    PROPOSED = "ProposedTS"
    ORACLE = "Oracle"

    @property
    def is_common(self) -> bool:
        return self in (SimMode.BDZF, SimMode.CZF, SimMode.CMF)


#: CLI spelling of each mode.
MODE_TOKENS = {
    "bdzf": SimMode.BDZF,
    "czf": SimMode.CZF,
    "cmf": SimMode.CMF,
    "mczf": SimMode.MODIFIED_CZF,
    "mcmf": SimMode.MODIFIED_CMF,
    "proposed": SimMode.PROPOSED,
    "oracle": SimMode.ORACLE,
}


def parse_modes(text: str) -> tuple[SimMode, ...]:
    tokens = [t.strip().lower() for t in text.split(",") if t.strip()]
    unknown = [t for t in tokens if t not in MODE_TOKENS]
    if unknown or not tokens:
        raise InvalidArguments(f"unknown mode(s) {unknown or text!r}; choose from {','.join(MODE_TOKENS)}")
    return tuple(dict.fromkeys(MODE_TOKENS[t] for t in tokens))


@dataclass(frozen=True)
class ExperimentSpec:
    M: int
    N: int
    k_values: tuple[int, ...]
    snr_values_db: tuple[float, ...]
    modes: tuple[SimMode, ...]
    trials: int = 2000
    master_seed: int = 0
    noise_power: float = 1.0
    bdzf_t: Optional[int] = None
    max_evals: Optional[int] = DEFAULT_MAX_EVALS

    def __post_init__(self):
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        object.__setattr__(self, "snr_values_db", tuple(float(s) for s in self.snr_values_db))
        object.__setattr__(self, "modes", tuple(SimMode(m) for m in self.modes))
        if self.trials < 1:
            raise InvalidArguments("trials must be at least 1")
        if not self.k_values or not self.snr_values_db or not self.modes:
            raise InvalidArguments("k_values, snr_values_db and modes must be non-empty")
        if self.M < 2 or self.N < 1:
            raise InvalidArguments(f"need M >= 2 and N >= 1, got M={self.M}, N={self.N}")
        bad = [k for k in self.k_values if not 1 <= k <= self.M]
        if bad:
            raise InvalidArguments(f"K values {bad} outside 1..M={self.M}")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidArguments("master_seed must fit in 64 unsigned bits")

    def config(self, K: int, snr_db: float) -> SystemConfig:
        return SystemConfig.from_snr_db(self.M, self.N, K, snr_db, self.noise_power)


@dataclass(frozen=True)
class RateRow:
    mode: str
    K: int
    snr_db: float
    mean_rate: float
    std_rate: float
    trials: int
    seed: int


@dataclass(frozen=True)
class AsymptoticRow:
    mode: str
    K: int
    snr_db: float
    predicted_rate: float


@dataclass(frozen=True)
class InfeasibleCell:
    mode: str
    K: int
    snr_db: float
    reason: str


@dataclass
class RateReport:
    rows: list[RateRow] = field(default_factory=list)
    asymptotic_rows: list[AsymptoticRow] = field(default_factory=list)
    infeasible: list[InfeasibleCell] = field(default_factory=list)

    def row(self, mode, K: int, snr_db: float) -> RateRow:
        mode = SimMode(mode).value
        for r in self.rows:
            if r.mode == mode and r.K == K and r.snr_db == snr_db:
                return r
        raise KeyError((mode, K, snr_db))

    def asymptotic(self, mode, K: int, snr_db: float) -> AsymptoticRow:
        mode = SimMode(mode).value
        for r in self.asymptotic_rows:
            if r.mode == mode and r.K == K and r.snr_db == snr_db:
                return r
        raise KeyError((mode, K, snr_db))

    def extend(self, other: "RateReport") -> "RateReport":
        self.rows.extend(other.rows)
        self.asymptotic_rows.extend(other.asymptotic_rows)
        self.infeasible.extend(other.infeasible)
        return self


def cell_seed(master_seed: int, K: int, snr_index: int) -> int:
    """Stable 64-bit seed for one ``(K, snr index)`` cell."""
    digest = hashlib.blake2b(f"{master_seed}:{K}:{snr_index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def welford(values: Sequence[float]) -> tuple[float, float]:
    """Single-pass mean and population standard deviation."""
    mean, m2 = 0.0, 0.0
    for n, x in enumerate(values, start=1):
        delta = x - mean
        mean += delta / n
        m2 += delta * (x - mean)
    count = len(values)
    return mean, math.sqrt(m2 / count) if count else 0.0


def _bdzf_config(spec: ExperimentSpec, alloc: StreamAllocation) -> Optional[BdzfConfig]:
    if spec.bdzf_t is None:
        return None
    return BdzfConfig((spec.bdzf_t,) * alloc.K)


def infeasibility(spec: ExperimentSpec, mode: SimMode, K: int) -> Optional[str]:
    """Why ``mode`` cannot run with ``K`` users, or ``None`` if it can."""
    if mode.is_common and spec.N * K > spec.M:
        return f"{mode.value} serves N*K={spec.N * K} streams > M={spec.M}"
    if mode is SimMode.BDZF and spec.bdzf_t is not None:
        L = spec.N * K
        if not spec.N <= spec.bdzf_t <= spec.M + spec.N - L:
            return f"T={spec.bdzf_t} outside [{spec.N}, {spec.M + spec.N - L}]"
    return None


def _precode_rate(kind: str, selected: list[np.ndarray], alloc: StreamAllocation, P: float, noise: float,
                  bdzf: Optional[BdzfConfig] = None) -> float:
    blocks = user_blocks(alloc.per_user_streams)
    if kind == "bdzf":
        pre = bdzf_precoder(selected, bdzf, P)
    else:
        h = stack_equivalent_channel(selected)
        pre = czf_precoder(h, P, blocks) if kind == "czf" else cmf_precoder(h, P, blocks)
    return sum_rate(stream_sinrs(selected, pre, noise))


def trial_rate(mode: SimMode, spec: ExperimentSpec, config: SystemConfig,
               realization: ChannelRealization, seed: int) -> float:
    """Instantaneous sum rate of one mode on one realization."""
    P, noise = config.P, config.noise_power
    M, N, K = config.M, config.N, config.K
    if mode.is_common:
        alloc = StreamAllocation.full(N, K)
        selected = select_antennas(realization, alloc)
        return _precode_rate(mode.name.lower(), selected, alloc, P, noise, _bdzf_config(spec, alloc))
    if mode is SimMode.ORACLE:
        return brute_force_best(realization, P, noise, spec.max_evals).best_rate
    rng = stream_for(seed, realization.trial_index, 1)
    intervals = compute_mode_intervals(M, N, P, noise)
    if mode is SimMode.MODIFIED_CZF:
        alloc, kind = allocate_czf_streams(M, N, K, intervals.L_star, rng), "czf"
    elif mode is SimMode.MODIFIED_CMF:
        alloc, kind = allocate_cmf_streams(M, N, K, rng), "cmf"
    else:
        decision = select_mode(K, intervals, rng, config)
        alloc = decision.allocation
        kind = "czf" if decision.mode is SelectedMode.MODIFIED_CZF else "cmf"
    return _precode_rate(kind, select_antennas(realization, alloc), alloc, P, noise)


def predicted_rate(mode: SimMode, spec: ExperimentSpec, config: SystemConfig) -> Optional[float]:
    """Deterministic-equivalent prediction matching a Monte Carlo cell, if one exists."""
    M, N, K, P, noise = config.M, config.N, config.K, config.P, config.noise_power
    L = N * K
    if mode is SimMode.BDZF:
        T = (spec.bdzf_t,) * K if spec.bdzf_t is not None else BdzfConfig.default([N] * K, M).T
        return bdzf_asymptotic_rate([N] * K, T, P, noise).value
    if mode is SimMode.CZF:
        return czf_rate_at_load(M, L, P, noise)
    if mode is SimMode.CMF:
        return cmf_asymptotic_rate(M, L, P, noise).value
    if mode is SimMode.MODIFIED_CZF:
        return modified_czf_rate(M, N, K, P, noise).value
    if mode is SimMode.MODIFIED_CMF:
        return modified_cmf_rate(M, N, K, P, noise).value
    if mode is SimMode.PROPOSED:
        return compute_mode_intervals(M, N, P, noise).predicted_rate(K)
    return None


def default_workers() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return 1


def _run_chunk(spec: ExperimentSpec, K: int, snr_db: float, seed: int,
               modes: tuple[SimMode, ...], trials: range) -> dict[SimMode, list[float]]:
    config = spec.config(K, snr_db)
    out: dict[SimMode, list[float]] = {m: [] for m in modes}
    for t in trials:
        realization = generate_channels(config, seed, t)
        for m in modes:
            out[m].append(trial_rate(m, spec, config, realization, seed))
    return out


def run_monte_carlo(spec: ExperimentSpec, workers: Optional[int] = None, chunk_size: int = 250) -> RateReport:
    """Ergodic sum rate of every requested ``(mode, K, SNR)`` cell.

    Common modes with ``N*K > M`` (or an out-of-range BDZF ``T``) are listed
    in ``report.infeasible`` instead of failing the run. An oracle request
    beyond the enumeration cap raises :class:`~mumimo.errors.TooLarge`
    before any work starts.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    if SimMode.ORACLE in spec.modes:
        for K in spec.k_values:
            _check_cap(spec.N, K, spec.max_evals)

    report = RateReport()
    jobs = []
    cells = []
    for K in spec.k_values:
        for si, snr_db in enumerate(spec.snr_values_db):
            seed = cell_seed(spec.master_seed, K, si)
            runnable = []
            for m in spec.modes:
                reason = infeasibility(spec, m, K)
                if reason is None:
                    runnable.append(m)
                else:
                    report.infeasible.append(InfeasibleCell(m.value, K, snr_db, reason))
            runnable = tuple(runnable)
            cells.append((K, si, snr_db, seed, runnable))
            if runnable:
                for start in range(0, spec.trials, chunk_size):
                    jobs.append(((K, si), (K, snr_db, seed, runnable, range(start, min(start + chunk_size, spec.trials)))))

    if workers == 1 or len(jobs) <= 1:
        results = [_run_chunk(spec, *args) for _, args in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _run_chunk(spec, *job[1]), jobs))

    # chunks are appended in trial order, whatever order they finished in
    gathered: dict[tuple[int, int], dict[SimMode, list[float]]] = {}
    for (key, args), res in zip(jobs, results):
        bucket = gathered.setdefault(key, {m: [] for m in args[3]})
        for m, values in res.items():
            bucket[m].extend(values)

    for K, si, snr_db, seed, runnable in cells:
        config = spec.config(K, snr_db)
        for m in runnable:
            values = gathered[(K, si)][m]
            mean, std = welford(values)
            report.rows.append(RateRow(m.value, K, snr_db, mean, std, len(values), spec.master_seed))
            pred = predicted_rate(m, spec, config)
            if pred is not None:
                report.asymptotic_rows.append(AsymptoticRow(m.value, K, snr_db, pred))
    return report
