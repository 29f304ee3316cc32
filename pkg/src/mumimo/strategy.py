"""Stream allocation for the modified CZF/CMF modes and K-indexed mode selection.

Selection needs no channel state: the partition of ``K in {1..M}`` into a
CZF set and a CMF set depends only on ``(M, N, P, noise)`` and is cached.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .asymptotics import modified_cmf_rate, modified_czf_rate, optimal_czf_streams
from .channel import StreamAllocation, SystemConfig
from .errors import InvalidArguments, StaleIntervals


class SelectedMode(str, enum.Enum):
    MODIFIED_CZF = "ModifiedCZF"
    MODIFIED_CMF = "ModifiedCMF"


def _check_users(M: int, N: int, K: int) -> None:
    if N < 1 or K < 1:
        raise InvalidArguments(f"N and K must be positive, got N={N}, K={K}")
    if K > M:
        raise InvalidArguments(f"K={K} exceeds M={M}")


def _spread(total: int, K: int, stream: np.random.Generator) -> tuple[int, ...]:
    """``total`` streams over ``K`` users: the floor each, plus one for a random subset."""
    base, extra = divmod(total, K)
    counts = np.full(K, base, dtype=int)
    if extra:
        counts[stream.permutation(K)[:extra]] += 1
    return tuple(int(c) for c in counts)


def allocate_czf_streams(M: int, N: int, K: int, L_star: int, stream: np.random.Generator) -> StreamAllocation:
    _check_users(M, N, K)
    if not 1 <= L_star <= M:
        raise InvalidArguments(f"L_star={L_star} outside [1, {M}]")
    if L_star >= N * K:
        counts = (N,) * K
    elif K <= L_star:
        counts = _spread(L_star, K, stream)
    else:
        counts = (1,) * K
    return StreamAllocation.from_counts(counts)


def allocate_cmf_streams(M: int, N: int, K: int, stream: np.random.Generator) -> StreamAllocation:
    _check_users(M, N, K)
    if N * K <= M:
        return StreamAllocation.full(N, K)
    return StreamAllocation.from_counts(_spread(M, K, stream))


Fingerprint = tuple[int, int, float, float]


@dataclass(frozen=True)
class ModeIntervals:
    czf_set: frozenset[int]
    cmf_set: frozenset[int]
    config_fingerprint: Fingerprint
    L_star: int
    czf_rates: tuple[float, ...]
    cmf_rates: tuple[float, ...]

    @property
    def M(self) -> int:
        return self.config_fingerprint[0]

    def mode_for(self, K: int) -> SelectedMode:
        if K in self.czf_set:
            return SelectedMode.MODIFIED_CZF
        if K in self.cmf_set:
            return SelectedMode.MODIFIED_CMF
        raise InvalidArguments(f"K={K} outside 1..{self.M}")

    def predicted_rate(self, K: int) -> float:
        rates = self.czf_rates if self.mode_for(K) is SelectedMode.MODIFIED_CZF else self.cmf_rates
        return rates[K - 1]


def fingerprint(M: int, N: int, P: float, noise_power: float) -> Fingerprint:
    return (int(M), int(N), float(P), float(noise_power))


@lru_cache(maxsize=256)
def _intervals(fp: Fingerprint) -> ModeIntervals:
    M, N, P, noise = fp
    czf = tuple(modified_czf_rate(M, N, K, P, noise).value for K in range(1, M + 1))
    cmf = tuple(modified_cmf_rate(M, N, K, P, noise).value for K in range(1, M + 1))
    czf_set = frozenset(K for K in range(1, M + 1) if czf[K - 1] >= cmf[K - 1])
    cmf_set = frozenset(range(1, M + 1)) - czf_set
    L_star = optimal_czf_streams(M, P, noise).L_star
    return ModeIntervals(czf_set, cmf_set, fp, L_star, czf, cmf)


def compute_mode_intervals(M: int, N: int, P: float, noise_power: float) -> ModeIntervals:
    """Partition ``{1..M}`` into users counts served by modified CZF or modified CMF.

    ``K`` goes to CZF when its asymptotic rate is at least the CMF one.
    Results are memoized on ``(M, N, P, noise_power)``.
    """
    if M < 2 or N < 1 or not (P > 0 and noise_power > 0):
        raise InvalidArguments("need M >= 2, N >= 1 and positive P, noise_power")
    return _intervals(fingerprint(M, N, P, noise_power))


@dataclass(frozen=True)
class ModeDecision:
    mode: SelectedMode
    allocation: StreamAllocation
    predicted_rate: float


def select_mode(K: int, intervals: ModeIntervals, stream: np.random.Generator,
                config: SystemConfig | None = None) -> ModeDecision:
    """Pick the modified mode for ``K`` users and build its stream allocation.

    If ``config`` is given it must match the configuration the intervals
    were computed for, otherwise :class:`StaleIntervals` is raised.
    """
    M, N, _, _ = intervals.config_fingerprint
    if config is not None:
        current = fingerprint(config.M, config.N, config.P, config.noise_power)
        if current != intervals.config_fingerprint:
            raise StaleIntervals(f"intervals computed for {intervals.config_fingerprint}, config is {current}")
    mode = intervals.mode_for(K)
    if mode is SelectedMode.MODIFIED_CZF:
        allocation = allocate_czf_streams(M, N, K, intervals.L_star, stream)
    else:
        allocation = allocate_cmf_streams(M, N, K, stream)
    return ModeDecision(mode, allocation, intervals.predicted_rate(K))
