"""System configuration, i.i.d. Rayleigh channels and antenna/stream bookkeeping."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import IndexOutOfRange, InvalidArguments, ShapeMismatch
from .numkit import sample_complex_gaussian


@dataclass(frozen=True)
class SystemConfig:
    """Deployment parameters.

    Attributes
    ----------
    M : int
        Base-station antennas.
    N : int
        Antennas per user.
    K : int
        Simultaneously served users, ``K <= M``.
    P : float
        Total transmit power (linear).
    noise_power : float
        Receiver noise variance (linear).
    """

    M: int
    N: int
    K: int
    P: float
    noise_power: float = 1.0

    def __post_init__(self):
        if self.M < 1 or self.N < 1 or self.K < 1:
            raise InvalidArguments(f"M, N, K must be positive (got {self.M}, {self.N}, {self.K})")
        if self.K > self.M:
            raise InvalidArguments(f"K={self.K} exceeds M={self.M}; user scheduling is not modelled")
        if not (self.P > 0 and self.noise_power > 0):
            raise InvalidArguments("P and noise_power must be positive")

    @classmethod
    def from_snr_db(cls, M: int, N: int, K: int, snr_db: float, noise_power: float = 1.0):
        return cls(M, N, K, noise_power * 10.0 ** (snr_db / 10.0), noise_power)

    @property
    def snr(self) -> float:
        return self.P / self.noise_power

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr)


@dataclass(frozen=True)
class ChannelRealization:
    """Per-user channels stacked as an array of shape ``(K, N, M)``."""

    per_user: np.ndarray
    seed: int
    trial_index: int

    @property
    def K(self) -> int:
        return self.per_user.shape[0]

    @property
    def N(self) -> int:
        return self.per_user.shape[1]

    @property
    def M(self) -> int:
        return self.per_user.shape[2]


@dataclass(frozen=True)
class StreamAllocation:
    """Per-user stream counts ``N_k`` and the antenna rows that carry them."""

    per_user_streams: tuple[int, ...]
    per_user_antenna_rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        streams = tuple(int(n) for n in self.per_user_streams)
        rows = tuple(tuple(int(i) for i in r) for r in self.per_user_antenna_rows)
        object.__setattr__(self, "per_user_streams", streams)
        object.__setattr__(self, "per_user_antenna_rows", rows)
        if not streams:
            raise InvalidArguments("allocation needs at least one user")
        if len(rows) != len(streams):
            raise InvalidArguments("one antenna subset per user is required")
        for n_k, r in zip(streams, rows):
            if n_k < 1:
                raise InvalidArguments(f"every user needs at least one stream, got {n_k}")
            if len(r) != n_k:
                raise InvalidArguments(f"subset {r} does not carry {n_k} streams")
            if any(i < 0 for i in r) or any(b <= a for a, b in zip(r, r[1:])):
                raise InvalidArguments(f"antenna subset {r} must be strictly increasing and non-negative")

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "StreamAllocation":
        """Allocation using the first ``N_k`` antennas of every user."""
        return cls(tuple(counts), tuple(tuple(range(int(n))) for n in counts))

    @classmethod
    def full(cls, N: int, K: int) -> "StreamAllocation":
        return cls.from_counts([N] * K)

    @property
    def K(self) -> int:
        return len(self.per_user_streams)

    @property
    def L(self) -> int:
        return sum(self.per_user_streams)


def stream_for(seed: int, trial: int, *extra: int) -> np.random.Generator:
    """Independent generator keyed on ``(seed, trial, *extra)``.

    Keys are fed to :class:`numpy.random.SeedSequence` directly rather than
    drawn sequentially, so any trial can be regenerated in isolation.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial), *map(int, extra)]))


def generate_channels(config: SystemConfig, seed: int, trial: int) -> ChannelRealization:
    rng = stream_for(seed, trial)
    h = sample_complex_gaussian(config.K * config.N, config.M, 1.0, rng)
    return ChannelRealization(h.reshape(config.K, config.N, config.M), int(seed), int(trial))


def select_antennas(realization: ChannelRealization,
                    allocation: StreamAllocation) -> list[np.ndarray]:
    if allocation.K != realization.K:
        raise ShapeMismatch(f"allocation has {allocation.K} users, realization has {realization.K}")
    n = realization.N
    out = []
    for h_k, rows in zip(realization.per_user, allocation.per_user_antenna_rows):
        if rows[-1] >= n:
            raise IndexOutOfRange(f"antenna index {rows[-1]} out of range for N={n}")
        out.append(h_k[list(rows), :])
    return out


def stack_equivalent_channel(selected: Sequence[np.ndarray]) -> np.ndarray:
    """Vertical stack; row ``sum(N_j for j < k) + i`` carries stream ``(k, i)``."""
    if len(selected) == 0:
        raise ShapeMismatch("nothing to stack")
    cols = {h.shape[1] for h in selected}
    if len(cols) != 1:
        raise ShapeMismatch(f"per-user channels disagree on column count: {sorted(cols)}")
    return np.vstack(selected)


def user_blocks(counts: Sequence[int]) -> tuple[tuple[int, int], ...]:
    """Column ranges ``[start, stop)`` of each user inside the stacked stream index."""
    edges = np.concatenate([[0], np.cumsum(counts)]).astype(int)
    return tuple((int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]))
