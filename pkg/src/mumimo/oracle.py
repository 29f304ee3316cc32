"""Exhaustive benchmark over per-user antenna subsets and precoding modes.

Only CZF and CMF are searched; BDZF at its best matches CZF, so adding it
would not change the maximum. Desk-scale only: the search space grows as
``(2^N - 1)^K``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, StreamAllocation
from .errors import TooLarge
from .numkit import RANK_TOL
from .precoding import Mode

#: Default refusal threshold on (allocation, mode) evaluations.
DEFAULT_MAX_EVALS = 10**6
#: Hard ceiling on ``K log2(2^N - 1)`` regardless of overrides.
LOG2_ENUMERATION_CAP = 30.0

SEARCHED_MODES = (Mode.CZF, Mode.CMF)


@dataclass(frozen=True)
class OracleResult:
    best_mode: Mode
    best_allocation: StreamAllocation
    best_rate: float
    evaluated_count: int
    allocation_count: int
    modes_searched: tuple[Mode, ...] = field(default=SEARCHED_MODES)


def allocation_count(N: int, K: int) -> int:
    return (2**N - 1) ** K


def _antenna_subsets(N: int) -> list[tuple[int, ...]]:
    # size first, then lexicographic within a size
    return [c for size in range(1, N + 1) for c in itertools.combinations(range(N), size)]


def _check_cap(N: int, K: int, max_evals: int | None) -> None:
    if K * math.log2(2**N - 1) > LOG2_ENUMERATION_CAP:
        raise TooLarge(f"(2^{N}-1)^{K} allocations exceed the hard enumeration cap 2^{LOG2_ENUMERATION_CAP:g}")
    if max_evals is not None:
        evals = allocation_count(N, K) * len(SEARCHED_MODES)
        if evals > max_evals:
            raise TooLarge(f"{evals} evaluations exceed max_evals={max_evals}")


def enumerate_allocations(N: int, K: int) -> list[StreamAllocation]:
    """Every K-tuple of non-empty antenna subsets, user 0 varying slowest."""
    _check_cap(N, K, None)
    subsets = _antenna_subsets(N)
    return [StreamAllocation(tuple(len(s) for s in combo), combo)
            for combo in itertools.product(subsets, repeat=K)]


def _row_indices(N: int, K: int) -> list[np.ndarray]:
    subsets = _antenna_subsets(N)
    return [np.fromiter((k * N + i for k, s in enumerate(combo) for i in s), dtype=int)
            for combo in itertools.product(subsets, repeat=K)]


def _czf_rates(hs: np.ndarray, M: int, P: float, noise: float) -> np.ndarray:
    L = hs.shape[1]
    if L > M:
        return np.full(hs.shape[0], -np.inf)
    s = np.linalg.svd(hs, compute_uv=False)
    ok = s[:, -1] >= RANK_TOL * s[:, 0]
    tr_inv = np.sum(1.0 / np.where(ok[:, None], s, 1.0) ** 2, axis=1)
    rates = L * np.log2(1.0 + P / (noise * tr_inv))
    return np.where(ok, rates, -np.inf)


def _cmf_rates(hs: np.ndarray, P: float, noise: float) -> np.ndarray:
    g = hs @ np.conj(np.swapaxes(hs, 1, 2))
    diag = np.real(np.einsum("nii->ni", g))
    gamma2 = P / diag.sum(axis=1, keepdims=True)
    leak = (np.abs(g) ** 2).sum(axis=2) - diag**2
    sinr = gamma2 * diag**2 / (noise + gamma2 * np.maximum(leak, 0.0))
    return np.log2(1.0 + sinr).sum(axis=1)


def brute_force_best(realization: ChannelRealization, P: float, noise_power: float,
                     max_evals: int | None = DEFAULT_MAX_EVALS) -> OracleResult:
    """Best instantaneous sum rate over all antenna subsets, under CZF and CMF.

    Candidates are grouped by stream count and evaluated in batches. Ties go
    to CZF, then to the allocation that comes first in enumeration order.
    """
    K, N, M = realization.per_user.shape
    _check_cap(N, K, max_evals)
    rows = _row_indices(N, K)
    h_full = realization.per_user.reshape(K * N, M)

    n_alloc = len(rows)
    czf = np.full(n_alloc, -np.inf)
    cmf = np.full(n_alloc, -np.inf)
    by_load: dict[int, list[int]] = {}
    for j, r in enumerate(rows):
        by_load.setdefault(r.size, []).append(j)
    evaluated = 0
    for L, members in by_load.items():
        idx = np.asarray(members)
        hs = h_full[np.stack([rows[j] for j in members])]
        czf[idx] = _czf_rates(hs, M, P, noise_power)
        cmf[idx] = _cmf_rates(hs, P, noise_power)
        evaluated += len(members) * (2 if L <= M else 1)

    j_czf, j_cmf = int(np.argmax(czf)), int(np.argmax(cmf))
    if czf[j_czf] >= cmf[j_cmf]:
        mode, j, rate = Mode.CZF, j_czf, czf[j_czf]
    else:
        mode, j, rate = Mode.CMF, j_cmf, cmf[j_cmf]
    subsets = _antenna_subsets(N)
    # reconstruct the winning allocation from its position in the product order
    combo, rem = [], j
    base = len(subsets)
    for _ in range(K):
        combo.append(rem % base)
        rem //= base
    chosen = tuple(subsets[c] for c in reversed(combo))
    allocation = StreamAllocation(tuple(len(s) for s in chosen), chosen)
    return OracleResult(mode, allocation, float(rate), evaluated, n_alloc)
