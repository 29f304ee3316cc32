"""Large-system sum-rate approximations and the optimal CZF stream count.

Every formula here depends only on ``(M, N, K, L, P, noise)``; none of them
looks at a channel realization.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidArguments
from .numkit import lambert_w0

LOG2E = 1.0 / math.log(2.0)


class RateKind(str, enum.Enum):
    BDZF_LIMIT = "BdzfLimit"
    CMF_LIMIT = "CmfLimit"
    CZF_LIMIT = "CzfLimit"
    CZF_FULL_LOAD_UPPER_BOUND = "CzfFullLoadUpperBound"
    CZF_OPTIMUM = "CzfOptimum"
    MODIFIED_CZF = "ModifiedCzf"
    MODIFIED_CMF = "ModifiedCmf"


@dataclass(frozen=True)
class AsymptoticRate:
    value: float
    kind: RateKind

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ValueError(f"asymptotic rate must be finite and non-negative, got {self.value}")

    def __float__(self) -> float:
        return self.value


class Branch(str, enum.Enum):
    INTERIOR = "Interior"
    FULL_LOAD = "FullLoad"


@dataclass(frozen=True)
class CzfOptimum:
    """Optimal CZF load.

    ``L_real`` is the stationary point of the CZF limit in ``L``; ``L_star``
    is the integer load actually used, either the better neighbour of
    ``L_real`` or ``M`` when the full-load bound wins.
    """

    L_real: float
    L_star: int
    rate_at_optimum: float
    branch: Branch


def _log2_1p(x: float) -> float:
    return math.log1p(x) * LOG2E


def bdzf_asymptotic_rate(streams: Sequence[int], T: Sequence[int], P: float, noise_power: float) -> AsymptoticRate:
    L = sum(streams)
    if L < 1 or len(streams) != len(T):
        raise InvalidArguments("need one T_k per user and at least one stream")
    if any(t < n for n, t in zip(streams, T)):
        raise InvalidArguments("T_k must be at least N_k")
    value = sum(n * _log2_1p(P * (t - n) / (noise_power * L)) for n, t in zip(streams, T))
    return AsymptoticRate(value, RateKind.BDZF_LIMIT)


def cmf_asymptotic_rate(M: int, L: int, P: float, noise_power: float) -> AsymptoticRate:
    if L < 1:
        raise InvalidArguments("L must be positive")
    sinr = P * (M + 1) / (noise_power * L + P * (L - 1))
    return AsymptoticRate(L * _log2_1p(sinr), RateKind.CMF_LIMIT)


def czf_asymptotic_rate(M: int, L: int, P: float, noise_power: float) -> AsymptoticRate:
    """CZF limit for ``L < M``; evaluates to exactly 0 at ``L == M``.

    Use :func:`czf_fullload_upper_bound` for the full-load value.
    """
    if not 1 <= L <= M:
        raise InvalidArguments(f"CZF limit needs 1 <= L <= M, got L={L}, M={M}")
    return AsymptoticRate(L * _log2_1p(P * (M - L) / (noise_power * L)), RateKind.CZF_LIMIT)


def czf_fullload_upper_bound(M: int, P: float, noise_power: float) -> AsymptoticRate:
    """Upper bound on the CZF sum rate at ``L = M``.

    With ``rho = P / (M noise)`` and ``s = sqrt(1 + 4 rho)``::

        2 M log2((1 + s) / 2) - M log2(e) (s - 1)^2 / (4 rho)
    """
    if M < 1:
        raise InvalidArguments("M must be positive")
    rho = P / (M * noise_power)
    s = math.sqrt(1.0 + 4.0 * rho)
    s_minus_1 = 4.0 * rho / (s + 1.0)
    value = 2.0 * M * math.log1p(s_minus_1 / 2.0) * LOG2E - M * LOG2E * s_minus_1**2 / (4.0 * rho)
    return AsymptoticRate(max(value, 0.0), RateKind.CZF_FULL_LOAD_UPPER_BOUND)


def czf_rate_at_load(M: int, L: int, P: float, noise_power: float) -> float:
    """CZF limit below full load, full-load upper bound at ``L == M``."""
    if L == M:
        return czf_fullload_upper_bound(M, P, noise_power).value
    return czf_asymptotic_rate(M, L, P, noise_power).value


def stationary_czf_load(M: int, P: float, noise_power: float) -> float:
    """Real-valued ``L`` at which the CZF limit stops increasing in ``L``."""
    if P == noise_power:
        return M / math.e
    omega = lambert_w0((P - noise_power) / (noise_power * math.e))
    return M * P * omega / ((P - noise_power) * (1.0 + omega))


def optimal_czf_streams(M: int, P: float, noise_power: float) -> CzfOptimum:
    if M < 2:
        raise InvalidArguments("optimal stream count needs M >= 2")
    L_real = stationary_czf_load(M, P, noise_power)
    candidates = sorted({min(max(c, 1), M - 1) for c in (math.floor(L_real), math.ceil(L_real))})
    best_L, best_rate = candidates[0], czf_asymptotic_rate(M, candidates[0], P, noise_power).value
    for c in candidates[1:]:
        r = czf_asymptotic_rate(M, c, P, noise_power).value
        if r > best_rate:
            best_L, best_rate = c, r
    full = czf_fullload_upper_bound(M, P, noise_power).value
    if best_rate >= full:
        return CzfOptimum(L_real, best_L, best_rate, Branch.INTERIOR)
    return CzfOptimum(L_real, M, full, Branch.FULL_LOAD)


def modified_czf_rate(M: int, N: int, K: int, P: float, noise_power: float) -> AsymptoticRate:
    """Sum-rate limit of CZF with the load steered towards ``L_star``.

    Three regimes: every user fully served (``NK <= L_star``), load pinned at
    ``L_star`` (``NK > L_star >= K``), and one stream per user (``K > L_star``).
    """
    if not 1 <= K <= M:
        raise InvalidArguments(f"need 1 <= K <= M, got K={K}, M={M}")
    opt = optimal_czf_streams(M, P, noise_power)
    if N * K <= opt.L_star:
        if N * K == M:
            value = opt.rate_at_optimum
        else:
            value = czf_asymptotic_rate(M, N * K, P, noise_power).value
    elif K <= opt.L_star:
        value = opt.rate_at_optimum
    else:
        value = czf_asymptotic_rate(M, K, P, noise_power).value
    return AsymptoticRate(value, RateKind.MODIFIED_CZF)


def modified_cmf_rate(M: int, N: int, K: int, P: float, noise_power: float) -> AsymptoticRate:
    if not 1 <= K <= M:
        raise InvalidArguments(f"need 1 <= K <= M, got K={K}, M={M}")
    L = min(N * K, M)
    return AsymptoticRate(cmf_asymptotic_rate(M, L, P, noise_power).value, RateKind.MODIFIED_CMF)
