"""BDZF, CZF and CMF precoders with exact per-stream SINRs.

All modes split the power budget uniformly over the ``L`` streams, so
``tr(W W^H) = P`` holds by construction.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import stack_equivalent_channel, user_blocks
from .errors import InvalidArguments, ShapeMismatch, TooManyStreams, ZeroChannel
from .numkit import null_space_basis, pseudo_inverse, trace_inverse_gram

_LOG2E = 1.0 / math.log(2.0)


class Mode(str, enum.Enum):
    BDZF = "BDZF"
    CZF = "CZF"
    CMF = "CMF"


@dataclass(frozen=True)
class Precoder:
    """Precoding matrix ``W`` (``M x L``) and its per-user column ranges.

    ``scales`` holds the power-normalization factors: one ``alpha_k`` per
    user for BDZF, a single ``beta`` (CZF) or ``gamma`` (CMF) otherwise.
    """

    mode: Mode
    W: np.ndarray
    per_user_blocks: tuple[tuple[int, int], ...]
    power_budget: float
    scales: tuple[float, ...] = ()

    @property
    def L(self) -> int:
        return self.W.shape[1]

    def block(self, k: int) -> np.ndarray:
        a, b = self.per_user_blocks[k]
        return self.W[:, a:b]


@dataclass(frozen=True)
class BdzfConfig:
    """Per-user intermediate dimension ``T_k`` (columns of ``B_k``)."""

    T: tuple[int, ...]

    @classmethod
    def default(cls, counts: Sequence[int], M: int) -> "BdzfConfig":
        """``T_k = M + N_k - L``, the largest dimension the other users leave free."""
        L = sum(counts)
        return cls(tuple(M + n - L for n in counts))


def _blocks_or_single(L: int, blocks) -> tuple[tuple[int, int], ...]:
    if blocks is None:
        return ((0, L),)
    blocks = tuple((int(a), int(b)) for a, b in blocks)
    if blocks[0][0] != 0 or blocks[-1][1] != L:
        raise ShapeMismatch(f"blocks {blocks} do not tile {L} streams")
    return blocks


def czf_precoder(h: np.ndarray, P: float, blocks=None) -> Precoder:
    """Cooperative ZF on the stacked ``L x M`` channel: ``W = beta * h^+``."""
    L, M = h.shape
    if L > M:
        raise TooManyStreams(f"CZF needs L <= M, got L={L}, M={M}")
    h_pinv = pseudo_inverse(h)
    beta = math.sqrt(P / trace_inverse_gram(h))
    return Precoder(Mode.CZF, beta * h_pinv, _blocks_or_single(L, blocks), float(P), (beta,))


def cmf_precoder(h: np.ndarray, P: float, blocks=None) -> Precoder:
    """Cooperative matched filter: ``W = gamma * h^H``."""
    L = h.shape[0]
    energy = float(np.vdot(h, h).real)
    if energy == 0.0:
        raise ZeroChannel("CMF precoder on an all-zero channel")
    gamma = math.sqrt(P / energy)
    return Precoder(Mode.CMF, gamma * h.conj().T, _blocks_or_single(L, blocks), float(P), (gamma,))


def bdzf_precoder(selected: Sequence[np.ndarray], config: Optional[BdzfConfig], P: float) -> Precoder:
    """Block diagonalization followed by per-user zero forcing.

    For user ``k`` the basis ``B_k`` spans ``T_k`` directions in the null
    space of every other user's selected rows, ``D_k`` is the pseudo-inverse
    of ``H_k B_k`` and ``W_k = alpha_k B_k D_k`` with
    ``alpha_k^2 = P N_k / (L tr(D_k D_k^H))``.
    """
    counts = [h.shape[0] for h in selected]
    h = stack_equivalent_channel(selected)
    L, M = h.shape
    if L > M:
        raise TooManyStreams(f"BDZF needs L <= M, got L={L}, M={M}")
    if config is None:
        config = BdzfConfig.default(counts, M)
    if len(config.T) != len(counts):
        raise InvalidArguments(f"{len(config.T)} T_k values for {len(counts)} users")
    blocks = user_blocks(counts)

    W = np.zeros((M, L), dtype=complex)
    alphas = []
    for k, (n_k, t_k, (a, b)) in enumerate(zip(counts, config.T, blocks)):
        if t_k < n_k:
            raise InvalidArguments(f"T_{k}={t_k} cannot carry {n_k} streams")
        others = np.vstack([h[:a], h[b:]])
        B_k = null_space_basis(others, t_k)
        D_k = pseudo_inverse(selected[k] @ B_k)
        # B_k has orthonormal columns, so tr(B D D^H B^H) = tr(D D^H)
        tr_k = float(np.vdot(D_k, D_k).real)
        alpha = math.sqrt(P * n_k / (L * tr_k))
        W[:, a:b] = alpha * (B_k @ D_k)
        alphas.append(alpha)
    return Precoder(Mode.BDZF, W, blocks, float(P), tuple(alphas))


def stream_sinrs(selected: Sequence[np.ndarray], precoder: Precoder, noise_power: float) -> np.ndarray:
    """Exact SINR of every stream, in global stream order.

    ``SINR_i = |h_i w_i|^2 / (noise + sum_{j != i} |h_i w_j|^2)``, i.e. the
    received signal decomposed into desired, inter-stream and inter-user terms.
    """
    h = stack_equivalent_channel(selected) if not isinstance(selected, np.ndarray) else selected
    if h.shape[1] != precoder.W.shape[0] or h.shape[0] != precoder.W.shape[1]:
        raise ShapeMismatch(f"channel {h.shape} incompatible with precoder {precoder.W.shape}")
    gains = np.abs(h @ precoder.W) ** 2
    signal = np.diag(gains).copy()
    interference = gains.sum(axis=1) - signal
    return signal / (noise_power + np.maximum(interference, 0.0))


def sum_rate(sinrs) -> float:
    """``sum(log2(1 + SINR))`` in bits/s/Hz."""
    s = np.asarray(sinrs, dtype=float)
    if np.any(s < 0):
        raise InvalidArguments("SINR values must be non-negative")
    return float(np.sum(np.log1p(s)) * _LOG2E)


def closed_form_sinrs(mode: Mode, selected: Sequence[np.ndarray], P: float, noise_power: float,
                      config: Optional[BdzfConfig] = None) -> np.ndarray:
    """Per-stream SINRs from the mode-specific closed forms.

    Independent of :func:`stream_sinrs`: no precoding matrix is built. BDZF
    uses ``P N_k / (noise L tr((H_k B_k)(H_k B_k)^H)^{-1})``, CZF
    ``P / (noise tr(H H^H)^{-1})`` and CMF the matched-filter ratio of
    ``gamma^2 |h_i|^4`` to noise plus leakage through the Gram matrix.
    """
    mode = Mode(mode)
    counts = [s.shape[0] for s in selected]
    h = stack_equivalent_channel(selected)
    L, M = h.shape
    if mode is Mode.CZF:
        return np.full(L, P / (noise_power * trace_inverse_gram(h)))
    if mode is Mode.CMF:
        g = h @ h.conj().T
        diag = np.real(np.diag(g))
        gamma2 = P / diag.sum()
        leak = (np.abs(g) ** 2).sum(axis=1) - diag**2
        return gamma2 * diag**2 / (noise_power + gamma2 * leak)
    if config is None:
        config = BdzfConfig.default(counts, M)
    out = []
    for k, ((a, b), t_k) in enumerate(zip(user_blocks(counts), config.T)):
        others = np.vstack([h[:a], h[b:]])
        B_k = null_space_basis(others, t_k)
        tr_k = trace_inverse_gram(selected[k] @ B_k)
        out.extend([P * counts[k] / (noise_power * L * tr_k)] * counts[k])
    return np.asarray(out)
