import itertools

import numpy as np
import pytest

from mumimo.channel import StreamAllocation, SystemConfig, generate_channels, select_antennas, stack_equivalent_channel
from mumimo.errors import TooLarge
from mumimo.oracle import brute_force_best, enumerate_allocations
from mumimo.precoding import Mode, cmf_precoder, czf_precoder, stream_sinrs, sum_rate
from mumimo.strategy import compute_mode_intervals, select_mode


def direct_rate(realization, alloc, mode, P, noise):
    sel = select_antennas(realization, alloc)
    h = stack_equivalent_channel(sel)
    if mode is Mode.CZF:
        if h.shape[0] > h.shape[1]:
            return -np.inf
        pre = czf_precoder(h, P)
    else:
        pre = cmf_precoder(h, P)
    return sum_rate(stream_sinrs(h, pre, noise))


class TestEnumerate:
    def test_single_antenna(self):
        allocs = enumerate_allocations(1, 3)
        assert len(allocs) == 1 and allocs[0].per_user_streams == (1, 1, 1)

    def test_two_by_two(self):
        assert len(enumerate_allocations(2, 2)) == 9

    def test_two_by_eight(self):
        assert len(enumerate_allocations(2, 8)) == 6561

    def test_order(self):
        allocs = enumerate_allocations(2, 2)
        assert allocs[0].per_user_antenna_rows == ((0,), (0,))
        assert allocs[1].per_user_antenna_rows == ((0,), (1,))
        assert allocs[2].per_user_antenna_rows == ((0,), (0, 1))
        assert allocs[-1].per_user_antenna_rows == ((0, 1), (0, 1))

    def test_distinct(self):
        allocs = enumerate_allocations(3, 3)
        assert len({a.per_user_antenna_rows for a in allocs}) == 7**3

    def test_cap(self):
        with pytest.raises(TooLarge):
            enumerate_allocations(2, 20)


def test_single_antenna_users_degenerate():
    cfg = SystemConfig(8, 1, 4, 2.0)
    real = generate_channels(cfg, 1, 0)
    res = brute_force_best(real, cfg.P, 1.0)
    full = StreamAllocation.full(1, 4)
    assert res.best_rate == pytest.approx(max(direct_rate(real, full, m, cfg.P, 1.0) for m in Mode if m is not Mode.BDZF))
    assert res.evaluated_count == 2 and res.allocation_count == 1


def test_single_user_all_six_cases():
    cfg = SystemConfig(4, 2, 1, 3.0)
    real = generate_channels(cfg, 5, 0)
    cases = []
    for rows in [(0,), (1,), (0, 1)]:
        alloc = StreamAllocation((len(rows),), (rows,))
        for mode in (Mode.CZF, Mode.CMF):
            cases.append((direct_rate(real, alloc, mode, cfg.P, 1.0), mode, rows))
    res = brute_force_best(real, cfg.P, 1.0)
    best = max(c[0] for c in cases)
    assert res.best_rate == pytest.approx(best, rel=1e-10)
    winner = next(c for c in cases if abs(c[0] - best) < 1e-9)
    assert res.best_allocation.per_user_antenna_rows == (winner[2],)
    assert res.evaluated_count == 6


@pytest.mark.parametrize("M,N,K,snr", [(8, 2, 3, 0.0), (6, 2, 4, 10.0), (16, 2, 5, -5.0), (4, 3, 2, 5.0)])
def test_dominates_random_pairs(M, N, K, snr):
    cfg = SystemConfig.from_snr_db(M, N, K, snr)
    allocs = enumerate_allocations(N, K)
    pick = np.random.default_rng(0)
    for trial in range(5):
        real = generate_channels(cfg, 17, trial)
        res = brute_force_best(real, cfg.P, 1.0)
        assert res.allocation_count == (2**N - 1) ** K
        assert res.best_rate == pytest.approx(
            direct_rate(real, res.best_allocation, res.best_mode, cfg.P, 1.0), rel=1e-9)
        for _ in range(50):
            alloc = allocs[pick.integers(len(allocs))]
            mode = (Mode.CZF, Mode.CMF)[pick.integers(2)]
            assert res.best_rate >= direct_rate(real, alloc, mode, cfg.P, 1.0) - 1e-9


def test_exhaustive_agrees_with_direct_loop():
    cfg = SystemConfig.from_snr_db(6, 2, 3, 3.0)
    real = generate_channels(cfg, 8, 0)
    rates = [(direct_rate(real, a, m, cfg.P, 1.0), i, m)
             for i, a in enumerate(enumerate_allocations(2, 3)) for m in (Mode.CZF, Mode.CMF)]
    best = max(r[0] for r in rates)
    assert brute_force_best(real, cfg.P, 1.0).best_rate == pytest.approx(best, rel=1e-10)


def test_beats_selection_rule():
    cfg = SystemConfig.from_snr_db(16, 2, 6, 0.0)
    iv = compute_mode_intervals(16, 2, cfg.P, 1.0)
    for t in range(3):
        real = generate_channels(cfg, 2, t)
        d = select_mode(6, iv, np.random.default_rng(t))
        mode = Mode.CZF if d.mode.value == "ModifiedCZF" else Mode.CMF
        assert brute_force_best(real, cfg.P, 1.0).best_rate >= direct_rate(real, d.allocation, mode, cfg.P, 1.0)


def test_eval_cap():
    real = generate_channels(SystemConfig(16, 2, 8, 1.0), 0, 0)
    with pytest.raises(TooLarge):
        brute_force_best(real, 1.0, 1.0, max_evals=1000)
