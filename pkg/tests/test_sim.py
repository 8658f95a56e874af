"""Jump-chain simulators: clause enumeration, sampling, rescaling, residuals."""

import io
import math

import numpy as np
import pytest

from twolevel import (
    InvalidState,
    MicroState,
    ModelParams,
    ScalingParams,
    Trajectory,
    aux_noblock_transitions,
    aux_saturated_transitions,
    build_generator,
    check_state,
    enabled_transitions,
    martingale_residual,
    rescale,
    residual_sup,
    simulate,
    simulate_aux_noblock,
    simulate_aux_saturated,
    stationary_distribution,
    stationary_moments,
    step,
    write_trajectory_csv,
)

SYM = ModelParams(0.5, 1.0, 1.0, 1.0)


def as_target_rates(state, transitions):
    return {
        tuple(a + b for a, b in zip(state, tr.delta)): tr.rate for tr in transitions
    }


class TestCheckState:
    def test_valid_state_passes(self):
        check_state((1, 2, 0), ScalingParams(n=5, c2=2))

    @pytest.mark.parametrize(
        "state", [(-1, 0, 0), (0, -1, 0), (0, 0, -1), (3, 3, 0), (0, 0, 3), (1, 0, 1)]
    )
    def test_invalid_states_rejected(self, state):
        with pytest.raises(InvalidState):
            check_state(state, ScalingParams(n=5, c2=2))


class TestEnabledTransitions:
    def test_idle_specialist_state_enumeration(self):
        scaling = ScalingParams(n=3, c2=1)
        got = as_target_rates((0, 2, 1), enabled_transitions((0, 2, 1), SYM, scaling))
        assert got == {(0, 1, 0): 1.0, (0, 2, 0): 1.0, (0, 3, 1): 0.5}

    def test_blocked_operator_state_enumeration(self):
        scaling = ScalingParams(n=3, c2=1)
        got = as_target_rates((1, 1, 0), enabled_transitions((1, 1, 0), SYM, scaling))
        assert got == {(2, 0, 0): 1.0, (0, 1, 0): 0.5, (0, 2, 0): 0.5, (1, 2, 0): 0.5}

    def test_degenerate_corner_is_absorbing(self):
        params = ModelParams(0.0, 1.0, 1.0, 1.0)
        assert enabled_transitions((0, 0, 1), params, ScalingParams(n=1, c2=1)) == []

    def test_total_rate_double_entry(self):
        """Sum of clause rates equals the independently derived exit rate."""
        params = ModelParams(0.35, 1.4, 0.7, 1.2)
        scaling = ScalingParams(n=7, c2=3)
        rng = np.random.default_rng(42)
        for _ in range(200):
            y_star = int(rng.integers(0, 8))
            y = int(rng.integers(0, 8 - y_star))
            z = 0 if y_star > 0 else int(rng.integers(0, 4))
            total = sum(tr.rate for tr in enabled_transitions((y_star, y, z), params, scaling))
            spec_total = params.mu01 * y + params.p * params.mu11 * (7 - y_star - y)
            spec_total += params.mu02 * (3 if y_star > 0 else 3 - z)
            assert total == pytest.approx(spec_total, abs=1e-12)

    def test_targets_are_valid_states(self):
        scaling = ScalingParams(n=4, c2=2)
        for y_star in range(5):
            for y in range(5 - y_star):
                for z in range(3):
                    if y_star > 0 and z > 0:
                        continue
                    for tr in enabled_transitions((y_star, y, z), SYM, scaling):
                        target = tuple(
                            a + b for a, b in zip((y_star, y, z), tr.delta)
                        )
                        check_state(target, scaling)
                        assert tr.rate > 0


class TestAuxTransitions:
    def test_saturated_no_blocked_operators_disables_level2(self):
        got = aux_saturated_transitions((0, 5), SYM, ScalingParams(n=10, c2=2))
        deltas = {tr.delta for tr in got}
        assert deltas == {(1, -1), (0, 1)}

    def test_saturated_blocked_state_enumeration(self):
        got = aux_saturated_transitions((1, 0), SYM, ScalingParams(n=3, c2=2))
        assert as_target_rates((1, 0), got) == {(0, 0): 1.0, (0, 1): 1.0, (1, 1): 1.0}

    def test_noblock_busy_specialists_drop_handover(self):
        got = aux_noblock_transitions((4, 0), SYM, ScalingParams(n=10, c2=3))
        rates = {tr.delta: tr.rate for tr in got}
        assert rates[(-1, 0)] == pytest.approx(0.5 * 4)
        assert (-1, -1) not in rates and (0, -1) not in rates

    def test_noblock_all_idle_only_admission(self):
        got = aux_noblock_transitions((0, 3), SYM, ScalingParams(n=10, c2=3))
        assert [(tr.delta, tr.rate) for tr in got] == [((1, 0), 0.5 * 10)]

    def test_out_of_space_states_rejected(self):
        with pytest.raises(InvalidState):
            aux_saturated_transitions((-1, 0), SYM, ScalingParams(n=3, c2=1))
        with pytest.raises(InvalidState):
            aux_noblock_transitions((0, 2), SYM, ScalingParams(n=3, c2=1))


class TestCouplingConsistency:
    """Shared-coordinate rate agreement between the main and auxiliary chains."""

    def test_blocked_states_match_saturated_chain(self):
        params = ModelParams(0.4, 1.2, 0.9, 1.1)
        scaling = ScalingParams(n=6, c2=3)
        for y_star in range(1, 7):
            for y in range(7 - y_star):
                main = {
                    tr.delta[:2]: tr.rate
                    for tr in enabled_transitions((y_star, y, 0), params, scaling)
                }
                aux = {
                    tr.delta: tr.rate
                    for tr in aux_saturated_transitions((y_star, y), params, scaling)
                }
                assert main == aux

    def test_idle_states_match_noblock_chain(self):
        params = ModelParams(0.4, 1.2, 0.9, 1.1)
        scaling = ScalingParams(n=6, c2=3)
        for y in range(7):
            for z in range(1, 4):
                main = {
                    tr.delta[1:]: tr.rate
                    for tr in enabled_transitions((0, y, z), params, scaling)
                }
                aux = {
                    tr.delta: tr.rate
                    for tr in aux_noblock_transitions((y, z), params, scaling)
                }
                assert main == aux


class TestStep:
    def test_single_transition_deterministic_target_and_mean_holding(self):
        scaling = ScalingParams(n=1, c2=1)
        rng = np.random.default_rng(2024)
        holdings = np.empty(100_000)
        for i in range(len(holdings)):
            holding, nxt = step((0, 0, 1), rng, SYM, scaling)
            assert nxt == (0, 1, 1)
            holdings[i] = holding
        lam = 0.5
        se = (1 / lam) / math.sqrt(len(holdings))
        assert abs(holdings.mean() - 1 / lam) <= 3 * se

    def test_selection_frequencies(self):
        scaling = ScalingParams(n=3, c2=1)
        rng = np.random.default_rng(7)
        counts = {(0, 1, 0): 0, (0, 2, 0): 0, (0, 3, 1): 0}
        draws = 100_000
        for _ in range(draws):
            _, nxt = step((0, 2, 1), rng, SYM, scaling)
            counts[tuple(nxt)] += 1
        for target, prob in [((0, 1, 0), 0.4), ((0, 2, 0), 0.4), ((0, 3, 1), 0.2)]:
            sigma = math.sqrt(prob * (1 - prob) / draws)
            assert abs(counts[target] / draws - prob) <= 3 * sigma

    def test_absorbing_state_returns_marker(self):
        params = ModelParams(0.0, 1.0, 1.0, 1.0)
        rng = np.random.default_rng(0)
        holding, nxt = step((0, 0, 1), rng, params, ScalingParams(n=1, c2=1))
        assert holding == math.inf and nxt == (0, 0, 1)

    def test_fixed_seed_reproducible(self):
        scaling = ScalingParams(n=3, c2=1)
        a = step((0, 2, 1), np.random.default_rng(55), SYM, scaling)
        b = step((0, 2, 1), np.random.default_rng(55), SYM, scaling)
        assert a == b


class TestSimulate:
    def test_zero_horizon_no_events(self):
        traj = simulate((0, 0, 0), SYM, ScalingParams(n=5, c2=2), 0.0, seed=1)
        assert traj.num_events == 0
        assert traj.events == []
        assert traj.initial == MicroState(0, 0, 0)

    def test_tiny_instance_alternation(self):
        """With one operator, one specialist and certain handover the chain cycles."""
        params = ModelParams(1.0, 1.0, 1.0, 1.0)
        traj = simulate((0, 0, 1), params, ScalingParams(n=1, c2=1), 20.0, seed=9)
        states = [tuple(r) for r in traj.states]
        assert states[1] == (0, 1, 1)
        assert states[2] == (0, 1, 0)
        reachable = {(0, 0, 1), (0, 1, 1), (0, 1, 0), (1, 0, 0)}
        assert set(states) <= reachable

    def test_matches_manual_step_loop(self):
        """simulate() replays exactly the embedded chain that step() exposes."""
        scaling = ScalingParams(n=8, c2=3)
        horizon = 6.0
        traj = simulate((0, 0, 0), SYM, scaling, horizon, seed=99)
        rng = np.random.default_rng(99)
        t, state = 0.0, MicroState(0, 0, 0)
        times, states = [0.0], [state]
        while True:
            holding, nxt = step(state, rng, SYM, scaling)
            t += holding
            if t >= horizon:
                break
            state = nxt
            times.append(t)
            states.append(state)
        assert traj.times.tolist() == times
        assert [tuple(r) for r in traj.states] == [tuple(s) for s in states]

    def test_every_visited_state_valid(self):
        scaling = ScalingParams(n=25, c2=9)
        params = ModelParams(0.45, 1.1, 0.8, 1.3)
        for seed in range(4):
            traj = simulate((0, 0, 0), params, scaling, 30.0, seed=seed)
            ys, y, z = traj.states.T
            assert ys.min() >= 0 and y.min() >= 0 and z.min() >= 0
            assert (ys + y).max() <= 25
            assert z.max() <= 9
            assert np.all(ys * z == 0)
            assert np.all(np.diff(traj.times) > 0)

    def test_low_load_blocking_indicator_rare(self):
        scaling = ScalingParams(n=200, c2=140)
        traj = simulate((0, 0, 0), SYM, scaling, 50.0, seed=31)
        t_lo, t_hi = 10.0, 50.0
        lo = np.concatenate([traj.times, [traj.horizon]])
        occupied = 0.0
        for k in range(len(traj.times)):
            a, b = max(lo[k], t_lo), min(lo[k + 1], t_hi)
            if b > a and traj.states[k, 0] > 0:
                occupied += b - a
        assert occupied / (t_hi - t_lo) <= 0.02

    def test_absorbed_flag_set(self):
        params = ModelParams(0.0, 1.0, 1.0, 1.0)
        traj = simulate((0, 0, 1), params, ScalingParams(n=1, c2=1), 5.0, seed=3)
        assert traj.absorbed and traj.num_events == 0

    def test_seed_determinism(self):
        scaling = ScalingParams(n=10, c2=4)
        a = simulate((0, 0, 0), SYM, scaling, 10.0, seed=77)
        b = simulate((0, 0, 0), SYM, scaling, 10.0, seed=77)
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.states, b.states)

    def test_matches_oracle_time_average(self):
        """Long-run empirical mean of y agrees with the exact stationary mean."""
        params, scaling = SYM, ScalingParams(n=2, c2=1)
        pi = stationary_distribution(build_generator(params, scaling))
        exact = stationary_moments(pi, scaling)[1] * scaling.n
        horizon, burn = 4000.0, 200.0
        traj = simulate((0, 0, 0), params, scaling, horizon, seed=13)
        edges = np.linspace(burn, horizon, 21)
        starts = np.searchsorted(traj.times, edges[:-1], side="right") - 1
        batch = np.empty(20)
        for b in range(20):
            tt = np.clip(traj.times[starts[b] :], edges[b], edges[b + 1])
            span = np.diff(np.append(tt, edges[b + 1]))
            batch[b] = (traj.states[starts[b] :, 1] * span).sum() / (edges[b + 1] - edges[b])
        se = batch.std(ddof=1) / math.sqrt(len(batch))
        assert abs(batch.mean() - exact) <= 3 * se


class TestAuxSimulate:
    def test_zero_horizon(self):
        traj = simulate_aux_saturated((0, 0), SYM, ScalingParams(n=4, c2=2), 0.0, seed=5)
        assert traj.num_events == 0 and traj.columns == ("y_star", "y")

    def test_noblock_columns_and_bounds(self):
        scaling = ScalingParams(n=30, c2=10)
        traj = simulate_aux_noblock((0, 0), SYM, scaling, 20.0, seed=8)
        assert traj.columns == ("y", "z")
        assert traj.states[:, 0].max() <= 30 and traj.states[:, 1].max() <= 10
        assert traj.states.min() >= 0

    def test_saturated_bounds_hold(self):
        scaling = ScalingParams(n=30, c2=10)
        traj = simulate_aux_saturated((0, 0), SYM, scaling, 20.0, seed=8)
        assert traj.states.min() >= 0
        assert traj.states.sum(axis=1).max() <= 30

    def test_invalid_inits_rejected(self):
        with pytest.raises(InvalidState):
            simulate_aux_saturated((3, 3), SYM, ScalingParams(n=5, c2=2), 1.0, seed=0)
        with pytest.raises(InvalidState):
            simulate_aux_noblock((0, 3), SYM, ScalingParams(n=5, c2=2), 1.0, seed=0)

    def test_seed_determinism(self):
        scaling = ScalingParams(n=12, c2=5)
        runs = [
            simulate_aux_noblock((0, 0), SYM, scaling, 15.0, seed=21) for _ in range(2)
        ]
        assert np.array_equal(runs[0].times, runs[1].times)
        assert np.array_equal(runs[0].states, runs[1].states)


class TestRescale:
    @staticmethod
    def constant_traj(state, n, c2, horizon):
        return Trajectory(
            "main",
            ("y_star", "y", "z"),
            np.array([0.0]),
            np.array([state]),
            horizon,
            seed=0,
            n=n,
            c2=c2,
        )

    def test_constant_trajectory_rescales_to_constant(self):
        traj = self.constant_traj((0, 100, 0), 100, 30, 2.0)
        path = rescale(traj, ScalingParams(n=100, c2=30), 0.5)
        assert path.values.shape == (5, 3)
        assert np.all(path.values == (0.0, 1.0, 0.0))

    def test_division_by_n(self):
        traj = self.constant_traj((40, 30, 0), 100, 30, 1.0)
        path = rescale(traj, ScalingParams(n=100, c2=30), 1.0)
        np.testing.assert_allclose(path.values[0], (0.4, 0.3, 0.0))

    def test_fine_grid_reproduces_every_jump(self):
        scaling = ScalingParams(n=2, c2=1)
        traj = simulate((0, 0, 0), SYM, scaling, 5.0, seed=3)
        assert traj.num_events > 3
        min_gap = np.diff(traj.times).min()
        k = int(math.ceil(traj.horizon / (min_gap / 2)))
        path = rescale(traj, scaling, traj.horizon / k)
        changes = int(np.any(np.diff(path.values, axis=0) != 0, axis=1).sum())
        assert changes == traj.num_events

    def test_bad_grid_rejected(self):
        traj = simulate((0, 0, 0), SYM, ScalingParams(n=2, c2=1), 1.0, seed=0)
        with pytest.raises(InvalidState):
            rescale(traj, ScalingParams(n=2, c2=1), 0.0)


class TestMartingaleResidual:
    def test_zero_rate_trajectory_residual_identically_zero(self):
        params = ModelParams(0.0, 1.0, 1.0, 1.0)
        scaling = ScalingParams(n=1, c2=1)
        traj = simulate((0, 0, 1), params, scaling, 5.0, seed=3)
        res = martingale_residual(traj, params, scaling, 0.01)
        assert np.all(res.values == 0.0)
        assert residual_sup(traj, params, scaling).max() == 0.0

    def test_residual_starts_at_zero(self):
        scaling = ScalingParams(n=20, c2=6)
        traj = simulate((0, 0, 0), SYM, scaling, 5.0, seed=11)
        res = martingale_residual(traj, SYM, scaling, 0.01)
        assert np.all(res.values[0] == 0.0)

    def test_single_jump_size_is_one_over_n(self):
        params = ModelParams(1.0, 1.0, 1.0, 1.0)
        scaling = ScalingParams(n=1, c2=1)
        traj = simulate((0, 0, 1), params, scaling, 3.0, seed=6)
        assert traj.num_events >= 1
        t1 = traj.times[1]
        res = martingale_residual(traj, params, scaling, 1e-5)
        k_after = int(np.searchsorted(res.times, t1, side="left"))
        jump = res.values[k_after] - res.values[k_after - 1]
        np.testing.assert_allclose(jump, (0.0, 1.0, 0.0), atol=1e-4)

    def test_sup_residual_shrinks_with_n(self):
        """Doubling n twice halves the sup-residual RMS (within sampling slack)."""
        reps = 50
        sups = {}
        for n in (100, 400):
            scaling = ScalingParams(n=n, c2=max(1, (3 * n) // 10))
            acc = np.zeros((reps, 3))
            for i in range(reps):
                traj = simulate((0, 0, 0), SYM, scaling, 10.0, seed=500 + i)
                acc[i] = residual_sup(traj, SYM, scaling)
            sups[n] = np.sqrt((acc**2).mean(axis=0))
        ratio = sups[100] / sups[400]
        assert ratio.min() >= 1.5

    def test_truncated_or_foreign_trajectories_rejected(self):
        scaling = ScalingParams(n=4, c2=2)
        aux = simulate_aux_saturated((0, 0), SYM, scaling, 2.0, seed=0)
        with pytest.raises(InvalidState):
            residual_sup(aux, SYM, scaling)


class TestTrajectoryCsv:
    def test_header_and_rows(self):
        scaling = ScalingParams(n=3, c2=1)
        traj = simulate((0, 0, 0), SYM, scaling, 3.0, seed=2)
        buf = io.StringIO()
        write_trajectory_csv(traj, buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "t,y_star,y,z"
        assert len(lines) == len(traj.times) + 1
        first = lines[1].split(",")
        assert float(first[0]) == 0.0
        assert [int(v) for v in first[1:]] == [0, 0, 0]
