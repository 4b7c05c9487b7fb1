import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gcqec import labels, qsim
from gcqec.codes import SHOR, STEANE
from gcqec.compiler import ec_cycle_pulses
from gcqec.core import ChainLayout
from gcqec.orchestrator import (AlgorithmGate, CellPattern, DeviceState, NoiseModel, end_cell_io,
                                fit_loglog_slope, monte_carlo_sweep, run_cycle, stabilize, SweepRow)


def lone_one_oracle(bits):
    out = list(bits)
    for k, v in enumerate(bits):
        left = bits[k - 1] if k > 0 else 0
        right = bits[k + 1] if k + 1 < len(bits) else 0
        if v == 1 and left == 0 and right == 0:
            out[k] = 0
    return tuple(out)


def test_stabilize_examples():
    assert stabilize(CellPattern((0, 1, 0))).bits == (0, 0, 0)
    assert stabilize(CellPattern((0, 1, 1, 0))).bits == (0, 1, 1, 0)
    assert stabilize([1]).bits == (0,)
    assert stabilize([]).bits == ()
    with pytest.raises(ValueError):
        CellPattern((0, 2))


def test_stabilize_exhaustive():
    for n in range(1, 13):
        for bits in itertools.product((0, 1), repeat=n):
            out = stabilize(CellPattern(bits)).bits
            assert out == lone_one_oracle(bits)
            # a single pass leaves nothing isolated behind, so it is idempotent
            assert stabilize(CellPattern(out)).bits == out


@pytest.mark.parametrize("plan", [
    labels.hierarchy_labels(2, 10, 40),
    labels.hierarchy_labels(3, 4, 64),
    labels.hierarchy_labels(8, 2, 128),
    labels.supercu_labels(3, 16),
], ids=["h2", "h3", "h8", "super3"])
def test_generated_framings_are_fixed_points(plan):
    for with_cu in (True, False):
        cells = tuple(int(c) for c in labels.plan_cells(plan, with_cu))
        assert stabilize(cells).bits == cells


def test_noise_model():
    with pytest.raises(ValueError):
        NoiseModel(0.5, 0.4, 0.2)
    with pytest.raises(ValueError):
        NoiseModel(-0.1)
    with pytest.raises(ValueError):
        NoiseModel(0.1, granularity="per_gate")
    n = NoiseModel(1e-4, 2e-4, 3e-4, "per_pulse_exposure")
    px, py, pz = n.cycle_rates(1000)
    assert px + py + pz == pytest.approx(1 - (1 - 6e-4) ** 1000)
    assert py == pytest.approx(2 * px)
    assert NoiseModel.depolarizing(0.03).cycle_rates() == pytest.approx((0.01, 0.01, 0.01))
    counts = {"X": 0, "Y": 0, "Z": 0}
    rng = np.random.default_rng(0)
    for _ in range(2000):
        for _, p in NoiseModel(0.1, 0.0, 0.2).sample(rng, 5):
            counts[p] += 1
    assert counts["Y"] == 0
    assert abs(counts["X"] - 1000) < 4 * np.sqrt(900)
    assert abs(counts["Z"] - 2000) < 4 * np.sqrt(1600)


@pytest.mark.parametrize("code", ["steane", "shor"])
def test_noiseless_cycle_is_identity(code):
    state = DeviceState.create(code, 3, p=2, seed=1)
    state, rep = run_cycle(state, 1)
    assert min(rep.fidelities) >= 1 - 1e-9
    assert state.phase == "EC"


@pytest.mark.parametrize("m", [1, 2, 4, 8])
def test_ec_pulses_independent_of_m(m):
    state = DeviceState.create("steane", m, seed=m)
    _, rep = run_cycle(state, 0)
    assert rep.ec_pulses == ec_cycle_pulses(STEANE, ChainLayout(10, m))


def test_single_errors_over_many_cycles():
    state = DeviceState.create("steane", 1, p=2, seed=7)
    rng = np.random.default_rng(3)
    for _ in range(100):
        q = int(rng.integers(7))
        qsim.apply_error(state.block_states[0], q, "X")
        state, rep = run_cycle(state, state.label_plan.p)
        assert rep.active_blocks == [0]
        assert rep.fidelities[0] >= 1 - 1e-9


def test_active_set_follows_labels_and_round_trips():
    state = DeviceState.create("steane", 25, p=3, seed=2)
    for b in range(4):
        state, rep = run_cycle(state, b)
        expected = [i - 1 for i in state.label_plan.active_stations(b)]
        assert rep.active_blocks == expected
        assert all(cu.active for cu in state.cu_states)
    assert run_cycle(state, 2)[1].active_blocks == [0]


def test_ledger_decomposition_and_monotone():
    state = DeviceState.create("steane", 4, p=2, seed=5)
    before = dict(state.pulse_ledger)
    for b, gates in [(0, []), (1, [AlgorithmGate("H", 0)]), (2, [AlgorithmGate("X"), AlgorithmGate("Z")])]:
        state, rep = run_cycle(state, b, gates)
        assert rep.reactivation_pulses == rep.transition_pulses
        assert rep.total_pulses == rep.ec_pulses + 2 * rep.transition_pulses + rep.algorithm_pulses
        after = dict(state.pulse_ledger)
        assert all(after[k] >= before[k] for k in after)
        assert sum(after.values()) - sum(before.values()) == rep.total_pulses
        before = after


def test_algorithm_gates_follow_logical_frame():
    state = DeviceState.create("steane", 12, p=2, seed=11)
    state, rep = run_cycle(state, 1, [AlgorithmGate("H", 0), AlgorithmGate("X", 10)])
    assert rep.active_blocks == [0, 10]
    assert min(rep.fidelities) >= 1 - 1e-9
    assert rep.algorithm_pulses > 0


def test_algorithm_gate_needs_active_cu():
    state = DeviceState.create("steane", 4, p=2, seed=1)
    with pytest.raises(RuntimeError):
        run_cycle(state, 2, [AlgorithmGate("X", 3)])


def test_cycle_argument_checks():
    state = DeviceState.create("shor", 1, p=2, seed=1)
    with pytest.raises(ValueError):
        run_cycle(state, 3)
    with pytest.raises(ValueError):
        run_cycle(state, 0, [AlgorithmGate("H", 0)])
    small = DeviceState.create("steane", 1, seed=1, algorithm_budget=1)
    with pytest.raises(ValueError):
        run_cycle(small, 0, [AlgorithmGate("X"), AlgorithmGate("Z")])
    small.phase = "Algorithm"
    with pytest.raises(RuntimeError):
        run_cycle(small, 0)


def test_seeded_cycles_are_reproducible():
    noise = NoiseModel.depolarizing(0.05)

    def go(seed):
        state = DeviceState.create("steane", 3, p=2, seed=seed)
        return [run_cycle(state, b, noise=noise)[1] for b in (0, 1, 2)]

    assert go(9) == go(9)
    assert go(9) != go(10)


def test_per_pulse_exposure_scales_with_cycle_length():
    state = DeviceState.create("steane", 1, seed=4)
    noise = NoiseModel(1e-6, 0, 0, "per_pulse_exposure")
    _, rep = run_cycle(state, 0, noise=noise)
    px, _, _ = noise.cycle_rates(rep.total_pulses)
    assert px == pytest.approx(1 - (1 - 1e-6) ** rep.total_pulses)


def test_end_cell_io():
    state = DeviceState.create("steane", 2, seed=0)
    end_cell_io(state, "prepare", 1)
    assert end_cell_io(state, "read") == 1
    ones = 0
    shots = 10_000
    for _ in range(shots):
        end_cell_io(state, "prepare", 0)
        qsim.apply_gate(state.block_states[0], qsim.Gate("H", 0))
        ones += end_cell_io(state, "read")
    assert abs(ones - shots / 2) <= 3 * np.sqrt(shots / 4)
    with pytest.raises(ValueError):
        end_cell_io(state, "read", wire=3)
    with pytest.raises(ValueError):
        end_cell_io(state, "read", block=1)
    with pytest.raises(ValueError):
        end_cell_io(state, "prepare", 2)
    with pytest.raises(ValueError):
        end_cell_io(state, "reset")


def test_sweep_rate_zero_and_reproducible():
    rows = monte_carlo_sweep("steane", [0.0, 0.01], trials=20_000, seed=3)
    assert rows[0].failures == 0 and rows[0].logical_error_rate == 0
    again = monte_carlo_sweep("steane", [0.0, 0.01], trials=20_000, seed=3)
    assert [r.failures for r in rows] == [r.failures for r in again]
    with pytest.raises(ValueError):
        monte_carlo_sweep("steane", [0.3])
    with pytest.raises(ValueError):
        monte_carlo_sweep("steane", [0.01], trials=0)
    with pytest.raises(ValueError):
        monte_carlo_sweep("steane", [0.01], engine="tableau")


def test_both_codes_suppress_at_3e3():
    for code in ("steane", "shor"):
        row = monte_carlo_sweep(code, [3e-3], trials=200_000, seed=1)[0]
        assert row.logical_error_rate + 3 * row.stderr < 3e-3


def test_engines_agree():
    p, cycles = 0.06, 2
    for code in ("steane", "shor"):
        sv = monte_carlo_sweep(code, [p], cycles, trials=400, seed=2, engine="statevector")[0]
        fr = monte_carlo_sweep(code, [p], cycles, trials=200_000, seed=2)[0]
        sigma = np.hypot(sv.stderr, fr.stderr)
        assert abs(sv.logical_error_rate - fr.logical_error_rate) < 4 * max(sigma, 0.01)


def test_slope_fit():
    rows = [SweepRow(p, 10**7, int(10**7 * 16 * p * p)) for p in (1e-3, 3e-3, 1e-2)]
    assert fit_loglog_slope(rows) == pytest.approx(2.0, abs=1e-3)
    with pytest.raises(ValueError):
        fit_loglog_slope(rows[:1])
