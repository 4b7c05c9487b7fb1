import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gcqec import labels
from gcqec.core import ChainLayout
from gcqec.labels import (COMPARATOR_STEP_CONSTANT, active_at_level, comparator_program, composite_labels,
                          evaluate, explicit_per_level_labels, hierarchy_labels, supercu_labels)


def hierarchy_oracle(p, L, i):
    if i == 1:
        return p
    return sum(1 for j in range(1, p) if i % L**j == 1)


@pytest.mark.parametrize("p", [2, 3, 4])
@pytest.mark.parametrize("L", [2, 4, 16])
def test_hierarchy_matches_counting_oracle(p, L):
    n = L ** (p - 1)
    plan = hierarchy_labels(p, L, n)
    assert list(plan.labels) == [hierarchy_oracle(p, L, i) for i in range(1, n + 1)]
    assert plan.labels.count(p) == 1
    assert all(0 <= v <= p - 1 for v in plan.labels[1:])
    assert plan.label_bits == math.ceil(math.log2(p + 1))


def test_hierarchy_examples():
    plan = hierarchy_labels(3, 4, 64)
    assert plan.label(5) == 1
    assert plan.label(1) == 3
    assert labels.R(1) == 1 and labels.R(5) == 0
    flat = hierarchy_labels(1, 4, 10)
    assert flat.labels == (1,) + (0,) * 9


def test_activation_levels():
    p, L = 3, 4
    plan = hierarchy_labels(p, L, 256)
    assert all(plan.active(0))
    assert plan.active_stations(2) == [i for i in range(1, 257) if i % 16 == 1]
    assert plan.active_stations(p) == [1]
    assert active_at_level(2, 2) == 1 and active_at_level(1, 2) == 0


@pytest.mark.parametrize("p, L", [(2, 4), (3, 4), (4, 2), (3, 16)])
def test_hierarchy_levels_nest(p, L):
    plan = hierarchy_labels(p, L, L ** (p - 1))
    for b in range(p + 1):
        for b2 in range(b + 1, p + 1):
            assert set(plan.active_stations(b2)) <= set(plan.active_stations(b))


def test_plan_invariant_enforced():
    with pytest.raises(ValueError):
        labels.LabelPlan(2, 4, (2, 2, 0))
    with pytest.raises(ValueError):
        labels.LabelPlan(2, 4, (0, 1))
    with pytest.raises(ValueError):
        hierarchy_labels(0, 4, 4)


def test_comparator_exhaustive_p8():
    prog = comparator_program(8)
    assert prog.ancillas == ("c0", "c1")
    for label in range(9):
        for b in range(9):
            assert evaluate(prog, label, b) == active_at_level(label, b), (label, b)


@given(st.integers(1, 200), st.data())
def test_comparator_matches_for_any_p(p, data):
    prog = comparator_program(p)
    label = data.draw(st.integers(0, p))
    b = data.draw(st.integers(0, p))
    assert evaluate(prog, label, b) == active_at_level(label, b)


def test_comparator_step_count_logarithmic():
    s8, s64 = comparator_program(8).step_count, comparator_program(64).step_count
    assert s8 <= s64
    for p in (2, 3, 8, 64, 1000):
        assert comparator_program(p).step_count <= COMPARATOR_STEP_CONSTANT * math.log2(p)
    assert comparator_program(1).step_count == len(comparator_program(1).steps_for(0))


def test_comparator_errors():
    prog = comparator_program(8)
    with pytest.raises(ValueError):
        prog.steps_for(9)
    with pytest.raises(ValueError):
        evaluate(prog, 16, 2)


def test_comparator_circuit_runs_like_program():
    from gcqec.qsim import StateVector
    prog = comparator_program(5)
    for b in range(6):
        circ = labels.comparator_circuit(prog, b)
        for label in range(6):
            bits = format(label, f"0{prog.n_bits}b") + "0" * (circ.n_wires - prog.n_bits)
            s = StateVector.basis(bits)
            circ.run(s)
            assert round(s.probability_one(circ.n_wires - 1)) == active_at_level(label, b)


BLOCK_PATTERN = "1110011100111000"  # 3 on, 2 off, 3 on, 2 off, 3 on, rest off


def supercu_oracle(p, L, i):
    """Digit-wise recursion: level j counts if i lies in the first L**j stations and
    every lower base-L digit of i-1 falls on an 'on' slot of the block pattern."""
    f = 0
    for j in range(1, p):
        if i <= L**j and all(BLOCK_PATTERN[((i - 1) // L ** (k - 1)) % L] == "1" for k in range(1, j)):
            f += 1
    return p - f


@pytest.mark.parametrize("p, n", [(2, 16), (3, 256), (4, 1024)])
def test_supercu_matches_pattern_oracle(p, n):
    plan = supercu_labels(p, 16, n)
    assert list(plan.labels) == [supercu_oracle(p, 16, i) for i in range(1, n + 1)]


def test_supercu_level_one_offsets():
    plan = supercu_labels(3, 16)
    active = plan.active_stations(1)
    assert active == [1, 2, 3, 6, 7, 8, 11, 12, 13]
    shape = "".join(str(int(i in active)) for i in range(1, 14))
    assert shape == "1110011100111"


def test_supercu_activation_ascends():
    plan = supercu_labels(4, 16, 1024)
    for b in range(4):
        assert set(plan.active_stations(b)) <= set(plan.active_stations(b + 1))
    with pytest.raises(ValueError):
        supercu_labels(1)


def test_r_prime_windows():
    assert [labels.R_prime(x, 1) for x in range(1, 17)] == [int(c) for c in BLOCK_PATTERN]
    assert labels.R_prime(16 + 1, 2) == 1 and labels.R_prime(3 * 16 + 1, 2) == 0


def test_composite_projection():
    a = hierarchy_labels(3, 4, 64)
    b = supercu_labels(3, 4, 64)
    comp = composite_labels(a, b)
    for lvl in range(4):
        assert comp.active(lvl, "a") == a.active(lvl)
        assert comp.active(lvl, "b") == b.active(lvl)
    assert comp.label_bits == a.label_bits + b.label_bits
    assert comp.labels[0] == (a.labels[0], b.labels[0])
    with pytest.raises(ValueError):
        composite_labels(a, hierarchy_labels(3, 4, 16))
    with pytest.raises(ValueError):
        comp.active(1, "c")


@given(st.integers(1, 6), st.integers(1, 40), st.data())
def test_explicit_roundtrip(p, n, data):
    patterns = [data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)) for _ in range(p)]
    plan = explicit_per_level_labels(p, patterns)
    assert plan.label_bits == p and plan.num_ss == n
    for b in range(p):
        assert plan.active(b) == [bool(v) for v in patterns[b]]


def test_explicit_matches_hierarchy_and_errors():
    hier = hierarchy_labels(3, 4, 64)
    plan = explicit_per_level_labels(3, [hier.active(b) for b in range(3)])
    for b in range(3):
        assert plan.active(b) == hier.active(b)
    assert explicit_per_level_labels(1, [[1, 0, 1]]).label_bits == 1
    with pytest.raises(ValueError):
        explicit_per_level_labels(2, [[1, 0]])
    with pytest.raises(ValueError):
        explicit_per_level_labels(2, [[1, 0], [1]])


@pytest.mark.parametrize("p", [2, 3, 8])
def test_label_computation_is_sublinear(p):
    layout = ChainLayout(10, 1)
    cost = max(labels.label_computation_pulses(p, b) for b in range(p + 1))
    # the comparator cost does not depend on N; one CU walking the chain does
    serial = [labels.serial_gate_pulses(blocks, layout.block_stride) for blocks in (1024, 4096, 16384)]
    assert all(cost * 10 < s for s in serial)
    assert serial[1] > 3 * serial[0] and serial[2] > 3 * serial[1]


@given(st.integers(0, 15), st.integers(1, 4))
def test_framed_label_roundtrip(value, n_bits):
    value %= 2**n_bits
    cells = labels.frame_label(value, n_bits)
    assert labels.read_label(cells, n_bits) == value
    assert len(labels.frame_station(value, n_bits)) == len(cells) + 3


def test_read_label_rejects_damage():
    cells = list(labels.frame_label(5, 3))
    cells[3] ^= 1
    with pytest.raises(ValueError):
        labels.read_label(cells, 3)
    with pytest.raises(ValueError):
        labels.read_label(cells[:-1], 3)


def test_plan_cells_layout():
    plan = hierarchy_labels(3, 4, 16)
    cells = labels.plan_cells(plan)
    assert cells.dtype == np.uint8
    per_station = len(labels.frame_station(0, plan.label_bits)) + 1
    assert len(cells) == plan.num_ss * per_station
