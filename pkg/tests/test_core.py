import math

import pytest
from hypothesis import given, strategies as st

from gcqec import core
from gcqec.core import (ChainLayout, CostModel, Kind, PulseInstruction, PulseProgram, instruction_cost,
                        subcomputer_capacity, subcomputer_cell_cost, total_cells)


@pytest.mark.parametrize("layout, cells", [
    (ChainLayout(10, 1, ss_cells=0), 80),
    (ChainLayout(16, 1, ss_cells=0), 128),
    (ChainLayout(1, 1, cells_per_qubit=1, ss_cells=0), 1),
])
def test_total_cells_examples(layout, cells):
    assert total_cells(layout) == cells


@given(st.integers(1, 40), st.integers(1, 64), st.integers(1, 12), st.integers(0, 30))
def test_total_cells_formula(bsq, m, cpq, ss):
    layout = ChainLayout(bsq, m, cpq, ss)
    assert total_cells(layout) == m * (bsq * cpq + ss)


def test_layout_defaults_and_validation():
    assert ChainLayout(10).cells_per_qubit == 8
    with pytest.raises(ValueError):
        ChainLayout(0)
    with pytest.raises(ValueError):
        ChainLayout(10, ss_cells=-1)


def test_ss_geometry():
    layout = ChainLayout(10, 3, ss_cells=10)
    assert layout.ss_qubit_span == 2
    assert layout.block_stride == 12
    assert [layout.ss_position(k) for k in range(3)] == [10, 22, 34]
    assert layout.with_blocks(5).num_blocks == 5


def test_subcomputer_cost_examples():
    assert subcomputer_cell_cost(900) == 90
    assert subcomputer_cell_cost(1) == 10
    assert subcomputer_capacity(80_000, 900) == 888


@given(st.integers(1, 10**6), st.integers(0, 8))
def test_subcomputer_cost_formula(n, r):
    assert subcomputer_cell_cost(n, r) == 8 * (math.ceil(math.log2(n)) + r) + 10


def test_cost_model_defaults():
    m = CostModel()
    assert m.one_qubit_op_pulses + m.one_qubit_restore_pulses == 15
    assert m.emit_pulses == m.absorb_pulses == 10
    assert m.approach(3) == 8
    assert m.approach(0) == 2
    assert CostModel(absorb_pulses=7).emit_pulses == 7
    with pytest.raises(ValueError):
        CostModel(target_op_pulses=-1)


def test_instruction_costs():
    m = CostModel()
    gate = PulseProgram.build([core.one_qubit_gate(2, "H"), core.restore("one_qubit", 2)], m)
    assert gate.total_pulses == 15
    assert instruction_cost(core.approach(1, 4), m) == 8
    assert instruction_cost(core.approach(4, 4), m) == 2
    assert instruction_cost(core.erase(3), m) == 8
    assert instruction_cost(core.absorb(0), m) == instruction_cost(core.emit(0), m)
    assert instruction_cost(core.label_compute(2), m) == 0


def test_instruction_validation():
    with pytest.raises(ValueError):
        PulseInstruction("teleport", (1,))
    with pytest.raises(ValueError):
        PulseInstruction(Kind.APPROACH, (1,))
    with pytest.raises(ValueError):
        core.restore("sideways", 1)
    with pytest.raises(ValueError):
        PulseInstruction(Kind.LABEL_COMPUTE)


instr_st = st.one_of(
    st.builds(core.approach, st.integers(0, 30), st.integers(0, 30)),
    st.builds(core.one_qubit_gate, st.integers(0, 30), st.sampled_from(["X", "H", "Z"])),
    st.builds(core.control_encode, st.integers(0, 30)),
    st.builds(core.target_gate, st.integers(0, 30), st.sampled_from(["X", "Z"])),
    st.builds(core.restore, st.sampled_from(["one_qubit", "target", "control"]), st.integers(0, 30)),
    st.builds(core.absorb, st.integers(0, 5)),
    st.builds(core.emit, st.integers(0, 5)),
    st.builds(core.stabilize),
    st.builds(core.erase, st.integers(0, 30)),
)


@given(st.lists(instr_st, max_size=30), st.lists(instr_st, max_size=30))
def test_program_cost_additivity(a, b):
    m = CostModel()
    pa, pb = PulseProgram.build(a, m), PulseProgram.build(b, m)
    joined = PulseProgram.build(a + b, m)
    assert joined.total_pulses == (pa + pb).total_pulses == pa.total_pulses + pb.total_pulses
    assert joined.total_pulses == sum(instruction_cost(i, m) for i in a + b)


@given(st.lists(instr_st, max_size=30))
def test_reversal_keeps_cost(instrs):
    m = CostModel()
    prog = PulseProgram.build(instrs, m)
    rev = prog.reversed()
    assert rev.total_pulses == prog.total_pulses
    # the reversed program priced from scratch agrees with the carried costs
    assert PulseProgram.build(rev.instructions, m).total_pulses == prog.total_pulses
    assert rev.reversed() == prog


def test_absorb_emit_reversal():
    m = CostModel()
    prog = PulseProgram.build([core.approach(0, 10), core.absorb(0)], m)
    rev = prog.reversed()
    assert [i.kind for i in rev.instructions] == [Kind.EMIT, Kind.APPROACH]
    assert rev.instructions[1].qubits == (10, 0)
    assert "ABSORB 0" in prog.to_text()


def test_config_roundtrip(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("layout:\n  ss_cells: 12\ncost_model:\n  absorb_pulses: 14\n"
                    "noise:\n  p_x: 0.01\nalgorithm_budget: 3\n")
    cfg = core.load_config(path)
    assert cfg.layout == {"ss_cells": 12}
    assert cfg.cost_model.absorb_pulses == 14 and cfg.cost_model.emit_pulses == 14
    assert cfg.noise.p_x == 0.01
    assert cfg.algorithm_budget == 3
    again = tmp_path / "again.yaml"
    again.write_text(core.dump_config(cfg))
    assert core.load_config(again) == cfg


def test_config_defaults_and_errors(tmp_path):
    assert core.load_config(None) == core.Config()
    bad = tmp_path / "bad.yaml"
    bad.write_text("pulses: 3\n")
    with pytest.raises(ValueError):
        core.load_config(bad)
    bad.write_text("cost_model:\n  warp: 3\n")
    with pytest.raises(TypeError):
        core.load_config(bad)
