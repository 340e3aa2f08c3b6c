"""Propagation matrix, segment grouping, priors, and graph assembly."""

import numpy as np
import pytest

from tadecode import gf2
from tadecode.circuit import (FaultSet, MeasurementCircuit, NoiseParams, build_circuit,
                              propagate, sample_faults, shuffle_schedule, trial_rng)
from tadecode.codes import CssCode, get_code
from tadecode.jointgraph import (JointGraph, StructuralError, build_circuit_level_graph,
                                 build_joint_graph, build_p_matrix, canonical_g,
                                 compile_joint_graph, dump_graph_files, fault_priors,
                                 group_segments, joint_block_matrix, prob_to_llr,
                                 xor_combine)

# Published propagation matrix of the example code (frozen oracle copy).
P_EXAMPLE = np.array([
    [0,0,1,0,1, 0,0,1,0,1, 0,0,0,0,1, 0,0,0,0,1],
    [1,0,0,1,0, 1,0,0,1,0, 1,0,0,0,0, 1,0,0,0,0],
    [0,1,0,0,1, 0,1,0,0,1, 0,1,0,0,0, 0,1,0,0,0],
    [1,0,1,0,0, 1,0,1,0,0, 0,0,1,0,0, 0,0,1,0,0],
    [0,1,0,1,0, 0,1,0,1,0, 0,0,0,1,0, 0,0,0,1,0],
    [1,0,0,1,0, 0,0,0,1,0, 0,0,0,1,0, 0,0,0,0,0],
    [0,1,0,0,1, 0,0,0,0,1, 0,0,0,0,1, 0,0,0,0,0],
    [1,0,1,0,0, 1,0,0,0,0, 1,0,0,0,0, 0,0,0,0,0],
    [0,1,0,1,0, 0,1,0,0,0, 0,1,0,0,0, 0,0,0,0,0],
    [0,0,1,0,1, 0,0,1,0,0, 0,0,1,0,0, 0,0,0,0,0],
], dtype=np.uint8)


@pytest.fixture(scope="module")
def example():
    code = get_code("example-n5")
    return code, build_circuit(code)


def test_p_matrix_golden(example):
    _, circ = example
    pm = build_p_matrix(circ)
    assert pm.p_mat.shape == (10, 20)
    assert (pm.p_mat == P_EXAMPLE).all()
    assert pm.column_labels[0] == (0, 0)
    assert pm.column_labels[5] == (0, 1)


def test_first_segment_is_hx_transpose(example):
    code, circ = example
    pm = build_p_matrix(circ)
    assert (pm.p_mat[:, : circ.m_x] == code.h_x.T).all()


def test_last_segment_weight_one(example):
    _, circ = example
    pm = build_p_matrix(circ)
    last = pm.p_mat[:, -circ.m_x:]
    assert (last.sum(axis=0) == 1).all()


def test_nested_supports_strict(example):
    _, circ = example
    pm = build_p_matrix(circ)
    m = circ.m_x
    for k in range(m):
        for s in range(circ.rho - 1):
            cur = pm.p_mat[:, s * m + k].astype(bool)
            nxt = pm.p_mat[:, (s + 1) * m + k].astype(bool)
            assert (nxt & ~cur).sum() == 0
            assert nxt.sum() < cur.sum()


def test_canonical_g():
    assert (canonical_g(1) == np.array([[1]])).all()
    g4 = canonical_g(4)
    assert (g4.sum(axis=1) == np.array([1, 2, 3, 4])).all()
    for t in range(3):
        assert not (g4[t] & ~g4[t + 1]).any()   # nested rows
    # prefix-XOR recursion: x @ G^T accumulates the faults
    x = np.array([1, 1, 0, 0], dtype=np.uint8)
    d = (x @ g4.T) % 2
    assert (d == np.array([1, 0, 0, 0])).all()
    with pytest.raises(ValueError):
        canonical_g(0)


def test_group_segments_single_check_toy():
    # One check over three qubits scheduled (q3, q1, q2): the permutation is
    # exactly the schedule order.
    h_x = np.array([[0, 1, 1, 1]], dtype=np.uint8)
    h_z = np.zeros((1, 4), dtype=np.uint8)
    code = CssCode(n=4, h_x=h_x, h_z=h_z, gamma=1, rho=3, k=0)
    circ = MeasurementCircuit(code=code, schedule=np.array([[3, 1, 2]]))
    pm = build_p_matrix(circ)
    eqs = group_segments(pm, h_x, circ)
    assert eqs[0].qubit_order.tolist() == [3, 1, 2]


def test_group_segments_matches_schedule(example):
    code, circ = example
    pm = build_p_matrix(circ)
    eqs = group_segments(pm, code.h_x, circ)
    for eq in eqs:
        assert (eq.qubit_order == circ.schedule[eq.check]).all()


def test_group_segments_random_schedules():
    rng = np.random.default_rng(8)
    for name in ("example-n5", "bb-90-8-10"):
        code = get_code(name)
        circ = build_circuit(code)
        for _ in range(3):
            variant = shuffle_schedule(circ, rng)
            pm = build_p_matrix(variant)
            eqs = group_segments(pm, code.h_x, variant)
            for eq in eqs:
                assert (eq.qubit_order == variant.schedule[eq.check]).all()


def test_group_segments_detects_corruption(example):
    code, circ = example
    pm = build_p_matrix(circ)
    pm.p_mat = pm.p_mat.copy()
    pm.p_mat[circ.schedule[0, 2], 2 * circ.m_x + 0] ^= 1
    with pytest.raises(StructuralError):
        group_segments(pm, code.h_x, circ)


def test_fault_priors_values(example):
    _, circ = example
    eq_prior, var_prior = fault_priors(circ, NoiseParams(0.15))
    # step 1 carries the ancilla depolarizing: q = 2p/3 = 0.1 -> ln 9
    assert eq_prior[:, 0] == pytest.approx(np.log(9.0), abs=1e-12)
    # later steps carry the CNOT control branch: q = 8p/15 = 0.08
    assert eq_prior[:, 1:] == pytest.approx(np.log(0.92 / 0.08), abs=1e-12)
    # variable prior: 2p/3 xor-combined with gamma=2 events of 0.08
    q = 2 * 0.15 / 3
    for _ in range(2):
        q = xor_combine(q, 0.08)
    assert var_prior == pytest.approx(np.log((1 - q) / q), abs=1e-12)


def test_fault_priors_p_zero_clipped(example):
    _, circ = example
    eq_prior, var_prior = fault_priors(circ, NoiseParams(0.0))
    assert (eq_prior == 30.0).all()
    assert (var_prior == 30.0).all()


def test_prob_to_llr_clipping():
    assert prob_to_llr(np.array([0.0])) == pytest.approx(30.0)
    assert prob_to_llr(np.array([0.5])) == pytest.approx(0.0)


def test_joint_graph_structure(example):
    code, circ = example
    graph = compile_joint_graph(circ, NoiseParams(0.01))
    assert (graph.constraint_degrees() == 3).all()   # 1 variable + gamma=2
    assert graph.eq_qubit.shape == (5, 4)
    # variable degree = gamma + 1, no degree-1 variables
    var_deg = graph.vz_mask.sum(axis=1) + 1
    assert (var_deg == code.gamma + 1).all()
    # distinct edges: variable side + constraint-equalizer side
    assert graph.edge_count == 50


def test_joint_graph_structure_weight6():
    code = get_code("bb-90-8-10")
    circ = build_circuit(code)
    graph = compile_joint_graph(circ, NoiseParams(0.01))
    assert (graph.constraint_degrees() == 4).all()
    assert graph.eq_qubit.shape == (45, 6)
    assert (graph.vz_mask.sum(axis=1) == 3).all()


def test_joint_graph_needs_all_equalizers(example):
    code, circ = example
    pm = build_p_matrix(circ)
    eqs = group_segments(pm, code.h_x, circ)
    with pytest.raises(StructuralError):
        build_joint_graph(code, eqs[:-1], fault_priors(circ, NoiseParams(0.01)))


def test_p_reconstruction_property(example):
    # propagate() agrees with P applied to the stacked hook indicators,
    # XORed with the direct fault classes.
    code, circ = example
    pm = build_p_matrix(circ)
    m = circ.m_x
    for trial in range(10_000):
        f = sample_faults(circ, NoiseParams(0.08), trial_rng(101, trial))
        stacked = np.zeros(m * circ.rho, dtype=np.uint8)
        for k in range(m):
            for s in range(circ.rho):
                stacked[s * m + k] = f.ancilla_hook[k, s]
        via_p = gf2.mul_vec(pm.p_mat, stacked) ^ f.data_init ^ f.direct_cnot
        assert (via_p == propagate(circ, f)).all()


def test_joint_block_matrix_shape(example):
    code, _ = example
    hj = joint_block_matrix(code)
    assert hj.shape == (5 + 10, 10 + 5)
    assert (hj[:5, :10] == code.h_z).all()
    assert not hj[:5, 10:].any()
    assert (hj[5:, 10:] == code.h_x.T).all()


def test_circuit_level_graph_example(example):
    code, circ = example
    g = build_circuit_level_graph(circ, NoiseParams(0.05))
    # regression constant: 10 merged visible fault classes for this code
    assert g.h_circ.shape == (5, 10)
    assert g.column_effects.shape == (10, 10)
    # every column is the syndrome of its effect
    for c in range(g.h_circ.shape[1]):
        assert (gf2.mul_vec(code.h_z, g.column_effects[c]) == g.h_circ[:, c]).all()
    assert g.h_circ.any(axis=0).all()   # no invisible columns survive


def test_circuit_level_merging_combines_probabilities(example):
    # An initial data error and a CNOT-target error on the same qubit give
    # identical syndromes, so their probabilities xor-combine; the merged
    # prior is weaker than the initial-depolarizing prior alone.
    code, circ = example
    p = 0.05
    g = build_circuit_level_graph(circ, NoiseParams(p))
    q_single = 2 * p / 3
    llr_single = np.log((1 - q_single) / q_single)
    target = gf2.mul_vec(code.h_z, np.eye(10, dtype=np.uint8)[0])
    cols = [c for c in range(g.h_circ.shape[1]) if (g.h_circ[:, c] == target).all()]
    assert len(cols) == 1
    assert g.prior_llrs[cols[0]] < llr_single - 1e-9


def test_circuit_level_graph_drops_step1_hooks(example):
    # A step-1 hook flips a full stabilizer row: zero syndrome, dropped.
    code, circ = example
    f = FaultSet.empty(circ).inject_hook(0, 0)
    e = propagate(circ, f)
    assert not gf2.mul_vec(code.h_z, e).any()
    g = build_circuit_level_graph(circ, NoiseParams(0.05))
    for c in range(g.column_effects.shape[0]):
        assert not (g.column_effects[c] == e).all()


def test_dump_graph_files(example, tmp_path):
    _, circ = example
    paths = dump_graph_files(circ, str(tmp_path))
    assert len(paths) == 3
    pm = gf2.load_matrix(paths[0])
    assert (pm == P_EXAMPLE).all()
    hj = gf2.load_matrix(paths[1])
    assert hj.shape == (15, 15)
    lines = open(paths[2]).read().strip().splitlines()
    assert lines[0] == "check,step,qubit"
    assert len(lines) == 1 + 5 * 4
