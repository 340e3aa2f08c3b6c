"""Compilation of decoding graphs from a measurement circuit.

Two graphs are produced:

* The joint graph used by the turbo-annihilation decoder. Hook faults of
  one ancilla are grouped into a single equalizer node whose internal
  propagation, restricted to the check's support and row-permuted, is the
  canonical lower-triangular accumulator matrix G. The graph then reduces
  to the block structure [[H_Z, 0], [I_n, H_X^T]] with the identity rows
  acting as always-satisfied constraint nodes.

* The circuit-level graph used by the baseline decoders: one column per
  fault class (initial data error, hook entry, CNOT target error), merged
  when two classes produce the same data-error pattern, with zero-syndrome
  columns dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import gf2
from .circuit import MeasurementCircuit, NoiseParams
from .codes import CssCode

LLR_MAX = 30.0


class StructuralError(RuntimeError):
    """The propagation matrix is inconsistent with the schedule/code."""


def xor_combine(a, b):
    """Probability that an odd number of two independent events occur."""
    return a + b - 2.0 * a * b


def prob_to_llr(q: np.ndarray, llr_max: float = LLR_MAX) -> np.ndarray:
    """ln((1-q)/q), clipped to +/- llr_max (q = 0 maps to +llr_max)."""
    q = np.asarray(q, dtype=np.float64)
    with np.errstate(divide="ignore"):
        llr = np.where(q > 0.0, np.log((1.0 - q) / np.maximum(q, 1e-300)), np.inf)
    return np.clip(llr, -llr_max, llr_max)


@dataclass
class PropagationMatrix:
    """Hook propagation patterns: rows = data qubits, columns = (step, check).

    Columns are segment-major: column s * m_x + k is the pattern of a hook
    entering check k at 0-based step s (qubits at slots s..rho-1).
    """

    p_mat: np.ndarray
    column_labels: list[tuple[int, int]]  # (check, step) per column


@dataclass
class EqualizerSpec:
    """One ancilla's trellis: step-to-qubit permutation and fault priors."""

    check: int
    qubit_order: np.ndarray          # (rho,) data qubit per trellis step
    fault_priors: np.ndarray | None = None  # (rho,) LLRs, attached at graph build


def build_p_matrix(circ: MeasurementCircuit) -> PropagationMatrix:
    n, m_x, rho = circ.code.n, circ.m_x, circ.rho
    p_mat = np.zeros((n, m_x * rho), dtype=np.uint8)
    labels: list[tuple[int, int]] = []
    for s in range(rho):
        for k in range(m_x):
            p_mat[circ.schedule[k, s:], s * m_x + k] = 1
            labels.append((k, s))
    return PropagationMatrix(p_mat=p_mat, column_labels=labels)


def canonical_g(rho: int) -> np.ndarray:
    """Accumulator propagation matrix: entry (t, s) = 1 iff s <= t.

    Row t is the error on the qubit touched at slot t; column s is a fault
    entering at step s, so the rows realize the prefix-XOR recursion.
    """
    if rho < 1:
        raise ValueError("rho must be >= 1")
    return np.tril(np.ones((rho, rho), dtype=np.uint8))


def group_segments(
    pm: PropagationMatrix, h_x: np.ndarray, circ: MeasurementCircuit
) -> list[EqualizerSpec]:
    """Group each check's hook columns and find its trellis permutation.

    For check k the rho columns (one per segment) restricted to the check's
    support have distinct row weights 1..rho; sorting rows by increasing
    weight must yield the canonical G. The sorted qubit order is the
    step-to-qubit map pi_k.
    """
    m_x, rho = circ.m_x, circ.rho
    g = canonical_g(rho)
    eqs: list[EqualizerSpec] = []
    for k in range(m_x):
        support = np.flatnonzero(h_x[k])
        cols = [s * m_x + k for s in range(rho)]
        block = pm.p_mat[np.ix_(support, cols)]
        weights = block.sum(axis=1)
        order = np.argsort(weights, kind="stable")
        if sorted(weights.tolist()) != list(range(1, rho + 1)):
            raise StructuralError(f"check {k}: row weights {sorted(weights)} not 1..rho")
        if not (block[order] == g).all():
            raise StructuralError(f"check {k}: permuted restriction is not canonical G")
        eqs.append(EqualizerSpec(check=k, qubit_order=support[order]))
    return eqs


def fault_priors(
    circ: MeasurementCircuit, noise: NoiseParams, llr_max: float = LLR_MAX
) -> tuple[np.ndarray, np.ndarray]:
    """Prior LLRs for equalizer fault inputs and per-qubit direct errors.

    Step 1 of each trellis carries only the ancilla's initial depolarizing
    (prob 2p/3); later steps carry CNOT control faults (prob 8p/15). A data
    qubit's direct-error probability combines its initial depolarizing with
    one CNOT target fault per incident X check.
    """
    p = noise.p
    m_x, rho, n = circ.m_x, circ.rho, circ.code.n
    q_eq = np.full((m_x, rho), 8.0 * p / 15.0)
    q_eq[:, 0] = 2.0 * p / 3.0
    col_weight = circ.code.h_x.sum(axis=0).astype(np.int64)
    q_target = 8.0 * p / 15.0
    q_out = np.empty(n)
    for j in range(n):
        q = 2.0 * p / 3.0
        for _ in range(col_weight[j]):
            q = xor_combine(q, q_target)
        q_out[j] = q
    return prob_to_llr(q_eq, llr_max), prob_to_llr(q_out, llr_max)


@dataclass
class JointGraph:
    """Joint Tanner graph with equalizer nodes, in padded index-array form.

    Node classes: n variable nodes (data qubits), m_z Z-check nodes, n
    constraint nodes (one per variable, always satisfied), and m_x
    equalizer nodes of degree rho. Index arrays are padded with -1 where
    degrees are irregular; masks mark valid cells.
    """

    h_z: np.ndarray            # (m_z, n)
    eq_qubit: np.ndarray       # (m_x, rho) step -> qubit (pi_k)
    eq_prior: np.ndarray       # (m_x, rho) fault LLRs
    var_prior: np.ndarray      # (n,) direct-error LLRs
    left_count: int            # qubits 0..left_count-1 carry the L label

    def __post_init__(self):
        self.h_z = np.asarray(self.h_z, dtype=np.uint8)
        self.eq_qubit = np.asarray(self.eq_qubit, dtype=np.int64)
        self.m_z, self.n = self.h_z.shape
        self.m_x, self.rho = self.eq_qubit.shape

        zc = [np.flatnonzero(r) for r in self.h_z]
        self.dz_max = max(len(v) for v in zc)
        self.zc_vars = np.full((self.m_z, self.dz_max), -1, dtype=np.int64)
        for i, v in enumerate(zc):
            self.zc_vars[i, : len(v)] = v
        self.zc_mask = self.zc_vars >= 0

        vz: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for i, v in enumerate(zc):
            for pos, j in enumerate(v):
                vz[j].append((i, pos))
        self.gz_max = max((len(v) for v in vz), default=0)
        self.gz_max = max(self.gz_max, 1)
        self.vz_check = np.zeros((self.n, self.gz_max), dtype=np.int64)
        self.vz_pos = np.zeros((self.n, self.gz_max), dtype=np.int64)
        self.vz_mask = np.zeros((self.n, self.gz_max), dtype=bool)
        for j, lst in enumerate(vz):
            for d, (i, pos) in enumerate(lst):
                self.vz_check[j, d] = i
                self.vz_pos[j, d] = pos
                self.vz_mask[j, d] = True

        qe: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for k in range(self.m_x):
            for t in range(self.rho):
                qe[self.eq_qubit[k, t]].append((k, t))
        self.ge_max = max((len(v) for v in qe), default=0)
        self.ge_max = max(self.ge_max, 1)
        self.qe_eq = np.zeros((self.n, self.ge_max), dtype=np.int64)
        self.qe_step = np.zeros((self.n, self.ge_max), dtype=np.int64)
        self.qe_mask = np.zeros((self.n, self.ge_max), dtype=bool)
        for j, lst in enumerate(qe):
            for d, (k, t) in enumerate(lst):
                self.qe_eq[j, d] = k
                self.qe_step[j, d] = t
                self.qe_mask[j, d] = True

        self.left_mask = np.arange(self.n) < self.left_count
        self.edge_count = int(self.vz_mask.sum()) + self.n + self.m_x * self.rho

    def constraint_degrees(self) -> np.ndarray:
        """Degree of each constraint node: its variable plus incident equalizers."""
        return 1 + self.qe_mask.sum(axis=1)


def build_joint_graph(
    code: CssCode,
    eqs: list[EqualizerSpec],
    priors: tuple[np.ndarray, np.ndarray],
) -> JointGraph:
    """Assemble the joint graph from equalizer specs and prior LLRs."""
    m_x = code.h_x.shape[0]
    if sorted(e.check for e in eqs) != list(range(m_x)):
        raise StructuralError("need exactly one equalizer per X check")
    eq_prior, var_prior = priors
    order = sorted(eqs, key=lambda e: e.check)
    eq_qubit = np.stack([e.qubit_order for e in order])
    for i, e in enumerate(order):
        if e.fault_priors is None:
            order[i] = replace(e, fault_priors=eq_prior[e.check])
    return JointGraph(
        h_z=code.h_z,
        eq_qubit=eq_qubit,
        eq_prior=np.asarray(eq_prior, dtype=np.float64),
        var_prior=np.asarray(var_prior, dtype=np.float64),
        left_count=code.n // 2,
    )


def compile_joint_graph(circ: MeasurementCircuit, noise: NoiseParams) -> JointGraph:
    """Full pipeline: P matrix, segment grouping, priors, graph assembly."""
    pm = build_p_matrix(circ)
    eqs = group_segments(pm, circ.code.h_x, circ)
    return build_joint_graph(circ.code, eqs, fault_priors(circ, noise))


@dataclass
class CircuitLevelGraph:
    """Baseline decoding graph: merged fault classes against Z checks."""

    h_circ: np.ndarray         # (m_z, C) syndrome signature per fault class
    prior_llrs: np.ndarray     # (C,)
    column_effects: np.ndarray # (C, n) data-error pattern per class


def build_circuit_level_graph(
    circ: MeasurementCircuit, noise: NoiseParams, llr_max: float = LLR_MAX
) -> CircuitLevelGraph:
    """Enumerate fault classes, merge identical syndrome columns, drop invisible ones.

    Classes: initial data error on each qubit, hook entering (check, step),
    CNOT target fault at (check, slot). Classes whose syndrome signatures
    coincide are merged with xor-combined probabilities, keeping the first
    class's effect pattern as the representative (coinciding classes differ
    at most by a stabilizer, so reconstruction stays coset-correct).
    Columns with an all-zero signature are undecodable and removed.
    """
    p = noise.p
    code = circ.code
    n, m_x, rho = code.n, circ.m_x, circ.rho
    pm = build_p_matrix(circ)

    effects: list[np.ndarray] = []
    sigs: list[np.ndarray] = []
    probs: list[float] = []
    index: dict[bytes, int] = {}

    def add(effect: np.ndarray, prob: float) -> None:
        sig = gf2.mul_vec(code.h_z, effect)
        key = sig.tobytes()
        if key in index:
            i = index[key]
            probs[i] = xor_combine(probs[i], prob)
        else:
            index[key] = len(effects)
            effects.append(effect)
            sigs.append(sig)
            probs.append(prob)

    unit = np.eye(n, dtype=np.uint8)
    for j in range(n):
        add(unit[j], 2.0 * p / 3.0)
    for s in range(rho):
        for k in range(m_x):
            add(pm.p_mat[:, s * m_x + k].copy(), 2.0 * p / 3.0 if s == 0 else 8.0 * p / 15.0)
    for k in range(m_x):
        for t in range(rho):
            add(unit[circ.schedule[k, t]], 8.0 * p / 15.0)

    eff = np.stack(effects)
    syn = np.stack(sigs, axis=1)
    keep = syn.any(axis=0)
    return CircuitLevelGraph(
        h_circ=syn[:, keep],
        prior_llrs=prob_to_llr(np.asarray(probs)[keep], llr_max),
        column_effects=eff[keep],
    )


def joint_block_matrix(code: CssCode) -> np.ndarray:
    """The reduced joint-graph biadjacency [[H_Z, 0], [I_n, H_X^T]]."""
    m_z, n = code.h_z.shape
    m_x = code.h_x.shape[0]
    top = np.hstack([code.h_z, np.zeros((m_z, m_x), dtype=np.uint8)])
    bottom = np.hstack([np.eye(n, dtype=np.uint8), code.h_x.T])
    return np.vstack([top, bottom])


def dump_graph_files(circ: MeasurementCircuit, out_dir: str) -> list[str]:
    """Write P, the joint block matrix, and the pi tables for inspection."""
    import csv
    import os

    os.makedirs(out_dir, exist_ok=True)
    pm = build_p_matrix(circ)
    eqs = group_segments(pm, circ.code.h_x, circ)
    paths = []
    p_path = os.path.join(out_dir, "p_matrix.txt")
    gf2.store_matrix(pm.p_mat, p_path)
    paths.append(p_path)
    hj_path = os.path.join(out_dir, "h_joint.txt")
    gf2.store_matrix(joint_block_matrix(circ.code), hj_path)
    paths.append(hj_path)
    pi_path = os.path.join(out_dir, "pi_tables.csv")
    with open(pi_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check", "step", "qubit"])
        for e in eqs:
            for t, q in enumerate(e.qubit_order, start=1):
                writer.writerow([e.check, t, int(q)])
    paths.append(pi_path)
    return paths
