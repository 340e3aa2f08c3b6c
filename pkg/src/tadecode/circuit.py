"""Noisy X-stabilizer measurement round: schedule, fault sampling, propagation.

Models one round of noisy X-stabilizer measurements followed by perfect
Z-stabilizer measurements. Only the X frame is tracked: Y counts as X, and
Z components are discarded because they never enter the Z syndrome.

Fault classes per trial, each component failing independently:
  * initial depolarizing on each data qubit   -> X frame with prob 2p/3,
  * initial depolarizing on each X ancilla    -> hook entering at step 1,
  * each scheduled CNOT faulty with prob p, drawing one of the 15
    non-identity two-qubit Paulis uniformly: a control component in {X, Y}
    (8 of 15 draws) starts a hook at the next step; a target component in
    {X, Y} flips the target data qubit directly.

A hook starting after the last CNOT of a check is undetectable and is
dropped at sampling time.

Randomness: a trial's generator is Philox keyed with (seed XOR trial_index),
a counter-based splittable scheme, so any trial can be regenerated in
isolation. Within a trial the draw order is fixed: data-qubit uniforms (n),
ancilla uniforms (m_x), CNOT fault uniforms (m_x, rho), then Pauli indices
(m_x, rho) in 0..14.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import CssCode
from . import gf2


class ScheduleError(ValueError):
    """A CNOT schedule is inconsistent with the code's X checks."""


@dataclass(frozen=True)
class NoiseParams:
    """Per-component fault probability."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise ValueError(f"fault probability must be in [0, 0.5], got {self.p}")


@dataclass
class MeasurementCircuit:
    """CNOT schedule for one noisy X-stabilizer round.

    ``schedule[c, t]`` is the data qubit hit by check c's CNOT in time slot
    t (0-based). Every check has exactly rho slots covering exactly the
    support of its h_x row.
    """

    code: CssCode
    schedule: np.ndarray

    def __post_init__(self):
        self.schedule = np.asarray(self.schedule, dtype=np.int64)
        m_x, rho = self.code.h_x.shape[0], self.code.rho
        if self.schedule.shape != (m_x, rho):
            raise ScheduleError(
                f"schedule shape {self.schedule.shape} != ({m_x}, {rho})"
            )
        for c in range(m_x):
            if set(self.schedule[c].tolist()) != set(np.flatnonzero(self.code.h_x[c]).tolist()):
                raise ScheduleError(f"slots of check {c} do not cover its support")

    @property
    def m_x(self) -> int:
        return self.schedule.shape[0]

    @property
    def rho(self) -> int:
        return self.schedule.shape[1]


@dataclass
class FaultSet:
    """Sampled (or injected) X-frame faults for one trial."""

    data_init: np.ndarray    # (n,)       initial data-qubit X frame
    ancilla_hook: np.ndarray # (m_x, rho) bit t: hook enters the check trellis at step t
    direct_cnot: np.ndarray  # (n,)       CNOT target-fault X frame

    @classmethod
    def empty(cls, circ: MeasurementCircuit) -> "FaultSet":
        return cls(
            data_init=np.zeros(circ.code.n, dtype=np.uint8),
            ancilla_hook=np.zeros((circ.m_x, circ.rho), dtype=np.uint8),
            direct_cnot=np.zeros(circ.code.n, dtype=np.uint8),
        )

    def inject_hook(self, check: int, step: int) -> "FaultSet":
        """Flip the hook bit entering `check`'s trellis at 0-based `step`."""
        self.ancilla_hook[check, step] ^= 1
        return self

    def inject_data_error(self, qubit: int) -> "FaultSet":
        self.data_init[qubit] ^= 1
        return self

    def is_zero(self) -> bool:
        return not (
            self.data_init.any() or self.ancilla_hook.any() or self.direct_cnot.any()
        )


def build_circuit(code: CssCode, slot_terms: list[tuple[str, int]] | None = None) -> MeasurementCircuit:
    """Build the default measurement schedule for a BB code.

    The default slot order alternates between the two polynomial blocks
    starting with b: b_1, a_1, b_2, a_2, ... (terms in the order listed in
    the code's spec). ``slot_terms`` overrides it with an explicit sequence
    of ("a"|"b", term_index) pairs covering every term exactly once.
    """
    spec = code.spec
    if spec is None:
        raise ScheduleError("build_circuit needs a code built from a BBSpec")
    if slot_terms is None:
        slot_terms = []
        for i in range(max(len(spec.a_terms), len(spec.b_terms))):
            if i < len(spec.b_terms):
                slot_terms.append(("b", i))
            if i < len(spec.a_terms):
                slot_terms.append(("a", i))
    used = {("a", i) for i in range(len(spec.a_terms))} | {
        ("b", i) for i in range(len(spec.b_terms))
    }
    if set(slot_terms) != used or len(slot_terms) != len(used):
        raise ScheduleError("slot_terms must cover each polynomial term exactly once")

    m = spec.ell * spec.em
    checks = np.arange(m)
    i, j = checks // spec.em, checks % spec.em
    cols = []
    for block, idx in slot_terms:
        px, py = spec.a_terms[idx] if block == "a" else spec.b_terms[idx]
        qubit = ((i + px) % spec.ell) * spec.em + (j + py) % spec.em
        cols.append(qubit if block == "a" else qubit + m)
    return MeasurementCircuit(code=code, schedule=np.stack(cols, axis=1))


def shuffle_schedule(circ: MeasurementCircuit, rng: np.random.Generator) -> MeasurementCircuit:
    """Independently permute each check's slot order (for schedule fuzzing)."""
    sched = circ.schedule.copy()
    for c in range(circ.m_x):
        sched[c] = sched[c][rng.permutation(circ.rho)]
    return MeasurementCircuit(code=circ.code, schedule=sched)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based per-trial stream: Philox keyed with seed XOR trial."""
    key = (int(seed) ^ int(trial)) & 0xFFFFFFFFFFFFFFFF
    return np.random.Generator(np.random.Philox(key=key))


def sample_faults(
    circ: MeasurementCircuit, noise: NoiseParams, rng: np.random.Generator
) -> FaultSet:
    """Draw one trial's fault set (see module docstring for the draw order)."""
    p = noise.p
    n, m_x, rho = circ.code.n, circ.m_x, circ.rho
    data_init = (rng.random(n) < 2.0 * p / 3.0).astype(np.uint8)
    hook = np.zeros((m_x, rho), dtype=np.uint8)
    hook[:, 0] = rng.random(m_x) < 2.0 * p / 3.0
    occur = rng.random((m_x, rho)) < p
    pauli = rng.integers(0, 15, size=(m_x, rho))
    # Pauli index -> (control, target) in {I, X, Y, Z}^2 \ {II}, row-major.
    ctrl = (pauli + 1) // 4
    targ = (pauli + 1) % 4
    ctrl_flip = occur & ((ctrl == 1) | (ctrl == 2))
    targ_flip = occur & ((targ == 1) | (targ == 2))
    # Control fault after slot t starts a hook at step t+1; after the last
    # CNOT it is undetectable and dropped.
    hook[:, 1:] ^= ctrl_flip[:, : rho - 1].astype(np.uint8)
    direct = np.zeros(n, dtype=np.uint8)
    if targ_flip.any():
        np.bitwise_xor.at(direct, circ.schedule[targ_flip], 1)
    return FaultSet(data_init=data_init, ancilla_hook=hook, direct_cnot=direct)


def sample_uniform_hooks(
    circ: MeasurementCircuit, p: float, rng: np.random.Generator
) -> FaultSet:
    """Ancilla-only faults at a uniform rate p per trellis step.

    This is the idealized memory-channel regime used by the hook-marginal
    statistics; production sampling (:func:`sample_faults`) has different
    per-step rates.
    """
    f = FaultSet.empty(circ)
    f.ancilla_hook[:] = rng.random((circ.m_x, circ.rho)) < p
    return f


def propagate(circ: MeasurementCircuit, f: FaultSet) -> np.ndarray:
    """Total X error on data qubits from a fault set.

    A hook entering check c at step t flips the qubits at slots t..rho-1;
    equivalently the slot-t qubit flips iff the prefix XOR of that check's
    hook bits through t is 1.
    """
    e = f.data_init ^ f.direct_cnot
    if f.ancilla_hook.any():
        cum = np.bitwise_xor.accumulate(f.ancilla_hook, axis=1)
        mask = cum.astype(bool)
        np.bitwise_xor.at(e, circ.schedule[mask], 1)
    return e


def syndrome(code: CssCode, e: np.ndarray) -> np.ndarray:
    """Perfect Z-stabilizer syndrome s = h_z @ e over GF(2)."""
    return gf2.mul_vec(code.h_z, e)


def hook_flip_probability(p: float, t: int) -> float:
    """Marginal flip probability of the slot-t qubit (1-based) of one check
    under i.i.d. per-step hook rate p: (1 - (1 - 2p)^t) / 2."""
    return (1.0 - (1.0 - 2.0 * p) ** t) / 2.0


def simulate_hook_marginals(
    p: float, rho: int, trials: int, rng: np.random.Generator, batch: int = 1 << 16
) -> np.ndarray:
    """Empirical per-slot flip rates of the uniform-rate hook channel.

    Samples `trials` i.i.d. hook streams of length rho at rate p and
    accumulates the prefix-XOR flip counts per slot.
    """
    counts = np.zeros(rho, dtype=np.int64)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        bits = rng.random((b, rho)) < p
        flips = np.bitwise_xor.accumulate(bits, axis=1)
        counts += flips.sum(axis=0)
        done += b
    return counts / float(trials)
