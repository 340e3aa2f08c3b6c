"""Turbo-annihilation message passing on the joint Tanner graph.

Node update rules:
  * Z checks and constraint nodes run normalized min-sum (factor beta);
    constraint nodes behave as always-satisfied checks (s = 0).
  * Variable nodes sum incoming check messages plus, by default, a direct
    fault prior (a strict mode with no priors exists for ablation), with
    the past-influence (MS-PI) correction applied on one side of the code:
    a message whose sign flipped relative to the previous iteration has the
    previous message added back.
  * Equalizer nodes run the max-log BCJR estimator over their trellis and
    return extrinsic information.

Two schedules are provided. The layered schedule walks the graph
equalizers -> constraints -> variables -> Z checks -> variables ->
constraints -> equalizers within each iteration, with later stages using
messages produced earlier in the same iteration. The flooding schedule
updates every node class simultaneously from the previous iteration's
messages. Decoding stops when the hard decision satisfies the syndrome.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import trellis
from .jointgraph import JointGraph


@dataclass
class DecoderConfig:
    max_iters: int = 300
    beta: float = 0.875
    schedule: str = "layered"          # "layered" | "flooding"
    mspi_side: str = "L"               # "L" | "R" | "off"
    llr_max: float = 30.0
    use_priors: bool = True            # False = strict no-prior variable rule

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.schedule not in ("layered", "flooding"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.mspi_side not in ("L", "R", "off"):
            raise ValueError(f"unknown MS-PI side {self.mspi_side!r}")


@dataclass
class DecodeResult:
    estimate: np.ndarray
    converged: bool
    iters_used: int
    decoder_id: int = 0       # diversity member that produced the result
    total_iters: int = 0      # iterations spent across attempted members
    ops: int = 0              # instrumented operation count

    def __post_init__(self):
        if self.total_iters == 0:
            self.total_iters = self.iters_used


def _minsum(msgs: np.ndarray, mask: np.ndarray, sign_flip: np.ndarray,
            beta: float, llr_max: float) -> np.ndarray:
    """Exclude-self normalized min-sum on a padded (rows, deg) array.

    sign_flip is the per-row (1 - 2s) syndrome factor. Padded cells must be
    flagged False in mask; outputs there are zero. sgn(0) counts as +1.
    """
    sgn = np.where(msgs < 0.0, -1.0, 1.0)
    sgn = np.where(mask, sgn, 1.0)
    mag = np.where(mask, np.abs(msgs), np.inf)
    rows = np.arange(msgs.shape[0])
    am = np.argmin(mag, axis=1)
    min1 = mag[rows, am]
    mag2 = mag.copy()
    mag2[rows, am] = np.inf
    min2 = mag2.min(axis=1)
    total_sign = sgn.prod(axis=1) * sign_flip
    mins = np.where(
        np.arange(msgs.shape[1])[None, :] == am[:, None], min2[:, None], min1[:, None]
    )
    out = total_sign[:, None] * sgn * np.minimum(beta * mins, llr_max)
    return np.where(mask, out, 0.0)


class TaDecoder:
    """One decoder instance owning its message state exclusively.

    The graph and priors are shared read-only; several instances (the
    diversity members, or per-worker decoders) can run concurrently.
    """

    def __init__(self, graph: JointGraph, cfg: DecoderConfig | None = None):
        self.g = graph
        self.cfg = cfg or DecoderConfig()
        g = graph
        self._prior = g.var_prior if self.cfg.use_priors else np.zeros(g.n)
        if self.cfg.mspi_side == "L":
            self._pi_qubits = g.left_mask
        elif self.cfg.mspi_side == "R":
            self._pi_qubits = ~g.left_mask
        else:
            self._pi_qubits = np.zeros(g.n, dtype=bool)
        # Safe gather indices for padded cells (masked out after gathering).
        self._vz_check = np.where(g.vz_mask, g.vz_check, 0)
        self._vz_pos = np.where(g.vz_mask, g.vz_pos, 0)
        self._qe_eq = np.where(g.qe_mask, g.qe_eq, 0)
        self._qe_step = np.where(g.qe_mask, g.qe_step, 0)
        self._e_vz = int(g.vz_mask.sum())
        self._e_ce = g.m_x * g.rho
        self._syn_idx = np.where(g.zc_mask, g.zc_vars, g.n)
        self.reset()

    def reset(self) -> None:
        g = self.g
        self.v2z = np.zeros((g.m_z, g.dz_max))
        self.z2v = np.zeros((g.m_z, g.dz_max))
        self.c2v_var = np.zeros(g.n)
        self.v2c_var = np.zeros(g.n)
        self.c2e = np.zeros((g.m_x, g.rho))
        self.e2c = np.zeros((g.m_x, g.rho))
        self.prev_v2z = np.zeros((g.n, g.gz_max))   # variable-major history
        self.prev_v2c_var = np.zeros(g.n)
        self.ops = 0

    # -- node updates -------------------------------------------------------

    def _equalizer_update(self) -> None:
        post = trellis.bcjr(self.c2e, self.g.eq_prior, llr_max=self.cfg.llr_max)
        self.e2c = trellis.extrinsic(post, self.c2e, llr_max=self.cfg.llr_max)
        self.ops += 9 * self.g.m_x * self.g.rho

    def _gather_sigma(self) -> np.ndarray:
        return np.where(self.g.qe_mask, self.e2c[self._qe_eq, self._qe_step], 0.0)

    def _gather_z2v(self) -> np.ndarray:
        return np.where(self.g.vz_mask, self.z2v[self._vz_check, self._vz_pos], 0.0)

    def _constraint_update(self, sigma: np.ndarray, nu: np.ndarray,
                           want_var: bool, want_eq: bool) -> None:
        """Min-sum at constraint nodes over {variable message} + {sigma}."""
        g = self.g
        stack = np.concatenate([nu[:, None], sigma], axis=1)
        mask = np.concatenate([np.ones((g.n, 1), dtype=bool), g.qe_mask], axis=1)
        out = _minsum(stack, mask, np.ones(g.n), self.cfg.beta, self.cfg.llr_max)
        if want_var:
            self.c2v_var = out[:, 0]
            self.ops += g.n
        if want_eq:
            valid = g.qe_mask
            self.c2e[self._qe_eq[valid], self._qe_step[valid]] = out[:, 1:][valid]
            self.ops += self._e_ce

    def _zcheck_update(self, s: np.ndarray) -> None:
        g = self.g
        self.z2v = _minsum(self.v2z, g.zc_mask, 1.0 - 2.0 * s.astype(np.float64),
                           self.cfg.beta, self.cfg.llr_max)
        self.ops += self._e_vz

    def _apply_mspi(self, raw: np.ndarray, prev: np.ndarray,
                    qubit_mask: np.ndarray) -> np.ndarray:
        s_new = np.where(raw < 0.0, -1.0, 1.0)
        s_old = np.where(prev < 0.0, -1.0, 1.0)
        flip = (s_new != s_old) & qubit_mask
        return np.where(flip, raw + prev, raw)

    def _var_to_z(self, z2v_at_var: np.ndarray, c2v_var: np.ndarray) -> None:
        g = self.g
        total = self._prior + c2v_var + z2v_at_var.sum(axis=1)
        raw = total[:, None] - z2v_at_var
        raw = self._apply_mspi(raw, self.prev_v2z, self._pi_qubits[:, None])
        sent = np.clip(raw, -self.cfg.llr_max, self.cfg.llr_max)
        self.prev_v2z = np.where(g.vz_mask, sent, 0.0)
        valid = g.vz_mask
        self.v2z[self._vz_check[valid], self._vz_pos[valid]] = sent[valid]
        self.ops += self._e_vz

    def _var_to_constraint(self, z2v_at_var: np.ndarray) -> None:
        raw = self._prior + z2v_at_var.sum(axis=1)
        raw = self._apply_mspi(raw, self.prev_v2c_var, self._pi_qubits)
        sent = np.clip(raw, -self.cfg.llr_max, self.cfg.llr_max)
        self.prev_v2c_var = sent
        self.v2c_var = sent
        self.ops += self.g.n

    # -- schedules ----------------------------------------------------------

    def _iterate_layered(self, s: np.ndarray) -> None:
        self._equalizer_update()
        sigma = self._gather_sigma()
        self._constraint_update(sigma, self.v2c_var, want_var=True, want_eq=False)
        self._var_to_z(self._gather_z2v(), self.c2v_var)
        self._zcheck_update(s)
        self._var_to_constraint(self._gather_z2v())
        self._constraint_update(sigma, self.v2c_var, want_var=False, want_eq=True)

    def _iterate_flooding(self, s: np.ndarray) -> None:
        # Conventional parallel schedule: every check-type node (Z checks,
        # constraints) fires from the previous iteration's variable-side
        # messages, then every variable-side node (variables, equalizers)
        # fires from the fresh check outputs.
        sigma_old = self._gather_sigma()
        v2c_var_old = self.v2c_var
        self._zcheck_update(s)
        self._constraint_update(sigma_old, v2c_var_old, want_var=True, want_eq=True)
        z2v_fresh = self._gather_z2v()
        self._equalizer_update()
        self._var_to_z(z2v_fresh, self.c2v_var)
        self._var_to_constraint(z2v_fresh)

    def posterior(self) -> np.ndarray:
        """Current a-posteriori sums q_j (prior + all incoming messages)."""
        return self._prior + self._gather_z2v().sum(axis=1) + self.c2v_var

    def hard_decision(self) -> np.ndarray:
        return (self.posterior() < 0.0).astype(np.uint8)

    def _syndrome_of(self, e: np.ndarray) -> np.ndarray:
        ext = np.concatenate([e, np.zeros(1, dtype=np.uint8)])
        return np.bitwise_xor.reduce(ext[self._syn_idx], axis=1)

    def decode(self, s: np.ndarray) -> DecodeResult:
        s = np.asarray(s, dtype=np.uint8)
        if s.shape != (self.g.m_z,):
            raise ValueError(f"syndrome length {s.shape} != ({self.g.m_z},)")
        self.reset()
        estimate = self.hard_decision()
        if (self._syndrome_of(estimate) == s).all():
            return DecodeResult(estimate=estimate, converged=True, iters_used=0,
                                ops=self.ops)
        step = self._iterate_layered if self.cfg.schedule == "layered" else self._iterate_flooding
        for it in range(1, self.cfg.max_iters + 1):
            step(s)
            estimate = self.hard_decision()
            if (self._syndrome_of(estimate) == s).all():
                return DecodeResult(estimate=estimate, converged=True, iters_used=it,
                                    ops=self.ops)
        return DecodeResult(estimate=estimate, converged=False,
                            iters_used=self.cfg.max_iters, ops=self.ops)


def decode(graph: JointGraph, s: np.ndarray, cfg: DecoderConfig | None = None) -> DecodeResult:
    """Single-configuration decode (fresh decoder instance)."""
    return TaDecoder(graph, cfg).decode(s)


def diversity_members(base: DecoderConfig | None = None) -> list[DecoderConfig]:
    """The three diversity configurations, in their fixed run order."""
    base = base or DecoderConfig()
    mk = lambda sched, side: DecoderConfig(
        max_iters=base.max_iters, beta=base.beta, schedule=sched, mspi_side=side,
        llr_max=base.llr_max, use_priors=base.use_priors)
    return [mk("layered", "L"), mk("layered", "R"), mk("flooding", "L")]


def diversity_decode(graph: JointGraph, s: np.ndarray,
                     base_cfg: DecoderConfig | None = None,
                     decoders: list[TaDecoder] | None = None) -> DecodeResult:
    """Run the three diversity members in order; first convergence wins.

    If none converge, decoder 1's (unconverged) result is returned. The
    total_iters field accumulates iterations across attempted members.
    Prebuilt instances can be passed to amortize setup in sampling loops.
    """
    if decoders is None:
        decoders = [TaDecoder(graph, cfg) for cfg in diversity_members(base_cfg)]
    total = 0
    first: DecodeResult | None = None
    for i, dec in enumerate(decoders, start=1):
        res = dec.decode(s)
        total += res.iters_used
        if first is None:
            first = res
        if res.converged:
            res.decoder_id = i
            res.total_iters = total
            return res
    assert first is not None
    first.decoder_id = 1
    first.total_iters = total
    return first


def count_operations(graph: JointGraph, iters: int) -> int:
    """Operation count for `iters` iterations under the standard accounting.

    Per iteration: every variable node sends one message per neighbor, every
    Z check and constraint node likewise, and each equalizer spends 9
    operations per trellis layer. For a (gamma, rho)-regular code this is
    2n(gamma+1) + 10*m*rho per iteration.
    """
    e_vz = int(graph.vz_mask.sum())
    per_iter = (e_vz + graph.n) + (graph.n + graph.m_x * graph.rho) \
        + e_vz + 9 * graph.m_x * graph.rho
    return per_iter * iters
