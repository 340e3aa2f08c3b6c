"""Two-state accumulator trellis and its max-log BCJR estimator.

The finite-state machine has state = accumulated error parity, input f_t
(a fault entering at step t) and output x_t = state XOR f_t (the error on
the qubit touched at slot t). The initial state is pinned to 0 (the ancilla
starts clean); the final state is free (faults after the last CNOT are out
of model).

All metric recursions run in the max-plus semiring; an exact log-sum-exp
variant is available behind a flag for diagnostics. Every function accepts
leading batch dimensions so one call can process all equalizers of a graph.
"""

from __future__ import annotations

import numpy as np

LLR_MAX = 30.0
_NEG_INF = -1e30


def _log_p(llr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(log P(bit=0), log P(bit=1)) from an LLR, numerically stable."""
    return -np.logaddexp(0.0, -llr), -np.logaddexp(0.0, llr)


def branch_metrics(l_x: np.ndarray, l_f: np.ndarray, llr_max: float = LLR_MAX) -> np.ndarray:
    """Per-layer log branch transition metrics.

    Returns an array of shape (..., rho, 2, 2) indexed [..., t, f, x] with
    metric = log P(x_t = x) + log P(f_t = f); inputs are clipped to
    +/- llr_max before use.
    """
    l_x = np.clip(np.asarray(l_x, dtype=np.float64), -llr_max, llr_max)
    l_f = np.clip(np.asarray(l_f, dtype=np.float64), -llr_max, llr_max)
    if l_x.shape != l_f.shape:
        raise ValueError(f"LLR shapes differ: {l_x.shape} vs {l_f.shape}")
    x0, x1 = _log_p(l_x)
    f0, f1 = _log_p(l_f)
    out = np.empty(l_x.shape + (2, 2))
    out[..., 0, 0] = f0 + x0
    out[..., 0, 1] = f0 + x1
    out[..., 1, 0] = f1 + x0
    out[..., 1, 1] = f1 + x1
    return out


def bcjr(
    l_x: np.ndarray,
    l_f: np.ndarray,
    llr_max: float = LLR_MAX,
    exact: bool = False,
) -> np.ndarray:
    """A-posteriori LLRs L'(x_t) of the accumulator outputs.

    Forward metrics start from state 0; backward metrics start uniform.
    With ``exact`` the max-plus recursions are replaced by log-sum-exp
    (diagnostic use only; the decoder contract is the max-log form).
    """
    g = branch_metrics(l_x, l_f, llr_max)
    rho = g.shape[-3]
    batch = g.shape[:-3]
    combine = np.logaddexp if exact else np.maximum

    # Transitions from state s with input f go to state s^f with output s^f.
    # Branch metric of (s -> s') is g[..., t, s^s', s'].
    alpha = np.empty(batch + (rho + 1, 2))
    alpha[..., 0, 0] = 0.0
    alpha[..., 0, 1] = _NEG_INF
    for t in range(rho):
        a0 = alpha[..., t, 0]
        a1 = alpha[..., t, 1]
        alpha[..., t + 1, 0] = combine(a0 + g[..., t, 0, 0], a1 + g[..., t, 1, 0])
        alpha[..., t + 1, 1] = combine(a0 + g[..., t, 1, 1], a1 + g[..., t, 0, 1])

    beta = np.empty(batch + (rho + 1, 2))
    beta[..., rho, :] = 0.0
    for t in range(rho - 1, -1, -1):
        b0 = beta[..., t + 1, 0]
        b1 = beta[..., t + 1, 1]
        beta[..., t, 0] = combine(g[..., t, 0, 0] + b0, g[..., t, 1, 1] + b1)
        beta[..., t, 1] = combine(g[..., t, 1, 0] + b0, g[..., t, 0, 1] + b1)

    # Output x_t equals the destination state, so the x = 0 branches are the
    # two arriving at state 0 and the x = 1 branches arrive at state 1.
    a_prev0 = alpha[..., :-1, 0]
    a_prev1 = alpha[..., :-1, 1]
    b_next0 = beta[..., 1:, 0]
    b_next1 = beta[..., 1:, 1]
    score0 = combine(a_prev0 + g[..., 0, 0], a_prev1 + g[..., 1, 0]) + b_next0
    score1 = combine(a_prev0 + g[..., 1, 1], a_prev1 + g[..., 0, 1]) + b_next1
    return np.clip(score0 - score1, -llr_max, llr_max)


def extrinsic(l_post: np.ndarray, l_in: np.ndarray, llr_max: float = LLR_MAX) -> np.ndarray:
    """New evidence produced by the estimator: L'(x) - L(x), clipped."""
    l_post = np.asarray(l_post, dtype=np.float64)
    l_in = np.asarray(l_in, dtype=np.float64)
    if l_post.shape != l_in.shape:
        raise ValueError(f"LLR shapes differ: {l_post.shape} vs {l_in.shape}")
    return np.clip(l_post - l_in, -llr_max, llr_max)
