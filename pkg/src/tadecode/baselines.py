"""Reference decoders on the circuit-level graph.

Normalized min-sum (flooding schedule, beta = 0.875) and its combination
with order-0 ordered-statistics post-processing. Both operate on the merged
fault-class columns of a :class:`CircuitLevelGraph`; the winning fault
vector is mapped back to a data-qubit error through the column effects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2
from .decoder import _minsum
from .jointgraph import CircuitLevelGraph

NMS_BETA = 0.875


@dataclass
class SoftDecision:
    posterior: np.ndarray   # per-column LLRs
    hard: np.ndarray        # hard decision, sign convention: LLR < 0 -> 1
    converged: bool
    iters_used: int = 0


class CircuitLevelDecoder:
    """Padded-array message passing state for one circuit-level graph."""

    def __init__(self, g: CircuitLevelGraph, beta: float = NMS_BETA, llr_max: float = 30.0):
        self.g = g
        self.beta = beta
        self.llr_max = llr_max
        h = g.h_circ
        self.m, self.c = h.shape
        cv = [np.flatnonzero(r) for r in h]
        self.d_max = max((len(v) for v in cv), default=1)
        self.cv_cols = np.full((self.m, self.d_max), -1, dtype=np.int64)
        for i, v in enumerate(cv):
            self.cv_cols[i, : len(v)] = v
        self.cv_mask = self.cv_cols >= 0
        vc: list[list[tuple[int, int]]] = [[] for _ in range(self.c)]
        for i, v in enumerate(cv):
            for pos, j in enumerate(v):
                vc[j].append((i, pos))
        self.g_max = max((len(v) for v in vc), default=1)
        self.vc_check = np.zeros((self.c, self.g_max), dtype=np.int64)
        self.vc_pos = np.zeros((self.c, self.g_max), dtype=np.int64)
        self.vc_mask = np.zeros((self.c, self.g_max), dtype=bool)
        for j, lst in enumerate(vc):
            for d, (i, pos) in enumerate(lst):
                self.vc_check[j, d] = i
                self.vc_pos[j, d] = pos
                self.vc_mask[j, d] = True
        self._syn_idx = np.where(self.cv_mask, self.cv_cols, self.c)

    def _syndrome_of(self, x: np.ndarray) -> np.ndarray:
        ext = np.concatenate([x, np.zeros(1, dtype=np.uint8)])
        return np.bitwise_xor.reduce(ext[self._syn_idx], axis=1)

    def nms(self, s: np.ndarray, max_iters: int) -> SoftDecision:
        """Flooding normalized min-sum with the graph's column priors."""
        s = np.asarray(s, dtype=np.uint8)
        prior = self.g.prior_llrs
        hard = (prior < 0.0).astype(np.uint8)
        if (self._syndrome_of(hard) == s).all():
            return SoftDecision(posterior=prior.copy(), hard=hard, converged=True,
                                iters_used=0)
        v2c = np.zeros((self.m, self.d_max))
        valid = self.cv_mask
        v2c[valid] = prior[self.cv_cols[valid]]
        sign_flip = 1.0 - 2.0 * s.astype(np.float64)
        posterior = prior.copy()
        for it in range(1, max_iters + 1):
            c2v = _minsum(v2c, self.cv_mask, sign_flip, self.beta, self.llr_max)
            gathered = np.where(self.vc_mask, c2v[self.vc_check, self.vc_pos], 0.0)
            posterior = prior + gathered.sum(axis=1)
            hard = (posterior < 0.0).astype(np.uint8)
            if (self._syndrome_of(hard) == s).all():
                return SoftDecision(posterior=posterior, hard=hard, converged=True,
                                    iters_used=it)
            out = np.clip(posterior[:, None] - gathered, -self.llr_max, self.llr_max)
            v2c[self.vc_check[self.vc_mask], self.vc_pos[self.vc_mask]] = out[self.vc_mask]
        return SoftDecision(posterior=posterior, hard=hard, converged=False,
                            iters_used=max_iters)


def nms_decode(g: CircuitLevelGraph, s: np.ndarray, max_iters: int = 900) -> SoftDecision:
    return CircuitLevelDecoder(g).nms(s, max_iters)


def osd0(g: CircuitLevelGraph, soft: SoftDecision, s: np.ndarray) -> np.ndarray | None:
    """Order-0 ordered-statistics post-processing.

    If the soft decision already satisfies the syndrome it is returned
    unchanged. Otherwise columns are ranked most-likely-in-error first
    (ascending posterior LLR, ties broken by ascending column index),
    h_circ is eliminated in that order, and the pivot coordinates are
    solved against the syndrome with all remaining coordinates zero.
    Returns None when the system is inconsistent.
    """
    s = np.asarray(s, dtype=np.uint8)
    if soft.converged:
        return soft.hard.copy()
    order = np.lexsort((np.arange(soft.posterior.size), soft.posterior))
    x_perm = gf2.solve(g.h_circ[:, order], s)
    if x_perm is None:
        return None
    x = np.zeros_like(x_perm)
    x[order] = x_perm
    return x


def reconstruct_data_error(g: CircuitLevelGraph, fault_vec: np.ndarray) -> np.ndarray:
    """XOR of the column effects selected by a fault vector."""
    fault_vec = np.asarray(fault_vec, dtype=np.uint8)
    if fault_vec.shape[0] != g.column_effects.shape[0]:
        raise ValueError(
            f"fault vector length {fault_vec.shape[0]} != "
            f"{g.column_effects.shape[0]} columns"
        )
    return (fault_vec.astype(np.int64) @ g.column_effects.astype(np.int64) & 1).astype(np.uint8)


def bposd0_decode(
    g: CircuitLevelGraph,
    s: np.ndarray,
    max_iters: int = 300,
    decoder: CircuitLevelDecoder | None = None,
) -> tuple[np.ndarray | None, SoftDecision]:
    """Min-sum followed by OSD0 on non-convergence.

    Returns (fault vector or None, the soft decision). A None fault vector
    means the post-processing could not match the syndrome.
    """
    dec = decoder or CircuitLevelDecoder(g)
    soft = dec.nms(s, max_iters)
    return osd0(g, soft, s), soft
