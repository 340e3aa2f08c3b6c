"""Golden and oracle self-checks, runnable from the CLI (`ta-decode verify`).

The oracles here are deliberately independent of the implementations they
check: the trellis oracle enumerates every fault pattern and recomputes
log-probabilities from scratch, and the propagation-matrix golden value is
a tabulated constant for the built-in 10-qubit example code.
"""

from __future__ import annotations

import numpy as np

from .circuit import build_circuit, hook_flip_probability, shuffle_schedule, simulate_hook_marginals
from .codes import get_code
from .jointgraph import build_p_matrix, canonical_g, group_segments
from .trellis import bcjr

# Tabulated hook-propagation matrix of the example-n5 code under its default
# schedule: rows are data qubits, column s*5+k is a hook entering check k at
# step s+1.
EXAMPLE_P_GOLDEN = np.array([
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


def exhaustive_maxlog_llrs(l_x: np.ndarray, l_f: np.ndarray,
                           llr_max: float = 30.0) -> np.ndarray:
    """Brute-force max-log MAP output LLRs of the accumulator channel.

    Enumerates all 2^rho fault patterns, scores each as the sum of
    per-symbol log-probabilities, and takes per-position maxima over the
    patterns whose output bit is 0 resp. 1.
    """
    l_x = np.clip(np.asarray(l_x, dtype=np.float64), -llr_max, llr_max)
    l_f = np.clip(np.asarray(l_f, dtype=np.float64), -llr_max, llr_max)
    rho = l_x.shape[0]
    pats = ((np.arange(1 << rho)[:, None] >> np.arange(rho)[None, :]) & 1).astype(np.uint8)
    outs = np.bitwise_xor.accumulate(pats, axis=1)

    def logp(llr, bits):
        return np.where(bits == 0, -np.logaddexp(0.0, -llr), -np.logaddexp(0.0, llr))

    scores = logp(l_f, pats).sum(axis=1) + logp(l_x, outs).sum(axis=1)
    llrs = np.empty(rho)
    for t in range(rho):
        s0 = scores[outs[:, t] == 0]
        s1 = scores[outs[:, t] == 1]
        best0 = s0.max() if s0.size else -np.inf
        best1 = s1.max() if s1.size else -np.inf
        llrs[t] = best0 - best1
    return np.clip(llrs, -llr_max, llr_max)


def check_p_matrix_golden() -> tuple[bool, str]:
    circ = build_circuit(get_code("example-n5"))
    pm = build_p_matrix(circ)
    ok = pm.p_mat.shape == EXAMPLE_P_GOLDEN.shape and (pm.p_mat == EXAMPLE_P_GOLDEN).all()
    return ok, "propagation matrix matches the tabulated example" if ok else \
        "propagation matrix differs from the tabulated example"


def check_bcjr_oracle(draws: int = 100, seed: int = 2024,
                      tol: float = 1e-9) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for rho in range(2, 7):
        for _ in range(draws):
            l_x = rng.uniform(-10.0, 10.0, rho)
            l_f = rng.uniform(-10.0, 10.0, rho)
            got = bcjr(l_x, l_f)
            want = exhaustive_maxlog_llrs(l_x, l_f)
            worst = max(worst, float(np.abs(got - want).max()))
    ok = worst <= tol
    return ok, f"max |bcjr - exhaustive| = {worst:.3g} (tol {tol:g})"


def check_lemma_totality(schedules_per_code: int = 3, seed: int = 7) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    tried = 0
    for name in ("example-n5", "bb-90-8-10", "gross-144-12-12"):
        code = get_code(name)
        circ = build_circuit(code)
        variants = [circ] + [shuffle_schedule(circ, rng) for _ in range(schedules_per_code)]
        g = canonical_g(code.rho)
        for variant in variants:
            pm = build_p_matrix(variant)
            eqs = group_segments(pm, code.h_x, variant)  # raises on failure
            for eq in eqs:
                support = np.flatnonzero(code.h_x[eq.check])
                cols = [s * circ.m_x + eq.check for s in range(code.rho)]
                block = pm.p_mat[np.ix_(support, cols)]
                order = [int(np.flatnonzero(support == q)[0]) for q in eq.qubit_order]
                if not (block[order] == g).all():
                    return False, f"{name}: check {eq.check} permutation mismatch"
                tried += 1
    return True, f"{tried} equalizer groupings reduced to canonical form"


def check_hook_marginals(p: float = 0.01, trials: int = 10**6,
                         seed: int = 99) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    rho = 6
    emp = simulate_hook_marginals(p, rho, trials, rng)
    worst_sigmas = 0.0
    for t in range(1, rho + 1):
        expect = hook_flip_probability(p, t)
        sigma = np.sqrt(expect * (1.0 - expect) / trials)
        worst_sigmas = max(worst_sigmas, abs(emp[t - 1] - expect) / sigma)
    ok = worst_sigmas <= 3.0
    return ok, f"worst deviation {worst_sigmas:.2f} sigma (limit 3)"


ALL_CHECKS = (
    ("p-matrix-golden", check_p_matrix_golden),
    ("bcjr-oracle", check_bcjr_oracle),
    ("lemma-totality", check_lemma_totality),
    ("hook-marginals", check_hook_marginals),
)


def run_all(printer=print) -> bool:
    """Run every self-check; returns True iff all passed."""
    all_ok = True
    for name, fn in ALL_CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # structural errors count as failures
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        printer(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
