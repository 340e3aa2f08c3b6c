"""Bivariate bicycle CSS code construction.

A code is specified by two group orders (ell, em) and two polynomials a, b
in the shift variables x (order ell) and y (order em); monomials are given
as (power_x, power_y) pairs. The parity checks are

    h_x = [A | B],    h_z = [B^T | A^T],

where A and B are the circulant-of-circulant matrices of a and b. Left
qubits (columns 0..n/2-1) couple to X checks through A, right qubits
through B. Setting em = 1 gives plain univariate bicycle codes.

Term-list order matters operationally: it fixes the default CNOT schedule
of the measurement circuit (see :mod:`tadecode.circuit`), although the
polynomials themselves are order-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2


class CodeConstructionError(ValueError):
    """The polynomial specification does not produce a valid CSS code."""


class SpecValidationError(ValueError):
    """A registered code failed its recorded-parameter validation."""


@dataclass(frozen=True)
class BBSpec:
    """Polynomial description of a bivariate bicycle code."""

    ell: int
    em: int
    a_terms: tuple[tuple[int, int], ...]
    b_terms: tuple[tuple[int, int], ...]
    name: str = ""

    def __post_init__(self):
        if self.ell < 1 or self.em < 1:
            raise CodeConstructionError("group orders must be >= 1")
        for label, terms in (("a", self.a_terms), ("b", self.b_terms)):
            if not terms:
                raise CodeConstructionError(f"{label}_terms must be non-empty")
            reduced = tuple((px % self.ell, py % self.em) for px, py in terms)
            if len(set(reduced)) != len(reduced):
                raise CodeConstructionError(f"duplicate terms in {label}(x, y)")
            object.__setattr__(self, f"{label}_terms", reduced)
        if len(self.a_terms) != len(self.b_terms):
            raise CodeConstructionError(
                "a and b must have the same number of terms for a biregular code"
            )


@dataclass
class CssCode:
    """A built CSS code: parity checks plus derived parameters."""

    n: int
    h_x: np.ndarray
    h_z: np.ndarray
    gamma: int
    rho: int
    k: int
    spec: BBSpec | None = None

    def left_qubits(self) -> np.ndarray:
        return np.arange(self.n // 2)

    def right_qubits(self) -> np.ndarray:
        return np.arange(self.n // 2, self.n)

    def is_left(self, qubit: int) -> bool:
        return qubit < self.n // 2


@dataclass
class TannerGraph:
    """Adjacency view of a parity-check matrix."""

    var_count: int
    check_count: int
    check_vars: list[np.ndarray] = field(repr=False)
    var_checks: list[np.ndarray] = field(repr=False)


def _circulant_sum(ell: int, em: int, terms: tuple[tuple[int, int], ...]) -> np.ndarray:
    """Sum of shift operators x^px y^py: entry (r, c) with c = r shifted by the term."""
    size = ell * em
    mat = np.zeros((size, size), dtype=np.uint8)
    rows = np.arange(size)
    i, j = rows // em, rows % em
    for px, py in terms:
        cols = ((i + px) % ell) * em + (j + py) % em
        mat[rows, cols] ^= 1
    return mat


def build_bb_code(spec: BBSpec) -> CssCode:
    """Construct the CSS code of a bivariate bicycle specification.

    Raises CodeConstructionError if h_x @ h_z^T != 0, which signals a bad
    polynomial pair (cannot happen for true circulant sums, but the check
    guards against future construction changes).
    """
    a = _circulant_sum(spec.ell, spec.em, spec.a_terms)
    b = _circulant_sum(spec.ell, spec.em, spec.b_terms)
    h_x = np.hstack([a, b])
    h_z = np.hstack([b.T, a.T])
    prod = (h_x.astype(np.int64) @ h_z.T.astype(np.int64)) & 1
    if prod.any():
        raise CodeConstructionError(f"CSS orthogonality failed for {spec.name or spec}")
    n = 2 * spec.ell * spec.em
    gamma = len(spec.a_terms)
    rho = len(spec.a_terms) + len(spec.b_terms)
    k = n - gf2.rank(h_x) - gf2.rank(h_z)
    return CssCode(n=n, h_x=h_x, h_z=h_z, gamma=gamma, rho=rho, k=k, spec=spec)


def code_dimension(code: CssCode) -> int:
    """Number of logical qubits: n - rank(h_x) - rank(h_z)."""
    return code.n - gf2.rank(code.h_x) - gf2.rank(code.h_z)


def tanner_graph(h: np.ndarray) -> TannerGraph:
    """Adjacency lists of a parity-check matrix, ascending index order."""
    h = np.asarray(h, dtype=np.uint8)
    check_vars = [np.flatnonzero(row) for row in h]
    var_checks = [np.flatnonzero(col) for col in h.T]
    return TannerGraph(
        var_count=h.shape[1],
        check_count=h.shape[0],
        check_vars=check_vars,
        var_checks=var_checks,
    )


# Built-in codes. Expected parameters are re-derived at load time; a mismatch
# aborts, guarding against transcription drift in the polynomial tables.
# Term order is meaningful: it sets the default CNOT schedule (the example
# code's order is canonical for its published propagation matrix).
_REGISTRY: dict[str, tuple[BBSpec, dict]] = {
    "example-n5": (
        BBSpec(
            ell=5,
            em=1,
            a_terms=((3, 0), (1, 0)),
            b_terms=((0, 0), (2, 0)),
            name="example-n5",
        ),
        {"n": 10, "k": 2, "gamma": 2, "rho": 4},
    ),
    "bb-90-8-10": (
        BBSpec(
            ell=15,
            em=3,
            a_terms=((9, 0), (0, 1), (0, 2)),
            b_terms=((0, 0), (2, 0), (7, 0)),
            name="bb-90-8-10",
        ),
        {"n": 90, "k": 8, "gamma": 3, "rho": 6},
    ),
    "gross-144-12-12": (
        BBSpec(
            ell=12,
            em=6,
            a_terms=((3, 0), (0, 1), (0, 2)),
            b_terms=((0, 3), (1, 0), (2, 0)),
            name="gross-144-12-12",
        ),
        {"n": 144, "k": 12, "gamma": 3, "rho": 6},
    ),
}


def registry_names() -> list[str]:
    return sorted(_REGISTRY)


def get_code(name: str) -> CssCode:
    """Build a registered code and validate its recorded parameters."""
    if name not in _REGISTRY:
        raise SpecValidationError(
            f"unknown code {name!r}; known: {', '.join(registry_names())}"
        )
    spec, expected = _REGISTRY[name]
    code = build_bb_code(spec)
    problems = []
    if code.n != expected["n"]:
        problems.append(f"n={code.n} != {expected['n']}")
    if code.k != expected["k"]:
        problems.append(f"k={code.k} != {expected['k']}")
    row_w = code.h_x.sum(axis=1)
    col_w = code.h_x.sum(axis=0)
    if not (row_w == expected["rho"]).all() or not (col_w == expected["gamma"]).all():
        problems.append("h_x is not (gamma, rho)-regular")
    if problems:
        raise SpecValidationError(f"code {name!r} failed validation: {'; '.join(problems)}")
    return code
