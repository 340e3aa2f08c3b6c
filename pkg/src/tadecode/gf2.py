"""Dense GF(2) linear algebra on bit-packed rows.

Matrices are numpy arrays of dtype uint8 with entries in {0, 1} (row-major).
Elimination routines pack each row into 64-bit words so that row XOR is a
handful of word operations; this keeps rank/solve at microsecond scale for
the few-thousand-column matrices that appear in decoding-graph setup.

Pivoting is deterministic: pivots are chosen scanning columns left to right
and rows top to bottom, so repeated runs produce identical echelon forms.
"""

from __future__ import annotations

import numpy as np

_WORD = 64


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


def _as_matrix(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.uint8)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    return m & 1


def _as_vector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.uint8)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    return v & 1


def pack_rows(m: np.ndarray) -> np.ndarray:
    """Pack the rows of a 0/1 matrix into uint64 words (little-endian bits)."""
    m = _as_matrix(m)
    nbytes = ((m.shape[1] + _WORD - 1) // _WORD) * (_WORD // 8)
    packed = np.packbits(m, axis=1, bitorder="little")
    if packed.shape[1] < nbytes:
        packed = np.hstack(
            [packed, np.zeros((m.shape[0], nbytes - packed.shape[1]), dtype=np.uint8)]
        )
    return packed.view(np.uint64)

def unpack_rows(words: np.ndarray, cols: int) -> np.ndarray:
    """Inverse of :func:`pack_rows` (drops the padding bits)."""
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :cols].astype(np.uint8)


def _eliminate(words: np.ndarray, cols: int) -> tuple[np.ndarray, list[int]]:
    """In-place forward elimination; returns (words, pivot column list)."""
    rows = words.shape[0]
    pivot_cols: list[int] = []
    r = 0
    for c in range(cols):
        w, b = divmod(c, _WORD)
        mask = np.uint64(1 << b)
        pivot = -1
        for i in range(r, rows):
            if words[i, w] & mask:
                pivot = i
                break
        if pivot < 0:
            continue
        if pivot != r:
            words[[r, pivot]] = words[[pivot, r]]
        hit = (words[r + 1 :, w] & mask).astype(bool)
        if hit.any():
            words[r + 1 :][hit] ^= words[r]
        pivot_cols.append(c)
        r += 1
        if r == rows:
            break
    return words, pivot_cols


def rank(m: np.ndarray) -> int:
    """GF(2) rank of a 0/1 matrix."""
    m = _as_matrix(m)
    _, pivots = _eliminate(pack_rows(m), m.shape[1])
    return len(pivots)


def mul_vec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product over GF(2): out_i = XOR_j m[i, j] * v[j]."""
    m = _as_matrix(m)
    v = _as_vector(v)
    if v.shape[0] != m.shape[1]:
        raise DimensionError(f"vector length {v.shape[0]} != cols {m.shape[1]}")
    return (m.astype(np.int64) @ v.astype(np.int64) & 1).astype(np.uint8)


def in_rowspace(m: np.ndarray, v: np.ndarray) -> bool:
    """True iff v lies in the GF(2) row space of m."""
    m = _as_matrix(m)
    v = _as_vector(v)
    if v.shape[0] != m.shape[1]:
        raise DimensionError(f"vector length {v.shape[0]} != cols {m.shape[1]}")
    return RowBasis(m).contains(v)


def solve(m: np.ndarray, s: np.ndarray) -> np.ndarray | None:
    """Return any x with m @ x = s over GF(2), or None if inconsistent.

    Works on the augmented matrix [m | s]; free coordinates are set to 0.
    """
    m = _as_matrix(m)
    s = _as_vector(s)
    if s.shape[0] != m.shape[0]:
        raise DimensionError(f"rhs length {s.shape[0]} != rows {m.shape[0]}")
    cols = m.shape[1]
    aug = np.hstack([m, s[:, None]])
    words, pivots = _eliminate(pack_rows(aug), cols)
    bits = unpack_rows(words, cols + 1)
    # Inconsistent iff a zero row of m maps to rhs 1.
    np_rows = len(pivots)
    if bits[np_rows:, cols].any():
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for i in range(np_rows - 1, -1, -1):
        c = pivots[i]
        acc = bits[i, cols]
        row = bits[i, c + 1 : cols]
        if row.any():
            acc ^= np.bitwise_and(row, x[c + 1 :]).sum() & 1
        x[c] = acc
    return x


class RowBasis:
    """Echelonized row space of a matrix, supporting fast membership tests.

    Built once, then :meth:`contains` reduces a candidate vector against the
    stored pivot rows in O(rank) word operations. Used in the Monte-Carlo
    loop to classify residual errors.
    """

    def __init__(self, m: np.ndarray):
        m = _as_matrix(m)
        self.cols = m.shape[1]
        words, pivots = _eliminate(pack_rows(m), self.cols)
        self._rows = words[: len(pivots)].copy()
        self._pivots = pivots

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def contains(self, v: np.ndarray) -> bool:
        v = _as_vector(v)
        if v.shape[0] != self.cols:
            raise DimensionError(f"vector length {v.shape[0]} != cols {self.cols}")
        word = pack_rows(v[None, :])[0]
        for i, c in enumerate(self._pivots):
            w, b = divmod(c, _WORD)
            if word[w] & np.uint64(1 << b):
                word ^= self._rows[i]
        return not word.any()


def nullspace(m: np.ndarray) -> np.ndarray:
    """Basis of {x : m @ x = 0} over GF(2), one vector per row (may be empty)."""
    m = _as_matrix(m)
    rows, cols = m.shape
    words, pivots = _eliminate(pack_rows(m), cols)
    bits = unpack_rows(words[: len(pivots)], cols)
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, fc in enumerate(free):
        basis[i, fc] = 1
        # back-substitute pivot coordinates against the echelon rows
        for r in range(len(pivots) - 1, -1, -1):
            pc = pivots[r]
            row = bits[r, pc + 1 :]
            basis[i, pc] = np.bitwise_and(row, basis[i, pc + 1 :]).sum() & 1
    return basis


def store_matrix(m: np.ndarray, path: str) -> None:
    """Write a matrix as text: first line "rows cols", then 0/1 row strings."""
    m = _as_matrix(m)
    with open(path, "w") as fh:
        fh.write(f"{m.shape[0]} {m.shape[1]}\n")
        for row in m:
            fh.write("".join("1" if b else "0" for b in row) + "\n")


def load_matrix(path: str) -> np.ndarray:
    """Read a matrix written by :func:`store_matrix` (bit-exact round trip)."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"bad matrix header in {path!r}")
        rows, cols = int(header[0]), int(header[1])
        out = np.zeros((rows, cols), dtype=np.uint8)
        for i in range(rows):
            line = fh.readline().strip()
            if len(line) != cols:
                raise ValueError(f"row {i} in {path!r} has length {len(line)} != {cols}")
            out[i] = np.frombuffer(line.encode(), dtype=np.uint8) - ord("0")
    return out
