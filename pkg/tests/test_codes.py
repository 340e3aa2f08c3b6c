"""Bivariate bicycle construction, parameters, and Tanner graph views."""

import numpy as np
import pytest

from tadecode import gf2
from tadecode.codes import (BBSpec, CodeConstructionError, SpecValidationError,
                            build_bb_code, code_dimension, get_code, tanner_graph)

HX_EXAMPLE = np.array([
    [0,1,0,1,0, 1,0,1,0,0],
    [0,0,1,0,1, 0,1,0,1,0],
    [1,0,0,1,0, 0,0,1,0,1],
    [0,1,0,0,1, 1,0,0,1,0],
    [1,0,1,0,0, 0,1,0,0,1],
], dtype=np.uint8)
HZ_EXAMPLE = np.array([
    [1,0,0,1,0, 0,0,1,0,1],
    [0,1,0,0,1, 1,0,0,1,0],
    [1,0,1,0,0, 0,1,0,0,1],
    [0,1,0,1,0, 1,0,1,0,0],
    [0,0,1,0,1, 0,1,0,1,0],
], dtype=np.uint8)


def test_example_matches_published_matrices():
    code = get_code("example-n5")
    assert (code.h_x == HX_EXAMPLE).all()
    assert (code.h_z == HZ_EXAMPLE).all()


def test_css_orthogonality_all_registered():
    for name in ("example-n5", "bb-90-8-10", "gross-144-12-12"):
        code = get_code(name)
        assert not ((code.h_x.astype(int) @ code.h_z.T.astype(int)) % 2).any()


def test_equal_polynomials_accepted():
    spec = BBSpec(ell=4, em=1, a_terms=((0, 0), (1, 0)), b_terms=((0, 0), (1, 0)))
    code = build_bb_code(spec)
    assert code.n == 8


def test_gross_code_parameters():
    code = get_code("gross-144-12-12")
    assert code.n == 144
    assert code.k == 12
    assert (code.h_x.sum(axis=1) == 6).all()
    assert (code.h_x.sum(axis=0) == 3).all()


def test_bb90_parameters():
    code = get_code("bb-90-8-10")
    assert code.n == 90
    assert code.k == 8


def test_code_dimension_example():
    code = get_code("example-n5")
    assert gf2.rank(code.h_x) == 4
    assert gf2.rank(code.h_z) == 4
    assert code_dimension(code) == 10 - 4 - 4 == code.k


def test_duplicate_terms_rejected():
    with pytest.raises(CodeConstructionError):
        BBSpec(ell=5, em=1, a_terms=((1, 0), (6, 0)), b_terms=((0, 0), (2, 0)))


def test_empty_terms_rejected():
    with pytest.raises(CodeConstructionError):
        BBSpec(ell=5, em=1, a_terms=(), b_terms=((0, 0),))


def test_unknown_registry_name():
    with pytest.raises(SpecValidationError):
        get_code("no-such-code")


def test_tanner_graph_identity():
    tg = tanner_graph(np.eye(4, dtype=np.uint8))
    assert all(len(v) == 1 for v in tg.check_vars)
    assert all(len(v) == 1 for v in tg.var_checks)


def test_tanner_graph_example_degrees():
    tg = tanner_graph(HZ_EXAMPLE)
    assert all(len(v) == 4 for v in tg.check_vars)
    assert all(len(v) == 2 for v in tg.var_checks)


def test_tanner_graph_gross_degrees():
    code = get_code("gross-144-12-12")
    tg = tanner_graph(code.h_x)
    assert all(len(v) == 6 for v in tg.check_vars)
    assert all(len(v) == 3 for v in tg.var_checks)


def test_tanner_graph_adjacency_symmetric():
    code = get_code("example-n5")
    tg = tanner_graph(code.h_x)
    for c, vs in enumerate(tg.check_vars):
        for v in vs:
            assert c in tg.var_checks[v]
        assert (np.diff(vs) > 0).all()  # ascending column order


def test_quasi_cyclic_shift_invariance():
    # Simultaneously shifting rows and columns within each block maps h_x
    # to itself: the circulant structure is preserved.
    for name in ("example-n5", "bb-90-8-10"):
        code = get_code(name)
        spec = code.spec
        m = spec.ell * spec.em
        rows = np.arange(m)
        i, j = rows // spec.em, rows % spec.em
        row_perm = ((i + 1) % spec.ell) * spec.em + j
        shifted = code.h_x[row_perm][:, np.concatenate([row_perm, m + row_perm])]
        assert (shifted == code.h_x).all()


def test_left_right_labels():
    code = get_code("example-n5")
    assert code.is_left(0) and code.is_left(4)
    assert not code.is_left(5)
    assert len(code.left_qubits()) == len(code.right_qubits()) == 5
