from __future__ import annotations

import pytest

from dmodpar import catalog
from dmodpar.coeff import Context
from dmodpar.opmat import JetExpr, OpMatrix, apply_matrix, compose, identity, mat_adjoint, specialize_matrix
from dmodpar.ore import DiffOp, adjoint


def test_mat_adjoint_transposes_and_adjoins():
    A = catalog.intro_example("1.4")
    B = mat_adjoint(A)
    assert B.shape == (2, 1)
    for i in range(A.rows):
        for j in range(A.cols):
            assert B[j, i] == adjoint(A[i, j])
    assert mat_adjoint(B) == A


def test_compose_shapes_and_identity():
    A = catalog.cauchy(3)
    I = identity(A.ctx, A.cols)
    assert compose(A, I) == A
    with pytest.raises(ValueError):
        compose(A, A)


def test_stress_functions_solve_stress_equations():
    assert compose(catalog.cauchy(2), catalog.stress_functions("airy")).is_zero()
    for kind in ("beltrami", "maxwell", "morera"):
        assert compose(catalog.cauchy(3), catalog.stress_functions(kind)).is_zero()


def test_json_round_trip_variable_coefficients():
    A = catalog.intro_example("1.4")
    assert OpMatrix.from_json(A.to_json()) == A
    B = catalog.intro_example("1.1")
    assert OpMatrix.from_json(B.to_json()) == B


def test_jet_expressions():
    ctx = Context(2)
    u, v = JetExpr.unknowns(ctx, 2, ["u", "v"])
    e = (u - v).apply(DiffOp.d(ctx, 1))
    assert str(e) == "u[1] - v[1]"
    out = apply_matrix(OpMatrix(ctx, [[DiffOp.d(ctx, 2), -DiffOp.d(ctx, 1)]]), [u, v])
    assert str(out[0]) == "u[2] - v[1]"


def test_specialize_matrix():
    A = catalog.intro_example("1.2")
    B = specialize_matrix(A, {"a": 1})
    assert B.ctx.params == ()
    assert B == catalog.intro_example("1.2", a=1)
    with pytest.raises(KeyError):
        specialize_matrix(A, {"b": 1})


def test_ragged_rejected():
    ctx = Context(1)
    with pytest.raises(ValueError):
        OpMatrix(ctx, [[DiffOp.one(ctx)], [DiffOp.one(ctx), DiffOp.one(ctx)]])
