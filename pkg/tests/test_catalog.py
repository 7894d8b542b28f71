from __future__ import annotations

import pytest

from dmodpar import catalog
from dmodpar.catalog import MetricSpec
from dmodpar.dsl import parse_one
from dmodpar.opmat import OpMatrix, compose, mat_adjoint, weighted_adjoint


def das(indep, dep, eqs):
    body = " ".join(f"eq {e};" for e in eqs)
    return parse_one(f"system t {{ indep {indep}; dep {dep}; {body} }}").matrix()


@pytest.mark.parametrize("name,n,shape", [
    ("killing", 3, (6, 3)), ("killing", 4, (10, 4)), ("cauchy", 2, (2, 3)), ("cauchy", 3, (3, 6)),
    ("einstein", None, (10, 10)), ("riemann", 3, (6, 6)), ("bianchi", 3, (3, 6)),
    ("conformal_killing", 3, (5, 3)), ("conformal_killing", 4, (9, 4)), ("airy", None, (3, 1)),
    ("beltrami", None, (6, 6)), ("maxwell", None, (6, 3)), ("morera", None, (6, 3)),
    ("ex1.1", None, (2, 3)), ("ex1.4", None, (1, 2)), ("ex4.15", None, (2, 1)),
])
def test_shapes(name, n, shape):
    assert catalog.build(name, n=n).shape == shape


def test_airy_entries():
    expected = das("x1, x2", "phi", ["phi[2,2]", "-phi[1,2]", "phi[1,1]"])
    A = catalog.stress_functions("airy")
    assert A.relabel(row_labels=expected.row_labels) == expected.to_context(A.ctx)


def test_maxwell_as_displayed():
    # rows s11, s12, s13, s22, s23, s33
    expected = das("x1, x2, x3", "A, B, C", [
        "B[3,3] + C[2,2]", "-C[1,2]", "-B[1,3]", "A[3,3] + C[1,1]", "-A[2,3]", "A[2,2] + B[1,1]"])
    M = catalog.stress_functions("maxwell")
    assert M.relabel(row_labels=expected.row_labels) == expected.to_context(M.ctx)


def test_morera_as_displayed():
    expected = das("x1, x2, x3", "L, M, N", [
        "-2*L[2,3]", "L[1,3] + M[2,3] - N[3,3]", "N[2,3] + L[1,2] - M[2,2]",
        "-2*M[1,3]", "M[1,2] + N[1,3] - L[1,1]", "-2*N[1,2]"])
    M = catalog.stress_functions("morera")
    assert M.relabel(row_labels=expected.row_labels) == expected.to_context(M.ctx)


def test_example_entries():
    A = catalog.intro_example("1.4")
    assert A == das("x1, x2", "eta1, eta2", ["eta1[2] - eta2[1] + x2*eta2"]).relabel(row_labels=A.row_labels)
    B = catalog.intro_example("4.15")
    assert B == das("x1, x2, x3", "y", ["y[1,1]", "y[1,3] - y[2]"]).relabel(row_labels=B.row_labels)


def test_unknown_entries():
    with pytest.raises(ValueError):
        catalog.stress_functions("lanczos")
    with pytest.raises(ValueError):
        catalog.intro_example("9.9")
    with pytest.raises(ValueError):
        catalog.build("weyl")
    with pytest.raises(ValueError):
        catalog.conformal_killing(2)


@pytest.mark.parametrize("kind,n", [("airy", 2), ("beltrami", 3), ("maxwell", 3), ("morera", 3)])
def test_cauchy_kills_stress_functions(kind, n):
    assert compose(catalog.cauchy(n), catalog.stress_functions(kind)).is_zero()


@pytest.mark.parametrize("name", catalog.NAMES)
def test_json_round_trip(name):
    A = catalog.build(name)
    text = A.to_json()
    B = OpMatrix.from_json(text)
    assert B == A and B.to_json() == text
    assert B.row_labels == A.row_labels and B.col_labels == A.col_labels


@pytest.mark.parametrize("n", [2, 3, 4])
def test_adjoint_killing_is_weighted_cauchy(n):
    # ad(K) = Cauchy diag(-2 on diagonal pairs, -1 off the diagonal)
    adK = mat_adjoint(catalog.killing(n))
    C = catalog.cauchy(n)
    pairs = catalog.sym_pairs(n)
    for i in range(n):
        for c, (a, b) in enumerate(pairs):
            w = -2 if a == b else -1
            assert adK[i, c] == w * C[i, c]


def test_einstein_self_adjoint_up_to_pair_weights():
    E = catalog.einstein()
    w = MetricSpec(4, "minkowski").omega()
    G = [1 if i == j else 2 * int(w[i][i] * w[j][j]) for i, j in catalog.sym_pairs(4)]
    assert G == [1, -2, -2, -2, 1, 2, 2, 1, 2, 1]
    adE = mat_adjoint(E)
    for a in range(10):
        for b in range(10):
            assert G[b] * adE[a, b] == G[a] * E[a, b]


def test_einstein_euclidean_also_weighted():
    E = catalog.einstein(MetricSpec(4))
    G = [1 if i == j else 2 for i, j in catalog.sym_pairs(4)]
    adE = mat_adjoint(E)
    assert all(G[b] * adE[a, b] == G[a] * E[a, b] for a in range(10) for b in range(10))


def test_einstein_kills_killing_image():
    assert compose(catalog.einstein(), catalog.killing(MetricSpec(4, "minkowski"))).is_zero()


def test_metric_validation():
    with pytest.raises(ValueError):
        MetricSpec(2, "matrix", ((1, 2), (3, 1))).omega()


def test_weighted_adjoint_of_einstein_is_einstein():
    for metric in (MetricSpec(4, "minkowski"), MetricSpec(4)):
        E = catalog.einstein(metric)
        G = catalog.pair_weights(metric)
        assert weighted_adjoint(E, G, G) == E


@pytest.mark.parametrize("n", [2, 3])
def test_weighted_adjoint_of_killing_is_cauchy(n):
    G = catalog.pair_weights(n)
    W = weighted_adjoint(catalog.killing(n), G, [1] * n)
    C = catalog.cauchy(n)
    assert all(W[i, c] == -2 * C[i, c] for i in range(n) for c in range(C.cols))


def test_pair_weights_need_diagonal_metric():
    with pytest.raises(ValueError):
        catalog.pair_weights(MetricSpec(2, "matrix", ((1, 1), (1, 2))))
