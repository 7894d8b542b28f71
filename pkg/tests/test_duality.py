from __future__ import annotations

import pytest

from dmodpar import catalog
from dmodpar.catalog import MetricSpec
from dmodpar.dsl import parse_one
from dmodpar.duality import (TorsionError, annihilator_search, canonical_parametrization, check_parametrization,
                             controllability_n1, double_duality, minimal_parametrization)
from dmodpar.janet import complete, differential_rank
from dmodpar.opmat import OpMatrix, compose
from dmodpar.ore import DiffOp

from test_cc import same_module


def jet(A, text):
    """Row of a jet expression in the unknowns of ``A``."""
    decl = ", ".join(A.col_labels)
    params = f"param {', '.join(A.ctx.params)};" if A.ctx.params else ""
    doc = parse_one(f"system z {{ indep {', '.join(A.ctx.coords)}; {params} dep {decl}; eq {text}; }}")
    return doc.matrix().to_context(A.ctx).row_dicts()[0]


def proportional(dom, u, v) -> bool:
    if not u or not v:
        return not u and not v
    k = next(iter(v))
    if k not in u:
        return False
    c = u[k] / v[k]
    return set(u) == set(v) and all(u[t] == c * v[t] for t in v)


def op(ctx, text):
    return DiffOp.parse(ctx, text)


def test_ode_pair_generic_is_torsion_free():
    rep = double_duality(catalog.intro_example("1.1"))
    assert rep.torsion_free
    assert rep.compositions_vanish()


def test_ode_pair_a0_witness():
    A = catalog.intro_example("1.1", a=0)
    rep = double_duality(A)
    assert not rep.torsion_free
    B = complete(A.row_dicts(), A.ctx, A.cols)
    zp = jet(A, "y1[1] + y1 - y2[1]")
    for w in rep.witnesses:
        assert proportional(A.ctx.dom, B.normal_form(w.z.terms), B.normal_form(zp))
        assert w.annihilator == op(A.ctx, "d1")
    assert annihilator_search(zp, A) == op(A.ctx, "d1")


def test_ode_pair_a1_witness():
    A = catalog.intro_example("1.1", a=1)
    rep = double_duality(A)
    assert not rep.torsion_free
    B = complete(A.row_dicts(), A.ctx, A.cols)
    # from the factorization (d + 1)(d y1 - (d - 1) y2) of the reduced equation
    zpp = jet(A, "y1[1] - y2[1] + y2")
    for w in rep.witnesses:
        assert proportional(A.ctx.dom, B.normal_form(w.z.terms), B.normal_form(zpp))
        assert w.annihilator == op(A.ctx, "d1 + 1")
    assert annihilator_search(zpp, A) == op(A.ctx, "d1 + 1")
    assert annihilator_search(jet(A, "y1[1] - y2"), A) is None


def test_ode_pair_constant_instance_parametrization():
    A = catalog.intro_example("1.1", a=2)
    rep = double_duality(A)
    assert rep.torsion_free
    ctx = A.ctx
    # y1 = (d^2 - a) xi, y2 = (d^2 + d) xi and y3 = y2' - y1'
    D = OpMatrix(ctx, [[op(ctx, "d1^2 - 2")], [op(ctx, "d1^2 + d1")], [op(ctx, "d1^2 + 2*d1")]])
    assert compose(A, D).is_zero()
    assert check_parametrization(D, A).ok
    assert rep.D.relabel(col_labels=D.col_labels, row_labels=D.row_labels) == D


def test_ode_pair_reduced_form():
    A = catalog.intro_example("1.1b", a=2)
    ctx = A.ctx
    D = OpMatrix(ctx, [[op(ctx, "d1^2 - 2")], [op(ctx, "d1^2 + d1")]])
    assert check_parametrization(D, A).ok
    rep = double_duality(catalog.intro_example("1.1b", a=0))
    zp = jet(rep.D1, "y1[1] + y1 - y2[1]")
    assert annihilator_search(zp, rep.D1) == op(rep.D1.ctx, "d1")


def test_ode_pair_variable_coefficient():
    # a = x gives d(a) + a^2 - a = x^2 - x + 1, never zero
    rep = double_duality(catalog.intro_example("1.1", a="x1"))
    assert rep.torsion_free


def test_ode_pair_rational_instance_second_order_parametrization():
    # a = 1/2 + 1/x solves d(a) + a^2 - a = -1/4, a nonzero constant, and then
    # y1 = (d^2 + 2 d(a) - a) xi, y2 = (d^2 + d + 2 d(a)) xi parametrizes
    a = "1/2 + 1/x1"
    A = catalog.intro_example("1.1", a=a)
    ctx = A.ctx
    assert double_duality(A, annihilators=False).torsion_free
    P1 = op(ctx, "d1^2 - 2/x1^2 - 1/2 - 1/x1")
    P2 = op(ctx, "d1^2 + d1 - 2/x1^2")
    D = OpMatrix(ctx, [[P1], [P2], [op(ctx, "d1") * (P2 - P1)]])
    assert check_parametrization(D, A).ok
    Db = OpMatrix(ctx, [[P1], [P2]])
    assert check_parametrization(Db, catalog.intro_example("1.1b", a=a)).ok


@pytest.mark.parametrize("a,expected", [(None, True), (0, True), (2, True), (-1, True), (1, False)])
def test_ode_single_controllability(a, expected):
    A = catalog.intro_example("1.2", a=a)
    assert controllability_n1(A) is expected
    assert double_duality(A, annihilators=False).torsion_free is expected


def test_ode_single_witness():
    A = catalog.intro_example("1.2", a=1)
    rep = double_duality(A)
    B = rep.basis
    z = jet(A, "y1 - y2")
    assert len(rep.witnesses) == 1
    assert proportional(A.ctx.dom, B.normal_form(rep.witnesses[0].z.terms), B.normal_form(z))


def test_single_input_systems():
    assert controllability_n1(parse_one("system s { indep x; dep y, u; eq y[1] - u; }").matrix())
    # y' = 0 alone: y is a torsion element
    assert not controllability_n1(parse_one("system s { indep x; dep y; eq y[1]; }").matrix())


def test_controllability_needs_one_variable():
    with pytest.raises(ValueError):
        controllability_n1(catalog.cauchy(2))


def test_pd_control_chain():
    A = catalog.intro_example("1.4")
    rep = double_duality(A)
    assert rep.torsion_free
    ctx = A.ctx
    # canonical parametrization shown for this example, with xi1 of opposite sign
    expected = OpMatrix(ctx, [
        [op(ctx, "d1*d2 - x2*d2 + 1"), op(ctx, "d1^2 - 2*x2*d1 + x2^2")],
        [op(ctx, "d2^2"), op(ctx, "d1*d2 - x2*d2 - 2")],
    ])
    assert rep.D.relabel(col_labels=expected.col_labels, row_labels=expected.row_labels) == expected
    assert check_parametrization(rep.D, A).ok


def test_pd_control_minimal():
    A = catalog.intro_example("1.4")
    res = minimal_parametrization(A)
    assert res.rank == 1
    assert res.subsets == [(0,), (1,)]
    for D in res.operators:
        assert check_parametrization(D, A).ok
        assert differential_rank(D) == 1


def test_cauchy_2d_canonical_is_airy():
    rep = double_duality(catalog.cauchy(2))
    airy = catalog.stress_functions("airy")
    assert rep.torsion_free
    assert rep.D.cols == 1
    assert rep.D.relabel(col_labels=airy.col_labels, row_labels=airy.row_labels) == airy


def test_cauchy_3d_minimal_subsets_of_beltrami():
    A = catalog.cauchy(3)
    B = catalog.stress_functions("beltrami")
    res = minimal_parametrization(A, D=B)
    names = [tuple(B.col_labels[i] for i in s) for s in res.subsets]
    assert ("phi11", "phi22", "phi33") in names
    assert ("phi12", "phi13", "phi23") in names
    for D in res.operators:
        assert differential_rank(D) == res.rank == 3


def test_minimal_search_cap():
    res = minimal_parametrization(catalog.cauchy(3), cap=2)
    assert res.searched == 2 and not res.exhausted


def test_given_operator_must_parametrize():
    with pytest.raises(ValueError):
        minimal_parametrization(catalog.cauchy(3), D=catalog.stress_functions("maxwell").select_columns([0]))


def test_einstein_is_not_parametrizable():
    E = catalog.einstein()
    rep = double_duality(E, max_order=2)
    assert not rep.torsion_free
    assert rep.D1p.rows == 20
    assert complete(rep.D1p.row_dicts(), E.ctx, E.cols).board().counts() is not None
    assert same_module(rep.D1p, catalog.riemann_linearized(MetricSpec(4, "minkowski")))
    box = op(E.ctx, "-d1^2 + d2^2 + d3^2 + d4^2")
    for w in rep.witnesses:
        assert w.annihilator == box
    with pytest.raises(TorsionError):
        canonical_parametrization(E)


def test_verdict_stable_under_row_sign():
    for A in (catalog.cauchy(2), catalog.intro_example("1.1", a=1), catalog.intro_example("1.4")):
        neg = -A
        assert double_duality(neg, annihilators=False).torsion_free == double_duality(A, annihilators=False).torsion_free


def test_report_json_shape():
    rep = double_duality(catalog.intro_example("1.2", a=1))
    obj = rep.to_json_obj()
    assert obj["verdict"] == "torsion"
    assert obj["witnesses"][0]["annihilator"] == "d1 + 1"
