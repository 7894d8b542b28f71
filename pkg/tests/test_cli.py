from __future__ import annotations

import json
import os

import jsonschema
import pytest
from click.testing import CliRunner
from referencing import Registry, Resource

from dmodpar import catalog
from dmodpar.cli import main
from dmodpar.janet import complete
from dmodpar.opmat import OpMatrix

from conftest import SCHEMAS, fixture_path


def _registry():
    reg = Registry()
    for name in os.listdir(SCHEMAS):
        with open(os.path.join(SCHEMAS, name), encoding="utf-8") as fh:
            reg = reg.with_resource(name, Resource.from_contents(json.load(fh)))
    return reg


REGISTRY = _registry()


def validate(obj, schema_name):
    schema = REGISTRY.contents(schema_name)
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(obj)


def run(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


def test_dualtest_pd_control_file():
    r = run("dualtest", fixture_path("ex1_4.das"))
    assert r.exit_code == 0
    assert "verdict: torsion-free" in r.output


def test_dualtest_einstein_is_negative():
    r = run("dualtest", "einstein", "--max-order", "2")
    assert r.exit_code == 2
    assert "4. D1' = CC(D): 20 rows (input D1 has 10 rows)" in r.output


def test_dualtest_json_validates():
    r = run("dualtest", fixture_path("ex1_1.das"), "--set", "a=1", "--json")
    assert r.exit_code == 2
    obj = json.loads(r.output)
    validate(obj, "duality_report.schema.json")
    assert obj["verdict"] == "torsion"
    assert obj["witnesses"][0]["annihilator"] == "d1 + 1"


def test_catalog_param_binding():
    assert run("dualtest", "ex1.2", "--set", "a=1").exit_code == 2
    assert run("dualtest", "ex1.2", "--set", "a=3").exit_code == 0


def test_verify():
    r = run("verify", "--param", "airy", "--system", "cauchy2d")
    assert r.exit_code == 0 and r.output.startswith("pass")
    r = run("verify", "--param", "grad", "--system", "div")
    assert r.exit_code == 2
    assert run("verify", "--param", "maxwell", "--system", fixture_path("cauchy3d.das")).exit_code == 0


def test_resolution_json():
    r = run("resolution", "killing4d", "--json")
    assert r.exit_code == 0
    obj = json.loads(r.output)
    validate(obj, "resolution.schema.json")
    assert obj["dims"] == [4, 10, 20, 20, 6]
    assert run("resolution", fixture_path("ex4_15.das")).output.startswith("1 <- 4 <- 4 <- 1")


@pytest.mark.parametrize("cmd", ["adjoint", "cc"])
def test_matrix_commands_json(cmd):
    r = run(cmd, "cauchy3d", "--json")
    assert r.exit_code == 0
    obj = json.loads(r.output)
    validate(obj, "opmatrix.schema.json")
    OpMatrix.from_json_obj(obj)


def test_involution_and_board():
    r = run("involution", "maxwell", "--json")
    assert r.exit_code == 0
    obj = json.loads(r.output)
    assert obj["involutive"] is True
    assert obj["M"] == [[1, 0, 1], [0, 1, 1], [0, 0, 1]]
    r = run("board", fixture_path("ex4_15.das"))
    assert r.exit_code == 0
    A = catalog.intro_example("4.15")
    expected = complete(A.row_dicts(), A.ctx, 1).board().render()
    assert r.output.rstrip().endswith(expected)


def test_rank():
    r = run("rank", "bianchi4d", "--json")
    assert json.loads(r.output)["rank"] == 14


def test_parametrize():
    r = run("parametrize", fixture_path("cauchy2d.das"))
    assert r.exit_code == 0
    r = run("parametrize", "cauchy3d", "--minimal", "--json")
    obj = json.loads(r.output)
    assert obj["rank"] == 3 and len(obj["subsets"]) == 17
    assert run("parametrize", "einstein").exit_code == 2


def test_spencer_and_fi():
    r = run("spencer", "killing3d", "--json")
    obj = json.loads(r.output)
    assert obj["H"]["2"][0] == 6 and obj["H"]["3"][0] == 3
    r = run("spencer", fixture_path("ex4_14.das"), "--json")
    assert json.loads(r.output)["two_acyclic"] is False
    r = run("spencer", fixture_path("ex4_14.das"), "--prolong", "1", "--json")
    assert json.loads(r.output)["two_acyclic"] is True
    assert run("fi", fixture_path("ex4_14.das")).exit_code == 0
    r = run("fi", fixture_path("ex4_15.das"))
    assert r.exit_code == 2 and "round 2: y[2,2]" in r.output


def test_catalog_list_and_emit():
    r = run("catalog", "list")
    assert "einstein" in r.output.split()
    r = run("catalog", "emit", "killing", "--n", "2")
    assert r.exit_code == 0 and r.output.startswith("system killing")
    r = run("catalog", "emit", "einstein", "--metric", "euclidean", "--json")
    validate(json.loads(r.output), "opmatrix.schema.json")


def test_errors_exit_one(tmp_path):
    bad = tmp_path / "bad.das"
    bad.write_text("system s { indep x; dep u; eq u*u; }")
    r = CliRunner().invoke(main, ["cc", str(bad)])
    assert r.exit_code == 1 and "error" in r.output
    assert CliRunner().invoke(main, ["cc", "no_such_entry"]).exit_code == 1
    assert CliRunner().invoke(main, ["dualtest", "ex1.1", "--set", "b=2"]).exit_code == 1


def test_version():
    r = run("--version")
    assert r.exit_code == 0 and "0.1.0" in r.output
