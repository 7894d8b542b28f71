"""Command line interface.

A SOURCE is either a ``.das`` file (first system in it, or ``--name``) or
a catalog entry such as ``einstein``, ``cauchy3d``, ``killing4d`` or
``ex1.4``.  Exit codes: 0 success, 2 negative mathematical verdict, 1 error.
"""

from __future__ import annotations

import json
import os
import re
import sys
from fractions import Fraction

import click

from . import catalog
from .cc import check_cc_generation, free_resolution, generating_cc
from .duality import double_duality, minimal_parametrization
from .dsl import DSLError, SystemDoc, parse, print_doc
from .janet import complete, delta_regularize, differential_rank, is_involutive
from .opmat import OpMatrix, mat_adjoint, specialize_matrix
from .spencer import cohomology, fi_criterion, is_finite_type, is_s_acyclic, symbol_of

NEGATIVE = 2


class Negative(Exception):
    """A mathematical negative verdict; maps to exit code 2."""


def _bindings(values) -> dict:
    out = {}
    for item in values:
        if "=" not in item:
            raise click.BadParameter(f"expected NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = Fraction(v.strip())
    return out


def load(source: str, n=None, metric=None, sets=(), name=None) -> OpMatrix:
    """Resolve a SOURCE argument to an operator matrix."""
    bindings = _bindings(sets)
    if os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            docs = parse(fh.read())
        if not docs:
            raise ValueError(f"{source}: no system found")
        if name:
            docs = [d for d in docs if d.name == name]
            if not docs:
                raise ValueError(f"{source}: no system named {name!r}")
        A = docs[0].matrix()
    else:
        key = source.lower().lstrip("@")
        m = re.fullmatch(r"([a-z_]+?)(\d)d", key)
        if m:
            key, n = m.group(1), int(m.group(2))
        a = None
        if key.startswith("ex") and "a" in bindings:
            a = bindings.pop("a")
        A = catalog.build(key, n=n, metric=metric, a=a)
    if bindings:
        A = specialize_matrix(A, bindings)
    return A


def common(f):
    f = click.option("--json", "as_json", is_flag=True, help="Emit JSON.")(f)
    f = click.option("--n", "n", type=int, default=None, help="Dimension for catalog entries.")(f)
    f = click.option("--metric", type=click.Choice(["euclidean", "minkowski"]), default=None)(f)
    f = click.option("--set", "sets", multiple=True, help="Parameter value NAME=VALUE.")(f)
    f = click.option("--name", default=None, help="System name inside a .das file.")(f)
    return f


def _emit(as_json: bool, obj, text: str):
    if as_json:
        click.echo(json.dumps(obj, indent=2, default=str))
    else:
        click.echo(text)


def _run(fn):
    try:
        fn()
    except Negative:
        sys.exit(NEGATIVE)
    except (DSLError, ValueError, KeyError, ZeroDivisionError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Linear differential operators: duality, involution and Spencer cohomology."""


@main.command()
@click.argument("source")
@common
def adjoint(source, as_json, n, metric, sets, name):
    """Formal adjoint of an operator matrix."""
    def go():
        B = mat_adjoint(load(source, n, metric, sets, name))
        _emit(as_json, B.to_json_obj(), str(B))
    _run(go)


@main.command()
@click.argument("source")
@common
def cc(source, as_json, n, metric, sets, name):
    """Generating compatibility conditions."""
    def go():
        C = generating_cc(load(source, n, metric, sets, name))
        _emit(as_json, C.to_json_obj(), str(C) if C.rows else "no compatibility conditions")
    _run(go)


@main.command()
@click.argument("source")
@click.option("--max-steps", type=int, default=None)
@common
def resolution(source, max_steps, as_json, n, metric, sets, name):
    """Free resolution by iterated compatibility conditions."""
    def go():
        res = free_resolution(load(source, n, metric, sets, name), max_steps=max_steps)
        text = " <- ".join(str(d) for d in res.dims)
        if not res.complete:
            text += "  (not finished)"
        if res.presentation_changed:
            text += "\nfirst operator extended by implied lower order equations"
        _emit(as_json, res.to_json_obj(), text)
    _run(go)


@main.command()
@click.argument("source")
@click.option("--seed", type=int, default=0, show_default=True)
@common
def involution(source, seed, as_json, n, metric, sets, name):
    """Move to delta-regular coordinates and test involution."""
    def go():
        A = load(source, n, metric, sets, name)
        reg = delta_regularize(A.row_dicts(), A.ctx, A.cols, seed=seed)
        ok, board = is_involutive(reg.rows, A.ctx, A.cols)
        B = OpMatrix.from_rows(A.ctx, reg.rows, A.cols, col_labels=A.col_labels)
        obj = {"involutive": ok, "M": reg.M, "class_counts": list(reg.score), "tied": reg.tied,
               "board": board.to_json_obj(), "system": B.to_json_obj()}
        text = f"coordinates M = {reg.M}\n{B}\n{board.render()}\ninvolutive: {ok}"
        text += f"\nclass counts {list(reg.score)}: best board found, not a certificate of delta-regularity"
        if reg.tied:
            text += "\nevery candidate frame scored the same"
        _emit(as_json, obj, text)
        if not ok:
            raise Negative
    _run(go)


@main.command()
@click.argument("source")
@common
def board(source, as_json, n, metric, sets, name):
    """Janet basis and its board of multiplicative variables."""
    def go():
        A = load(source, n, metric, sets, name)
        B = complete(A.row_dicts(), A.ctx, A.cols)
        M = B.matrix(col_labels=A.col_labels)
        _emit(as_json, {"basis": M.to_json_obj(), "board": B.board().to_json_obj()},
              f"{M}\n{B.board().render()}")
    _run(go)


@main.command()
@click.argument("source")
@click.option("--seed", type=int, default=0, show_default=True)
@common
def rank(source, seed, as_json, n, metric, sets, name):
    """Differential rank and characters."""
    def go():
        A = load(source, n, metric, sets, name)
        val, ch = differential_rank(A, seed=seed, with_characters=True)
        obj = {"rank": val}
        text = f"differential rank {val}"
        if ch is not None:
            obj.update(beta=list(ch.beta), alpha=list(ch.alpha), q=ch.q)
            text += f"\nq={ch.q} beta={list(ch.beta)} alpha={list(ch.alpha)}"
        _emit(as_json, obj, text)
    _run(go)


@main.command()
@click.argument("source")
@click.option("--max-order", type=int, default=3, show_default=True, help="Annihilator search bound.")
@common
def dualtest(source, max_order, as_json, n, metric, sets, name):
    """Double duality torsion test; exit code 2 on torsion."""
    def go():
        rep = double_duality(load(source, n, metric, sets, name), max_order=max_order)
        _emit(as_json, rep.to_json_obj(), rep.summary())
        if not rep.torsion_free:
            raise Negative
    _run(go)


@main.command()
@click.argument("source")
@click.option("--minimal", is_flag=True, help="Search minimal column subsets.")
@click.option("--cap", type=int, default=10_000, show_default=True)
@common
def parametrize(source, minimal, cap, as_json, n, metric, sets, name):
    """Canonical or minimal parametrizations; exit code 2 on torsion."""
    def go():
        A = load(source, n, metric, sets, name)
        rep = double_duality(A, annihilators=False)
        if not rep.torsion_free:
            _emit(as_json, rep.to_json_obj(), rep.summary())
            raise Negative
        if not minimal:
            _emit(as_json, rep.D.to_json_obj(), str(rep.D))
            return
        res = minimal_parametrization(A, cap=cap, report=rep)
        if not res.subsets:
            _emit(as_json, {"rank": res.rank, "subsets": []}, "no minimal subset found")
            raise Negative
        labels = rep.D.col_labels
        obj = {"rank": res.rank, "searched": res.searched, "exhausted": res.exhausted,
               "subsets": [[labels[i] for i in s] for s in res.subsets],
               "operators": [M.to_json_obj() for M in res.operators]}
        text = [f"rk_D(M) = {res.rank}; {len(res.subsets)} of {res.searched} subsets work"]
        for s, M in zip(res.subsets, res.operators):
            text.append("{" + ", ".join(labels[i] for i in s) + "}")
            text.append(str(M))
        _emit(as_json, obj, "\n".join(text))
    _run(go)


@main.command()
@click.argument("source")
@click.option("--r-max", type=int, default=4, show_default=True)
@click.option("--prolong", "r0", type=int, default=0, help="Use the symbol prolonged r0 times.")
@common
def spencer(source, r_max, r0, as_json, n, metric, sets, name):
    """Table of dim H^s_{q+r} of the symbol, plus acyclicity verdicts."""
    def go():
        A = load(source, n, metric, sets, name)
        g = symbol_of(A)
        if r0:
            g = g.prolonged(r0)
        dims = [g.dim(r) for r in range(r_max + 1)]
        table = {s: [cohomology(g, s, r) for r in range(r_max + 1)] for s in range(1, g.n + 1)}
        acyc = is_s_acyclic(g, 2, r_max)
        inv = is_s_acyclic(g, g.n, r_max)
        obj = {"q": g.q, "dims": dims, "H": {str(s): v for s, v in table.items()},
               "two_acyclic": acyc.ok, "involutive": inv.ok,
               "finite_type": is_finite_type(g, r_max)}
        lines = [f"q={g.q}  dim g_(q+r), r=0..{r_max}: {dims}", "s \\ r " + " ".join(f"{r:>4}" for r in range(r_max + 1))]
        for s, v in table.items():
            lines.append(f"{s:>5} " + " ".join(f"{h:>4}" for h in v))
        lines.append(acyc.describe())
        lines.append("involutive" if inv.ok else "not involutive")
        _emit(as_json, obj, "\n".join(lines))
    _run(go)


@main.command()
@click.argument("source")
@click.option("--r-max", type=int, default=4, show_default=True)
@common
def fi(source, r_max, as_json, n, metric, sets, name):
    """Formal integrability; exit code 2 when new equations appear."""
    def go():
        v = fi_criterion(load(source, n, metric, sets, name), r_max=r_max)
        lines = [v.status]
        for k, rnd in enumerate(v.rounds, 1):
            lines.append(f"round {k}: " + ", ".join(str(e) for e in rnd))
        if v.note:
            lines.append(v.note)
        _emit(as_json, v.to_json_obj(), "\n".join(lines))
        if v.status != "formally-integrable":
            raise Negative
    _run(go)


@main.group(name="catalog")
def catalog_group():
    """Named operators."""


@catalog_group.command(name="list")
def catalog_list():
    for nm in catalog.NAMES:
        click.echo(nm)


@catalog_group.command(name="emit")
@click.argument("entry")
@common
def catalog_emit(entry, as_json, n, metric, sets, name):
    """Print a catalog entry as a .das document (or JSON)."""
    def go():
        A = load(entry, n, metric, sets)
        doc = SystemDoc.from_matrix(re.sub(r"\W", "_", entry), A)
        _emit(as_json, A.to_json_obj(), print_doc(doc))
    _run(go)


@main.command()
@click.option("--param", "param_src", required=True, help="Parametrizing operator D.")
@click.option("--system", "system_src", required=True, help="Operator D1 to parametrize.")
@common
def verify(param_src, system_src, as_json, n, metric, sets, name):
    """Check that SYSTEM generates the compatibility conditions of PARAM."""
    def go():
        D = load(param_src, n, metric, sets, name)
        D1 = load(system_src, n, metric, sets, name)
        v = check_cc_generation(D1, D)
        _emit(as_json, {"status": v.status, "ok": v.ok}, ("pass: " if v.ok else "fail: ") + v.status)
        if not v.ok:
            raise Negative
    _run(go)


if __name__ == "__main__":
    main()
