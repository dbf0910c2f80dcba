"""One test per acceptance criterion, each printing a single PASS/FAIL line.

Criteria 1-9 read the matching checks out of a full ``leavitt verify --json``
run at the default seed; criterion 10 repeats that run and compares bytes.
"""

import contextlib
import io
import json

import pytest

from leavitt.harness import CHECKS
from leavitt.harness.cli import main

TITLES = {
    1: "graph layer on fig1",
    2: "disjoint cycles vs closed paths on the corpus",
    3: "algebra: ring axioms, relations, orthogonality on P_c",
    4: "principal membership on fig3",
    5: "module action associativity and generator identities",
    6: "CK family on series and embedding of the module",
    7: "essential witnesses on random and geometric series",
    8: "corner extension, inverse action, U = U-hat census",
    9: "reductions: theta, transport, sources, round trips",
    10: "byte-identical JSON across two verify runs",
}


def _verify() -> tuple[int, str]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["verify", "--json"])
    return code, buf.getvalue()


@pytest.fixture(scope="module")
def runs():
    return _verify(), _verify()


def _announce(capsys, n: int, ok: bool, detail: str = "") -> None:
    with capsys.disabled():
        print(f"\n[criterion {n:>2}] {'PASS' if ok else 'FAIL'}  {TITLES[n]}{detail}")


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(runs, capsys, n):
    (_, out), _ = runs
    report = json.loads(out)
    names = sorted(name for name, chk in CHECKS.items() if chk.criterion == n)
    got = {c["name"]: c for c in report["checks"] if c["criterion"] == n}
    ok = sorted(got) == names and all(c["status"] == "pass" for c in got.values())
    bad = [f"{k}={c['status']}" for k, c in got.items() if c["status"] != "pass"]
    _announce(capsys, n, ok, f"  ({', '.join(bad)})" if bad else "")
    assert sorted(got) == names
    for name, c in got.items():
        assert c["status"] == "pass", (name, c["counterexample"])
        assert c["counts"]["passed"] > 0, name


def test_criterion_10(runs, capsys):
    (code1, out1), (code2, out2) = runs
    ok = out1 == out2 and code1 == code2 == 0
    _announce(capsys, 10, ok)
    assert out1 == out2
    assert code1 == code2 == 0
