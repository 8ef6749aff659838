import math
from pathlib import Path

import pytest

import cassure

DATA = Path(__file__).resolve().parents[2] / "tests" / "data"
MODEL = (DATA / "nuclear.prism").read_text()
PROPS = (DATA / "nuclear.props").read_text()

COIN = """dtmc
module c
  s : [0..2] init 0;
  [] s=0 -> 0.5:(s'=1) + 0.5:(s'=2);
  [] s>0 -> (s'=s);
endmodule
"""


def test_state_count():
    states, transitions = cassure.state_count(MODEL)
    assert states == 142
    assert transitions == 353


def test_check_case_study():
    results = {r["property"]: r for r in cassure.check(MODEL, PROPS)}
    assert len(results) == 17
    assert results["P_succ"]["value"] == pytest.approx(0.93206534790698992, abs=1e-7)
    assert math.isinf(results["R_dose"]["value"])
    assert results["P_stopped"]["verdict"] is True
    assert results["P_noOpOutside"]["verdict"] is False


def test_constants_and_methods():
    r = cassure.check(MODEL, 'P=? [ F loc = 4 ]', {"p_rad_crit": 0.0, "p_rad_med": 0.0}, method="jacobi")
    assert r[0]["value"] == pytest.approx(0.96059601, abs=1e-9)


def test_errors_are_python_exceptions():
    with pytest.raises(cassure.DiagnosticError):
        cassure.check(COIN, "P=? [ X s = 1 ]")
    with pytest.raises(ValueError):
        cassure.check(COIN, "P=? [ F s = 1 ]", {"nosuch": 1.0})


def test_generate_validate_and_regenerate():
    dsl = cassure.generate(MODEL, PROPS, name="nuclear")
    assert not [i for i in cassure.validate(dsl) if i[0] == "error"]
    assert cassure.generate(MODEL, PROPS, name="nuclear", previous=dsl) == dsl
    assert cassure.export_dot(dsl).startswith("digraph")


def test_ingest_and_impact():
    dsl = cassure.generate(COIN, 'P=? [ F s = 1 ]', name="coin")
    dsl += '\nannotate G.prop1 placeholder monitor_id="m1"\n'
    events = '{"timestamp":"t","monitor_id":"m1","kind":"violation","value":"bad"}\n'
    updated, reopened = cassure.ingest(dsl, events)
    assert reopened == ["G.prop1"]
    summary, classes = cassure.impact(updated)
    assert classes["G.prop1"] == "invalid"
    assert summary == "valid=1 invalid=1 uncertain=0"


def test_evidence_cost():
    assert cassure.evidence_cost_hours("2h") < cassure.evidence_cost_hours("1d")
    assert cassure.evidence_cost_hours("later") is None
