import copy
import json
from fractions import Fraction as F
from importlib import resources

import pytest

from quasisure import InputError, Measure, MeasureFamily, check_countable_cover
from quasisure.measures import NEG_INF
from quasisure.scenario import (
    Check,
    RunOptions,
    ScenarioError,
    dumps,
    emit_scenario,
    exit_code,
    parse_scenario,
    report_document,
    run_checks,
    run_stabilize,
    scenario_hash,
    select_checks,
)
from quasisure.uvol import gen_uncertain_vol

BUNDLED = sorted(p.name for p in resources.files("quasisure.scenarios").iterdir() if p.name.endswith(".json"))


def bundled(name):
    return json.loads(resources.files("quasisure.scenarios").joinpath(name).read_text())


MINIMAL = {
    "atoms": 4,
    "measures": {"U": ["1/4", "1/4", "1/4", "1/4"], "d0": [1, 0, 0, 0]},
    "sigma_algebras": {"G2": [[0, 1], [2, 3]], "T": [[0, 1, 2, 3]], "P": [[0], [1], [2], [3]]},
    "random_variables": {"X": ["2", "0", "4", "4"], "Y": ["-inf", "1", "2", "3"]},
    "checks": [{"kind": "recursivity", "params": {"sigma": "G2", "variable": "X"}}],
}


def edited(**changes):
    doc = copy.deepcopy(MINIMAL)
    doc.update(changes)
    return doc


class TestParse:
    def test_minimal(self):
        sc = parse_scenario(MINIMAL)
        assert sc.measures["U"] == Measure.uniform(4)
        assert sc.random_variables["Y"][0] is NEG_INF
        assert sc.checks == [Check("recursivity", {"sigma": "G2", "variable": "X"})]
        assert sc.family(["d0"]).names == ("d0",)

    @pytest.mark.parametrize("name", BUNDLED)
    def test_round_trip_bundled(self, name):
        doc = bundled(name)
        sc = parse_scenario(doc)
        again = emit_scenario(sc)
        assert again == doc
        assert parse_scenario(again) == sc

    def test_round_trip_generated(self):
        sc = gen_uncertain_vol(2, ["1", "3/2"])
        assert parse_scenario(json.loads(dumps(emit_scenario(sc)))) == sc

    def test_hash_is_stable_and_sensitive(self):
        a = parse_scenario(MINIMAL)
        assert scenario_hash(a) == scenario_hash(parse_scenario(copy.deepcopy(MINIMAL)))
        b = parse_scenario(edited(random_variables={"X": ["2", "0", "4", "5"]}))
        assert scenario_hash(a) != scenario_hash(b)


class TestValidation:
    @pytest.mark.parametrize("doc,location", [
        (edited(measures={"U": ["1/2", "1/2", "1/8", "0"]}), "measures/U"),
        (edited(measures={"U": ["1/2", "1/2", "0"]}), "measures/U"),
        (edited(measures={"U": ["3/2", "-1/2", "0", "0"]}), "measures/U/1"),
        (edited(measures={"U": [0.25, 0.25, 0.25, 0.25]}), "measures/U/0"),
        (edited(sigma_algebras={"G2": [[0, 1], [1, 2, 3]]}), "sigma_algebras/G2"),
        (edited(random_variables={"X": ["1/0", "0", "0", "0"]}), "random_variables/X/0"),
        (edited(checks=[{"kind": "hahn", "params": {}}]), "checks/0/params"),
        (edited(checks=[{"kind": "hahn", "params": {"sigma": "nope"}}]), "checks/0/params/sigma"),
        (edited(checks=[{"kind": "hahn", "params": {"sigma": "G2", "bogus": 1}}]), "checks/0/params/bogus"),
        (edited(checks=[{"kind": "martingale", "params": {}}]), "checks/0/params"),
        (edited(checks=[{"kind": "frobnicate"}]), "checks/0/kind"),
        (edited(filtration=["G2", "T"]), "filtration"),
        (edited(extra=1), "<root>"),
    ])
    def test_error_locations(self, doc, location):
        with pytest.raises(ScenarioError) as info:
            parse_scenario(doc)
        assert info.value.location == location
        assert str(info.value).startswith(location)

    def test_sum_message(self):
        with pytest.raises(ScenarioError, match="weights sum to 9/8, not 1"):
            parse_scenario(edited(measures={"U": ["1/2", "1/2", "1/8", "0"]}))

    def test_scenario_error_is_input_error(self):
        assert issubclass(ScenarioError, InputError)

    def test_condexp_expected_parsed(self):
        doc = edited(checks=[{"kind": "condexp",
                              "params": {"sigma": "G2", "variable": "X", "expected": ["1", "1", "4", "-inf"]}}])
        sc = parse_scenario(doc)
        assert sc.checks[0].params["expected"] == [1, 1, 4, NEG_INF]
        assert emit_scenario(sc)["checks"][0]["params"]["expected"] == ["1", "1", "4", "-inf"]


class TestRun:
    def test_recursivity_failure(self):
        sc = parse_scenario(bundled("recursivity_failure.json"))
        report = run_checks(sc, sc.checks)
        res = report["0:recursivity:recursivity[0,1]"]
        assert res.verdict.value == "fail"
        assert (res.witnesses["E_s(E_t(X))"], res.witnesses["E_s(X)"]) == (3, F(5, 2))
        assert exit_code(report) == 1

    def test_condexp_expected_mismatch(self):
        doc = edited(checks=[{"kind": "condexp",
                              "params": {"sigma": "G2", "variable": "X", "expected": ["2", "2", "4", "4"]}}])
        report = run_checks(parse_scenario(doc), parse_scenario(doc).checks)
        assert report["0:condexp:value"].passed
        doc["checks"][0]["params"]["expected"] = ["3", "3", "4", "4"]
        sc = parse_scenario(doc)
        assert run_checks(sc, sc.checks)["0:condexp:value"].verdict.value == "fail"

    def test_seeded_samples_deterministic(self):
        sc = parse_scenario(edited(checks=[{"kind": "consistency", "params": {"sigma": "G2", "samples": ["X"]}}]))
        a = report_document(run_checks(sc, sc.checks, RunOptions(seed=7)), sc)
        b = report_document(run_checks(sc, sc.checks, RunOptions(seed=7)), sc)
        assert a == b

    def test_timing_only_on_request(self):
        sc = parse_scenario(MINIMAL)
        assert all(r.micros is None for r in run_checks(sc, sc.checks))
        timed = run_checks(sc, sc.checks, RunOptions(timing=True))
        assert all(isinstance(r.micros, int) for r in timed)

    def test_default_checks(self):
        sc = parse_scenario(MINIMAL)
        assert [c.params["sigma"] for c in select_checks(sc, "hahn")] == ["G2", "T", "P"]
        assert select_checks(sc, "martingale") == sc.checks

    def test_stabilize(self):
        sc = parse_scenario(edited(checks=[{"kind": "consistency", "params": {"sigma": "G2"}}]))
        report = run_stabilize(sc)
        w = report["0:stabilize"].witnesses
        assert w["status"] == "fixpoint" and len(w["members"]) == 4 and len(w["added"]) == 2
        assert (F(1, 2), 0, F(1, 4), F(1, 4)) in {m.weights for m in w["members"].values()}
        short = run_stabilize(sc, RunOptions(budget=3))
        assert short["0:stabilize"].verdict.value == "inconclusive"
        assert exit_code(short) == 0

    def test_report_document_shape(self):
        sc = parse_scenario(MINIMAL)
        doc = report_document(run_checks(sc, sc.checks), sc)
        assert set(doc) == {"version", "scenario_hash", "results"}
        assert set(doc["results"][0]) == {"check", "verdict", "witnesses", "micros"}
        text = dumps(doc)
        assert "." not in "".join(json.dumps(r["witnesses"]) for r in doc["results"])
        assert text.endswith("\n")


class TestUncertainVol:
    def test_one_step(self):
        sc = gen_uncertain_vol(1, ["1", "2"])
        assert sc.atoms == 4 and sc.atom_labels == ["-2", "-1", "+1", "+2"]
        assert len(sc.measures) == 2
        assert sc.measures["det_1"].weights == (0, F(1, 2), F(1, 2), 0)

    def test_two_steps(self):
        sc = gen_uncertain_vol(2, [1, 2])
        assert sc.atoms == 16 and len(sc.measures) == 8
        generating = [k for k in sc.measures if k.startswith("det_")]
        assert len(generating) == 4
        assert [len(sc.sigma_algebras[f].blocks) for f in sc.filtration] == [1, 4, 16]
        Phi = sc.family(generating)
        res = check_countable_cover(Phi, sc.family(), sc.sigma_algebras["F1"])
        assert res.covered
        # every member is a martingale measure for the price path
        S = sc.random_variables["S_T"]
        assert all(m.expect(S) == 0 for m in sc.measures.values())

    def test_sign_symmetry(self):
        # flipping every sign maps the family onto itself
        sc = gen_uncertain_vol(2, [1, 2])
        weights = {m.weights for m in sc.measures.values()}
        assert {tuple(reversed(w)) for w in weights} == weights
        assert all(m.weights == tuple(reversed(m.weights)) for k, m in sc.measures.items() if k.startswith("det_"))

    @pytest.mark.parametrize("steps,vols", [(1, ["1"]), (0, ["1", "2"]), (1, ["0", "1"]), (1, ["1", "-2"]),
                                            (6, ["1", "2"]), (2, ["1", "1"])])
    def test_rejected(self, steps, vols):
        with pytest.raises(InputError):
            gen_uncertain_vol(steps, vols)

    def test_size_guard_message(self):
        with pytest.raises(InputError, match="exceeds the limit"):
            gen_uncertain_vol(7, ["1", "2"])


def test_family_names_preserved_through_emit():
    sc = parse_scenario(MINIMAL)
    assert isinstance(sc.family(), MeasureFamily)
    assert list(emit_scenario(sc)["measures"]) == ["U", "d0"]
