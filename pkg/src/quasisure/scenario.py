"""Scenario files: schema, parsing, emission and check execution.

A scenario is a JSON document. Rationals are ``"p/q"`` strings (plain
integers are accepted on input) and ``"-inf"`` marks the extended value.
Reports are JSON as well and are byte-identical for identical inputs unless
timing is requested.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable

import jsonschema

from . import __version__
from .exceptions import InputError
from .expectation import (
    augmented_samples,
    check_axioms,
    check_conditional_axioms,
    check_consistency,
    check_dominance,
    cond_sublinear,
    qs_difference,
)
from .filtration import AdaptedProcess, Filtration, check_recursivity, classify_martingale, conditional_chain
from .generate import random_variable
from .hahn import build_dominating_partition, check_countable_cover, verify_hahn
from .measures import NEG_INF, Measure, MeasureFamily, RandomVariable, format_value, to_extended, to_fraction
from .pasting import Closure, stabilize
from .report import CheckResult, Report, Verdict
from .space import SigmaAlgebra

CHECK_KINDS = ("axioms", "hahn", "condexp", "dominance", "consistency", "recursivity", "martingale", "oracle")

_RATIONAL = {"oneOf": [{"type": "integer"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]}
_EXTENDED = {"oneOf": [_RATIONAL, {"const": "-inf"}]}
_NAMES = {"type": "array", "items": {"type": "string"}}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["atoms", "measures", "sigma_algebras", "checks"],
    "additionalProperties": False,
    "properties": {
        "description": {"type": "string"},
        "atom_labels": _NAMES,
        "atoms": {"type": "integer", "minimum": 1},
        "measures": {"type": "object", "minProperties": 1,
                     "additionalProperties": {"type": "array", "items": _RATIONAL}},
        "sigma_algebras": {"type": "object",
                           "additionalProperties": {
                               "type": "array", "minItems": 1,
                               "items": {"type": "array", "minItems": 1,
                                         "items": {"type": "integer", "minimum": 0}}}},
        "filtration": _NAMES,
        "random_variables": {"type": "object", "additionalProperties": {"type": "array", "items": _EXTENDED}},
        "checks": {"type": "array", "items": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {"kind": {"enum": list(CHECK_KINDS)}, "params": {"type": "object"}},
        }},
    },
}

# allowed params per kind; True marks required ones
_PARAMS = {
    "axioms": {"family": False, "samples": False},
    "hahn": {"family": False, "sigma": True, "cover": False},
    "condexp": {"family": False, "sigma": True, "variable": True, "expected": False},
    "dominance": {"family": False, "sigma": True, "variable": True},
    "consistency": {"family": False, "sigma": True, "samples": False, "budget": False},
    "recursivity": {"family": False, "sigma": False, "variable": True},
    "martingale": {"family": False, "variable": False, "process": False, "expected": False},
    "oracle": {},
}


class ScenarioError(InputError):
    """Schema or semantic violation; ``location`` names the offending field."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


@dataclass
class Check:
    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class Scenario:
    atoms: int
    measures: dict[str, Measure]
    sigma_algebras: dict[str, SigmaAlgebra]
    random_variables: dict[str, RandomVariable] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    filtration: list[str] | None = None
    description: str | None = None
    atom_labels: list[str] | None = None

    def family(self, names=None) -> MeasureFamily:
        names = list(self.measures) if names is None else list(names)
        return MeasureFamily([self.measures[k] for k in names], names)

    def filtration_levels(self) -> Filtration:
        if not self.filtration:
            raise InputError("scenario has no filtration")
        return Filtration(self.sigma_algebras[k] for k in self.filtration)


# -- parsing ----------------------------------------------------------------

def _location(path) -> str:
    return "/".join(str(p) for p in path) or "<root>"


def validate_document(doc: Any) -> None:
    """Raise :class:`ScenarioError` for the first schema violation (in path order)."""
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        e = errors[0]
        raise ScenarioError(_location(e.absolute_path), e.message)


def _rational(value, loc):
    try:
        return to_fraction(value)
    except (InputError, ZeroDivisionError) as exc:
        raise ScenarioError(loc, str(exc)) from None


def _names(value, pool, loc, what):
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ScenarioError(loc, f"expected a list of {what} names")
    for k, name in enumerate(value):
        if name not in pool:
            raise ScenarioError(f"{loc}/{k}", f"unknown {what} {name!r}")
    return value


def _check_params(k: int, check: Check, sc: Scenario) -> None:
    loc = f"checks/{k}/params"
    allowed = _PARAMS[check.kind]
    for key in check.params:
        if key not in allowed:
            raise ScenarioError(f"{loc}/{key}", f"unknown parameter for {check.kind} check")
    for key, required in allowed.items():
        if required and key not in check.params:
            raise ScenarioError(loc, f"{check.kind} check needs {key!r}")
    p = check.params
    if "family" in p:
        _names(p["family"], sc.measures, f"{loc}/family", "measure")
        if not p["family"]:
            raise ScenarioError(f"{loc}/family", "empty family")
    if "cover" in p:
        _names(p["cover"], sc.measures, f"{loc}/cover", "measure")
    for key in ("samples", "process"):
        if key in p:
            _names(p[key], sc.random_variables, f"{loc}/{key}", "random variable")
    if "sigma" in p and p["sigma"] not in sc.sigma_algebras:
        raise ScenarioError(f"{loc}/sigma", f"unknown sigma algebra {p['sigma']!r}")
    if "variable" in p and p["variable"] not in sc.random_variables:
        raise ScenarioError(f"{loc}/variable", f"unknown random variable {p['variable']!r}")
    if "budget" in p and (not isinstance(p["budget"], int) or p["budget"] < 1):
        raise ScenarioError(f"{loc}/budget", "budget must be a positive integer")
    if check.kind == "condexp" and "expected" in p:
        values = p["expected"]
        if not isinstance(values, list) or len(values) != sc.atoms:
            raise ScenarioError(f"{loc}/expected", f"expected {sc.atoms} values")
        try:
            p["expected"] = [to_extended(v) for v in values]
        except (InputError, ZeroDivisionError) as exc:
            raise ScenarioError(f"{loc}/expected", str(exc)) from None
    if check.kind == "martingale":
        if "expected" in p and p["expected"] not in ("martingale", "submartingale", "supermartingale", "none"):
            raise ScenarioError(f"{loc}/expected", "unknown martingale class")
        if ("variable" in p) == ("process" in p):
            raise ScenarioError(loc, "martingale check needs exactly one of 'variable' or 'process'")
        if "process" in p and sc.filtration and len(p["process"]) != len(sc.filtration):
            raise ScenarioError(f"{loc}/process", "process length differs from the filtration")
    if check.kind in ("martingale", "recursivity") and "sigma" not in p and not sc.filtration:
        raise ScenarioError(loc, f"{check.kind} check needs a filtration or a 'sigma'")


def parse_scenario(doc: dict) -> Scenario:
    """Validate a decoded JSON document and build a :class:`Scenario`."""
    validate_document(doc)
    n = doc["atoms"]
    measures = {}
    for name, raw in doc["measures"].items():
        loc = f"measures/{name}"
        if len(raw) != n:
            raise ScenarioError(loc, f"has {len(raw)} weights, expected {n}")
        w = [_rational(v, f"{loc}/{i}") for i, v in enumerate(raw)]
        for i, v in enumerate(w):
            if v < 0:
                raise ScenarioError(f"{loc}/{i}", f"negative weight {v}")
        if sum(w) != 1:
            raise ScenarioError(loc, f"weights sum to {sum(w)}, not 1")
        measures[name] = Measure(w)

    sigmas = {}
    for name, blocks in doc["sigma_algebras"].items():
        loc = f"sigma_algebras/{name}"
        try:
            sigmas[name] = SigmaAlgebra(blocks, n)
        except InputError as exc:
            raise ScenarioError(loc, str(exc)) from None

    variables = {}
    for name, raw in doc.get("random_variables", {}).items():
        loc = f"random_variables/{name}"
        if len(raw) != n:
            raise ScenarioError(loc, f"has {len(raw)} values, expected {n}")
        vals = []
        for i, v in enumerate(raw):
            try:
                vals.append(to_extended(v))
            except (InputError, ZeroDivisionError) as exc:
                raise ScenarioError(f"{loc}/{i}", str(exc)) from None
        variables[name] = RandomVariable(vals)

    filtration = doc.get("filtration")
    if filtration is not None:
        _names(filtration, sigmas, "filtration", "sigma algebra")
        try:
            Filtration(sigmas[k] for k in filtration)
        except InputError as exc:
            raise ScenarioError("filtration", str(exc)) from None

    labels = doc.get("atom_labels")
    if labels is not None and len(labels) != n:
        raise ScenarioError("atom_labels", f"has {len(labels)} labels, expected {n}")

    sc = Scenario(n, measures, sigmas, variables, [], filtration, doc.get("description"), labels)
    for k, raw in enumerate(doc["checks"]):
        check = Check(raw["kind"], json.loads(json.dumps(raw.get("params", {}))))
        _check_params(k, check, sc)
        sc.checks.append(check)
    return sc


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return parse_scenario(doc)


# -- emission ---------------------------------------------------------------

def jsonable(obj):
    """Exact, deterministic JSON form of library values."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction) or obj is NEG_INF:
        return format_value(obj)
    if isinstance(obj, (frozenset, set)):
        return sorted(jsonable(x) for x in obj)
    if isinstance(obj, (Measure, RandomVariable)):
        return [format_value(v) for v in (obj.weights if isinstance(obj, Measure) else obj.values)]
    if isinstance(obj, SigmaAlgebra):
        return [sorted(b) for b in obj.blocks]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _encode_params(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        out[k] = [format_value(x) for x in v] if k == "expected" and isinstance(v, list) else v
    return out


def emit_scenario(sc: Scenario) -> dict:
    doc: dict[str, Any] = {"atoms": sc.atoms}
    if sc.description is not None:
        doc["description"] = sc.description
    if sc.atom_labels is not None:
        doc["atom_labels"] = list(sc.atom_labels)
    doc["measures"] = {k: jsonable(m) for k, m in sc.measures.items()}
    doc["sigma_algebras"] = {k: jsonable(s) for k, s in sc.sigma_algebras.items()}
    if sc.filtration is not None:
        doc["filtration"] = list(sc.filtration)
    doc["random_variables"] = {k: jsonable(x) for k, x in sc.random_variables.items()}
    doc["checks"] = [{"kind": c.kind, "params": _encode_params(c.params)} if c.params else {"kind": c.kind}
                     for c in sc.checks]
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def scenario_hash(sc: Scenario) -> str:
    canonical = json.dumps(emit_scenario(sc), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# -- execution ---------------------------------------------------------------

@dataclass
class RunOptions:
    budget: int | None = None
    seed: int | None = None
    exhaustive_limit: int = 12
    timing: bool = False


def _seeded_samples(sc: Scenario, opts: RunOptions) -> list[RandomVariable]:
    if opts.seed is None:
        return []
    rng = random.Random(opts.seed)
    return [random_variable(rng, sc.atoms) for _ in range(3)]


def _family(sc, p):
    return sc.family(p.get("family"))


def _samples(sc, p, opts):
    names = p.get("samples", list(sc.random_variables))
    return [sc.random_variables[k] for k in names] + _seeded_samples(sc, opts)


def _run_axioms(sc, p, opts):
    return check_axioms(_family(sc, p), _samples(sc, p, opts) or [RandomVariable.constant(sc.atoms, 0),
                                                                   RandomVariable.constant(sc.atoms, 1)])


def _run_hahn(sc, p, opts):
    family, sigma = _family(sc, p), sc.sigma_algebras[p["sigma"]]
    report = verify_hahn(build_dominating_partition(family, sigma), family, sigma,
                         exhaustive_limit=opts.exhaustive_limit)
    if "cover" in p:
        phis = sc.family(p["cover"])
        try:
            cover = check_countable_cover(phis, family, sigma)
        except InputError as exc:
            report.results.append(CheckResult("cover", Verdict.FAIL, {"reason": str(exc)}))
        else:
            witnesses = {"cover": {family.names[t]: [phis.names[i] for i in idx]
                                   for t, idx in cover.witnesses.items()}}
            if cover.uncovered:
                witnesses["uncovered"] = [family.names[t] for t in cover.uncovered]
            report.results.append(CheckResult("cover", Verdict.PASS if cover.covered else Verdict.FAIL,
                                              witnesses))
    return report


def _run_condexp(sc, p, opts):
    family, sigma = _family(sc, p), sc.sigma_algebras[p["sigma"]]
    X = sc.random_variables[p["variable"]]
    dp = build_dominating_partition(family, sigma)
    res = cond_sublinear(X, family, sigma, dp)
    witness = {"value": res.value, "polar_mask": res.polar_mask}
    verdict = Verdict.PASS
    if "expected" in p:
        d = qs_difference(res.value, p["expected"], family)
        if d:
            verdict = Verdict.FAIL
            witness["atoms"] = d
    report = Report([CheckResult("value", verdict, witness)])
    samples = augmented_samples(family, sigma, [X] + _seeded_samples(sc, opts))
    report.extend(check_conditional_axioms(family, sigma, samples, dp))
    return report


def _run_dominance(sc, p, opts):
    family, sigma = _family(sc, p), sc.sigma_algebras[p["sigma"]]
    return check_dominance(sc.random_variables[p["variable"]], family, sigma)


def _run_consistency(sc, p, opts):
    family, sigma = _family(sc, p), sc.sigma_algebras[p["sigma"]]
    budget = opts.budget or p.get("budget", 500)
    samples = augmented_samples(family, sigma, _samples(sc, p, opts))
    return check_consistency(family, sigma, samples, budget=budget)


def _filtration_for(sc, p) -> Filtration:
    if "sigma" in p:
        return Filtration([SigmaAlgebra.trivial(sc.atoms), sc.sigma_algebras[p["sigma"]]])
    return sc.filtration_levels()


def _run_recursivity(sc, p, opts):
    return check_recursivity(sc.random_variables[p["variable"]], _family(sc, p), _filtration_for(sc, p))


def _run_martingale(sc, p, opts):
    family, filt = _family(sc, p), _filtration_for(sc, p)
    if "variable" in p:
        process = conditional_chain(sc.random_variables[p["variable"]], family, filt)
    else:
        process = AdaptedProcess(sc.random_variables[k] for k in p["process"])
    found = classify_martingale(process, family, filt)
    expected = p.get("expected", "martingale")
    witness = {"class": found.value, "expected": expected}
    if "variable" in p:
        witness["chain"] = list(process.variables)
    return Report([CheckResult("class", Verdict.PASS if found.value == expected else Verdict.FAIL, witness)])


def _run_oracle(sc, p, opts):
    from .oracle import oracle_check
    return oracle_check(sc, exhaustive_limit=opts.exhaustive_limit)


_RUNNERS: dict[str, Callable] = {
    "axioms": _run_axioms,
    "hahn": _run_hahn,
    "condexp": _run_condexp,
    "dominance": _run_dominance,
    "consistency": _run_consistency,
    "recursivity": _run_recursivity,
    "martingale": _run_martingale,
    "oracle": _run_oracle,
}


def _timed(fn, *args):
    start = time.perf_counter_ns()
    out = fn(*args)
    return out, (time.perf_counter_ns() - start) // 1000


def run_checks(sc: Scenario, checks: list[Check], opts: RunOptions | None = None) -> Report:
    """Run ``checks`` in order; result names are ``"<index>:<kind>:<sub>"``."""
    opts = opts or RunOptions()
    report = Report()
    for k, check in enumerate(checks):
        sub, micros = _timed(_RUNNERS[check.kind], sc, check.params, opts)
        for r in sub:
            report.results.append(CheckResult(f"{k}:{check.kind}:{r.check}", r.verdict, r.witnesses,
                                              micros if opts.timing else None))
    return report


def default_checks(sc: Scenario, command: str) -> list[Check]:
    """Checks a command runs when the scenario lists none of its kinds."""
    names = list(sc.random_variables)
    if command == "hahn":
        return [Check("hahn", {"sigma": s}) for s in sc.sigma_algebras]
    if command == "condexp":
        return [Check("condexp", {"sigma": s, "variable": v}) for s in sc.sigma_algebras for v in names]
    if command == "martingale" and sc.filtration:
        return [c for v in names for c in (Check("recursivity", {"variable": v}),
                                           Check("martingale", {"variable": v}))]
    return []


COMMAND_KINDS = {
    "check": set(CHECK_KINDS),
    "hahn": {"hahn"},
    "condexp": {"condexp", "dominance"},
    "martingale": {"recursivity", "martingale"},
}


def select_checks(sc: Scenario, command: str) -> list[Check]:
    kinds = COMMAND_KINDS[command]
    chosen = [c for c in sc.checks if c.kind in kinds]
    return chosen or default_checks(sc, command)


def run_stabilize(sc: Scenario, opts: RunOptions | None = None) -> Report:
    """Close each (family, sigma) pair named by a consistency check under pasting."""
    opts = opts or RunOptions()
    targets = [c.params for c in sc.checks if c.kind == "consistency"]
    if not targets:
        targets = [{"sigma": s} for s in sc.sigma_algebras]
    report = Report()
    for k, p in enumerate(targets):
        family = _family(sc, p)
        budget = max(opts.budget or p.get("budget", 500), len(family))
        res, micros = _timed(stabilize, family, sc.sigma_algebras[p["sigma"]], budget)
        verdict = Verdict.PASS if res.status is Closure.FIXPOINT else Verdict.INCONCLUSIVE
        witness = {
            "sigma": p["sigma"],
            "status": res.status.value,
            "members": dict(res.family.items()),
            "added": list(res.family.names[len(family):]),
        }
        report.results.append(CheckResult(f"{k}:stabilize", verdict, witness, micros if opts.timing else None))
    return report


def report_document(report: Report, sc: Scenario) -> dict:
    return {
        "version": __version__,
        "scenario_hash": scenario_hash(sc),
        "results": [
            {"check": r.check, "verdict": r.verdict.value, "witnesses": jsonable(r.witnesses), "micros": r.micros}
            for r in report
        ],
    }


def exit_code(report: Report) -> int:
    return 1 if report.failed else 0
