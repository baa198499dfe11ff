"""Check verdicts shared by every verification routine."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value


@dataclass
class CheckResult:
    check: str
    verdict: Verdict
    witnesses: dict = field(default_factory=dict)
    micros: int | None = None

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


@dataclass
class Report:
    results: list[CheckResult] = field(default_factory=list)

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)

    def __getitem__(self, check: str) -> CheckResult:
        for r in self.results:
            if r.check == check:
                return r
        raise KeyError(check)

    def __contains__(self, check: str) -> bool:
        return any(r.check == check for r in self.results)

    @property
    def passed(self) -> bool:
        return all(r.verdict is Verdict.PASS for r in self.results)

    @property
    def failed(self) -> list[CheckResult]:
        return [r for r in self.results if r.verdict is Verdict.FAIL]

    def verdict(self) -> Verdict:
        if self.failed:
            return Verdict.FAIL
        if self.passed:
            return Verdict.PASS
        return Verdict.INCONCLUSIVE

    def extend(self, other: "Report", prefix: str = "") -> None:
        for r in other:
            self.results.append(CheckResult(prefix + r.check, r.verdict, r.witnesses, r.micros))
