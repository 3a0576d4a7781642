"""Verification reports: named checks with pass/fail/skipped status."""

from __future__ import annotations

from dataclasses import dataclass, field

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass
class Check:
    name: str
    status: str
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


@dataclass
class VerificationReport:
    """Ordered list of checks plus a log of exact-to-float conversions."""

    name: str
    checks: list[Check] = field(default_factory=list)
    conversions: list[str] = field(default_factory=list)

    def add(self, name: str, ok: bool, **detail) -> Check:
        c = Check(name, PASS if ok else FAIL, detail)
        self.checks.append(c)
        return c

    def skip(self, name: str, **detail) -> Check:
        c = Check(name, SKIPPED, detail)
        self.checks.append(c)
        return c

    def extend(self, other: "VerificationReport", prefix: str | None = None) -> None:
        for c in other.checks:
            name = f"{prefix}/{c.name}" if prefix else c.name
            self.checks.append(Check(name, c.status, c.detail))
        self.conversions.extend(x for x in other.conversions if x not in self.conversions)

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == FAIL]

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "checks": [c.to_json() for c in self.checks]}
        if self.conversions:
            out["approx_conversions"] = list(self.conversions)
        return out
