"""Check results as data: failures are findings, not exceptions."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Failure:
    label: str
    detail: str

    def __str__(self) -> str:
        return f"{self.label}: {self.detail}"


@dataclass
class Report:
    title: str
    failures: list[Failure] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, label: str, detail) -> None:
        self.failures.append(Failure(label, str(detail)))

    def note(self, text: str) -> None:
        self.notes.append(text)

    def merge(self, other: "Report") -> None:
        for f in other.failures:
            self.failures.append(Failure(f"{other.title}: {f.label}", f.detail))
        for n in other.notes:
            self.notes.append(f"{other.title}: {n}")

    def summary(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for f in self.failures:
            lines.append(f"  residual {f.label} = {f.detail}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "failures": [{"label": f.label, "detail": f.detail} for f in self.failures],
            "notes": list(self.notes),
        }
