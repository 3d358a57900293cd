"""Run traces: the ordered record of screens in one directed-evolution run.

Serialized as JSON lines: a header object echoing the config and seed,
then one object per screen with step, variant, fitness, best-so-far and
the fitted kernel hyperparameter (null for initialization screens).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class TraceRecord:
    step: int
    variant: str
    fitness: float
    best: float
    theta: float | None = None


@dataclass
class RunTrace:
    config: dict = field(default_factory=dict)
    seed: int = 0
    records: list[TraceRecord] = field(default_factory=list)

    def record(self, variant: str, fitness: float, theta: float | None = None) -> TraceRecord:
        best = max(fitness, self.records[-1].best) if self.records else fitness
        rec = TraceRecord(len(self.records) + 1, variant, fitness, best, theta)
        self.records.append(rec)
        return rec

    def __len__(self) -> int:
        return len(self.records)

    @property
    def best(self) -> float:
        if not self.records:
            raise ValueError("trace is empty")
        return self.records[-1].best

    def best_at(self, count: int) -> float:
        """Best-so-far after `count` screens, right-extended past the end."""
        if count < 1:
            raise ValueError("count must be >= 1")
        return self.records[min(count, len(self.records)) - 1].best

    def to_jsonl(self) -> str:
        lines = [json.dumps({"config": self.config, "seed": self.seed}, sort_keys=True)]
        for r in self.records:
            lines.append(
                json.dumps(
                    {
                        "step": r.step,
                        "variant": r.variant,
                        "fitness": r.fitness,
                        "best": r.best,
                        "theta": r.theta,
                    }
                )
            )
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "RunTrace":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty trace")
        header = json.loads(lines[0])
        trace = cls(config=header.get("config", {}), seed=header.get("seed", 0))
        for ln in lines[1:]:
            obj = json.loads(ln)
            trace.records.append(
                TraceRecord(
                    obj["step"], obj["variant"], obj["fitness"], obj["best"],
                    obj.get("theta"),
                )
            )
        return trace

    @classmethod
    def load(cls, path: str | Path) -> "RunTrace":
        return cls.from_jsonl(Path(path).read_text())
