"""Evaluation report structure and serialization (JSON + plain table)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class EvalReport:
    protocol: str
    model: str
    micro: dict = field(default_factory=dict)
    per_category: dict = field(default_factory=dict)
    qa_metrics: dict | None = None
    taxonomy: dict = field(default_factory=dict)
    resources: dict | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        data = {
            "protocol": self.protocol,
            "model": self.model,
            "micro": self.micro,
            "per_category": self.per_category,
            "taxonomy": self.taxonomy,
        }
        if self.qa_metrics is not None:
            data["qa"] = self.qa_metrics
        if self.resources is not None:
            data["resources"] = self.resources
        if self.extra:
            data["extra"] = self.extra
        return data

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(self.as_dict(), ensure_ascii=False, indent=1), encoding="utf-8"
        )
        return path

    def table(self) -> str:
        lines = [
            f"protocol: {self.protocol}   model: {self.model}",
            "-" * 64,
            f"{'category':<28}{'P':>8}{'R':>8}{'F1':>8}{'support':>10}",
        ]
        micro = self.micro
        if micro:
            lines.append(
                f"{'micro':<28}{micro.get('precision', 0):>8.3f}"
                f"{micro.get('recall', 0):>8.3f}{micro.get('f1', 0):>8.3f}"
                f"{micro.get('tp', 0) + micro.get('fn', 0):>10}"
            )
        for label, prf in sorted(self.per_category.items()):
            lines.append(
                f"{label:<28}{prf.get('precision', 0):>8.3f}"
                f"{prf.get('recall', 0):>8.3f}{prf.get('f1', 0):>8.3f}"
                f"{prf.get('tp', 0) + prf.get('fn', 0):>10}"
            )
        if self.qa_metrics:
            lines.append("-" * 64)
            lines.append(
                f"{'QA exact match':<28}{self.qa_metrics.get('em', 0):>8.3f}"
            )
            lines.append(
                f"{'QA token F1':<28}{self.qa_metrics.get('token_f1', 0):>8.3f}"
            )
        if self.taxonomy:
            lines.append("-" * 64)
            lines.append(
                "errors: "
                + "  ".join(f"{k}={v}" for k, v in sorted(self.taxonomy.items()))
            )
        if self.resources:
            lines.append("-" * 64)
            lines.append(
                f"wall {self.resources.get('wall_seconds', 0):.2f} s   "
                f"energy {self.resources.get('energy_kWh', 0):.6f} kWh   "
                f"carbon {self.resources.get('kg_CO2e', 0):.6f} kg CO2e"
            )
        return "\n".join(lines)
