"""Declarative run recipes: schema, validation, loading.

A recipe is a YAML file naming the corpus, models, hyperparameters, seeds,
and output directory for a run. Unknown keys are rejected up front. All
relative paths are resolved against the recipe file's location, and every
command serializes the effective configuration next to its outputs.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from minutemeta.errors import ConfigError

_SECTION_KEYS = {
    None: {
        "corpus", "language", "output_dir", "seeds", "boundary", "ner",
        "deslex", "prompts", "meter", "llm", "incremental", "split",
    },
    "seeds": {"split", "train", "deslex"},
    "boundary": {
        "base_model", "epochs", "learning_rate", "batch_size", "weight_decay",
        "max_length", "stride", "null_threshold", "negative_ratio",
        "calibrate_null_threshold", "keep_best", "device",
    },
    "ner": {
        "base_model", "epochs", "patience", "learning_rate", "batch_size",
        "grad_accumulation", "weight_decay", "max_length", "window_words",
        "window_stride_words", "use_crf", "device",
    },
    "deslex": {
        "enabled", "p_name_loc", "p_datetime", "placeholder", "seed",
        "consistent_mentions", "names", "locations",
    },
    "prompts": {"opening", "closing"},
    "meter": {"enabled", "carbon_intensity", "average_watts", "sampling_interval"},
    "llm": {
        "endpoint", "url", "headers", "model_name", "temperature",
        "max_output_tokens", "timeout", "retries", "responses_dir",
        "cache_dir", "few_shot",
    },
    "incremental": {"municipality", "k_max"},
    "split": {"protocol", "val_fraction"},
}


def _check_keys(data: dict, section: str | None) -> None:
    allowed = _SECTION_KEYS[section]
    unknown = set(data) - allowed
    if unknown:
        where = section or "recipe"
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


@dataclass
class Recipe:
    path: Path
    corpus: Path
    output_dir: Path
    language: str = "pt"
    seeds: dict = field(default_factory=lambda: {"split": 13, "train": 42, "deslex": 7})
    boundary: dict = field(default_factory=dict)
    ner: dict = field(default_factory=dict)
    deslex: dict = field(default_factory=dict)
    prompts: dict = field(default_factory=dict)
    meter: dict = field(default_factory=dict)
    llm: dict = field(default_factory=dict)
    incremental: dict = field(default_factory=dict)
    split: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path, overrides: dict | None = None) -> "Recipe":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"recipe file {path} does not exist")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"recipe is not valid YAML: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("recipe root must be a mapping")
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            section, _, leaf = key.partition(".")
            if leaf:
                data.setdefault(section, {})[leaf] = value
            else:
                data[section] = value
        _check_keys(data, None)
        for section in (
            "seeds", "boundary", "ner", "deslex", "prompts", "meter", "llm",
            "incremental", "split",
        ):
            if section in data:
                if not isinstance(data[section], dict):
                    raise ConfigError(f"recipe section {section!r} must be a mapping")
                _check_keys(data[section], section)

        if "corpus" not in data:
            raise ConfigError("recipe must name a corpus file")
        base = path.parent
        corpus = (base / data["corpus"]).resolve()
        output_dir = (base / data.get("output_dir", "runs")).resolve()
        seeds = {"split": 13, "train": 42, "deslex": 7}
        seeds.update(data.get("seeds", {}))
        return cls(
            path=path,
            corpus=corpus,
            output_dir=output_dir,
            language=data.get("language", "pt"),
            seeds=seeds,
            boundary=data.get("boundary", {}),
            ner=data.get("ner", {}),
            deslex=data.get("deslex", {}),
            prompts=data.get("prompts", {}),
            meter=data.get("meter", {}),
            llm=data.get("llm", {}),
            incremental=data.get("incremental", {}),
            split=data.get("split", {}),
        )

    def effective_dict(self) -> dict:
        return {
            "corpus": str(self.corpus),
            "output_dir": str(self.output_dir),
            "language": self.language,
            "seeds": self.seeds,
            "boundary": self.boundary,
            "ner": self.ner,
            "deslex": self.deslex,
            "prompts": self.prompts,
            "meter": self.meter,
            "llm": self.llm,
            "incremental": self.incremental,
            "split": self.split,
        }

    def digest(self) -> str:
        canonical = json.dumps(self.effective_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    def write_effective(self, out_dir: Path | None = None) -> Path:
        out_dir = Path(out_dir or self.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = self.effective_dict()
        payload["recipe_hash"] = self.digest()
        target = out_dir / "effective-recipe.yaml"
        target.write_text(yaml.safe_dump(payload, sort_keys=True), encoding="utf-8")
        return target

    def boundary_hyperparams(self):
        from minutemeta.boundary.model import BoundaryHyperparams

        return BoundaryHyperparams(**self.boundary, seed=self.seeds.get("train", 42))

    def ner_hyperparams(self):
        from minutemeta.ner.model import NerHyperparams

        known = {k: v for k, v in self.ner.items() if k != "use_crf"}
        return NerHyperparams(**known, seed=self.seeds.get("train", 42))

    def deslex_policy(self):
        if not self.deslex.get("enabled"):
            return None
        from minutemeta.deslex import DeslexPolicy, WordlistGenerator

        kwargs = {
            "p_name_loc": self.deslex.get("p_name_loc", 0.60),
            "p_datetime": self.deslex.get("p_datetime", 0.30),
            "municipality_placeholder": self.deslex.get("placeholder", "@MUNICIPIO"),
            "seed": self.deslex.get("seed", self.seeds.get("deslex", 7)),
            "language": self.language,
            "consistent_mentions": self.deslex.get("consistent_mentions", True),
        }
        if self.deslex.get("names") or self.deslex.get("locations"):
            kwargs["generator"] = WordlistGenerator(
                names=tuple(self.deslex.get("names", ())),
                locations=tuple(self.deslex.get("locations", ())),
            )
        return DeslexPolicy(**kwargs)

    def resource_meter(self):
        if self.meter.get("enabled") is False:
            return None
        if "carbon_intensity" not in self.meter:
            return None
        from minutemeta.evaluation import ResourceMeter

        return ResourceMeter(
            carbon_intensity=self.meter["carbon_intensity"],
            average_watts=self.meter.get("average_watts", 65.0),
            sampling_interval=self.meter.get("sampling_interval", 0.1),
        )
