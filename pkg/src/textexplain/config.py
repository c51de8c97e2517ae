"""Run configuration shared by the library surface and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import BadConfig

ALL_METHODS = ("pos", "sentence", "mlwe")
ALL_PERTURBATIONS = ("removal", "substitution")


@dataclass
class RunConfig:
    model: str = ""
    class_names: tuple[str, ...] | None = None
    methods: tuple[str, ...] = ALL_METHODS
    perturbations: tuple[str, ...] = ALL_PERTURBATIONS
    threshold: float = 0.5
    seed: int = 42
    pca_components: int = 16
    combine_pos: bool = True
    combine_sentence: bool = True
    combine_mlwe: bool = False
    antonyms: str | None = None
    pos_lexicon: str | None = None
    lemma_exceptions: str | None = None
    out: str = "."
    jobs: int = 1

    def validate(self) -> "RunConfig":
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown or not self.methods:
            raise BadConfig(f"methods must be a non-empty subset of {ALL_METHODS}")
        unknown = set(self.perturbations) - set(ALL_PERTURBATIONS)
        if unknown or not self.perturbations:
            raise BadConfig(f"perturbations must be a non-empty subset of {ALL_PERTURBATIONS}")
        if not 0.0 <= self.threshold <= 1.0:
            raise BadConfig(f"threshold must lie in [0,1], got {self.threshold}")
        if self.pca_components < 1:
            raise BadConfig("pca-components must be at least 1")
        if self.jobs < 1:
            raise BadConfig("jobs must be at least 1")
        return self

    def echo(self) -> dict:
        """Reproducibility echo embedded in every local report."""
        return {
            "model": self.model,
            "methods": list(self.methods),
            "perturbations": list(self.perturbations),
            "threshold": self.threshold,
            "seed": self.seed,
            "pca_components": self.pca_components,
            "combine_pos": self.combine_pos,
            "combine_sentence": self.combine_sentence,
            "combine_mlwe": self.combine_mlwe,
        }


def config_field_names() -> tuple[str, ...]:
    return tuple(f.name for f in fields(RunConfig))
