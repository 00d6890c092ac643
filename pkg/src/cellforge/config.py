"""Flat key=value configuration for the pipeline.

Sections are dotted key prefixes (geom., decompose., sequence., script.,
dedup., render., annotate., dataset.) plus the bare global ``seed``.  '#'
starts a comment.  Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .annotate import AnnotateConfig
from .dataset import AUGMENT_MODES
from .decompose import DecomposeConfig
from .kernel import KernelConfig


@dataclass(frozen=True)
class PipelineConfig:
    kernel: KernelConfig = field(default_factory=KernelConfig)
    decompose: DecomposeConfig = field(default_factory=DecomposeConfig)
    annotate: AnnotateConfig = field(default_factory=AnnotateConfig)
    cap: int = 24
    quantize_decimals: int = 6
    augment: str = "none"
    split_ratio: float = 0.9
    min_cells: int = 2
    max_cells: int = 10
    render_size: int = 128
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError("split_ratio must be in (0, 1)")
        if self.min_cells > self.max_cells:
            raise ValueError("min_cells must be <= max_cells")
        if self.augment not in AUGMENT_MODES:
            raise ValueError(f"augment must be one of {AUGMENT_MODES}")

    def with_seed(self, seed: int) -> "PipelineConfig":
        return replace(
            self,
            seed=seed,
            kernel=replace(self.kernel, seed=seed),
            decompose=replace(self.decompose, seed=seed),
        )


class ConfigError(ValueError):
    pass


_CASTS = {
    "geom.boundary_eps": ("kernel", "boundary_eps", float),
    "geom.face_eps": ("kernel", "face_eps", float),
    "geom.mc_samples_overlap": ("kernel", "mc_samples_overlap", int),
    "geom.mc_samples_face": ("kernel", "mc_samples_face", int),
    "decompose.classify_samples": ("decompose", "classify_samples", int),
    "decompose.empty_samples": ("decompose", "empty_samples", int),
    "decompose.merge": ("decompose", "merge", "bool"),
    "sequence.cap": (None, "cap", int),
    "script.quantize_decimals": (None, "quantize_decimals", int),
    "render.size": (None, "render_size", int),
    "annotate.url": ("annotate", "url", str),
    "annotate.model": ("annotate", "model", str),
    "annotate.prompt": ("annotate", "prompt", str),
    "annotate.timeout_ms": ("annotate", "timeout_ms", int),
    "annotate.retries": ("annotate", "retries", int),
    "annotate.max_concurrent": ("annotate", "max_concurrent", int),
    "annotate.image_format": ("annotate", "image_format", str),
    "dataset.augment": (None, "augment", str),
    "dataset.split_ratio": (None, "split_ratio", float),
    "dataset.min_cells": (None, "min_cells", int),
    "dataset.max_cells": (None, "max_cells", int),
    "seed": (None, "seed", int),
}


def _cast(value: str, kind):
    if kind == "bool":
        low = value.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {value!r}")
    return kind(value)


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    sub: dict[str, dict] = {"kernel": {}, "decompose": {}, "annotate": {}}
    top: dict = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CASTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        section, attr, kind = _CASTS[key]
        try:
            cast = _cast(value, kind)
        except (ValueError, ConfigError) as err:
            raise ConfigError(f"line {lineno}: bad value for {key}: {err}") from err
        if section is None:
            top[attr] = cast
        else:
            sub[section][attr] = cast

    base = base or PipelineConfig()
    cfg = replace(
        base,
        kernel=replace(base.kernel, **sub["kernel"]),
        decompose=replace(base.decompose, **sub["decompose"]),
        annotate=replace(base.annotate, **sub["annotate"]),
        **top,
    )
    if "seed" in top and "seed" not in sub["kernel"]:
        cfg = cfg.with_seed(top["seed"])
    return cfg


def load_config(path, base: PipelineConfig | None = None) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base)
