import os
from dataclasses import dataclass
from fractions import Fraction

import yaml

from ..approx_algorithm import WeightScheme, WeightSchemeError, to_fraction

DEFAULT_SCHEMES_FILE = os.path.join("config", "schemes.yaml")


def _parse_tuple(text: str, size: int, what: str) -> tuple[Fraction, ...]:
    parts = [p for p in str(text).split(",")]
    if len(parts) != size or any(not p.strip() for p in parts):
        raise WeightSchemeError(f"{what} needs {size} comma-separated values, got {text!r}")
    return tuple(to_fraction(p) for p in parts)


def parse_weights(text: str) -> tuple[Fraction, Fraction, Fraction]:
    """``"2,3,2"`` or ``"1,3/2,1.5"`` to (W(reversal), W(transposition), W(indel))."""
    return _parse_tuple(text, 3, "weights")


def parse_p(text: str) -> tuple[Fraction, Fraction]:
    return _parse_tuple(text, 2, "p")


def scheme_from_strings(weights: str, p: str) -> WeightScheme:
    return WeightScheme(*parse_weights(weights), *parse_p(p))


def default_scheme() -> WeightScheme:
    """Scheme from ``DEFAULT_WEIGHTS`` / ``DEFAULT_P`` (``2,3,2`` and ``4,1`` when unset)."""
    weights = os.getenv("DEFAULT_WEIGHTS", "2,3,2")
    p = os.getenv("DEFAULT_P", "4,1")
    try:
        return scheme_from_strings(weights, p)
    except WeightSchemeError as e:
        raise ValueError(f"DEFAULT_WEIGHTS/DEFAULT_P: {e}") from e


@dataclass(frozen=True)
class SchemePreset:
    name: str
    scheme: WeightScheme
    factor: Fraction | None


def load_presets(path: str | None = None) -> tuple[dict[str, SchemePreset], dict[str, list[str]]]:
    """Named presets and preset groups from the YAML scheme file."""
    path = path or os.getenv("SCHEMES_FILE", DEFAULT_SCHEMES_FILE)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError:
        raise ValueError(f"SCHEMES_FILE: {path} does not exist") from None
    except yaml.YAMLError as e:
        raise ValueError(f"SCHEMES_FILE: {path} is not valid YAML: {e}") from e

    presets = {}
    for name, entry in (data.get("presets") or {}).items():
        if not isinstance(entry, dict) or "weights" not in entry or "p" not in entry:
            raise WeightSchemeError(f"preset {name!r} needs 'weights' and 'p'")
        factor = entry.get("factor")
        presets[name] = SchemePreset(
            name=name,
            scheme=scheme_from_strings(str(entry["weights"]), str(entry["p"])),
            factor=to_fraction(str(factor)) if factor is not None else None,
        )
    groups = {}
    for name, members in (data.get("groups") or {}).items():
        unknown = [m for m in members if m not in presets]
        if unknown:
            raise WeightSchemeError(f"group {name!r} names unknown presets {unknown}")
        groups[name] = list(members)
    return presets, groups


def resolve_schemes(selector: str, path: str | None = None) -> list[tuple[str, WeightScheme]]:
    """Schemes named by a ``;``-separated list of groups, presets or ``W,W,W:P,P`` literals."""
    presets, groups = None, None
    resolved = []
    for item in (s.strip() for s in selector.split(";")):
        if not item:
            continue
        if ":" in item:
            weights, p = item.split(":", 1)
            scheme = scheme_from_strings(weights, p)
            resolved.append((scheme.label, scheme))
            continue
        if presets is None:
            presets, groups = load_presets(path)
        if item in groups:
            resolved.extend((name, presets[name].scheme) for name in groups[item])
        elif item in presets:
            resolved.append((item, presets[item].scheme))
        else:
            raise WeightSchemeError(f"unknown scheme or group {item!r}")
    return resolved
