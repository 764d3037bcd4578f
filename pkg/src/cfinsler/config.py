"""Run configuration files (TOML).

Only ``[metric]`` is required::

    [metric]
    dimension = 2
    builtin = "POINCARE_BALL"        # or: expression = "abs2(v1) + abs2(v2)"

Command sections (``[point]``, ``[vectors]``, ``[geodesic]``, ``[bvp]``,
``[jacobi]``, ``[verify]``) are optional; see ``docs/grammar.ebnf``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .errors import ConfigError, DSLError, FinslerError
from .io import decode_matrix
from .metric import BUILTINS, FinslerMetric, builtin_metric, metric_from_expression

SECTIONS = ("metric", "point", "vectors", "geodesic", "bvp", "jacobi", "verify")


@dataclass(frozen=True, eq=False)
class RunConfig:
    metric: FinslerMetric
    sections: dict = field(default_factory=dict)
    source: str = "<string>"

    def section(self, name: str) -> dict:
        return dict(self.sections.get(name, {}))


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(p)!r}: {exc.strerror}") from exc
    return parse_config(text, source=str(p))


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    unknown = sorted(set(data) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"{source}: unknown section(s) {', '.join(unknown)}")
    if "metric" not in data:
        raise ConfigError(f"{source}: missing [metric] section")
    metric = _metric(data["metric"], source)
    return RunConfig(metric, {k: v for k, v in data.items() if k != "metric"}, source)


def _metric(sec: dict, source: str) -> FinslerMetric:
    has_b, has_e = "builtin" in sec, "expression" in sec
    if has_b == has_e:
        raise ConfigError(f"{source}: [metric] needs exactly one of 'builtin' or 'expression'")
    dim = sec.get("dimension")
    if dim is not None and (not isinstance(dim, int) or isinstance(dim, bool) or dim < 1):
        raise ConfigError(f"{source}: [metric] dimension must be a positive integer")
    try:
        if has_e:
            if dim is None:
                raise ConfigError(f"{source}: [metric] expression needs 'dimension'")
            return metric_from_expression(str(sec["expression"]), dim,
                                          exclude_axes=bool(sec.get("exclude_axes", False)))
        name = str(sec["builtin"]).upper()
        if name not in BUILTINS:
            raise ConfigError(f"{source}: unknown builtin {sec['builtin']!r}; "
                              f"choose from {', '.join(BUILTINS)}")
        matrix = decode_matrix(sec["matrix"], "matrix") if "matrix" in sec else None
        return builtin_metric(name, dim, matrix)
    except DSLError as exc:
        raise ConfigError(f"{source}: expression {exc}") from exc
    except ConfigError:
        raise
    except FinslerError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
