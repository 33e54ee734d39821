"""Declarative run configuration.

One TOML file describes shared corpus/solver settings plus any number of
extraction jobs, each with its own scope and exactly one response.
Validation collects every problem it can find instead of stopping at the
first.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .featurize import (
    DEFAULT_CLOSED_CLASS_POS,
    DEFAULT_UPOS_GROUPS,
    FeatureConfig,
)
from .query import AgreementResponse, OrderResponse, Response, ScopePattern
from .regpath import PathConfig
from .sparse_glm import SolverConfig

SORT_OPTIONS = ("path", "gtest")
_JOB_NAME = re.compile(r"^[A-Za-z0-9_.-]+$")


class ConfigError(Exception):
    """Invalid configuration; .errors lists every problem found."""

    def __init__(self, errors: list[str]) -> None:
        super().__init__("invalid configuration:\n" + "\n".join(f"- {e}" for e in errors))
        self.errors = errors


@dataclass(frozen=True)
class ReportOptions:
    significant_only: bool = False
    sort: str = "path"
    top_k: int | None = None

    def __post_init__(self) -> None:
        if self.sort not in SORT_OPTIONS:
            raise ValueError(f"sort must be one of {SORT_OPTIONS}, got {self.sort!r}")
        if self.top_k is not None and self.top_k < 0:
            raise ValueError(f"top_k must be >= 0, got {self.top_k}")


@dataclass(frozen=True)
class RunConfig:
    """Everything one extraction job needs, fully resolved.

    treebanks stay as written in the config; base_dir records what they
    are relative to (the config file's directory).
    """

    name: str
    treebanks: tuple[str, ...]
    scope: ScopePattern
    response: Response
    features: FeatureConfig
    path: PathConfig
    solver: SolverConfig
    report: ReportOptions
    out_dir: str = "."
    base_dir: str = "."

    def treebank_paths(self) -> list[Path]:
        return [Path(self.base_dir) / entry for entry in self.treebanks]

    def describe(self) -> dict:
        """Deterministic plain-data rendering, used for hashing and reports."""
        return {
            "name": self.name,
            "treebanks": list(self.treebanks),
            "scope": self.scope.describe(),
            "response": self.response.describe(),
            "features": {
                "min_count": self.features.min_count,
                "pairs": self.features.pairs,
                "closed_class_pos": sorted(self.features.closed_class_pos),
                "upos_groups": {
                    name: sorted(members) for name, members in self.features.upos_groups
                },
                "leak_filter": list(self.features.leak_filter),
                "exclude_deprels": sorted(self.features.exclude_deprels),
                "max_features": self.features.max_features,
            },
            "path": {
                "k": self.path.k,
                "lambda_start": self.path.lambda_start,
                "lambda_end": self.path.lambda_end,
                "spacing": self.path.spacing,
                "zero_eps": self.path.zero_eps,
            },
            "solver": {
                "tolerance": self.solver.tolerance,
                "max_iters": self.solver.max_iters,
            },
            "report": {
                "significant_only": self.report.significant_only,
                "sort": self.report.sort,
                "top_k": self.report.top_k,
            },
        }


class _Checker:
    """Accumulates errors while pulling typed values out of nested tables."""

    def __init__(self) -> None:
        self.errors: list[str] = []

    def fail(self, message: str) -> None:
        self.errors.append(message)

    def table(self, raw: dict, key: str, where: str) -> dict:
        value = raw.get(key)
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.fail(f"{where}.{key} must be a table")
            return {}
        return value

    def unknown_keys(self, raw: dict, allowed: set[str], where: str) -> None:
        for key in raw:
            if key not in allowed:
                self.fail(f"unknown key {key!r} in {where}")

    def value(self, raw: dict, key: str, kinds, where: str, default=None):
        if key not in raw:
            return default
        value = raw[key]
        if isinstance(value, bool) and bool not in (
            kinds if isinstance(kinds, tuple) else (kinds,)
        ):
            self.fail(f"{where}.{key} must not be a boolean")
            return default
        if not isinstance(value, kinds):
            expected = getattr(kinds, "__name__", str(kinds))
            self.fail(f"{where}.{key} must be of type {expected}")
            return default
        return value

    def string_list(self, raw: dict, key: str, where: str, default=()):
        if key not in raw:
            return tuple(default)
        value = raw[key]
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            self.fail(f"{where}.{key} must be a list of strings")
            return tuple(default)
        return tuple(value)


def _parse_response(raw: dict, where: str, checker: _Checker) -> Response | None:
    kind = raw.get("kind")
    if kind == "agreement":
        checker.unknown_keys(raw, {"kind", "feature"}, where)
        feature = raw.get("feature")
        if not isinstance(feature, str) or not feature:
            checker.fail(f"{where}.feature must name a morphological feature")
            return None
        return AgreementResponse(feature=feature)
    if kind == "order":
        checker.unknown_keys(raw, {"kind", "direction"}, where)
        direction = raw.get("direction")
        try:
            return OrderResponse(direction=direction if isinstance(direction, str) else "")
        except ValueError as exc:
            checker.fail(f"{where}.direction: {exc}")
            return None
    checker.fail(f"{where}.kind must be 'agreement' or 'order', got {kind!r}")
    return None


def _parse_features(raw: dict, response: Response | None, checker: _Checker) -> FeatureConfig | None:
    where = "features"
    checker.unknown_keys(
        raw,
        {
            "min_count",
            "pairs",
            "closed_class_pos",
            "upos_groups",
            "extra_leak_attributes",
            "exclude_deprels",
            "max_features",
        },
        where,
    )
    min_count = checker.value(raw, "min_count", int, where, default=5)
    pairs = checker.value(raw, "pairs", bool, where, default=True)
    closed = checker.string_list(raw, "closed_class_pos", where, DEFAULT_CLOSED_CLASS_POS)
    extra_leaks = checker.string_list(raw, "extra_leak_attributes", where)
    exclude_deprels = checker.string_list(raw, "exclude_deprels", where)
    max_features = checker.value(raw, "max_features", int, where, default=None)
    groups_raw = checker.table(raw, "upos_groups", where)
    groups: list[tuple[str, frozenset[str]]] = []
    if raw.get("upos_groups") is None:
        groups = list(DEFAULT_UPOS_GROUPS)
    else:
        for name in sorted(groups_raw):
            members = groups_raw[name]
            if not isinstance(members, list) or not all(isinstance(m, str) for m in members):
                checker.fail(f"features.upos_groups.{name} must be a list of strings")
                continue
            groups.append((name, frozenset(members)))
    if response is None:
        return None
    try:
        return FeatureConfig.for_response(
            response,
            min_count=min_count,
            pairs=pairs,
            closed_class_pos=frozenset(closed),
            upos_groups=tuple(groups),
            extra_leak_attributes=frozenset(extra_leaks),
            exclude_deprels=frozenset(exclude_deprels),
            max_features=max_features,
        )
    except (ValueError, TypeError) as exc:
        checker.fail(f"features: {exc}")
        return None


def _parse_path(raw: dict, checker: _Checker) -> PathConfig | None:
    where = "path"
    checker.unknown_keys(
        raw, {"k", "lambda_start", "lambda_end", "spacing", "zero_eps"}, where
    )
    try:
        return PathConfig(
            k=checker.value(raw, "k", int, where, default=100),
            lambda_start=float(checker.value(raw, "lambda_start", (int, float), where, default=0.1)),
            lambda_end=float(checker.value(raw, "lambda_end", (int, float), where, default=0.001)),
            spacing=checker.value(raw, "spacing", str, where, default="linear"),
            zero_eps=float(checker.value(raw, "zero_eps", (int, float), where, default=1e-9)),
        )
    except ValueError as exc:
        checker.fail(f"path: {exc}")
        return None


def _parse_solver(raw: dict, checker: _Checker) -> SolverConfig | None:
    where = "solver"
    checker.unknown_keys(raw, {"tolerance", "max_iters"}, where)
    try:
        return SolverConfig(
            tolerance=float(checker.value(raw, "tolerance", (int, float), where, default=1e-6)),
            max_iters=checker.value(raw, "max_iters", int, where, default=10_000),
        )
    except ValueError as exc:
        checker.fail(f"solver: {exc}")
        return None


def _parse_report(raw: dict, checker: _Checker) -> ReportOptions | None:
    where = "report"
    checker.unknown_keys(raw, {"significant_only", "sort", "top_k"}, where)
    try:
        return ReportOptions(
            significant_only=checker.value(raw, "significant_only", bool, where, default=False),
            sort=checker.value(raw, "sort", str, where, default="path"),
            top_k=checker.value(raw, "top_k", int, where, default=None),
        )
    except ValueError as exc:
        checker.fail(f"report: {exc}")
        return None


def validate_config(text: str, base_dir: str | Path = ".") -> list[RunConfig]:
    """Parse and validate a TOML config; raises ConfigError with every
    problem found. Treebank paths are checked relative to base_dir."""
    base_dir = Path(base_dir)
    checker = _Checker()
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML syntax: {exc}"]) from None

    checker.unknown_keys(
        raw,
        {"treebanks", "out_dir", "features", "path", "solver", "report", "jobs"},
        "top level",
    )
    treebanks = checker.string_list(raw, "treebanks", "top level")
    if not treebanks:
        checker.fail("treebanks must list at least one CoNLL-U file")
    for entry in treebanks:
        if not (base_dir / entry).is_file():
            checker.fail(f"treebank file not found: {entry}")
    out_dir = checker.value(raw, "out_dir", str, "top level", default=".")

    path_config = _parse_path(checker.table(raw, "path", "top level"), checker)
    solver_config = _parse_solver(checker.table(raw, "solver", "top level"), checker)
    report_options = _parse_report(checker.table(raw, "report", "top level"), checker)
    features_raw = checker.table(raw, "features", "top level")

    jobs_raw = raw.get("jobs")
    if not isinstance(jobs_raw, list) or not jobs_raw:
        checker.fail("config must declare at least one [[jobs]] entry")
        jobs_raw = []

    configs: list[RunConfig] = []
    seen_names: set[str] = set()
    for index, job_raw in enumerate(jobs_raw):
        where = f"jobs[{index}]"
        if not isinstance(job_raw, dict):
            checker.fail(f"{where} must be a table")
            continue
        checker.unknown_keys(job_raw, {"name", "scope", "response"}, where)
        name = checker.value(job_raw, "name", str, where, default=None)
        if not name or not _JOB_NAME.match(name):
            checker.fail(f"{where}.name must match {_JOB_NAME.pattern}")
            name = f"job{index}"
        if name in seen_names:
            checker.fail(f"duplicate job name {name!r}")
        seen_names.add(name)

        scope_raw = job_raw.get("scope")
        scope = None
        if not isinstance(scope_raw, dict):
            checker.fail(f"{where}.scope table is required")
        else:
            try:
                scope = ScopePattern.from_mapping(scope_raw)
            except ValueError as exc:
                checker.fail(f"{where}.scope: {exc}")

        response_raw = job_raw.get("response")
        response = None
        if not isinstance(response_raw, dict):
            checker.fail(f"{where}.response table is required")
        else:
            response = _parse_response(response_raw, f"{where}.response", checker)

        feature_config = _parse_features(dict(features_raw), response, checker)
        if checker.errors:
            continue
        assert scope is not None and response is not None
        assert feature_config and path_config and solver_config and report_options
        configs.append(
            RunConfig(
                name=name,
                treebanks=treebanks,
                scope=scope,
                response=response,
                features=feature_config,
                path=path_config,
                solver=solver_config,
                report=report_options,
                out_dir=out_dir,
                base_dir=str(base_dir),
            )
        )

    if checker.errors:
        # feature parsing runs once per job; drop repeated messages
        unique = list(dict.fromkeys(checker.errors))
        raise ConfigError(unique)
    return configs


def load_config(path: str | Path) -> list[RunConfig]:
    """Read and validate a config file; paths resolve against its directory."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return validate_config(text, base_dir=path.parent)


def with_overrides(
    config: RunConfig,
    significant_only: bool | None = None,
    sort: str | None = None,
    top_k: int | None = None,
    out_dir: str | None = None,
) -> RunConfig:
    """Apply CLI-level overrides onto a validated config."""
    report = config.report
    if significant_only is not None:
        report = replace(report, significant_only=significant_only)
    if sort is not None:
        report = replace(report, sort=sort)
    if top_k is not None:
        report = replace(report, top_k=top_k)
    updated = replace(config, report=report)
    if out_dir is not None:
        updated = replace(updated, out_dir=out_dir)
    return updated
