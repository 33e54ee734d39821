"""End-to-end extraction: treebanks in, ranked-rule reports out.

The pipeline is fully deterministic: identical inputs and config produce
byte-identical JSON reports, so no timestamps or environment details are
recorded. The rank comparison correlates the order features entered the
path with the order induced by the test statistic, over the selected
features only.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .config import RunConfig
from .featurize import build_feature_space, vectorize
from .query import extract_instances, scope_counts
from .regpath import run_path
from .rulestats import RuleRecord, compute_rule, spearman
from .treebank import Treebank, parse_conllu_file

SCHEMA_VERSION = 1


@dataclass
class Report:
    """One job's results plus enough metadata to reproduce them."""

    job_name: str
    config: dict
    config_hash: str
    corpus: dict
    scope: dict
    leak_filter: tuple[str, ...]
    n_features: int
    path_summary: list[dict]
    path_converged: bool
    rules: list[RuleRecord]
    n_selected: int
    rank_comparison: dict | None

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "job": self.job_name,
            "config_hash": self.config_hash,
            "config": self.config,
            "corpus": self.corpus,
            "scope": self.scope,
            "leak_filter": list(self.leak_filter),
            "n_features": self.n_features,
            "n_selected": self.n_selected,
            "path_converged": self.path_converged,
            "rank_comparison": self.rank_comparison,
            "rules": [_rule_dict(record) for record in self.rules],
            "path": self.path_summary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_markdown(self) -> str:
        lines = [
            f"# Rules: {self.job_name}",
            "",
            f"- scope: `{self.scope['pattern']}`, response: `{self.scope['response']}`",
            f"- instances: {self.scope['n']} ({self.scope['n_positive']} positive, "
            f"base rate {self.scope['mu']:.4f})",
            f"- features: {self.n_features} after filtering "
            f"(leak filter: {', '.join(self.leak_filter) or 'none'})",
            f"- selected on the path: {self.n_selected}",
        ]
        if self.rank_comparison is not None:
            lines.append(
                "- path rank vs G rank: rho = {rho:.3f} (p = {p_value:.3g}, "
                "n = {n_items})".format(**self.rank_comparison)
            )
        lines += [
            "",
            "| rank | pattern | direction | alpha | precision | coverage | n | G | p | phi_c |",
            "|---:|---|---|---:|---:|---:|---:|---:|---:|---:|",
        ]
        for record in self.rules:
            direction = "Q" if record.direction == "Q" else "not Q"
            lines.append(
                f"| {record.path_rank} | `{record.pattern}` | {direction} "
                f"| {record.alpha:.3f} | {record.precision:.3f} | {record.coverage:.3f} "
                f"| {record.n} | {record.g:.2f} | {record.p_value:.3g} | {record.phi_c:.3f} |"
            )
        return "\n".join(lines) + "\n"


def _rule_dict(record: RuleRecord) -> dict:
    return {
        "rank": record.path_rank,
        "pattern": record.pattern,
        "direction": record.direction,
        "alpha": record.alpha,
        "precision": record.precision,
        "coverage": record.coverage,
        "n": record.n,
        "g": record.g,
        "p_value": record.p_value,
        "significant": record.significant,
        "phi_c": record.phi_c,
        "mu": record.mu,
        "entry_step": record.entry_step,
        "feature_id": record.feature_id,
        "counts": {
            "scope": record.counts.scope,
            "response": record.counts.response,
            "trigger": record.counts.trigger,
            "overlap": record.counts.overlap,
        },
    }


def config_hash(config: RunConfig) -> str:
    canonical = json.dumps(config.describe(), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def load_treebanks(config: RunConfig) -> Treebank:
    return Treebank.concat(parse_conllu_file(p) for p in config.treebank_paths())


def run(config: RunConfig) -> Report:
    """Execute one job: parse, extract, featurize, fit the path, annotate."""
    treebank = load_treebanks(config)
    instances = extract_instances(treebank, config.scope, config.response)
    counts = scope_counts(instances)
    space = build_feature_space(instances, config.features)
    matrix = vectorize(instances, space)
    path = run_path(matrix, config.path, config.solver)

    records: list[RuleRecord] = []
    for group in path.ranking:
        for feature_id in group.feature_ids:
            records.append(
                compute_rule(feature_id, matrix, group.rank, group.entry_step)
            )

    comparison: dict | None = None
    if len(records) >= 3:
        entry_order = [float(r.entry_step) for r in records]
        # negate G so that for both vectors, smaller means more salient
        statistic_order = [-r.g for r in records]
        result = spearman(entry_order, statistic_order)
        comparison = {
            "rho": result.rho,
            "p_value": result.p_value,
            "n_items": result.n_items,
        }

    shown = records
    if config.report.sort == "gtest":
        shown = sorted(shown, key=lambda r: (-r.g, r.feature_id))
    if config.report.significant_only:
        shown = [r for r in shown if r.significant]
    if config.report.top_k is not None:
        shown = shown[: config.report.top_k]

    scope_info = {
        "pattern": _pattern_text(config),
        "response": _response_text(config),
        "n": counts.n_scope,
        "n_positive": counts.n_positive,
        "mu": counts.mu,
    }
    corpus_info = {
        "files": list(config.treebanks),
        "sentences": treebank.sentence_count,
        "tokens": treebank.token_count,
        "rejected_sentences": treebank.rejected_count,
        "multi_root_sentences": treebank.multi_root_count,
    }
    return Report(
        job_name=config.name,
        config=config.describe(),
        config_hash=config_hash(config),
        corpus=corpus_info,
        scope=scope_info,
        leak_filter=space.leak_filter,
        n_features=len(space),
        path_summary=path.step_summary(),
        path_converged=path.all_converged,
        rules=shown,
        n_selected=len(records),
        rank_comparison=comparison,
    )


def _pattern_text(config: RunConfig) -> str:
    parts = [f"{key}={value}" for key, value in config.scope.describe().items()]
    return ", ".join(parts) if parts else "(all edges)"


def _response_text(config: RunConfig) -> str:
    described = config.response.describe()
    if described["kind"] == "agreement":
        return f"agreement({described['feature']})"
    return f"order({described['direction']})"
