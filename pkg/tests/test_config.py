"""Configuration parsing and validation tests."""

import pytest

from rulepath.config import ConfigError, load_config, validate_config, with_overrides
from rulepath.query import AgreementResponse, OrderResponse

MINIMAL = """
treebanks = ["mini_treebank.conllu"]

[[jobs]]
name = "demo"
[jobs.scope]
"gov.upos" = "NOUN"
"dep.upos" = "ADJ"
[jobs.response]
kind = "order"
direction = "gov_after_dep"
"""


def test_minimal_config_gets_documented_defaults():
    configs = validate_config(MINIMAL, base_dir="data")
    assert len(configs) == 1
    config = configs[0]
    assert config.name == "demo"
    assert config.path.k == 100
    assert config.path.lambda_start == 0.1
    assert config.path.lambda_end == 0.001
    assert config.path.spacing == "linear"
    assert config.features.min_count == 5
    assert config.features.pairs
    assert config.solver.tolerance == 1e-6
    assert config.report.sort == "path"
    assert isinstance(config.response, OrderResponse)
    assert config.features.drop_gov_position


def test_agreement_response_sets_leak():
    text = MINIMAL.replace(
        'kind = "order"\ndirection = "gov_after_dep"',
        'kind = "agreement"\nfeature = "Number"',
    )
    config = validate_config(text, base_dir="data")[0]
    assert isinstance(config.response, AgreementResponse)
    assert "Number" in config.features.leak_attributes
    assert config.features.leak_filter == ("Number",)


def test_misspelled_response_kind_names_field():
    text = MINIMAL.replace('kind = "order"', 'kind = "orderx"')
    with pytest.raises(ConfigError) as info:
        validate_config(text, base_dir="data")
    assert any("response.kind" in e for e in info.value.errors)


def test_mixed_response_fields_rejected():
    text = MINIMAL.replace(
        'direction = "gov_after_dep"',
        'direction = "gov_after_dep"\nfeature = "Number"',
    )
    with pytest.raises(ConfigError) as info:
        validate_config(text, base_dir="data")
    assert any("feature" in e for e in info.value.errors)


def test_duplicate_response_table_is_a_syntax_error():
    text = MINIMAL + '\n[jobs.response]\nkind = "agreement"\nfeature = "Number"\n'
    with pytest.raises(ConfigError) as info:
        validate_config(text, base_dir="data")
    assert any("TOML syntax" in e for e in info.value.errors)


def test_all_errors_collected_at_once():
    text = """
treebanks = ["missing_file.conllu"]
badkey = 1

[path]
k = 0

[[jobs]]
name = "bad name with spaces"
[jobs.scope]
"odd" = "NOUN"
[jobs.response]
kind = "nope"
"""
    with pytest.raises(ConfigError) as info:
        validate_config(text, base_dir="data")
    errors = "\n".join(info.value.errors)
    assert "missing_file.conllu" in errors
    assert "badkey" in errors
    assert "k must be >= 1" in errors
    assert "name" in errors
    assert "scope" in errors
    assert "response.kind" in errors
    assert len(info.value.errors) >= 6


def test_unknown_keys_rejected_everywhere():
    text = MINIMAL + "\n[solver]\ntolerence = 1e-5\n"
    with pytest.raises(ConfigError) as info:
        validate_config(text, base_dir="data")
    assert any("tolerence" in e for e in info.value.errors)


def test_missing_jobs_rejected():
    with pytest.raises(ConfigError) as info:
        validate_config('treebanks = ["mini_treebank.conllu"]', base_dir="data")
    assert any("jobs" in e for e in info.value.errors)


def test_duplicate_job_names_rejected():
    text = MINIMAL + MINIMAL[MINIMAL.index("[[jobs]]") :]
    with pytest.raises(ConfigError) as info:
        validate_config(text, base_dir="data")
    assert any("duplicate job name" in e for e in info.value.errors)


def test_feature_and_report_sections_parse():
    text = """
treebanks = ["mini_treebank.conllu"]

[features]
min_count = 7
pairs = false
closed_class_pos = ["DET"]
extra_leak_attributes = ["Gender"]
exclude_deprels = ["punct"]
max_features = 500

[features.upos_groups]
nominal = ["NOUN", "PROPN", "PRON"]

[path]
k = 10
lambda_start = 0.2
lambda_end = 0.01
spacing = "log"

[solver]
tolerance = 1e-7
max_iters = 500

[report]
significant_only = true
sort = "gtest"
top_k = 10

[[jobs]]
name = "demo"
[jobs.scope]
deprel = "subj"
[jobs.response]
kind = "agreement"
feature = "Number"
"""
    config = validate_config(text, base_dir="data")[0]
    assert config.features.min_count == 7
    assert not config.features.pairs
    assert config.features.closed_class_pos == frozenset({"DET"})
    assert config.features.leak_attributes == frozenset({"Gender", "Number"})
    assert config.features.exclude_deprels == frozenset({"punct"})
    assert config.features.max_features == 500
    assert dict(config.features.upos_groups) == {"nominal": frozenset({"NOUN", "PROPN", "PRON"})}
    assert config.path.spacing == "log"
    assert config.solver.max_iters == 500
    assert config.report.significant_only
    assert config.report.sort == "gtest"
    assert config.report.top_k == 10
    assert config.scope.edge_deprel == "subj"


def test_load_config_resolves_against_its_directory():
    configs = load_config("data/mini_config.toml")
    assert configs[0].treebank_paths()[0].is_file()


def test_with_overrides():
    config = load_config("data/mini_config.toml")[0]
    updated = with_overrides(config, significant_only=True, sort="gtest", top_k=3, out_dir="/tmp/x")
    assert updated.report.significant_only
    assert updated.report.sort == "gtest"
    assert updated.report.top_k == 3
    assert updated.out_dir == "/tmp/x"
    # None leaves values untouched
    same = with_overrides(config)
    assert same.report == config.report


def test_describe_is_plain_and_deterministic():
    import json

    config = load_config("data/mini_config.toml")[0]
    a = json.dumps(config.describe(), sort_keys=True)
    b = json.dumps(load_config("data/mini_config.toml")[0].describe(), sort_keys=True)
    assert a == b
