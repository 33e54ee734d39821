"""Feature-space construction, filtering, and vectorization tests."""

import numpy as np
import pytest

from helpers import sent, tok
from rulepath.featurize import (
    DesignMatrix,
    FeatureAtom,
    FeatureConfig,
    build_feature_space,
    enumerate_atoms,
    vectorize,
)
from rulepath.query import (
    AgreementResponse,
    NodeRole,
    OrderResponse,
    ScopePattern,
    extract_instances,
)
from rulepath.treebank import Treebank
from synth import agreement_leak_corpus

ORDER_CONFIG = FeatureConfig.for_response(OrderResponse("gov_after_dep"), min_count=1)
AGREE_NUMBER_CONFIG = FeatureConfig.for_response(AgreementResponse("Number"), min_count=1)


def instances_from(sentence, scope=None, response=None):
    scope = scope or ScopePattern()
    response = response or OrderResponse("gov_after_dep")
    return extract_instances(Treebank(sentences=(sentence,)), scope, response)


def atom_set(instance, config):
    return {(a.role, a.attribute, a.value) for a in enumerate_atoms(instance, config)}


# the classic pre-verbal-expletive tree: subject after its verbal governor
EXPLETIVE = sent(
    tok(1, upos="CCONJ", head=3, deprel="cc", form="But", lemma="but"),
    tok(2, upos="PRON", head=3, deprel="comp@expl", form="there", lemma="there"),
    tok(3, upos="AUX", head=0, deprel="root", form="is", lemma="be"),
    tok(4, upos="ADV", head=5, deprel="det", form="no", lemma="no"),
    tok(5, upos="NOUN", head=3, deprel="subj", form="proof", lemma="proof"),
)


def test_expletive_codependent_atom():
    scope = ScopePattern.from_mapping({"deprel": "subj"})
    (instance,) = instances_from(EXPLETIVE, scope)
    atoms = atom_set(instance, ORDER_CONFIG)
    assert (NodeRole.CODEP, "deprel", "comp@expl") in atoms
    assert (NodeRole.CODEP, "upos", "PRON") in atoms
    assert (NodeRole.CODEP, "lemma", "there") in atoms  # PRON is closed-class
    assert (NodeRole.GRANDCHILD, "upos", "ADV") in atoms


def test_root_governor_has_no_grandparent_atoms():
    scope = ScopePattern.from_mapping({"deprel": "subj"})
    (instance,) = instances_from(EXPLETIVE, scope)
    atoms = enumerate_atoms(instance, ORDER_CONFIG)
    assert not any(a.role is NodeRole.GRANDPARENT for a in atoms)


def test_grandchild_adposition_atom():
    s = sent(
        tok(1, upos="NOUN", head=0, deprel="root"),
        tok(2, upos="ADJ", head=1, deprel="mod"),
        tok(3, upos="ADP", head=2, deprel="udep", lemma="de"),
    )
    scope = ScopePattern.from_mapping({"dep.upos": "ADJ"})
    (instance,) = instances_from(s, scope)
    atoms = atom_set(instance, ORDER_CONFIG)
    assert (NodeRole.GRANDCHILD, "upos", "ADP") in atoms
    assert (NodeRole.GRANDCHILD, "lemma", "de") in atoms


def test_position_atoms():
    s = sent(
        tok(1, upos="ADP", head=0, deprel="root"),
        tok(2, upos="NOUN", head=1, deprel="comp:obj"),
        tok(3, upos="ADJ", head=2, deprel="mod"),
    )
    scope = ScopePattern.from_mapping({"dep.upos": "ADJ"})
    (instance,) = instances_from(s, scope)
    # agreement config keeps the governor position atom
    atoms = atom_set(instance, AGREE_NUMBER_CONFIG)
    assert (NodeRole.GOV, "position", "before_dep") in atoms
    assert (NodeRole.GRANDPARENT, "position", "before_gov") in atoms
    # order config drops the governor position atom (it is the label)
    order_atoms = atom_set(instance, ORDER_CONFIG)
    assert not any(r is NodeRole.GOV and a == "position" for r, a, _ in order_atoms)
    assert (NodeRole.GRANDPARENT, "position", "before_gov") in order_atoms


def test_agreement_leak_removes_attribute_on_every_role():
    s = sent(
        tok(1, upos="DET", head=2, deprel="det", feats={"Number": "Sing"}),
        tok(2, upos="NOUN", head=3, deprel="subj", feats={"Number": "Sing", "Gender": "Fem"}),
        tok(3, upos="VERB", head=0, deprel="root", feats={"Number": "Sing"}),
    )
    (instance,) = instances_from(
        s,
        ScopePattern.from_mapping({"dep.upos": "NOUN"}),
        AgreementResponse("Number"),
    )
    atoms = enumerate_atoms(instance, AGREE_NUMBER_CONFIG)
    assert not any(a.attribute == "Number" for a in atoms)
    assert any(a.attribute == "Gender" for a in atoms)
    assert AGREE_NUMBER_CONFIG.leak_filter == ("Number",)


def test_lemma_only_for_closed_classes():
    s = sent(
        tok(1, upos="DET", head=2, deprel="det", lemma="le"),
        tok(2, upos="NOUN", head=0, deprel="root", lemma="chat"),
    )
    (instance,) = instances_from(s, ScopePattern.from_mapping({"dep.upos": "DET"}))
    atoms = atom_set(instance, ORDER_CONFIG)
    assert (NodeRole.DEP, "lemma", "le") in atoms
    assert not any(a == "lemma" for r, a, v in atoms if r is NodeRole.GOV)


def test_upos_group_atoms():
    s = sent(
        tok(1, upos="NUM", head=2, deprel="det"),
        tok(2, upos="PROPN", head=0, deprel="root"),
    )
    (instance,) = instances_from(s, ScopePattern.from_mapping({"dep.upos": "NUM"}))
    atoms = atom_set(instance, ORDER_CONFIG)
    assert (NodeRole.DEP, "upos_group", "det_num") in atoms
    assert (NodeRole.GOV, "upos_group", "noun_propn") in atoms


def test_exclude_deprels_drops_neighbors():
    s = sent(
        tok(1, upos="NOUN", head=3, deprel="subj"),
        tok(2, upos="PUNCT", head=3, deprel="punct"),
        tok(3, upos="VERB", head=0, deprel="root"),
        tok(4, upos="PUNCT", head=1, deprel="punct"),
    )
    scope = ScopePattern.from_mapping({"deprel": "subj"})
    (instance,) = instances_from(s, scope)
    with_punct = atom_set(instance, ORDER_CONFIG)
    assert (NodeRole.CODEP, "upos", "PUNCT") in with_punct
    config = FeatureConfig.for_response(
        OrderResponse("gov_after_dep"), min_count=1, exclude_deprels=frozenset({"punct"})
    )
    without = atom_set(instance, config)
    assert not any(r in (NodeRole.CODEP, NodeRole.GRANDCHILD) for r, _, _ in without)


def make_synthetic_instances(atom_rows, labels=None):
    """Build real instances whose dependent carries the given feats."""
    sentences = []
    for i, feats in enumerate(atom_rows):
        dep = tok(1, upos="ADJ", head=2, deprel="mod", feats=feats)
        gov = tok(2, upos="NOUN", head=0, deprel="root")
        sentences.append(sent(dep, gov, sent_id=f"y{i}"))
    bank = Treebank(sentences=tuple(sentences))
    return extract_instances(bank, ScopePattern(), OrderResponse("gov_after_dep"))


def test_min_count_filters_rare_atoms():
    rows = [{"A": "x"}] * 4 + [{}] * 6
    instances = make_synthetic_instances(rows)
    space = build_feature_space(instances, FeatureConfig.for_response(OrderResponse("gov_after_dep")))
    assert not any("A=x" in f.label for f in space.features)
    rows = [{"A": "x"}] * 5 + [{}] * 5
    space = build_feature_space(make_synthetic_instances(rows), FeatureConfig.for_response(OrderResponse("gov_after_dep")))
    assert any(f.label == "dep.A=x" for f in space.features)


def test_pair_dropped_when_cooccurrence_rare():
    rows = (
        [{"A": "x", "B": "x"}] * 3
        + [{"A": "x"}] * 97
        + [{"B": "x"}] * 97
    )
    instances = make_synthetic_instances(rows)
    space = build_feature_space(instances, FeatureConfig.for_response(OrderResponse("gov_after_dep")))
    labels = [f.label for f in space.features]
    assert "dep.A=x" in labels
    assert "dep.B=x" in labels
    assert "dep.A=x & dep.B=x" not in labels


def test_pair_support_bounded_by_singletons():
    rng = np.random.default_rng(3)
    rows = []
    for _ in range(200):
        feats = {}
        for name in ("A", "B", "C"):
            if rng.random() < 0.4:
                feats[name] = "x"
        rows.append(feats)
    space = build_feature_space(
        make_synthetic_instances(rows),
        FeatureConfig.for_response(OrderResponse("gov_after_dep")),
    )
    supports = {f.label: f.support for f in space.features}
    for feature in space.features:
        if len(feature.atoms) == 2:
            a, b = feature.atoms
            assert feature.support <= min(supports[a.label], supports[b.label])


def test_feature_ids_dense_and_canonical():
    rows = [{"A": "x", "B": "y"}] * 10
    space = build_feature_space(
        make_synthetic_instances(rows),
        FeatureConfig.for_response(OrderResponse("gov_after_dep")),
    )
    assert [f.id for f in space.features] == list(range(len(space)))
    keys = [f.sort_key for f in space.features]
    assert keys == sorted(keys)
    # determinism: rebuilding yields identical features
    space2 = build_feature_space(
        make_synthetic_instances(rows),
        FeatureConfig.for_response(OrderResponse("gov_after_dep")),
    )
    assert space.features == space2.features


def test_empty_instances_error():
    with pytest.raises(ValueError):
        build_feature_space([], ORDER_CONFIG)


def test_max_features_cap_keeps_best_supported():
    rows = [{"A": "x", "B": "x"}] * 20 + [{"A": "x"}] * 30
    config = FeatureConfig.for_response(
        OrderResponse("gov_after_dep"), pairs=False, max_features=1
    )
    space = build_feature_space(make_synthetic_instances(rows), config)
    # dep.A=x (support 50) beats dep.B=x (20) and ties resolve canonically
    assert any(f.label == "dep.A=x" for f in space.features)
    assert len(space) == 1


def test_vectorize_columns_and_supports():
    rng = np.random.default_rng(7)
    rows = []
    for _ in range(60):
        feats = {}
        for name in ("A", "B", "C", "D"):
            if rng.random() < 0.5:
                feats[name] = "x"
        rows.append(feats)
    instances = make_synthetic_instances(rows)
    space = build_feature_space(instances, FeatureConfig.for_response(OrderResponse("gov_after_dep")))
    matrix = vectorize(instances, space)
    assert matrix.n_rows == 60
    assert matrix.n_features == len(space)
    dense = matrix.to_dense()
    for feature in space.features:
        # stored support equals the column sum of the rebuilt matrix
        assert feature.support == int(dense[:, feature.id].sum())
        assert matrix.column_mean(feature.id) == feature.support / 60
    # x_f = 1 iff the instance fires all atoms of f
    for row, instance in enumerate(instances):
        atoms = enumerate_atoms(instance, space.config)
        for feature in space.features:
            expected = float(set(feature.atoms) <= set(atoms))
            assert dense[row, feature.id] == expected


def test_vectorize_row_with_no_surviving_atoms():
    sentences = [
        sent(
            tok(1, upos="ADJ", head=2, deprel="mod"),
            tok(2, upos="NOUN", head=0, deprel="root"),
            sent_id=f"z{i}",
        )
        for i in range(9)
    ]
    # the odd instance shares no attribute with the rest
    sentences.append(
        sent(
            tok(1, upos="X", head=2, deprel="odd"),
            tok(2, upos="Y", head=0, deprel="frag"),
            sent_id="odd",
        )
    )
    bank = Treebank(sentences=tuple(sentences))
    instances = extract_instances(bank, ScopePattern(), OrderResponse("gov_after_dep"))
    config = FeatureConfig.for_response(OrderResponse("gov_after_dep"), min_count=9)
    space = build_feature_space(instances, config)
    assert len(space) > 0
    dense = vectorize(instances, space).to_dense()
    assert dense[9].sum() == 0.0
    assert dense[:9].sum() > 0


def test_from_dense_validation():
    with pytest.raises(ValueError):
        DesignMatrix.from_dense(np.array([[0.5]]), [1])
    matrix = DesignMatrix.from_dense(np.array([[1.0, 0.0], [0.0, 1.0]]), [0, 1])
    assert matrix.n_features == 2
    assert list(matrix.supports) == [1, 1]
    with pytest.raises(ValueError):
        DesignMatrix(n_rows=2, labels=np.array([0, 2]), columns=(np.array([0]),))


def test_leak_soundness_on_adversarial_corpus():
    bank = agreement_leak_corpus(seed=5, n_instances=400)
    instances = extract_instances(
        bank,
        ScopePattern.from_mapping({"dep.upos": "ADJ", "gov.upos": "NOUN"}),
        AgreementResponse("Number"),
    )
    space = build_feature_space(
        instances, FeatureConfig.for_response(AgreementResponse("Number"))
    )
    assert len(space) > 0
    for feature in space.features:
        assert all(atom.attribute != "Number" for atom in feature.atoms)
