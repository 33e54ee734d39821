"""Boolean feature space over the syntactic neighborhood of an edge.

Atoms are (role, attribute, value) indicators drawn from the dependent,
the governor, the grandparent, the governor's other dependents and the
dependent's own dependents, plus relative-position indicators for the
governor and the grandparent. Codependent and grandchild atoms are
existential: the atom fires when any such neighbor matches. Features
combine one or two atoms and must occur at least min_count times in the
scope. Attributes that would encode the response itself are removed
before anything is counted.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .query import (
    AgreementResponse,
    Instance,
    NodeRole,
    OrderResponse,
    Response,
)
from .treebank import Token

BEFORE_DEP = "before_dep"
AFTER_DEP = "after_dep"
BEFORE_GOV = "before_gov"
AFTER_GOV = "after_gov"

POSITION = "position"
UPOS_GROUP = "upos_group"

DEFAULT_CLOSED_CLASS_POS = frozenset(
    {"ADP", "AUX", "CCONJ", "SCONJ", "DET", "PART", "PRON"}
)
DEFAULT_UPOS_GROUPS: tuple[tuple[str, frozenset[str]], ...] = (
    ("det_num", frozenset({"DET", "NUM"})),
    ("noun_propn", frozenset({"NOUN", "PROPN"})),
    ("verb_aux", frozenset({"VERB", "AUX"})),
)

_ROLE_ORDER = {role: index for index, role in enumerate(NodeRole)}


@dataclass(frozen=True)
class FeatureAtom:
    """One boolean indicator: a (role, attribute, value) triple."""

    role: NodeRole
    attribute: str
    value: str

    @property
    def sort_key(self) -> tuple[int, str, str]:
        return (_ROLE_ORDER[self.role], self.attribute, self.value)

    @property
    def label(self) -> str:
        return f"{self.role.value}.{self.attribute}={self.value}"


@dataclass(frozen=True)
class Feature:
    """One or two atoms, all of which must fire for the feature to be 1."""

    atoms: tuple[FeatureAtom, ...]
    id: int
    support: int

    @property
    def label(self) -> str:
        return " & ".join(atom.label for atom in self.atoms)

    @property
    def sort_key(self) -> tuple[tuple[int, str, str], ...]:
        return tuple(atom.sort_key for atom in self.atoms)


@dataclass(frozen=True)
class FeatureConfig:
    """Search-space policy; build one with for_response to get leak filters.

    leak_attributes removes an attribute from every role; drop_gov_position
    removes the governor relative-position atom (it is the label of an
    order response). exclude_deprels drops codependent/grandchild neighbors
    by their deprel (e.g. {"punct"}).
    """

    min_count: int = 5
    pairs: bool = True
    closed_class_pos: frozenset[str] = DEFAULT_CLOSED_CLASS_POS
    upos_groups: tuple[tuple[str, frozenset[str]], ...] = DEFAULT_UPOS_GROUPS
    leak_attributes: frozenset[str] = frozenset()
    drop_gov_position: bool = False
    exclude_deprels: frozenset[str] = frozenset()
    max_features: int | None = None

    def __post_init__(self) -> None:
        if self.min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {self.min_count}")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be None or >= 1")

    @classmethod
    def for_response(cls, response: Response, **options) -> "FeatureConfig":
        """Derive the leak filter from the response: the agreement feature
        never appears as an attribute, and an order response loses the
        governor position atom."""
        extra = frozenset(options.pop("extra_leak_attributes", frozenset()))
        if isinstance(response, AgreementResponse):
            leak = extra | {response.feature}
            drop_gov_position = False
        elif isinstance(response, OrderResponse):
            leak = extra
            drop_gov_position = True
        else:
            raise TypeError(f"unsupported response type: {type(response).__name__}")
        return cls(leak_attributes=leak, drop_gov_position=drop_gov_position, **options)

    @property
    def leak_filter(self) -> tuple[str, ...]:
        """Human-readable list of what was removed, for reports."""
        removed = sorted(self.leak_attributes)
        if self.drop_gov_position:
            removed.append("gov.position")
        return tuple(removed)


def enumerate_atoms(instance: Instance, config: FeatureConfig) -> frozenset[FeatureAtom]:
    """All atoms the instance activates, after leak and deprel filters."""
    atoms: set[FeatureAtom] = set()

    def add(role: NodeRole, attribute: str, value: str) -> None:
        if attribute not in config.leak_attributes:
            atoms.add(FeatureAtom(role, attribute, value))

    def add_token(role: NodeRole, token: Token) -> None:
        add(role, "upos", token.upos)
        add(role, "deprel", token.deprel)
        if token.upos in config.closed_class_pos:
            add(role, "lemma", token.lemma)
        for key, value in token.feats.items():
            add(role, key, value)
        for name, members in config.upos_groups:
            if token.upos in members:
                add(role, UPOS_GROUP, name)

    add_token(NodeRole.DEP, instance.dep)
    add_token(NodeRole.GOV, instance.gov)
    if not config.drop_gov_position:
        add(
            NodeRole.GOV,
            POSITION,
            BEFORE_DEP if instance.gov.id < instance.dep.id else AFTER_DEP,
        )
    if instance.grandparent is not None:
        add_token(NodeRole.GRANDPARENT, instance.grandparent)
        add(
            NodeRole.GRANDPARENT,
            POSITION,
            BEFORE_GOV if instance.grandparent.id < instance.gov.id else AFTER_GOV,
        )
    for codep in instance.codependents:
        if codep.deprel not in config.exclude_deprels:
            add_token(NodeRole.CODEP, codep)
    for grandchild in instance.grandchildren:
        if grandchild.deprel not in config.exclude_deprels:
            add_token(NodeRole.GRANDCHILD, grandchild)
    return frozenset(atoms)


@dataclass(frozen=True)
class FeatureSpace:
    """The ordered, filtered feature set for one scope/response run."""

    features: tuple[Feature, ...]
    config: FeatureConfig
    _singletons: dict[FeatureAtom, int] = field(init=False, repr=False, compare=False)
    _pairs: dict[tuple[FeatureAtom, FeatureAtom], int] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        singletons: dict[FeatureAtom, int] = {}
        pairs: dict[tuple[FeatureAtom, FeatureAtom], int] = {}
        for feature in self.features:
            if len(feature.atoms) == 1:
                singletons[feature.atoms[0]] = feature.id
            else:
                pairs[feature.atoms] = feature.id
        object.__setattr__(self, "_singletons", singletons)
        object.__setattr__(self, "_pairs", pairs)

    def __len__(self) -> int:
        return len(self.features)

    @property
    def leak_filter(self) -> tuple[str, ...]:
        return self.config.leak_filter

    def feature_ids_for(self, atoms: frozenset[FeatureAtom]) -> list[int]:
        """Dense ids of every feature whose atoms all fire, sorted."""
        present = sorted(
            (a for a in atoms if a in self._singletons), key=lambda a: a.sort_key
        )
        ids = [self._singletons[a] for a in present]
        if self._pairs:
            for pair in itertools.combinations(present, 2):
                pair_id = self._pairs.get(pair)
                if pair_id is not None:
                    ids.append(pair_id)
        ids.sort()
        return ids


def build_feature_space(
    instances: Sequence[Instance], config: FeatureConfig
) -> FeatureSpace:
    """Count atoms over the scope, filter by min_count, assign dense ids."""
    atom_sets = [enumerate_atoms(instance, config) for instance in instances]
    return space_from_atom_sets(atom_sets, config)


def space_from_atom_sets(
    atom_sets: Sequence[frozenset[FeatureAtom]], config: FeatureConfig
) -> FeatureSpace:
    if not atom_sets:
        raise ValueError("cannot build a feature space from an empty scope")
    singleton_counts: Counter[FeatureAtom] = Counter()
    for atoms in atom_sets:
        singleton_counts.update(atoms)
    surviving = {
        atom for atom, count in singleton_counts.items() if count >= config.min_count
    }
    entries: list[tuple[tuple[FeatureAtom, ...], int]] = [
        ((atom,), singleton_counts[atom]) for atom in surviving
    ]
    if config.pairs:
        pair_counts: Counter[tuple[FeatureAtom, FeatureAtom]] = Counter()
        for atoms in atom_sets:
            present = sorted(atoms & surviving, key=lambda a: a.sort_key)
            pair_counts.update(itertools.combinations(present, 2))
        entries.extend(
            (pair, count)
            for pair, count in pair_counts.items()
            if count >= config.min_count
        )
    if config.max_features is not None and len(entries) > config.max_features:
        # keep the best-supported features; ties resolved canonically
        entries.sort(key=lambda e: (-e[1], tuple(a.sort_key for a in e[0])))
        del entries[config.max_features :]
    entries.sort(key=lambda e: tuple(a.sort_key for a in e[0]))
    features = tuple(
        Feature(atoms=atoms, id=index, support=count)
        for index, (atoms, count) in enumerate(entries)
    )
    return FeatureSpace(features=features, config=config)


@dataclass(frozen=True)
class DesignMatrix:
    """Sparse boolean design, stored column-wise for the solver.

    columns[f] holds the sorted row indices where feature f is 1; labels
    is the per-row 0/1 response.
    """

    n_rows: int
    labels: np.ndarray
    columns: tuple[np.ndarray, ...]
    feature_space: FeatureSpace | None = None
    _csc: object = field(init=False, default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.labels.shape != (self.n_rows,):
            raise ValueError("labels must have one entry per row")
        bad = set(np.unique(self.labels)) - {0, 1}
        if bad:
            raise ValueError(f"labels must be 0/1, found {sorted(bad)}")

    def sparse_csc(self):
        """Column-compressed scipy matrix, built lazily and cached."""
        if self._csc is None:
            import scipy.sparse

            indptr = np.zeros(self.n_features + 1, dtype=np.int64)
            for f, col in enumerate(self.columns):
                indptr[f + 1] = indptr[f] + col.size
            if self.columns:
                indices = np.concatenate(self.columns)
            else:
                indices = np.zeros(0, dtype=np.int64)
            matrix = scipy.sparse.csc_matrix(
                (np.ones(indices.size), indices, indptr),
                shape=(self.n_rows, self.n_features),
            )
            object.__setattr__(self, "_csc", matrix)
        return self._csc

    @property
    def n_features(self) -> int:
        return len(self.columns)

    @property
    def supports(self) -> np.ndarray:
        return np.array([col.size for col in self.columns], dtype=np.int64)

    def column_mean(self, feature_id: int) -> float:
        return self.columns[feature_id].size / self.n_rows

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_rows, self.n_features))
        for f, col in enumerate(self.columns):
            dense[col, f] = 1.0
        return dense

    @classmethod
    def from_dense(cls, dense: np.ndarray, labels: Iterable[int]) -> "DesignMatrix":
        dense = np.asarray(dense)
        values = set(np.unique(dense)) - {0, 1}
        if values:
            raise ValueError(f"design entries must be 0/1, found {sorted(values)}")
        columns = tuple(
            np.flatnonzero(dense[:, f]).astype(np.int64) for f in range(dense.shape[1])
        )
        return cls(
            n_rows=dense.shape[0],
            labels=np.asarray(list(labels), dtype=np.int8),
            columns=columns,
        )


def vectorize(instances: Sequence[Instance], space: FeatureSpace) -> DesignMatrix:
    """Rows in instance order; x_f = 1 iff the instance fires all of f's atoms."""
    rows_per_feature: list[list[int]] = [[] for _ in space.features]
    labels = np.empty(len(instances), dtype=np.int8)
    for row, instance in enumerate(instances):
        labels[row] = instance.label
        atoms = enumerate_atoms(instance, space.config)
        for feature_id in space.feature_ids_for(atoms):
            rows_per_feature[feature_id].append(row)
    columns = tuple(np.asarray(rows, dtype=np.int64) for rows in rows_per_feature)
    return DesignMatrix(
        n_rows=len(instances),
        labels=labels,
        columns=columns,
        feature_space=space,
    )
