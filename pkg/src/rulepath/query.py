"""Scope and response patterns over dependency edges, and labeled instances.

A rule quantifies over the dependency edges matching a scope (a
conjunction of constraints on the edge and its two endpoints) and asks
whether a response holds on each edge: either agreement on a
morphological feature between dependent and governor, or their relative
surface order. Each matching edge becomes one labeled Instance carrying
handles to its whole syntactic neighborhood.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Union

from .treebank import Sentence, Token, Treebank

GOV_BEFORE_DEP = "gov_before_dep"
GOV_AFTER_DEP = "gov_after_dep"
ORDER_DIRECTIONS = (GOV_BEFORE_DEP, GOV_AFTER_DEP)


class EmptyScopeError(Exception):
    """No edge in the corpus matches the scope; statistics are undefined."""


class NodeRole(Enum):
    """Positions in the neighborhood of one dependency edge."""

    DEP = "dep"
    GOV = "gov"
    GRANDPARENT = "grandparent"  # governor of the governor
    CODEP = "codep"  # other dependents of the governor
    GRANDCHILD = "grandchild"  # dependents of the dependent


_DIRECT_ATTRIBUTES = ("upos", "lemma", "deprel")


def token_attribute(token: Token, attribute: str) -> str | None:
    """Look up upos/lemma/deprel or a FEATS key; form is never queryable."""
    if attribute == "form":
        raise ValueError("the form attribute is not available for matching")
    if attribute == "upos":
        return token.upos
    if attribute == "lemma":
        return token.lemma
    if attribute == "deprel":
        return token.deprel
    return token.feats.get(attribute)


@dataclass(frozen=True)
class ScopeConstraint:
    """One conjunct: an attribute of the edge's dependent or governor."""

    role: NodeRole
    attribute: str
    value: str

    def __post_init__(self) -> None:
        if self.role not in (NodeRole.DEP, NodeRole.GOV):
            raise ValueError("scope constraints may only mention dep or gov")
        if self.attribute == "form":
            raise ValueError("the form attribute is not available for matching")


@dataclass(frozen=True)
class ScopePattern:
    """Conjunction of constraints selecting dependency edges.

    edge_deprel constrains the label of the edge itself (equivalently,
    the dependent's deprel column).
    """

    constraints: tuple[ScopeConstraint, ...] = ()
    edge_deprel: str | None = None

    def matches(self, gov: Token, dep: Token) -> bool:
        if self.edge_deprel is not None and dep.deprel != self.edge_deprel:
            return False
        for constraint in self.constraints:
            token = dep if constraint.role is NodeRole.DEP else gov
            if token_attribute(token, constraint.attribute) != constraint.value:
                return False
        return True

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "ScopePattern":
        """Build from config keys like "gov.upos", "dep.Number", "deprel"."""
        constraints: list[ScopeConstraint] = []
        edge_deprel: str | None = None
        for key, value in mapping.items():
            if not isinstance(value, str):
                raise ValueError(f"scope value for {key!r} must be a string")
            if key in ("deprel", "edge.deprel"):
                edge_deprel = value
                continue
            prefix, sep, attribute = key.partition(".")
            if not sep or prefix not in ("dep", "gov") or not attribute:
                raise ValueError(
                    f"scope key {key!r} must be 'deprel', 'dep.<attr>' or 'gov.<attr>'"
                )
            role = NodeRole.DEP if prefix == "dep" else NodeRole.GOV
            constraints.append(ScopeConstraint(role, attribute, value))
        return cls(constraints=tuple(constraints), edge_deprel=edge_deprel)

    def describe(self) -> dict[str, str]:
        """Inverse of from_mapping, with deterministic key order."""
        described: dict[str, str] = {}
        if self.edge_deprel is not None:
            described["deprel"] = self.edge_deprel
        for c in sorted(self.constraints, key=lambda c: (c.role.value, c.attribute)):
            described[f"{c.role.value}.{c.attribute}"] = c.value
        return described


@dataclass(frozen=True)
class AgreementResponse:
    """Holds iff dependent and governor share the same value for a feature.

    Edges where either endpoint lacks the feature fall outside the scope;
    they are not negative examples.
    """

    feature: str

    kind = "agreement"

    def label(self, gov: Token, dep: Token) -> int:
        return int(dep.feats[self.feature] == gov.feats[self.feature])

    def in_scope(self, gov: Token, dep: Token) -> bool:
        return self.feature in dep.feats and self.feature in gov.feats

    def describe(self) -> dict[str, str]:
        return {"kind": self.kind, "feature": self.feature}


@dataclass(frozen=True)
class OrderResponse:
    """Holds iff the governor is on the configured side of the dependent."""

    direction: str

    kind = "order"

    def __post_init__(self) -> None:
        if self.direction not in ORDER_DIRECTIONS:
            raise ValueError(
                f"order direction must be one of {ORDER_DIRECTIONS}, got {self.direction!r}"
            )

    def label(self, gov: Token, dep: Token) -> int:
        if self.direction == GOV_BEFORE_DEP:
            return int(gov.id < dep.id)
        return int(gov.id > dep.id)

    def in_scope(self, gov: Token, dep: Token) -> bool:
        return True

    def describe(self) -> dict[str, str]:
        return {"kind": self.kind, "direction": self.direction}


Response = Union[AgreementResponse, OrderResponse]


@dataclass(frozen=True)
class Instance:
    """One in-scope dependency edge with its label and neighborhood."""

    sentence: Sentence
    gov: Token
    dep: Token
    label: int
    grandparent: Token | None
    codependents: tuple[Token, ...]
    grandchildren: tuple[Token, ...]


def extract_instances(
    treebank: Treebank, scope: ScopePattern, response: Response
) -> list[Instance]:
    """One Instance per scope-matching edge, in corpus order."""
    instances: list[Instance] = []
    for sentence in treebank.sentences:
        for dep in sentence.tokens:
            if dep.head == 0:
                continue
            gov = sentence.token(dep.head)
            if not scope.matches(gov, dep):
                continue
            if not response.in_scope(gov, dep):
                continue
            instances.append(
                Instance(
                    sentence=sentence,
                    gov=gov,
                    dep=dep,
                    label=response.label(gov, dep),
                    grandparent=sentence.governor_of(gov.id),
                    codependents=tuple(
                        t for t in sentence.dependents_of(gov.id) if t.id != dep.id
                    ),
                    grandchildren=sentence.dependents_of(dep.id),
                )
            )
    return instances


class ScopeCounts(NamedTuple):
    n_scope: int
    n_positive: int
    mu: float


def scope_counts(instances: list[Instance]) -> ScopeCounts:
    """Scope size, positive count, and the base rate of the response."""
    n = len(instances)
    if n == 0:
        raise EmptyScopeError("empty scope: no edge matches the pattern")
    positive = sum(i.label for i in instances)
    return ScopeCounts(n, positive, positive / n)
