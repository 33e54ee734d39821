"""CoNLL-U ingestion and an immutable dependency-graph model.

Implements the 10-column CoNLL-U interchange format (ID FORM LEMMA UPOS
XPOS FEATS HEAD DEPREL DEPS MISC, tab-separated, sentences separated by
blank lines, "_" = unspecified). Only basic syntactic tokens are modeled:
multiword-token range lines ("4-5") and empty nodes ("5.1") are skipped.
Sentences with malformed lines or dangling head references are rejected,
not repaired, and surface as diagnostics so downstream statistics are
never silently polluted.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Iterable, Iterator

CONLLU_COLUMNS = 10


class ParseError(Exception):
    """Raised in strict mode when a sentence cannot be parsed."""


@dataclass(frozen=True)
class ParseOptions:
    """Parsing behavior knobs.

    source_name labels diagnostics and source spans; strict turns
    per-sentence rejections into a ParseError on first occurrence.
    """

    source_name: str = "<stream>"
    strict: bool = False


@dataclass(frozen=True)
class Diagnostic:
    """One rejected sentence: where it came from and why."""

    source: str
    line: int
    message: str

    def __str__(self) -> str:
        return f"{self.source}:{self.line}: {self.message}"


@dataclass(frozen=True)
class SourceSpan:
    source: str
    line_start: int
    line_end: int


@dataclass(frozen=True)
class Token:
    """One basic syntactic token.

    head == 0 means the token has no governor (tree root). Multi-valued
    feature values ("Fem,Masc") are kept verbatim as a single string.
    """

    id: int
    form: str
    lemma: str
    upos: str
    xpos: str | None
    feats: dict[str, str]
    head: int
    deprel: str
    misc: str | None = None

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ValueError(f"token id must be >= 1, got {self.id}")
        if self.head < 0:
            raise ValueError(f"token head must be >= 0, got {self.head}")
        if self.head == self.id:
            raise ValueError(f"token {self.id} has itself as head")
        for key, value in self.feats.items():
            if not key or not value:
                raise ValueError(f"token {self.id} has an empty feature key or value")

    def to_conllu_line(self) -> str:
        """Render the token back to its 10-column line (DEPS is not retained)."""
        return "\t".join(
            (
                str(self.id),
                self.form,
                self.lemma,
                self.upos,
                self.xpos if self.xpos is not None else "_",
                format_feats(self.feats),
                str(self.head),
                self.deprel,
                "_",
                self.misc if self.misc is not None else "_",
            )
        )


def format_feats(feats: dict[str, str]) -> str:
    """FEATS column syntax: Key=Val|Key=Val sorted by key, "_" when empty."""
    if not feats:
        return "_"
    keys = sorted(feats, key=lambda k: (k.lower(), k))
    return "|".join(f"{k}={feats[k]}" for k in keys)


@dataclass(frozen=True)
class Sentence:
    """An immutable dependency graph with O(1) governor/dependent access."""

    sent_id: str
    tokens: tuple[Token, ...]
    source: SourceSpan
    _by_id: dict[int, Token] = field(init=False, repr=False, compare=False)
    _dependents: dict[int, tuple[Token, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id: dict[int, Token] = {}
        for token in self.tokens:
            if token.id in by_id:
                raise ValueError(f"duplicate token id {token.id}")
            by_id[token.id] = token
        children: dict[int, list[Token]] = {tid: [] for tid in by_id}
        for token in self.tokens:
            if token.head != 0:
                if token.head not in by_id:
                    raise ValueError(
                        f"token {token.id} references missing head {token.head}"
                    )
                children[token.head].append(token)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(
            self,
            "_dependents",
            {tid: tuple(sorted(deps, key=lambda t: t.id)) for tid, deps in children.items()},
        )

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, token_id: int) -> Token:
        try:
            return self._by_id[token_id]
        except KeyError:
            raise KeyError(f"sentence {self.sent_id!r} has no token id {token_id}") from None

    def dependents_of(self, token_id: int) -> tuple[Token, ...]:
        """Tokens whose head is token_id, in surface order."""
        if token_id not in self._dependents:
            raise KeyError(f"sentence {self.sent_id!r} has no token id {token_id}")
        return self._dependents[token_id]

    def governor_of(self, token_id: int) -> Token | None:
        """The head token, or None for a root (head 0)."""
        token = self.token(token_id)
        if token.head == 0:
            return None
        return self._by_id[token.head]

    @property
    def root_count(self) -> int:
        return sum(1 for t in self.tokens if t.head == 0)

    def to_conllu(self) -> str:
        """Retained-line serialization: sent_id comment plus token lines."""
        lines = [f"# sent_id = {self.sent_id}"]
        lines.extend(t.to_conllu_line() for t in self.tokens)
        return "\n".join(lines) + "\n"


def dependents_of(sentence: Sentence, token_id: int) -> tuple[Token, ...]:
    return sentence.dependents_of(token_id)


@dataclass(frozen=True)
class Treebank:
    """A parsed corpus plus diagnostics for everything that was not kept."""

    sentences: tuple[Sentence, ...]
    rejected: tuple[Diagnostic, ...] = ()

    @property
    def sentence_count(self) -> int:
        return len(self.sentences)

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)

    @property
    def multi_root_count(self) -> int:
        """Sentences whose root count differs from one (kept, but flagged)."""
        return sum(1 for s in self.sentences if s.root_count != 1)

    @classmethod
    def concat(cls, banks: Iterable["Treebank"]) -> "Treebank":
        sentences: list[Sentence] = []
        rejected: list[Diagnostic] = []
        for bank in banks:
            sentences.extend(bank.sentences)
            rejected.extend(bank.rejected)
        return cls(sentences=tuple(sentences), rejected=tuple(rejected))


class _LineError(Exception):
    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(message)
        self.line_no = line_no
        self.message = message


def _parse_token_line(line: str, line_no: int) -> Token | None:
    """Parse one token line; None for skipped range/empty-node lines."""
    columns = line.split("\t")
    if len(columns) != CONLLU_COLUMNS:
        raise _LineError(line_no, f"expected {CONLLU_COLUMNS} columns, got {len(columns)}")
    raw_id = columns[0]
    if "-" in raw_id:
        return None  # multiword-token range line
    if "." in raw_id:
        return None  # empty node
    try:
        token_id = int(raw_id)
    except ValueError:
        raise _LineError(line_no, f"unparseable token id {raw_id!r}") from None
    try:
        head = int(columns[6])
    except ValueError:
        raise _LineError(line_no, f"unparseable head {columns[6]!r}") from None
    feats: dict[str, str] = {}
    if columns[5] != "_":
        for pair in columns[5].split("|"):
            key, sep, value = pair.partition("=")
            if not sep or not key or not value:
                raise _LineError(line_no, f"malformed FEATS entry {pair!r}")
            feats[key] = value
    try:
        return Token(
            id=token_id,
            form=columns[1],
            lemma=columns[2],
            upos=columns[3],
            xpos=None if columns[4] == "_" else columns[4],
            feats=feats,
            head=head,
            deprel=columns[7],
            misc=None if columns[9] == "_" else columns[9],
        )
    except ValueError as exc:
        raise _LineError(line_no, str(exc)) from None


def _blocks(lines: Iterator[str]) -> Iterator[tuple[int, list[tuple[int, str]]]]:
    """Group numbered lines into blank-line separated blocks."""
    current: list[tuple[int, str]] = []
    start = 1
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if line == "":
            if current:
                yield start, current
            current = []
            start = line_no + 1
        else:
            if not current:
                start = line_no
            current.append((line_no, line))
    if current:
        yield start, current


def parse_conllu(stream: IO[bytes] | IO[str] | str, options: ParseOptions | None = None) -> Treebank:
    """Parse a CoNLL-U byte or text stream into a Treebank.

    Comment lines are scanned for "sent_id"; sentences without one get a
    deterministic "<source>#<ordinal>" identifier. A malformed token line
    or a dangling head rejects the whole sentence with a diagnostic.
    """
    options = options or ParseOptions()
    if isinstance(stream, str):
        text: IO[str] = io.StringIO(stream)
    elif isinstance(stream.read(0), bytes):  # type: ignore[union-attr]
        text = io.TextIOWrapper(stream, encoding="utf-8")  # type: ignore[arg-type]
    else:
        text = stream  # type: ignore[assignment]

    sentences: list[Sentence] = []
    rejected: list[Diagnostic] = []
    ordinal = 0
    for start, block in _blocks(iter(text)):
        ordinal += 1
        sent_id: str | None = None
        tokens: list[Token] = []
        end = block[-1][0]
        try:
            last_id = 0
            for line_no, line in block:
                if line.startswith("#"):
                    key, sep, value = line[1:].partition("=")
                    if sep and key.strip() == "sent_id":
                        sent_id = value.strip()
                    continue
                token = _parse_token_line(line, line_no)
                if token is None:
                    continue
                if token.id <= last_id:
                    raise _LineError(line_no, f"token id {token.id} out of order")
                last_id = token.id
                tokens.append(token)
            if not tokens:
                continue  # comment-only block
            if sent_id is None:
                sent_id = f"{options.source_name}#{ordinal}"
            sentence = Sentence(
                sent_id=sent_id,
                tokens=tuple(tokens),
                source=SourceSpan(options.source_name, start, end),
            )
        except (_LineError, ValueError) as exc:
            line_no = exc.line_no if isinstance(exc, _LineError) else start
            message = exc.message if isinstance(exc, _LineError) else str(exc)
            diagnostic = Diagnostic(options.source_name, line_no, message)
            if options.strict:
                raise ParseError(str(diagnostic)) from None
            rejected.append(diagnostic)
            continue
        sentences.append(sentence)
    return Treebank(sentences=tuple(sentences), rejected=tuple(rejected))


def parse_conllu_file(path: str | Path, options: ParseOptions | None = None) -> Treebank:
    """Parse one CoNLL-U file; I/O errors propagate (fatal)."""
    path = Path(path)
    options = replace(options or ParseOptions(), source_name=str(path))
    with open(path, "rb") as handle:
        return parse_conllu(handle, options)
