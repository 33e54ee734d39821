"""Small constructors shared by the test modules."""

from __future__ import annotations

from rulepath.treebank import Sentence, SourceSpan, Token


def tok(
    tid: int,
    upos: str = "X",
    head: int = 0,
    deprel: str = "dep",
    form: str | None = None,
    lemma: str | None = None,
    feats: dict[str, str] | None = None,
    xpos: str | None = None,
    misc: str | None = None,
) -> Token:
    form = form if form is not None else f"w{tid}"
    return Token(
        id=tid,
        form=form,
        lemma=lemma if lemma is not None else form,
        upos=upos,
        xpos=xpos,
        feats=feats or {},
        head=head,
        deprel=deprel,
        misc=misc,
    )


def sent(*tokens: Token, sent_id: str = "s1") -> Sentence:
    return Sentence(
        sent_id=sent_id,
        tokens=tuple(tokens),
        source=SourceSpan("<test>", 1, len(tokens)),
    )


def conllu(*rows: tuple, comments: tuple[str, ...] = ()) -> str:
    """Render (id, form, lemma, upos, xpos, feats, head, deprel, deps, misc)
    rows into one sentence block."""
    lines = list(comments)
    for row in rows:
        lines.append("\t".join(str(c) for c in row))
    return "\n".join(lines) + "\n\n"
