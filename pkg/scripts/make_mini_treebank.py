#!/usr/bin/env python3
"""Regenerate the bundled mini treebank (data/mini_treebank.conllu).

A small deterministic French-flavored corpus of noun phrases built so
the adjective-position job in data/mini_config.toml finds at least one
strongly significant rule: ordinal adjectives (NumType=Ord) almost
always precede their governing noun, everything else mostly follows it.
The file also exercises parser corner cases on purpose: a few
multiword-token range lines ("du") and one comment-only block.
"""

from __future__ import annotations

import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "mini_treebank.conllu"

NOUNS = [
    ("maison", "Fem"),
    ("chat", "Masc"),
    ("porte", "Fem"),
    ("livre", "Masc"),
    ("ville", "Fem"),
    ("jardin", "Masc"),
    ("histoire", "Fem"),
    ("chemin", "Masc"),
]
PLAIN_ADJS = ["rouge", "verte", "moderne", "tranquille", "curieuse", "importante"]
PRE_ADJS = ["grande", "petite", "belle"]  # sometimes preposed, carries no marker
ORDINAL_ADJS = ["premier", "deuxième", "troisième", "dernière"]
VERBS = ["regarde", "ouvre", "cherche", "raconte"]
PREPS = ["dans", "sur", "avec"]


def token(tid, form, lemma, upos, feats, head, deprel):
    feat_text = (
        "|".join(
            f"{k}={v}"
            for k, v in sorted(feats.items(), key=lambda kv: (kv[0].lower(), kv[0]))
        )
        or "_"
    )
    return f"{tid}\t{form}\t{lemma}\t{upos}\t_\t{feat_text}\t{head}\t{deprel}\t_\t_"


def flip(number: str) -> str:
    return "Plur" if number == "Sing" else "Sing"


def pick_adjective(rng: random.Random, gender: str, number: str):
    """Return (form, feats, preposed) for one adjective occurrence."""
    kind = rng.random()
    if rng.random() < 0.12:  # occasional number mismatch, as in real annotation
        number = flip(number)
    feats = {"Gender": gender, "Number": number}
    if kind < 0.2:
        feats["NumType"] = "Ord"
        return rng.choice(ORDINAL_ADJS), feats, rng.random() < 0.97
    if kind < 0.35:
        return rng.choice(PRE_ADJS), feats, rng.random() < 0.45
    return rng.choice(PLAIN_ADJS), feats, rng.random() < 0.06


def det_feats(rng, nf):
    feats = dict(nf)
    if rng.random() < 0.06:
        feats["Number"] = flip(feats["Number"])
    return feats


def clause_sentence(rng, det, noun, nf, adj, adj_feats, pre):
    """PRON VERB DET [ADJ NOUN | NOUN ADJ]"""
    verb = rng.choice(VERBS)
    noun_id, adj_id = (5, 4) if pre else (4, 5)
    lines = [
        token(1, "elle" if rng.random() < 0.5 else "il", "il", "PRON", {"Number": "Sing", "Person": "3"}, 2, "subj"),
        token(2, verb, verb, "VERB", {"Mood": "Ind", "Tense": "Pres"}, 0, "root"),
        token(3, det, "le", "DET", det_feats(rng, nf), noun_id, "det"),
    ]
    noun_line = token(noun_id, noun, noun, "NOUN", nf, 2, "comp:obj")
    adj_line = token(adj_id, adj, adj, "ADJ", adj_feats, noun_id, "mod")
    lines.extend([adj_line, noun_line] if pre else [noun_line, adj_line])
    return lines


def pp_sentence(rng, det, noun, nf, adj, adj_feats, pre):
    """ADP DET [ADJ NOUN | NOUN ADJ]: the noun's governor is the adposition."""
    prep = rng.choice(PREPS)
    noun_id, adj_id = (4, 3) if pre else (3, 4)
    lines = [
        token(1, prep, prep, "ADP", {}, 0, "root"),
        token(2, det, "le", "DET", det_feats(rng, nf), noun_id, "det"),
    ]
    noun_line = token(noun_id, noun, noun, "NOUN", nf, 1, "comp:obj")
    adj_line = token(adj_id, adj, adj, "ADJ", adj_feats, noun_id, "mod")
    lines.extend([adj_line, noun_line] if pre else [noun_line, adj_line])
    return lines


def np_pp_sentence(rng, det, noun, nf, adj, adj_feats, pre):
    """DET [ADJ] NOUN [ADJ] du NOUN: adjective with an adposition codependent.

    The postposed variant spells "du" as a real multiword range line.
    """
    noun2, gender2 = rng.choice(NOUNS)
    nf2 = {"Gender": gender2, "Number": "Sing"}
    if pre:
        return [
            token(1, det, "le", "DET", det_feats(rng, nf), 3, "det"),
            token(2, adj, adj, "ADJ", adj_feats, 3, "mod"),
            token(3, noun, noun, "NOUN", nf, 0, "root"),
            token(4, "de", "de", "ADP", {}, 3, "udep"),
            token(5, noun2, noun2, "NOUN", nf2, 4, "comp:obj"),
        ]
    return [
        token(1, det, "le", "DET", det_feats(rng, nf), 2, "det"),
        token(2, noun, noun, "NOUN", nf, 0, "root"),
        token(3, adj, adj, "ADJ", adj_feats, 2, "mod"),
        "4-5\tdu\t_\t_\t_\t_\t_\t_\t_\t_",
        token(4, "de", "de", "ADP", {}, 2, "udep"),
        token(5, "le", "le", "DET", nf2, 6, "det"),
        token(6, noun2, noun2, "NOUN", nf2, 4, "comp:obj"),
    ]


def build_sentences(rng: random.Random) -> list[list[str]]:
    sentences = []
    for index in range(120):
        noun, gender = rng.choice(NOUNS)
        number = rng.choice(["Sing", "Sing", "Plur"])
        nf = {"Gender": gender, "Number": number}
        det = "les" if number == "Plur" else ("la" if gender == "Fem" else "le")
        adj, adj_feats, pre = pick_adjective(rng, gender, number)
        shape = rng.random()
        if shape < 0.4:
            lines = clause_sentence(rng, det, noun, nf, adj, adj_feats, pre)
        elif shape < 0.7:
            lines = pp_sentence(rng, det, noun, nf, adj, adj_feats, pre)
        else:
            lines = np_pp_sentence(rng, det, noun, nf, adj, adj_feats, pre)
        sentences.append([f"# sent_id = mini-{index + 1:04d}"] + lines)
    return sentences


def main() -> None:
    rng = random.Random(20240301)
    sentences = build_sentences(rng)
    blocks = ["\n".join(lines) for lines in sentences]
    # one comment-only block: parsers must skip it without a diagnostic
    blocks.insert(40, "# newdoc id = mini")
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text("\n\n".join(blocks) + "\n\n", encoding="utf-8")
    total = sum(
        1
        for b in blocks
        for line in b.splitlines()
        if line and not line.startswith("#")
    )
    print(f"wrote {OUT} ({len(sentences)} sentences, {total} token lines)")


if __name__ == "__main__":
    main()
