#!/usr/bin/env python3
"""Regenerates the bundled synthetic corpora and test fixtures.

Four toy agglutinative languages with controlled root overlap and script
variation, written as CoNLL-U. Deterministic: rerunning produces identical
bytes. Run from the repository root:

    python3 tools/make_fixtures.py
"""

import random
import unicodedata
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


# --- toy language definitions -------------------------------------------

NORTH_NOUNS = ["talo", "kala", "metsa", "joki", "kivi", "lintu", "karhu",
               "vene", "tie", "maa", "puu", "lumi", "ranta", "saari", "ilta",
               "paiva"]
NORTH_VERBS = ["juokse", "ui", "lenta", "syo", "nuku", "laula", "kanta",
               "rakenta", "etsi", "loyta"]
NORTH_ADJS = ["iso", "pieni", "vanha", "uusi", "pitka", "kylma", "kaunis",
              "nopea"]

SOUTH_NOUNS = NORTH_NOUNS[:10] + ["jarvi", "niemi", "salmi", "koski", "harju",
                                  "suo"]
SOUTH_VERBS = NORTH_VERBS[:6] + ["kierra", "puhu", "kuuntele", "istu"]
SOUTH_ADJS = NORTH_ADJS[:5] + ["lamma", "syva", "matala"]

EAST_NOUNS = NORTH_NOUNS[:5] + ["maja", "sild", "rand", "orav", "kask",
                                "laht", "sadam", "tamm", "oks", "juur",
                                "sammal"]
EAST_VERBS = NORTH_VERBS[:3] + ["hyppa", "vaata", "kuula", "anna", "vota",
                                "pane", "tule"]
EAST_ADJS = NORTH_ADJS[:2] + ["suur", "vaike", "korge", "madal", "soe",
                              "kulm"]

WEST_NOUNS = ["дом", "рыба", "лес", "река", "камень", "птица", "медведь",
              "лодка", "путь", "земля", "дерево", "снег", "берег", "остров",
              "вечер", "день"]
WEST_VERBS = ["бежа", "плава", "лета", "куша", "спа", "пева", "неси",
              "строи", "иска", "наход"]
WEST_ADJS = ["больш", "мал", "стар", "нов", "длинн", "холодн", "красив",
             "быстр"]

LANGS = {
    "north": dict(
        nouns=NORTH_NOUNS, verbs=NORTH_VERBS, adjs=NORTH_ADJS,
        noun_cases=["", "n", "ssa", "lle", "sta"], plural="t",
        verb_persons=["n", "t", "", "mme", "vat"], adj_degrees=["", "mpi"],
        det=["se", "tama"], pron=["mina", "sina", "han"],
        adv=["nyt", "usein", "hitaasti", "nopeasti"], adp=["alla", "luona"],
        cconj=["ja"], num=["kolme", "viisi"], sentences=240, seed=11),
    "south": dict(
        nouns=SOUTH_NOUNS, verbs=SOUTH_VERBS, adjs=SOUTH_ADJS,
        noun_cases=["", "n", "ssa", "lla", "ksi"], plural="t",
        verb_persons=["n", "t", "", "tte", "vat"], adj_degrees=["", "mpi"],
        det=["se", "toi"], pron=["mina", "sina", "hen"],
        adv=["nyt", "usein", "kauan", "heti"], adp=["alla", "vieressa"],
        cconj=["ja"], num=["kolme", "nelja"], sentences=200, seed=22),
    "east": dict(
        nouns=EAST_NOUNS, verbs=EAST_VERBS, adjs=EAST_ADJS,
        noun_cases=["", "m", "sse", "le"], plural="d",
        verb_persons=["n", "d", "b", "me", ""], adj_degrees=["", "m"],
        det=["see", "too"], pron=["mina", "sina", "tema"],
        adv=["nuud", "tihti", "kaua"], adp=["all", "korval"],
        cconj=["ning"], num=["kolm", "neli"], sentences=160, seed=33),
    "west": dict(
        nouns=WEST_NOUNS, verbs=WEST_VERBS, adjs=WEST_ADJS,
        noun_cases=["", "а", "е", "ом"], plural="ы",
        verb_persons=["ю", "ешь", "ет", "ем", "ют"],
        adj_degrees=["ой", "ая", "ое"],
        det=["тот", "этот"], pron=["я", "ты", "он"],
        adv=["сейчас", "часто", "медленно"], adp=["под", "у"],
        cconj=["и"], num=["три", "пять"], sentences=160, seed=44),
}

# Tag sequences; ADP is a postposition so it always follows a NOUN.
TEMPLATES = [
    ["DET", "NOUN", "VERB", "PUNCT"],
    ["DET", "ADJ", "NOUN", "VERB", "DET", "NOUN", "PUNCT"],
    ["PRON", "VERB", "ADV", "PUNCT"],
    ["NOUN", "VERB", "NOUN", "CCONJ", "NOUN", "PUNCT"],
    ["DET", "NOUN", "NOUN", "ADP", "VERB", "PUNCT"],
    ["PRON", "ADV", "VERB", "DET", "ADJ", "NOUN", "PUNCT"],
    ["NUM", "NOUN", "VERB", "ADV", "PUNCT"],
    ["DET", "NOUN", "VERB", "NOUN", "ADP", "PUNCT"],
]


def make_word(tag, lang, rng):
    if tag == "NOUN":
        form = rng.choice(lang["nouns"])
        if rng.random() < 0.3:
            form += lang["plural"]
        return form + rng.choice(lang["noun_cases"])
    if tag == "VERB":
        return rng.choice(lang["verbs"]) + rng.choice(lang["verb_persons"])
    if tag == "ADJ":
        return rng.choice(lang["adjs"]) + rng.choice(lang["adj_degrees"])
    if tag == "DET":
        return rng.choice(lang["det"])
    if tag == "PRON":
        return rng.choice(lang["pron"])
    if tag == "ADV":
        return rng.choice(lang["adv"])
    if tag == "ADP":
        return rng.choice(lang["adp"])
    if tag == "CCONJ":
        return rng.choice(lang["cconj"])
    if tag == "NUM":
        return rng.choice(lang["num"])
    if tag == "PUNCT":
        return "!" if rng.random() < 0.15 else "."
    raise AssertionError(tag)


def token_line(idx, form, upos):
    return f"{idx}\t{form}\t_\t{upos}\t_\t_\t_\t_\t_\t_"


def generate_language(name):
    lang = LANGS[name]
    rng = random.Random(lang["seed"])
    lines = []
    for si in range(lang["sentences"]):
        template = TEMPLATES[si % len(TEMPLATES)]
        tokens = [(make_word(tag, lang, rng), tag) for tag in template]
        lines.append(f"# sent_id = {name}-{si + 1:04d}")
        lines.append("# text = " + " ".join(f for f, _ in tokens))
        emitted = 0
        for ti, (form, tag) in enumerate(tokens, start=1):
            # Sprinkle in multiword-token ranges and empty nodes, which a
            # CoNLL-U reader must skip.
            if si % 17 == 3 and ti == 1:
                lines.append(f"1-2\t{tokens[0][0]}{tokens[1][0]}\t_\t_\t_\t_\t_\t_\t_\t_")
            lines.append(token_line(ti, form, tag))
            emitted += 1
            if si % 23 == 5 and ti == 2:
                lines.append(f"2.1\t_\t_\t_\t_\t_\t_\t_\t_\t_")
        lines.append("")
    return "\n".join(lines) + "\n"


def write(path, content):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(content.encode("utf-8"))
    print(f"wrote {path} ({len(content.splitlines())} lines)")


def main():
    data = ROOT / "data"
    for name in LANGS:
        write(data / f"{name}.conllu", generate_language(name))

    # Language factor sheet for the cross-language analysis. train_sentences
    # is the auto 6:2:2 training share of each target corpus.
    profiles = "\n".join([
        "code\ttrain_sentences\tresource_tier\turalic_related\tscript",
        "south\t120\tLOW\t1\tLATIN",
        "east\t96\tUNDER\t1\tLATIN",
        "west\t96\tUNDER\t0\tCYRILLIC",
    ]) + "\n"
    write(data / "profiles.tsv", profiles)

    fixtures = ROOT / "tests" / "fixtures"

    # Frozen NFKC pairs; every character here predates Unicode 13, and
    # normalization of assigned characters never changes between versions.
    samples = [
        "abc", "äö", "ä", "ﬁsh", "ﬀ", "Ａｂｃ１２３", "ｶﾞ", "①②",
        "Ⅸ", "㎞", "½", "x²", "ℕ", "™", "'ñ", "가", "가",
        "Ωμ", "¼ cup", "ṩ", "ǆ",
    ]
    pairs = "".join(f"{s}\t{unicodedata.normalize('NFKC', s)}\n" for s in samples)
    write(fixtures / "nfkc_pairs.tsv", pairs)

    write(fixtures / "ranges_empty.conllu", "\n".join([
        "# sent_id = fix-1",
        "# text = vamos a casa",
        "1-2\tvamos\t_\t_\t_\t_\t_\t_\t_\t_",
        "1\tvamos\t_\tVERB\t_\t_\t0\troot\t_\t_",
        "2\ta\t_\tADP\t_\t_\t1\tcase\t_\t_",
        "2.1\telided\t_\tNOUN\t_\t_\t_\t_\t_\t_",
        "3\tcasa\t_\tNOUN\t_\t_\t1\tobl\t_\t_",
        "",
        "# no sent_id comment here",
        "1\tsolo\t_\tADV\t_\t_\t0\troot\t_\t_",
        "",
    ]) + "\n")

    write(fixtures / "bad_columns.conllu", "\n".join([
        "# sent_id = bad-1",
        "1\tword\tNOUN",
        "",
    ]) + "\n")

    write(fixtures / "bad_upos.conllu", "\n".join([
        "1\tword\t_\tNOUNX\t_\t_\t_\t_\t_\t_",
        "",
    ]) + "\n")

    write(fixtures / "bad_id.conllu", "\n".join([
        "x1\tword\t_\tNOUN\t_\t_\t_\t_\t_\t_",
        "",
    ]) + "\n")

    write(fixtures / "empty.conllu", "\n")

    crlf = "1\tword\t_\tNOUN\t_\t_\t_\t_\t_\t_\r\n\r\n1\tmore\t_\tVERB\t_\t_\t_\t_\t_\t_\r\n"
    (fixtures / "crlf.conllu").write_bytes(crlf.encode("utf-8"))
    print(f"wrote {fixtures / 'crlf.conllu'}")

    no_nl = "# sent_id = tail\n1\tlast\t_\tNOUN\t_\t_\t_\t_\t_\t_"
    (fixtures / "no_trailing_newline.conllu").write_bytes(no_nl.encode("utf-8"))
    print(f"wrote {fixtures / 'no_trailing_newline.conllu'}")


if __name__ == "__main__":
    main()
