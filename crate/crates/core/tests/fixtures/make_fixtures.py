#!/usr/bin/env python3
"""Regenerates the small WordNet-format lexicons used by the test suite.

Synset offsets in the data files are byte positions, so the files are
generated rather than edited by hand.
"""
import os

HERE = os.path.dirname(os.path.abspath(__file__))
SUFFIX = {"n": "noun", "v": "verb", "a": "adj", "r": "adv"}
HEADER = "  1 Test fixture in WordNet 3.x database layout.\n"


def write_lexicon(name, synsets):
    """synsets: list of (key, pos, words, pointers, gloss); pointer = (symbol, target_key, src, tgt)."""
    out = os.path.join(HERE, name)
    os.makedirs(out, exist_ok=True)
    by_pos = {p: [s for s in synsets if s[1] in (p, "s" if p == "a" else p)] for p in SUFFIX}
    pos_of = {s[0]: ("a" if s[1] == "s" else s[1]) for s in synsets}
    offsets = {}

    def render(s, offs):
        key, pos, words, ptrs, gloss = s
        parts = [f"{offs.get(key, 0):08d}", "03", pos, f"{len(words):02x}"]
        for w in words:
            parts += [w, "0"]
        parts.append(f"{len(ptrs):03d}")
        for sym, tgt, src, dst in ptrs:
            parts += [sym, f"{offs.get(tgt, 0):08d}", pos_of[tgt], f"{src:02x}{dst:02x}"]
        return " ".join(parts) + f" | {gloss}  \n"

    # Line lengths do not depend on offset values (fixed width), so one
    # layout pass assigns every offset.
    for p, items in by_pos.items():
        pos_ = len(HEADER.encode())
        for s in items:
            offsets[s[0]] = pos_
            pos_ += len(render(s, {}).encode())
    for p, items in by_pos.items():
        with open(os.path.join(out, "data." + SUFFIX[p]), "w", newline="\n") as f:
            f.write(HEADER)
            for s in items:
                f.write(render(s, offsets))
        index = {}
        for s in items:
            for w in s[2]:
                lemma = w.split("(")[0].lower()
                entry = index.setdefault(lemma, ([], set()))
                entry[0].append(offsets[s[0]])
                entry[1].update(sym for sym, *_ in s[3])
        with open(os.path.join(out, "index." + SUFFIX[p]), "w", newline="\n") as f:
            f.write(HEADER)
            for lemma in sorted(index):
                offs, syms = index[lemma]
                syms = sorted(syms)
                fields = [lemma, "a" if p == "a" else p, str(len(offs)), str(len(syms))] + syms
                fields += [str(len(offs)), "0"] + [f"{o:08d}" for o in offs]
                f.write(" ".join(fields) + "  \n")


# a -> b -> c
write_lexicon("chain-wordnet", [
    ("c", "n", ["c"], [], "the root"),
    ("b", "n", ["b"], [("@", "c", 0, 0)], "middle"),
    ("a", "n", ["a"], [("@", "b", 0, 0)], "leaf"),
])

write_lexicon("mini-wordnet", [
    ("entity", "n", ["entity"], [], "that which exists"),
    ("abstraction", "n", ["abstraction"], [("@", "entity", 0, 0)], "a general concept"),
    ("organism", "n", ["organism", "being"], [("@", "entity", 0, 0)], "a living thing"),
    ("animal", "n", ["animal"], [("@", "organism", 0, 0)], "a living organism"),
    ("dog", "n", ["dog"], [("@", "animal", 0, 0)], "a domestic canine"),
    ("cat", "n", ["cat"], [("@", "animal", 0, 0)], "a small feline"),
    ("state", "n", ["state"], [("@", "abstraction", 0, 0)], "a condition"),
    ("condition", "n", ["condition", "status"], [("@", "state", 0, 0)], "a mode of being"),
    ("health", "n", ["health"], [("@", "condition", 0, 0)], "soundness of body"),
    ("illness", "n", ["illness", "sickness"], [("@", "condition", 0, 0)], "impairment of health"),
    ("disease", "n", ["disease"], [("@", "illness", 0, 0)], "a disordered condition"),
    ("food", "n", ["food", "nutrient"], [("@", "entity", 0, 0)], "any substance eaten"),
    ("nutrition", "n", ["nutrition"], [("@", "food", 0, 0), ("+", "nourish", 1, 1)], "nourishment"),
    ("environment", "n", ["environment"], [("@", "abstraction", 0, 0)], "the surroundings"),
    ("influence_n", "n", ["influence"], [("@", "abstraction", 0, 0), ("+", "influence_v", 1, 1)], "a power to affect"),
    ("change_n", "n", ["change"], [("@", "abstraction", 0, 0), ("+", "change_v", 1, 1)], "an alteration"),
    ("outcome", "n", ["outcome", "result"], [("@", "abstraction", 0, 0)], "something that results"),
    ("lifestyle", "n", ["lifestyle", "life_style"], [("@", "abstraction", 0, 0)], "a manner of living"),
    ("affect", "v", ["affect", "impact"], [], "have an effect upon"),
    ("influence_v", "v", ["influence", "act_upon"], [("@", "affect", 0, 0), ("+", "influence_n", 1, 1)], "have an effect on"),
    ("change_v", "v", ["change", "alter"], [("+", "change_n", 1, 1)], "cause to change"),
    ("explain", "v", ["explain"], [], "make plain"),
    ("nourish", "v", ["nourish", "feed"], [("+", "nutrition", 1, 1)], "provide with nourishment"),
    ("walk", "v", ["walk"], [], "use one's feet"),
    ("run", "v", ["run"], [], "move fast"),
    ("environmental", "a", ["environmental"], [("\\", "environment", 1, 1)], "of the environment"),
    ("nutritional", "a", ["nutritional"], [("\\", "nutrition", 1, 1)], "of nutrition"),
    ("significant", "a", ["significant", "important"], [], "important in effect"),
    ("novel", "s", ["novel(a)"], [], "original"),
    ("significantly", "r", ["significantly"], [("\\", "significant", 1, 1)], "in a significant manner"),
])
