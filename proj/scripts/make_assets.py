#!/usr/bin/env python3
"""Regenerates the bundled data files under assets/. Deterministic."""

import random
from fractions import Fraction
from pathlib import Path

ASSETS = Path(__file__).resolve().parent.parent / "assets"


def write_corpus():
    rng = random.Random(20240817)
    subjects = ["cat", "dog", "bird", "fox"]
    verbs = ["sat", "ran", "slept", "jumped", "looked"]
    places = [
        ("on", "the", "mat"),
        ("on", "the", "log"),
        ("on", "the", "roof"),
        ("in", "the", "den"),
        ("in", "the", "garden"),
    ]
    tails = ["quietly", "quickly", "again", "away", "alone"]
    lines = []
    for _ in range(2000):
        s = rng.choice(subjects)
        v = rng.choice(verbs)
        words = ["the", s, v]
        shape = rng.random()
        if shape < 0.45:
            words += list(rng.choice(places))
        elif shape < 0.7:
            words.append(rng.choice(tails))
        elif shape < 0.85:
            words += list(rng.choice(places))
            words.append(rng.choice(tails))
        lines.append(" ".join(words))
    (ASSETS / "corpus_tiny.txt").write_text("\n".join(lines) + "\n")


def mixture_entries(eps):
    """Uniform clean support: 20 two-word sentences; uniform noise support:
    10 repeated-word distractors. Masses (1-eps)/20 and eps/10."""
    subjects = ["cat", "dog", "bird", "fox"]
    verbs = ["sat", "ran", "slept", "jumped", "looked"]
    clean = [f"{s} {v}" for s in subjects for v in verbs]
    noise = [f"blah{i} blah{i} blah{i}" for i in range(10)]
    rows = []
    for text in clean:
        rows.append((Fraction(1 - eps, 20), text))
    for text in noise:
        rows.append((Fraction(eps, 10), text))
    assert sum(p for p, _ in rows) == 1
    return rows


def write_mixtures():
    for name, eps in [
        ("mixture_eps030.tsv", Fraction(3, 10)),
        ("mixture_eps13.tsv", Fraction(1, 3)),
        ("mixture_eps036.tsv", Fraction(9, 25)),
    ]:
        rows = mixture_entries(eps)
        with open(ASSETS / name, "w") as f:
            for p, text in rows:
                f.write(f"{p.numerator}/{p.denominator}\t{text}\n")


def write_family_spec():
    (ASSETS / "length_family.json").write_text(
        '{\n'
        '  "families": [\n'
        '    {"label": "const_q", "q": "1/10000", "branching": 2,\n'
        '     "lengths": [10, 11, 12, 13, 14, 15, 16, 17, 18]},\n'
        '    {"label": "decay_q", "q": "1/10", "q_decay": "inverse_length", "branching": 2,\n'
        '     "lengths": [2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]}\n'
        '  ]\n'
        '}\n'
    )


def write_demo():
    """Global mode is the empty output; the length-conditional modes for
    L in {4, 6, 8} are full sentences."""
    rows = [
        (Fraction(1, 10), ""),
        # length 4
        (Fraction(9, 100), "the cat sat down"),
        (Fraction(8, 100), "the dog ran away"),
        (Fraction(3, 100), "the fox slept well"),
        # length 6
        (Fraction(7, 100), "the bird looked at the sky"),
        (Fraction(6, 100), "the cat ran in the garden"),
        (Fraction(2, 100), "the dog sat on the mat"),
        # length 8
        (Fraction(5, 100), "the fox jumped over the log again today"),
        (Fraction(4, 100), "the bird slept in the den all night"),
        (Fraction(2, 100), "the cat looked at the roof very quietly"),
    ]
    fillers = [
        "the dog slept",
        "the fox ran",
        "the cat looked",
        "the bird sat",
        "the dog jumped",
        "the cat sat on the mat",
        "the dog ran in the den",
        "the fox looked at the sky",
        "the bird ran away again",
        "the cat slept very well",
        "the dog looked at the garden now",
        "the fox sat on the roof today",
        "the bird jumped over the mat again",
        "the cat ran away from the den",
        "the dog slept in the garden alone",
        "the fox ran quickly",
        "the bird slept alone",
        "the cat jumped now",
        "the dog sat here",
        "the fox looked away",
        "the bird ran home",
        "the cat slept here",
    ]
    for text in fillers:
        rows.append((Fraction(2, 100), text))
    total = sum(p for p, _ in rows)
    assert total == 1, total
    lengths = {len(t.split()) for _, t in rows[1:]}
    assert {4, 6, 8} <= lengths
    with open(ASSETS / "table1_demo.tsv", "w") as f:
        for p, text in rows:
            f.write(f"{p.numerator}/{p.denominator}\t{text}\n")


def write_binary_corpus():
    """Tiny two-word corpus for enumerable sub-model tests."""
    rng = random.Random(7)
    lines = []
    for _ in range(40):
        n = rng.randint(1, 6)
        lines.append(" ".join(rng.choice(["up", "down"]) for _ in range(n)))
    data = Path(__file__).resolve().parent.parent / "tests" / "data"
    data.mkdir(parents=True, exist_ok=True)
    (data / "corpus_binary.txt").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    ASSETS.mkdir(parents=True, exist_ok=True)
    write_corpus()
    write_mixtures()
    write_family_spec()
    write_demo()
    write_binary_corpus()
    print("assets written to", ASSETS)
