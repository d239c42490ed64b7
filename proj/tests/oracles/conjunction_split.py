#!/usr/bin/env python3
"""Independent check of the sentence and conjunction boundary rules.

Prints the clause list for each argument.
"""
import sys

CONJ = {"and", "but", "or", "so", "because", "since", "although", "while", "when", "if",
        "that", "which", "who", "where", "after", "before"}
EDGE = ".,;:!?"


def clauses(utterance):
    out, cur = [], []
    toks = utterance.split()
    for i, tok in enumerate(toks):
        word = tok.strip(EDGE).lower()
        rest = [t for t in toks[i + 1:] if t.strip(EDGE)]
        if word in CONJ and cur and len(rest) >= 2:
            out.append(cur)
            cur = []
        cur.append(tok)
        if tok[-1] in ".!?":
            out.append(cur)
            cur = []
    if cur:
        out.append(cur)
    return [" ".join(c).strip(EDGE) for c in out if " ".join(c).strip(EDGE)]


if __name__ == "__main__":
    for arg in sys.argv[1:]:
        print(clauses(arg))
