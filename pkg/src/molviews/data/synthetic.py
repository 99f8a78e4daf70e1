"""Seeded generator of small drug-like SMILES for tests and demos.

Molecules are one to three ring cores joined by short linkers, decorated
with random substituents, plus a few acyclic chains. Every output parses.
"""

from __future__ import annotations

import numpy as np

# ring atoms in order; only atoms flagged True may carry a substituent or linker
RINGS = (
    (("c", True), ("c", True), ("c", True), ("c", True), ("c", True), ("c", True)),
    (("c", True), ("c", True), ("n", False), ("c", True), ("c", True), ("c", True)),
    (("c", True), ("n", False), ("c", True), ("n", False), ("c", True), ("c", True)),
    (("C", True), ("C", True), ("C", True), ("C", True), ("C", True), ("C", True)),
    (("C", True), ("C", True), ("N", False), ("C", True), ("C", True), ("C", True)),
    (("C", True), ("C", True), ("O", False), ("C", True), ("C", True)),
    (("C", True), ("C", True), ("C", True), ("C", True), ("C", True)),
    (("C", True), ("C", True), ("C", True)),
)
SUBSTITUENTS = ("C", "CC", "O", "N", "F", "Cl", "Br", "OC", "C(=O)O", "C#N", "C(F)(F)F", "CCC", "C(=O)N")
LINKERS = ("", "C", "CC", "O", "N", "C(=O)N", "CO", "S")
# the same groups written to bond through their last atom, for the molecule start
PREFIXES = ("C", "CC", "O", "N", "F", "Cl", "Br", "CO", "OC(=O)", "N#C", "FC(F)(F)", "CCC", "NC(=O)")
CHAINS = ("CCO", "CCCCN", "CC(C)CC(=O)O", "OCCOCCO", "NCC(=O)O", "CCCCCCCC", "C=CC=O", "CC(Cl)CBr")


def _ring(tokens, digit, rng, sub_prob):
    out = []
    for k, (atom, open_) in enumerate(tokens):
        text = atom + (str(digit) if k in (0, len(tokens) - 1) else "")
        if open_ and 0 < k < len(tokens) - 1 and rng.random() < sub_prob:
            text += "(" + SUBSTITUENTS[rng.integers(len(SUBSTITUENTS))] + ")"
        out.append(text)
    return "".join(out)


def random_smiles(rng: np.random.Generator, acyclic_prob=0.05, sub_prob=0.25) -> str:
    if rng.random() < acyclic_prob:
        return CHAINS[rng.integers(len(CHAINS))]
    n_rings = int(rng.choice([1, 2, 3], p=[0.45, 0.4, 0.15]))
    parts = []
    if rng.random() < 0.5:
        parts.append(PREFIXES[rng.integers(len(PREFIXES))])
    for j in range(n_rings):
        ring = RINGS[rng.integers(len(RINGS))]
        if j:
            parts.append(LINKERS[rng.integers(len(LINKERS))])
        parts.append(_ring(ring, j + 1, rng, sub_prob))
    return "".join(parts)


def synthetic_smiles(n: int, seed: int = 0, unique=True, **kwargs) -> list[str]:
    """``n`` SMILES from a seeded stream; duplicates skipped when ``unique``."""
    rng = np.random.default_rng(seed)
    out, seen = [], set()
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 100 * n + 1000:
            raise RuntimeError("could not generate enough distinct molecules")
        s = random_smiles(rng, **kwargs)
        if unique and s in seen:
            continue
        seen.add(s)
        out.append(s)
    return out
