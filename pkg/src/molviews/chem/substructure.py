"""Substructure search by backtracking subgraph monomorphism.

Atoms match on element and aromatic flag, bonds on exact order. Extra target
bonds between matched atoms are allowed (the usual substructure semantics).
"""

from __future__ import annotations

from typing import NamedTuple

from molviews.chem.molecule import Molecule
from molviews.chem.smiles import parse_smiles

MAX_PATTERN_ATOMS = 32


class PatternTooLarge(ValueError):
    pass


class SubstructureMatch(NamedTuple):
    found: bool
    count: int


def parse_pattern(text: str) -> Molecule:
    pattern = parse_smiles(text)
    _check_size(pattern)
    return pattern


def _check_size(pattern):
    heavy = sum(1 for a in pattern.atoms if a.is_heavy)
    if heavy > MAX_PATTERN_ATOMS:
        raise PatternTooLarge(f"pattern has {heavy} heavy atoms (max {MAX_PATTERN_ATOMS})")


def _match_order(pattern):
    # connected search order: each new atom (after a component's first) has an
    # already-placed neighbor, so candidates come from the target adjacency
    n = len(pattern.atoms)
    order, anchor = [], []
    placed = [False] * n
    for start in sorted(range(n), key=lambda a: -len(pattern.neighbors[a])):
        if placed[start]:
            continue
        placed[start] = True
        order.append(start)
        anchor.append(None)
        k = len(order) - 1
        while k < len(order):
            a = order[k]
            for nb, _ in pattern.neighbors[a]:
                if not placed[nb]:
                    placed[nb] = True
                    order.append(nb)
                    anchor.append(a)
            k += 1
    return order, anchor


def iter_matches(pattern: Molecule, target: Molecule):
    """Yield every mapping (tuple: pattern atom index -> target atom index)."""
    _check_size(pattern)
    n = len(pattern.atoms)
    if n == 0 or n > len(target.atoms):
        return
    order, anchor = _match_order(pattern)
    patoms, tatoms = pattern.atoms, target.atoms
    compatible = [
        [t for t, ta in enumerate(tatoms) if ta.element == pa.element and ta.aromatic == pa.aromatic]
        for pa in patoms
    ]
    pdeg = [len(pattern.neighbors[a]) for a in range(n)]
    tdeg = [len(target.neighbors[t]) for t in range(len(tatoms))]
    mapping = [-1] * n
    used = set()

    def feasible(p, t):
        if t in used or tdeg[t] < pdeg[p]:
            return False
        ta, pa = tatoms[t], patoms[p]
        if ta.element != pa.element or ta.aromatic != pa.aromatic:
            return False
        for pnb, porder in pattern.neighbors[p]:
            m = mapping[pnb]
            if m >= 0 and target.bond_order(t, m) != porder:
                return False
        return True

    def search(k):
        if k == n:
            yield tuple(mapping)
            return
        p = order[k]
        a = anchor[k]
        cands = compatible[p] if a is None else [nb for nb, _ in target.neighbors[mapping[a]]]
        for t in cands:
            if feasible(p, t):
                mapping[p] = t
                used.add(t)
                yield from search(k + 1)
                used.discard(t)
                mapping[p] = -1

    yield from search(0)


def match_substructure(pattern: Molecule, target: Molecule) -> SubstructureMatch:
    """Whether ``pattern`` occurs in ``target`` and on how many distinct atom sets."""
    sets = {frozenset(m) for m in iter_matches(pattern, target)}
    return SubstructureMatch(bool(sets), len(sets))


def has_substructure(pattern: Molecule, target: Molecule) -> bool:
    return next(iter_matches(pattern, target), None) is not None
