"""Bemis-Murcko scaffolds and order-independent graph keys."""

from __future__ import annotations

from molviews.chem.molecule import DOUBLE, EMPTY_MOLECULE, Molecule
from molviews.chem.perception import assign_implicit_hydrogens

# trial-ranking leaves explored before the search stops branching
MAX_CANON_LEAVES = 4096


def murcko_scaffold(mol: Molecule) -> Molecule:
    """Ring systems plus linkers; side chains pruned to a fixpoint.

    Non-ring heavy atoms of degree <= 1 are deleted repeatedly. Atoms
    double-bonded to a surviving atom (ring C=O, exocyclic C=C) are then
    added back. Acyclic input gives ``EMPTY_MOLECULE``.
    """
    if not mol.rings:
        return EMPTY_MOLECULE
    alive = {i for i, a in enumerate(mol.atoms) if a.is_heavy}
    deg = {i: sum(1 for nb, _ in mol.neighbors[i] if nb in alive) for i in alive}
    ring = mol.ring_atoms
    stack = [i for i in alive if deg[i] <= 1 and i not in ring]
    while stack:
        i = stack.pop()
        if i not in alive:
            continue
        alive.discard(i)
        for nb, _ in mol.neighbors[i]:
            if nb in alive:
                deg[nb] -= 1
                if deg[nb] <= 1 and nb not in ring:
                    stack.append(nb)
    extras = {
        nb
        for i in alive
        for nb, order in mol.neighbors[i]
        if order == DOUBLE and nb not in alive and mol.atoms[nb].is_heavy
    }
    return assign_implicit_hydrogens(mol.subgraph(alive | extras))


def _dense_rank(keys):
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def _refine(mol, ranks):
    n_classes = len(set(ranks))
    while True:
        keys = [
            (ranks[i], tuple(sorted((ranks[nb], order) for nb, order in mol.neighbors[i])))
            for i in range(len(ranks))
        ]
        ranks = _dense_rank(keys)
        count = len(set(ranks))
        if count == n_classes:
            return ranks
        n_classes = count


def _atom_label(atom):
    label = atom.element.lower() if atom.aromatic else atom.element
    if atom.formal_charge:
        label += f"{atom.formal_charge:+d}"
    if atom.isotope is not None:
        label = f"{atom.isotope}{label}"
    return label


def _encode(mol, ranks, labels):
    by_rank = sorted(range(len(ranks)), key=lambda i: ranks[i])
    edges = sorted(
        (min(ranks[b.begin], ranks[b.end]), max(ranks[b.begin], ranks[b.end]), b.order)
        for b in mol.bonds
    )
    edge_txt = ",".join(f"{a}-{b}:{'a' if o == 1.5 else int(o)}" for a, b, o in edges)
    return ".".join(labels[i] for i in by_rank) + "|" + edge_txt


def canonical_key(mol: Molecule) -> str:
    """String identical for isomorphic graphs (elements, charges, bonds, aromaticity).

    Colour refinement from atom invariants, then exhaustive trial
    individualization of the first tied class; the lexicographically smallest
    encoding wins. Hydrogen counts are not part of the key.
    """
    n = len(mol.atoms)
    if n == 0:
        return ""
    labels = [_atom_label(a) for a in mol.atoms]
    init = [(labels[i], len(mol.neighbors[i])) for i in range(n)]
    ranks = _refine(mol, _dense_rank(init))

    best = [None]
    leaves = [0]

    def search(ranks):
        if len(set(ranks)) == n:
            leaves[0] += 1
            code = _encode(mol, ranks, labels)
            if best[0] is None or code < best[0]:
                best[0] = code
            return
        counts = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        target = min(r for r, c in counts.items() if c > 1)
        members = [i for i in range(n) if ranks[i] == target]
        for m in members:
            if leaves[0] >= MAX_CANON_LEAVES and best[0] is not None:
                return
            trial = [(r, 0 if i == m else 1) if r == target else (r, 0) for i, r in enumerate(ranks)]
            search(_refine(mol, _dense_rank(trial)))

    search(ranks)
    return best[0]
