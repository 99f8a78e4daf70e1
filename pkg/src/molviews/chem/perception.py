"""Ring, hydrogen and aromaticity perception."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import replace

from molviews.chem.elements import DEFAULT_VALENCES
from molviews.chem.molecule import AROMATIC, DOUBLE, SINGLE, Bond, Molecule

log = logging.getLogger(__name__)


def perceive_rings(mol: Molecule) -> list[tuple[int, ...]]:
    """Minimum cycle basis, each ring as an ordered tuple of atom indices.

    Horton candidate cycles (shortest path from every root to both ends of
    every edge) are sorted by length and filtered for GF(2) independence.
    The basis size always equals ``bonds - atoms + components``.
    """
    n = len(mol.atoms)
    rank = len(mol.bonds) - n + len(mol.components)
    if rank == 0:
        return []

    edge_index = {}
    for k, b in enumerate(mol.bonds):
        edge_index[(b.begin, b.end)] = k
        edge_index[(b.end, b.begin)] = k

    candidates = {}
    for root in range(n):
        parent = {root: None}
        queue = deque([root])
        while queue:
            a = queue.popleft()
            for nb, _ in mol.neighbors[a]:
                if nb not in parent:
                    parent[nb] = a
                    queue.append(nb)

        def path(x):
            out = []
            while x is not None:
                out.append(x)
                x = parent[x]
            return out[::-1]

        for b in mol.bonds:
            if b.begin not in parent:
                continue
            px, py = path(b.begin), path(b.end)
            if len(px) + len(py) - 1 < 3:
                continue
            if set(px) & set(py) != {root}:
                continue
            cycle = _normalize_cycle(px + py[:0:-1])
            candidates.setdefault(cycle, None)

    ordered = sorted(candidates, key=lambda c: (len(c), c))
    basis_rows: dict[int, int] = {}  # pivot bit -> reduced vector
    rings = []
    for cycle in ordered:
        vec = 0
        for k, a in enumerate(cycle):
            vec ^= 1 << edge_index[(a, cycle[(k + 1) % len(cycle)])]
        while vec:
            pivot = vec.bit_length() - 1
            if pivot not in basis_rows:
                basis_rows[pivot] = vec
                rings.append(cycle)
                break
            vec ^= basis_rows[pivot]
        if len(rings) == rank:
            break
    return rings


def _normalize_cycle(cycle):
    k = cycle.index(min(cycle))
    rot = cycle[k:] + cycle[:k]
    if len(rot) > 2 and rot[-1] < rot[1]:
        rot = [rot[0]] + rot[:0:-1]
    return tuple(rot)


def demote_acyclic_aromatic_bonds(mol: Molecule) -> Molecule:
    """Aromatic bonds outside any ring become single bonds (e.g. biaryl links)."""
    if not any(b.order == AROMATIC for b in mol.bonds):
        return mol
    bonds = tuple(
        Bond(b.begin, b.end, SINGLE)
        if b.order == AROMATIC and not mol.in_ring_bond(b.begin, b.end)
        else b
        for b in mol.bonds
    )
    if bonds == mol.bonds:
        return mol
    return Molecule(mol.atoms, bonds, mol.source_smiles)


def _implicit_h(mol, i):
    atom = mol.atoms[i]
    if atom.bracket:
        return atom.explicit_h, False
    valences = DEFAULT_VALENCES.get(atom.element)
    if valences is None:
        return 0, False
    n_arom = 0
    used = 0.0
    for _, order in mol.neighbors[i]:
        if order == AROMATIC:
            n_arom += 1
            used += 1
        else:
            used += order
    if atom.aromatic and n_arom:
        # one extra pi bond per aromatic atom when the valence allows it
        # (pyridine n, benzene c); pyrrole-type o/s carry none
        for extra in (1, 0):
            target = next((v for v in valences if v >= used + extra), None)
            if target is not None:
                return int(target - used - extra), False
        return 0, True
    target = next((v for v in valences if v >= used), None)
    if target is None:
        return 0, True
    return int(target - used), False


def assign_implicit_hydrogens(mol: Molecule) -> Molecule:
    """Fill ``implicit_h`` from default valences; bracket atoms keep their count.

    An atom whose bonds exceed every allowed valence gets 0 hydrogens and
    ``valence_clamped=True``.
    """
    atoms = []
    clamped = []
    for i, atom in enumerate(mol.atoms):
        h, bad = _implicit_h(mol, i)
        if bad:
            clamped.append(i)
        atoms.append(replace(atom, implicit_h=h, valence_clamped=bad))
    if clamped:
        log.warning("valence exceeded on atoms %s of %r; implicit H clamped to 0",
                    clamped, mol.source_smiles)
    out = Molecule(tuple(atoms), mol.bonds, mol.source_smiles)
    out.__dict__.update({k: v for k, v in mol.__dict__.items() if k in _GRAPH_CACHE})
    return out


_GRAPH_CACHE = ("neighbors", "bond_lookup", "components", "rings", "ring_atoms", "ring_bonds")


def _alternates(orders):
    # each bond must be aromatic or match a strict 1/2 alternation in one phase
    for phase in (0, 1):
        ok = True
        for k, o in enumerate(orders):
            want = DOUBLE if (k + phase) % 2 else SINGLE
            if o != AROMATIC and o != want:
                ok = False
                break
        if ok:
            return True
    return False


def perceive_aromaticity(mol: Molecule) -> Molecule:
    """Flag Kekulé-written six-membered C/N rings with alternating bonds aromatic.

    Lowercase atoms are already aromatic. Rings are revisited until nothing
    changes, so a fused Kekulé system whose shared bond was converted in an
    earlier pass is picked up as well. Hydrogen counts are left as assigned.
    """
    rings = [r for r in mol.rings if len(r) == 6]
    if not rings:
        return mol
    atoms = list(mol.atoms)
    orders = {(min(b.begin, b.end), max(b.begin, b.end)): b.order for b in mol.bonds}
    changed = True
    touched = False
    while changed:
        changed = False
        for ring in rings:
            if any(atoms[a].element not in ("C", "N") for a in ring):
                continue
            keys = [(min(a, b), max(a, b)) for a, b in zip(ring, ring[1:] + ring[:1])]
            ring_orders = [orders[k] for k in keys]
            if all(o == AROMATIC for o in ring_orders) and all(atoms[a].aromatic for a in ring):
                continue
            if all(o == AROMATIC for o in ring_orders) or not _alternates(ring_orders):
                continue
            for k in keys:
                orders[k] = AROMATIC
            for a in ring:
                if not atoms[a].aromatic:
                    atoms[a] = replace(atoms[a], aromatic=True)
            changed = touched = True
    if not touched:
        return mol
    bonds = tuple(
        Bond(b.begin, b.end, orders[(min(b.begin, b.end), max(b.begin, b.end))]) for b in mol.bonds
    )
    out = Molecule(tuple(atoms), bonds, mol.source_smiles)
    # topology unchanged, ring basis still valid
    out.__dict__.update({k: v for k, v in mol.__dict__.items()
                         if k in ("components", "rings", "ring_atoms", "ring_bonds")})
    return out


def finalize(mol: Molecule) -> Molecule:
    """Graph straight from the parser -> fully perceived molecule."""
    mol = demote_acyclic_aromatic_bonds(mol)
    mol = assign_implicit_hydrogens(mol)
    return perceive_aromaticity(mol)
