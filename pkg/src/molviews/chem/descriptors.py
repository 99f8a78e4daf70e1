"""Whole-molecule descriptors consumed by the rule language."""

from __future__ import annotations

from collections.abc import Mapping

from molviews.chem.elements import HALOGENS, HYDROGEN_MASS, atomic_mass
from molviews.chem.molecule import AROMATIC, DOUBLE, SINGLE, Molecule

DESCRIPTOR_IDS = (
    "molecular_weight",
    "heavy_atom_count",
    "ring_count",
    "aromatic_ring_count",
    "hbd_count",
    "hba_count",
    "rotatable_bond_count",
    "halogen_count",
    "net_formal_charge",
)

DESCRIPTOR_UNITS = {"molecular_weight": "Da"}


class DescriptorSet(Mapping):
    """Read-only mapping of every descriptor id to a float."""

    def __init__(self, values):
        missing = set(DESCRIPTOR_IDS) - set(values)
        if missing:
            raise ValueError(f"missing descriptors: {sorted(missing)}")
        self._values = {k: float(values[k]) for k in DESCRIPTOR_IDS}

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def __repr__(self):
        return f"DescriptorSet({self._values!r})"


def molecular_weight(mol: Molecule) -> float:
    """Average molecular weight in Da (isotope-labelled atoms use isotope mass)."""
    total = 0.0
    for atom in mol.atoms:
        total += atomic_mass(atom.element, atom.isotope)
        total += atom.implicit_h * HYDROGEN_MASS
    return total


def aromatic_ring_count(mol: Molecule) -> int:
    n = 0
    for ring in mol.rings:
        if not all(mol.atoms[a].aromatic for a in ring):
            continue
        if all(mol.bond_order(a, b) == AROMATIC for a, b in zip(ring, ring[1:] + ring[:1])):
            n += 1
    return n


def _is_amide_cn(mol, c, n):
    if mol.atoms[c].element != "C" or mol.atoms[n].element != "N":
        return False
    return any(
        order == DOUBLE and mol.atoms[nb].element == "O" for nb, order in mol.neighbors[c]
    )


def rotatable_bond_count(mol: Molecule) -> int:
    """Single, non-ring bonds between heavy atoms of heavy degree >= 2; amide C-N excluded."""
    count = 0
    for b in mol.bonds:
        if b.order != SINGLE:
            continue
        i, j = b.begin, b.end
        if not (mol.atoms[i].is_heavy and mol.atoms[j].is_heavy):
            continue
        if mol.in_ring_bond(i, j):
            continue
        if mol.heavy_degree(i) < 2 or mol.heavy_degree(j) < 2:
            continue
        if _is_amide_cn(mol, i, j) or _is_amide_cn(mol, j, i):
            continue
        count += 1
    return count


def compute_descriptors(mol: Molecule) -> DescriptorSet:
    hbd = hba = 0
    for i, atom in enumerate(mol.atoms):
        if atom.element in ("N", "O"):
            hba += 1
            if mol.total_h(i) >= 1:
                hbd += 1
    return DescriptorSet({
        "molecular_weight": molecular_weight(mol),
        "heavy_atom_count": sum(1 for a in mol.atoms if a.is_heavy),
        "ring_count": len(mol.rings),
        "aromatic_ring_count": aromatic_ring_count(mol),
        "hbd_count": hbd,
        "hba_count": hba,
        "rotatable_bond_count": rotatable_bond_count(mol),
        "halogen_count": sum(1 for a in mol.atoms if a.element in HALOGENS),
        "net_formal_charge": sum(a.formal_charge for a in mol.atoms),
    })
