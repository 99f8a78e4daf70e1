"""Molecular graph types."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

# bond orders are floats so valence sums work directly; aromatic is 1.5
SINGLE = 1.0
DOUBLE = 2.0
TRIPLE = 3.0
AROMATIC = 1.5
BOND_ORDERS = (SINGLE, DOUBLE, TRIPLE, AROMATIC)


@dataclass(frozen=True)
class Atom:
    element: str
    aromatic: bool = False
    formal_charge: int = 0
    isotope: Optional[int] = None
    explicit_h: Optional[int] = None  # set only for bracket atoms
    implicit_h: int = 0
    valence_clamped: bool = field(default=False, compare=False)

    @property
    def bracket(self) -> bool:
        return self.explicit_h is not None

    @property
    def is_heavy(self) -> bool:
        return self.element != "H"


class Bond(NamedTuple):
    begin: int
    end: int
    order: float


@dataclass(frozen=True)
class Molecule:
    """Immutable molecular graph.

    Atom order follows the order atoms were written in the source SMILES.
    Derived structure (adjacency, rings, components) is computed lazily.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    source_smiles: str = ""

    def __post_init__(self):
        n = len(self.atoms)
        seen = set()
        for b in self.bonds:
            if not (0 <= b.begin < n and 0 <= b.end < n):
                raise ValueError(f"bond {b} references a missing atom")
            if b.begin == b.end:
                raise ValueError(f"self-loop on atom {b.begin}")
            key = (min(b.begin, b.end), max(b.begin, b.end))
            if key in seen:
                raise ValueError(f"duplicate bond between atoms {key}")
            if b.order not in BOND_ORDERS:
                raise ValueError(f"unsupported bond order {b.order}")
            seen.add(key)

    def __len__(self):
        return len(self.atoms)

    @property
    def is_empty(self) -> bool:
        return not self.atoms

    @cached_property
    def neighbors(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        """Per atom: ``(neighbor_index, bond_order)`` pairs in bond order."""
        adj: list[list[tuple[int, float]]] = [[] for _ in self.atoms]
        for b in self.bonds:
            adj[b.begin].append((b.end, b.order))
            adj[b.end].append((b.begin, b.order))
        return tuple(tuple(a) for a in adj)

    @cached_property
    def bond_lookup(self) -> dict[tuple[int, int], float]:
        out = {}
        for b in self.bonds:
            out[(b.begin, b.end)] = b.order
            out[(b.end, b.begin)] = b.order
        return out

    def bond_order(self, i: int, j: int) -> Optional[float]:
        return self.bond_lookup.get((i, j))

    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        seen = [False] * len(self.atoms)
        comps = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                a = stack.pop()
                comp.append(a)
                for nb, _ in self.neighbors[a]:
                    if not seen[nb]:
                        seen[nb] = True
                        stack.append(nb)
            comps.append(tuple(sorted(comp)))
        return tuple(comps)

    @cached_property
    def rings(self) -> tuple[tuple[int, ...], ...]:
        from molviews.chem.perception import perceive_rings

        return tuple(perceive_rings(self))

    @cached_property
    def ring_atoms(self) -> frozenset[int]:
        return frozenset(a for ring in self.rings for a in ring)

    @cached_property
    def ring_bonds(self) -> frozenset[tuple[int, int]]:
        out = set()
        for ring in self.rings:
            for k, a in enumerate(ring):
                b = ring[(k + 1) % len(ring)]
                out.add((min(a, b), max(a, b)))
        return frozenset(out)

    def in_ring_bond(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.ring_bonds

    def total_h(self, i: int) -> int:
        """Hydrogens on atom ``i``: implicit/bracket counts plus explicit H atoms."""
        atom = self.atoms[i]
        n = atom.implicit_h
        for nb, _ in self.neighbors[i]:
            if self.atoms[nb].element == "H":
                n += 1
        return n

    def heavy_degree(self, i: int) -> int:
        return sum(1 for nb, _ in self.neighbors[i] if self.atoms[nb].is_heavy)

    def subgraph(self, keep) -> "Molecule":
        """Induced subgraph on the atom indices in ``keep`` (original order kept).

        Hydrogen counts are not recomputed here.
        """
        keep = sorted(set(keep))
        remap = {old: new for new, old in enumerate(keep)}
        atoms = tuple(self.atoms[i] for i in keep)
        bonds = tuple(
            Bond(remap[b.begin], remap[b.end], b.order)
            for b in self.bonds
            if b.begin in remap and b.end in remap
        )
        return Molecule(atoms, bonds, self.source_smiles)

    def permuted(self, order) -> "Molecule":
        """Return the same graph with atoms listed in ``order`` (a permutation)."""
        order = list(order)
        if sorted(order) != list(range(len(self.atoms))):
            raise ValueError("order must be a permutation of atom indices")
        remap = {old: new for new, old in enumerate(order)}
        atoms = tuple(self.atoms[i] for i in order)
        bonds = tuple(Bond(remap[b.begin], remap[b.end], b.order) for b in self.bonds)
        return Molecule(atoms, bonds, self.source_smiles)


EMPTY_MOLECULE = Molecule((), (), "")
