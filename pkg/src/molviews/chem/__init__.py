"""SMILES parsing, descriptors, substructure search and scaffolds."""

from molviews.chem.descriptors import (
    DESCRIPTOR_IDS,
    DescriptorSet,
    compute_descriptors,
    molecular_weight,
)
from molviews.chem.molecule import AROMATIC, DOUBLE, EMPTY_MOLECULE, SINGLE, TRIPLE, Atom, Bond, Molecule
from molviews.chem.perception import (
    assign_implicit_hydrogens,
    perceive_aromaticity,
    perceive_rings,
)
from molviews.chem.scaffold import canonical_key, murcko_scaffold
from molviews.chem.smiles import (
    EmptyInput,
    MalformedBracketAtom,
    SmilesError,
    SmilesSyntaxError,
    UnbalancedBranch,
    UnclosedRingBond,
    UnknownElement,
    parse_smiles,
)
from molviews.chem.substructure import (
    PatternTooLarge,
    SubstructureMatch,
    match_substructure,
    parse_pattern,
)

__all__ = [
    "AROMATIC", "DOUBLE", "SINGLE", "TRIPLE", "EMPTY_MOLECULE",
    "Atom", "Bond", "Molecule", "DescriptorSet", "DESCRIPTOR_IDS",
    "parse_smiles", "assign_implicit_hydrogens", "perceive_rings", "perceive_aromaticity",
    "molecular_weight", "compute_descriptors", "match_substructure", "parse_pattern",
    "murcko_scaffold", "canonical_key", "SubstructureMatch",
    "SmilesError", "EmptyInput", "UnbalancedBranch", "UnclosedRingBond", "UnknownElement",
    "MalformedBracketAtom", "SmilesSyntaxError", "PatternTooLarge",
]
