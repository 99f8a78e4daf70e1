import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molviews.chem import (
    EMPTY_MOLECULE,
    DESCRIPTOR_IDS,
    EmptyInput,
    MalformedBracketAtom,
    PatternTooLarge,
    UnbalancedBranch,
    UnclosedRingBond,
    UnknownElement,
    canonical_key,
    compute_descriptors,
    match_substructure,
    molecular_weight,
    murcko_scaffold,
    parse_pattern,
    parse_smiles,
)
from oracles import naive_substructure, networkx_substructure, random_smiles

BENZOIC = "C1=CC=C(C=C1)C(=O)O"


def desc(smiles):
    return compute_descriptors(parse_smiles(smiles))


# --- parsing ------------------------------------------------------------------


def test_methane_single_atom():
    m = parse_smiles("C")
    assert len(m.atoms) == 1 and not m.bonds
    assert m.atoms[0].implicit_h == 4


def test_benzoic_acid_graph():
    m = parse_smiles(BENZOIC)
    assert len(m.atoms) == 9
    assert len(m.bonds) == 9


@pytest.mark.parametrize("text, exc, offset", [
    ("C1CC", UnclosedRingBond, 1),
    ("", EmptyInput, 0),
    ("   ", EmptyInput, 0),
    ("CC(C", UnbalancedBranch, 2),
    ("CC)C", UnbalancedBranch, 2),
    ("C[Xx]", UnknownElement, 2),
    ("C[C", MalformedBracketAtom, 1),
])
def test_parse_errors_carry_offsets(text, exc, offset):
    with pytest.raises(exc) as info:
        parse_smiles(text)
    assert info.value.offset == offset


def test_stereo_markers_are_dropped():
    a = parse_smiles("F/C=C/F")
    b = parse_smiles("FC=CF")
    assert canonical_key(a) == canonical_key(b)
    assert canonical_key(parse_smiles("N[C@@H](C)C(=O)O")) == canonical_key(parse_smiles("NC(C)C(=O)O"))


def test_ring_closure_percent_form():
    assert canonical_key(parse_smiles("C%12CCCCC%12")) == canonical_key(parse_smiles("C1CCCCC1"))


def test_fragments_are_kept():
    m = parse_smiles("[NH4+].[Cl-]")
    assert len(m.components) == 2
    assert compute_descriptors(m)["net_formal_charge"] == 0


# --- hydrogens and weight -------------------------------------------------------


def test_implicit_hydrogens():
    assert parse_smiles("O").atoms[0].implicit_h == 2
    pyridine = parse_smiles("c1ccncc1")
    assert pyridine.atoms[3].element == "N" and pyridine.atoms[3].implicit_h == 0
    ammonium = parse_smiles("[NH4+]").atoms[0]
    assert ammonium.implicit_h == 4 and ammonium.formal_charge == 1


def test_overvalent_atom_is_clamped(caplog):
    m = parse_smiles("C(C)(C)(C)(C)C")
    assert m.atoms[0].implicit_h == 0
    assert m.atoms[0].valence_clamped


def test_molecular_weight_values():
    # atomic-weight sums by hand: C 12.011, H 1.008, O 15.999
    assert molecular_weight(parse_smiles("C")) == pytest.approx(12.011 + 4 * 1.008, abs=1e-3)
    assert molecular_weight(parse_smiles(BENZOIC)) == pytest.approx(7 * 12.011 + 6 * 1.008 + 2 * 15.999, abs=0.01)
    assert molecular_weight(parse_smiles("[13CH4]")) == pytest.approx(13.003 + 4 * 1.008, abs=0.01)


def test_weight_additive_over_fragments(corpus_smiles):
    for a, b in zip(corpus_smiles[:20], corpus_smiles[20:40]):
        joint = molecular_weight(parse_smiles(f"{a}.{b}"))
        assert joint == pytest.approx(molecular_weight(parse_smiles(a)) + molecular_weight(parse_smiles(b)), abs=1e-9)


def test_weight_permutation_invariant(corpus_mols):
    rng = np.random.default_rng(3)
    for m in corpus_mols:
        perm = [int(i) for i in rng.permutation(len(m.atoms))]
        assert molecular_weight(m.permuted(perm)) == pytest.approx(molecular_weight(m), abs=1e-9)


# --- rings and aromaticity --------------------------------------------------------


def test_ring_examples():
    assert parse_smiles("CCO").rings == ()
    assert [len(r) for r in parse_smiles("c1ccccc1").rings] == [6]
    assert len(parse_smiles("c1ccc2ccccc2c1").rings) == 2


def test_ring_count_is_cycle_rank(corpus_mols):
    for m in corpus_mols:
        assert len(m.rings) == len(m.bonds) - len(m.atoms) + len(m.components)


def test_aromatic_ring_counts():
    assert desc(BENZOIC)["aromatic_ring_count"] == 1
    assert desc("C1CCCCC1")["aromatic_ring_count"] == 0
    assert desc("c1ccccc1")["aromatic_ring_count"] == 1
    assert desc("c1ccc2ccccc2c1")["aromatic_ring_count"] == 2


# --- descriptors ------------------------------------------------------------------


def test_descriptor_examples():
    d = desc(BENZOIC)
    assert (d["hbd_count"], d["hba_count"]) == (1, 2)
    d = desc("CCO")
    assert (d["hbd_count"], d["hba_count"], d["rotatable_bond_count"]) == (1, 1, 0)
    assert desc("O=O")["hbd_count"] == 0


def test_amide_bond_is_not_rotatable():
    # CC-C(=O) and N-CC count; the amide C-N does not, while the ester C-O does
    assert desc("CCC(=O)NCC")["rotatable_bond_count"] == 2
    assert desc("CCC(=O)OCC")["rotatable_bond_count"] == 3


def test_descriptor_set_complete(corpus_mols):
    for m in corpus_mols:
        d = compute_descriptors(m)
        assert list(d) == list(DESCRIPTOR_IDS)
        for k in DESCRIPTOR_IDS:
            if k not in ("molecular_weight", "net_formal_charge"):
                assert d[k] >= 0 and float(d[k]).is_integer()


# --- substructure -------------------------------------------------------------------


def test_substructure_examples():
    target = parse_smiles(BENZOIC)
    assert match_substructure(parse_pattern("c1ccccc1"), target).found
    assert match_substructure(parse_pattern("C=O"), target).found
    assert not match_substructure(parse_pattern("c1ccccc1"), parse_smiles("CCO")).found


def test_match_count_is_distinct_atom_sets():
    # six automorphic embeddings of the ring collapse to one atom set
    assert match_substructure(parse_pattern("c1ccccc1"), parse_smiles("c1ccccc1")).count == 1
    assert match_substructure(parse_pattern("CC"), parse_smiles("CCC")).count == 2


def test_pattern_too_large():
    with pytest.raises(PatternTooLarge):
        parse_pattern("C" * 33)
    parse_pattern("C" * 32)


def test_substructure_agrees_with_naive_enumeration(corpus_mols):
    patterns = [m for m in corpus_mols if len(m.atoms) <= 10]
    targets = [m for m in corpus_mols if len(m.atoms) <= 14]
    for p in patterns:
        for t in targets:
            assert tuple(match_substructure(p, t)) == naive_substructure(p, t)


def test_substructure_agrees_with_networkx(corpus_mols):
    pytest.importorskip("networkx")
    patterns = [m for m in corpus_mols if len(m.atoms) <= 6]
    for p in patterns:
        for t in corpus_mols:
            assert tuple(match_substructure(p, t)) == networkx_substructure(p, t)


# --- scaffolds and keys ---------------------------------------------------------------


def test_scaffold_examples():
    assert len(murcko_scaffold(parse_smiles(BENZOIC)).atoms) == 6
    assert murcko_scaffold(parse_smiles("CCO")) == EMPTY_MOLECULE
    assert len(murcko_scaffold(parse_smiles("c1ccccc1CCc1ccccc1")).atoms) == 14


def test_scaffold_keeps_exocyclic_double_bond():
    scaffold = murcko_scaffold(parse_smiles("CCC1CCC(=O)CC1"))
    assert sorted(a.element for a in scaffold.atoms) == ["C"] * 6 + ["O"]


def test_scaffold_idempotent(corpus_mols):
    for m in corpus_mols:
        s = murcko_scaffold(m)
        assert canonical_key(murcko_scaffold(s)) == canonical_key(s)


def test_key_examples():
    assert canonical_key(parse_smiles("c1ccccc1")) == canonical_key(parse_smiles("c1ccccc1"))
    assert canonical_key(parse_smiles("OCC")) == canonical_key(parse_smiles("CCO"))
    assert canonical_key(parse_smiles("CCO")) != canonical_key(parse_smiles("CCN"))


def test_key_distinguishes_isomers():
    assert canonical_key(parse_smiles("Cc1ccccc1C")) != canonical_key(parse_smiles("Cc1cccc(C)c1"))
    assert canonical_key(parse_smiles("C1CCCCC1")) != canonical_key(parse_smiles("C1CCC1CC"))


def test_key_stable_across_reparses(corpus_mols):
    rng = np.random.default_rng(7)
    for m in corpus_mols:
        key = canonical_key(m)
        for _ in range(100):
            assert canonical_key(parse_smiles(random_smiles(m, rng))) == key


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 99), st.integers(0, 2**32 - 1))
def test_key_invariant_under_atom_permutation(corpus_mols, idx, seed):
    m = corpus_mols[idx % len(corpus_mols)]
    perm = [int(i) for i in np.random.default_rng(seed).permutation(len(m.atoms))]
    assert canonical_key(m.permuted(perm)) == canonical_key(m)
