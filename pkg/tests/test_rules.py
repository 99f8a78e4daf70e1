import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molviews.chem import DESCRIPTOR_IDS, parse_smiles
from molviews.rules import (
    BadPattern,
    DuplicateRuleId,
    ExternalDescriptor,
    MissingExternal,
    NonFiniteResult,
    Rule,
    RuleSet,
    RuleSyntaxError,
    StatsMismatch,
    SubsetTooLarge,
    UnknownDescriptor,
    apply_normalization,
    build_data_rule_prompt,
    build_scientific_rule_prompt,
    evaluate_rules,
    fit_normalization,
    invert_normalization,
    parse_rules,
    ruleset_to_json,
    sample_data_subsets,
    serialize_rules,
)
from molviews.rules.dsl import BinOp, BoolOp, Compare, Neg, Not, Num, Substructure, Var

BENZOIC = "C1=CC=C(C=C1)C(=O)O"
GOLDEN = Path(__file__).parent / "golden"


# --- prompts -------------------------------------------------------------------------


def test_scientific_prompt():
    text = build_scientific_rule_prompt("predict if a molecule can penetrate the blood-brain barrier", 20)
    assert "20 rules" in text
    assert text.startswith("Assume you are an experienced Chemist.")


def test_rule_prompts_match_golden():
    sci = build_scientific_rule_prompt("predict if a molecule can penetrate the blood-brain barrier", 20)
    assert sci == (GOLDEN / "rules_scientific_bbbp.txt").read_text(encoding="utf-8")
    data = build_data_rule_prompt([("CCO", 1)], "BBBP", 3)
    assert data.split("\n")[0] == (GOLDEN / "rules_data_bbbp_persona.txt").read_text(encoding="utf-8")


def test_scientific_prompt_singular():
    text = build_scientific_rule_prompt("predict solubility", 1)
    assert "1 rule " in text and "1 rules" not in text


def test_scientific_prompt_needs_task():
    with pytest.raises(ValueError):
        build_scientific_rule_prompt("", 20)


def test_data_prompt_lines():
    text = build_data_rule_prompt([("CCO", 1), ("c1ccccc1", 0)], "BBBP", 3)
    head, *lines = text.split("\n")
    assert "with label 1, it means" in head and "With label 0, it means" in head
    assert "3 rules" in head
    assert lines == ["CCO 1", "c1ccccc1 0"]
    assert build_data_rule_prompt([("C", 0)], "BBBP").count("\n") == 1


def test_subset_sampling():
    data = [(f"C{'C' * i}", i % 2) for i in range(10)]
    a = sample_data_subsets(data, k=2, m=3, seed=7)
    assert a == sample_data_subsets(data, k=2, m=3, seed=7)
    assert len(a) == 2 and all(len(s) == 3 and len(set(s)) == 3 for s in a)
    full = sample_data_subsets(data, k=1, m=10, seed=0)[0]
    assert sorted(full) == sorted(data)
    with pytest.raises(SubsetTooLarge):
        sample_data_subsets(data[:5], k=1, m=6)


# --- parsing ---------------------------------------------------------------------------


def test_parse_examples():
    rs = parse_rules("rule mw_lt_500: molecular_weight < 500\nrule hbd: numeric hbd_count\n")
    assert [r.kind for r in rs.rules] == ["predicate", "numeric"]
    with pytest.raises(UnknownDescriptor) as info:
        parse_rules("rule bad: foo < 1")
    assert info.value.name == "foo"


def test_parse_errors():
    with pytest.raises(DuplicateRuleId):
        parse_rules("rule a: hbd_count > 1\nrule a: hba_count > 1")
    with pytest.raises(BadPattern):
        parse_rules('rule a: substructure("C1CC")')
    with pytest.raises(RuleSyntaxError) as info:
        parse_rules("# header\nrule a: hbd_count >")
    assert info.value.line == 2
    with pytest.raises(RuleSyntaxError):
        parse_rules("rule a: hbd_count + 1")  # predicate must be boolean


def test_external_declarations_and_comments():
    rs = parse_rules('# comment\nrule logp_window: 1 <= logp <= 3\nexternal logp unit "log units"\n')
    assert rs.external_ids == ("logp",)
    assert rs.external_descriptor_declarations == (ExternalDescriptor("logp", "log units"),)


def test_provenance_switch():
    rs = parse_rules("rule a: hbd_count > 0\nprovenance data_pattern\nrule b: hba_count > 0")
    assert [r.provenance for r in rs.rules] == ["scientific", "data_pattern"]


def test_json_export():
    rs = parse_rules('rule has_benzene: substructure("c1ccccc1")\nrule n: numeric substructure_count("O")')
    doc = ruleset_to_json(rs)
    json.dumps(doc)
    assert doc["rules"][0]["expression"] == {"type": "substructure", "pattern": "c1ccccc1"}
    assert doc["rules"][1]["kind"] == "numeric"


# --- round trip (property) ---------------------------------------------------------------------

NUMERIC_IDS = [d for d in DESCRIPTOR_IDS]
PATTERNS = ["c1ccccc1", "C=O", "O", "N", "CC", "C#N", "Cl"]


def numeric_exprs():
    leaves = st.one_of(
        st.builds(Num, st.integers(0, 1000).map(float) | st.floats(0, 1e4, allow_nan=False).map(lambda x: round(x, 3))),
        st.builds(Var, st.sampled_from(NUMERIC_IDS)),
        st.builds(Var, st.just("logp"), st.just(True)),
        st.builds(Substructure, st.sampled_from(PATTERNS), st.just(True)),
    )
    return st.recursive(leaves, lambda inner: st.one_of(
        st.builds(BinOp, st.sampled_from("+-*/"), inner, inner),
        st.builds(Neg, inner),
    ), max_leaves=6)


def bool_exprs():
    cmp_ = st.integers(1, 3).flatmap(lambda k: st.builds(
        Compare,
        st.lists(st.sampled_from(["<", "<=", ">", ">=", "=="]), min_size=k, max_size=k).map(tuple),
        st.lists(numeric_exprs(), min_size=k + 1, max_size=k + 1).map(tuple),
    ))
    leaves = st.one_of(cmp_, st.builds(Substructure, st.sampled_from(PATTERNS)))
    return st.recursive(leaves, lambda inner: st.one_of(
        st.builds(BoolOp, st.sampled_from(["and", "or"]), st.lists(inner, min_size=2, max_size=3).map(tuple)),
        st.builds(Not, inner),
    ), max_leaves=5)


@st.composite
def rulesets(draw):
    n = draw(st.integers(0, 5))
    rules = []
    for i in range(n):
        numeric = draw(st.booleans())
        expr = draw(numeric_exprs() if numeric else bool_exprs())
        prov = draw(st.sampled_from(["scientific", "data_pattern"]))
        rules.append(Rule(f"r{i}", "numeric" if numeric else "predicate", expr, prov))
    return RuleSet("task", tuple(rules), (ExternalDescriptor("logp", "log units"),))


@settings(max_examples=200, deadline=None)
@given(rulesets())
def test_serialize_round_trip(rs):
    assert parse_rules(serialize_rules(rs), task_id="task") == rs


# --- evaluation --------------------------------------------------------------------------------


def test_evaluate_examples():
    rs = parse_rules("rule mw: molecular_weight < 500\nrule ar: aromatic_ring_count >= 1\nrule hbd: numeric hbd_count")
    assert list(evaluate_rules(rs, parse_smiles(BENZOIC)).values) == [1.0, 1.0, 1.0]
    chain = parse_smiles("C" * 60)
    assert evaluate_rules(parse_rules("rule mw: molecular_weight < 500"), chain).values[0] == 0.0
    assert len(evaluate_rules(parse_rules(""), chain)) == 0


def test_missing_external_names_rule():
    rs = parse_rules('external logp unit "log units"\nrule a: hbd_count > 0\nrule lw: 1 <= logp <= 3')
    with pytest.raises(MissingExternal) as info:
        evaluate_rules(rs, parse_smiles("CCO"))
    assert info.value.name == "logp" and info.value.rule_id == "lw"
    assert list(evaluate_rules(rs, parse_smiles("CCO"), {"logp": 2.0}).values) == [1.0, 1.0]


def test_non_finite_result():
    rs = parse_rules("rule r: numeric hbd_count / ring_count")
    with pytest.raises(NonFiniteResult):
        evaluate_rules(rs, parse_smiles("CCO"))


def test_predicates_are_exactly_binary(corpus_mols):
    rs = parse_rules(
        'rule a: substructure("c1ccccc1")\nrule b: molecular_weight < 200 and hbd_count >= 1\n'
        'rule c: not ring_count == 0\nrule d: halogen_count > 0 or hba_count > 2'
    )
    for m in corpus_mols:
        v = evaluate_rules(rs, m).values
        assert set(v) <= {0.0, 1.0}
        assert len(v) == len(rs)


def test_evaluation_permutation_invariant(corpus_mols):
    rs = parse_rules('rule a: numeric substructure_count("CC")\nrule b: numeric molecular_weight\n'
                     'rule c: numeric rotatable_bond_count')
    rng = np.random.default_rng(1)
    for m in corpus_mols:
        perm = [int(i) for i in rng.permutation(len(m.atoms))]
        np.testing.assert_allclose(evaluate_rules(rs, m.permuted(perm)).values, evaluate_rules(rs, m).values,
                                   rtol=0, atol=1e-9)


# --- normalization -------------------------------------------------------------------------------


NORM_RULES = parse_rules("rule p: hbd_count > 0\nrule x: numeric hbd_count\nrule c: numeric net_formal_charge")


def test_normalization_examples():
    stats = fit_normalization(NORM_RULES, [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
    assert stats.mean == (1.0, 0.0) and stats.std == (1.0, 0.0)
    out = [apply_normalization(stats, v).values for v in ([1.0, 0.0, 0.0], [0.0, 2.0, 0.0])]
    assert [list(o) for o in out] == [[1.0, -1.0, 0.0], [0.0, 1.0, 0.0]]
    assert fit_normalization(parse_rules("rule p: hbd_count > 0"), [[1.0]]).columns == ()


def test_normalization_round_trip():
    rng = np.random.default_rng(0)
    train = rng.normal(size=(30, 3))
    train[:, 0] = rng.integers(0, 2, 30)
    stats = fit_normalization(NORM_RULES, train)
    for row in rng.normal(size=(20, 3)):
        z = apply_normalization(stats, row)
        assert z.normalization_applied
        np.testing.assert_allclose(invert_normalization(stats, z).values, row, rtol=0, atol=1e-12)
    with pytest.raises(StatsMismatch):
        apply_normalization(stats, apply_normalization(stats, train[0]))
    with pytest.raises(StatsMismatch):
        apply_normalization(stats, [1.0, 2.0])


def test_normalization_uses_only_rows_given():
    """Leakage detector: adding test rows must change the statistics."""
    rng = np.random.default_rng(4)
    train = rng.normal(size=(40, 3))
    test = rng.normal(loc=3.0, size=(10, 3))
    honest = fit_normalization(NORM_RULES, train)
    leaky = fit_normalization(NORM_RULES, np.vstack([train, test]))
    assert honest != leaky
    moved = [not np.allclose(apply_normalization(honest, r).values, apply_normalization(leaky, r).values)
             for r in train]
    assert all(moved)
    assert fit_normalization(NORM_RULES, train) == honest
