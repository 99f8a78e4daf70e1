# Molecules, descriptors and rule features
#
# Everything here runs offline. We parse a SMILES string into a graph, look at
# the descriptors the rule language can reference, then turn a small rule file
# into a feature vector.

from molviews.chem import compute_descriptors, match_substructure, murcko_scaffold, parse_pattern, parse_smiles
from molviews.rules import apply_normalization, evaluate_rules, fit_normalization, parse_rules, ruleset_to_json

# Benzoic acid, written in Kekulé form. The parser perceives the ring as aromatic.

mol = parse_smiles("C1=CC=C(C=C1)C(=O)O")
print(len(mol.atoms), "heavy atoms,", len(mol.bonds), "bonds,", len(mol.rings), "ring")

for name, value in compute_descriptors(mol).items():
    print(f"  {name:24s} {value:g}")

# Substructure search returns every distinct atom set that matches.

hit = match_substructure(parse_pattern("C(=O)O"), mol)
print("carboxylic acid found:", hit.found, "matches:", hit.count)

# The Murcko scaffold strips side chains down to ring systems and linkers.

print("scaffold atoms:", len(murcko_scaffold(mol).atoms))

# A rule file mixes predicates (0/1) with numeric features. An `external`
# declaration names a value that must come from the dataset, such as a
# measured logP column.

RULES = """
# knowledge-style rules
rule small: molecular_weight < 500
rule donors: numeric hbd_count
rule acid: substructure("C(=O)O")
rule logp_window: 1 <= logp <= 3
external logp unit "log units"
"""

rules = parse_rules(RULES, task_id="demo")
print(rules.rule_ids)

features = evaluate_rules(rules, mol, {"logp": 1.87})
print("raw features:", features.values.tolist())

# Numeric columns are z-scored with statistics from the training molecules only.
# Predicates pass through unchanged.

train = ["CCO", "c1ccccc1O", "CC(=O)Nc1ccc(O)cc1", "OCC(O)CO"]
rows = [evaluate_rules(rules, parse_smiles(s), {"logp": 1.0}).values for s in train]
stats = fit_normalization(rules, rows)
print("normalized:", apply_normalization(stats, features).values.tolist())

# The compiled rule set can be exported for auditing.

print(ruleset_to_json(rules)["rules"][0])
