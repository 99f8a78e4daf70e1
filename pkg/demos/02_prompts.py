# Prompt text for the three views
#
# The embedding views are built from prompts. This script prints what would be
# sent to a language model for one molecule, plus the two prompts used to ask
# a model for rules.

from molviews.rules import build_data_rule_prompt, build_scientific_rule_prompt, sample_data_subsets
from molviews.views import BBBP_TASK_QUESTION, build_structure_prompts, build_task_prompt

smiles = "C1=CC=C(C=C1)C(=O)O"

# Three structure questions, each followed by the SMILES string. Their
# embeddings are concatenated into the structure view.

for text in build_structure_prompts(smiles):
    print(text)
    print("---")

# One task prompt. The default wrapper uses the SMILES tags Galactica was trained on.

print(build_task_prompt(smiles, BBBP_TASK_QUESTION))
print("---")
print(build_task_prompt(smiles, BBBP_TASK_QUESTION, "plain"))
print("---")

# Rule generation, from background knowledge:

print(build_scientific_rule_prompt("predict if a molecule can penetrate the blood-brain barrier", 20))
print("---")

# and from labelled examples. Subsets are sampled with a fixed seed so the
# prompts can be regenerated exactly.

data = [("CCO", 1), ("c1ccccc1", 1), ("OC(=O)CC(O)(CC(=O)O)C(=O)O", 0), ("CN1CCC[C@H]1c1cccnc1", 1),
        ("NCCCC[C@H](N)C(=O)O", 0), ("Clc1ccc(Cl)cc1", 1)]
for subset in sample_data_subsets(data, k=2, m=3, seed=7):
    print(build_data_rule_prompt(subset, "BBBP", 3))
    print("---")
