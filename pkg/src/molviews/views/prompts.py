"""Structure-view and task-view prompt templates."""

from __future__ import annotations

from dataclasses import dataclass

STRUCTURE_QUESTIONS = (
    "How does the molecule’s 3D shape change in different environments, "
    "and what are the effects of these changes?",
    "What are the key intermolecular forces that govern the behavior of this "
    "molecule in various contexts?",
    "How does the molecule contribute to the overall chemical equilibrium in "
    "its different environments?",
)

BBBP_TASK_QUESTION = "Will the chemical compound penetrate the blood-brain barrier?"

WRAPPER_STYLES = ("galactica_smiles_tags", "plain")


@dataclass(frozen=True)
class PromptTemplate:
    view: str
    slots: tuple[str, ...]
    text: str

    def render(self, **values) -> str:
        missing = [s for s in self.slots if s not in values]
        if missing:
            raise KeyError(f"unfilled slots: {missing}")
        out = self.text.format(**{s: values[s] for s in self.slots})
        if not out.strip():
            raise ValueError("rendered prompt is empty")
        return out


STRUCTURE_TEMPLATE = PromptTemplate("structure", ("question", "smiles"), "{question}\n{smiles}")
TASK_TEMPLATES = {
    "galactica_smiles_tags": PromptTemplate(
        "task",
        ("smiles", "question"),
        "Here is a SMILES formula: [START_I_SMILES]{smiles}[END_I_SMILES]\n\nQuestion: {question}",
    ),
    "plain": PromptTemplate(
        "task", ("smiles", "question"), "Here is a SMILES formula: {smiles}\n\nQuestion: {question}"
    ),
}


def build_structure_prompts(smiles: str, questions=STRUCTURE_QUESTIONS) -> list[str]:
    """One prompt per insight question, each question followed by the SMILES."""
    smiles = (smiles or "").strip()
    if not smiles:
        raise ValueError("smiles must be non-empty")
    return [STRUCTURE_TEMPLATE.render(question=q, smiles=smiles) for q in questions]


def build_task_prompt(smiles: str, task_question: str, wrapper_style: str = "galactica_smiles_tags") -> str:
    smiles = (smiles or "").strip()
    task_question = (task_question or "").strip()
    if not smiles or not task_question:
        raise ValueError("smiles and task_question must be non-empty")
    if wrapper_style not in TASK_TEMPLATES:
        raise ValueError(f"wrapper_style must be one of {WRAPPER_STYLES}")
    return TASK_TEMPLATES[wrapper_style].render(smiles=smiles, question=task_question)
