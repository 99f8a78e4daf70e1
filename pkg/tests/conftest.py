import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import corpus  # noqa: E402


@pytest.fixture(scope="session")
def corpus_smiles():
    return corpus()


@pytest.fixture(scope="session")
def corpus_mols(corpus_smiles):
    from molviews.chem import parse_smiles

    return [parse_smiles(s) for s in corpus_smiles]


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = sorted(getattr(module, "LINES", []), key=lambda l: int(l.split()[2].rstrip(":")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
