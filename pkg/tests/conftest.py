from pathlib import Path

import pytest

from combstate.spectral import CombParams, EnvelopeModel

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).resolve().parent / "golden"

_acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)


@pytest.fixture
def fig1_params():
    return CombParams(mu_ceo=0.3, mu_rep=1.0, sigma_ceo=0.05, sigma_rep=0.03, nu_c=5.0)


@pytest.fixture
def fig1_env():
    return EnvelopeModel(nu_c=5.0, bandwidth_B=2.0)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
