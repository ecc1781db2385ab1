import numpy as np
import pytest

from agflow.dataio import SyntheticSpec, center, generate_synthetic


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line straight to the terminal, then assert."""

    def _report(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, f"{name}: {detail}"

    return _report


def synth_matrix(n, d, spectrum=None, seed=0):
    if spectrum is None:
        spectrum = np.linspace(5.0, 0.5, d)
    return center(generate_synthetic(SyntheticSpec(n, d, tuple(spectrum), seed=seed))).values


@pytest.fixture
def small_X():
    return synth_matrix(30, 8, seed=3)
