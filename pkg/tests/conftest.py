import numpy as np
import pytest

from skinpulse.synth import SynthSpec, generate

NOISE = 1.0 / 255.0


@pytest.fixture(scope="session")
def static_synth():
    spec = SynthSpec(noise_std=NOISE)
    return spec, generate(spec, seed=0)


@pytest.fixture(scope="session")
def moving_synth():
    spec = SynthSpec(noise_std=NOISE, motion=(1.0, 0.0))
    return spec, generate(spec, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def record(request):
    """Log one PASS/FAIL line for an acceptance criterion, then assert it."""

    def _record(label: str, ok: bool, detail: str):
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'} ({detail})"
        _ACCEPTANCE[label] = line
        print(line)
        assert ok, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for label in sorted(_ACCEPTANCE, key=lambda s: (int(s.rstrip("ab")), s)):
            terminalreporter.write_line(_ACCEPTANCE[label])
