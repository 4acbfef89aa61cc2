import os
import sys
from pathlib import Path

import pytest


# Make `import becprobe` work in a src-layout checkout without requiring an install.
_ROOT = Path(__file__).resolve().parents[1]
_SRC = _ROOT / "src"
if str(_SRC) not in sys.path:
    sys.path.insert(0, str(_SRC))


def pytest_collection_modifyitems(config, items) -> None:
    if os.getenv("BECPROBE_RUN_SLOW", "").lower() in {"1", "true", "yes"}:
        return
    skip = pytest.mark.skip(reason="slow reproduction check; set BECPROBE_RUN_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture()
def becprobe_tmp_root(tmp_path, monkeypatch):
    import becprobe

    monkeypatch.setattr(becprobe.BECPROBE_CONFIG, "base_root", tmp_path)
    monkeypatch.setattr(becprobe.BECPROBE_CONFIG, "record_git", "ignore")
    monkeypatch.setattr(becprobe.BECPROBE_CONFIG, "allow_no_git_origin", False)
    monkeypatch.setattr(becprobe.BECPROBE_CONFIG, "threads", 2)
    return tmp_path


@pytest.fixture()
def small_trap():
    from becprobe.condensate import GridConfig, TrapConfig

    return TrapConfig(grid=GridConfig(n_points=256, half_width=10.0))


@pytest.fixture()
def ideal_trap():
    from becprobe.condensate import GridConfig, TrapConfig

    return TrapConfig(interaction=0.0, grid=GridConfig(n_points=256, half_width=10.0))


@pytest.fixture()
def single_mode():
    """Factory for one probed oscillator with an ideal detector and kappa_tilde = kappa2_bar / omega."""
    import numpy as np

    from becprobe.probe import Generators, drift_matrix

    def build(kappa_tilde: float, omega: float = 1.0, epsilon: float | None = None):
        labels = (1,)
        frequencies = np.array([omega])
        kappa2_bar = kappa_tilde * omega
        E = np.zeros((2, 2))
        E[1, 1] = kappa2_bar
        M = np.zeros((2, 2))
        M[0, 1] = 2.0 * np.sqrt(kappa2_bar)
        D = drift_matrix(labels, frequencies)
        gen = Generators(labels, frequencies, D, D, E, M, gains={})
        return gen if epsilon is None else gen.with_feedback({1: epsilon})

    return build
