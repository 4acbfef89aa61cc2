import importlib
from typing import Any

import chz
import pytest

from becprobe.condensate import BasisConfig, GridConfig, TrapConfig
from becprobe.experiments import CovarianceExperiment, RunSpec
from becprobe.probe import FeedbackSpec, GaussianBeam, ProbeConfig
from becprobe.serialization import ConfigSerializer, parse_override, set_dotted


@chz.chz
class Sweep:
    steps: int
    widths: tuple[float, ...]
    _private: int = 0


def test_get_classname_rejects_main_module() -> None:
    MainLike = type("MainLike", (), {})
    MainLike.__module__ = "__main__"
    with pytest.raises(ValueError, match="__main__"):
        ConfigSerializer.get_classname(MainLike())


def test_to_dict_from_dict_roundtrip() -> None:
    obj = Sweep(steps=1, widths=(0.5, 1.0), _private=7)
    data = ConfigSerializer.to_dict(obj)
    assert data["widths"] == [0.5, 1.0]
    assert ConfigSerializer.from_dict(data) == obj


def test_experiment_roundtrip_restores_tuples_and_nested_configs() -> None:
    obj = CovarianceExperiment(
        system=CovarianceExperiment().system.with_probe(profile=GaussianBeam(width=0.5)),
        timing=RunSpec(t_end=1.0, n_samples=11),
        report_modes=(1, 2),
    )
    data = ConfigSerializer.to_dict(obj)
    assert data["report_modes"] == [1, 2]
    assert data["system"]["probe"]["profile"][ConfigSerializer.CLASS_MARKER] == (
        "becprobe.probe.config.GaussianBeam"
    )
    rebuilt = ConfigSerializer.from_dict(data)
    assert rebuilt == obj
    assert rebuilt.report_modes == (1, 2)
    assert ConfigSerializer.compute_hash(rebuilt) == ConfigSerializer.compute_hash(obj)


def test_from_dict_coerces_integers_for_float_fields() -> None:
    data = ConfigSerializer.to_dict(TrapConfig())
    data["atom_number"] = 1000
    data["grid"]["half_width"] = 12
    rebuilt = ConfigSerializer.from_dict(data)
    assert isinstance(rebuilt.atom_number, float)
    assert isinstance(rebuilt.grid.half_width, float)
    assert rebuilt == TrapConfig()


def test_union_field_keeps_literal_and_coerces_numbers() -> None:
    auto = ConfigSerializer.to_dict(FeedbackSpec(targets=(1,), epsilon="auto"))
    assert ConfigSerializer.from_dict(auto).epsilon == "auto"
    numeric = ConfigSerializer.to_dict(FeedbackSpec(targets=(1,), epsilon=2.0))
    numeric["epsilon"] = 2
    rebuilt = ConfigSerializer.from_dict(numeric)
    assert rebuilt.epsilon == 2.0
    assert isinstance(rebuilt.epsilon, float)


def test_compute_hash_ignores_private_fields() -> None:
    a = Sweep(steps=1, widths=(0.5,), _private=1)
    b = Sweep(steps=1, widths=(0.5,), _private=999)
    assert ConfigSerializer.compute_hash(a) == ConfigSerializer.compute_hash(b)


def test_hash_treats_integral_floats_like_integers() -> None:
    a = ConfigSerializer.to_dict(GridConfig(half_width=12.0))
    b = dict(a, half_width=12)
    assert ConfigSerializer.compute_hash(a) == ConfigSerializer.compute_hash(b)


def test_hash_changes_with_physics() -> None:
    base = ProbeConfig()
    assert ConfigSerializer.compute_hash(base) != ConfigSerializer.compute_hash(
        ProbeConfig(kappa2=2.0)
    )
    assert ConfigSerializer.compute_hash(BasisConfig()) != ConfigSerializer.compute_hash(
        BasisConfig(number_conserving=True)
    )


def test_to_python_is_evaluable() -> None:
    obj = Sweep(steps=3, widths=(0.25, 2.0))
    code = ConfigSerializer.to_python(obj, multiline=False)

    package = obj.__class__.__module__.split(".")[0]
    env: dict[str, Any] = {package: importlib.import_module(package)}
    assert eval(code, env) == obj


def test_to_python_writes_single_element_tuples() -> None:
    code = ConfigSerializer.to_python(FeedbackSpec(targets=(3,)), multiline=False)
    assert "targets=(3,)" in code


def test_set_dotted_assigns_nested_values() -> None:
    data = ConfigSerializer.to_dict(CovarianceExperiment())
    set_dotted(data, "timing.seed", 7)
    set_dotted(data, "system.probe.pixel_width", 0.25)
    rebuilt = ConfigSerializer.from_dict(data)
    assert rebuilt.timing.seed == 7
    assert rebuilt.system.probe.pixel_width == 0.25


def test_set_dotted_rejects_non_sections() -> None:
    data = ConfigSerializer.to_dict(CovarianceExperiment())
    with pytest.raises(KeyError, match="timing.seed is not a nested config section"):
        set_dotted(data, "timing.seed.value", 1)


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("timing.seed=3", ("timing.seed", 3)),
        ("system.probe.kappa2 = 0.5", ("system.probe.kappa2", 0.5)),
        ("report_modes=[1, 2]", ("report_modes", [1, 2])),
        ("schedule.mode=ramp", ("schedule.mode", "ramp")),
        ("system.basis.number_conserving=true", ("system.basis.number_conserving", True)),
    ],
)
def test_parse_override(text: str, expected: tuple[str, object]) -> None:
    assert parse_override(text) == expected


@pytest.mark.parametrize("text", ["no-equals", "=3", ""])
def test_parse_override_rejects_malformed(text: str) -> None:
    with pytest.raises(ValueError, match="key=value"):
        parse_override(text)
