import logging
from typing import ClassVar

import pytest

import becprobe
from becprobe.experiments import Experiment, RunContext
from becprobe.runtime import enter_run, record_warning
from becprobe.runtime.logging import _RichConsoleHandler
from becprobe.storage import ManifestManager


class Counting(Experiment):
    value: int = 1
    calls: ClassVar[int] = 0

    def _run(self, ctx: RunContext) -> None:
        type(self).calls += 1
        logging.getLogger("becprobe.test").info("counting:inside")
        ctx.warn("detector pixels cover only 95.0% of the coupling profile of mode 3")
        ctx.write_json("value.json", {"value": self.value})


def test_log_routes_to_active_run_dir(becprobe_tmp_root) -> None:
    run_dir = becprobe_tmp_root / "some-run"
    with enter_run(run_dir):
        path = becprobe.log("inside-run")
    becprobe.log("outside-run")

    assert path == run_dir / "becprobe.log"
    text = path.read_text()
    assert "inside-run" in text
    assert "outside-run" not in text
    assert "test_logger.py:" in text


def test_log_without_run_defaults_to_base_root(becprobe_tmp_root) -> None:
    log_path = becprobe.log("no-run")
    assert log_path == becprobe.BECPROBE_CONFIG.base_root / "becprobe.log"
    assert "no-run" in log_path.read_text()


def test_log_rejects_unknown_level(becprobe_tmp_root) -> None:
    with pytest.raises(ValueError, match="Unknown log level"):
        becprobe.log("x", level="LOUD")


def test_configure_logging_rich_handler_is_idempotent(becprobe_tmp_root) -> None:
    root = logging.getLogger()
    becprobe.configure_logging()
    after = sum(isinstance(h, _RichConsoleHandler) for h in root.handlers)
    becprobe.configure_logging()
    after2 = sum(isinstance(h, _RichConsoleHandler) for h in root.handlers)
    assert after == after2 == 1


def test_record_warning_collects_per_run(becprobe_tmp_root) -> None:
    with enter_run(becprobe_tmp_root / "outer") as outer:
        record_warning("outer warning")
        record_warning("outer warning")
        with enter_run(becprobe_tmp_root / "inner") as inner:
            record_warning("inner warning")
        record_warning("after inner")

    assert outer == ["outer warning", "after inner"]
    assert inner == ["inner warning"]
    assert "inner warning" in (becprobe_tmp_root / "inner" / "becprobe.log").read_text()


def test_run_logs_and_records_warnings_in_manifest(becprobe_tmp_root) -> None:
    Counting.calls = 0
    obj = Counting()
    directory = obj.run()

    text = (directory / "becprobe.log").read_text()
    assert f"run: begin Counting {obj.config_hash}" in text
    assert "counting:inside" in text
    assert "[WARNING]" in text
    # console-only summary line stays out of the file
    assert "run ok" not in text

    manifest = ManifestManager.read_manifest(directory)
    assert manifest.status == "success"
    assert manifest.warnings == [
        "detector pixels cover only 95.0% of the coupling profile of mode 3"
    ]
    assert manifest.outputs == ["value.json"]


def test_completed_run_is_reused(becprobe_tmp_root) -> None:
    Counting.calls = 0
    obj = Counting(value=2)
    first = obj.run()
    second = obj.run()
    assert first == second
    assert Counting.calls == 1
    assert "already complete" in (becprobe_tmp_root / "becprobe.log").read_text()

    obj.run(force=True)
    assert Counting.calls == 2


def test_run_out_overrides_directory(becprobe_tmp_root, tmp_path) -> None:
    out = tmp_path / "custom"
    assert Counting(value=3).run(out=out) == out.resolve()
    assert (out / "manifest.json").is_file()


def test_rich_console_wraps_location_in_brackets() -> None:
    record = logging.LogRecord(
        name="becprobe",
        level=logging.INFO,
        pathname=__file__,
        lineno=123,
        msg="hello",
        args=(),
        exc_info=None,
    )
    assert _RichConsoleHandler._format_location(record) == "[test_logger.py:123]"
