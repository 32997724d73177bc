"""
🧪 Unit tests for configuration and logging setup
"""

from loguru import logger

import src.core as core
from src.core.config import AdaptConfig, load_config
from src.core.logging_setup import ErrorContext, configure_logging, resolve_level


class TestAdaptConfig:
    """🧪 Defaults, validation and JSON persistence"""

    def test_defaults_are_valid(self):
        assert AdaptConfig().validate() == []

    def test_spellings_normalised(self):
        config = AdaptConfig(regime="plane-stress", mesh_type="Voronoi", log_level="debug")
        assert (config.regime, config.mesh_type, config.log_level) == ("plane_stress", "voronoi", "DEBUG")

    def test_invalid_values_reported(self):
        errors = AdaptConfig(poisson_ratio=0.5, mesh_type="hexagonal", max_iter=0).validate()
        assert len(errors) == 3

    def test_round_trip_ignores_unknown_keys(self, tmp_path):
        path = tmp_path / "config.json"
        AdaptConfig(initial_elements=250, seed=7).save_to_file(str(path))
        path.write_text(path.read_text().replace('"seed": 7', '"seed": 7, "colour": "red"'))
        loaded = AdaptConfig.load_from_file(str(path))
        assert loaded.initial_elements == 250
        assert loaded.seed == 7

    def test_missing_file_gives_defaults(self, tmp_path):
        assert AdaptConfig.load_from_file(str(tmp_path / "absent.json")) == AdaptConfig()

    def test_load_config(self, tmp_path):
        path = tmp_path / "config.json"
        AdaptConfig(mesh_type="structured", max_iter=12).save_to_file(str(path))
        loaded = load_config(str(path))
        assert (loaded.mesh_type, loaded.max_iter) == ("structured", 12)

    def test_package_exports(self):
        assert sorted(core.__all__) == ["AdaptConfig", "ErrorContext", "configure_logging", "load_config"]


class TestLogging:
    """🧪 Level resolution and the error context"""

    def test_explicit_level_wins(self, monkeypatch):
        monkeypatch.setenv("VEM_ADAPT_LOG", "debug")
        assert resolve_level("warning") == "WARNING"
        assert resolve_level() == "DEBUG"

    def test_unknown_level_falls_back(self):
        assert resolve_level("chatty") == "INFO"

    def test_log_file_sink(self, tmp_path):
        path = tmp_path / "run.log"
        configure_logging("ERROR", log_file=path)
        logger.debug("🔍 written to the file only")
        logger.remove()
        assert "written to the file only" in path.read_text()

    def test_error_context_reraises(self):
        messages = []
        sink = logger.add(messages.append, level="ERROR")
        try:
            with ErrorContext("solve"):
                raise RuntimeError("boom")
        except RuntimeError:
            pass
        finally:
            logger.remove(sink)
        assert any("solve failed: boom" in m for m in messages)

    def test_error_context_can_swallow(self):
        with ErrorContext("plot", reraise=False):
            raise ValueError("ignored")
