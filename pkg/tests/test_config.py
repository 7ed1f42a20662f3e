"""Configuration loading, validation and unknown-key rejection."""
import json

import pytest

from mccfind.config import Config, DetectorConfig, EvalConfig, RenderConfig
from mccfind.errors import ConfigError


class TestDefaults:
    def test_defaults_validate(self):
        Config().validate()

    def test_paper_constants(self):
        d = DetectorConfig()
        assert d.b0_factor == 1.65
        assert d.convexity_min == 0.90
        assert d.axis_ratio_min == 0.4
        assert d.circularity_range == (0.65, 0.97)
        assert d.entropy_max == 4.9
        assert d.nms_iou == 0.5

    def test_render_defaults(self):
        r = RenderConfig()
        assert (r.width, r.height) == (1024, 640)
        assert r.focal == 1000.0


class TestValidation:
    def test_even_window_rejected(self):
        cfg = DetectorConfig(thresh_window=30)
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_bad_circularity_range(self):
        cfg = DetectorConfig(circularity_range=(0.9, 0.3))
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_positive_tz_rejected(self):
        cfg = RenderConfig(tz_range=(-20.0, 5.0))
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_tz_outside_band_rejected(self):
        cfg = RenderConfig(tz_range=(-50.0, -40.0))
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_count_range_bounds(self):
        with pytest.raises(ConfigError):
            RenderConfig(count_range=(0, 3)).validate()
        with pytest.raises(ConfigError):
            RenderConfig(count_range=(1, 9)).validate()

    def test_eval_threshold_bounds(self):
        with pytest.raises(ConfigError):
            EvalConfig(tp_threshold=0.0).validate()


class TestFromDict:
    def test_round_trip(self):
        cfg = Config.from_dict({"detector": {"cost_threshold": 0.9},
                                "render": {"seed": 5},
                                "eval": {"tp_threshold": 0.6}})
        assert cfg.detector.cost_threshold == 0.9
        assert cfg.render.seed == 5
        assert cfg.eval.tp_threshold == 0.6

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError):
            Config.from_dict({"detecting": {}})

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            Config.from_dict({"detector": {"cost_treshold": 1.0}})

    def test_pair_coercion(self):
        cfg = Config.from_dict({"detector": {"circularity_range": [0.5, 0.9]}})
        assert cfg.detector.circularity_range == (0.5, 0.9)

    def test_bad_pair_length_rejected(self):
        with pytest.raises(ConfigError):
            Config.from_dict({"detector": {"circularity_range": [0.5]}})

    def test_invalid_value_rejected(self):
        with pytest.raises(ConfigError):
            Config.from_dict({"detector": {"rdp_epsilon_factor": 2.0}})


class TestFromJson:
    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"render": {"seed": 99}}))
        assert Config.from_json(path).render.seed == 99

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            Config.from_json(tmp_path / "absent.json")

    def test_bad_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            Config.from_json(path)

    def test_to_dict_sections(self):
        d = Config().to_dict()
        assert set(d) == {"detector", "render", "eval"}
