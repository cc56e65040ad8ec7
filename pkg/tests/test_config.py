from dataclasses import replace

import pytest

from losses.vat import VatConfig
from model.config import EncoderConfig
from training.presets import PRESETS, get_preset
from utils.config import TrainConfig
from utils.errors import ConfigError


def config_lines(cfg=None):
    return (cfg or TrainConfig()).to_text().splitlines(keepends=True)


def without(lines, key):
    return [line for line in lines if not line.startswith(f"{key}=")]


class TestTrainConfig:
    def test_defaults_are_valid(self):
        assert TrainConfig().validate() == []

    def test_text_round_trip(self):
        cfg = TrainConfig(
            seed=99,
            use_vat=False,
            polarity_strategy="majority",
            model=EncoderConfig(layers=3, shared_layers=2, asc_layers=1, dropout=0.25),
            vat=VatConfig(eps=0.5, apply_to="ate"),
        )
        assert TrainConfig.from_lines(config_lines(cfg)) == cfg

    def test_dotted_nested_keys(self):
        keys = [key for key, _ in TrainConfig().to_items()]
        assert "model.layers" in keys and "vat.eps" in keys and "model" not in keys
        assert len(keys) == len(set(keys))

    def test_comments_and_blank_lines(self):
        lines = ["# run settings\n", "\n"] + config_lines()
        assert TrainConfig.from_lines(lines) == TrainConfig()

    def test_booleans(self):
        lines = [line.replace("use_ghm=true", "use_ghm=no") for line in config_lines()]
        assert TrainConfig.from_lines(lines).use_ghm is False

    def test_missing_key(self):
        with pytest.raises(ConfigError) as info:
            TrainConfig.from_lines(without(config_lines(), "vat.xi"))
        assert info.value.key == "vat.xi"

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as info:
            TrainConfig.from_lines(config_lines() + ["model.depth=3\n"])
        assert info.value.key == "model.depth"

    def test_duplicate_key(self):
        with pytest.raises(ConfigError) as info:
            TrainConfig.from_lines(config_lines() + ["seed=1\n"])
        assert info.value.key == "seed"

    @pytest.mark.parametrize("key, raw", [("batch", "many"), ("use_vat", "maybe"), ("vat.eps", "wide")])
    def test_bad_value(self, key, raw):
        lines = without(config_lines(), key) + [f"{key}={raw}\n"]
        with pytest.raises(ConfigError) as info:
            TrainConfig.from_lines(lines)
        assert info.value.key == key

    def test_malformed_line(self):
        with pytest.raises(ConfigError):
            TrainConfig.from_lines(["seed 13\n"])

    def test_check_lists_every_problem(self):
        cfg = replace(TrainConfig(), batch=0, warmup=2.0, polarity_strategy="vote")
        with pytest.raises(ConfigError) as info:
            cfg.check()
        message = str(info.value)
        assert "batch" in message and "warmup" in message and "polarity_strategy" in message

    def test_nested_problems_are_prefixed(self):
        cfg = replace(TrainConfig(), model=EncoderConfig(hidden=10, heads=4))
        assert any(e.startswith("model.") for e in cfg.validate())

    def test_save_and_load(self, tmp_path):
        path = tmp_path / "run.cfg"
        TrainConfig(seed=5).save(path)
        assert TrainConfig.load(path) == TrainConfig(seed=5)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            TrainConfig.load(tmp_path / "absent.cfg")


class TestPresets:
    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_valid(self, name):
        assert get_preset(name).validate() == []

    def test_published_keeps_defaults(self):
        assert get_preset("published") == TrainConfig()

    def test_base_has_no_decoder_or_extras(self):
        cfg = get_preset("base")
        assert cfg.model.asc_layers == 0 and cfg.model.shared_layers == cfg.model.layers
        assert not cfg.use_ghm and not cfg.use_vat

    def test_ablations(self):
        assert get_preset("no_ghm").use_vat and not get_preset("no_ghm").use_ghm
        assert get_preset("no_vat").use_ghm and not get_preset("no_vat").use_vat

    def test_fresh_instances(self):
        get_preset("desk").model.layers = 99
        assert get_preset("desk").model.layers != 99

    def test_unknown(self):
        with pytest.raises(ConfigError) as info:
            get_preset("huge")
        assert info.value.key == "preset"
