import pytest

from agenet.config import FIELDS, RunConfig
from agenet.errors import AgeNetIOError, ConfigError
from agenet.model import agenet_default
from agenet.train import TrainConfig


def test_defaults_match_agenet():
    cfg = RunConfig.load()
    assert cfg.model_config() == agenet_default()
    t = cfg.train_config()
    assert (t.batch_size, t.learning_rate, t.patience, t.seed) == (32, 0.0003, 4, 42)
    assert cfg.augment_config() is not None


def test_file_and_overrides(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("batch_size = 8  # small\nconv_filters=32,64,128,256,512\n\naugment=false\n")
    cfg = RunConfig.load(p, ["batch_size=16", "patience=none"])
    assert cfg["batch_size"] == 16 and cfg["patience"] is None
    assert cfg.model_config().conv_filters == (32, 64, 128, 256, 512)
    assert cfg.augment_config() is None


@pytest.mark.parametrize("text", [
    "colour=red", "batch_size=eight", "dense_units=256,128,7", "dtype=f16", "optimizer=adagrad",
    "train_frac=1.5", "conv_layers=4", "batch_size", "scheme=imdb", "flip_prob=2",
])
def test_rejected(tmp_path, text):
    p = tmp_path / "bad.cfg"
    p.write_text(text + "\n")
    with pytest.raises(ConfigError):
        RunConfig.load(p)


def test_adience_scheme_needs_eight_classes():
    RunConfig.load(overrides=["scheme=adience", "dense_units=256,128,8"])


def test_missing_file(tmp_path):
    with pytest.raises(AgeNetIOError):
        RunConfig.load(tmp_path / "none.cfg")


def test_every_train_field_is_configurable():
    skip = {"augment"}
    assert set(TrainConfig.__dataclass_fields__) - skip <= set(FIELDS) | {"adam_eps_inside_sqrt"}
