import json

import pytest

from app import build_parser, main
from training.trainer import GRADIENT_STATS, METRIC_LOG, STAGE1_CHECKPOINT, STAGE2_CHECKPOINT
from utils.errors import ConfigError, DataError, NumericDomainError, ShapeError, exit_code_for


@pytest.fixture
def corpus(tmp_path):
    path = tmp_path / "corpus.txt"
    assert main(["synth", "--out", str(path), "--n", "24", "--seed", "5", "--imbalance", "2"]) == 0
    return path


@pytest.fixture
def run_dir(tmp_path, corpus, fast_config):
    config = tmp_path / "fast.cfg"
    fast_config.save(config)
    out_dir = tmp_path / "run"
    argv = ["train", "--config", str(config), "--train", str(corpus), "--dev", str(corpus), "--out-dir", str(out_dir)]
    assert main(argv) == 0
    return out_dir


class TestExitCodes:
    def test_mapping(self):
        assert exit_code_for(ConfigError("x")) == 1
        assert exit_code_for(DataError("x")) == 2
        assert exit_code_for(ShapeError("x")) == 2
        assert exit_code_for(FileNotFoundError("x")) == 2
        assert exit_code_for(NumericDomainError("x", {"L_e": float("nan")})) == 3

    @pytest.mark.parametrize("argv", [[], ["frobnicate"], ["synth"], ["stats", "--data"]])
    def test_usage_errors(self, argv):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 1

    def test_train_sources_are_exclusive(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["train", "--config", "a", "--preset", "desk", "--train", "t", "--out-dir", "o"])


class TestSynthAndStats:
    def test_synth_is_reproducible(self, tmp_path, corpus):
        again = tmp_path / "again.txt"
        assert main(["synth", "--out", str(again), "--n", "24", "--seed", "5", "--imbalance", "2"]) == 0
        assert again.read_bytes() == corpus.read_bytes()

    def test_synth_rejects_bad_size(self, tmp_path):
        assert main(["synth", "--out", str(tmp_path / "c.txt"), "--n", "0"]) == 1
        assert main(["synth", "--out", str(tmp_path / "c.txt"), "--max-tokens", "0"]) == 1

    def test_synth_caps_sentence_length(self, tmp_path):
        path = tmp_path / "long.txt"
        argv = ["synth", "--out", str(path), "--n", "200", "--imbalance", "50", "--max-tokens", "40"]
        assert main(argv) == 0
        blocks = path.read_text(encoding="utf-8").strip("\n").split("\n\n")
        assert len(blocks) == 200
        assert max(len(block.splitlines()) for block in blocks) <= 40

    def test_stats(self, corpus, capsys):
        assert main(["stats", "--data", str(corpus), "--pairs"]) == 0
        assert "Label statistics" in capsys.readouterr().out

    def test_missing_data_file(self, tmp_path):
        assert main(["stats", "--data", str(tmp_path / "absent.txt")]) == 2

    def test_malformed_corpus(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("fan\tI\tNEG\n", encoding="utf-8")
        assert main(["stats", "--data", str(path)]) == 2
        assert "line 1" in capsys.readouterr().err


class TestConfigFiles:
    def test_init_config_round_trips(self, tmp_path):
        path = tmp_path / "desk.cfg"
        assert main(["init-config", "--preset", "desk", "--out", str(path)]) == 0
        assert "vat.eps=" in path.read_text(encoding="utf-8")

    def test_incomplete_config_is_a_usage_error(self, tmp_path, corpus):
        path = tmp_path / "desk.cfg"
        main(["init-config", "--preset", "desk", "--out", str(path)])
        lines = [line for line in path.read_text(encoding="utf-8").splitlines() if not line.startswith("seed=")]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        argv = ["train", "--config", str(path), "--train", str(corpus), "--out-dir", str(tmp_path / "run")]
        assert main(argv) == 1


class TestTrainedModel:
    def test_training_artifacts(self, run_dir):
        for name in (STAGE1_CHECKPOINT, STAGE2_CHECKPOINT, METRIC_LOG, "config.txt", "vocab.txt"):
            assert (run_dir / name).exists()

    def test_eval_prints_key_values(self, run_dir, corpus, capsys):
        capsys.readouterr()
        assert main(["eval", "--checkpoint", str(run_dir / STAGE2_CHECKPOINT), "--data", str(corpus)]) == 0
        values = dict(line.split("=", 1) for line in capsys.readouterr().out.splitlines() if "=" in line)
        for key in ("precision", "recall", "f1", "term.f1", "polarity.POS.f1"):
            assert 0.0 <= float(values[key]) <= 1.0

    def test_predict_writes_one_line_per_sentence(self, run_dir, corpus, tmp_path):
        out = tmp_path / "pred.txt"
        argv = ["predict", "--checkpoint", str(run_dir / STAGE2_CHECKPOINT), "--data", str(corpus), "--out", str(out)]
        assert main(argv) == 0
        assert len(out.read_text(encoding="utf-8").splitlines()) == 24
        argv += ["--consistent-decode", "--strategy", "majority"]
        assert main(argv) == 0

    def test_resume_stage_two(self, run_dir, corpus, tmp_path, fast_config):
        config = tmp_path / "fast.cfg"
        argv = ["train", "--config", str(config), "--train", str(corpus), "--out-dir", str(run_dir), "--stage", "2"]
        assert main(argv) == 0
        assert (run_dir / STAGE2_CHECKPOINT).exists()

    def test_stage_two_alone_adds_its_gradient_stats(self, corpus, tmp_path, fast_config):
        config = tmp_path / "fast.cfg"
        fast_config.save(config)
        out_dir = tmp_path / "staged"
        argv = ["train", "--config", str(config), "--train", str(corpus), "--out-dir", str(out_dir), "--stage"]
        assert main(argv + ["1"]) == 0
        assert not (out_dir / STAGE2_CHECKPOINT).exists()
        assert main(argv + ["2"]) == 0

        summaries = [
            line for line in (out_dir / GRADIENT_STATS).read_text(encoding="utf-8").splitlines()
            if line.startswith("# ")
        ]
        assert [line.split()[2] for line in summaries] == ["task=ate", "task=ate", "task=ate", "task=asc"]
        stages = [json.loads(line)["stage"] for line in (out_dir / METRIC_LOG).read_text(encoding="utf-8").splitlines()]
        assert stages == [1, 1, 2]

    def test_missing_checkpoint(self, corpus, tmp_path):
        assert main(["eval", "--checkpoint", str(tmp_path / "none.ckpt"), "--data", str(corpus)]) == 2
