import pytest

from app.errors import ConfigError
from app.input.config_file import ExperimentConfig, load_experiment_config, parse_key_values
from app.input.instance_format import format_instance, load_instance, parse_instance, save_instance


class TestExperimentConfig:
    def test_defaults_follow_m(self):
        cfg = ExperimentConfig.from_mapping({"n": 13, "m": 4})
        assert (cfg.t, cfg.k) == (4, 4)
        assert cfg.schedule == "t=m"
        assert cfg.b_mode == "one"

    def test_aliases_and_case(self):
        cfg = ExperimentConfig.from_mapping({"n": "15", "m": "5", "t": "3", "B": "Random", "V-mode": "RANDOM"})
        assert cfg.t == 3 and cfg.k == 3
        assert cfg.b_mode == "random"
        assert cfg.v_mode == "random"

    @pytest.mark.parametrize("values", [
        {"n": 13, "m": 4, "t": 5},
        {"n": 13, "m": 4, "t": 1},
        {"n": 5, "m": 5},
        {"n": 13, "m": 4, "k": 14},
        {"n": 13, "m": 4, "schedule": "greedy"},
        {"n": 13, "m": 4, "colour": "blue"},
    ])
    def test_invalid_values(self, values):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping(values)


class TestKeyValueFormat:
    def test_comments_and_blank_lines(self):
        text = "# header\nn = 13\n\nm = 4  # inline\n"
        assert parse_key_values(text) == {"n": "13", "m": "4"}

    @pytest.mark.parametrize("text", ["n = 1\nn = 2\n", "n 13\n", " = 4\n"])
    def test_malformed(self, text):
        with pytest.raises(ConfigError):
            parse_key_values(text)

    def test_file_with_overrides(self, tmp_path):
        path = tmp_path / "exp.conf"
        path.write_text("n = 15\nm = 5\ntrials = 20\n")
        cfg = load_experiment_config(path, t=4, trials=None)
        assert (cfg.n, cfg.m, cfg.t, cfg.trials) == (15, 5, 4, 20)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_experiment_config(tmp_path / "absent.conf")


class TestInstanceFormat:
    def test_save_and_load(self, instance8, tmp_path):
        loaded = load_instance(save_instance(instance8, tmp_path / "inst" / "curve.txt"))
        assert loaded.curve.ctx.f == instance8.curve.ctx.f
        assert loaded.curve.A.bits == instance8.curve.A.bits
        assert (loaded.P.x.bits, loaded.P.y.bits) == (instance8.P.x.bits, instance8.P.y.bits)
        assert (loaded.Q.x.bits, loaded.Q.y.bits) == (instance8.Q.x.bits, instance8.Q.y.bits)
        assert (loaded.r, loaded.N, loaded.z_true) == (instance8.r, instance8.N, instance8.z_true)

    def test_missing_keys(self):
        with pytest.raises(ConfigError, match="missing"):
            parse_instance("n = 8\nf = 0x11b\n")

    def test_point_off_curve(self, instance8):
        # (x, y + c) stays on the curve only for c in {0, x}
        c = 2 if instance8.P.x.bits == 1 else 1
        text = format_instance(instance8).replace(f"P.y = {instance8.P.y.bits:#x}",
                                                  f"P.y = {instance8.P.y.bits ^ c:#x}")
        with pytest.raises(ConfigError):
            parse_instance(text)

    def test_not_an_integer(self, instance8):
        with pytest.raises(ConfigError):
            parse_instance(format_instance(instance8).replace("r = ", "r = x"))
