"""命令行测试"""

import pytest

from gas_vine.cli.main import build_config, build_parser, main
from gas_vine.data.synth import generate, write_dataset


@pytest.fixture
def panel_csv(tmp_path):
    panel_path, _ = write_dataset(
        generate(seed=2, n_series=3, length=250), tmp_path / "data"
    )
    return panel_path


class TestParser:
    """参数解析测试"""

    def test_overrides_config_file(self, tmp_path):
        """命令行参数覆盖配置文件"""
        conf = tmp_path / "run.conf"
        conf.write_text("window = 300\nseed = 5\nalphas = 0.9\n", encoding="utf-8")
        args = build_parser().parse_args(
            [
                "backtest",
                "--config",
                str(conf),
                "--window",
                "120",
                "--alphas",
                "0.95,0.99",
            ]
        )
        config = build_config(args)
        assert config.window == 120
        assert config.seed == 5
        assert config.alphas == [0.95, 0.99]

    def test_unknown_command(self):
        """未知子命令以 2 退出"""
        with pytest.raises(SystemExit) as info:
            main(["explode"])
        assert info.value.code == 2

    def test_bad_choice(self):
        """非法选项值以 2 退出"""
        with pytest.raises(SystemExit) as info:
            main(["fit", "--mode", "xvine"])
        assert info.value.code == 2


class TestMain:
    """子命令退出码与输出测试"""

    def test_stats(self, panel_csv, tmp_path, capsys):
        """stats 打印逐序列统计"""
        code = main(
            ["stats", "--input", str(panel_csv), "--out", str(tmp_path / "out")]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "S1" in out
        assert "ljung_box_p" in out

    def test_missing_input(self, tmp_path, capsys):
        """输入文件不存在时返回 1 并输出一行原因"""
        code = main(
            ["stats", "--input", str(tmp_path / "none.csv"), "--out", str(tmp_path)]
        )
        assert code == 1
        err = capsys.readouterr().err
        assert "error: input file not found" in err

    def test_invalid_config_value(self, tmp_path, capsys):
        """配置值非法时返回 1"""
        code = main(["stats", "--gamma", "0.3", "--out", str(tmp_path)])
        assert code == 1
        assert "gamma" in capsys.readouterr().err

    def test_backtest_needs_models(self, panel_csv, tmp_path, capsys):
        """没有模型文件时 backtest 返回 1"""
        code = main(
            ["backtest", "--input", str(panel_csv), "--out", str(tmp_path / "empty")]
        )
        assert code == 1
        assert "run 'fit' first" in capsys.readouterr().err

    @pytest.mark.slow
    def test_fit_then_backtest(self, panel_csv, tmp_path, capsys):
        """fit 写出模型后 backtest 读取并输出汇总"""
        out = str(tmp_path / "run")
        conf = tmp_path / "small.conf"
        conf.write_text("max_p = 0\nmax_q = 0\n", encoding="utf-8")
        common = [
            "--config", str(conf),
            "--input", str(panel_csv),
            "--out", out,
            "--driver", "static",
            "--families", "gaussian",
            "--max-iter", "300",
            "--restarts", "1",
        ]  # fmt: skip
        assert main(["fit", *common]) == 0
        fit_out = capsys.readouterr().out
        assert "Tree 1" in fit_out
        assert "total loglik" in fit_out

        assert main(["backtest", *common, "--window", "15", "--sims", "100"]) == 0
        backtest_out = capsys.readouterr().out
        assert "fail_times" in backtest_out
        assert "realized:" in backtest_out
