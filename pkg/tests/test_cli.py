"""CLI subcommands: files in, files out, exit codes."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from specdet.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args):
    return runner.invoke(main, args, catch_exceptions=False)


class TestCalibrate:
    def test_writes_dyadic_table(self, runner, tmp_path):
        out = tmp_path / "thresholds.json"
        result = invoke(
            runner, ["calibrate", "--pfa", "1e-6", "--n", "1024", "--out", str(out)]
        )
        assert result.exit_code == 0
        data = json.loads(out.read_text())
        assert len(data["entries"]) == 11
        assert data["entries"][0]["ell"] == 1
        assert data["entries"][-1]["ell"] == 1024

    def test_rerun_is_byte_identical(self, runner, tmp_path):
        out = tmp_path / "t.json"
        invoke(runner, ["calibrate", "--pfa", "1e-3", "--n", "64", "--out", str(out)])
        first = out.read_bytes()
        invoke(runner, ["calibrate", "--pfa", "1e-3", "--n", "64", "--out", str(out)])
        assert out.read_bytes() == first

    def test_invalid_pfa_exits_2(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["calibrate", "--pfa", "2", "--n", "64", "--out", str(tmp_path / "x.json")],
        )
        assert result.exit_code == 2
        assert "pfa must be in (0,1)" in result.output


class TestDetect:
    def make_table(self, tmp_path, n, u):
        table = {
            "pfa": 1e-2,
            "n_total": n,
            "entries": [{"ell": k, "u": u, "t": 0.0} for k in range(1, n + 1)],
        }
        path = tmp_path / "table.json"
        path.write_text(json.dumps(table))
        return path

    def test_detects_block_with_lax_table(self, runner, tmp_path):
        data = tmp_path / "powers.csv"
        data.write_text("0.1,5,5,0.1\n")
        table = self.make_table(tmp_path, 4, 2.0)
        result = invoke(
            runner, ["detect", "--input", str(data), "--table", str(table)]
        )
        assert result.exit_code == 0
        body = json.loads(result.output)
        assert body["decided"] is True
        assert (body["a"], body["b"]) == (1, 3)

    def test_all_ones_not_decided(self, runner, tmp_path):
        data = tmp_path / "ones.csv"
        data.write_text(",".join(["1.0"] * 1024) + "\n")
        result = invoke(runner, ["detect", "--input", str(data), "--pfa", "1e-6"])
        assert result.exit_code == 0
        assert json.loads(result.output)["decided"] is False

    def test_binary_rejects_three_bins(self, runner, tmp_path):
        data = tmp_path / "three.csv"
        data.write_text("1.0,1.0,1.0\n")
        result = runner.invoke(
            main, ["detect", "--input", str(data), "--detector", "binary"]
        )
        assert result.exit_code == 2

    def test_malformed_csv_exits_2(self, runner, tmp_path):
        data = tmp_path / "bad.csv"
        data.write_text("1.0,abc,2.0\n")
        result = runner.invoke(main, ["detect", "--input", str(data)])
        assert result.exit_code == 2

    def test_2d_input(self, runner, tmp_path):
        grid = np.ones((8, 8))
        grid[2:4, 2:4] = 50.0
        data = tmp_path / "grid.csv"
        data.write_text("\n".join(",".join(str(v) for v in row) for row in grid))
        result = invoke(
            runner,
            ["detect", "--input", str(data), "--pfa", "1e-2", "--detector", "binary"],
        )
        body = json.loads(result.output)
        assert body["decided"] is True
        assert (body["a"], body["b"], body["a2"], body["b2"]) == (2, 4, 2, 4)

    def test_oracle_region(self, runner, tmp_path):
        data = tmp_path / "p.csv"
        data.write_text("0.5,9,9,0.5\n")
        result = invoke(
            runner,
            [
                "detect", "--input", str(data), "--detector", "oracle",
                "--region", "1,3", "--pfa", "1e-2",
            ],
        )
        assert json.loads(result.output)["decided"] is True


class TestSweep:
    def test_small_explicit_sweep(self, runner, tmp_path):
        out = tmp_path / "sweep.csv"
        result = invoke(
            runner,
            [
                "sweep", "--n", "64", "--detector", "binary",
                "--size-list", "8", "--snr-db-list", "0,10",
                "--trials", "20", "--pfa", "1e-2", "--seed", "5",
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("detector,dims,n,")
        assert len(lines) == 3  # header + 2 snr cells

    def test_deterministic_output(self, runner, tmp_path):
        args = [
            "sweep", "--n", "64", "--detector", "binary",
            "--size-list", "8", "--snr-db-list", "6",
            "--trials", "15", "--pfa", "1e-2", "--seed", "2",
        ]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        invoke(runner, args + ["--out", str(out1)])
        invoke(runner, args + ["--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()

    def test_zero_trials_exits_2(self, runner, tmp_path):
        result = runner.invoke(
            main,
            [
                "sweep", "--n", "64", "--detector", "binary",
                "--size-list", "8", "--snr-db-list", "6",
                "--trials", "0", "--out", str(tmp_path / "x.csv"),
            ],
        )
        assert result.exit_code == 2

    def test_h0_and_nref_cells(self, runner, tmp_path):
        out = tmp_path / "h0.csv"
        invoke(
            runner,
            [
                "sweep", "--n", "64", "--detector", "binary",
                "--size-list", "8", "--snr-db-list", "10",
                "--nref-list", "64,known", "--h0",
                "--trials", "10", "--pfa", "1e-2", "--out", str(out),
            ],
        )
        lines = out.read_text().strip().split("\n")[1:]
        # (1 snr + 1 h0) cells x 2 nref values
        assert len(lines) == 4
        assert any("binary(nref=64)" in line for line in lines)

    def test_missing_grid_spec_exits_2(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["sweep", "--trials", "5", "--out", str(tmp_path / "x.csv")],
        )
        assert result.exit_code == 2


class TestFlops:
    def test_writes_counts(self, runner, tmp_path):
        out = tmp_path / "flops.csv"
        result = invoke(runner, ["flops", "--shape", "64", "--out", str(out)])
        assert result.exit_code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "shape,algorithm,flops"
        algos = {line.split(",")[1] for line in lines[1:]}
        assert "exhaustive" in algos and "binary_total" in algos

    def test_skip_flag(self, runner, tmp_path):
        out = tmp_path / "flops.csv"
        result = invoke(
            runner,
            ["flops", "--shape", "64", "--skip-exhaustive", "--out", str(out)],
        )
        assert result.exit_code == 0
        assert "exhaustive" not in {
            line.split(",")[1] for line in out.read_text().strip().split("\n")[1:]
        }
        assert "skipped" in result.output


class TestServerMode:
    def test_detect_against_live_service(self, runner, tmp_path):
        # run the CLI against the ASGI app over a real transport shim
        import threading
        import time

        import uvicorn

        from specdet.service.app import app

        config = uvicorn.Config(app, host="127.0.0.1", port=8765, log_level="error")
        server = uvicorn.Server(config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        for _ in range(100):
            if server.started:
                break
            time.sleep(0.05)
        try:
            data = tmp_path / "p.csv"
            data.write_text("0.1,7,7,0.1\n")
            result = invoke(
                runner,
                [
                    "detect", "--input", str(data), "--pfa", "1e-2",
                    "--server", "http://127.0.0.1:8765",
                ],
            )
            assert result.exit_code == 0
            assert json.loads(result.output)["decided"] is True
        finally:
            server.should_exit = True
            thread.join(timeout=5)


class TestSweepConfigFile:
    def write_config(self, tmp_path, **overrides):
        cfg = {
            "n": 64,
            "detector": ["binary"],
            "size_list": [8],
            "snr_db_list": [6.0, 12.0],
            "trials": 10,
            "pfa": 1e-2,
            "seed": 4,
        }
        cfg.update(overrides)
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_config_file_drives_sweep(self, runner, tmp_path):
        out = tmp_path / "r.csv"
        cfg = self.write_config(tmp_path, out=str(out))
        result = invoke(runner, ["sweep", "--config", str(cfg)])
        assert result.exit_code == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 3  # header + 2 SNR cells

    def test_explicit_flags_override_config(self, runner, tmp_path):
        cfg = self.write_config(tmp_path, snr_db_list=[6.0, 12.0])
        out = tmp_path / "r.csv"
        result = invoke(
            runner,
            ["sweep", "--config", str(cfg), "--snr-db-list", "9",
             "--out", str(out)],
        )
        assert result.exit_code == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 2  # the flag narrowed the grid to one SNR
        assert ",9.0," in lines[1]

    def test_config_matches_flag_run(self, runner, tmp_path):
        out_cfg, out_flags = tmp_path / "a.csv", tmp_path / "b.csv"
        cfg = self.write_config(tmp_path, out=str(out_cfg))
        invoke(runner, ["sweep", "--config", str(cfg)])
        invoke(
            runner,
            ["sweep", "--n", "64", "--detector", "binary", "--size-list", "8",
             "--snr-db-list", "6,12", "--trials", "10", "--pfa", "1e-2",
             "--seed", "4", "--out", str(out_flags)],
        )
        assert out_cfg.read_bytes() == out_flags.read_bytes()

    def test_unknown_config_key_exits_2(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"trials": 5, "bogus": 1}))
        result = runner.invoke(main, ["sweep", "--config", str(path)])
        assert result.exit_code == 2
        assert "bogus" in result.output

    def test_config_with_2d_shape_list(self, runner, tmp_path):
        out = tmp_path / "r2d.csv"
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "shape": [8, 8], "detector": ["binary"], "size_list": [2],
            "snr_db_list": [12.0], "trials": 5, "pfa": 1e-2, "out": str(out),
        }))
        result = invoke(runner, ["sweep", "--config", str(cfg)])
        assert result.exit_code == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 2 and lines[1].startswith("binary,2,64,")

    def test_missing_trials_exits_2(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["sweep", "--n", "64", "--detector", "binary", "--size-list", "8",
             "--snr-db-list", "6", "--out", str(tmp_path / "x.csv")],
        )
        assert result.exit_code == 2
        assert "trials" in result.output
