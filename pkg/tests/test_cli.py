import numpy as np
import pytest

from neoqec.cli import EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, main
from neoqec.datasets import read_dataset, read_header
from neoqec.sweeps import wilson_interval


def run(argv):
    return main(argv)


# ---------------------------------------------------------------- gen-data


def test_gen_data_roundtrip_and_labels(tmp_path):
    out = tmp_path / "train.neod"
    rc = run(["gen-data", "--d", "3", "--K", "3", "--p", "0.08",
              "--records", "30", "--seed", "5", "--out", str(out)])
    assert rc == EXIT_OK
    info, windows, labels = read_dataset(out)
    assert info.record_count == 30 and info.d == 3 and info.K == 3
    assert windows.shape == (30, 8, 5, 5)
    assert labels.shape == (30, 4, 5, 5)
    # boundary channels present in every record
    assert windows[:, 6].any() and windows[:, 7].any()
    # some errors sampled at p=0.08
    assert labels.any()


def test_gen_data_empty_file_has_header(tmp_path):
    out = tmp_path / "empty.neod"
    rc = run(["gen-data", "--d", "3", "--K", "3", "--records", "0",
              "--seed", "5", "--out", str(out)])
    assert rc == EXIT_OK
    info = read_header(out)
    assert info.record_count == 0


def test_gen_data_deterministic(tmp_path):
    a, b = tmp_path / "a.neod", tmp_path / "b.neod"
    argv = ["gen-data", "--d", "3", "--K", "4", "--p", "0.04",
            "--records", "25", "--seed", "7"]
    assert run(argv + ["--out", str(a)]) == EXIT_OK
    assert run(argv + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------- sweeps


def test_decode_p0_no_failures(tmp_path):
    out = tmp_path / "r.csv"
    rc = run(["decode", "--d", "3", "--p", "0", "--trials", "50",
              "--seed", "3", "--out", str(out)])
    assert rc == EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("d,p,trials,failures")
    fields = lines[1].split(",")
    assert fields[0] == "3" and fields[3] == "0"
    assert fields[-1] == ""  # wall column blank without --timing


def test_sweep_reproducible_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["sweep", "--d", "3", "--p", "0.01,0.02", "--trials", "200",
            "--seed", "11", "--decoder", "mwpm"]
    assert run(argv + ["--out", str(a)]) == EXIT_OK
    assert run(argv + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().strip().splitlines()) == 3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("d=3\np=0\ntrials=40\nseed=9\n# comment\n")
    out1 = tmp_path / "o1.csv"
    rc = run(["decode", "--config", str(cfg), "--out", str(out1)])
    assert rc == EXIT_OK
    assert ",40," in out1.read_text().splitlines()[1]
    out2 = tmp_path / "o2.csv"
    rc = run(["decode", "--config", str(cfg), "--trials", "10", "--out", str(out2)])
    assert rc == EXIT_OK
    assert ",10," in out2.read_text().splitlines()[1]


def test_env_seed_override(tmp_path, monkeypatch):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["decode", "--d", "3", "--p", "0.05", "--trials", "100", "--seed", "1"]
    monkeypatch.setenv("NEOQEC_SEED", "123")
    assert run(argv + ["--out", str(out1)]) == EXIT_OK
    monkeypatch.delenv("NEOQEC_SEED")
    assert run(argv + ["--seed", "123", "--out", str(out2)]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()


def test_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.txt"
    cfg.write_text("this is not key value\n")
    assert run(["decode", "--config", str(cfg)]) == EXIT_CONFIG
    assert run(["decode", "--d", "4"]) == EXIT_CONFIG  # even distance rejected


def test_ls_decode_p0(tmp_path):
    out = tmp_path / "ls.csv"
    rc = run(["ls-decode", "--d", "3", "--p", "0", "--trials", "30",
              "--seed", "2", "--out", str(out)])
    assert rc == EXIT_OK
    assert out.read_text().splitlines()[1].split(",")[3] == "0"


# ---------------------------------------------------------------- npu


def test_npu_verify_passes(tmp_path):
    out = tmp_path / "npu.txt"
    rc = run(["npu-verify", "--cases", "400", "--seed", "13", "--out", str(out)])
    assert rc == EXIT_OK
    text = out.read_text()
    assert "mismatches = 0" in text
    assert "k9_jj_total = 151" in text
    assert "k9_bias_ma = 11.2" in text
    assert "k9_latency_ps = 13.8" in text
    assert "result = PASS" in text


def test_npu_verify_negative_control(tmp_path):
    rc = run(["npu-verify", "--cases", "50", "--seed", "13",
              "--inject-fault", "--out", str(tmp_path / "x.txt")])
    assert rc == EXIT_VERIFY


# ---------------------------------------------------------------- power


def test_power_report_values(tmp_path):
    out = tmp_path / "p.txt"
    rc = run(["power", "--d", "9", "--out", str(out)])
    assert rc == EXIT_OK
    text = out.read_text()
    assert "capacity = 1627" in text
    assert "throughput_feasible = True" in text
    csv_out = tmp_path / "p.csv"
    rc = run(["power", "--d", "9", "--csv", "--out", str(csv_out)])
    assert rc == EXIT_OK
    assert csv_out.read_text().splitlines()[0] == "p_npu_uw,p_nn_uw,p_total_uw,capacity"


def test_power_budget_zero(tmp_path):
    out = tmp_path / "p0.csv"
    rc = run(["power", "--d", "9", "--budget-w", "0", "--csv", "--out", str(out)])
    assert rc == EXIT_OK
    assert out.read_text().strip().splitlines()[1].endswith(",0")


def test_mults_command(tmp_path):
    out = tmp_path / "m.txt"
    rc = run(["mults", "--d", "9", "--out", str(out)])
    assert rc == EXIT_OK
    assert "total = 4577760" in out.read_text()


# ---------------------------------------------------------------- stats


def test_wilson_interval_sanity():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0.0 < hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    lo, hi = wilson_interval(10, 1000)
    assert lo <= 10 / 1000 <= hi
