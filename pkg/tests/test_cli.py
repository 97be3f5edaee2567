import json
import subprocess
import sys

import numpy as np
import pytest

from convip.cli import EXIT_CONSTRAINT, EXIT_PARSE, EXIT_VERIFY, _flatten, main
from convip.ip_models import IpVariant
from convip.resources import PROFILES


@pytest.fixture
def files(tmp_path, rng):
    img = tmp_path / "img.csv"
    np.savetxt(img, rng.integers(-128, 128, (8, 8)), fmt="%d", delimiter=",")
    img2 = tmp_path / "img2.pgm"
    img2.write_text("P2\n8 8\n255\n" + " ".join(str(v) for v in rng.integers(0, 256, 64)) + "\n")
    ker = tmp_path / "k.txt"
    ker.write_text(" ".join(str(v) for v in rng.integers(-128, 128, 9)))
    budget = tmp_path / "budget.json"
    budget.write_text('{"luts": 45, "regs": 32, "clbs": 10, "dsps": 1}')
    return {"img": str(img), "img2": str(img2), "ker": str(ker), "budget": str(budget),
            "dir": tmp_path}


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestProfile:
    def test_text_rows(self, capsys):
        code, out = run(capsys, "profile")
        assert code == 0
        lines = out.strip().splitlines()
        assert "Conv_3 45 32 10 1 2.086 0.594" in lines
        assert "Conv_4 42 23 8 2 2.870 0.596" in lines
        assert sum(line.startswith("Conv_") for line in lines) == 4

    def test_json_round_trip(self, capsys):
        code, out = run(capsys, "profile", "--json")
        rows = json.loads(out)["profiles"]
        assert len(rows) == 4
        for row, v in zip(rows, IpVariant):
            p = PROFILES[v]
            assert row["ip"] == v.label
            assert (row["luts"], row["regs"], row["clbs"], row["dsps"]) == p.resources.as_tuple()
            assert (row["wns_ns"], row["power_w"]) == (p.wns_ns, p.power_w)


class TestSimulate:
    def test_conv2_cycles(self, capsys, files):
        code, out = run(capsys, "simulate", "--variant", "conv2", "--image", files["img"],
                        "--kernel", files["ker"], "--json")
        rep = json.loads(out)
        assert code == 0
        assert rep["cycles"] == 48 == rep["expected_cycles"]
        assert rep["golden_match"] is True

    def test_conv3_nine_bits(self, capsys, files):
        code, _ = run(capsys, "simulate", "--variant", "conv3", "--image", files["img"],
                      "--kernel", files["ker"], "--bits", "9")
        assert code == EXIT_CONSTRAINT

    def test_fault_injection_fails(self, capsys, files):
        code, out = run(capsys, "simulate", "--variant", "conv4", "--image", files["img"],
                        "--kernel", files["ker"], "--inject-fault")
        assert code == EXIT_VERIFY
        assert "status: fail" in out

    def test_paired_pgm_and_requantize(self, capsys, files):
        dest = files["dir"] / "out.csv"
        code, out = run(capsys, "simulate", "--variant", "conv3", "--image", files["img"],
                        "--image", files["img2"], "--kernel", files["ker"],
                        "--requantize", "8", "--output", str(dest), "--json")
        rep = json.loads(out)
        assert code == 0 and rep["streams"] == 2 and rep["outputs"] == 72
        assert rep["cycles"] == 48
        for path in rep["written"]:
            vals = np.loadtxt(path, delimiter=",", dtype=int)
            assert vals.shape == (6, 6)
            assert vals.min() >= -128 and vals.max() <= 127

    def test_requantize_pgm(self, capsys, files):
        dest = files["dir"] / "out.pgm"
        code, _ = run(capsys, "simulate", "--variant", "conv1", "--image", files["img"],
                      "--kernel", files["ker"], "--requantize", "8", "--output", str(dest))
        assert code == 0
        assert dest.read_text().startswith("P2\n6 6\n255\n")

    def test_bad_image(self, capsys, files):
        bad = files["dir"] / "bad.csv"
        bad.write_text("1,2\nx,3\n")
        code, _ = run(capsys, "simulate", "--variant", "conv1", "--image", str(bad),
                      "--kernel", files["ker"])
        assert code == EXIT_PARSE

    def test_image_too_small(self, capsys, files):
        small = files["dir"] / "small.csv"
        small.write_text("1,2\n3,4\n")
        code, _ = run(capsys, "simulate", "--variant", "conv1", "--image", str(small),
                      "--kernel", files["ker"])
        assert code == EXIT_CONSTRAINT


class TestAllocate:
    def test_conv3(self, capsys, files):
        code, out = run(capsys, "allocate", "--budget", files["budget"], "--bits", "8", "--json")
        rep = json.loads(out)
        assert code == 0
        assert rep["counts"] == {"Conv_1": 0, "Conv_2": 0, "Conv_3": 1, "Conv_4": 0}
        assert rep["binding"] == ["luts", "regs", "clbs", "dsps"]

    def test_malformed_budget(self, capsys, files):
        bad = files["dir"] / "bad.json"
        bad.write_text('{"luts": 1')
        code, _ = run(capsys, "allocate", "--budget", str(bad), "--bits", "8")
        assert code == EXIT_PARSE

    def test_oracle(self, capsys, files):
        code, out = run(capsys, "allocate", "--budget", files["budget"], "--bits", "16", "--oracle")
        assert code == 0
        assert "oracle: agree" in out
        assert "counts.Conv_2: 1" in out

    def test_oracle_skipped_when_too_large(self, capsys, files):
        big = files["dir"] / "zcu104.json"
        big.write_text('{"luts": 230400, "regs": 460800, "clbs": 28800, "dsps": 1728}')
        code, out = run(capsys, "allocate", "--budget", str(big), "--bits", "8", "--oracle")
        assert code == 0
        assert "oracle: skipped" in out
        assert "counts.Conv_3: 1728" in out

    def test_streams(self, capsys, files):
        code, out = run(capsys, "allocate", "--budget", files["budget"], "--streams", "1", "--json")
        assert json.loads(out)["throughput"] == 1


class TestVerify:
    def test_default_run(self, capsys):
        code, out = run(capsys, "verify")
        assert code == 0
        assert "16777216 packed cases, 0 failures" in out
        for v in IpVariant:
            assert f"{v.label} engine equivalence: 50/50 bit-identical" in out

    def test_seeded_runs_identical(self, capsys):
        args = ("verify", "--cases", "5", "--seed", "7", "--no-exhaustive-packing", "--json")
        assert run(capsys, *args) == run(capsys, *args)

    def test_fault_reported(self, capsys):
        code, out = run(capsys, "verify", "--cases", "3", "--no-exhaustive-packing",
                        "--inject-fault")
        assert code == EXIT_VERIFY
        assert "0/3 bit-identical" in out


def test_text_and_json_carry_same_data(capsys, files):
    for argv in (["allocate", "--budget", files["budget"], "--oracle"],
                 ["simulate", "--variant", "conv3", "--image", files["img"],
                  "--kernel", files["ker"], "--requantize", "8"]):
        _, text = run(capsys, *argv)
        _, js = run(capsys, *argv, "--json")
        lines = set(text.strip().splitlines())
        flat = list(_flatten(json.loads(js)))
        assert len(flat) == len(lines)
        for key, value in flat:
            assert f"{key}: {value}" in lines


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--variant", "conv9"])
    assert exc.value.code == 2


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "convip", "simulate", "--variant", "conv3",
                           "--image", files["img"], "--kernel", files["ker"], "--bits", "9"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_CONSTRAINT
    assert "8-bit" in proc.stderr
