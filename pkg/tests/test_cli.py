import json
import subprocess
import sys

import numpy as np
import pytest

from talg import bench
from talg.cli import main
from talg.io import CIFAR_RECORD, read_raw, save_image, write_raw


@pytest.fixture
def image(tmp_path):
    rng = np.random.default_rng(4)
    p = tmp_path / "img.png"
    save_image(p, rng.integers(0, 256, (20, 18)))
    return p


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_range():
    assert bench.parse_range("8:56:8") == [8, 16, 24, 32, 40, 48, 56]
    assert bench.parse_range("10:510:50")[-1] == 510
    assert bench.parse_range("3") == [3]
    assert bench.parse_range("2:4") == [2, 3, 4]
    for bad in ("a:b", "5:2", "1:4:0", "1:2:3:4"):
        with pytest.raises(bench.ConfigError):
            bench.parse_range(bad)


def test_approx_full_rank_is_inf(image, capsys):
    for method in bench.METHODS:
        ranks = "18,18" if method == "tsvd" else "20,18"
        code, out, _ = run(["approx", image, "--method", method, "--ranks", ranks], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "method,algebra,transform,r1,r2,psnr_db,iters,seconds"
        fields = lines[1].split(",")
        assert fields[0] == method
        assert float(fields[5]) > 150 or fields[5] == "inf"


def test_approx_row_layout(image, capsys):
    code, out, _ = run(["approx", image, "--ranks", "5,4", "--nest", "2", "--transform", "dct"], capsys)
    assert code == 0
    row = out.strip().splitlines()[1].split(",")
    assert row[:5] == ["thosvd", "3x3x3x3", "dct", "5", "4"]
    assert row[-1] == ""
    code, out, _ = run(["approx", image, "--ranks", "5,4", "--record-time"], capsys)
    assert float(out.strip().splitlines()[1].split(",")[-1]) >= 0


def test_sweep_outputs(image, tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, out, _ = run(["sweep", image, "--r1", "4:12:4", "--r2", "6", "--optimize",
                        "--out", out_dir, "--plot"], capsys)
    assert code == 0
    rows = (out_dir / "results.csv").read_text().strip().splitlines()
    assert len(rows) == 4
    assert [r.split(",")[3] for r in rows[1:]] == ["4", "8", "12"]
    assert all(r.startswith("thooi,") for r in rows[1:])
    manifest = json.loads((out_dir / "results.manifest.json").read_text())
    assert manifest["version"] and manifest["inputs"][0]["sha256"]
    assert manifest["config"]["method"] == "thooi"
    assert (out_dir / "results.png").stat().st_size > 0


def test_sweep_deterministic_across_threads(image, tmp_path, capsys, monkeypatch):
    texts = []
    for threads in ("1", "8", "8"):
        monkeypatch.setenv("TALG_THREADS", threads)
        out_dir = tmp_path / f"t{threads}{len(texts)}"
        code, _, _ = run(["sweep", image, "--r1", "2:18:4", "--r2", "2:18:8", "--method", "thooi",
                          "--out", out_dir], capsys)
        assert code == 0
        texts.append((out_dir / "results.csv").read_bytes())
    assert texts[0] == texts[1] == texts[2]


def test_config_errors_exit_2(image, capsys, monkeypatch):
    assert run(["approx", image, "--ranks", "21,2"], capsys)[0] == 2
    assert run(["approx", image, "--ranks", "x"], capsys)[0] == 2
    assert run(["approx", image, "--ranks", "2,2", "--anchor", "center", "--tshape", "2x2"], capsys)[0] == 2
    assert run(["sweep", image, "--r3", "2"], capsys)[0] == 2
    assert run(["sweep", image, "--r1", "1:4", "--mem-budget", "0.001"], capsys)[0] == 2
    monkeypatch.setenv("TALG_THREADS", "zero")
    assert run(["sweep", image, "--r1", "1:4"], capsys)[0] == 2


def test_data_errors_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.talg"
    bad.write_bytes(b"TALG1\x00\x00\x01")
    code, _, err = run(["approx", bad, "--ranks", "1"], capsys)
    assert code == 3 and "byte offset" in err
    assert run(["approx", tmp_path / "missing.png", "--ranks", "1,1"], capsys)[0] == 3


def test_random_input_uses_seed(capsys):
    a = run(["approx", "random:12x12", "--ranks", "3,3", "--seed", "1"], capsys)[1]
    b = run(["approx", "random:12x12", "--ranks", "3,3", "--seed", "1"], capsys)[1]
    c = run(["approx", "random:12x12", "--ranks", "3,3", "--seed", "2"], capsys)[1]
    assert a == b != c


def test_convert_round_trip(image, tmp_path, capsys):
    raw = tmp_path / "img.talg"
    assert run(["convert", image, raw], capsys)[0] == 0
    png = tmp_path / "back.png"
    assert run(["convert", raw, png], capsys)[0] == 0
    assert png.read_bytes()[:4] == b"\x89PNG"
    assert read_raw(raw).shape == (20, 18)


def test_save_approx(image, tmp_path, capsys):
    dst = tmp_path / "approx.talg"
    assert run(["approx", image, "--ranks", "4,4", "--save-approx", dst], capsys)[0] == 0
    assert read_raw(dst).shape == (20, 18)


def test_pca_subcommand(tmp_path, capsys):
    rng = np.random.default_rng(8)
    raw = tmp_path / "samples.talg"
    write_raw(raw, rng.uniform(0, 255, (10, 9, 3, 15)))
    code, out, _ = run(["pca", raw, "--variant", "2d2pca", "--r1", "2:4:2", "--r2", "3"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "method,algebra,transform,r1,r2,psnr_db,iters,seconds"
    assert [l.split(",")[:5] for l in lines[1:]] == [["2d2pca", "1", "none", "2", "3"],
                                                    ["2d2pca", "1", "none", "4", "3"]]
    code, out, _ = run(["pca", raw, "--variant", "t2d2pca", "--r1", "3", "--r2", "3", "--optimize"], capsys)
    assert code == 0 and out.splitlines()[1].startswith("t2d2pca-op,3x3,dft,3,3,")
    code, out, _ = run(["pca", raw, "--variant", "tpca", "--channel-tmode", "--r1", "4"], capsys)
    assert code == 0 and out.splitlines()[1].startswith("tpca,10,dft,4,")


def test_pca_on_cifar_layout(tmp_path, capsys):
    rng = np.random.default_rng(9)
    recs = rng.integers(0, 256, (6, CIFAR_RECORD), dtype=np.uint8)
    recs[:, 0] = 3
    p = tmp_path / "data_batch_1.bin"
    p.write_bytes(recs.tobytes())
    code, out, _ = run(["pca", p, "--variant", "2d2pca", "--r1", "32", "--r2", "32", "--limit", "4"], capsys)
    assert code == 0
    assert out.splitlines()[1].split(",")[5] in ("inf",) or float(out.splitlines()[1].split(",")[5]) > 150
    code, out, _ = run(["pca", p, "--variant", "tpca", "--channel-tmode", "--r1", "2"], capsys)
    assert code == 0 and out.splitlines()[1].startswith("tpca,3,dft,2,")


def test_selftest_and_console_script():
    done = subprocess.run([sys.executable, "-m", "talg.cli", "selftest"], capture_output=True, text=True)
    assert done.returncode == 0
    assert done.stdout.count("PASS") == 5
