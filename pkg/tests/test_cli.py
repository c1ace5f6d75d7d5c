import csv
import io
import json
import math

import pytest

from paralab import __version__, cli
from paralab.lacunary import generate_admissible


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    body = [line for line in text.splitlines() if line and not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_lacunary_exit_codes(capsys):
    code, out, _ = run(capsys, "lacunary", "--points", "5", "--d", "0", "--b", "0")
    assert code == 0 and json.loads(out)["status"] == "lacunary"
    code, out, _ = run(capsys, "lacunary", "--points", ",".join(map(str, range(10))), "--d", "1", "--b", "0",
                       "--mode", "exhaustive")
    assert code == 1 and "not_lacunary" in out
    code, out, _ = run(capsys, "lacunary", "--points", ",".join(map(str, range(30))), "--d", "2", "--b", "1",
                       "--mode", "exhaustive")
    assert code == 3 and "undecided" in out
    code, _, err = run(capsys, "lacunary", "--points", "1/2^x", "--d", "1")
    assert code == 2 and err


def test_output_carries_version_and_config_hash(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"d": 0, "b": 0}))
    code, out, _ = run(capsys, "lacunary", "--points", "1/2^3", "--config", str(cfg))
    assert code == 0
    prov = json.loads(out)["provenance"]
    assert prov["version"] == __version__ and len(prov["config"]) == 16
    _, again, _ = run(capsys, "lacunary", "--points", "1/2^3", "--config", str(cfg))
    assert again == out
    _, other, _ = run(capsys, "lacunary", "--points", "1/2^3", "--d", "0", "--b", "1")
    assert json.loads(other)["provenance"]["config"] != prov["config"]


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    with pytest.raises(SystemExit) as exc:
        cli.main(["lacunary", "--points", "1", "--config", str(cfg)])
    assert exc.value.code == 2


def test_verify_lemmas(capsys):
    code, out, _ = run(capsys, "verify-lemmas", "--seeds", "3", "--db", "2,2;3,4", "--J", "12")
    assert code == 0
    assert out.splitlines()[0] == f"# paralab {__version__}"
    table = rows(out)
    assert len(table) == 6 and all(r["violations"] == "0" for r in table)


def test_verify_lemmas_rejects_corrupted_sequences(capsys, tmp_path):
    obj = generate_admissible(6, 2, 2, 0).to_json()
    obj["xi"][1] = obj["xi"][0]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(obj))
    code, _, err = run(capsys, "verify-lemmas", "--input", str(path))
    assert code == 2 and err


def test_norm_unit_family(capsys, tmp_path):
    svg = tmp_path / "plot.svg"
    code, out, _ = run(capsys, "norm", "--family", "unit", "--J", "2,4", "--N", "64", "--restarts", "2",
                       "--iterations", "30", "--svg", str(svg))
    assert code == 0
    ratios = [float(r["best_ratio"]) for r in rows(out) if r["family"] == "unit"]
    assert len(ratios) == 2 and all(abs(x - 1) < 1e-9 for x in ratios)
    assert "slope" in out and svg.read_text().startswith("<svg")


def test_norm_rejects_exponents_outside_local_range(capsys):
    code, _, err = run(capsys, "norm", "--family", "unit", "--p", "2,4,4", "--J", "2", "--N", "32")
    assert code == 2 and err
    code, _, _ = run(capsys, "norm", "--family", "unit", "--p", "2,4,4", "--unsafe-exponents", "--J", "2",
                     "--N", "32", "--restarts", "1", "--iterations", "5")
    assert code == 0


def test_norm_is_deterministic(capsys):
    argv = ("norm", "--family", "exp_staircase", "--J", "3,4", "--N", "64", "--restarts", "1", "--iterations", "5")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_sqfn_and_lepingle(capsys):
    code, out, _ = run(capsys, "sqfn", "--N", "64", "--trials", "2", "--intervals=-64:64")
    assert code == 0
    assert all(math.isclose(float(r["ratio"]), 1, rel_tol=1e-12) for r in rows(out) if r["N"] == "64")
    code, _, _ = run(capsys, "sqfn", "--N", "64", "--p", "2")
    assert code == 2
    code, out, _ = run(capsys, "lepingle", "--N", "64,128", "--trials", "2")
    assert code == 0 and "slope" in out
    code, _, _ = run(capsys, "lepingle", "--N", "64", "--r", "2")
    assert code == 2


def test_signal_io_round_trip(capsys, tmp_path):
    csv_path, bin_path = tmp_path / "s.csv", tmp_path / "s.bin"
    code, _, _ = run(capsys, "signal-io", "generate", "--kind", "random_trig", "--N", "32", "--out", str(csv_path))
    assert code == 0 and csv_path.exists()
    code, _, _ = run(capsys, "signal-io", "convert", "--input", str(csv_path), "--out", str(bin_path))
    assert code == 0 and bin_path.stat().st_size == 12 + 16 * 32
