import json

import jsonschema
import pytest

from torus_recur.cli import RunConfig, build_parser, config_from_args, main, schema


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _json(capsys, *argv):
    code, out, err = _run(capsys, *argv)
    assert code == 0, err
    rec = json.loads(out)
    jsonschema.validate(rec, schema())
    return rec


def test_analyze_cat(capsys):
    rec = _json(capsys, "analyze")
    r = rec["result"]
    assert (r["det"], r["trace"], r["D"]) == (1, 3, 5)
    assert r["logLambda"].startswith("0.96242365011920689499551782684")
    assert "normalization" not in rec


def test_analyze_normalizes(capsys):
    rec = _json(capsys, "analyze", "-m", "1,1,1,0")
    assert rec["result"]["normalization_exponent"] == 2
    assert rec["result"]["normalized_matrix"] == [2, 1, 1, 1]
    assert "square" in rec["normalization"]


@pytest.mark.parametrize(
    "argv,code",
    [
        (["analyze", "-m", "1,1,0,1"], 2),
        (["analyze", "-m", "1,2,3"], 1),
        (["analyze", "-m", "a,b,c,d"], 1),
        (["periodic", "-n", "2", "--cap", "3"], 3),
        (["periodic", "-n", "0"], 1),
        (["periodic"], 1),
        (["nonsense"], 1),
    ],
)
def test_exit_codes(capsys, argv, code):
    if argv == ["nonsense"]:
        with pytest.raises(SystemExit) as e:
            main(argv)
        assert e.value.code == code
        return
    got, _, err = _run(capsys, *argv)
    assert got == code and err.startswith("torus-recur:")


def test_periodic_points(capsys):
    rec = _json(capsys, "periodic", "-n", "2")
    pts = {tuple(p) for p in rec["result"]["points"]}
    assert rec["result"]["count"] == 5
    assert pts == {("0", "0"), ("1/5", "2/5"), ("2/5", "4/5"), ("3/5", "1/5"), ("4/5", "3/5")}
    assert _json(capsys, "periodic", "-n", "7", "--count-only")["result"]["count"] == 841
    assert _json(capsys, "periodic", "-n", "5", "--check-lattice")["result"]["status"] == "PASS"
    code, out, _ = _run(capsys, "periodic", "-n", "2", "--format", "csv")
    assert out.splitlines()[0] == "x,y" and "\r\n" in out


def test_curve_csv(capsys):
    code, out, _ = _run(capsys, "curve", "--format", "csv", "--alpha-grid", "0.5:1.5:3")
    lines = out.strip().splitlines()
    assert lines[0] == "alpha,s0,s1,branch"
    assert len(lines) == 4
    assert lines[1].endswith("parallelogram-covering") and lines[3].endswith("ball-covering")


def test_energy_byte_stable(capsys):
    argv = ["energy", "-n", "5", "-s", "1.0", "--alpha", "1.0", "--samples", "200000"]
    a = _run(capsys, *argv)[1]
    b = _run(capsys, *argv)[1]
    assert a == b
    rec = json.loads(a)
    jsonschema.validate(rec, schema())
    assert rec["runtimeMs"] is None and rec["seed"] == 42 and rec["stderr"] > 0
    timed = _json(capsys, *argv, "--timing")
    assert timed["runtimeMs"] > 0 and timed["estimate"] == rec["estimate"]


def test_energy_1d(capsys):
    rec = _json(capsys, "energy", "--dim", "1", "-n", "9", "-s", "0.4", "--alpha", "0.3")
    assert rec["stderr"] == 0 and rec["estimate"] > 1


def test_runtime_guard(capsys):
    code, _, err = _run(capsys, "energy", "-n", "21", "-s", "1.0", "--samples", "100000000000")
    assert code == 3 and "--force" in err


def test_slice_separation_covering(capsys):
    sl = _json(capsys, "slice", "-n", "9", "--alpha", "0.3", "--intervals")
    (row,) = sl["result"]["rows"]
    assert row["M"] == len(row["intervals"]) > 0
    sep = _json(capsys, "separation", "-n", "3:7:2")
    assert len(sep["result"]["rows"]) == 3
    cov = _json(capsys, "covering", "-n", "20:22", "-s", "1.2", "--alpha", "0.5")
    assert len(cov["result"]["rows"]) == 3


def test_uniformity_and_disintegration(capsys):
    u = _json(capsys, "uniformity", "-n", "7", "--balls", "3", "--radius", "0.3", "--samples", "2000")
    assert len(u["result"]["ratios"]) == 3
    d = _json(capsys, "disintegration", "--family", "uniform", "-s", "0.3", "-t", "0.3", "--points", "5")
    assert d["result"]["all_hold"]


def test_boxcount_small(capsys, tmp_path):
    out = tmp_path / "bc.csv"
    code, _, err = _run(capsys, "boxcount", "-n", "3:5", "--alpha", "1.0", "--format", "csv", "--out", str(out))
    assert code == 0, err
    text = out.read_bytes().decode()
    assert text.startswith("n,delta,count\r\n")


def test_rates_file(capsys, tmp_path):
    p = tmp_path / "rates.txt"
    p.write_text("\n".join(str(0.5**n) for n in range(1, 41)) + "\n")
    rec = _json(capsys, "slice", "-n", "9", "--rates", str(p))
    assert rec["params"]["rates_path"] == str(p)
    bad = tmp_path / "bad.txt"
    bad.write_text("x\n")
    assert _run(capsys, "slice", "-n", "9", "--rates", str(bad))[0] == 1
    assert _run(capsys, "slice", "-n", "9", "--rates", str(tmp_path / "missing"))[0] == 1


def test_runconfig_roundtrip():
    ns = build_parser().parse_args(["energy", "-n", "5", "-s", "0.7", "--sampler", "pairs", "--alpha", "0.4"])
    cfg = config_from_args(ns)
    back = RunConfig.from_json(json.loads(cfg.canonical()))
    assert back == cfg and back.canonical() == cfg.canonical()
    assert cfg.params() == {"matrix": [2, 1, 1, 1], "alpha": 0.4, "n": [5], "dim": 2, "s": 0.7,
                            "x0": 0.3, "sampler": "pairs"}


def test_range_parsing():
    ns = build_parser().parse_args(["separation", "-n", "3:9:2"])
    assert config_from_args(ns).ns == (3, 5, 7, 9)
