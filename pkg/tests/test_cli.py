import json

import pytest

from cluster_decoder.cli import EXIT_INCONSISTENT, main
from cluster_decoder.css_code import CssCode, load_code, save_alist, save_code
from cluster_decoder.erasure_sim import read_results_csv
from cluster_decoder.gf2_linalg import BitMatrix, BitVector, mat_vec_mul_t


@pytest.fixture
def rep3_dir(tmp_path):
    assert main(["hgp", "--repetition", "3", "--out", str(tmp_path / "rep3")]) == 0
    return tmp_path / "rep3"


@pytest.fixture
def forest_dir(tmp_path, forest_h):
    d = tmp_path / "forest"
    save_code(CssCode(forest_h, BitMatrix.zeros(0, 8)), d, name="forest")
    return d


def test_hgp_repetition(tmp_path, capsys):
    assert main(["hgp", "--repetition", "3", "--out", str(tmp_path / "c")]) == 0
    assert capsys.readouterr().out.strip() == "[[13,1]]"
    code = load_code(tmp_path / "c")
    assert (code.n, code.k) == (13, 1)


def test_hgp_regular(tmp_path, capsys):
    assert main(["hgp", "--regular", "32", "3", "4", "--code-seed", "0", "--out", str(tmp_path / "c")]) == 0
    assert capsys.readouterr().out.strip() == "[[1600,64]]"


def test_hgp_from_alist(tmp_path, capsys):
    save_alist(BitMatrix.from_rows([[1, 1, 0], [0, 1, 1]]), tmp_path / "rep.alist")
    assert main(["hgp", "--alist", str(tmp_path / "rep.alist"), "--out", str(tmp_path / "c")]) == 0
    assert capsys.readouterr().out.strip() == "[[13,1]]"


def test_hgp_missing_file(tmp_path, capsys):
    missing = tmp_path / "nope.alist"
    with pytest.raises(SystemExit) as e:
        main(["hgp", "--alist", str(missing), "--out", str(tmp_path / "c")])
    assert e.value.code == 1
    assert str(missing) in capsys.readouterr().err


def test_hgp_parse_error_names_line(tmp_path, capsys):
    bad = tmp_path / "bad.alist"
    bad.write_text("3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 9\n")
    with pytest.raises(SystemExit):
        main(["hgp", "--alist", str(bad), "--out", str(tmp_path / "c")])
    assert f"{bad}:9:" in capsys.readouterr().err


def test_simulate_outputs(rep3_dir, tmp_path, capsys):
    out = tmp_path / "run.csv"
    argv = ["simulate", "--code", str(rep3_dir), "--decoder", "peeling", "--rates", "0,0.3",
            "--trials", "200", "--seed", "3", "--out", str(out)]
    assert main(argv) == 0
    rows = read_results_csv(out.read_text())
    assert rows[0][:2] == (0.0, 0.0)
    side = json.loads(out.with_suffix(".json").read_text())
    m = side["manifest"]
    assert m["command"] == argv and m["master_seed"] == 3
    assert m["code"] == {"name": "hgp_13_1", "n": 13, "k": 1}
    assert len(side["results"]["rates"]) == 2
    assert "p=0.3000" in capsys.readouterr().out


def test_simulate_bound_monotone(rep3_dir, tmp_path):
    fails = {}
    for bound in ("2", "inf"):
        out = tmp_path / f"c{bound}.csv"
        main(["simulate", "--code", str(rep3_dir), "--decoder", "cluster", "--max-cluster-size", bound,
              "--rates", "0.45", "--trials", "400", "--out", str(out)])
        fails[bound] = json.loads(out.with_suffix(".json").read_text())["results"]["rates"][0]["failures"]
    assert fails["inf"] <= fails["2"]


@pytest.mark.parametrize(
    "extra",
    [
        ["--decoder", "cluster"],
        ["--decoder", "bp"],
        ["--decoder", "peeling", "--max-cluster-size", "4"],
        ["--decoder", "cluster", "--max-cluster-size", "big"],
        ["--decoder", "peeling", "--rates", "1.5"],
    ],
)
def test_simulate_usage_errors(rep3_dir, tmp_path, extra):
    argv = ["simulate", "--code", str(rep3_dir), "--rates", "0.1", "--trials", "10",
            "--out", str(tmp_path / "x.csv"), *extra]
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


def test_simulate_missing_code(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["simulate", "--code", str(tmp_path / "none"), "--decoder", "peeling", "--rates", "0.1",
              "--trials", "5", "--out", str(tmp_path / "x.csv")])
    assert e.value.code == 1 and "none" in capsys.readouterr().err


def write_vectors(path, vectors):
    path.write_text("".join(v.to_string() + "\n" for v in vectors))
    return str(path)


def test_decode_empty_erasure(rep3_dir, tmp_path, capsys):
    eps = write_vectors(tmp_path / "e.txt", [BitVector.zeros(13)])
    syn = write_vectors(tmp_path / "s.txt", [BitVector.zeros(6)])
    assert main(["decode", "--code", str(rep3_dir), "--decoder", "peeling", "--erasure", eps, "--syndrome", syn]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("vector 0: found peelable=true")
    assert out[1] == "0" * 13


def test_decode_cluster_instance(forest_dir, forest_h, tmp_path, capsys):
    x = BitVector.from_indices(8, [0, 2, 6])
    eps = write_vectors(tmp_path / "e.txt", [BitVector.ones(8)])
    syn = write_vectors(tmp_path / "s.txt", [mat_vec_mul_t(forest_h, x)])
    out_file = tmp_path / "xhat.txt"
    assert main(["decode", "--code", str(forest_dir), "--decoder", "cluster", "--max-cluster-size", "inf",
                 "--erasure", eps, "--syndrome", syn, "--out", str(out_file), "--dump-forest"]) == 0
    out = capsys.readouterr().out
    status = [line for line in out.splitlines() if line.startswith("vector")][0]
    sizes = sorted(int(t) for t in status.split("cluster_sizes=")[1].split()[0].split(","))
    assert sizes == [1, 1, 2, 2, 3]
    assert out.count("\ncluster ") + out.startswith("cluster ") == 5
    x_hat = BitVector.from_string(out_file.read_text().strip())
    assert mat_vec_mul_t(forest_h, x_hat) == mat_vec_mul_t(forest_h, x)

    assert main(["decode", "--code", str(forest_dir), "--decoder", "cluster", "--max-cluster-size", "2",
                 "--erasure", eps, "--syndrome", syn, "--out", str(out_file)]) == 0
    assert "oversize" in capsys.readouterr().out
    assert out_file.read_text() == "none\n"


def test_decode_inconsistent(rep3_dir, tmp_path, capsys):
    eps = write_vectors(tmp_path / "e.txt", [BitVector.zeros(13)])
    syn = write_vectors(tmp_path / "s.txt", [BitVector.from_indices(6, [0])])
    rc = main(["decode", "--code", str(rep3_dir), "--decoder", "gaussian", "--erasure", eps, "--syndrome", syn])
    assert rc == EXIT_INCONSISTENT
    assert "inconsistent syndrome" in capsys.readouterr().err


def test_decode_wrong_length(rep3_dir, tmp_path, capsys):
    eps = write_vectors(tmp_path / "e.txt", [BitVector.zeros(12)])
    syn = write_vectors(tmp_path / "s.txt", [BitVector.zeros(6)])
    with pytest.raises(SystemExit) as e:
        main(["decode", "--code", str(rep3_dir), "--decoder", "peeling", "--erasure", eps, "--syndrome", syn])
    assert e.value.code == 1 and "expected 13 bits" in capsys.readouterr().err


def test_stats_columns(rep3_dir, tmp_path):
    out = tmp_path / "stats.csv"
    assert main(["stats", "--code", str(rep3_dir), "--rates", "0,0.4,0.8", "--trials", "200", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "rate,not_peelable_fraction,smax_gt_10,smax_gt_20,smax_gt_50,smax_gt_100,smax_gt_200"
    zero = lines[1].split(",")
    assert float(zero[0]) == 0.0 and all(float(v) == 0.0 for v in zero[1:])
    not_peelable = [float(line.split(",")[1]) for line in lines[1:]]
    assert not_peelable == sorted(not_peelable)


def test_replay_is_byte_identical(rep3_dir, tmp_path):
    first = tmp_path / "a.csv"
    main(["simulate", "--code", str(rep3_dir), "--decoder", "cluster", "--max-cluster-size", "3",
          "--rates", "0.2,0.4", "--trials", "300", "--seed", "9", "--out", str(first)])
    second = tmp_path / "b.csv"
    assert main(["replay", str(first.with_suffix(".json")), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
