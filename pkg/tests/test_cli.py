import csv
import io
import json

import pytest

from nested_qsearch.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    return meta, rows


@pytest.fixture
def triangle_file(tmp_path, capsys):
    path = tmp_path / "tri.json"
    assert run(capsys, "generate", "graph", "--nodes", "3", "--edges", "0,1", "1,2", "0,2",
               "--colors", "3", "-o", str(path))[0] == 0
    return path


@pytest.fixture
def triangle2_file(tmp_path, capsys):
    path = tmp_path / "tri2.json"
    run(capsys, "generate", "graph", "--nodes", "3", "--edges", "0,1", "1,2", "0,2", "--colors", "2", "-o", str(path))
    return path


def test_generate_graph(triangle_file):
    data = json.loads(triangle_file.read_text())
    assert len(data["nogoods"]) == 9 and data["b"] == 3


def test_generate_random_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "generate", "random", "--mu", "8", "--b", "2", "--k", "2", "--xi", "22",
                   "--seed", "7", "-o", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(json.loads(a.read_text())["nogoods"]) == 22


def test_generate_refuses_overwrite(triangle_file, capsys):
    code, _, err = run(capsys, "generate", "graph", "--nodes", "2", "--colors", "2", "-o", str(triangle_file))
    assert code == 1 and "exists" in err
    assert run(capsys, "generate", "graph", "--nodes", "2", "--colors", "2", "-o", str(triangle_file), "--force")[0] == 0


def test_generate_bad_xi(capsys):
    code, _, err = run(capsys, "generate", "random", "--mu", "4", "--b", "2", "--k", "2", "--xi", "99")
    assert code == 2 and "xi" in err


def test_generate_bad_edge(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "graph", "--nodes", "3", "--edges", "0-1", "--colors", "3"])
    assert exc.value.code == 1


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_missing_instance_file(tmp_path, capsys):
    assert run(capsys, "solve", str(tmp_path / "nope.json"))[0] == 2


def test_solve_nested_self_consistent(triangle_file, capsys):
    code, out, _ = run(capsys, "solve", str(triangle_file), "--cut", "2", "--reps", "200", "--seed", "3")
    assert code == 0
    meta, rows = parse(out)
    summary = meta["summary"]
    assert summary["runs"] == 200 == len(rows)
    assert abs(summary["z_score"]) <= 3
    assert summary["exact_success_probability"] == pytest.approx(50 / 81)
    assert len({r["config_sha"] for r in rows}) == 1
    assert [int(r["rep"]) for r in rows] == list(range(200))


@pytest.mark.parametrize("engine", ["quantum-nested", "quantum-unstructured", "classical"])
def test_solve_unsatisfiable(triangle2_file, capsys, engine):
    code, out, err = run(capsys, "solve", str(triangle2_file), "--engine", engine, "--reps", "3")
    assert code == 0
    meta, rows = parse(out)
    assert meta["summary"]["successes"] == 0
    assert meta["summary"]["status"] == "no solution found"
    assert "no solution found" in err


def test_solve_classical_unconstrained(tmp_path, capsys):
    path = tmp_path / "free.json"
    run(capsys, "generate", "graph", "--nodes", "5", "--colors", "2", "-o", str(path))
    code, out, _ = run(capsys, "solve", str(path), "--engine", "classical", "--cut", "2", "--reps", "10")
    _, rows = parse(out)
    assert code == 0
    assert all(int(r["total_iterations"]) <= 1 + 2**3 for r in rows)


def test_solve_json_and_output_file(triangle_file, tmp_path, capsys):
    out_path = tmp_path / "res.json"
    assert run(capsys, "solve", str(triangle_file), "--format", "json", "--mode", "analytic",
               "--max-repetitions", "5", "-o", str(out_path))[0] == 0
    data = json.loads(out_path.read_text())
    assert data["config"]["mode"] == "analytic"
    assert data["runs"][0]["schedule"]["mode"] == "analytic-counts"


def test_solve_is_byte_identical(triangle_file, capsys):
    args = ("solve", str(triangle_file), "--reps", "20", "--seed", "11")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_solve_guard_env(triangle_file, capsys, monkeypatch):
    monkeypatch.setenv("NESTED_QSEARCH_GUARD", "8")
    code, _, err = run(capsys, "solve", str(triangle_file))
    assert code == 2 and "statevector" in err


def test_scaling_table(capsys):
    code, out, _ = run(capsys, "scaling", "--k", "2", "--ratio", "1", "--depth", "1", "2", "3")
    assert code == 0
    _, rows = parse(out)
    assert [r["alpha_0"] for r in rows] == ["0.618", "0.484", "0.416"]
    assert [rows[2][f"x_{n}"] for n in range(4)] == ["1.000", "0.764", "0.590", "0.416"]
    assert [rows[2][f"alpha_{n}"] for n in range(4)] == ["0.416", "0.545", "0.706", "1.000"]
    assert rows[1]["x_1"] == "0.718" and rows[1]["alpha_1"] == "0.674" and rows[1]["x_2"] == "0.484"
    assert rows[0]["x_2"] == "-"


def test_scaling_depth_cap(capsys):
    assert run(capsys, "scaling", "--depth", "9")[0] == 2


def test_sweep_zero_ratio(capsys):
    code, out, _ = run(capsys, "sweep", "--ratio", "0")
    _, rows = parse(out)
    assert code == 0
    assert {r["alpha_0"] for r in rows} == {"1.0"}
    assert {r["x_star"] for r in rows} == {"1.0"}


def test_sweep_minima(capsys):
    _, out, _ = run(capsys, "sweep", "--mu", "10", "--b", "2", "--ratio", "1")
    _, rows = parse(out)
    assert len(rows) == 11
    assert [r["i"] for r in rows if r["min_T_c"] == "1"] == ["6"]
    # T_q(7) = 17.170 edges out T_q(6) = 17.190
    assert [r["i"] for r in rows if r["min_T_q"] == "1"] == ["7"]
    assert float(rows[6]["T_q"]) == pytest.approx(17.19, abs=5e-3)


def test_sweep_multiple_ratios(capsys):
    _, out, _ = run(capsys, "sweep", "--mu", "6", "--ratio", "0.5", "1", "2", "--depth", "2")
    meta, rows = parse(out)
    assert len(rows) == 21
    assert meta["config"]["ratio"] == [0.5, 1.0, 2.0]


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "--only", "depth-table-regression", "golden-ratio-cut")
    assert code == 0
    assert out.count("PASS") == 2 and "2/2 checks passed" in out


def test_verify_unknown_check(capsys):
    assert run(capsys, "verify", "--only", "nope")[0] == 1
