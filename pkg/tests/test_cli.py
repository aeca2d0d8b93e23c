import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from minhashlaw.cli import RunConfig, main
from minhashlaw.exactlaw import DistributionTable
from minhashlaw.hashing import CoefficientLaw
from minhashlaw.itemsets import Universe, build_rum_matrix, matrix_similarity, shingle_many, simM_to_sim


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


@pytest.fixture
def texts(tmp_path):
    paths = {}
    for name, body in {"a": "abcd", "b": "bcde", "c": "abcd", "d": "wxyz"}.items():
        p = tmp_path / f"{name}.txt"
        p.write_text(body, encoding="utf-8")
        paths[name] = str(p)
    return paths


@pytest.fixture
def itemsets(tmp_path):
    u = Universe.of_size(3)
    out = []
    for name, members in (("x", [1, 2]), ("y", [2, 3])):
        p = tmp_path / f"{name}.json"
        p.write_text(u.itemset(members).to_json(), encoding="utf-8")
        out.append(str(p))
    return out


def test_sim_examples(texts):
    code, out = run("sim", texts["a"], texts["b"], texts["c"], texts["d"], "--format", "json")
    assert code == 0
    rows = {(r["a"], r["b"]): r for r in json.loads(out)["rows"]}
    assert rows[("a.txt", "b.txt")]["sim"] == "1/3"
    assert rows[("a.txt", "b.txt")]["simM"] == "1/2"
    assert rows[("a.txt", "c.txt")]["sim"] == "1"
    assert rows[("a.txt", "d.txt")]["sim"] == "0"


def test_sim_agrees_with_doubled_matrix(texts):
    code, out = run("sim", texts["a"], texts["b"], texts["d"], "--format", "json")
    sets = shingle_many(["abcd", "bcde", "wxyz"], 3)
    rows = json.loads(out)["rows"]
    for r, (i, j) in zip(rows, [(0, 1), (0, 2), (1, 2)]):
        back = simM_to_sim(matrix_similarity(build_rum_matrix(sets[i], sets[j]), 1, 2))
        assert Fraction(r["sim"]) == back


def test_sim_csv(texts):
    code, out = run("sim", texts["a"], texts["b"], "--format", "csv")
    assert out.splitlines() == ["a,b,sim,simM", "a.txt,b.txt,1/3,1/2"]


def test_estimate_identical_files(texts):
    code, out = run("estimate", texts["a"], texts["c"], "--format", "json", "--with-exact")
    data = json.loads(out)
    assert data["rows"][0]["recovered_sim"] == "1"
    assert data["rows"][0]["error"] == "0"
    assert data["hash"] == "permutation"


@pytest.mark.parametrize("mode", ["min", "max"])
@pytest.mark.parametrize("hash_", ["linear", "permutation"])
def test_estimate_is_deterministic(texts, mode, hash_):
    args = ("estimate", texts["a"], texts["b"], texts["d"], "--format", "csv", "--mode", mode, "--hash", hash_)
    assert run(*args, "--seed", "3")[1] == run(*args, "--seed", "3")[1]


def test_seed_from_environment(texts, monkeypatch):
    args = ("estimate", texts["a"], texts["b"], "--format", "csv", "--k", "40")
    monkeypatch.setenv("MINHASH_SEED", "12")
    env_out = run(*args)[1]
    assert env_out == run(*args, "--seed", "12")[1]


def test_law_permutation_scheme_example(itemsets):
    code, out = run("law", *itemsets, "--hash", "permutation", "--k", "2", "--format", "json")
    assert code == 0
    assert DistributionTable.from_json(out).probs == (Fraction(4, 9), Fraction(4, 9), Fraction(1, 9))


def test_law_both_modes_reports_difference(tmp_path):
    u = Universe.of_size(4)
    files = []
    for name, members in (("p", [1]), ("q", [1, 2])):
        path = tmp_path / f"{name}.json"
        path.write_text(u.itemset(members).to_json(), encoding="utf-8")
        files.append(str(path))
    code, out = run("law", *files, "--hash", "linear", "--k", "3", "--law-mode", "both", "--format", "json")
    data = json.loads(out)
    assert data["tv_product_vs_mixture"] == "25/2304"


def test_law_with_law_file(itemsets, tmp_path):
    law = tmp_path / "law.json"
    law.write_text(CoefficientLaw.point_mass(3, 1).to_json(), encoding="utf-8")
    code, out = run("law", *itemsets, "--hash", "linear", "--law", str(law), "--k", "2", "--format", "json")
    assert DistributionTable.from_json(out).probs[-1] == 1


def test_enumeration_limit_refusal(tmp_path, capsys):
    u = Universe.of_size(8)
    files = []
    for name, members in (("p", [1, 2, 3, 4]), ("q", [5, 6, 7, 8])):
        path = tmp_path / f"{name}.json"
        path.write_text(u.itemset(members).to_json(), encoding="utf-8")
        files.append(str(path))
    code, _ = run("law", *files)
    assert code == 1
    assert "limit 7" in capsys.readouterr().err


def test_ci_on_degenerate_table(tmp_path):
    table = tmp_path / "t.json"
    table.write_text(DistributionTable.degenerate(3, 2).to_json(), encoding="utf-8")
    code, out = run("ci", "--table", str(table), "--format", "json")
    row = json.loads(out)["rows"][0]
    assert row["eps"] == "0" and row["center"] == "2/3"


def test_ci_example(tmp_path):
    table = tmp_path / "t.json"
    table.write_text(DistributionTable.binomial(2, Fraction(1, 3)).to_json(), encoding="utf-8")
    code, out = run("ci", "--table", str(table), "--center", "1/3", "--format", "json")
    assert json.loads(out)["rows"][0]["eps"] == "2/3"


def test_simulate_small_case(itemsets):
    code, out = run("simulate", *itemsets, "--k", "3", "--trials", "50000", "--format", "json")
    data = json.loads(out)
    assert data["comparison"]["pass"] is True
    assert sum(r["count"] for r in data["rows"]) == 50000


def test_convergence_csv(tmp_path):
    u = Universe.of_size(200)
    files = []
    for name, members in (("p", range(1, 121)), ("q", range(60, 181))):
        path = tmp_path / f"{name}.json"
        path.write_text(u.itemset(members).to_json(), encoding="utf-8")
        files.append(str(path))
    code, out = run("convergence", *files, "--sizes", "10,20,40", "--replications", "50", "--format", "csv")
    assert out.splitlines()[0] == "n1,n2,mean_abs_err"
    assert len(out.splitlines()) == 4


@pytest.mark.parametrize(
    "argv",
    [
        ["sim"],
        ["sim", "/nonexistent/file.txt", "/nonexistent/other.txt"],
        ["estimate", "--k", "0", "x", "y"],
        ["law", "--enum-limit", "10", "x", "y"],
    ],
)
def test_errors_give_exit_code_one(argv, capsys):
    code, _ = run(*argv)
    assert code == 1
    assert capsys.readouterr().err.startswith("minhashlaw: error:")


def test_empty_shingle_set_is_an_error(tmp_path, capsys):
    short = tmp_path / "s.txt"
    short.write_text("ab", encoding="utf-8")
    code, _ = run("sim", str(short), str(short))
    assert code == 1


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig("sim", p=0)
    with pytest.raises(ValueError):
        RunConfig("sim", trials=0)


def test_module_entry_point(texts):
    proc = subprocess.run(
        [sys.executable, "-m", "minhashlaw", "sim", texts["a"], texts["b"]],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert "1/3" in proc.stdout
