import json
import shutil

import pytest

from varconf.cli import main

from conftest import NESTED, REPEATED


@pytest.fixture
def work(tmp_path):
    src = tmp_path / "snippet.c"
    shutil.copy(REPEATED, src)
    manifest = tmp_path / "m.json"
    assert main(["extract", str(src), "-o", str(manifest)]) == 0
    return tmp_path, src, manifest


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_extract_counts(tmp_path, capsys):
    assert main(["extract", str(REPEATED)]) == 0
    cap = capsys.readouterr()
    doc = json.loads(cap.out)
    assert len(doc["entries"]) == 3
    assert sum(e["lcu_weight"] for e in doc["entries"]) == 4
    assert "3 presence conditions, 4 code units" in cap.err
    assert main(["extract", str(NESTED)]) == 0
    assert len(json.loads(capsys.readouterr().out)["entries"]) == 3
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["extract", str(empty)]) == 0
    assert json.loads(capsys.readouterr().out)["entries"] == []


def test_max(work, capsys):
    _, _, m = work
    code, doc = run_json(capsys, ["max", str(m)])
    assert code == 0 and doc["score"] == 3
    assert doc["config"] == {"C4": False, "C5": True, "C6": False}
    code, doc = run_json(capsys, ["max", str(m), "--metric", "free:1"])
    assert doc["score"] == 2 and doc["config"] == {"C4": True, "C5": False, "C6": True}


def test_maxi_writes_files(work, capsys):
    tmp, _, m = work
    out = tmp / "cover"
    assert main(["maxi", str(m), "-o", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["configs"] == 2 and summary["cumulative_ccu"] == 1.0
    assert summary["pcs_per_config"] == [2, 1]
    assert (out / "config_1.config").read_text() == "# C4 is not set\nC5=y\n# C6 is not set\n"
    code, doc = run_json(capsys, ["maxi", str(m), "--metric", "free"])
    assert doc["summary"]["configs"] == 1


def test_maxv(work, capsys):
    _, _, m = work
    code, doc = run_json(capsys, ["maxv", str(m)])
    assert code == 0
    assert any(sorted(d["pcs"]) == ["!C5 && C6", "C4 || C5"] for d in doc)


def test_report(work, capsys):
    tmp, _, m = work
    c1 = tmp / "c1.config"
    c1.write_text("C5=y\n")
    c2 = tmp / "c2.json"
    c2.write_text('{"C4": true, "C6": true}')
    code, doc = run_json(capsys, ["report", str(m), str(c1), str(c2)])
    assert code == 0
    first, second = doc["configs"]
    assert first["pc_coverage"] == 66.67 and first["ccu"] == 75.0
    assert second["cumulative_ccu"] == 100.0
    zero = tmp / "z.config"
    zero.write_text("")
    _, doc = run_json(capsys, ["report", str(m), str(zero)])
    assert doc["configs"][0]["pc_coverage"] == 0 and doc["configs"][0]["ccu"] == 0


def test_report_unknown_variable(work, capsys):
    tmp, _, m = work
    c = tmp / "u.config"
    c.write_text("NOPE=y\nC5=y\n")
    assert main(["report", str(m), str(c)]) == 2
    capsys.readouterr()
    code, doc = run_json(capsys, ["report", str(m), str(c), "--lenient"])
    assert code == 0 and doc["configs"][0]["ccu"] == 75.0


def test_fuzz_and_seed_config(work, capsys):
    tmp, _, m = work
    code, doc = run_json(capsys, ["fuzz", str(m), "--type", "cvf", "--top", "2"])
    assert code == 0 and doc[0]["score"] == 3 and len(doc) == 2
    seed = tmp / "seed.config"
    seed.write_text("C4=y\n")
    code, doc = run_json(capsys, ["fuzz", str(m), "--seed-config", str(seed), "--cycles", "2"])
    assert code == 0 and doc[0]["score"] == 3


def test_cit(work, capsys):
    tmp, _, m = work
    arr = tmp / "a.csv"
    assert main(["cit", "generate", str(m), "--t", "2", "-o", str(arr)]) == 0
    assert arr.read_text().splitlines()[0] == "C4,C5,C6"
    code, doc = run_json(capsys, ["cit", "score", str(m), "--array", str(arr)])
    assert code == 0 and doc["best"]["score"] == 3
    bad = tmp / "bad.csv"
    bad.write_text("C4\n7\n")
    assert main(["cit", "score", str(m), "--array", str(bad)]) == 2


def test_verify(work, capsys):
    _, src, m = work
    code, doc = run_json(capsys, ["verify", str(m), "--source", str(src)])
    assert code == 0 and doc["ok"]
    assert [c["check"] for c in doc["checks"]] == ["maxsat", "min_cover", "extract"]


def test_wcnf(work, capsys):
    _, _, m = work
    assert main(["wcnf", str(m)]) == 0
    assert capsys.readouterr().out.startswith("p wcnf")


def test_costs_metric(work, capsys):
    tmp, src, m = work
    costs = tmp / "c.json"
    costs.write_text(json.dumps({f"{src}:6": 5}))
    code, doc = run_json(capsys, ["max", str(m), "--metric", f"costs:{costs}"])
    assert doc["score"] == 5


def test_exit_codes(work, tmp_path, capsys):
    _, _, m = work
    assert main(["max", str(m), "--metric", "bogus"]) == 1
    assert main(["max", str(tmp_path / "missing.json")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["max", str(bad)]) == 2
    src = tmp_path / "u.c"
    src.write_text("#if A\nx\n")
    assert main(["extract", str(src)]) == 2
    doc = json.loads(m.read_text())
    doc["feature_model"] = "C5 && !C5"
    unsat = tmp_path / "unsat.json"
    unsat.write_text(json.dumps(doc))
    assert main(["max", str(unsat)]) == 3
    assert main(["fuzz", str(m), "--cycles", "0"]) == 1


COMMANDS = [
    ["max"], ["maxi"], ["maxv"], ["wcnf"], ["fuzz", "--type", "cvf"], ["fuzz", "--type", "spcf"],
    ["fuzz", "--type", "pcf", "--afl-windows"],
]


@pytest.mark.parametrize("cmd", COMMANDS, ids=lambda c: "-".join(c))
def test_outputs_byte_identical(work, cmd):
    tmp, _, m = work
    outs = []
    for k in range(2):
        d = tmp / f"run{k}"
        argv = [cmd[0], str(m), *cmd[1:], "-o", str(d)]
        if cmd[0] == "fuzz":
            argv += ["--rng-seed", "7"]
        assert main(argv) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0] == outs[1] and outs[0]
