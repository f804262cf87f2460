from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from syzygies.bounds import REFUTED, Interval, VanishingClaim, VerificationReport
from syzygies.cache import ResultCache, entry_key
from syzygies.cli import _report_out, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_betti_json(capsys, cache_dir):
    code, out, _ = run(capsys, "betti", "--spaces", "1", "--b", "0", "--l", "3", "--pmax", "3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"spaces", "b", "l", "prime", "entries", "meta"}
    assert {"p": 1, "q": 1, "dim": 3} in doc["entries"]
    assert doc["prime"] == 32003 and doc["spaces"] == [1]


def test_betti_table_text(capsys, cache_dir):
    code, out, _ = run(capsys, "betti", "--spaces", "1,1", "--b", "0,0", "--l", "2,2", "--pmax", "3")
    assert code == 0
    rows = {line.split()[0]: line.split()[1:] for line in out.splitlines()[2:]}
    assert rows["q=2"] == [".", ".", ".", "."]
    assert rows["q=1"] == [".", "20", "64", "90"]


def test_betti_single_entry(capsys, cache_dir):
    code, out, _ = run(capsys, "betti", "--spaces", "2", "--b", "0", "--l", "3", "--pmax", "0", "--q", "0",
                       "--format", "csv")
    assert code == 0 and out == "p,q,dim\n0,0,1\n"


def test_json_deterministic_across_threads_and_cache(capsys, cache_dir):
    args = ["betti", "--spaces", "2", "--b", "0", "--l", "3", "--format", "json"]
    outs = [run(capsys, *args, "--threads", t)[1] for t in ("1", "8")]
    outs.append(run(capsys, *args, "--no-cache")[1])
    assert outs[0] == outs[1] == outs[2]


def test_argument_errors_exit_1(capsys, cache_dir):
    for argv in (["betti", "--spaces", "1,2", "--b", "0", "--l", "3"],
                 ["betti", "--spaces", "1", "--b", "0", "--l", "3", "--prime", "10"],
                 ["betti", "--spaces", "1", "--b", "0", "--l", "3", "--pmax", "-1"],
                 ["betti", "--spaces", "1", "--b", "0", "--l", "0"],
                 ["verify", "thm-main", "--spaces", "2", "--b", "-9", "--l", "4", "--q", "2"],
                 ["verify", "op-range"]):
        code, _, err = run(capsys, *argv)
        assert code == 1, argv
        assert "usage" in err and "Traceback" not in err
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1


def test_resource_cap_exit_2(capsys, cache_dir):
    code, out, err = run(capsys, "betti", "--spaces", "3", "--b", "0", "--l", "3", "--pmax", "3",
                         "--basis-cap", "1000", "--no-cache")
    assert code == 2
    assert "entry (" in err and "basis elements" in err and "?" in out


def test_verify_commands(capsys, cache_dir):
    code, out, _ = run(capsys, "verify", "thm-main", "--spaces", "2", "--b", "0", "--l", "4", "--q", "2")
    assert code == 0 and "confirmed" in out
    code, out, _ = run(capsys, "verify", "op-range", "--d", "3", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "confirmed"
    assert {"p": 7, "q": 2, "dim": 1} in doc["entries"]
    code, out, _ = run(capsys, "verify", "duality", "--n", "2", "--b", "0", "--d", "3", "--p", "7", "--q", "2")
    assert code == 0 and "= 1" in out
    code, _, _ = run(capsys, "verify", "eel-range", "--n", "2", "--d", "3", "--q", "1")
    assert code == 4
    code, out, _ = run(capsys, "verify", "nk", "--n", "2", "--d", "3", "--pmax", "9")
    assert code == 0 and "N_6 and not N_7" in out
    for argv in (["conj-el", "--n", "2", "--d", "4", "--q", "2"], ["regularity", "--n", "1", "--d", "3", "--pmax", "3"],
                 ["row-support", "--spaces", "2", "--b", "1", "--l", "3", "--q", "0", "--pmax", "9"]):
        assert run(capsys, "verify", *argv)[0] == 0


def test_refuted_exit_code(capsys):
    claim = VanishingClaim("test", {}, 2, zero=(Interval(0, 1),))
    rep = VerificationReport(claim, REFUTED, {(1, 2): 4}, [(1, 2, 4)])
    assert _report_out(rep, "table") == 3
    assert "witness: k[1,2] = 4" in capsys.readouterr().out


def test_taut_commands(capsys):
    assert run(capsys, "taut", "cohomology", "--n", "3", "--k", "1", "--m", "1", "--i", "0")[1].strip() == "9"
    code, out, _ = run(capsys, "taut", "split", "--n", "3", "--k", "3")
    assert code == 0 and "does not split" in out
    code, out, _ = run(capsys, "taut", "cover", "--n", "2", "--a", "3", "--q", "0", "--y-spaces", "1", "--ay", "2")
    assert code == 0 and "confirmed" in out
    assert run(capsys, "taut", "ses", "--n", "2", "--d", "3", "--divided")[0] == 0
    assert run(capsys, "taut", "split", "--n", "3")[0] == 1


def test_stats_csv(capsys, cache_dir):
    code, out, _ = run(capsys, "stats", "--spaces", "2", "--b", "0", "--l", "3", "--q", "1", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "p,k,mass" and lines[2].startswith("1,27,")
    code, out, _ = run(capsys, "stats", "--spaces", "2", "--b", "0", "--l", "3", "--q", "1", "--format", "json")
    assert json.loads(out)["mean"] == pytest.approx(3.5)


def test_cache_roundtrip(capsys, cache_dir):
    args = ["betti", "--spaces", "1", "--b", "0", "--l", "4", "--pmax", "4"]
    run(capsys, *args)
    first = ResultCache(cache_dir).last_session()
    assert first["hits"] == 0 and first["misses"] > 0
    run(capsys, *args)
    second = ResultCache(cache_dir).last_session()
    assert second == {"hits": first["misses"], "misses": 0}
    code, out, _ = run(capsys, "cache", "stat")
    assert f"{first['misses']} hits, 0 misses" in out
    code, out, _ = run(capsys, "cache", "list")
    assert "dim=" in out and len(out.splitlines()) == first["misses"]
    run(capsys, "cache", "clear")
    code, out, _ = run(capsys, "cache", "stat")
    assert "entries: 0" in out
    run(capsys, "cache", "clear")  # idempotent


def test_corrupt_entry_is_recomputed(capsys, cache_dir):
    args = ["betti", "--spaces", "1", "--b", "0", "--l", "3", "--pmax", "3", "--q", "1", "--format", "csv"]
    _, clean, _ = run(capsys, *args)
    path = cache_dir / f"{entry_key((1,), (0,), (3,), 32003, 1, 1)}.json"
    path.write_text("{not json")
    code, out, err = run(capsys, *args)
    assert code == 0 and out == clean and "corrupt" in err
    assert json.loads(path.read_text())["dim"] == 3


def test_unwritable_cache_dir(capsys, tmp_path, monkeypatch):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    monkeypatch.setenv("KOSZUL_CACHE_DIR", str(blocker / "sub"))
    code, out, err = run(capsys, "betti", "--spaces", "1", "--b", "0", "--l", "3", "--pmax", "2")
    assert code == 0 and "caching disabled" in err and "q=1" in out


def test_console_entry_point_no_traceback(tmp_path):
    env = dict(os.environ, KOSZUL_CACHE_DIR=str(tmp_path))
    res = subprocess.run([sys.executable, "-m", "syzygies.cli", "betti", "--spaces", "1", "--b", "0"],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 1 and "Traceback" not in res.stderr


def test_betti_literal_matches_reduced(capsys, cache_dir):
    base = ["betti", "--spaces", "2", "--b", "0", "--l", "2", "--format", "csv", "--no-cache"]
    assert main(base) == 0
    reduced = capsys.readouterr().out
    assert main(base + ["--literal"]) == 0
    assert capsys.readouterr().out == reduced
