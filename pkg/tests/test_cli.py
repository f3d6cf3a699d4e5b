import json
import subprocess
import sys

import pytest

from partial_entropy import gallery
from partial_entropy.cli import CSV_COLUMNS, load, orbit_components, run
from partial_entropy.textio import dump_system


def summary(out_dir):
    return json.loads((out_dir / "summary.json").read_text())


def test_counts_row_for_cycle_restriction(tmp_path):
    code = run(["counts", "--system", "cycle_y", "--n-min", "2", "--n-max", "2",
                "--eps", "0.5", "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "counts.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "2,0.5,2,2,2,2,2,2,exact"
    assert summary(tmp_path)["passed"] is True


def test_counts_are_byte_identical_across_runs(tmp_path):
    args = ["counts", "--system", "cyclic_shift:k=2,L=6", "--n-min", "1", "--n-max", "4",
            "--eps", "0.5,0.25", "--seed", "7"]
    run(args + ["--out", str(tmp_path / "a")])
    run(args + ["--out", str(tmp_path / "b")])
    for name in ("counts.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_entropy_of_one_point(tmp_path):
    assert run(["entropy", "--system", "one_point", "--eps", "2,1,0.5", "--n-min", "1",
                "--n-max", "3", "--out", str(tmp_path)]) == 0
    rec = summary(tmp_path)
    assert rec["hbar"] == 0.0
    assert (tmp_path / "logcount_eps0.5.dat").read_text().splitlines()[0] == "1 0.0"


def test_concentration_on_no_return(tmp_path):
    assert run(["concentration", "--system", "no_return", "--eps", "4,2,1,0.5",
                "--n-min", "1", "--n-max", "5", "--out", str(tmp_path)]) == 0
    rec = summary(tmp_path)
    assert rec["hbar_full"] == 0.0 and rec["hbar_omega"] == 0.0


def test_check_axioms_on_file(tmp_path):
    f = tmp_path / "sys.txt"
    f.write_text(dump_system(gallery.swap_fixed()))
    assert run(["check-axioms", "--system", str(f), "--out", str(tmp_path / "o")]) == 0
    broken = dump_system(gallery.cycle_global(4, 3)).replace("A 1 : 0->1 1->2", "A 1 : 0->1 1->1")
    f.write_text(broken)
    assert run(["check-axioms", "--system", str(f), "--out", str(tmp_path / "p")]) == 1
    text = (tmp_path / "p" / "axioms.txt").read_text()
    assert "axiom (iii) witness (1, 1, 0)" in text


def test_input_errors_exit_two(tmp_path, capsys):
    assert run(["counts"]) == 2
    assert run(["counts", "--system", "no_such_system"]) == 2
    assert run(["counts", "--system", "cyclic_shift:k"]) == 2
    assert run(["counts", "--system", "cyclic_shift:q=3"]) == 2
    assert run(["counts", "--system", "cycle_y", "--n-min", "3", "--n-max", "2"]) == 2
    assert run(["counts", "--system", "cycle_y", "--eps", "-1"]) == 2
    assert run(["explode", "--system", "cycle_y"]) == 2
    broken = tmp_path / "broken.txt"
    broken.write_text(dump_system(gallery.cycle_global(4, 3)).replace("A 1 : 0->1 1->2",
                                                                       "A 1 : 0->1 1->1"))
    assert run(["counts", "--system", str(broken)]) == 2
    assert "not a partial action" in capsys.readouterr().err


def test_globalize_and_equivalence(tmp_path):
    assert run(["globalize", "--system", "cycle_y", "--window", "1",
                "--out", str(tmp_path / "g")]) == 0
    classes = (tmp_path / "g" / "classes.txt").read_text().splitlines()
    assert len(classes) == 4 and "(-1,1) (0,0)" in classes
    assert run(["globalize", "--system", "swap_fixed", "--gap", "--eps", "4,2,1,0.5",
                "--n-min", "1", "--n-max", "4", "--out", str(tmp_path / "h")]) == 0
    assert run(["equivalence", "--system", "cycle_y", "--map", "0->0,1->1"]) == 0
    assert run(["equivalence", "--system", "cycle_y", "--map", "0->1,1->0"]) == 1


def test_omega_output(tmp_path):
    assert run(["omega", "--system", "swap_fixed", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "omega.csv").read_text() == "point,in_omega\n0,1\n2,1\n"


def test_product_decompose_and_metric_invariance(tmp_path):
    common = ["--eps", "0.5,0.25", "--n-min", "1", "--n-max", "3"]
    assert run(["product", "--system", "cyclic_shift:k=2,L=6", "--eps", "0.5", "--n-min", "1",
                "--n-max", "4",
                "--out", str(tmp_path / "p")]) == 0
    assert run(["decompose", "--system", "swap_fixed", "--eps", "4,2,1", "--n-min", "1",
                "--n-max", "3", "--out", str(tmp_path / "d")]) == 0
    assert run(["metric-invariance", "--system", "cyclic_shift:k=2,L=8", *common,
                "--out", str(tmp_path / "m")]) == 0
    assert summary(tmp_path / "m")["relabel_identical"] is True


def test_cover_entropy_command(tmp_path):
    assert run(["cover-entropy", "--system", "cyclic_shift:k=2,L=8", "--eps", "0.5,0.25",
                "--n-min", "1", "--n-max", "3", "--out", str(tmp_path)]) == 0
    assert abs(summary(tmp_path)["gap"]) <= 0.1


def test_gallery_list(capsys):
    assert run(["gallery-list"]) == 0
    out = capsys.readouterr().out
    assert "cyclic_shift(k=2, L=10, window=None)" in out


def test_loader_and_components():
    assert load("cyclic_shift:k=3,L=3").size == 27
    comps = orbit_components(gallery.swap_fixed())
    assert sorted(map(sorted, comps)) == [[0], [2]]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "partial_entropy", "counts", "--system",
                          "cycle_y", "--n-min", "2", "--n-max", "2", "--eps", "0.5"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "2,0.5,2,2,2,2,2,2,exact" in res.stdout
