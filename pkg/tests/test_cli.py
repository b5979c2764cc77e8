import subprocess
import sys

import pytest

from conftest import CORPUS
from usagescan.cli import main


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split("\t")[0] for line in out] == [
        "kotlin_ranges", "python_unreachable_while", "keyword_count"]


def test_analyze_merge_report(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["analyze", "--input", str(CORPUS), "--output", str(out),
                 "--analyzers", "kotlin_ranges,keyword_count", "--batch-size", "2", "--jobs", "2"]) == 0
    assert "5 projects, 104 files, 0 failed" in capsys.readouterr().out
    before = (out / "kotlin_ranges.csv").read_bytes()
    assert main(["merge", "--output", str(out)]) == 0
    assert (out / "kotlin_ranges.csv").read_bytes() == before

    chart, table = tmp_path / "ranges.svg", tmp_path / "table.csv"
    capsys.readouterr()
    assert main(["report", "--input", str(out / "kotlin_ranges.csv"), "--group-by", "range_kind",
                 "--chart", str(chart), "--table", str(table), "--title", "Ranges"]) == 0
    printed = capsys.readouterr().out
    assert printed == table.read_text()
    assert printed.splitlines()[1] == "DOTDOT,21,38.9"
    assert chart.read_text().count('id="bar_') == 4


def test_failed_project_exit_code(tmp_path):
    lst = tmp_path / "list.txt"
    lst.write_text(f"{tmp_path / 'does-not-exist'}\n{CORPUS / 'unreachable'}\n")
    assert main(["analyze", "--input", str(lst), "--output", str(tmp_path / "o"),
                 "--analyzers", "python_unreachable_while", "--jobs", "1"]) == 1


@pytest.mark.parametrize("argv,message", [
    (["analyze", "--input", "CORPUS", "--output", "OUT", "--analyzers", "nope"], "unknown analyzer"),
    (["merge", "--output", "OUT"], "no completed batches"),
    (["report", "--input", "MISSING", "--group-by", "x"], "no such file"),
])
def test_errors_exit_two(tmp_path, capsys, argv, message):
    argv = [{"CORPUS": str(CORPUS), "OUT": str(tmp_path), "MISSING": str(tmp_path / "m.csv")}.get(a, a)
            for a in argv]
    assert main(argv) == 2
    assert message in capsys.readouterr().err


def test_unknown_column_lists_available(tmp_path, capsys):
    out = tmp_path / "out"
    main(["analyze", "--input", str(CORPUS), "--output", str(out), "--analyzers", "kotlin_ranges",
          "--jobs", "1"])
    capsys.readouterr()
    assert main(["report", "--input", str(out / "kotlin_ranges.csv"), "--group-by", "kind"]) == 2
    assert "available: project_id, file_path, line, range_kind, context_kind" in capsys.readouterr().err


def test_bad_batch_size_is_rejected(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["analyze", "--input", str(CORPUS), "--output", str(tmp_path), "--analyzers",
              "keyword_count", "--batch-size", "0"])
    assert e.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "usagescan", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "kotlin_ranges" in proc.stdout
