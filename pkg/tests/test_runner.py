import csv
import json
import shutil

import pytest

from conftest import CORPUS, FIXTURES
from usagescan import runner
from usagescan.analysis import UnknownAnalyzer
from usagescan.dataset import MaterializeError
from usagescan.runner import (MANIFEST, MARKER, MergeError, RunConfig, RunManifest,
                              enumerate_files, merge, run)

ALL = ["kotlin_ranges", "python_unreachable_while", "keyword_count"]


def three_projects(tmp_path):
    root = tmp_path / "corpus"
    for name in ("ranges_a", "ranges_b", "unreachable"):
        shutil.copytree(CORPUS / name, root / name)
    return root


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def outputs(out, ids=ALL):
    return {a: (out / f"{a}.csv").read_bytes() for a in ids}


def test_three_projects_batch_size_one(tmp_path):
    out = tmp_path / "out"
    manifest = run(RunConfig(three_projects(tmp_path), out, ["kotlin_ranges"], batch_size=1, jobs=1))
    assert sorted(p.name for p in out.glob("batch_*")) == ["batch_0", "batch_1", "batch_2"]
    assert all((out / f"batch_{k}" / MARKER).exists() for k in range(3))
    rows = read_rows(out / "kotlin_ranges.csv")
    assert rows[0] == ["project_id", "file_path", "line", "range_kind", "context_kind"]
    expected = json.loads((FIXTURES / "ranges_expected.json").read_text())
    assert len(rows) - 1 == len(expected["records"]) == 54
    assert [e.project_id for e in manifest.entries] == ["local__ranges_a", "local__ranges_b",
                                                        "local__unreachable"]
    assert manifest.failed == 0 and manifest.completed_batches == [0, 1, 2]


def test_empty_corpus_gives_header_only(tmp_path):
    (tmp_path / "empty").mkdir()
    out = tmp_path / "out"
    manifest = run(RunConfig(tmp_path / "empty", out, ALL, jobs=1))
    assert manifest.entries == []
    assert (out / MANIFEST).read_text() == ""
    assert (out / "python_unreachable_while.csv").read_text() == \
        "project_id,file_path,line,condition_text,body_text\n"


def test_csv_is_lf_and_quoted(tmp_path):
    out = tmp_path / "out"
    run(RunConfig(CORPUS, out, ["python_unreachable_while"], jobs=1))
    data = (out / "python_unreachable_while.csv").read_bytes()
    assert b"\r" not in data
    assert b'"print(""never printed"")"' in data


def test_merge_concatenates_completed_batches(tmp_path):
    header = "project_id,file_path,line,keyword,count\n"
    for k, rows in enumerate([["b,x.py,2,IF_STMT,1", "a,x.py,10,IF_STMT,1"],
                              ["a,x.py,9,FOR_STMT,2", "a,a.py,1,IF_STMT,1", "c,y.kt,1,IF_STMT,4"]]):
        d = tmp_path / f"batch_{k}"
        d.mkdir()
        (d / "keyword_count.csv").write_text(header + "".join(r + "\n" for r in rows))
        (d / MARKER).write_text("{}")
    merged = merge(tmp_path)
    text = merged["keyword_count"].read_text()
    assert text == header + ("a,a.py,1,IF_STMT,1\na,x.py,9,FOR_STMT,2\na,x.py,10,IF_STMT,1\n"
                             "b,x.py,2,IF_STMT,1\nc,y.kt,1,IF_STMT,4\n")


def test_merge_excludes_unmarked_batch(tmp_path, caplog):
    header = "project_id,file_path,line,keyword,count\n"
    for k in range(2):
        d = tmp_path / f"batch_{k}"
        d.mkdir()
        (d / "keyword_count.csv").write_text(header + f"p{k},x.py,1,IF_STMT,1\n")
    (tmp_path / "batch_0" / MARKER).write_text("{}")
    merge(tmp_path)
    assert read_rows(tmp_path / "keyword_count.csv")[1:] == [["p0", "x.py", "1", "IF_STMT", "1"]]
    assert "batch 1 has no completion marker" in caplog.text


def test_merge_needs_a_completed_batch(tmp_path):
    with pytest.raises(MergeError):
        merge(tmp_path)


def test_single_batch_merge_is_sorted_batch_file(tmp_path):
    out = tmp_path / "out"
    run(RunConfig(CORPUS, out, ["keyword_count"], batch_size=1000, jobs=1))
    batch = read_rows(out / "batch_0" / "keyword_count.csv")
    key = lambda r: (r[0], r[1], int(r[2]), tuple(r[3:]))
    assert read_rows(out / "keyword_count.csv") == [batch[0]] + sorted(batch[1:], key=key)


def test_batch_and_jobs_invariance(tmp_path):
    results = []
    for size, jobs in [(1, 1), (1000, 4), (2, 3)]:
        out = tmp_path / f"out_{size}_{jobs}"
        run(RunConfig(CORPUS, out, ALL, batch_size=size, jobs=jobs))
        results.append(outputs(out))
    assert results[0] == results[1] == results[2]


def test_rerun_without_resume_discards_old_batches(tmp_path):
    out = tmp_path / "out"
    run(RunConfig(CORPUS, out, ALL, batch_size=1, jobs=1))
    first = outputs(out)
    run(RunConfig(CORPUS, out, ALL, batch_size=3, jobs=1))
    assert sorted(p.name for p in out.glob("batch_*")) == ["batch_0", "batch_1"]
    assert outputs(out) == first


def test_resume_after_crash(tmp_path, monkeypatch):
    clean = tmp_path / "clean"
    run(RunConfig(CORPUS, clean, ALL, batch_size=2, jobs=1))

    out = tmp_path / "out"
    original = runner.process_batch
    calls = []

    def crash_after_first(batch, *args):
        if calls:
            raise KeyboardInterrupt("killed")
        calls.append(batch.index)
        return original(batch, *args)

    monkeypatch.setattr(runner, "process_batch", crash_after_first)
    with pytest.raises(KeyboardInterrupt):
        run(RunConfig(CORPUS, out, ALL, batch_size=2, jobs=1))
    assert (out / "batch_0" / MARKER).exists() and not (out / "batch_1").exists()

    done = []
    monkeypatch.setattr(runner, "process_batch", lambda b, *a: done.append(b.index) or original(b, *a))
    run(RunConfig(CORPUS, out, ALL, batch_size=2, jobs=1, resume=True))
    assert done == [1, 2]  # batch 0 was reused
    assert outputs(out) == outputs(clean)
    assert len(RunManifest.load(out).entries) == 5


def test_resume_redoes_batch_for_other_analyzers(tmp_path):
    out = tmp_path / "out"
    run(RunConfig(CORPUS, out, ["keyword_count"], batch_size=10, jobs=1))
    run(RunConfig(CORPUS, out, ["kotlin_ranges"], batch_size=10, jobs=1, resume=True))
    assert (out / "batch_0" / "kotlin_ranges.csv").exists()


def test_accounting(tmp_path):
    out = tmp_path / "out"
    manifest = run(RunConfig(CORPUS, out, ALL, jobs=1))
    supported = sum(len(enumerate_files(p)) for p in CORPUS.iterdir() if p.is_dir())
    skipped = sum(e.files_skipped for e in manifest.entries)
    assert sum(e.files_analyzed for e in manifest.entries) == supported - skipped == 104
    mixed = manifest.entry("local__mixed")
    assert mixed.status == "parse_partial"
    assert any("legacy.py" in d and "skipped" in d for d in mixed.diagnostics)
    assert any("broken.py" in d for d in mixed.diagnostics)
    assert all(e.duration >= 0 for e in manifest.entries)
    on_disk = [json.loads(line) for line in (out / MANIFEST).read_text().splitlines()]
    assert [d["project_id"] for d in on_disk] == [e.project_id for e in manifest.entries]


def test_enumeration_skips_ignored_dirs():
    files = enumerate_files(CORPUS / "mixed")
    assert not any(part in ("build", "node_modules", "__pycache__")
                   for f in files for part in f.split("/"))
    assert "README.md" not in files
    with_build = enumerate_files(CORPUS / "mixed", frozenset())
    assert "build/generated/Generated.kt" in with_build


def test_failed_project_is_recorded_and_run_continues(tmp_path):
    lst = tmp_path / "list.txt"
    lst.write_text(f"https://github.com/o/gone\n{CORPUS / 'unreachable'}\n")

    def no_network(url, dest):
        raise MaterializeError(f"cannot reach {url}")

    out = tmp_path / "out"
    manifest = run(RunConfig(lst, out, ["python_unreachable_while"], jobs=1, clone=no_network))
    assert manifest.failed == 1
    assert manifest.entries[0].status == "failed" and "cannot reach" in manifest.entries[0].diagnostics[0]
    assert len(read_rows(out / "python_unreachable_while.csv")) == 3


def test_config_validation(tmp_path):
    with pytest.raises(UnknownAnalyzer):
        RunConfig(CORPUS, tmp_path, ["nope"])
    with pytest.raises(ValueError):
        RunConfig(CORPUS, tmp_path, ALL, batch_size=0)
    with pytest.raises(ValueError):
        RunConfig(CORPUS, tmp_path, [])
    assert RunConfig(CORPUS, tmp_path, ["keyword_count", "keyword_count"]).analyzer_ids == ("keyword_count",)
