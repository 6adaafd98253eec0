import csv
import json

import pytest

from grafl.cli import learn as learn_cli
from grafl.config import get_settings
from grafl.core.generators import erdos_renyi
from grafl.main import main
from grafl.schemas.manifest import RunManifest


# ---------- Fixtures ----------
@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch):
    """No run registry and no worker override unless a test sets one."""
    settings = get_settings()
    monkeypatch.setattr(settings, "DB_URL", "")
    monkeypatch.setattr(settings, "WORKERS", None)
    yield settings


@pytest.fixture()
def graph_file(tmp_path):
    g = erdos_renyi(40, avg_degree=4, seed=2)
    path = tmp_path / "graph.txt"
    lines = [f"{s} {d}" for s, d in zip(g.src.tolist(), g.dst.tolist()) if s < d]
    path.write_text("# undirected\n" + "\n".join(lines) + "\n")
    return path


# ---------- Helpers ----------
LEARN_FLAGS = ["--families", "degree,kcore", "--operators", "sum,mean", "--layers", "2"]


def _learn(graph_file, tmp_path, *extra: str) -> int:
    return main([
        "learn", "--graph", str(graph_file), *LEARN_FLAGS,
        "--out-funcs", str(tmp_path / "funcs.json"),
        "--out-feats", str(tmp_path / "feats.csv"),
        *extra,
    ])


def _error_lines(text: str, command: str) -> list[str]:
    return [line for line in text.splitlines() if line.startswith(f"grafl {command}: error:")]


def _header(path) -> list[str]:
    with open(path, newline="", encoding="utf-8") as fh:
        return next(csv.reader(fh))


# ---------- Tests ----------
def test_learn_writes_artifacts_and_manifest(graph_file, tmp_path):
    assert _learn(graph_file, tmp_path, "--seed", "4") == 0

    funcs = json.loads((tmp_path / "funcs.json").read_text())
    header = _header(tmp_path / "feats.csv")
    assert header[0] == "element_id"
    assert len(header) == sum(len(layer) for layer in funcs["layers"]) + 1

    manifest = json.loads((tmp_path / "feats.csv.manifest.json").read_text())
    assert manifest["command"] == "learn"
    assert manifest["seed"] == 4
    assert manifest["inputs"] == [str(graph_file)]
    assert manifest["outputs"] == [str(tmp_path / "feats.csv"), str(tmp_path / "funcs.json")]
    assert all(v >= 0 for v in manifest["timings"].values())


def test_extract_reproduces_learned_matrix(graph_file, tmp_path):
    assert _learn(graph_file, tmp_path) == 0
    code = main([
        "extract", "--graph", str(graph_file),
        "--funcs", str(tmp_path / "funcs.json"),
        "--out-feats", str(tmp_path / "again.csv"),
    ])
    assert code == 0
    assert (tmp_path / "again.csv").read_text() == (tmp_path / "feats.csv").read_text()


def test_config_file_and_flag_precedence(graph_file, tmp_path):
    config = tmp_path / "run.env"
    config.write_text("lambda=0.9\noperators=sum\nmax_layers=1\n")
    assert _learn(graph_file, tmp_path, "--config", str(config), "--lambda", "0.8") == 0
    funcs = json.loads((tmp_path / "funcs.json").read_text())
    # --lambda beats the file; --layers from LEARN_FLAGS beats max_layers=1
    assert funcs["config"]["lambda"] == 0.8
    manifest = json.loads((tmp_path / "feats.csv.manifest.json").read_text())
    assert manifest["config"]["layers"] == 2


def test_invalid_config_fails_before_reading_graph(tmp_path, capsys):
    code = main([
        "learn", "--graph", str(tmp_path / "missing.txt"), "--lambda", "1.5",
        "--out-funcs", str(tmp_path / "f.json"), "--out-feats", str(tmp_path / "x.csv"),
    ])
    assert code == 1
    (line,) = _error_lines(capsys.readouterr().err, "learn")
    assert "lam" in line
    assert not (tmp_path / "x.csv").exists()


def test_malformed_graph_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 2 3 4\n")
    code = main([
        "learn", "--graph", str(bad),
        "--out-funcs", str(tmp_path / "f.json"), "--out-feats", str(tmp_path / "x.csv"),
    ])
    assert code == 1
    (line,) = _error_lines(capsys.readouterr().err, "learn")
    assert f"{bad}:2" in line


def test_stats_reports_density(graph_file, tmp_path):
    assert _learn(graph_file, tmp_path) == 0
    out = tmp_path / "stats.json"
    assert main(["stats", "--feats", str(tmp_path / "feats.csv"), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["rows"] == len((tmp_path / "feats.csv").read_text().splitlines()) - 1
    assert 0.0 <= report["density"] <= 1.0
    assert report["dense_bytes"] == 8 * report["rows"] * report["cols"]


def test_repeated_learn_matches_except_run_identity(graph_file, tmp_path):
    manifests, artifacts = [], []
    for _ in range(2):
        assert _learn(graph_file, tmp_path, "--seed", "9") == 0
        manifests.append(RunManifest.model_validate_json((tmp_path / "feats.csv.manifest.json").read_text()))
        artifacts.append(((tmp_path / "feats.csv").read_bytes(), (tmp_path / "funcs.json").read_bytes()))

    first, again = manifests
    assert artifacts[0] == artifacts[1]
    assert first.fingerprint() == again.fingerprint()
    assert first.run_id != again.run_id
    varying = {"run_id", "created_at", "timings"}
    assert first.model_dump(exclude=varying) == again.model_dump(exclude=varying)


def test_failed_matrix_write_leaves_no_artifacts(graph_file, tmp_path, monkeypatch, capsys):
    def broken_write(*args, **kwargs):
        raise OSError("disk full")

    monkeypatch.setattr(learn_cli, "write_matrix", broken_write)
    assert _learn(graph_file, tmp_path) == 1
    assert _error_lines(capsys.readouterr().err, "learn") == ["grafl learn: error: disk full"]
    assert not (tmp_path / "funcs.json").exists()
    assert not (tmp_path / "feats.csv").exists()
    assert not (tmp_path / "feats.csv.manifest.json").exists()


def test_diffuse_appends_columns(graph_file, tmp_path):
    assert _learn(graph_file, tmp_path) == 0
    out = tmp_path / "smooth.csv"
    code = main([
        "diffuse", "--graph", str(graph_file), "--feats", str(tmp_path / "feats.csv"),
        "--iterations", "2", "--attach", "append", "--out-feats", str(out),
    ])
    assert code == 0
    before = _header(tmp_path / "feats.csv")
    after = _header(out)
    assert after[: len(before)] == before
    assert len(after) - 1 == 2 * (len(before) - 1)


def test_bench_one_row_per_size(tmp_path):
    out = tmp_path / "bench.csv"
    code = main([
        "bench", "--sizes", "30,50", "--degree", "4",
        "--families", "degree", "--operators", "sum", "--layers", "2", "--out", str(out),
    ])
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["n"]) for r in rows] == [30, 50]
    assert all(float(r["seconds"]) >= 0 for r in rows)


def test_history_lists_recorded_runs(graph_file, tmp_path, isolated_settings, capsys):
    isolated_settings.DB_URL = f"sqlite:///{tmp_path / 'runs.db'}"
    assert _learn(graph_file, tmp_path) == 0
    assert main(["stats", "--feats", str(tmp_path / "feats.csv"), "--out", str(tmp_path / "s.json")]) == 0
    capsys.readouterr()

    assert main(["history", "--command", "learn"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("created_at,run_id,command")
    assert len(lines) == 2
    assert lines[1].split(",")[2] == "learn"


def test_history_without_registry(capsys):
    assert main(["history"]) == 1
    assert _error_lines(capsys.readouterr().err, "history")
