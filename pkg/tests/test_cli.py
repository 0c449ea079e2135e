import json
from itertools import combinations

import pytest

from congroute.errors import EXIT_MALFORMED, EXIT_OK, EXIT_VERIFICATION
from congroute.main import main


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("CR_SEED", raising=False)
    monkeypatch.delenv("CR_CUT_ORACLE", raising=False)


@pytest.fixture
def files(tmp_path):
    graph = tmp_path / "line.graph"
    graph.write_text("c path on five vertices\np 5 4\ne 1 2\ne 2 3\ne 3 4\ne 4 5\n", encoding="utf-8")
    demands = tmp_path / "line.demands"
    demands.write_text("d 1 5\n", encoding="utf-8")
    return tmp_path, str(graph), str(demands)


def test_route_writes_report(files):
    tmp_path, graph, demands = files
    out = tmp_path / "report.json"
    assert main(["route", graph, demands, "-o", str(out), "--seed", "3"]) == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["config"]["seed"] == 3
    assert [r["vertices"] for r in report["routed"]] == [[1, 2, 3, 4, 5]]
    assert report["histogram"]["max_load"] == 1


def test_route_rejects_malformed_graph(files):
    tmp_path, _graph, demands = files
    bad = tmp_path / "bad.graph"
    bad.write_text("p 3 2\ne 1 2\ne 2 9\n", encoding="utf-8")
    out = tmp_path / "report.json"
    assert main(["route", str(bad), demands, "-o", str(out)]) == EXIT_MALFORMED
    assert not out.exists()


def test_route_missing_file(files):
    tmp_path, graph, _demands = files
    assert main(["route", graph, str(tmp_path / "absent.demands")]) == EXIT_MALFORMED


def test_verify_round_trip(files):
    """A run report passes verification; a doubled path does not"""
    tmp_path, graph, demands = files
    out = tmp_path / "report.json"
    assert main(["route", graph, demands, "-o", str(out)]) == EXIT_OK
    checked = tmp_path / "verify.json"
    assert main(["verify", str(out), "--graph", graph, "--demands", demands, "-o", str(checked)]) == EXIT_OK
    verification = json.loads(checked.read_text(encoding="utf-8"))
    assert verification["passed"] and verification["routed"] == 1

    report = json.loads(out.read_text(encoding="utf-8"))
    report["routed"] = report["routed"] * 2
    out.write_text(json.dumps(report), encoding="utf-8")
    assert main(["verify", str(out), "--graph", graph, "--demands", demands]) == EXIT_VERIFICATION


def test_krv_game(tmp_path):
    out = tmp_path / "krv.json"
    assert main(["krv-game", "-n", "8", "--player", "adversarial", "--games", "5", "-o", str(out)]) == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["n"] == 8 and report["games"] == 5 and report["rounds"] == 9
    assert report["exact"]


def test_krv_game_odd_size(tmp_path):
    assert main(["krv-harness", "-n", "7", "--games", "1"]) == EXIT_MALFORMED


def test_decompose_barbell(tmp_path):
    """Two K4 blocks joined by a bridge split apart under a loose alpha"""
    edges = list(combinations(range(1, 5), 2)) + list(combinations(range(5, 9), 2)) + [(4, 5)]
    edges += [(1, 9), (2, 10), (3, 11), (6, 12), (7, 13), (8, 14)]
    graph = tmp_path / "barbell.graph"
    graph.write_text(f"p 14 {len(edges)}\n" + "".join(f"e {u} {v}\n" for u, v in edges), encoding="utf-8")
    subset = tmp_path / "set.txt"
    subset.write_text(" ".join(str(v) for v in range(1, 9)), encoding="utf-8")
    out = tmp_path / "decomposition.json"
    args = ["decompose", str(graph), "--set", str(subset), "--alpha", "1/2", "--gamma", "1", "--cut-oracle", "exact"]
    assert main(args + ["-o", str(out)]) == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["out_size"] == 6
    assert report["clusters"] == [[1, 2, 3, 4], [5, 6, 7, 8]]
    assert report["splits"] == 1
    assert report["certified"]


def test_route_expander_on_complete_graph(tmp_path):
    edges = list(combinations(range(1, 9), 2))
    graph = tmp_path / "k8.graph"
    graph.write_text(f"p 8 {len(edges)}\n" + "".join(f"e {u} {v}\n" for u, v in edges), encoding="utf-8")
    pairs = tmp_path / "k8.pairs"
    pairs.write_text("d 1 2\nd 3 4\nd 5 6\nd 7 8\n", encoding="utf-8")
    out = tmp_path / "routing.json"
    assert main(["route-expander", str(graph), str(pairs), "-o", str(out)]) == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["routed"] == 4
    assert report["expansion_checked"]
    assert report["paths"] == [[1, 2], [3, 4], [5, 6], [7, 8]]
