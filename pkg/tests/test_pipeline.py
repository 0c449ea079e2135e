import argparse

import pytest

from congroute.config import RunConfig, load_run_config, parse_overrides
from congroute.errors import MalformedInputError
from congroute.graph.io import write_demands, write_graph
from congroute.graph.models import MultiGraph
from congroute.monitoring import StageMonitor
from congroute.pipeline import run_pipeline


@pytest.fixture
def line_instance(tmp_path):
    """Path 1-2-3-4-5 with the single pair (1, 5)"""
    graph = tmp_path / "line.graph"
    demands = tmp_path / "line.demands"
    write_graph(MultiGraph.from_edge_list(range(1, 6), [(1, 2), (2, 3), (3, 4), (4, 5)]), graph)
    write_demands([(1, 5)], demands)
    return str(graph), str(demands)


def run_args(graph: str, demands: str, **flags) -> argparse.Namespace:
    defaults = dict(
        graph=graph,
        demands=demands,
        output=None,
        seed=0,
        epsilon=0.05,
        c_beta=1.0,
        c_gamma=1.0,
        alpha_arv=None,
        retry_budget=200,
        escalation_budget=3,
        cut_oracle=None,
        size_bound=22,
        wl_spotchecks=20,
        wl_cluster_spotchecks=10,
        split_samples=10,
        exhaustive_split=False,
        threshold=0.5,
        timings=False,
        override=None,
    )
    defaults.update(flags)
    return argparse.Namespace(**defaults)


def test_tiny_instance_falls_back_to_one_pair(line_instance):
    """k=1 leaves the parameters degenerate; the pair is routed alone"""
    monitor = StageMonitor()
    report = run_pipeline(RunConfig(graph=line_instance[0], demands=line_instance[1]), monitor)
    assert report.fallback
    assert report.instance["pairs"] == 1
    (sub,) = report.subinstances
    assert sub.fallback
    assert "k1=0 is not positive" in sub.reason
    assert sub.params.k == 1
    (routed,) = report.routed
    assert tuple(routed.pair) == (1, 5)
    assert routed.vertices == [1, 2, 3, 4, 5]
    assert report.histogram.max_load == 1
    assert 0.95 <= report.lp_value <= 1
    assert [s.name for s in report.stages] == ["ingest", "instance-prep", "verify"]
    assert all(s.status == "passed" for s in report.stages)
    assert not monitor.failed


def test_same_seed_same_report(line_instance):
    cfg = RunConfig(graph=line_instance[0], demands=line_instance[1], seed=11)
    first = run_pipeline(cfg).model_dump_json()
    second = run_pipeline(cfg).model_dump_json()
    assert first == second


def test_empty_demand_file(tmp_path, line_instance):
    empty = tmp_path / "none.demands"
    empty.write_text("c nothing to route\n", encoding="utf-8")
    with pytest.raises(MalformedInputError):
        run_pipeline(RunConfig(graph=line_instance[0], demands=str(empty)))


def test_seed_from_environment(monkeypatch, line_instance):
    """CR_SEED beats --seed"""
    monkeypatch.setenv("CR_SEED", "42")
    cfg = load_run_config(run_args(*line_instance, seed=3))
    assert cfg.seed == 42
    monkeypatch.setenv("CR_SEED", "many")
    with pytest.raises(MalformedInputError):
        load_run_config(run_args(*line_instance))


def test_oracle_mode_from_environment(monkeypatch, line_instance):
    monkeypatch.delenv("CR_SEED", raising=False)
    monkeypatch.setenv("CR_CUT_ORACLE", "spectral")
    assert load_run_config(run_args(*line_instance)).cut_oracle == "spectral"
    assert load_run_config(run_args(*line_instance, cut_oracle="exact")).cut_oracle == "exact"


@pytest.mark.parametrize(
    "flags",
    [{"epsilon": 1.5}, {"c_beta": 0.0}, {"retry_budget": -1}, {"split_samples": 0}, {"override": ["beta=3"]}],
)
def test_invalid_configuration(monkeypatch, line_instance, flags):
    monkeypatch.delenv("CR_SEED", raising=False)
    with pytest.raises(MalformedInputError):
        load_run_config(run_args(*line_instance, **flags))


def test_overrides_are_parsed():
    assert parse_overrides(["gamma=1", " alpha = 1/100 "]) == {"gamma": "1", "alpha": "1/100"}
    cfg = RunConfig(graph="g", demands="d", overrides={"gamma": "1", "alpha": "1/100"})
    assert cfg.parsed_overrides()["alpha"].denominator == 100
    assert "graph" not in cfg.echo()
    with pytest.raises(MalformedInputError):
        parse_overrides(["gamma"])
