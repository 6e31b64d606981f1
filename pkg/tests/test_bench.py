import csv
import json
import math

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmpastar.bench import (
    EXCLUSION_RULE,
    InstanceRecord,
    canonical_methods,
    geometric_mean_ratio,
    run_suite,
    summarize,
    sweep_alpha,
    valid_path_ratio,
    write_sweep_tsv,
)
from mmpastar.envgen import GenParams, LevelSuite, SuiteEntry, generate
from mmpastar.errors import DomainError, EmptyInput
from mmpastar.search import SearchResult
from mmpastar.waypoints import ProviderConfig, make_provider

from test_search import walled_goal

CFG = ProviderConfig(base_url="http://model.test/v1", max_retries=0, backoff=0.0)


def items(n=4, level=5, seed=300):
    suite = LevelSuite()
    out = []
    for i in range(n):
        lvl = level if level else 1 + i % 5
        env = generate(suite.complexity_params(lvl, seed=seed + i))
        out.append((SuiteEntry(f"m{i}", f"m{i}.json", lvl, 2), env))
    return out


def result(ops, storage, cost, status="found"):
    return SearchResult(status, (), cost, ops, storage, 0)


def record(i, astar, mmp, level=1):
    return InstanceRecord(f"r{i}", level, 1, {"astar": astar, "mmp_astar": mmp},
                          {"astar": astar.found, "mmp_astar": mmp.found})


def test_geometric_mean_examples():
    assert geometric_mean_ratio([(5, 5)]) == 100.0
    assert geometric_mean_ratio([(2, 1), (1, 2)]) == pytest.approx(100.0, abs=1e-12)
    assert geometric_mean_ratio([(81, 100)]) == pytest.approx(81.0, abs=1e-12)
    assert geometric_mean_ratio([(1, 4), (1, 1)]) == pytest.approx(50.0, abs=1e-12)


@pytest.mark.parametrize("pair", [(0, 1), (1, 0), (-1, 2), (math.inf, 1)])
def test_geometric_mean_domain(pair):
    with pytest.raises(DomainError):
        geometric_mean_ratio([pair])


def test_geometric_mean_empty():
    with pytest.raises(EmptyInput):
        geometric_mean_ratio([])


ratios = st.lists(st.tuples(st.floats(1e-3, 1e6), st.floats(1e-3, 1e6)), min_size=1, max_size=20)


@given(ratios, st.randoms())
def test_geometric_mean_order_invariant(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    assert geometric_mean_ratio(shuffled) == pytest.approx(geometric_mean_ratio(pairs), rel=1e-9)


@given(ratios, st.floats(1e-2, 1e2))
def test_geometric_mean_scale_invariant(pairs, c):
    scaled = [(c * n, c * d) for n, d in pairs]
    assert geometric_mean_ratio(scaled) == pytest.approx(geometric_mean_ratio(pairs), rel=1e-9)


def test_valid_path_ratio():
    ok, miss = result(10, 20, 5.0), result(10, 20, math.inf, status="unreachable")
    assert valid_path_ratio([record(0, ok, ok)]) == 100.0
    assert valid_path_ratio([record(0, ok, miss)]) == 0.0
    assert valid_path_ratio([record(i, ok, ok if i == 0 else miss) for i in range(4)]) == 25.0


def test_summary_excludes_failed_pairs():
    ok = result(10, 20, 5.0)
    recs = [record(0, result(20, 40, 5.0), ok), record(1, ok, result(0, 5, math.inf, status="unreachable"))]
    s = summarize(recs, "mmp_astar")
    assert s.n_instances == 2 and s.n_ratio_pairs == 1
    assert s.operation_ratio == pytest.approx(50.0)
    assert s.relative_path_length == pytest.approx(100.0)
    assert s.valid_path_ratio == 50.0


def test_canonical_methods():
    assert canonical_methods(["mmp", "astar", "llm", "mmp_astar"]) == ("astar", "llm_astar", "mmp_astar")
    with pytest.raises(ValueError):
        canonical_methods(["dijkstra"])


def test_astar_against_itself():
    report = run_suite(items(3), ["astar"], provider=None)
    s = report.overall["astar"]
    assert s.operation_ratio == s.storage_ratio == s.relative_path_length == pytest.approx(100.0)
    assert s.valid_path_ratio == 100.0


def test_unreachable_instance_counts_as_invalid():
    pairs = items(2) + [(SuiteEntry("sealed", "sealed.json", 1, 1), walled_goal())]
    report = run_suite(pairs, ["astar", "mmp"], provider="none")
    assert report.overall["mmp_astar"].valid_path_ratio == pytest.approx(200 / 3)
    assert report.overall["mmp_astar"].n_ratio_pairs == 2


def test_dead_provider_still_yields_valid_paths():
    def dead(request):
        raise httpx.ConnectError("down", request=request)

    provider = make_provider("mmp", llm_cfg=CFG, vlm_cfg=CFG, transport=httpx.MockTransport(dead))
    report = run_suite(items(3), ["astar", "llm", "mmp"], provider=provider)
    assert report.overall["mmp_astar"].valid_path_ratio == 100.0
    assert report.overall["llm_astar"].valid_path_ratio == 100.0
    assert all(r.provenance["fallback_used"] for r in report.records)
    assert not any(r.failed for r in report.records)


def test_strict_dead_provider_is_recorded_not_raised():
    def dead(request):
        raise httpx.ConnectError("down", request=request)

    provider = make_provider("mmp", llm_cfg=CFG, vlm_cfg=CFG, allow_fallback=False,
                             transport=httpx.MockTransport(dead))
    report = run_suite(items(2), ["astar", "mmp"], provider=provider)
    assert all(r.failed and "provider" in r.errors for r in report.records)
    assert report.overall["astar"].valid_path_ratio == 100.0
    assert report.overall["mmp_astar"].valid_path_ratio == 0.0


def test_per_level_partitions_records():
    report = run_suite(items(10, level=None), ["astar", "mmp"], provider="oracle:10")
    assert sorted(report.per_level) == [1, 2, 3, 4, 5]
    assert sum(by["mmp_astar"].n_instances for by in report.per_level.values()) == 10


def test_workers_do_not_change_results():
    pairs = items(4)
    one = run_suite(pairs, ["astar", "mmp"], provider="oracle:10")
    many = run_suite(pairs, ["astar", "mmp"], provider="oracle:10", workers=3)
    assert [r.results for r in one.records] == [r.results for r in many.records]


def test_report_writers(tmp_path):
    report = run_suite(items(3, level=None), ["astar", "llm", "mmp"], provider="oracle:10")
    js, cs, ts = report.write_all(tmp_path)
    data = json.loads(js.read_text())
    assert data["header"]["exclusion_rule"] == EXCLUSION_RULE
    assert len(data["instances"]) == 3
    assert data["overall"]["mmp_astar"]["n_instances"] == 3

    rows = list(csv.reader(cs.open()))
    assert rows[0] == ["# " + EXCLUSION_RULE]
    assert rows[1][:3] == ["instance_id", "level", "scale"] and len(rows[2]) == len(rows[1])
    assert [r[0] for r in rows[2:5]] == ["m0", "m1", "m2"]
    assert rows[5] == [] and rows[6][0] == "summary"

    tsv = [line.split("\t") for line in ts.read_text().splitlines()]
    assert tsv[0][:3] == ["level", "method", "operation_ratio"]
    assert len(tsv) == 1 + 3 * 3


def test_sweep_alpha(tmp_path):
    rows = sweep_alpha(items(3), [0.1, 0.7, 1.0], provider="oracle:10")
    assert [r.alpha for r in rows] == [0.1, 0.7, 1.0]
    assert all(r.valid_path_ratio == 100.0 for r in rows)
    write_sweep_tsv(rows, tmp_path / "s.tsv")
    lines = (tmp_path / "s.tsv").read_text().splitlines()
    assert lines[0] == "alpha\toperation_ratio\tstorage_ratio\trelative_path_length"
    assert [ln.split("\t")[0] for ln in lines[1:]] == ["0.1", "0.7", "1"]


def test_sweep_with_empty_map():
    env = generate(GenParams(n_horizontal=0, n_vertical=0, seed=5))
    rows = sweep_alpha([(SuiteEntry("e", "e.json", 1, 1), env)], [0.5], provider="oracle:10")
    assert rows[0].relative_path_length == pytest.approx(100.0)
