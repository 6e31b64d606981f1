"""Suite runner and the ratio metrics reported against plain A*."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .envgen import SuiteEntry, iter_suite
from .errors import DomainError, EmptyInput
from .grid import GridEnvironment, validate_path
from .search import SearchConfig, SearchResult, astar, llm_astar, mmp_astar
from .waypoints.providers import Provider, make_provider

METHODS = ("astar", "llm_astar", "mmp_astar")
ALIASES = {"astar": "astar", "llm": "llm_astar", "llm_astar": "llm_astar", "mmp": "mmp_astar", "mmp_astar": "mmp_astar"}
ALPHA_SWEEP = (0.1, 0.3, 0.5, 0.7, 0.9, 1.0)

EXCLUSION_RULE = (
    "ratio geometric means use only instances where both the method and A* found a path; "
    "failed or errored runs count only against valid_path_ratio"
)


def canonical_methods(methods: Iterable[str]) -> tuple[str, ...]:
    out = []
    for m in methods:
        try:
            name = ALIASES[m.strip()]
        except KeyError:
            raise ValueError(f"unknown method {m!r}; expected one of {sorted(ALIASES)}") from None
        if name not in out:
            out.append(name)
    return tuple(sorted(out, key=METHODS.index))


def geometric_mean_ratio(pairs: Iterable[tuple[float, float]]) -> float:
    """``100 * exp(mean(ln(n / d)))`` over ``(n, d)`` pairs."""
    logs = []
    for n, d in pairs:
        if not (n > 0 and d > 0) or math.isinf(n) or math.isinf(d):
            raise DomainError(f"ratio members must be finite and positive, got ({n}, {d})")
        logs.append(math.log(n) - math.log(d))
    if not logs:
        raise EmptyInput("no ratio pairs")
    return 100.0 * math.exp(math.fsum(logs) / len(logs))


@dataclass(frozen=True)
class InstanceRecord:
    instance_id: str
    level: int
    scale: int
    results: dict
    valid: dict
    provenance: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    provider_runtime: float = 0.0

    @property
    def failed(self) -> bool:
        return bool(self.errors)

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "level": self.level,
            "scale": self.scale,
            "results": {m: (r.to_dict() if r is not None else None) for m, r in self.results.items()},
            "valid": dict(self.valid),
            "provenance": dict(self.provenance),
            "errors": dict(self.errors),
            "provider_runtime_ms": self.provider_runtime * 1000.0,
        }


def valid_path_ratio(records: Sequence[InstanceRecord], method: str = "mmp_astar") -> float:
    """Share of records, in percent, whose ``method`` path passed validation."""
    records = [r for r in records if method in r.valid]
    if not records:
        raise EmptyInput(f"no records for {method}")
    return 100.0 * sum(1 for r in records if r.valid[method]) / len(records)


@dataclass(frozen=True)
class MethodSummary:
    method: str
    n_instances: int
    n_ratio_pairs: int
    operation_ratio: Optional[float]
    storage_ratio: Optional[float]
    relative_path_length: Optional[float]
    valid_path_ratio: float
    runtime_s: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def summarize(records: Sequence[InstanceRecord], method: str) -> MethodSummary:
    ops, storage, length = [], [], []
    runtime = 0.0
    for r in records:
        res, base = r.results.get(method), r.results.get("astar")
        if res is not None:
            runtime += res.runtime
        if res is None or base is None or not (res.found and base.found):
            continue
        ops.append((res.operations, base.operations))
        storage.append((res.peak_storage, base.peak_storage))
        length.append((res.cost, base.cost))

    def gm(pairs):
        return geometric_mean_ratio(pairs) if pairs else None

    return MethodSummary(
        method=method,
        n_instances=len(records),
        n_ratio_pairs=len(ops),
        operation_ratio=gm(ops),
        storage_ratio=gm(storage),
        relative_path_length=gm(length),
        valid_path_ratio=valid_path_ratio(records, method) if records else 0.0,
        runtime_s=runtime,
    )


@dataclass
class MetricsReport:
    methods: tuple
    alpha: float
    provider: str
    records: list
    overall: dict = field(init=False)
    per_level: dict = field(init=False)

    def __post_init__(self):
        self.overall = {m: summarize(self.records, m) for m in self.methods}
        levels = sorted({r.level for r in self.records})
        self.per_level = {
            lvl: {m: summarize([r for r in self.records if r.level == lvl], m) for m in self.methods}
            for lvl in levels
        }

    @property
    def operation_ratio(self) -> Optional[float]:
        return self.overall["mmp_astar"].operation_ratio if "mmp_astar" in self.overall else None

    def runtime_totals(self) -> dict:
        totals = {m: s.runtime_s for m, s in self.overall.items()}
        totals["provider"] = math.fsum(r.provider_runtime for r in self.records)
        return totals

    def to_dict(self, include_instances: bool = True) -> dict:
        out = {
            "header": {
                "exclusion_rule": EXCLUSION_RULE,
                "alpha": self.alpha,
                "provider": self.provider,
                "methods": list(self.methods),
                "n_instances": len(self.records),
                "n_failed": sum(1 for r in self.records if r.failed),
            },
            "overall": {m: s.to_dict() for m, s in self.overall.items()},
            "per_level": {str(lvl): {m: s.to_dict() for m, s in by.items()} for lvl, by in self.per_level.items()},
            "runtime_totals_s": self.runtime_totals(),
        }
        if include_instances:
            out["instances"] = [r.to_dict() for r in self.records]
        return out

    # -- writers ------------------------------------------------------------
    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def write_csv(self, path) -> None:
        fields = ("status", "cost", "operations", "peak_storage", "switches", "runtime_ms", "valid")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["# " + EXCLUSION_RULE])
            w.writerow(["instance_id", "level", "scale", "provider", "fallback_used", "error"]
                       + [f"{m}_{f}" for m in self.methods for f in fields])
            for r in self.records:
                row = [r.instance_id, r.level, r.scale, r.provenance.get("provider", ""),
                       r.provenance.get("fallback_used", False), "; ".join(f"{k}: {v}" for k, v in r.errors.items())]
                for m in self.methods:
                    res = r.results.get(m)
                    if res is None:
                        row += ["error", "", "", "", "", "", False]
                    else:
                        row += [res.status, repr(res.cost), res.operations, res.peak_storage, res.switches,
                                f"{res.runtime * 1000.0:.3f}", r.valid.get(m, False)]
                w.writerow(row)
            w.writerow([])
            w.writerow(["summary", "level", "method", "n_instances", "n_ratio_pairs", "operation_ratio",
                        "storage_ratio", "relative_path_length", "valid_path_ratio", "runtime_s"])
            groups = [("all", self.overall)] + [(str(lvl), by) for lvl, by in self.per_level.items()]
            for label, by in groups:
                for m, s in by.items():
                    w.writerow(["summary", label, m, s.n_instances, s.n_ratio_pairs, _num(s.operation_ratio),
                                _num(s.storage_ratio), _num(s.relative_path_length), _num(s.valid_path_ratio),
                                f"{s.runtime_s:.6f}"])

    def write_tsv(self, path) -> None:
        """Level against ratio series, one row per (level, method)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, delimiter="\t", lineterminator="\n")
            w.writerow(["level", "method", "operation_ratio", "storage_ratio", "relative_path_length",
                        "valid_path_ratio", "n_instances"])
            for lvl, by in self.per_level.items():
                for m, s in by.items():
                    w.writerow([lvl, m, _num(s.operation_ratio), _num(s.storage_ratio),
                                _num(s.relative_path_length), _num(s.valid_path_ratio), s.n_instances])

    def write_all(self, out_dir, stem: str = "report") -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / f"{stem}.json", out / f"{stem}.csv", out / f"{stem}.tsv"]
        self.write_json(paths[0])
        self.write_csv(paths[1])
        self.write_tsv(paths[2])
        return paths


def _num(v) -> str:
    return "" if v is None else f"{v:.4f}"


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def _checked(env: GridEnvironment, res: SearchResult) -> bool:
    return res.found and validate_path(env, res.path)


def run_instance(entry: SuiteEntry, env: GridEnvironment, methods: Sequence[str], provider: Optional[Provider],
                 config: SearchConfig = SearchConfig()) -> InstanceRecord:
    """Run every method on one map; failures are captured, never raised."""
    results, valid, errors, provenance = {}, {}, {}, {}
    provider_runtime = 0.0
    try:
        results["astar"] = astar(env, replace(config, mode="plain_astar"))
        valid["astar"] = _checked(env, results["astar"])
    except Exception as exc:  # noqa: BLE001 - one bad instance must not sink the suite
        results["astar"], valid["astar"] = None, False
        errors["astar"] = f"{type(exc).__name__}: {exc}"

    guided = [m for m in methods if m != "astar"]
    proposal = None
    if guided:
        t0 = time.perf_counter()
        try:
            if provider is None:
                raise ValueError("guided methods need a waypoint provider")
            proposal = provider(env, entry.id)
            provenance = proposal.provenance()
        except Exception as exc:  # noqa: BLE001
            errors["provider"] = f"{type(exc).__name__}: {exc}"
            provenance = {"provider": getattr(provider, "kind", "unknown"), "fallback_used": False}
        provider_runtime = time.perf_counter() - t0

    for m in guided:
        if proposal is None:
            results[m], valid[m] = None, False
            continue
        try:
            if m == "llm_astar":
                res = llm_astar(env, proposal.llm, config)
            else:
                res = mmp_astar(env, proposal.mmp, replace(config, mode="waypoint"))
            results[m], valid[m] = res, _checked(env, res)
        except Exception as exc:  # noqa: BLE001
            results[m], valid[m] = None, False
            errors[m] = f"{type(exc).__name__}: {exc}"

    return InstanceRecord(entry.id, entry.level, entry.scale, results, valid, provenance, errors, provider_runtime)


def _load(manifest) -> list[tuple[SuiteEntry, GridEnvironment]]:
    if isinstance(manifest, (str, Path)):
        return list(iter_suite(manifest))
    return list(manifest)


def run_suite(manifest, methods: Iterable[str] = METHODS, provider: Provider | str | None = "oracle:10",
              config: SearchConfig = SearchConfig(), workers: int = 1) -> MetricsReport:
    """Run ``methods`` over a manifest path or a list of ``(SuiteEntry, env)`` pairs.

    ``workers > 1`` overlaps instances on a thread pool, which pays off when a
    live provider spends its time waiting on the network.
    """
    methods = canonical_methods(methods)
    items = _load(manifest)
    name = provider if isinstance(provider, str) else getattr(provider, "kind", "custom")
    if isinstance(provider, str):
        provider = make_provider(provider)

    def one(item):
        return run_instance(item[0], item[1], methods, provider, config)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, items))
    else:
        records = [one(item) for item in items]
    return MetricsReport(methods, config.alpha, str(name), records)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    operation_ratio: Optional[float]
    storage_ratio: Optional[float]
    relative_path_length: Optional[float]
    valid_path_ratio: float


def sweep_alpha(manifest, alphas: Sequence[float] = ALPHA_SWEEP, provider: Provider | str = "oracle:10",
                config: SearchConfig = SearchConfig()) -> list[SweepRow]:
    """MMP-A* against A* at each decay factor; A* and the provider run once per map."""
    items = _load(manifest)
    if isinstance(provider, str):
        provider = make_provider(provider)
    prepared = []
    for entry, env in items:
        base = astar(env, replace(config, mode="plain_astar"))
        prepared.append((entry, env, base, provider(env, entry.id)))

    rows = []
    for alpha in alphas:
        cfg = replace(config, mode="waypoint", alpha=float(alpha))
        records = []
        for entry, env, base, proposal in prepared:
            res = mmp_astar(env, proposal.mmp, cfg)
            records.append(InstanceRecord(entry.id, entry.level, entry.scale,
                                          {"astar": base, "mmp_astar": res},
                                          {"astar": _checked(env, base), "mmp_astar": _checked(env, res)}))
        s = summarize(records, "mmp_astar")
        rows.append(SweepRow(float(alpha), s.operation_ratio, s.storage_ratio, s.relative_path_length,
                             s.valid_path_ratio))
    return rows


def write_sweep_tsv(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["alpha", "operation_ratio", "storage_ratio", "relative_path_length"])
        for r in rows:
            w.writerow([f"{r.alpha:g}", _num(r.operation_ratio), _num(r.storage_ratio), _num(r.relative_path_length)])
