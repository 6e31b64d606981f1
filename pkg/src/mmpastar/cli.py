"""Command-line entry point.

Exit codes: 0 success, 1 other failure, 2 I/O or input schema error,
3 generation exhausted, 4 no path found, 5 provider transport failure.
Machine-readable JSON goes to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import envgen
from .bench import ALPHA_SWEEP, canonical_methods, run_suite, sweep_alpha, write_sweep_tsv
from .errors import FileError, GenerationExhausted, MMPError, SchemaError, TransportError
from .search import SearchConfig, astar, llm_astar, mmp_astar
from .waypoints.client import ProviderConfig
from .waypoints.prompts import PromptStyle
from .waypoints.providers import RunLog, load_waypoint_file, make_provider
from .waypoints.pipeline import sanitize
from .waypoints.render import RenderSpec, render_pair

log = logging.getLogger("mmpastar")

EXIT_OK, EXIT_FAIL, EXIT_IO, EXIT_EXHAUSTED, EXIT_UNREACHABLE, EXIT_TRANSPORT = 0, 1, 2, 3, 4, 5

DEFAULTS = {
    "alpha": 0.7,
    "heuristic": "euclidean",
    "tie_break": "max_g_then_yx",
    "workers": 1,
    "output_dir": ".",
    "provider": "oracle:10",
    "prompt_style": "few_shot_5",
    "allow_fallback": True,
    "run_log": None,
    "cell_px": None,
    "llm": {},
    "vlm": {},
}


def load_config(path) -> dict:
    """Read a JSON config file; unknown keys are rejected so typos surface."""
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise FileError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("$", "config must be a JSON object")
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise SchemaError(unknown[0], "unknown config key")
    for leg in ("llm", "vlm"):
        if "api_key" in data.get(leg, {}):
            raise SchemaError(f"{leg}.api_key", "keys are read from the variable named by api_key_env")
    return data


def resolve(args, config: dict, key: str):
    """Command line beats config file beats built-in default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return DEFAULTS[key]


def _search_config(args, config) -> SearchConfig:
    return SearchConfig(
        alpha=float(resolve(args, config, "alpha")),
        heuristic=resolve(args, config, "heuristic"),
        tie_break=resolve(args, config, "tie_break"),
    )


def _provider(args, config):
    spec = resolve(args, config, "provider")
    fallback = resolve(args, config, "allow_fallback")
    run_log = resolve(args, config, "run_log")
    return make_provider(
        spec,
        llm_cfg=ProviderConfig.from_dict(config.get("llm", {})),
        vlm_cfg=ProviderConfig.from_dict(config.get("vlm", {})),
        style=PromptStyle(resolve(args, config, "prompt_style")),
        allow_fallback=bool(fallback),
        log=RunLog(run_log) if run_log else None,
    )


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_generate(args, config) -> int:
    out = Path(args.out or Path(resolve(args, config, "output_dir")) / f"suite-{args.preset}")
    manifest = envgen.build_suite(args.preset, args.seed, out, count=args.count)
    if args.render:
        cell_px = resolve(args, config, "cell_px")
        render_dir = out / "renders"
        render_dir.mkdir(exist_ok=True)
        for entry, env in envgen.iter_suite(out):
            spec = RenderSpec(cell_px) if cell_px else RenderSpec.fit(env)
            clean, _ = render_pair(env, [env.start, env.goal], spec)
            (render_dir / f"{entry.id}.png").write_bytes(clean)
    _emit({"out": str(out), "preset": args.preset, "seed": args.seed, "instances": len(manifest["instances"])})
    return EXIT_OK


def cmd_plan(args, config) -> int:
    env = envgen.load(args.map)
    cfg = _search_config(args, config)
    method = canonical_methods([args.method])[0]
    waypoints = None
    if method == "astar":
        result = astar(env, replace(cfg, mode="plain_astar"))
    else:
        proposal = _provider(args, config)(env, Path(args.map).stem)
        T = proposal.llm if method == "llm_astar" else proposal.mmp
        waypoints = T.as_lists()
        result = llm_astar(env, T, cfg) if method == "llm_astar" else mmp_astar(env, T, cfg)
    out = {"method": method, **result.to_dict()}
    if waypoints is not None:
        out["waypoints"] = waypoints
    _emit(out)
    return EXIT_OK if result.found else EXIT_UNREACHABLE


def cmd_bench(args, config) -> int:
    cfg = _search_config(args, config)
    out = Path(args.out or resolve(args, config, "output_dir"))
    out.mkdir(parents=True, exist_ok=True)
    items = list(envgen.iter_suite(args.manifest))
    provider = _provider(args, config)
    summary = {"out": str(out)}

    if args.alpha_sweep is not None:
        alphas = ALPHA_SWEEP if args.alpha_sweep == "" else [float(a) for a in args.alpha_sweep.split(",")]
        rows = sweep_alpha(items, alphas, provider, cfg)
        write_sweep_tsv(rows, out / "alpha_sweep.tsv")
        summary["alpha_sweep"] = [r.__dict__ for r in rows]
    else:
        methods = canonical_methods(args.methods.split(","))
        workers = int(resolve(args, config, "workers"))
        report = run_suite(items, methods, provider, cfg, workers=workers)
        report.write_all(out)
        summary.update(report.to_dict(include_instances=False))
        if any(r.failed for r in report.records):
            log.warning("%d instance(s) recorded errors; see report.json",
                        sum(1 for r in report.records if r.failed))
            _emit(summary)
            return EXIT_FAIL
    _emit(summary)
    return EXIT_OK


def cmd_render(args, config) -> int:
    env = envgen.load(args.map)
    if args.waypoints:
        T = sanitize(load_waypoint_file(args.waypoints), env)
    elif args.provider:
        T = _provider(args, config)(env, Path(args.map).stem).llm
    else:
        T = sanitize([], env)
    cell_px = resolve(args, config, "cell_px")
    spec = RenderSpec(cell_px) if cell_px else RenderSpec.fit(env)
    clean, annotated = render_pair(env, T, spec)
    out = Path(args.out or resolve(args, config, "output_dir"))
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.map).stem
    paths = [out / f"{stem}_clean.png", out / f"{stem}_annotated.png"]
    paths[0].write_bytes(clean)
    paths[1].write_bytes(annotated)
    _emit({"clean": str(paths[0]), "annotated": str(paths[1]), "waypoints": T.as_lists()})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_search_flags(p):
    p.add_argument("--alpha", type=float, help="decay factor in [0, 1] (default 0.7)")
    p.add_argument("--heuristic", choices=("euclidean", "octile"))
    p.add_argument("--tie-break", dest="tie_break", choices=("max_g_then_yx",))


def _add_provider_flags(p, default_hint="oracle:10"):
    p.add_argument("--provider", help=f"none | oracle[:stride] | adversarial[:stride] | scripted:<path> | llm | mmp "
                                      f"(default {default_hint})")
    p.add_argument("--prompt-style", dest="prompt_style", choices=[s.value for s in PromptStyle])
    p.add_argument("--no-fallback", dest="allow_fallback", action="store_const", const=False,
                   help="fail with exit 5 instead of degrading when a live endpoint is unreachable")
    p.add_argument("--run-log", dest="run_log", help="append provider calls to this JSON-lines file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmpastar", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded benchmark suite")
    g.add_argument("--preset", choices=envgen.PRESETS, default="paper-core")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, help="override the preset's base instance count")
    g.add_argument("--out", help="output directory (default <output_dir>/suite-<preset>)")
    g.add_argument("--render", action="store_true", help="also write a PNG per instance")
    g.add_argument("--cell-px", dest="cell_px", type=int)
    g.set_defaults(func=cmd_generate)

    p = sub.add_parser("plan", help="solve one map and print the result as JSON")
    p.add_argument("map")
    p.add_argument("--method", choices=("astar", "llm", "mmp"), default="mmp")
    _add_search_flags(p)
    _add_provider_flags(p)
    p.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="run methods over a suite and write JSON/CSV/TSV reports")
    b.add_argument("manifest", help="manifest.json or the suite directory")
    b.add_argument("--methods", default="astar,llm,mmp")
    b.add_argument("--out")
    b.add_argument("--workers", type=int)
    b.add_argument("--alpha-sweep", dest="alpha_sweep", nargs="?", const="",
                   help="comma-separated alphas (default 0.1,0.3,0.5,0.7,0.9,1.0); writes alpha_sweep.tsv")
    _add_search_flags(b)
    _add_provider_flags(b)
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("render", help="write the clean and annotated PNG pair for one map")
    r.add_argument("map")
    r.add_argument("--waypoints", help='JSON file {"waypoints": [[x, y], ...]}')
    r.add_argument("--out")
    r.add_argument("--cell-px", dest="cell_px", type=int)
    _add_provider_flags(r, default_hint="none")
    r.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except TransportError as exc:
        log.error("provider transport failed: %s", exc)
        return EXIT_TRANSPORT
    except GenerationExhausted as exc:
        log.error("%s", exc)
        return EXIT_EXHAUSTED
    except (FileError, SchemaError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (MMPError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
