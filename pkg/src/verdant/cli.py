"""Command-line front end.

Exit codes: 0 success, 1 error, 2 no feasible design.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from verdant import __version__
from verdant.approxmul.library import find_variant, load_library, save_library
from verdant.approxmul.netlist import build_exact_multiplier, dumps
from verdant.approxmul.search import SearchParams, pareto_search
from verdant.config import CONFIG_ENV, config_path, load_config
from verdant.errors import InfeasibleError, VerdantError
from verdant.optimizer import GaParams, optimize
from verdant.perf.workloads import resolve_workload
from verdant.pipeline import (
    SWEEP_COLUMNS,
    baseline_comparison,
    default_exact,
    make_context,
    smallest_within,
    sweep,
)

log = logging.getLogger("verdant")

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


@dataclass
class RunManifest:
    command: str
    args: dict
    seed: int | None
    config_paths: list[str] = field(default_factory=list)
    tool_version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))


def _manifest(args, command: str, seed=None) -> dict:
    skip = {"func", "verbose"}
    recorded = {k: v for k, v in vars(args).items() if k not in skip}
    paths = [str(p) for p in (config_path(args.tech), args.__dict__.get("variants")) if p]
    return asdict(RunManifest(command, recorded, seed, paths))


def _num(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


# -- commands --------------------------------------------------------------

def cmd_gen_multipliers(args) -> int:
    if args.out in (None, "-"):
        raise VerdantError("gen-multipliers needs --out PATH")
    if not Path(args.out).parent.is_dir():
        raise VerdantError(f"cannot write {args.out}: directory does not exist")
    cfg = load_config(args.tech)
    search = cfg.multiplier_search
    params = SearchParams(
        population=args.pop or int(search.get("population", 64)),
        generations=args.gens or int(search.get("generations", 50)),
        crossover_p=float(search.get("crossover_p", 0.9)),
        seed=args.seed,
        workers=args.workers,
    )
    base = build_exact_multiplier(args.bitwidth)
    gate_area = cfg.gate_area or None
    front = pareto_search(base, params, gate_area=gate_area)
    save_library(args.out, front, args.bitwidth, _manifest(args, "gen-multipliers", args.seed), gate_area)
    areas = [v.area for v in front]
    mreds = [v.metrics.mred for v in front]
    print(
        f"{len(front)} variants; area {min(areas):g}..{max(areas):g} GE; "
        f"MRED {min(mreds):.6g}..{max(mreds):.6g}; wrote {args.out}"
    )
    return EXIT_OK


def _load_variants(args, cfg):
    if args.variants:
        return load_library(args.variants)
    return [default_exact(gate_area=cfg.gate_area or None)]


def cmd_evaluate(args) -> int:
    cfg = load_config(args.tech)
    network, workload = resolve_workload(args.workload)
    library = _load_variants(args, cfg)
    chosen = []
    for vid in args.variant or []:
        chosen.append(find_variant(library, vid))
    for drop in args.drop_max or []:
        chosen.append(smallest_within(library, cfg.accuracy, drop, network))
    if not chosen:
        chosen = [next((v for v in library if v.is_exact), None) or default_exact()]
    chosen = list({v.id: v for v in chosen}.values())
    pe_sizes = args.sweep or list(cfg.accelerator.pe_sizes)
    rows = sweep(cfg, args.node, network, workload, chosen, pe_sizes)

    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(_manifest(args, "evaluate"), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_num(row[c]) for c in SWEEP_COLUMNS])
    _write(args.out, buf.getvalue())
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = load_config(args.tech)
    network, workload = resolve_workload(args.workload)
    library = _load_variants(args, cfg)
    ctx = make_context(cfg, args.node, network, workload, library, args.fps_min, args.drop_max)
    defaults = cfg.ga
    ga = GaParams(
        population=args.pop or int(defaults.get("population", 64)),
        generations=args.gens if args.gens is not None else int(defaults.get("generations", 100)),
        tournament_k=int(defaults.get("tournament_k", 3)),
        crossover_p=float(defaults.get("crossover_p", 0.9)),
        mutation_p=defaults.get("mutation_p"),
        elitism=int(defaults.get("elitism", 2)),
        seed=args.seed,
    )
    manifest = _manifest(args, "optimize", args.seed)
    try:
        run = optimize(ctx, ga, workers=args.workers)
    except InfeasibleError as exc:
        report = {"manifest": manifest, "status": "infeasible", "binding": exc.binding, "detail": exc.detail}
        _write(args.out, json.dumps(report, indent=2) + "\n")
        print(str(exc), file=sys.stderr)
        return EXIT_INFEASIBLE

    config, variant = run.result.config, ctx.space.variants[run.best.variant_idx]
    report = {
        "manifest": manifest,
        "status": "ok",
        "workload": network,
        "node_nm": args.node,
        "constraints": {"fps_min": args.fps_min, "drop_max": args.drop_max},
        "ga": asdict(ga),
        "best": {
            "chromosome": run.best._asdict(),
            "config": asdict(config),
            "variant": {
                "id": variant.id,
                "area": variant.area,
                "MED": variant.metrics.med,
                "MRED": variant.metrics.mred,
                "ER": variant.metrics.er,
                "WCE": variant.metrics.wce,
            },
        },
        "result": run.result.as_dict(),
        "history": run.history,
        "evaluations": run.evaluations,
        "baseline": baseline_comparison(ctx, run.result),
    }
    _write(args.out, json.dumps(_jsonable(report), indent=2) + "\n")
    r = run.result
    base = report["baseline"].get("best_exact")
    msg = f"best: {r.pes} PEs, variant {variant.id}, {r.embodied:.4g} gCO2e, {r.fps:.1f} FPS, CDP {r.cdp:.4g}"
    if base:
        msg += f"; {base['carbon_reduction_pct']:.1f}% less carbon than best exact baseline"
    print(msg, file=sys.stderr)
    return EXIT_OK


def cmd_netlist(args) -> int:
    if args.variants:
        net = find_variant(load_library(args.variants), args.variant).netlist
    else:
        net = build_exact_multiplier(args.bitwidth)
    _write(args.out, dumps(net))
    return EXIT_OK


# -- argument parsing ------------------------------------------------------

def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="verdant",
        description="Carbon-aware DNN accelerator exploration with approximate multipliers.",
        epilog=f"{CONFIG_ENV} may point to a directory holding verdant.yaml.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--tech", help="config YAML with technology presets (default: builtin or $%s)" % CONFIG_ENV)
        sp.add_argument("--out", help="output path ('-' for stdout)")
        sp.add_argument("--workers", type=int, default=1, help="evaluation threads")
        sp.add_argument("-v", "--verbose", action="store_true")

    g = sub.add_parser("gen-multipliers", help="search and characterize approximate multipliers")
    common(g)
    g.add_argument("--bitwidth", type=int, default=8)
    g.add_argument("--pop", type=int)
    g.add_argument("--gens", type=int)
    g.add_argument("--seed", type=int, default=1)
    g.set_defaults(func=cmd_gen_multipliers)

    e = sub.add_parser("evaluate", help="fixed-architecture sweep over PE counts, as CSV")
    common(e)
    e.add_argument("--workload", default="vgg16", help="built-in name or layer file")
    e.add_argument("--node", type=int, default=7)
    e.add_argument("--variants", help="variant library JSON")
    e.add_argument("--variant", action="append", help="variant id (repeatable)")
    e.add_argument("--drop-max", type=float, action="append",
                   help="add the smallest variant within this accuracy drop (repeatable)")
    e.add_argument("--sweep", type=_int_list, help="comma-separated PE counts")
    e.set_defaults(func=cmd_evaluate)

    o = sub.add_parser("optimize", help="GA search for the lowest-CDP feasible design")
    common(o)
    o.add_argument("--workload", default="vgg16")
    o.add_argument("--node", type=int, default=7)
    o.add_argument("--variants", help="variant library JSON")
    o.add_argument("--fps-min", type=float, default=30.0)
    o.add_argument("--drop-max", type=float, default=2.0)
    o.add_argument("--pop", type=int)
    o.add_argument("--gens", type=int)
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_optimize)

    n = sub.add_parser("netlist", help="export a netlist in the line-oriented text format")
    common(n)
    n.add_argument("--variants", help="variant library JSON")
    n.add_argument("--variant", help="variant id (with --variants)")
    n.add_argument("--bitwidth", type=int, default=8, help="exact multiplier width without --variants")
    n.set_defaults(func=cmd_netlist)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"verdant: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (VerdantError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"verdant: error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
