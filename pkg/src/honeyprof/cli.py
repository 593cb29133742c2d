"""Batch command-line front end.

Every subcommand reads files and writes files under ``--out``.  Outputs are
derived from the data only, so reruns on the same inputs are byte-identical.
Failures print a single JSON line on stderr and exit non-zero.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import date
from pathlib import Path

from . import earlywarn, enrich, metrics, seqmine, synthgen
from .flowcore import HoneypotRegistry, RegistryError, read_summaries, write_summaries
from .ingest import PRESETS, FlowSchema, IngestConfigError, Ingestion
from .profiler import PROFILES, profile_matrix

log = logging.getLogger("honeyprof")

EXIT_CONFIG = 2
EXIT_GUARD = 3


class ConfigError(Exception):
    pass


# ---- shared helpers -------------------------------------------------------


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) in (None, []):
            raise ConfigError(f"--{n.replace('_', '-')} is required for '{args.command}'")


def _exists(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"input not found: {p}")
    return p


def _registry(args) -> HoneypotRegistry:
    _need(args, "registry")
    return HoneypotRegistry.load(_exists(args.registry))


def _schema(args) -> FlowSchema:
    if args.schema:
        return FlowSchema.load(_exists(args.schema))
    return PRESETS[args.preset]


def _ingest(args, registry):
    _need(args, "flows")
    ing = Ingestion(registry, _schema(args))
    attacks = list(ing.attacks([_exists(f) for f in args.flows]))
    return attacks, ing.report


def _date(s):
    return date.fromisoformat(s) if s else None


def _annotate(args, summaries):
    geo = enrich.load_continent_index(_exists(args.geo)) if args.geo else None
    tor = enrich.EMPTY_TOR
    if args.tor_dir:
        tor = enrich.load_tor_exits(_exists(args.tor_dir), (_date(args.tor_from), _date(args.tor_to)))
    benign = enrich.load_benign_scanners(_exists(args.benign)) if args.benign else enrich.EMPTY_BENIGN
    return {s.ip: s for s in enrich.annotate(summaries.values(), geo, tor, benign)}


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_summaries(args, registry):
    """Summaries from ``--summaries``, ``<out>/summaries.jsonl`` or fresh ingestion."""
    if args.summaries:
        return read_summaries(_exists(args.summaries))
    cached = Path(args.out) / "summaries.jsonl"
    if not args.flows and cached.exists():
        return read_summaries(cached)
    attacks, _ = _ingest(args, registry)
    return _annotate(args, metrics.aggregate(attacks))


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    log.info("wrote %s", path)


# ---- commands -------------------------------------------------------------


def cmd_ingest(args) -> int:
    registry = _registry(args)
    attacks, report = _ingest(args, registry)
    summaries = _annotate(args, metrics.aggregate(attacks))
    out = _out(args)
    write_summaries(summaries, out / "summaries.jsonl")
    _write(out / "ingest_report.json", json.dumps(vars(report), indent=2, sort_keys=True) + "\n")
    return 0


def cmd_report(args) -> int:
    registry = _registry(args)
    summaries = _load_summaries(args, registry)
    n = len(registry)
    out = _out(args)
    ext = args.format
    by_h = metrics.table_by_H(summaries, n)
    by_s = metrics.table_by_S(summaries)
    if ext == "csv":
        emit_rows, emit_matrix = metrics.stat_rows_csv, metrics.matrix_csv
    else:
        emit_rows = metrics.stat_rows_json
        emit_matrix = lambda m, row_name="row": metrics.matrix_json(m)
    _write(out / f"tables_by_H.{ext}", emit_rows(by_h, "H"))
    _write(out / f"tables_by_S.{ext}", emit_rows(by_s, "S"))
    for weight in ("attackers", "attacks"):
        _write(out / f"tables_S_H_{weight}.{ext}",
               emit_matrix(metrics.table_by_S_and_H(summaries, n, weight), "H"))
        _write(out / f"tables_continent_H_{weight}.{ext}",
               emit_matrix(metrics.table_by_continent_and_H(summaries, n, weight), "continent"))

    stats = metrics.stats_by_S_and_H(summaries, n)
    cells = [(h, b, *stats[(h, b)]) for h in range(1, n + 1) for b in metrics.S_BUCKETS]
    if ext == "csv":
        lines = ["H,S,avg,std,median"]
        lines += [f"{h},{b},{avg:.2f},{std:.2f},{med:.2f}" for h, b, avg, std, med in cells]
        _write(out / "tables_S_H_stats.csv", "\n".join(lines) + "\n")
    else:
        records = [
            {"H": h, "S": b, "avg": round(avg, 2), "std": round(std, 2), "median": round(med, 2)}
            for h, b, avg, std, med in cells
        ]
        _write(out / "tables_S_H_stats.json", json.dumps(records, indent=2) + "\n")

    table = (enrich.load_penetration_table(_exists(args.penetration))
             if args.penetration else enrich.INTERNET_PENETRATION_2023)
    pen = {}
    for weight in ("attackers", "attacks"):
        share = metrics.continent_shares(summaries, weight)
        pen[weight] = (share, metrics.penetration_ratio(share, table))
    if ext == "csv":
        lines = ["continent,expected_pct,attackers_pct,attackers_ratio,attacks_pct,attacks_ratio"]
        for c in share:
            lines.append(",".join([
                c, metrics.fmt2(table[c]) if c in table else "",
                metrics.fmt2(pen["attackers"][0][c]), metrics.fmt2(pen["attackers"][1][c]),
                metrics.fmt2(pen["attacks"][0][c]), metrics.fmt2(pen["attacks"][1][c]),
            ]))
        _write(out / "tables_penetration.csv", "\n".join(lines) + "\n")
    else:
        _write(out / "tables_penetration.json", json.dumps({
            w: {c: {"observed_pct": round(s[c], 2),
                    "ratio": r[c] if isinstance(r[c], str) else round(r[c], 2)} for c in s}
            for w, (s, r) in pen.items()}, indent=2) + "\n")
    return 0


def cmd_profiles(args) -> int:
    registry = _registry(args)
    summaries = _load_summaries(args, registry)
    pm = profile_matrix(summaries)
    out = _out(args)
    if args.format == "csv":
        _write(out / "tables_profiles.csv", pm.to_csv())
    else:
        _write(out / "tables_profiles.json", pm.to_json())
    return 0


def _sequences(args, registry):
    attacks, _ = _ingest(args, registry)
    seqs = list(seqmine.build_sequences(attacks).values())
    if not args.all_sequences:
        seqs = seqmine.filter_full_coverage(seqs, registry)
    return attacks, sorted(seqs, key=lambda s: s.attacker_ip)


def cmd_patterns(args) -> int:
    registry = _registry(args)
    _, seqs = _sequences(args, registry)
    k = args.k or len(registry)
    counts = seqmine.count_patterns(seqs, k, args.dtw_threshold, ids=registry.ids)
    out = _out(args)
    _write(out / "patterns.csv", seqmine.patterns_csv(counts))
    asc, desc = seqmine.ip_order_patterns(registry)
    summary = {
        "k": k,
        "threshold": args.dtw_threshold,
        "sequences": len(seqs),
        "top_cyclic_classes": [
            {"class": "-".join(map(str, c)), "exact_count": n}
            for c, n in seqmine.rank_cyclic_classes(counts)[:10]
        ],
    }
    if k == len(registry):
        for name, pat in (("ascending_ip", asc), ("descending_ip", desc)):
            fs = seqmine.family_share(counts, pat, len(seqs))
            summary[name] = {
                "pattern": "-".join(map(str, pat)),
                "exact_matches": fs.exact_matches, "exact_total": fs.exact_total,
                "near_matches": fs.near_matches, "near_total": fs.near_total,
            }
    _write(out / "patterns_summary.json", json.dumps(summary, indent=2) + "\n")
    return 0


def cmd_graph(args) -> int:
    registry = _registry(args)
    _, seqs = _sequences(args, registry)
    out = _out(args)
    g = seqmine.filter_edges(seqmine.transition_graph(seqs), args.min_edge)
    _write(out / "graph.dot", g.to_dot())
    _write(out / "graph.gexf", g.to_gexf())
    if args.group_by_start:
        for start, sub in seqmine.transition_graph(seqs, group_by_start=True).items():
            sub = seqmine.filter_edges(sub, args.min_edge)
            _write(out / f"graph_start{start}.dot", sub.to_dot(f"start{start}"))
            _write(out / f"graph_start{start}.gexf", sub.to_gexf())
    return 0


def cmd_earlywarn(args) -> int:
    registry = _registry(args)
    _need(args, "production")
    if args.production not in registry.ids:
        raise ConfigError(f"production honeypot {args.production} is not in the registry")
    attacks, _ = _ingest(args, registry)
    table = earlywarn.SightingTable.from_attacks(attacks, registry)
    sweep = earlywarn.sweep_sensor_sets(table, args.production, args.kmax, args.target)
    out = _out(args)
    _write(out / "earlywarn.csv", earlywarn.reports_csv(sweep.reports))
    _write(out / "earlywarn_summary.json", json.dumps({
        "production": sweep.production,
        "target_coverage_driven": sweep.target,
        "minimal_k": sweep.minimal_k if sweep.minimal_k is not None else "none",
        "best_sensors": list(sweep.best_sensors) if sweep.best_sensors else "none",
    }, indent=2) + "\n")
    return 0


def cmd_synth(args) -> int:
    registry = HoneypotRegistry.load(_exists(args.registry)) if args.registry else synthgen.default_registry()
    cfg = synthgen.SynthConfig(
        seed=args.seed,
        registry=registry,
        counts={p: args.per_profile for p in PROFILES},
        unclassified=args.unclassified,
        sweep_fractions={"ascending": args.ascending, "descending": args.descending,
                         "random": round(1.0 - args.ascending - args.descending, 12)},
    )
    try:
        data = synthgen.generate(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    data.write(_out(args))
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "report": cmd_report,
    "profiles": cmd_profiles,
    "patterns": cmd_patterns,
    "graph": cmd_graph,
    "earlywarn": cmd_earlywarn,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--flows", action="append", default=[], help="flow log (repeatable)")
    common.add_argument("--registry", help="honeypot_id,name,city,ip CSV")
    common.add_argument("--schema", help="key = value column mapping file")
    common.add_argument("--preset", choices=sorted(PRESETS), default="simple")
    common.add_argument("--summaries", help="summaries.jsonl from a previous ingest")
    common.add_argument("--geo", help="cidr,continent CSV")
    common.add_argument("--tor-dir", help="directory of YYYY-MM-DD* exit lists")
    common.add_argument("--tor-from")
    common.add_argument("--tor-to")
    common.add_argument("--benign", help="benign scanner IP list")
    common.add_argument("--penetration", help="continent,share CSV")
    common.add_argument("--out", default="out")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--k", type=int)
    common.add_argument("--dtw-threshold", type=float, default=0.0)
    common.add_argument("--min-edge", type=int, default=1)
    common.add_argument("--group-by-start", action="store_true")
    common.add_argument("--all-sequences", action="store_true",
                        help="do not restrict to attackers that hit every honeypot")
    common.add_argument("--production", type=int)
    common.add_argument("--kmax", type=int, default=2)
    common.add_argument("--target", type=float, default=1.0)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--per-profile", type=int, default=25)
    common.add_argument("--unclassified", type=int, default=0)
    common.add_argument("--ascending", type=float, default=0.4)
    common.add_argument("--descending", type=float, default=0.2)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="honeyprof", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (seqmine.PatternGuardError, earlywarn.EarlyWarningError) as exc:
        kind, code = "guard", EXIT_GUARD
        msg = str(exc)
    except (ConfigError, IngestConfigError, RegistryError, enrich.EnrichmentError, ValueError) as exc:
        kind, code = "config", EXIT_CONFIG
        msg = str(exc)
    print(json.dumps({"error": kind, "command": args.command, "message": msg}), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
