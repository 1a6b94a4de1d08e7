"""Command-line interface: run batches, dump surfaces, re-summarize logs.

Subcommands
-----------
run        execute a config's full condition grid: writes manifest.json,
           trials.jsonl and summary.csv into --out-dir
utility    dump the utility surface over all candidate stimuli as CSV
efd        dump the expected-focal-divergence decomposition per population
           and candidate stimulus as CSV
summarize  re-aggregate existing trial logs into a summary CSV

Every output file starts with a `# manifest: <hash>` comment naming the
config hash it came from. Worker count for `run` comes from the
ADOSIM_WORKERS environment variable (default 1); all randomness derives
from the config's seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

from . import __version__
from .belief import FocusKind
from .config import ConfigError, ExperimentConfig, build_belief, build_models, \
    config_hash, emit_config, parse_config
from .efd import efd_surface
from .sim import GENERATOR_NAME, SUMMARY_COLUMNS, run_batch, summarize_records
from .utility import utility_profile


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_csv(path, manifest_hash, header, rows):
    with open(path, "w", newline="") as f:
        f.write(f"# manifest: {manifest_hash}\n")
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_jsonl(path, manifest_hash, records):
    with open(path, "w") as f:
        f.write(f"# manifest: {manifest_hash}\n")
        for rec in records:
            f.write(json.dumps(rec) + "\n")


def _load_config(path) -> ExperimentConfig:
    with open(path) as f:
        return parse_config(f.read())


def _workers() -> int:
    raw = os.environ.get("ADOSIM_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"ADOSIM_WORKERS must be an integer, got {raw!r}") from None
    return max(1, n)


def _summary_rows(summary):
    for r in summary:
        yield (r.condition_id, r.design, r.utility_kind, r.prior_id,
               r.population_id, r.trial, r.mean_log_p_true, r.se_log,
               r.mean_p_true, r.se_linear, r.n_reps)


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    h = config_hash(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    start = time.monotonic()
    batch = run_batch(cfg, workers=_workers(), log_beliefs=args.log_beliefs)
    duration = time.monotonic() - start

    manifest = {
        "config_hash": h,
        "generator": GENERATOR_NAME,
        "master_seed": cfg.seed,
        "artifact_version": __version__,
        "duration_seconds": duration,
        "floor_events": {"total": batch.floor_total,
                         "by_condition": batch.floor_by_condition},
        "n_trial_records": batch.n_trial_records,
        "flagged": batch.flagged,
        "resolved_config": emit_config(cfg),
    }
    with open(os.path.join(args.out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    _write_jsonl(os.path.join(args.out_dir, "trials.jsonl"), h, batch.records)
    _write_csv(os.path.join(args.out_dir, "summary.csv"), h,
               SUMMARY_COLUMNS, _summary_rows(batch.summary))
    if batch.flagged:
        print(f"warning: {batch.floor_total}/{batch.n_trial_records} trial records "
              "hit the mass floor; summary means include floored values",
              file=sys.stderr)
    return 0


def _single_cell(cfg: ExperimentConfig, what: str, utilities_ok: bool = False,
                 populations_ok: bool = False):
    if len(cfg.priors) != 1:
        raise ConfigError(f"{what} needs a single prior, got {len(cfg.priors)}")
    if not populations_ok and len(cfg.populations) != 1:
        raise ConfigError(f"{what} needs a single population")
    if not utilities_ok and len(cfg.utilities) != 1:
        raise ConfigError(f"{what} needs a single utility kind")


def cmd_utility(args) -> int:
    cfg = _load_config(args.config)
    _single_cell(cfg, "the utility surface", utilities_ok=True)
    models = build_models(cfg)
    spec = build_belief(cfg.priors[0][1], models, cfg.model_probs)
    candidates = models[0].stimulus_space
    rows = []
    for kind in cfg.utilities:
        values = utility_profile(kind, spec, candidates, cfg.focus, cfg.ucb_weight)
        rows += [(x, kind.value, float(v)) for x, v in zip(candidates, values)]
    _write_csv(args.out, config_hash(cfg), ("stimulus", "utility_kind", "value"), rows)
    return 0


def cmd_efd(args) -> int:
    cfg = _load_config(args.config)
    _single_cell(cfg, "the efd surface", populations_ok=True)
    models = build_models(cfg)
    spec = build_belief(cfg.priors[0][1], models, cfg.model_probs)
    candidates = models[0].stimulus_space
    kind = cfg.utilities[0]
    gu = utility_profile(kind, spec, candidates, cfg.focus, cfg.ucb_weight)
    rows = []
    for pop_id, pop_text in cfg.populations:
        pop = build_belief(pop_text, models, cfg.population_model_probs,
                           role="population")
        surface = efd_surface(spec, pop, candidates, cfg.focus)
        rows += [
            (pop_id, x, b.response_variability, b.surprisal, b.hindsight,
             b.total, float(u))
            for x, b, u in zip(candidates, surface, gu)
        ]
    _write_csv(args.out, config_hash(cfg),
               ("population_id", "stimulus", "response_variability", "surprisal",
                "hindsight", "total", "global_utility"), rows)
    return 0


def cmd_summarize(args) -> int:
    records = []
    hashes = []
    for path in args.logs:
        with open(path) as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    if "manifest:" in line:
                        h = line.split("manifest:", 1)[1].strip()
                        if h not in hashes:
                            hashes.append(h)
                    continue
                records.append(json.loads(line))
    rows = summarize_records(records)
    _write_csv(args.out, ",".join(hashes) if hashes else "unknown",
               SUMMARY_COLUMNS, _summary_rows(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adosim",
        description="Adaptive design optimization simulations on discrete grids")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a config's condition grid")
    p_run.add_argument("config")
    p_run.add_argument("--out-dir", required=True)
    p_run.add_argument("--log-beliefs", action="store_true",
                       help="embed belief snapshots in the trial log")
    p_run.set_defaults(handler=cmd_run)

    p_util = sub.add_parser("utility", help="dump the utility surface as CSV")
    p_util.add_argument("config")
    p_util.add_argument("--out", required=True)
    p_util.set_defaults(handler=cmd_utility)

    p_efd = sub.add_parser("efd", help="dump the divergence decomposition as CSV")
    p_efd.add_argument("config")
    p_efd.add_argument("--out", required=True)
    p_efd.set_defaults(handler=cmd_efd)

    p_sum = sub.add_parser("summarize", help="re-aggregate trial logs")
    p_sum.add_argument("logs", nargs="+")
    p_sum.add_argument("--out", required=True)
    p_sum.set_defaults(handler=cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
