"""Command-line entry point: configure, run episodes, write results.

Config files are flat JSON objects whose keys mirror ScenarioConfig;
missing keys fall back to the defaults.  Each (seed, threshold) pair
produces one records file (per-UE per-timestep rows) and one summary
JSON, with deterministic formatting so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, replace, fields

from .channel import ScenarioConfig
from .baselines import STRATEGIES, get_strategy
from .simulation import run_episode, summarize

# Config keys that arrive as JSON lists but live as tuples.
_TUPLE_FIELDS = {"area", "demand_set"}


def load_config(path: str | None) -> ScenarioConfig:
    """Build a ScenarioConfig from a JSON file (or defaults when None).

    Unknown keys and invalid values raise ValueError naming the field.
    An empty file means all defaults.
    """
    if path is None:
        return ScenarioConfig()
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    if not text.strip():
        return ScenarioConfig()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"config parse error in {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ValueError(f"config must be a JSON object, got {type(raw).__name__}")
    known = {f.name for f in fields(ScenarioConfig)}
    merged = {}
    for key, value in raw.items():
        if key not in known:
            raise ValueError(f"unknown config field: {key}")
        if key in _TUPLE_FIELDS and isinstance(value, list):
            value = tuple(value)
        merged[key] = value
    return ScenarioConfig(**merged)


@dataclass
class RunSpec:
    """Validated parameters of one CLI run."""

    config_path: str | None
    strategies: list[str]
    seeds: list[int]
    kappa0_values: list[float]
    out_dir: str
    fmt: str

    def __post_init__(self):
        if not self.strategies:
            raise ValueError("strategies must list at least one strategy")
        for name in self.strategies:
            get_strategy(name)
        if not self.seeds:
            raise ValueError("seeds must list at least one seed")
        for s in self.seeds:
            if s < 0:
                raise ValueError(f"seeds must be nonnegative, got {s}")
        if not self.kappa0_values:
            raise ValueError("kappa0 must list at least one threshold")
        for v in self.kappa0_values:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"kappa0 values must be in [0, 1], got {v}")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be 'csv' or 'json', got {self.fmt!r}")


RECORD_COLUMNS = ["seed", "timestep", "strategy", "kappa_0", "ue_index", "kappa",
                  "rate_bps", "satisfied", "associations_total", "quota_violation"]


def _record_rows(seed: int, kappa0: float, records) -> list[dict]:
    rows = []
    for rec in records:
        for k in range(rec.kappa.shape[0]):
            rows.append({
                "seed": seed,
                "timestep": rec.timestep,
                "strategy": rec.strategy,
                "kappa_0": float(kappa0),
                "ue_index": k,
                "kappa": float(rec.kappa[k]),
                "rate_bps": float(rec.per_ue_rate[k]),
                "satisfied": bool(rec.kappa[k] >= kappa0),
                "associations_total": rec.association_count,
                "quota_violation": rec.quota_violation,
            })
    return rows


def _write_records_csv(path: str, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        for row in rows:
            writer.writerow([
                row["seed"], row["timestep"], row["strategy"],
                repr(row["kappa_0"]), row["ue_index"], repr(row["kappa"]),
                repr(row["rate_bps"]), int(row["satisfied"]),
                row["associations_total"], int(row["quota_violation"]),
            ])


def _write_records_json(path: str, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(rows, f, indent=2, sort_keys=True)
        f.write("\n")


def _summary_payload(seed: int, kappa0: float, strategies: list[str],
                     summary) -> dict:
    payload = {
        "seed": seed,
        "kappa_0": float(kappa0),
        "strategies": list(strategies),
        "per_strategy": {},
    }
    for name, s in summary.per_strategy.items():
        payload["per_strategy"][name] = {
            "timesteps": s.timesteps,
            "pct_satisfied_mean": s.pct_satisfied_mean,
            "pct_satisfied_std": s.pct_satisfied_std,
            "kappa_mean": s.kappa_mean,
            "kappa_std": s.kappa_std,
            "associations_mean": s.associations_mean,
            "associations_std": s.associations_std,
            "favorable_tests_total": s.favorable_tests_total,
            "association_ops_total": s.association_ops_total,
            "swap_count_total": s.swap_count_total,
            "da_iterations_total": s.da_iterations_total,
        }
    return payload


def _print_summary(seed: int, kappa0: float, summary) -> None:
    print(f"seed {seed}, threshold {kappa0:g}")
    print(f"  {'strategy':<10} {'%satisfied':>10} {'mean kappa':>11} {'mean assoc':>11}")
    for name, s in summary.per_strategy.items():
        print(f"  {name:<10} {s.pct_satisfied_mean:>10.2f} "
              f"{s.kappa_mean:>11.4f} {s.associations_mean:>11.2f}")


def cmd_run(spec: RunSpec) -> int:
    """Run all (seed, threshold) combinations and write result files."""
    config = load_config(spec.config_path)
    os.makedirs(spec.out_dir, exist_ok=True)
    written: list[str] = []
    try:
        for seed in spec.seeds:
            for kappa0 in spec.kappa0_values:
                cfg = replace(config, seed=seed, satisfaction_threshold=kappa0)
                records = run_episode(cfg, spec.strategies)
                summary = summarize(records)
                tag = f"seed{seed}_kappa{kappa0:g}"
                rec_path = os.path.join(spec.out_dir, f"records_{tag}.{spec.fmt}")
                rows = _record_rows(seed, kappa0, records)
                if spec.fmt == "csv":
                    _write_records_csv(rec_path, rows)
                else:
                    _write_records_json(rec_path, rows)
                written.append(rec_path)
                sum_path = os.path.join(spec.out_dir, f"summary_{tag}.json")
                with open(sum_path, "w", encoding="utf-8") as f:
                    json.dump(_summary_payload(seed, kappa0, spec.strategies, summary),
                              f, indent=2, sort_keys=True)
                    f.write("\n")
                written.append(sum_path)
                _print_summary(seed, kappa0, summary)
    except Exception:
        for p in written:
            if os.path.exists(p):
                os.unlink(p)
        raise
    return 0


def _parse_list(text: str, conv, what: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(conv(part))
        except ValueError:
            raise ValueError(f"cannot parse {what} value: {part!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfmatch",
        description="Run clustering strategies over seeded mobility episodes.")
    parser.add_argument("--config", default=None, metavar="PATH",
                        help="JSON config file (defaults apply to missing keys)")
    parser.add_argument("--strategies", default=",".join(STRATEGIES),
                        help="comma-separated strategy names (default: all)")
    parser.add_argument("--seeds", default=None,
                        help="comma-separated master seeds (default: config seed)")
    parser.add_argument("--kappa0", default=None,
                        help="comma-separated satisfaction thresholds "
                             "(default: config threshold)")
    parser.add_argument("--out", default="results", metavar="DIR",
                        help="output directory (default: results)")
    parser.add_argument("--format", default="csv", choices=("csv", "json"),
                        help="records file format (default: csv)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        base = load_config(args.config)
        seeds = (_parse_list(args.seeds, int, "seed") if args.seeds is not None
                 else [base.seed])
        kappa0 = (_parse_list(args.kappa0, float, "kappa0")
                  if args.kappa0 is not None
                  else [base.satisfaction_threshold])
        spec = RunSpec(config_path=args.config,
                       strategies=_parse_list(args.strategies, str, "strategy"),
                       seeds=seeds,
                       kappa0_values=kappa0,
                       out_dir=args.out,
                       fmt=args.format)
        return cmd_run(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
