# tools/experiment/cmd_simulate.py
"""
Run an ensemble from a manifest (or flags) and persist the standardized samples.

Output format follows the --out suffix: `.csv` writes the samples table
(replication, raw_value, standardized_value) plus a `<out>.meta.json` record
holding the metadata and ensemble parameters; anything else writes a JSON
OutputRecord whose payload carries the same columns.
"""

import argparse
import time

from ..simulation_harness import EnsembleConfig, Statistic, run_ensemble
from .base import (
    SAMPLE_COLUMNS, BaseCommand, OutputRecord, load_manifest, sidecar_path, validate_manifest, write_record,
    write_samples_csv,
)

# flag name -> manifest key
_FLAG_KEYS = {
    "stat": "statistic",
    "n": "n",
    "reps": "replications",
    "seed": "master_seed",
    "c": "c",
    "oversample": "oversample",
    "engine": "engine",
    "workers": "workers",
    "out": "out",
}


class SimulateCommand(BaseCommand):
    name = "simulate"
    help = "run a Gumbel-convergence ensemble"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--in", dest="manifest", type=str, help="YAML manifest")
        parser.add_argument("--stat", type=str, choices=[s.value for s in Statistic])
        parser.add_argument("--n", type=int)
        parser.add_argument("--reps", type=int)
        parser.add_argument("--seed", type=int)
        parser.add_argument("--c", type=float)
        parser.add_argument("--oversample", type=int)
        parser.add_argument("--engine", type=str, choices=["pruned", "naive"])
        parser.add_argument("--workers", type=int)
        parser.add_argument("--out", type=str, help="samples file (.csv or .json; default: stdout JSON)")

    def manifest(self, args: argparse.Namespace) -> dict:
        """Manifest file values, overridden by explicit flags, then config defaults."""
        data = load_manifest(args.manifest) if args.manifest else {}
        for flag, key in _FLAG_KEYS.items():
            value = getattr(args, flag, None)
            if value is not None:
                data[key] = value
        data.setdefault("master_seed", self.config.master_seed)
        if data.get("statistic") in (Statistic.BROWNIAN.value, Statistic.BROWNIAN_FIXED_LAG.value):
            data.setdefault("oversample", self.config.oversample)
        return validate_manifest(data, args.manifest)

    def banner(self, args):
        m = self.manifest(args)
        return [f"Statistic:   {m['statistic']}", f"n:           {m['n']}",
                f"Reps:        {m['replications']}", f"Seed:        {m['master_seed']}"]

    def run(self, args: argparse.Namespace) -> OutputRecord:
        started = time.perf_counter()
        manifest = self.manifest(args)
        config = EnsembleConfig(
            statistic=Statistic(manifest["statistic"]),
            n=manifest["n"],
            replications=manifest["replications"],
            master_seed=manifest["master_seed"],
            c=manifest.get("c"),
            oversample=manifest.get("oversample"),
            engine=manifest.get("engine", "pruned"),
            workers=manifest.get("workers", self.config.workers),
        )
        emp = run_ensemble(config)
        self._emp = emp
        self._out = manifest.get("out")
        payload = {
            "statistic": config.statistic.value,
            "n": config.n,
            "replications": config.replications,
            "replication": list(range(config.replications)),
            "raw_value": [float(v) for v in emp.raw],
            "standardized_value": [float(v) for v in emp.standardized],
        }
        return OutputRecord.build(self.name, payload, manifest=manifest,
                                  master_seed=config.master_seed, started=started)

    def write(self, record: OutputRecord, args: argparse.Namespace) -> None:
        if self._out and self._out.endswith(".csv"):
            write_samples_csv(self._emp, self._out)
            # metadata goes to a sidecar record
            payload = {k: v for k, v in record.payload.items() if k not in SAMPLE_COLUMNS}
            payload["samples"] = self._out
            write_record(OutputRecord(metadata=record.metadata, payload=payload), sidecar_path(self._out))
        else:
            write_record(record, self._out)

    def summary(self, record):
        return [f"  Samples:        {record.payload['replications']}",
                f"  Manifest hash:  {record.metadata['manifest_hash'][:16]}"]
