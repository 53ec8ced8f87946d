"""Command line: ``zeroloc run|plot|list|validate``.

Exit codes: 0 every verdict passed, 1 some verdict failed, 2 inconclusive,
3 malformed config or runtime error (a JSON error object goes to stdout).

Run directory layout (``<out>/<run_id>/``)::

    manifest.json        RunRecord: run_id, config, verdicts, artifacts, timestamps
    verdict.json         {"kind", "status", "budget", "provenance", "ledger"}
    zeros.csv            zeros of the first trial (header only if nothing was scanned)
    zeros_<label>.csv    one per scanned trial
    plot.svg             first trial against its node disks (axes only if none)
    plot_<label>.svg     one per scanned trial
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from gmpy2 import mpc, mpfr

from . import __version__
from .experiments import ExperimentConfig, Verdict, build_space, run_experiment
from .kernel import ZerolocError
from .plot import render_svg
from .zerofind import ZeroRecord, classify_zeros, default_M, report_csv, zeros_csv

EXIT = {"pass": 0, "fail": 1, "inconclusive": 2}
EXIT_ERROR = 3


@dataclass
class RunRecord:
    run_id: str
    config: dict
    verdicts: list
    artifacts: list = field(default_factory=list)
    started: str = ""
    finished: str = ""
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {"run_id": self.run_id, "config": self.config, "verdicts": self.verdicts,
                "artifacts": self.artifacts, "started": self.started,
                "finished": self.finished, "tool_version": self.tool_version}

    @classmethod
    def from_dict(cls, d: dict) -> RunRecord:
        return cls(**d)

    @classmethod
    def load(cls, path) -> RunRecord:
        return cls.from_dict(json.loads(Path(path).read_text()))


def run_id_for(cfg: ExperimentConfig) -> str:
    return cfg.digest[:16]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _error(exc: BaseException) -> int:
    print(json.dumps({"error": str(exc), "type": type(exc).__name__}, sort_keys=True))
    return EXIT_ERROR


def _load_config(path, bits: int | None = None, budget: float | None = None
                 ) -> ExperimentConfig:
    cfg = ExperimentConfig.load(path)
    if bits is not None or budget is not None:
        d = cfg.to_dict()
        if bits is not None:
            d["precision"] = {**dict(d.get("precision") or {}), "bits": int(bits)}
        if budget is not None:
            d["budget"] = float(budget)
        cfg = ExperimentConfig.from_dict(d)
    return cfg


def write_run(cfg: ExperimentConfig, verdict: Verdict, out_dir, started: str = "") -> RunRecord:
    """Write every artifact of a finished run and return its record."""
    run_dir = Path(out_dir) / run_id_for(cfg)
    run_dir.mkdir(parents=True, exist_ok=True)
    digits = cfg.params.get("digits")
    digits = int(digits) if digits is not None else None
    files: dict[str, str] = {"verdict.json": _dump(verdict.to_dict())}
    reports = verdict.reports
    first = next(iter(reports.values()), None)
    if first is not None:
        files["zeros.csv"] = report_csv(first, digits)
    else:
        files["zeros.csv"] = zeros_csv([])
    title = f"{cfg.name or cfg.kind} [{verdict.status}]"
    region = cfg.space.get("region")
    files["plot.svg"] = render_svg(first, region=region, title=title)
    for label, rep in reports.items():
        files[f"zeros_{label}.csv"] = report_csv(rep, digits)
        files[f"plot_{label}.svg"] = render_svg(rep, title=f"{title} {label}")
    for name, text in files.items():
        (run_dir / name).write_text(text)
    record = RunRecord(run_id_for(cfg), cfg.to_dict(), [verdict.to_dict()],
                       ["manifest.json", *sorted(files)], started or _now(), _now())
    (run_dir / "manifest.json").write_text(_dump(record.to_dict()))
    return record


def cmd_run(args) -> int:
    try:
        cfg = _load_config(args.config, args.bits, args.budget)
        started = _now()
        verdict = run_experiment(cfg, workers=args.workers)
        record = write_run(cfg, verdict, args.out, started)
    except (ValueError, KeyError, TypeError, OSError, ZerolocError) as exc:
        return _error(exc)
    print(json.dumps({"run_id": record.run_id, "status": verdict.status,
                      "dir": str(Path(args.out) / record.run_id)}, sort_keys=True))
    return EXIT[verdict.status]


def read_zeros_csv(path, bits: int) -> list[ZeroRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            loc = mpc(mpfr(row["re"], bits), mpfr(row["im"], bits))
            out.append(ZeroRecord(loc, int(row["multiplicity"]), float(row["residual"]), 0.0))
    return out


def cmd_plot(args) -> int:
    """Re-render the plots of a run directory from its manifest and zero lists."""
    run_dir = Path(args.run_dir)
    try:
        record = RunRecord.load(run_dir / "manifest.json")
        cfg = ExperimentConfig.from_dict(record.config)
        title = f"{cfg.name or cfg.kind} [{record.verdicts[0]['status']}]"
        labelled = sorted(run_dir.glob("zeros_*.csv"))
        if not labelled or cfg.space.get("region") is None:
            (run_dir / "plot.svg").write_text(
                render_svg(None, region=cfg.space.get("region"), title=title,
                           exaggeration=args.exaggeration))
            return 0
        sp = build_space(cfg, measure=False)
        M = float(cfg.M) if cfg.M is not None else default_M(sp.ns)
        for k, path in enumerate(labelled):
            label = path.stem[len("zeros_"):]
            rep = classify_zeros(read_zeros_csv(path, sp.ctx.bits), sp.ns, M, sp.region)
            svg = render_svg(rep, title=f"{title} {label}", exaggeration=args.exaggeration)
            (run_dir / f"plot_{label}.svg").write_text(svg)
            if k == 0:
                (run_dir / "plot.svg").write_text(
                    render_svg(rep, title=title, exaggeration=args.exaggeration))
    except (ValueError, KeyError, TypeError, OSError, ZerolocError) as exc:
        return _error(exc)
    return 0


def cmd_list(args) -> int:
    root = Path(args.out_dir)
    rows = []
    for manifest in sorted(root.glob("*/manifest.json")):
        try:
            rec = RunRecord.load(manifest)
        except (ValueError, KeyError, TypeError):
            continue
        v = rec.verdicts[0] if rec.verdicts else {}
        rows.append({"run_id": rec.run_id, "kind": rec.config.get("kind"),
                     "name": rec.config.get("name", ""), "status": v.get("status"),
                     "finished": rec.finished})
    if args.json:
        print(json.dumps(rows, indent=2, sort_keys=True))
    else:
        for r in rows:
            print(f"{r['run_id']}  {r['status']:<12} {r['kind']:<22} {r['name']}")
    return 0


def cmd_validate(args) -> int:
    try:
        cfg = _load_config(args.config)
        cfg.validate()
    except (ValueError, KeyError, TypeError, OSError, ZerolocError) as exc:
        return _error(exc)
    print(json.dumps({"valid": True, "run_id": run_id_for(cfg), "kind": cfg.kind}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zeroloc",
                                description="Zero localization experiments for Cauchy-type spaces")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--out", default="runs", help="output directory (default: runs)")
    r.add_argument("--bits", type=int, default=None, help="override precision bits")
    r.add_argument("--budget", type=float, default=None, help="override exceptional budget")
    r.add_argument("--workers", type=int, default=1, help="parallel trial processes")
    r.set_defaults(func=cmd_run)

    pl = sub.add_parser("plot", help="re-render plots of a run directory")
    pl.add_argument("run_dir")
    pl.add_argument("--exaggeration", type=float, default=None,
                    help="disk radius factor (default: automatic)")
    pl.set_defaults(func=cmd_plot)

    ls = sub.add_parser("list", help="list runs in an output directory")
    ls.add_argument("out_dir")
    ls.add_argument("--json", action="store_true")
    ls.set_defaults(func=cmd_list)

    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
