"""Config-driven experiment runner.

Usage::

    saflab run CONFIG.json
    saflab preset NAME [--out DIR] [--seed S] [--samples N] [--dump-config]
    saflab dmt CURVE [--grid K] [--listing]

Exit status: 0 on success, 1 for configuration errors, 2 for runtime errors.
Set ``SAFLAB_WORKERS`` to spread Monte-Carlo chunks over processes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .channel import LinkStats, symmetric_network, with_inter_relay_gain
from .dmt import (
    dmt_curve_from_lp,
    instance_from_name,
    miso_bound,
    naf_dmt,
    noncoop_dmt,
    saf_upper_bound,
)
from .errors import ConfigError, DiagnosticError
from .outage import OutageCurve, outage_curves, power_gain_at, warn_sample_count
from .schemes import SchemeSpec

log = logging.getLogger("saflab")

KINDS = ("outage_sweep", "dmt_curves", "power_gain_sweep", "scheduling_compare")
MIN_SAMPLES = 1000
DEFAULT_SAMPLES = 1_000_000


@dataclass
class ExperimentConfig:
    kind: str
    schemes: list = field(default_factory=list)
    stats: Optional[LinkStats] = None
    snr_db: list = field(default_factory=list)
    rates_bpcu: list = field(default_factory=list)
    n_samples: int = DEFAULT_SAMPLES
    seed: int = 1
    output: str = "out"
    # dmt_curves
    curves: list = field(default_factory=list)
    r_grid_size: int = 101
    # power_gain_sweep / scheduling_compare
    reference: Optional[SchemeSpec] = None
    target_pout: float = 1e-3
    inter_relay_gain_db: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "dmt_curves":
            if not self.curves:
                raise ConfigError("dmt_curves needs a non-empty curve list")
            if self.r_grid_size < 11:
                raise ConfigError("r_grid_size must be >= 11")
            for c in self.curves:
                parse_curve(c)
            return
        if not self.schemes:
            raise ConfigError("scheme list is empty")
        if self.stats is None:
            raise ConfigError("outage experiments need link stats")
        if not self.snr_db:
            raise ConfigError("snr_db is empty")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ConfigError("snr_db must be strictly increasing")
        if not self.rates_bpcu:
            raise ConfigError("rates_bpcu is empty")
        if self.n_samples < MIN_SAMPLES:
            raise ConfigError(f"n_samples must be >= {MIN_SAMPLES}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        labels = [s.label for s in self.schemes]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"scheme labels must be unique, got {labels}")
        if self.kind in ("power_gain_sweep", "scheduling_compare"):
            if self.reference is None:
                raise ConfigError(f"{self.kind} needs a reference scheme")
            if not 0 < self.target_pout < 1:
                raise ConfigError("target_pout must lie in (0, 1)")
        if self.kind == "power_gain_sweep" and not self.inter_relay_gain_db:
            raise ConfigError("power_gain_sweep needs inter_relay_gain_db values")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "output": self.output}
        if self.kind == "dmt_curves":
            d.update(curves=list(self.curves), r_grid_size=self.r_grid_size)
        else:
            d.update(
                stats=self.stats.to_dict(),
                schemes=[s.to_dict() for s in self.schemes],
                snr_db=[float(s) for s in self.snr_db],
                rates_bpcu=[float(r) for r in self.rates_bpcu],
                n_samples=self.n_samples,
                seed=self.seed,
            )
            if self.reference is not None:
                d.update(reference=self.reference.to_dict(), target_pout=self.target_pout)
            if self.inter_relay_gain_db:
                d["inter_relay_gain_db"] = [float(g) for g in self.inter_relay_gain_db]
        if self.notes:
            d["notes"] = list(self.notes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {
            "kind", "schemes", "stats", "snr_db", "rates_bpcu", "n_samples", "seed", "output",
            "curves", "r_grid_size", "reference", "target_pout", "inter_relay_gain_db", "notes",
        }
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        if "kind" not in d:
            raise ConfigError("config needs a kind")
        try:
            cfg = cls(
                kind=d["kind"],
                schemes=[SchemeSpec.from_dict(s) for s in d.get("schemes", [])],
                stats=LinkStats.from_dict(d["stats"]) if "stats" in d else None,
                snr_db=[float(s) for s in d.get("snr_db", [])],
                rates_bpcu=[float(r) for r in d.get("rates_bpcu", [])],
                n_samples=int(d.get("n_samples", DEFAULT_SAMPLES)),
                seed=int(d.get("seed", 1)),
                output=str(d.get("output", "out")),
                curves=[str(c) for c in d.get("curves", [])],
                r_grid_size=int(d.get("r_grid_size", 101)),
                reference=SchemeSpec.from_dict(d["reference"]) if "reference" in d else None,
                target_pout=float(d.get("target_pout", 1e-3)),
                inter_relay_gain_db=[float(g) for g in d.get("inter_relay_gain_db", [])],
                notes=[str(n) for n in d.get("notes", [])],
            )
        except ConfigError:
            raise
        except (TypeError, KeyError, ValueError, AttributeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        cfg.validate()
        return cfg


def parse_curve(text: str):
    """Curve spec -> builder ``f(r_grid_size) -> DmtCurve``.

    Accepted: ``noncoop``, ``miso:N``, ``naf:N``, ``ub:N,M`` and
    ``lp:<instance>`` with an exponent-LP instance name.
    """
    kind, _, args = text.strip().partition(":")
    try:
        if kind == "noncoop" and not args:
            return lambda grid: noncoop_dmt()
        if kind == "miso":
            n = int(args)
            return lambda grid: miso_bound(n)
        if kind == "naf":
            n = int(args)
            naf_dmt(n)
            return lambda grid: naf_dmt(n)
        if kind == "ub":
            n, m = (int(a) for a in args.split(","))
            saf_upper_bound(n, m)
            return lambda grid: saf_upper_bound(n, m)
        if kind == "lp":
            inst = instance_from_name(args)
            return lambda grid: dmt_curve_from_lp(inst, grid, label=f"lp:{args}")
    except ValueError as exc:
        raise ConfigError(f"bad curve spec {text!r}: {exc}") from None
    raise ConfigError(f"unknown curve spec {text!r}")


# ---------------------------------------------------------------- presets

def _sym(n: int) -> LinkStats:
    return symmetric_network(n, 1.0)


def _saf(m: int, sched: str = "dumb", **kw) -> SchemeSpec:
    return SchemeSpec("sequential_saf", n_slots=m, scheduling=sched, **kw)


def _grid(lo: float, hi: float, step: float) -> list:
    n = int(round((hi - lo) / step))
    return [lo + step * i for i in range(n + 1)]


PRESET_NOTES = {
    "fig1": "DDF curve omitted: no closed form is available for it",
}


def preset(name: str, seed: int = 1, n_samples: Optional[int] = None, out: Optional[str] = None) -> ExperimentConfig:
    n = DEFAULT_SAMPLES if n_samples is None else int(n_samples)
    out = out or os.path.join("out", name)
    if name == "fig1":
        curves = ["noncoop"] + [f"{k}:{N}" for N in (1, 2, 4) for k in ("miso", "naf")]
        cfg = ExperimentConfig("dmt_curves", curves=curves, output=out, notes=[PRESET_NOTES["fig1"]])
    elif name == "fig3":
        # three isolated relays: the bound for several frame lengths, with LP cross-checks
        curves = ["miso:3", "naf:3"] + [f"ub:3,{m}" for m in (3, 4, 7, 13)] + ["lp:dumb:3,4", "lp:dumb:3,7"]
        cfg = ExperimentConfig("dmt_curves", curves=curves, output=out)
    elif name == "fig4":
        curves = ["ub:2,3", "lp:2r3s", "lp:2r3s-unordered", "naf:2", "noncoop"]
        cfg = ExperimentConfig("dmt_curves", curves=curves, output=out)
    elif name == "fig5":
        cfg = ExperimentConfig(
            "outage_sweep",
            schemes=[SchemeSpec("noncoop"), SchemeSpec("naf", n_relays=2), _saf(3)],
            stats=_sym(2), snr_db=_grid(0, 50, 2), rates_bpcu=[2, 6, 10],
            n_samples=n, seed=seed, output=out,
        )
    elif name == "fig7":
        cfg = ExperimentConfig(
            "outage_sweep",
            schemes=[_saf(m) for m in (3, 5, 9, 13)],
            stats=_sym(2), snr_db=_grid(0, 50, 2), rates_bpcu=[2, 6],
            n_samples=n, seed=seed, output=out,
        )
    elif name == "fig8":
        cfg = ExperimentConfig(
            "power_gain_sweep",
            schemes=[SchemeSpec("naf", n_relays=2)] + [_saf(m) for m in (3, 5, 9, 13)],
            reference=SchemeSpec("noncoop"),
            stats=_sym(2), snr_db=_grid(26, 56, 2), rates_bpcu=[6],
            inter_relay_gain_db=_grid(-20, 20, 10),
            n_samples=n, seed=seed, output=out,
        )
    elif name == "fig9":
        cfg = ExperimentConfig(
            "scheduling_compare",
            schemes=[_saf(m, s) for s in ("dumb", "smart") for m in (3, 5, 9, 13)],
            reference=SchemeSpec("relay_selection_naf"),
            stats=_sym(12), snr_db=_grid(20, 50, 2), rates_bpcu=[6],
            n_samples=n, seed=seed, output=out,
        )
    else:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    cfg.validate()
    return cfg


PRESETS = ("fig1", "fig3", "fig4", "fig5", "fig7", "fig8", "fig9")


# ---------------------------------------------------------------- output

def _fmt(x: float) -> str:
    return repr(float(x))


def _rate_tag(rate: float) -> str:
    return f"R{float(rate):g}"


def _write_csv(path: Path, header: str, rows: Sequence[Sequence]) -> None:
    lines = [header] + [",".join(str(v) for v in row) for row in rows]
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_outage_csv(path: Path, curve: OutageCurve) -> None:
    rows = [(_fmt(p.snr_db), _fmt(p.p_hat), _fmt(p.stderr), p.n_samples) for p in curve.points]
    _write_csv(path, "snr_db,outage,stderr,n_samples", rows)


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


def config_hash(cfg: ExperimentConfig) -> str:
    canon = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _gain_or_nan(target: float, a: OutageCurve, b: OutageCurve, warnings: list) -> float:
    try:
        return power_gain_at(target, a, b)
    except DiagnosticError as exc:
        warnings.append(str(exc))
        return math.nan


def run(cfg: ExperimentConfig) -> list[Path]:
    """Execute an experiment; returns the written paths (manifest last)."""
    cfg.validate()
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    warnings: list[str] = []
    extra: dict = {}

    if cfg.kind == "dmt_curves":
        bps = {}
        for spec in cfg.curves:
            curve = parse_curve(spec)(cfg.r_grid_size)
            rs = np.linspace(0.0, 1.0, cfg.r_grid_size)
            path = out / f"dmt_{_safe(spec)}.csv"
            _write_csv(path, "r,d", [(_fmt(r), _fmt(d)) for r, d in zip(rs, curve(rs))])
            written.append(path)
            bps[spec] = [[r, d] for r, d in curve.breakpoints]
        extra["breakpoints"] = bps
    else:
        if cfg.kind != "outage_sweep":
            msg = warn_sample_count(cfg.target_pout, cfg.n_samples)
            if msg:
                warnings.append(msg)
        if cfg.kind == "power_gain_sweep":
            written += _run_gain_sweep(cfg, out, warnings)
        else:
            curves = _run_outage(cfg, cfg.schemes, cfg.stats, out, "")
            written += [p for p, _ in curves.values()]
            if cfg.kind == "scheduling_compare":
                ref = _run_outage(cfg, [cfg.reference], cfg.stats, out, "ref_")
                written += [p for p, _ in ref.values()]
                rows = []
                for s in cfg.schemes:
                    for rate in cfg.rates_bpcu:
                        g = _gain_or_nan(
                            cfg.target_pout, curves[s.label, rate][1], ref[cfg.reference.label, rate][1], warnings
                        )
                        rows.append((s.label, _fmt(rate), _fmt(g)))
                path = out / "gains.csv"
                _write_csv(path, "scheme,rate_bpcu,power_gain_db", rows)
                written.append(path)

    manifest = {
        "config": cfg.to_dict(),
        "config_sha256": config_hash(cfg),
        "seed": cfg.seed,
        "versions": {
            "saflab": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "files": {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in written},
        "notes": list(cfg.notes),
        "warnings": warnings,
    }
    manifest.update(extra)
    mpath = out / "manifest.json"
    with open(mpath, "w", newline="\n", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(mpath)
    return written


def _run_outage(cfg, schemes, stats, out: Path, prefix: str) -> dict:
    res = {}
    for spec in schemes:
        curves = outage_curves(spec, stats, cfg.snr_db, cfg.rates_bpcu, cfg.n_samples, cfg.seed)
        for rate, curve in zip(cfg.rates_bpcu, curves):
            path = out / f"{prefix}{_safe(spec.label)}_{_rate_tag(rate)}.csv"
            _write_outage_csv(path, curve)
            res[spec.label, rate] = (path, curve)
    return res


def _run_gain_sweep(cfg, out: Path, warnings: list) -> list[Path]:
    written = []
    ref = _run_outage(cfg, [cfg.reference], cfg.stats, out, "ref_")
    written += [p for p, _ in ref.values()]
    rows = []
    for gdb in cfg.inter_relay_gain_db:
        stats = with_inter_relay_gain(cfg.stats, gdb)
        res = _run_outage(cfg, cfg.schemes, stats, out, f"G{gdb:g}dB_")
        written += [p for p, _ in res.values()]
        for s in cfg.schemes:
            for rate in cfg.rates_bpcu:
                g = _gain_or_nan(cfg.target_pout, res[s.label, rate][1], ref[cfg.reference.label, rate][1], warnings)
                rows.append((_fmt(gdb), s.label, _fmt(rate), _fmt(g)))
    path = out / "gains.csv"
    _write_csv(path, "inter_relay_gain_db,scheme,rate_bpcu,power_gain_db", rows)
    written.append(path)
    return written


# ---------------------------------------------------------------- entry

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="saflab", description="SAF relaying outage and DMT experiments")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run an experiment from a JSON config")
    p.add_argument("config", help="path to the JSON config")

    p = sub.add_parser("preset", help="run a built-in figure scenario")
    p.add_argument("name", choices=PRESETS)
    p.add_argument("--out", default=None, help="output directory (default out/NAME)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--samples", type=int, default=None, help=f"Monte-Carlo samples (default {DEFAULT_SAMPLES})")
    p.add_argument("--dump-config", action="store_true", help="print the config JSON and exit")

    p = sub.add_parser("dmt", help="print one DMT curve as r,d CSV")
    p.add_argument("curve", help="noncoop | miso:N | naf:N | ub:N,M | lp:INSTANCE (genie:N,M, dumb:N,M, smart:N,M, 2r3s, 2r3s-unordered)")
    p.add_argument("--grid", type=int, default=101, help="number of r points (>= 11)")
    p.add_argument("--listing", action="store_true", help="print the LP constraint listing instead")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.cmd == "run":
            try:
                with open(args.config, encoding="utf-8") as fh:
                    raw = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from None
            paths = run(ExperimentConfig.from_dict(raw))
        elif args.cmd == "preset":
            cfg = preset(args.name, seed=args.seed, n_samples=args.samples, out=args.out)
            if args.dump_config:
                print(json.dumps(cfg.to_dict(), indent=2))
                return 0
            paths = run(cfg)
        else:
            if args.grid < 11:
                raise ConfigError("--grid must be >= 11")
            if args.listing:
                kind, _, inst = args.curve.partition(":")
                if kind != "lp":
                    raise ConfigError("--listing needs an lp:INSTANCE curve")
                try:
                    print(instance_from_name(inst).listing())
                except ValueError as exc:
                    raise ConfigError(str(exc)) from None
                return 0
            curve = parse_curve(args.curve)(args.grid)
            rs = np.linspace(0.0, 1.0, args.grid)
            sys.stdout.write("r,d\n")
            for r, d in zip(rs, curve(rs)):
                sys.stdout.write(f"{_fmt(r)},{_fmt(d)}\n")
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime error
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        log.info("wrote %s", p)
    print(f"wrote {len(paths)} files to {paths[-1].parent}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
