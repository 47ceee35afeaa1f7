"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 analysis-domain error (e.g.
no band bracketed by the grid), 4 data error (unreadable or incompatible
Touchstone files).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
from pathlib import Path

from .circuit import sweep
from .config import RunConfig, config_from_dict, default_config_dict, load_config
from .dispersion import consistency_report, dispersion_curve
from .errors import (
    BandNotBracketedError,
    ConfigError,
    CoverageError,
    MBPFError,
    NoOverlapError,
    TouchstoneError,
)
from .metrics import compare_sweeps, compute_metrics, format_metrics_table
from .synthesis import synthesize
from .touchstone import TouchstoneOptions, read_touchstone, write_csv, write_touchstone
from .twoport import group_delay

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_DATA = 0, 2, 3, 4

CSV_HELP = """\
CSV column orders:
  sweep        frequency_hz,s11_re,s11_im,s21_re,s21_im,s12_re,s12_im,s22_re,s22_im,s11_db,s21_db,s21_phase_deg
  group delay  frequency_hz,group_delay_s
  dispersion   frequency_hz,re_g,beta_l_rad,alpha_l_neper,regime
Group delay differentiates the unwrapped s21 phase; the grid must be dense
enough that the phase changes by less than pi between neighbouring points.
"""


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(d) -> str:
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else config_from_dict(default_config_dict())
    raw = json.loads(json.dumps(cfg.raw or default_config_dict()))
    raw.setdefault("grid", default_config_dict()["grid"])
    grid = raw["grid"]
    if getattr(args, "points", None) is not None:
        grid["points"] = args.points
    if getattr(args, "start", None) is not None:
        grid["start_hz"] = args.start
    if getattr(args, "stop", None) is not None:
        grid["stop_hz"] = args.stop
    if getattr(args, "stages", None) is not None:
        raw["stages"] = args.stages
    if getattr(args, "z0", None) is not None:
        raw["z0_ohm"] = args.z0
    if getattr(args, "swap_inductors", False):
        raw["unit_cell"]["swap_inductors"] = True
    if getattr(args, "topology", None):
        raw["unit_cell"]["topology"] = {"t": "symmetric_t", "l": "l_section"}[args.topology]
    if getattr(args, "out", None):
        raw.setdefault("output", {})["dir"] = args.out
    return config_from_dict(raw)


def _out(cfg: RunConfig, suffix: str) -> Path:
    return Path(cfg.output["dir"]) / f"{cfg.output['basename']}{suffix}"


def _p(*a):
    print(*a, file=sys.stdout)


def _err(*a):
    print(*a, file=sys.stderr)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    sw = sweep(cfg.unit_cell, cfg.grid, cfg.stages, cfg.z0_ohm)
    opts = TouchstoneOptions(cfg.output["frequency_unit"], "S", cfg.output["touchstone_format"], cfg.z0_ohm)
    files = {
        ".s2p": write_touchstone(sw, opts, comments=[f"stages={cfg.stages}", f"unit_cell={json.dumps(cfg.unit_cell.to_dict(), sort_keys=True)}"]),
        ".csv": write_csv(sw),
    }
    if len(sw) >= 3:
        files["_group_delay.csv"] = write_csv(group_delay(sw))
    for suffix, text in files.items():
        _write_atomic(_out(cfg, suffix), text)
    for w in sw.warnings:
        _err(f"warning: {w}")
    _p(f"simulated {cfg.stages} cell(s), {len(sw)} points, {cfg.grid.start_hz / 1e9:g}-{cfg.grid.stop_hz / 1e9:g} GHz")
    for suffix in files:
        _p(f"wrote {_out(cfg, suffix)}")
    try:
        m = compute_metrics(sw)
    except BandNotBracketedError as exc:
        _err(f"error: {exc}. Widen the grid (--start/--stop) around the pass-band or raise --points.")
        return EXIT_DOMAIN
    _write_atomic(_out(cfg, "_metrics.json"), _dumps(m.to_dict()))
    _p(f"wrote {_out(cfg, '_metrics.json')}")
    _p(format_metrics_table([("simulated", m)]))
    return EXIT_OK


def cmd_dispersion(args) -> int:
    cfg = _load(args)
    curve = dispersion_curve(cfg.unit_cell, cfg.grid)
    rep = consistency_report(cfg.unit_cell)
    _write_atomic(_out(cfg, "_dispersion.csv"), write_csv(curve))
    _write_atomic(_out(cfg, "_consistency.json"), _dumps(rep.to_dict()))
    _write_atomic(_out(cfg, "_consistency.txt"), rep.to_text() + "\n")
    interp = "swapped inductors" if cfg.unit_cell.swap_inductors else "as labeled"
    _p(f"unit cell ({interp}), tank inductance {cfg.unit_cell.tank_inductance_henry * 1e9:g} nH")
    _p(rep.to_text())
    for suffix in ("_dispersion.csv", "_consistency.json", "_consistency.txt"):
        _p(f"wrote {_out(cfg, suffix)}")
    return EXIT_OK


def _read(path):
    try:
        return read_touchstone(path)
    except OSError as exc:
        raise TouchstoneError(f"cannot read {path}: {exc}") from None


def cmd_metrics(args) -> int:
    sw, _, warnings = _read(args.input)
    for w in warnings:
        _err(f"warning: {w}")
    try:
        m = compute_metrics(sw)
    except BandNotBracketedError as exc:
        _err(f"error: {exc}")
        return EXIT_DOMAIN
    text = _dumps(m.to_dict())
    if args.json:
        _write_atomic(Path(args.json), text)
    _p(text.rstrip())
    _p(format_metrics_table([(Path(args.input).stem, m)]))
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = _load(args)
    scfg = cfg.synthesis_config(seed=args.seed)
    if args.stages is not None:
        # the flag picks the synthesized cascade; the config's top-level
        # stages only drives simulate/dispersion
        scfg = dataclasses.replace(scfg, stages=args.stages)
    mask = cfg.effective_mask()
    res = synthesize(mask, scfg)
    out = res.to_dict()
    out["config"] = scfg.to_dict()
    out["mask"] = mask.to_dict()
    _write_atomic(_out(cfg, "_synth.json"), _dumps(out))

    optimized = json.loads(json.dumps(cfg.raw))
    optimized["unit_cell"] = dataclasses.replace(res.params, swap_inductors=False).to_dict()
    optimized["stages"] = scfg.stages
    _write_atomic(_out(cfg, "_optimized_config.json"), _dumps(optimized))

    if not res.converged:
        _err(f"warning: no element values met the mask; best cost {res.cost:.6g} with {len(res.violations)} violation(s)")
    _p(f"converged: {res.converged}  cost: {res.cost:.6g}  iterations: {res.iterations}  restarts: {res.restarts_run}")
    for k, v in res.params.to_dict().items():
        if k.endswith(("_farad", "_henry")):
            _p(f"  {k} = {v:.6g}")
    if res.metrics is not None:
        _p(format_metrics_table([("synthesized", res.metrics)]))
    for v in res.violations:
        _p(f"  violation {v.requirement}: required {v.required:g}, achieved {v.achieved:.4g} {v.unit}")
    _p(f"wrote {_out(cfg, '_synth.json')}")
    _p(f"wrote {_out(cfg, '_optimized_config.json')}")
    return EXIT_OK


def cmd_compare(args) -> int:
    a, _, _ = _read(args.a)
    b, _, _ = _read(args.b)
    if a.z0_ohm != b.z0_ohm:
        raise TouchstoneError(f"reference impedances differ ({a.z0_ohm} vs {b.z0_ohm} ohm)")
    rep = compare_sweeps(a, b)
    text = _dumps(rep.to_dict())
    if args.json:
        _write_atomic(Path(args.json), text)
    _p(text.rstrip())
    return EXIT_OK


def _add_run_flags(p, grid=True):
    p.add_argument("--config", metavar="PATH", help="JSON run config (default: the listed lumped values)")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--stages", type=int, metavar="N", help="number of cascaded cells")
    p.add_argument("--z0", type=float, metavar="OHMS", help="reference impedance")
    p.add_argument("--swap-inductors", action="store_true", help="put the larger listed inductance in the resonator tank")
    p.add_argument("--topology", choices=("t", "l"), help="symmetric T (t) or L section (l) cell")
    if grid:
        p.add_argument("--points", type=int, metavar="N")
        p.add_argument("--start", type=float, metavar="HZ")
        p.add_argument("--stop", type=float, metavar="HZ")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mbpf",
        description="Circuit analysis and synthesis for CSRR-loaded band-pass lines.",
        epilog=CSV_HELP + "\nExit codes: 0 ok, 2 config error, 3 analysis-domain error, 4 data error.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sweep S-parameters, write .s2p/.csv, print metrics",
                       epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dispersion", help="Bloch dispersion CSV and closed-form consistency report",
                       epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_run_flags(p)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("metrics", help="figures of merit of a .s2p file")
    p.add_argument("input", metavar="INPUT.s2p")
    p.add_argument("--json", metavar="PATH", help="also write the metrics JSON here")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("synth", help="optimise element values against the config mask")
    _add_run_flags(p, grid=False)
    p.add_argument("--seed", type=int, metavar="U64", help="restart seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("compare", help="differences between two .s2p files")
    p.add_argument("a", metavar="A.s2p")
    p.add_argument("b", metavar="B.s2p")
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is not None and not (0 <= args.seed < 2**64):
        _err("error: --seed must be an unsigned 64-bit integer")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    except (TouchstoneError, NoOverlapError) as exc:
        _err(f"data error: {exc}")
        return EXIT_DATA
    except (BandNotBracketedError, CoverageError) as exc:
        _err(f"error: {exc}")
        return EXIT_DOMAIN
    except MBPFError as exc:
        _err(f"error: {exc}")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
