"""``kinosyn`` command line: synth -> extract -> command -> simulate.

Exit codes: 0 success, 1 usage or parameter error, 2 data/parse error,
3 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .config import PipelineConfig, dump_config, load_config
from .errors import KinosynError, ParameterError, StructuralError
from .nmf import select_order
from .preprocess import preprocess_trials
from .signal_model import Condition, ForceTrace, PositionTrace
from .simulator import compare_traces, run
from .synergy import (
    CommandStream,
    build_command_stream,
    force_command,
    normalize_interchannel,
    position_command,
    select_force_synergy,
    split_by_condition,
)
from .synthgen import SynthSpec, generate

log = logging.getLogger("kinosyn")

SYNERGY_FILE = "synergies.txt"
FORCE_FILE = "force.csv"
POSITION_FILE = "position.csv"
SEGMENTS_FILE = "trials.csv"


def _mkdir(path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise KinosynError(f"{path}: cannot create directory: {exc.strerror}") from exc
    return path


# -- subcommands ------------------------------------------------------------------


def cmd_synth(out_dir, spec: SynthSpec, force_format: str = "pressure") -> list[Path]:
    """Write one EMG/force/position CSV triple per trial plus ``truth.json``."""
    out = _mkdir(out_dir)
    ds = generate(spec)
    written = []
    for i, (trial, frames) in enumerate(zip(ds.trial_set, ds.pressure), start=1):
        stem = out / fileio.trial_stem(i, trial.condition)
        paths = [Path(f"{stem}_emg.csv"), Path(f"{stem}_{force_format}.csv"),
                 Path(f"{stem}_position.csv")]
        fileio.write_emg(paths[0], trial.emg)
        t = np.arange(len(trial.force)) / spec.sample_rate_hz
        if force_format == "pressure":
            fileio.write_pressure(paths[1], frames, spec.sample_rate_hz)
        else:
            fileio.write_force(paths[1], trial.force, t)
        fileio.write_position(paths[2], trial.position, t)
        written.extend(paths)

    truth = {
        "spec": {k: (list(v) if isinstance(v, tuple) else v)
                 for k, v in vars(spec).items()},
        "selection_true": ds.selection_true,
        "conditions": [c.value for c in ds.conditions],
        "W_true": ds.W_true.tolist(),
        "C_true": ds.C_true.tolist(),
    }
    if np.isinf(spec.noise_snr_db):
        truth["spec"]["noise_snr_db"] = "inf"
    fileio.write_json(out / "truth.json", truth)
    written.append(out / "truth.json")
    return written


def cmd_extract(data_dir, out_dir, cfg: PipelineConfig) -> dict:
    out = _mkdir(out_dir)
    raw = fileio.read_trial_dir(data_dir)
    pre = preprocess_trials(raw, cfg.preprocess)
    sel = select_order(pre.emg, cfg.vaf_threshold, cfg.nmf)
    fit = normalize_interchannel(sel.synergies)

    fileio.write_synergies(out / SYNERGY_FILE, fit)
    fileio.write_rows(out / "vaf_table.csv", ["n", "vaf"],
                      ([n, v] for n, v in sel.vaf_by_order.items()))
    fileio.write_emg(out / "emg.csv", pre.emg.replace(pre.emg.data))
    fileio.write_force(out / FORCE_FILE, pre.force)
    fileio.write_position(out / POSITION_FILE, pre.position)
    fileio.write_segments(out / SEGMENTS_FILE, pre.lengths, pre.conditions)
    series = {f"w{i + 1}": fit.W[:, i] for i in range(fit.n)}
    series.update({f"c{i + 1}": fit.C[i] for i in range(fit.n)})
    series["F_h"] = pre.force.values
    fileio.write_long(out / "plot_synergies.csv", series)

    report = {
        "d": fit.d,
        "k": fit.k,
        "n": sel.n,
        "vaf": fit.vaf,
        "threshold": cfg.vaf_threshold,
        "threshold_reached": sel.reached,
        "vaf_by_order": {str(n): v for n, v in sel.vaf_by_order.items()},
        "zero_synergies": list(fit.zero_synergies),
        "trials": len(pre.lengths),
    }
    fileio.write_json(out / "report.json", report)
    (out / "config_used.txt").write_text(dump_config(cfg))
    return report


def cmd_command(synergy_path, force_path, position_path, segments_path, out_dir,
                cfg: PipelineConfig) -> dict:
    out = _mkdir(out_dir)
    s = fileio.read_synergies(synergy_path)
    F_h = fileio.read_force(force_path)
    p = fileio.read_position(position_path)
    lengths, conditions = fileio.read_segments(segments_path)
    if not (len(F_h) == len(p) == s.k):
        raise StructuralError(
            f"lengths differ: force {len(F_h)}, position {len(p)}, activations {s.k}"
        )

    selection = select_force_synergy(F_h, s, cfg.selection_method)
    F_hat = force_command(selection, s, cfg.alpha)
    stream = build_command_stream(F_hat, position_command(p), cfg.alpha)
    parts = split_by_condition(stream, lengths, conditions)

    summary = {
        "index": selection.index,
        "score": selection.score,
        "scores": list(selection.all_scores),
        "method": cfg.selection_method,
        "alpha": cfg.alpha,
        "conditions": {},
    }
    series = {"F_hat": F_hat.values, "F_h": F_h.values}
    for cond, (sub, seg_lengths) in parts.items():
        trial_col = np.repeat(np.arange(1, len(seg_lengths) + 1), seg_lengths)
        fileio.write_rows(
            out / f"command_{cond.value}.csv", ["t", "trial", "force", "x", "y"],
            ([j, int(tr), f, x, y] for j, (tr, f, x, y) in enumerate(
                zip(trial_col, sub.force.values, *sub.position.points))),
        )
        summary["conditions"][cond.value] = {
            "samples": len(sub),
            "trials": len(seg_lengths),
            "peak": float(sub.force.values.max()),
            "mean": float(sub.force.values.mean()),
        }
        series[f"F_hat_{cond.value}"] = sub.force.values
    fileio.write_json(out / "selection.json", summary)
    fileio.write_long(out / "plot_commands.csv", series)
    return summary


def _read_command_file(path):
    header, arr = fileio.read_table(path)
    if header != ["t", "trial", "force", "x", "y"]:
        raise fileio.DataParseError("expected header t,trial,force,x,y", path=path, row=1)
    trial = arr[:, 1].astype(int)
    _, first = np.unique(trial, return_index=True)
    order = np.sort(first)
    lengths = np.diff(np.append(order, len(trial))).tolist()
    return ForceTrace(arr[:, 2], "F_hat"), PositionTrace(arr[:, 3:].T), lengths


def cmd_simulate(command_dir, out_dir, cfg: PipelineConfig) -> dict:
    command_dir = Path(command_dir)
    files = sorted(command_dir.glob("command_*.csv"))
    if not files:
        raise fileio.DataParseError("no command_*.csv files", path=command_dir)
    out = _mkdir(out_dir)
    metrics = {"conditions": {}}
    series = {}
    means = {}
    for path in files:
        cond = Condition(path.stem.removeprefix("command_"))
        force, pos, lengths = _read_command_file(path)
        stream = CommandStream(force, pos, cfg.alpha, cond)
        res = run(stream, cfg.actuator, cfg.seed, segments=lengths)
        trial_col = np.repeat(np.arange(1, len(lengths) + 1), lengths)
        fileio.write_rows(
            out / f"result_{cond.value}.csv", ["t", "trial", "F_r", "x", "y"],
            ([j, int(tr), f, x, y] for j, (tr, f, x, y) in enumerate(
                zip(trial_col, res.F_r.values, *res.executed.points))),
        )
        entry = res.metrics.as_dict()
        entry["compare_command"] = compare_traces(force, res.F_r)
        entry["mean_F_r"] = float(res.F_r.values.mean())
        entry["position_max_step"] = cfg.actuator.position_max_step
        metrics["conditions"][cond.value] = entry
        means[cond.value] = entry["mean_F_r"]
        series[f"F_hat_{cond.value}"] = force.values
        series[f"F_r_{cond.value}"] = res.F_r.values
        series[f"x_cmd_{cond.value}"] = pos.points[0]
        series[f"x_exec_{cond.value}"] = res.executed.points[0]
    if "weak" in means and "strong" in means:
        metrics["strong_exceeds_weak"] = means["strong"] > means["weak"]
    fileio.write_json(out / "metrics.json", metrics)
    fileio.write_long(out / "plot_simulation.csv", series)
    return metrics


# -- argument parsing ---------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_config_flags(p):
    p.add_argument("--config", type=Path, help="key = value config file "
                   "(default: $KINOSYN_CONFIG if set)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key, e.g. nmf.restarts=5")
    p.add_argument("--alpha", type=float)
    p.add_argument("--seed", type=int)


def _config_from(args) -> PipelineConfig:
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ParameterError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    if getattr(args, "alpha", None) is not None:
        overrides["alpha"] = args.alpha
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
        overrides.setdefault("nmf.seed", args.seed)
    return load_config(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kinosyn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--channels", type=int, default=16)
    p.add_argument("--synergies", type=int, default=3)
    p.add_argument("--trial-len", type=int, default=150)
    p.add_argument("--snr-db", type=float, default=20.0, help="use inf for noiseless data")
    p.add_argument("--force-index", type=int, default=1)
    p.add_argument("--weak-strong", type=float, nargs=2, default=(0.1, 1.0))
    p.add_argument("--force-format", choices=("pressure", "force"), default="pressure")

    p = sub.add_parser("extract", help="preprocess trials and extract synergies")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)

    p = sub.add_parser("command", help="select the force synergy and write commands")
    p.add_argument("--in", dest="input", type=Path,
                   help="extract output directory (default location of the files below)")
    p.add_argument("--synergies", type=Path)
    p.add_argument("--force", type=Path)
    p.add_argument("--position", type=Path)
    p.add_argument("--segments", type=Path)
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)

    p = sub.add_parser("simulate", help="run command files through the actuator model")
    p.add_argument("--commands", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)

    p = sub.add_parser("pipeline", help="extract, command and simulate in one go")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)
    return parser


def _dispatch(args) -> int:
    if args.command == "synth":
        spec = SynthSpec(
            d=args.channels, n=args.synergies, trials=args.trials, trial_len=args.trial_len,
            noise_snr_db=args.snr_db, seed=args.seed, force_synergy_index=args.force_index,
            weak_strong_scale=tuple(args.weak_strong),
        )
        files = cmd_synth(args.out, spec, args.force_format)
        print(f"wrote {len(files)} files to {args.out}")
        return 0

    cfg = _config_from(args)
    if args.command == "extract":
        rep = cmd_extract(args.data, args.out, cfg)
        _print_extract(rep)
    elif args.command == "command":
        base = args.input
        paths = {}
        for name, default in (("synergies", SYNERGY_FILE), ("force", FORCE_FILE),
                              ("position", POSITION_FILE), ("segments", SEGMENTS_FILE)):
            given = getattr(args, name)
            if given is None and base is None:
                raise ParameterError(f"--{name} or --in is required")
            paths[name] = given if given is not None else base / default
        summary = cmd_command(paths["synergies"], paths["force"], paths["position"],
                              paths["segments"], args.out, cfg)
        _print_command(summary)
    elif args.command == "simulate":
        _print_simulate(cmd_simulate(args.commands, args.out, cfg))
    elif args.command == "pipeline":
        ext = args.out / "extract"
        com = args.out / "command"
        _print_extract(cmd_extract(args.data, ext, cfg))
        _print_command(cmd_command(ext / SYNERGY_FILE, ext / FORCE_FILE, ext / POSITION_FILE,
                                   ext / SEGMENTS_FILE, com, cfg))
        _print_simulate(cmd_simulate(com, args.out / "simulate", cfg))
    return 0


def _print_extract(rep):
    flag = "" if rep["threshold_reached"] else " (threshold not reached)"
    print(f"synergies: n = {rep['n']}, VAF = {rep['vaf']:.4f} "
          f"from {rep['d']} x {rep['k']}{flag}")
    for n, v in rep["vaf_by_order"].items():
        print(f"  n={n}: VAF {v:.4f}")


def _print_command(summary):
    print(f"force synergy: w{summary['index']} (score {summary['score']:.6g}), "
          f"alpha = {summary['alpha']:g}")
    for cond, c in summary["conditions"].items():
        print(f"  F_hat_{cond}: peak {c['peak']:.4g}, mean {c['mean']:.4g}, "
              f"{c['trials']} trials")


def _print_simulate(metrics):
    for cond, m in metrics["conditions"].items():
        print(f"  {cond}: mean F_r {m['mean_F_r']:.4g}, rmse {m['force_rmse_vs_command']:.4g}, "
              f"path deviation {m['path_deviation_max']:.3g} m")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except KinosynError as exc:
        print(f"kinosyn: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"kinosyn: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
