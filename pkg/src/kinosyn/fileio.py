"""CSV and plain-text formats read and written by the command line tool.

All floats are written with ``repr`` so a write/read cycle is lossless.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .errors import DataParseError, StructuralError
from .nmf import SynergySet
from .preprocess import RawTrial
from .signal_model import (
    Condition,
    EmgMatrix,
    ForceTrace,
    PositionTrace,
    PressureFrameSequence,
)

TRIAL_RE = re.compile(r"^trial(\d+)_(weak|strong|unlabeled)_emg\.csv$")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_rows(path: Path, header, rows) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")


def read_table(path: Path) -> tuple[list[str], np.ndarray]:
    """Read a headed numeric CSV. Errors name the 1-based row and column."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataParseError(f"cannot open: {exc.strerror}", path=path) from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataParseError("empty file", path=path) from None
        rows = []
        for r, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataParseError(
                    f"expected {len(header)} fields, got {len(row)}", path=path, row=r
                )
            vals = []
            for c, cell in enumerate(row, start=1):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataParseError(
                        f"not a number: {cell!r}", path=path, row=r, column=c
                    ) from None
            rows.append(vals)
    if not rows:
        raise DataParseError("no data rows", path=path)
    return header, np.array(rows, dtype=float)


def _time_column(header, path):
    if not header or header[0] != "t":
        raise DataParseError(f"first column must be 't', got {header[:1]}", path=path, row=1)


def _rate_from_t(t: np.ndarray) -> float:
    if t.shape[0] < 2:
        return 1.0
    step = float(np.median(np.diff(t)))
    return 1.0 / step if step > 0 else 1.0


# -- EMG ----------------------------------------------------------------------


def write_emg(path, emg: EmgMatrix) -> None:
    t = np.arange(emg.k) / emg.sample_rate_hz
    write_rows(path, ["t", *emg.channel_labels],
               (row for row in np.column_stack([t, emg.data.T])))


def read_emg(path) -> EmgMatrix:
    header, arr = read_table(path)
    _time_column(header, path)
    if len(header) < 2:
        raise DataParseError("no channel columns", path=path, row=1)
    return EmgMatrix(arr[:, 1:].T, tuple(header[1:]), _rate_from_t(arr[:, 0]))


# -- force / pressure -----------------------------------------------------------


def write_pressure(path, frames: PressureFrameSequence, rate: float = 1.0) -> None:
    k, r, c = frames.frames.shape
    header = ["t"] + [f"cell_{i}_{j}" for i in range(1, r + 1) for j in range(1, c + 1)]
    t = np.arange(k) / rate
    write_rows(path, header, np.column_stack([t, frames.frames.reshape(k, r * c)]))


def read_pressure(path) -> PressureFrameSequence:
    header, arr = read_table(path)
    _time_column(header, path)
    cells = []
    for col, name in enumerate(header[1:], start=2):
        m = re.fullmatch(r"cell_(\d+)_(\d+)", name)
        if not m:
            raise DataParseError(f"bad cell column name {name!r}", path=path, row=1, column=col)
        cells.append((int(m.group(1)), int(m.group(2))))
    rows = max(i for i, _ in cells)
    cols = max(j for _, j in cells)
    expected = [(i, j) for i in range(1, rows + 1) for j in range(1, cols + 1)]
    if cells != expected:
        raise DataParseError("cell columns must be complete and row-major", path=path, row=1)
    return PressureFrameSequence(arr[:, 1:].reshape(arr.shape[0], rows, cols))


def write_force(path, force: ForceTrace, t=None) -> None:
    t = np.arange(len(force)) if t is None else t
    write_rows(path, ["t", "force"], np.column_stack([t, force.values]))


def read_force(path, label="F_h") -> ForceTrace:
    header, arr = read_table(path)
    _time_column(header, path)
    if header[1:] != ["force"]:
        raise DataParseError(f"expected header t,force, got {','.join(header)}", path=path, row=1)
    return ForceTrace(arr[:, 1], label)


# -- position -----------------------------------------------------------------


def write_position(path, pos: PositionTrace, t=None) -> None:
    t = np.arange(len(pos)) if t is None else t
    write_rows(path, ["t", "x", "y"], np.column_stack([t, pos.points.T]))


def read_position(path) -> PositionTrace:
    header, arr = read_table(path)
    if header != ["t", "x", "y"]:
        raise DataParseError(f"expected header t,x,y, got {','.join(header)}", path=path, row=1)
    return PositionTrace(arr[:, 1:].T)


# -- trial directories ----------------------------------------------------------


def trial_stem(number: int, condition: Condition) -> str:
    return f"trial{number:02d}_{Condition(condition).value}"


def read_trial_dir(directory) -> list[RawTrial]:
    """Load every ``trialNN_<condition>_{emg,pressure|force,position}.csv``."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataParseError("not a directory", path=directory)
    found = []
    for p in directory.iterdir():
        m = TRIAL_RE.match(p.name)
        if m:
            found.append((int(m.group(1)), Condition(m.group(2)), p))
    if not found:
        raise StructuralError(f"no trial files in {directory}")
    found.sort()
    trials = []
    for number, cond, emg_path in found:
        stem = directory / trial_stem(number, cond)
        emg = read_emg(emg_path)
        pressure = Path(f"{stem}_pressure.csv")
        force_path = Path(f"{stem}_force.csv")
        if pressure.exists():
            force = read_pressure(pressure)
        elif force_path.exists():
            force = read_force(force_path)
        else:
            raise DataParseError("missing pressure/force file", path=pressure)
        position = read_position(Path(f"{stem}_position.csv"))
        if not (emg.k == len(force) == len(position)):
            raise StructuralError(
                f"trial {number}: emg has {emg.k} rows, force {len(force)}, "
                f"position {len(position)}"
            )
        trials.append(RawTrial(emg, force, position, cond))
    return trials


def write_segments(path, lengths, conditions) -> None:
    start = 0
    rows = []
    for i, (n, c) in enumerate(zip(lengths, conditions), start=1):
        rows.append([fmt(i), Condition(c).value, fmt(start), fmt(n)])
        start += n
    write_rows(path, ["trial", "condition", "start", "length"], rows)


def read_segments(path) -> tuple[list[int], list[Condition]]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataParseError(f"cannot open: {exc.strerror}", path=path) from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "trial,condition,start,length":
        raise DataParseError("expected header trial,condition,start,length", path=path, row=1)
    lengths, conds = [], []
    for r, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        try:
            conds.append(Condition(parts[1]))
            lengths.append(int(parts[3]))
        except (IndexError, ValueError):
            raise DataParseError(f"bad segment row {ln!r}", path=path, row=r) from None
    return lengths, conds


# -- synergy file ---------------------------------------------------------------

SYNERGY_MAGIC = "# kinosyn synergy file v1"


def write_synergies(path, s: SynergySet) -> None:
    lines = [
        SYNERGY_MAGIC,
        f"d={s.d}",
        f"n={s.n}",
        f"k={s.k}",
        f"vaf={fmt(s.vaf)}",
        f"seed={s.seed}",
        "W",
    ]
    lines += [",".join(fmt(v) for v in row) for row in s.W]
    lines.append("C")
    lines += [",".join(fmt(v) for v in row) for row in s.C]
    Path(path).write_text("\n".join(lines) + "\n")


def read_synergies(path) -> SynergySet:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataParseError(f"cannot open: {exc.strerror}", path=path) from exc
    if not lines or lines[0] != SYNERGY_MAGIC:
        raise DataParseError("not a synergy file", path=path, row=1)
    meta = {}
    r = 1
    while r < len(lines) and "=" in lines[r]:
        key, _, val = lines[r].partition("=")
        meta[key.strip()] = val.strip()
        r += 1
    try:
        d, n, k = int(meta["d"]), int(meta["n"]), int(meta["k"])
        vaf_value, seed = float(meta["vaf"]), int(meta["seed"])
    except (KeyError, ValueError) as exc:
        raise DataParseError(f"bad header field: {exc}", path=path) from None

    def block(tag, start, nrows, ncols):
        if start >= len(lines) or lines[start] != tag:
            raise DataParseError(f"expected block {tag!r}", path=path, row=start + 1)
        out = []
        for i in range(start + 1, start + 1 + nrows):
            if i >= len(lines):
                raise DataParseError(f"block {tag} truncated", path=path, row=i + 1)
            cells = lines[i].split(",")
            if len(cells) != ncols:
                raise DataParseError(
                    f"expected {ncols} values, got {len(cells)}", path=path, row=i + 1
                )
            try:
                out.append([float(c) for c in cells])
            except ValueError:
                raise DataParseError("non-numeric value", path=path, row=i + 1) from None
        return np.array(out).reshape(nrows, ncols), start + 1 + nrows

    W, r = block("W", r, d, n)
    C, r = block("C", r, n, k)
    return SynergySet(W, C, vaf_value, seed=seed)


# -- misc -------------------------------------------------------------------------


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise DataParseError(f"cannot open: {exc.strerror}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise DataParseError(exc.msg, path=path, row=exc.lineno, column=exc.colno) from None


def write_long(path, series) -> None:
    """Long-format plot export: ``series,t,value`` rows.

    ``series`` maps a name to a 1-D array (t is the sample index) or to a
    ``(t, values)`` pair.
    """
    rows = []
    for name, data in series.items():
        if isinstance(data, tuple):
            t, v = data
        else:
            v = np.asarray(data)
            t = np.arange(v.shape[0])
        rows.extend([name, fmt(ti), fmt(vi)] for ti, vi in zip(t, v))
    write_rows(path, ["series", "t", "value"], rows)
