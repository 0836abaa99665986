"""Output writers: number formatting, key-value reports, PGM heatmaps and
JSON-lines checkpoints."""

import json
import math
import os

import numpy as np


def fmt(x):
    """17 significant digits, enough for an exact float round trip."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, complex):
        return f"{fmt(x.real)}{'+' if x.imag >= 0 or math.isnan(x.imag) else '-'}{fmt(abs(x.imag))}j"
    return format(float(x), ".17g")


def format_kv(items):
    """``key = value`` lines for a mapping or sequence of pairs."""
    if hasattr(items, "items"):
        items = items.items()
    lines = []
    for k, v in items:
        if isinstance(v, (list, tuple, np.ndarray)):
            v = "[" + ", ".join(fmt(e) for e in v) + "]"
        elif isinstance(v, str):
            pass
        elif v is None:
            v = "none"
        else:
            v = fmt(v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


def pgm_bytes(values):
    v = np.asarray(values, dtype=float)
    if v.ndim != 2:
        raise ValueError("heatmap needs a 2D grid")
    if not np.all(np.isfinite(v)):
        raise ValueError("heatmap grid must be finite")
    px = np.clip(np.rint(128.0 + 2000.0 * v), 0, 255).astype(np.uint8)
    h, w = px.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + px.tobytes()


def write_heatmap(values, path):
    """Binary PGM, row 0 = smallest y value (y grows downward)."""
    data = pgm_bytes(values)
    with open(path, "wb") as fh:
        fh.write(data)


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8, count=w * h).reshape(h, w)


class CheckpointWriter:
    """Append-only JSON-lines file; one flushed line per record."""

    def __init__(self, path):
        self.path = path
        needs_nl = False
        if os.path.exists(path) and os.path.getsize(path) > 0:
            with open(path, "rb") as fh:
                fh.seek(-1, os.SEEK_END)
                needs_nl = fh.read(1) != b"\n"
        self._fh = open(path, "a", encoding="utf-8")
        if needs_nl:
            self._fh.write("\n")
            self._fh.flush()

    def write(self, record):
        self._fh.write(json.dumps(record, sort_keys=True) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_checkpoint(path):
    """Records from a JSON-lines checkpoint; a torn final line is ignored."""
    out = []
    if not os.path.exists(path):
        return out
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError:
                continue
    return out
