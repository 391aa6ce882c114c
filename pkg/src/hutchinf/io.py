"""Deterministic file outputs: PPM renders, CSV tables, JSON reports (all written atomically)."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

WHITE, BLACK = 255, 0


def atomic_write(path, data: bytes) -> Path:
    """Write to a temp file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else repr(float(v))
    return str(v)


def csv_bytes(header: Sequence[str], rows: Iterable[Sequence]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue().encode("utf-8")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    return atomic_write(path, csv_bytes(header, rows))


def write_points_csv(path, cloud: np.ndarray) -> Path:
    cloud = np.asarray(cloud, dtype=float).reshape(len(cloud), -1)
    return write_csv(path, [f"x_{i}" for i in range(cloud.shape[1])], cloud.tolist())


def json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n").encode("utf-8")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_json(path, obj) -> Path:
    return atomic_write(path, json_bytes(obj))


# ---------------------------------------------------------------- raster

def blank(width: int, height: int) -> np.ndarray:
    if width < 1 or height < 1:
        raise ValueError("resolution must be >= 1")
    return np.full((height, width), True)


def _pixel_cols(x: np.ndarray, lo: float, hi: float, n: int) -> np.ndarray:
    c = np.floor((x - lo) / (hi - lo) * n).astype(np.int64)
    c[x == hi] = n - 1  # the closed upper edge belongs to the last pixel
    return c


def rasterize_points(cloud: np.ndarray, viewport, resolution) -> np.ndarray:
    """Boolean image (True = white); 1-d clouds are drawn on the middle row."""
    W, H = resolution
    img = blank(W, H)
    cloud = np.asarray(cloud, dtype=float).reshape(len(cloud), -1)
    lo, hi = viewport
    cols = _pixel_cols(cloud[:, 0], lo[0], hi[0], W)
    if cloud.shape[1] == 1:
        rows = np.full(len(cloud), H // 2)
        inside = (cols >= 0) & (cols < W)
    else:
        r = _pixel_cols(cloud[:, 1], lo[1], hi[1], H)
        rows = H - 1 - r  # row 0 is the top edge
        inside = (cols >= 0) & (cols < W) & (r >= 0) & (r < H)
    img[rows[inside], cols[inside]] = False
    return img


def rasterize_squares(sq: np.ndarray, viewport, resolution) -> np.ndarray:
    """Fill axis-aligned squares (rows x, y, side); every square covers at least one pixel."""
    W, H = resolution
    img = blank(W, H)
    lo, hi = viewport
    sx, sy = W / (hi[0] - lo[0]), H / (hi[1] - lo[1])
    for x, y, s in np.asarray(sq, dtype=float):
        c0, c1 = int(np.floor((x - lo[0]) * sx)), int(np.floor((x + s - lo[0]) * sx))
        r0, r1 = int(np.floor((y - lo[1]) * sy)), int(np.floor((y + s - lo[1]) * sy))
        c0, c1 = max(c0, 0), min(c1, W - 1)
        r0, r1 = max(r0, 0), min(r1, H - 1)
        if c0 > c1 or r0 > r1:
            continue
        img[H - 1 - r1:H - r0, c0:c1 + 1] = False
    return img


def ppm_bytes(img: np.ndarray) -> bytes:
    """Binary P6: white background, black set pixels, rows top to bottom."""
    H, W = img.shape
    rgb = np.where(img, WHITE, BLACK).astype(np.uint8)
    rgb = np.repeat(rgb[:, :, None], 3, axis=2)
    return f"P6\n{W} {H}\n255\n".encode("ascii") + rgb.tobytes()


def write_ppm(path, img: np.ndarray) -> Path:
    return atomic_write(path, ppm_bytes(img))


def read_ppm(path) -> np.ndarray:
    """Parse a P6 file written by :func:`write_ppm` back into a boolean image."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    W, H = map(int, parts[1].split())
    rgb = np.frombuffer(parts[3], dtype=np.uint8).reshape(H, W, 3)
    return rgb[:, :, 0] == WHITE


def black_pixels(img: np.ndarray) -> int:
    return int(np.count_nonzero(~img))
