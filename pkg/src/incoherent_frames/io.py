"""JSON file formats for frames, selection patterns and run manifests.

Frame files hold ``{"format", "version", "m", "n", "field", "data", "metadata"}``
where ``data`` lists the entries row by row; complex entries are ``[re, im]``
pairs.  Floats are written with Python's shortest round-trip repr (at most 17
significant digits), so finite doubles survive a save/load cycle bit for bit.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .harmonic import SelectionPattern

FRAME_FORMAT = "incoherent-frames/frame"
PATTERN_FORMAT = "incoherent-frames/pattern"
VERSION = 1


class FrameFileError(ValueError):
    pass


def frame_to_dict(frame: np.ndarray, metadata: dict | None = None) -> dict:
    F = np.asarray(frame)
    if F.ndim != 2:
        raise FrameFileError("frame must be a 2-D array")
    if not np.all(np.isfinite(F)):
        raise FrameFileError("frame entries must be finite")
    cplx = np.iscomplexobj(F)
    flat = F.ravel(order="C")
    if cplx:
        data = [[float(z.real), float(z.imag)] for z in flat]
    else:
        data = [float(v) for v in flat]
    return {
        "format": FRAME_FORMAT,
        "version": VERSION,
        "m": int(F.shape[0]),
        "n": int(F.shape[1]),
        "field": "complex" if cplx else "real",
        "data": data,
        "metadata": metadata or {},
    }


def dumps_frame(frame: np.ndarray, metadata: dict | None = None) -> str:
    return json.dumps(frame_to_dict(frame, metadata), allow_nan=False)


def _parse(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise FrameFileError(f"malformed {what}: {exc.msg} at byte offset {offset}") from exc


def loads_frame(text: str):
    """Parse a frame file; returns ``(frame, metadata)``."""
    d = _parse(text, "frame file")
    if not isinstance(d, dict):
        raise FrameFileError("malformed frame file: top level must be an object")
    for key in ("m", "n", "field", "data"):
        if key not in d:
            raise FrameFileError(f"malformed frame file: missing field {key!r}")
    m, n, fld, data = int(d["m"]), int(d["n"]), d["field"], d["data"]
    if fld not in ("real", "complex"):
        raise FrameFileError(f"malformed frame file: unknown field {fld!r}")
    if len(data) != m * n:
        raise FrameFileError(f"malformed frame file: expected {m * n} entries, got {len(data)}")
    if fld == "complex":
        arr = np.asarray(data, dtype=float)
        if arr.shape != (m * n, 2):
            raise FrameFileError("malformed frame file: complex entries must be [re, im] pairs")
        F = (arr[:, 0] + 1j * arr[:, 1]).reshape(m, n)
    else:
        F = np.asarray(data, dtype=float).reshape(m, n)
    return F, d.get("metadata", {})


def save_frame(path, frame: np.ndarray, metadata: dict | None = None) -> Path:
    path = Path(path)
    path.write_text(dumps_frame(frame, metadata))
    return path


def load_frame(path):
    return loads_frame(Path(path).read_text())


def save_pattern(path, pattern: SelectionPattern, source: str, extra: dict | None = None) -> Path:
    d = {"format": PATTERN_FORMAT, "version": VERSION, **pattern.to_dict(source)}
    if extra:
        d.update(extra)
    path = Path(path)
    path.write_text(json.dumps(d, indent=2))
    return path


def load_pattern(path):
    """Returns ``(pattern, source)``."""
    d = _parse(Path(path).read_text(), "pattern file")
    try:
        return SelectionPattern(int(d["n"]), tuple(d["indices"])), d.get("source")
    except (KeyError, TypeError) as exc:
        raise FrameFileError(f"malformed pattern file: {exc}") from exc


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_plain(obj), indent=2))
    return path


def _plain(obj):
    # numpy scalars and arrays to plain python for json
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj
