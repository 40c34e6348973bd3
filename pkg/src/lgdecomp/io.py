"""File formats: LG spectrum text files, PGM images and raw float64 fields.

Spectrum file (UTF-8, CSV compatible)::

    format=lgdecomp-spectrum-1
    w0_m=7.75e-04
    l_max=4
    nx=256
    ny=256
    pitch_m=5e-05
    center_x=127.5
    center_y=127.5
    params={...}
    l,p,re,im
    -4,0,1.2345678901234567e-03,-2.0000000000000000e-01
    ...

Raw fields are little-endian float64 with a JSON sidecar ``<file>.json``
holding ``width``, ``height``, ``pitch_m`` and ``complex`` (interleaved
re/im when true).
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .pipeline import LGSpectrum
from .polar_grid import DetectorSpec

FORMAT_TAG = "lgdecomp-spectrum-1"
RECORD_HEADER = "l,p,re,im"


class SpectrumFormatError(ValueError):
    def __init__(self, message, lineno=None):
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(where + message)
        self.lineno = lineno


def _num(x: float) -> str:
    return format(float(x), ".16e")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def format_spectrum(spectrum: LGSpectrum) -> str:
    lines = [f"format={FORMAT_TAG}", f"w0_m={_num(spectrum.w0)}", f"l_max={spectrum.l_max}"]
    det = spectrum.detector
    if det is not None:
        lines += [f"nx={det.nx}", f"ny={det.ny}", f"pitch_m={_num(det.pitch)}",
                  f"center_x={_num(det.center[0])}", f"center_y={_num(det.center[1])}"]
    lines.append("params=" + json.dumps(_jsonable(spectrum.params), sort_keys=True,
                                        separators=(",", ":")))
    lines.append(RECORD_HEADER)
    for (l, p), a in spectrum.entries():
        lines.append(f"{l},{p},{_num(a.real)},{_num(a.imag)}")
    return "\n".join(lines) + "\n"


def parse_spectrum(text: str) -> LGSpectrum:
    header = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines) and lines[i].strip() != RECORD_HEADER:
        line = lines[i].strip()
        i += 1
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key:
            raise SpectrumFormatError(f"malformed header line {line!r}", i)
        header[key.strip()] = (value.strip(), i)
    if i == len(lines):
        raise SpectrumFormatError(f"missing record header {RECORD_HEADER!r}")
    if header.get("format", (None,))[0] != FORMAT_TAG:
        raise SpectrumFormatError(f"unknown or missing format tag (expected {FORMAT_TAG})", 1)

    def get(key, conv, required=True):
        if key not in header:
            if required:
                raise SpectrumFormatError(f"missing header field {key!r}")
            return None
        value, lineno = header[key]
        try:
            return conv(value)
        except (ValueError, json.JSONDecodeError) as exc:
            raise SpectrumFormatError(f"bad value for {key}: {value!r}", lineno) from exc

    w0 = get("w0_m", float)
    if not (w0 > 0 and np.isfinite(w0)):
        raise SpectrumFormatError(f"w0_m must be positive, got {w0}", header["w0_m"][1])
    l_max = get("l_max", int)
    detector = None
    if "nx" in header:
        try:
            detector = DetectorSpec(get("nx", int), get("ny", int), get("pitch_m", float),
                                    (get("center_x", float), get("center_y", float)))
        except ValueError as exc:
            if isinstance(exc, SpectrumFormatError):
                raise
            raise SpectrumFormatError(f"invalid detector fields: {exc}") from exc
    params = get("params", json.loads, required=False) or {}

    rows = {}
    for j, line in enumerate(lines[i + 1:], start=i + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise SpectrumFormatError(f"expected 4 fields, got {len(parts)}", j)
        try:
            l, p = int(parts[0]), int(parts[1])
            a = complex(float(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise SpectrumFormatError(f"unparsable record {line!r}", j) from exc
        row = rows.setdefault(l, [])
        if p != len(row):
            raise SpectrumFormatError(f"non-contiguous p={p} for l={l}", j)
        if not np.isfinite(a):
            raise SpectrumFormatError("non-finite amplitude", j)
        row.append(a)
    return LGSpectrum(w0, {l: np.array(v) for l, v in rows.items()}, detector, l_max, params)


def write_spectrum(spectrum: LGSpectrum, path) -> None:
    Path(path).write_text(format_spectrum(spectrum), encoding="utf-8")


def read_spectrum(path) -> LGSpectrum:
    return parse_spectrum(Path(path).read_text(encoding="utf-8"))


# --- images ---------------------------------------------------------------

def _pgm_tokens(data: bytes):
    """Header tokens of a binary PGM and the offset of the pixel data."""
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        tokens.append(data[start:pos].decode("ascii"))
    return tokens, pos + 1


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    tokens, offset = _pgm_tokens(data)
    if tokens[0] != "P5":
        raise ValueError(f"{path}: only binary PGM (P5) is supported")
    width, height, maxval = (int(t) for t in tokens[1:])
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    pixels = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
    return pixels.reshape(height, width).astype(np.float64)


def write_pgm(path, img, maxval: int = 65535) -> None:
    """Write ``|img|`` scaled to ``[0, maxval]`` as a binary PGM."""
    a = np.abs(np.asarray(img, dtype=np.complex128))
    peak = a.max()
    scaled = np.zeros_like(a) if peak == 0 else a / peak * maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    pixels = np.round(scaled).astype(dtype)
    header = f"P5\n{a.shape[1]} {a.shape[0]}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes())


def _sidecar(path) -> Path:
    return Path(str(path) + ".json")


def write_raw(path, img, pitch: float | None = None) -> None:
    img = np.asarray(img)
    is_complex = np.iscomplexobj(img) and np.any(np.imag(img) != 0)
    if is_complex:
        data = np.empty(img.shape + (2,), dtype="<f8")
        data[..., 0] = img.real
        data[..., 1] = img.imag
    else:
        data = np.real(img).astype("<f8")
    Path(path).write_bytes(data.tobytes())
    meta = {"width": int(img.shape[1]), "height": int(img.shape[0]),
            "complex": bool(is_complex), "dtype": "<f8"}
    if pitch is not None:
        meta["pitch_m"] = float(pitch)
    _sidecar(path).write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")


def read_raw(path):
    """Return ``(image, pitch_or_None)``."""
    meta = json.loads(_sidecar(path).read_text(encoding="utf-8"))
    w, h = int(meta["width"]), int(meta["height"])
    data = np.frombuffer(Path(path).read_bytes(), dtype="<f8")
    if meta.get("complex"):
        if data.size != 2 * w * h:
            raise ValueError(f"{path}: expected {2 * w * h} values, found {data.size}")
        img = data[0::2] + 1j * data[1::2]
    else:
        if data.size != w * h:
            raise ValueError(f"{path}: expected {w * h} values, found {data.size}")
        img = data.astype(np.float64)
    return img.reshape(h, w), meta.get("pitch_m")


def read_image(path):
    """Load a PGM or raw image; returns ``(image, pitch_or_None)``.

    PGM pixel values are taken as field amplitudes with zero phase.
    """
    suffix = os.path.splitext(str(path))[1].lower()
    if suffix == ".pgm":
        return read_pgm(path), None
    return read_raw(path)


def write_image(path, img, pitch: float | None = None) -> None:
    suffix = os.path.splitext(str(path))[1].lower()
    if suffix == ".pgm":
        write_pgm(path, img)
    else:
        write_raw(path, img, pitch)


def write_table(path, header, rows) -> None:
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
