"""DFF ("Doppler Field File") container: a small binary format for frames.

Layout, bit-exact:

* bytes 0-3: magic ``DFLD``
* byte 4: format version (currently 1)
* bytes 5-8: little-endian u32 length ``L`` of the JSON header
* bytes 9 .. 9+L: UTF-8 JSON header with keys ``n_radial``, ``n_angular``,
  ``r_min``, ``r_max``, ``theta_min``, ``theta_max``, ``v_nyquist``,
  ``channels`` (ordered subset of ["velocity", "power", "labels"]) and
  ``wrapped`` (boolean)
* channel planes in listed order, row-major with the radial index major,
  little-endian float32 for velocity/power and int8 for labels.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import DataFormatError, InvalidArgumentError
from .field import DopplerFrame, LabelMap, PolarGrid

MAGIC = b"DFLD"
VERSION = 1

_CHANNEL_DTYPES = {
    "velocity": np.dtype("<f4"),
    "power": np.dtype("<f4"),
    "labels": np.dtype("<i1"),
}


def write_dff(path, frame: DopplerFrame, labels: LabelMap | None = None) -> None:
    """Write a frame (and optionally its label map) to ``path`` atomically."""
    channels = ["velocity", "power"]
    planes = [frame.velocity, frame.power]
    if labels is not None:
        if labels.shape != frame.shape:
            raise InvalidArgumentError("label shape does not match frame shape")
        channels.append("labels")
        planes.append(labels.labels)

    header = frame.grid.to_header()
    header["v_nyquist"] = float(frame.nyquist_velocity)
    header["channels"] = channels
    header["wrapped"] = bool(frame.wrapped)
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    buf = bytearray()
    buf += MAGIC
    buf += struct.pack("B", VERSION)
    buf += struct.pack("<I", len(header_bytes))
    buf += header_bytes
    for name, plane in zip(channels, planes):
        buf += np.ascontiguousarray(plane, dtype=_CHANNEL_DTYPES[name]).tobytes()
    _atomic_write(path, bytes(buf))


def read_dff(path) -> tuple[DopplerFrame, LabelMap | None]:
    """Read a DFF file back into a frame and its label map (if stored)."""
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise DataFormatError(f"cannot read {path}: {e}") from e
    if len(raw) < 9 or raw[:4] != MAGIC:
        raise DataFormatError(f"{path}: not a DFF file (bad magic)")
    version = raw[4]
    if version != VERSION:
        raise DataFormatError(f"{path}: unsupported DFF version {version}")
    (hlen,) = struct.unpack_from("<I", raw, 5)
    if len(raw) < 9 + hlen:
        raise DataFormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[9 : 9 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataFormatError(f"{path}: invalid JSON header: {e}") from e

    try:
        grid = PolarGrid.from_header(header)
        v_nyquist = float(header["v_nyquist"])
        channels = list(header["channels"])
        wrapped = bool(header["wrapped"])
    except (KeyError, TypeError, ValueError) as e:
        raise DataFormatError(f"{path}: incomplete header: {e}") from e
    if any(c not in _CHANNEL_DTYPES for c in channels):
        raise DataFormatError(f"{path}: unknown channel in {channels}")

    n = grid.n_radial * grid.n_angular
    offset = 9 + hlen
    planes: dict[str, np.ndarray] = {}
    for name in channels:
        dt = _CHANNEL_DTYPES[name]
        nbytes = n * dt.itemsize
        if len(raw) < offset + nbytes:
            raise DataFormatError(f"{path}: truncated {name} plane")
        planes[name] = (
            np.frombuffer(raw, dtype=dt, count=n, offset=offset)
            .reshape(grid.shape)
            .copy()
        )
        offset += nbytes
    if offset != len(raw):
        raise DataFormatError(f"{path}: {len(raw) - offset} trailing bytes")
    if "velocity" not in planes or "power" not in planes:
        raise DataFormatError(f"{path}: velocity and power channels are required")

    try:
        frame = DopplerFrame(
            grid=grid,
            velocity=planes["velocity"],
            power=planes["power"],
            nyquist_velocity=v_nyquist,
            wrapped=wrapped,
        )
        labels = LabelMap(planes["labels"]) if "labels" in planes else None
    except InvalidArgumentError as e:
        raise DataFormatError(f"{path}: invalid field data: {e}") from e
    return frame, labels


def _atomic_write(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
