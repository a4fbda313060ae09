"""Feature-file formats and report serialization.

Binary layout (little-endian throughout)::

    magic   4 bytes  b"FSF1"
    n       uint32   row count
    d       uint32   feature dimension
    classes uint32   class count
    dtype   uint8    0 = float32
    records n times: [label uint32][d * float32]

Values are stored as float32 and widened to float64 on read. A ``.csv``
extension switches to a text table with header ``label,f0,...,f{d-1}``.
Reports are emitted as line-oriented ``key=value`` text.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import (
    BadMagic,
    FeatureFileError,
    FeatureSet,
    LabelOutOfRange,
    NonFiniteValue,
    TruncatedFile,
    ValueOverflow,
)

__all__ = ["read_features", "write_features", "format_report"]

MAGIC = b"FSF1"
_HEADER = struct.Struct("<4sIIIB")
DTYPE_F32 = 0


def read_features(path) -> FeatureSet:
    """Load a feature file, auto-detecting CSV by extension."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _read_csv(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise TruncatedFile(f"{path}: {len(raw)} bytes is smaller than the header")
    magic, n, d, class_count, dtype_code = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagic(f"{path}: expected magic {MAGIC!r}, found {magic!r}")
    if dtype_code != DTYPE_F32:
        raise FeatureFileError(f"{path}: unknown dtype code {dtype_code}")
    expected = _HEADER.size + n * (4 + 4 * d)
    if len(raw) != expected:
        raise TruncatedFile(f"{path}: expected {expected} bytes, found {len(raw)}")
    record = np.dtype([("label", "<u4"), ("vec", "<f4", (d,))])
    records = np.frombuffer(raw, dtype=record, count=n, offset=_HEADER.size)
    labels = records["label"].astype(np.int64)
    if labels.size and labels.max() >= class_count:
        raise LabelOutOfRange(
            f"{path}: label {labels.max()} outside [0, {class_count})"
        )
    data = records["vec"].astype(np.float64)
    if not np.all(np.isfinite(data)):
        raise NonFiniteValue(f"{path}: payload contains NaN or infinite values")
    return FeatureSet(data, labels, class_count)


def write_features(fs: FeatureSet, path) -> None:
    """Write a FeatureSet in the binary layout (or CSV by extension)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        _write_csv(fs, path)
        return
    with np.errstate(over="ignore"):
        narrow = fs.data.astype(np.float32)
    if not np.all(np.isfinite(narrow)):
        raise ValueOverflow("values exceed the float32 range")
    record = np.dtype([("label", "<u4"), ("vec", "<f4", (fs.d,))])
    records = np.empty(fs.n, dtype=record)
    records["label"] = fs.labels.astype(np.uint32)
    records["vec"] = narrow
    header = _HEADER.pack(MAGIC, fs.n, fs.d, fs.class_count, DTYPE_F32)
    path.write_bytes(header + records.tobytes())


def _read_csv(path: Path) -> FeatureSet:
    with path.open() as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if cols[0] != "label":
            raise BadMagic(f"{path}: CSV header must start with 'label', got {cols[0]!r}")
        d = len(cols) - 1
        try:
            table = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise TruncatedFile(f"{path}: malformed CSV body: {exc}") from exc
    if table.shape[0] == 0 or table.shape[1] != d + 1:
        raise TruncatedFile(f"{path}: expected {d + 1} columns, got {table.shape}")
    labels = table[:, 0].astype(np.int64)
    if np.any(table[:, 0] != labels):
        raise LabelOutOfRange(f"{path}: non-integer label column")
    data = table[:, 1:]
    if not np.all(np.isfinite(data)):
        raise NonFiniteValue(f"{path}: payload contains NaN or infinite values")
    if labels.min() < 0:
        raise LabelOutOfRange(f"{path}: negative label {labels.min()}")
    return FeatureSet(data, labels, int(labels.max()) + 1)


def _write_csv(fs: FeatureSet, path: Path) -> None:
    with np.errstate(over="ignore"):
        narrow = fs.data.astype(np.float32)
    if not np.all(np.isfinite(narrow)):
        raise ValueOverflow("values exceed the float32 range")
    with path.open("w") as fh:
        fh.write("label," + ",".join(f"f{i}" for i in range(fs.d)) + "\n")
        for label, row in zip(fs.labels, narrow):
            fh.write(str(int(label)) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def format_report(entries) -> str:
    """Render (key, value) pairs as one key=value line each.

    Floats are rendered with repr so equal runs produce byte-identical
    reports.
    """
    lines = []
    for key, value in entries:
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"
