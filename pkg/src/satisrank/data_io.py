"""Batch/stream ingestion and reproducible synthetic data.

The generator core is SplitMix64 applied to a counter sequence, so draw k of
a stream is a pure integer function of (seed, k): exactly reproducible across
runs and platforms, trivially vectorizable, and safe to resume at any offset.
Uniforms take the top 53 bits; normals come from Box-Muller pairs; draws
serialize as decimal text with 17 significant digits for exact round trips.

Batch CSV format: header ``item_id,target,value``, one observation per row,
a constant target within each item.  Stream files carry ``item_id,value``
lines.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import ParseError, StreamError
from .risk_core import ItemBatch

__all__ = [
    "DistributionFamily",
    "DistributionSpec",
    "SplitMix64Stream",
    "generate_synthetic",
    "bootstrap_indices",
    "load_batches",
    "write_batches",
    "stream_observations",
    "parse_distribution",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64
_TWO53 = float(1 << 53)


class DistributionFamily(str, Enum):
    NORMAL = "normal"
    UNIFORM = "uniform"
    LOGNORMAL = "lognormal"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class DistributionSpec:
    family: DistributionFamily
    param1: float
    param2: float
    seed: int

    def __post_init__(self):
        family = DistributionFamily(self.family)
        object.__setattr__(self, "family", family)
        if not (math.isfinite(self.param1) and math.isfinite(self.param2)):
            raise ValueError("distribution parameters must be finite")
        if family is DistributionFamily.NORMAL and not self.param2 > 0:
            raise ValueError("normal requires sd > 0")
        if family is DistributionFamily.UNIFORM and not self.param1 < self.param2:
            raise ValueError("uniform requires lo < hi")
        if family is DistributionFamily.LOGNORMAL and not self.param2 > 0:
            raise ValueError("lognormal requires sigma > 0")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        object.__setattr__(self, "seed", int(self.seed))


def _mix(counters: np.ndarray, seed: int) -> np.ndarray:
    """SplitMix64 output words for the given counter positions."""
    with np.errstate(over="ignore"):
        z = _U64(seed % (1 << 64)) + _GOLDEN * (counters.astype(np.uint64) + _U64(1))
        z = (z ^ (z >> _U64(30))) * _MIX1
        z = (z ^ (z >> _U64(27))) * _MIX2
        return z ^ (z >> _U64(31))


def _uniform_halfopen(counters: np.ndarray, seed: int) -> np.ndarray:
    """u in [0, 1) from the top 53 bits."""
    return (_mix(counters, seed) >> _U64(11)).astype(np.float64) / _TWO53


def _standard_normals(start: int, n: int, seed: int) -> np.ndarray:
    """Box-Muller on counter pairs; output i uses pair i // 2."""
    j0, j1 = start // 2, (start + n - 1) // 2
    pairs = np.arange(j0, j1 + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        u1 = ((_mix(pairs * _U64(2), seed) >> _U64(11)).astype(np.float64) + 1.0) / _TWO53
        u2 = _uniform_halfopen(pairs * _U64(2) + _U64(1), seed)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * math.pi * u2
    block = np.empty(2 * pairs.size)
    block[0::2] = radius * np.cos(angle)
    block[1::2] = radius * np.sin(angle)
    offset = start - 2 * j0
    return block[offset : offset + n]


class SplitMix64Stream:
    """Resumable deterministic draw stream for one DistributionSpec."""

    def __init__(self, spec: DistributionSpec, start: int = 0):
        if spec.family is DistributionFamily.EMPIRICAL:
            raise ValueError("empirical family has no generator")
        self.spec = spec
        self.position = int(start)

    def draw(self, n: int) -> np.ndarray:
        spec = self.spec
        start = self.position
        if spec.family is DistributionFamily.UNIFORM:
            counters = np.arange(start, start + n, dtype=np.uint64)
            u = _uniform_halfopen(counters, spec.seed)
            out = spec.param1 + (spec.param2 - spec.param1) * u
        else:
            z = _standard_normals(start, n, spec.seed)
            if spec.family is DistributionFamily.NORMAL:
                out = spec.param1 + spec.param2 * z
            else:
                out = np.exp(spec.param1 + spec.param2 * z)
        self.position = start + n
        return out


def generate_synthetic(spec: DistributionSpec, n: int) -> np.ndarray:
    """n deterministic draws for the seed (prefix-stable: the first k of n
    draws equal the first k of any longer run)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return SplitMix64Stream(spec).draw(n)


def bootstrap_indices(n: int, size: int, seed: int) -> np.ndarray:
    """`size` with-replacement indices into range(n), seed-deterministic."""
    if n < 1 or size < 1:
        raise ValueError("n and size must be >= 1")
    u = _uniform_halfopen(np.arange(size, dtype=np.uint64), seed)
    return np.minimum((u * n).astype(np.int64), n - 1)


def _check_finite(value: float, lineno: int) -> float:
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {value!r}", line=lineno)
    return value


def load_batches(path) -> list[ItemBatch]:
    """Batch CSV -> ItemBatch list in first-appearance order."""
    path = Path(path)
    order: list[str] = []
    targets: dict[str, float] = {}
    values: dict[str, list[float]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        if [h.strip() for h in header] != ["item_id", "target", "value"]:
            raise ParseError(f"expected header item_id,target,value, got {header}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
            item_id = row[0].strip()
            try:
                target = float(row[1])
                value = float(row[2])
            except ValueError:
                raise ParseError(f"non-numeric field in {row!r}", line=lineno) from None
            _check_finite(target, lineno)
            _check_finite(value, lineno)
            if item_id not in targets:
                order.append(item_id)
                targets[item_id] = target
                values[item_id] = []
            elif targets[item_id] != target:
                raise ParseError(
                    f"item {item_id!r} target changed from {targets[item_id]} to {target}",
                    line=lineno,
                )
            values[item_id].append(value)
    if not order:
        raise ValueError(f"{path}: no data rows")
    return [ItemBatch(item_id=i, samples=np.array(values[i]), target=targets[i]) for i in order]


def write_batches(path, batches: list[ItemBatch]) -> None:
    """Inverse of load_batches; 17-significant-digit decimal serialization."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["item_id", "target", "value"])
        for batch in batches:
            target = f"{batch.target:.17g}"
            for v in batch.samples:
                writer.writerow([batch.item_id, target, f"{v:.17g}"])


def _stream_file(path: Path) -> Iterator[tuple[str, float]]:
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            parts = text.split(",")
            if len(parts) != 2:
                raise StreamError(f"expected 'item_id,value', got {text!r}", line=lineno)
            try:
                value = float(parts[1])
            except ValueError:
                raise StreamError(f"non-numeric value in {text!r}", line=lineno) from None
            _check_finite(value, lineno)
            yield parts[0].strip(), value


def _stream_generator(spec: DistributionSpec, item_id: str, chunk: int) -> Iterator[tuple[str, float]]:
    stream = SplitMix64Stream(spec)
    while True:
        for v in stream.draw(chunk):
            yield item_id, float(v)


def stream_observations(source, item_id: str = "item", chunk: int = 4096):
    """(item_id, value) iterator from a record file or a DistributionSpec.

    File sources are finite; generator sources are infinite and
    seed-deterministic.
    """
    if isinstance(source, DistributionSpec):
        return _stream_generator(source, item_id, chunk)
    return _stream_file(Path(source))


def parse_distribution(text: str) -> DistributionSpec:
    """CLI syntax ``normal:MEAN:SD:SEED`` / ``uniform:LO:HI:SEED`` /
    ``lognormal:MU:SIGMA:SEED``."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ValueError(f"expected FAMILY:P1:P2:SEED, got {text!r}")
    family, p1, p2, seed = parts
    try:
        return DistributionSpec(
            family=DistributionFamily(family), param1=float(p1), param2=float(p2), seed=int(seed)
        )
    except ValueError as exc:
        raise ValueError(f"bad distribution {text!r}: {exc}") from None
