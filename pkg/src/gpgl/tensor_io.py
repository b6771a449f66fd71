"""On-disk container for batches of grid tensors.

Format: one line of compact JSON metadata, a newline, then the raw
little-endian float32 payload of all tensors concatenated in index
order, row-major with the channel axis last. A sidecar JSON manifest
maps tensor index to graph id, layout seed and class label so the
training stage can group layouts by source graph.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "ManifestEntry",
    "write_container",
    "read_container",
    "manifest_path_for",
    "write_manifest",
    "read_manifest",
]

_ORDER = "row-major, channel-last"


@dataclass(frozen=True)
class ManifestEntry:
    """Provenance of one tensor slot in a container."""

    graph_id: int
    layout_seed: int
    label: int


def write_container(path: str | Path, tensors: np.ndarray) -> None:
    """Write an ``(N, H, W, F)`` float32 batch to ``path``."""
    arr = np.ascontiguousarray(tensors, dtype=np.float32)
    if arr.ndim != 4:
        raise ValueError(f"tensors must be (N, H, W, F), got {arr.shape}")
    n, h, w, f = arr.shape
    header = {
        "height": h,
        "width": w,
        "channels": f,
        "count": n,
        "dtype": "f32",
        "order": _ORDER,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode("ascii"))
        fh.write(b"\n")
        fh.write(arr.astype("<f4", copy=False).tobytes())


def read_container(path: str | Path) -> tuple[np.ndarray, dict]:
    """Read a container back as ``((N, H, W, F) float32, header)``."""
    with open(path, "rb") as fh:
        line = fh.readline()
        payload = fh.read()
    header = json.loads(line.decode("ascii"))
    for key in ("height", "width", "channels", "count", "dtype", "order"):
        if key not in header:
            raise ValueError(f"container header missing {key!r}")
    if header["dtype"] != "f32":
        raise ValueError(f"unsupported dtype {header['dtype']!r}")
    shape = (header["count"], header["height"], header["width"], header["channels"])
    expected = int(np.prod(shape)) * 4
    if len(payload) != expected:
        raise ValueError(
            f"payload is {len(payload)} bytes, header implies {expected}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(shape)
    return arr.astype(np.float32, copy=False), header


def manifest_path_for(container_path: str | Path) -> Path:
    return Path(f"{container_path}.manifest.json")


def write_manifest(path: str | Path, entries: list[ManifestEntry]) -> None:
    doc = {"entries": [asdict(e) for e in entries]}
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    doc = json.loads(Path(path).read_text())
    return [ManifestEntry(**e) for e in doc["entries"]]
