"""Binary sidecar persistence for preprocessing results, keyed by a content
hash of the source graph file."""
from __future__ import annotations

import hashlib
import pickle
from pathlib import Path

import numpy as np

from .graph import PerturbationSpec
from .reach import ReachIndex, Shortcut

FORMAT_VERSION = 1


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def save_index(
    path,
    *,
    graph_sha: str,
    index: ReachIndex,
    perturbation: PerturbationSpec,
    trim_keep: list[str] | None,
    exact_threshold: int,
) -> None:
    payload = {
        "version": FORMAT_VERSION,
        "graph_sha256": graph_sha,
        "bounds": np.asarray(index.bounds),
        "shortcuts": [
            (s.tail, s.head, s.cost, tuple(s.bypassed)) for s in index.shortcuts
        ],
        "cap": index.cap,
        "perturbation": {
            "relative_magnitude": perturbation.relative_magnitude,
            "seed": perturbation.seed,
        },
        "trim_keep": list(trim_keep) if trim_keep is not None else None,
        "exact_threshold": exact_threshold,
    }
    with open(path, "wb") as fh:
        pickle.dump(payload, fh, protocol=4)


def load_index(path) -> dict:
    with open(path, "rb") as fh:
        payload = pickle.load(fh)
    if payload.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported index format version in {path}")
    payload["index"] = ReachIndex(
        bounds=np.asarray(payload["bounds"]),
        shortcuts=[Shortcut(t, h, c, tuple(b)) for t, h, c, b in payload["shortcuts"]],
        cap=payload["cap"],
    )
    payload["perturbation_spec"] = PerturbationSpec(
        relative_magnitude=payload["perturbation"]["relative_magnitude"],
        seed=payload["perturbation"]["seed"],
    )
    return payload


def default_index_path(graph_path) -> Path:
    p = Path(graph_path)
    return p.with_suffix(p.suffix + ".ridx")
