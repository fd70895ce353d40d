"""Write a network document (plus a manifest) for a slice of a model.

The document is the plain JSON form the reducer toolchain reads; the
manifest records where every document layer came from so a reviewer can
audit the export without loading the source framework.  Both files are
deterministic: exporting the same model twice yields identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .extract import DenseStep, load_dense_steps, select_range


@dataclass
class ExportRequest:
    source: str
    kind: str
    out: str
    layers: str | None = None


def network_document(steps: list[DenseStep]) -> dict:
    layers = []
    for step in steps:
        activation = {"kind": step.activation}
        if step.activation == "leaky_relu":
            activation["alpha"] = float(step.alpha)
        layers.append({
            "weights": [[float(v) for v in row] for row in step.weights],
            "bias": [float(v) for v in step.bias],
            "activation": activation,
        })
    return {"layers": layers}


def manifest_path_for(out: str) -> str:
    if out.endswith(".json"):
        return out[:-len(".json")] + ".manifest.json"
    return out + ".manifest.json"


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def build_manifest(req: ExportRequest, steps: list[DenseStep],
                   layer_range: tuple[int, int]) -> dict:
    first, last = layer_range
    entries = []
    for i, step in enumerate(steps):
        entry = {
            "document_layer": i,
            "source_layer": step.name,
            "width_in": step.width_in,
            "width_out": step.width_out,
            "activation": step.activation,
        }
        if step.activation == "leaky_relu":
            entry["alpha"] = float(step.alpha)
        entries.append(entry)
    return {
        "source": req.source,
        "kind": req.kind,
        "sha256": _sha256(req.source),
        "layer_range": f"{first}..{last}",
        "dtype": steps[0].dtype,
        "layers": entries,
    }


def _dump_json(doc, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def export(req: ExportRequest) -> dict:
    """Extract, slice, and write the document and its manifest.

    Returns the manifest so callers can report what was written.
    """
    steps, barriers = load_dense_steps(req.source, req.kind)
    steps, layer_range = select_range(steps, req.layers, barriers)
    manifest = build_manifest(req, steps, layer_range)
    _dump_json(network_document(steps), req.out)
    _dump_json(manifest, manifest_path_for(req.out))
    return manifest
