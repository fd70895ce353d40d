"""Round-trip validation: framework forward vs the reducer's evaluator.

The exported document is only trustworthy if the reducer toolchain computes
the same function the framework does.  This module drives both sides on the
same random inputs: the framework side runs the *original layer objects*
(so a transposed kernel cannot cancel against a transposed export), and the
document side shells out to ``netlump eval`` — the exporter never links
against the reducer library.

Inputs are drawn in float64 and then quantized through the source model's
dtype, so both sides see bit-identical values; the residual deviation is
purely single-vs-double arithmetic drift, comfortably under ROUNDTRIP_TOL
for nets of ordinary depth.
"""

from __future__ import annotations

import json
import os
import subprocess
import tempfile

import numpy as np

from .extract import DenseStep, ExportError, load_dense_steps, select_range

ROUNDTRIP_TOL = 1e-5


def _torch_forward(steps: list[DenseStep], x: np.ndarray) -> np.ndarray:
    import torch

    modules = [obj for step in steps for obj in step.source_objects]
    model = torch.nn.Sequential(*modules).eval()
    param = next(model.parameters())
    with torch.no_grad():
        y = model(torch.as_tensor(x).to(param.dtype))
    return y.numpy().astype(np.float64)


def _keras_forward(steps: list[DenseStep], x: np.ndarray) -> np.ndarray:
    h = x.astype(steps[0].dtype)
    for step in steps:
        for obj in step.source_objects:
            h = obj(h)
    return np.asarray(h).astype(np.float64)


def _framework_forward(steps, x, kind):
    if kind == "torch":
        return _torch_forward(steps, x)
    return _keras_forward(steps, x)


def _eval_via_cli(doc_path: str, x: np.ndarray, workdir: str) -> np.ndarray:
    xfile = os.path.join(workdir, "x.json")
    with open(xfile, "w", encoding="utf-8") as f:
        json.dump([float(v) for v in x], f)
    try:
        proc = subprocess.run(
            ["netlump", "eval", "--input", doc_path, "--x", xfile],
            capture_output=True, text=True)
    except FileNotFoundError:
        raise ExportError(
            "the `netlump` command is not on PATH; install the reducer "
            "toolkit to run round-trip checks") from None
    if proc.returncode != 0:
        raise ExportError(
            f"netlump eval failed (exit {proc.returncode}): "
            f"{proc.stderr.strip()}")
    return np.asarray(json.loads(proc.stdout), dtype=np.float64)


def roundtrip_check(source: str, kind: str, layers: str | None,
                    doc_path: str, samples: int = 100,
                    seed: int = 0) -> float:
    """Max |framework - document| over `samples` seeded random inputs."""
    if samples < 1:
        raise ExportError("samples must be positive")
    all_steps, barriers = load_dense_steps(source, kind)
    steps, _ = select_range(all_steps, layers, barriers)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(samples, steps[0].width_in))
    # Snap inputs onto the source dtype's grid so both sides start from
    # bit-identical values.
    x = x.astype(steps[0].dtype).astype(np.float64)

    reference = _framework_forward(steps, x, kind)
    worst = 0.0
    with tempfile.TemporaryDirectory() as workdir:
        for i in range(samples):
            got = _eval_via_cli(doc_path, x[i], workdir)
            if got.shape != reference[i].shape:
                raise ExportError(
                    f"document output has {got.size} values, the framework "
                    f"produced {reference[i].size}")
            worst = max(worst, float(np.max(np.abs(got - reference[i]))))
    return worst
