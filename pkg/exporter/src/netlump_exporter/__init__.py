"""Export dense ReLU/LeakyReLU stacks from torch or keras checkpoints to
the reducer toolkit's network-document format, with manifest and
round-trip validation."""

from .check import ROUNDTRIP_TOL, roundtrip_check
from .export import (ExportRequest, build_manifest, export,
                     manifest_path_for, network_document)
from .extract import (OUTPUT_CAVEAT, DenseStep, ExportError,
                      load_dense_steps, parse_layer_range, select_range)

__version__ = "0.1.0"

__all__ = [
    "ROUNDTRIP_TOL", "roundtrip_check",
    "ExportRequest", "build_manifest", "export",
    "manifest_path_for", "network_document",
    "OUTPUT_CAVEAT", "DenseStep", "ExportError",
    "load_dense_steps", "parse_layer_range", "select_range",
    "__version__",
]
