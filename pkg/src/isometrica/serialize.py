"""JSON wire formats for matrices, operators, paths, and reports.

Matrices travel as {"rows", "cols", "data"} with ``data`` a flat
row-major list of [re, im] pairs; block operators wrap a list of those.
Serialization is deterministic — sorted keys, no timestamps, floats via
repr — so identical inputs always produce identical bytes.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .homotopy import IsometryPath, PathCertificate
from .numerics import as_matrix
from .operators import BlockOperator
from .projection_geometry import FivePartDecomposition


def matrix_to_json(a: np.ndarray) -> dict:
    a = as_matrix(a)
    rows, cols = a.shape
    flat = a.reshape(-1)
    return {
        "rows": int(rows),
        "cols": int(cols),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(doc: dict) -> np.ndarray:
    rows, cols = int(doc["rows"]), int(doc["cols"])
    data = doc["data"]
    if len(data) != rows * cols:
        raise ValueError(
            f"data length {len(data)} does not match {rows}x{cols}"
        )
    flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    return flat.reshape(rows, cols)


def block_operator_to_json(w: BlockOperator) -> dict:
    return {"blocks": [matrix_to_json(b) for b in w.blocks]}


def block_operator_from_json(doc: dict) -> BlockOperator:
    return BlockOperator(tuple(matrix_from_json(b) for b in doc["blocks"]))


def path_to_json(path: IsometryPath) -> dict:
    return {
        "construction": path.construction_tag,
        "min_segment_gap": path.min_segment_gap,
        "samples": [
            {"t": float(t), "operator": block_operator_to_json(w)}
            for t, w in path.samples
        ],
    }


def path_from_json(doc: dict) -> IsometryPath:
    return IsometryPath(
        samples=tuple(
            (float(s["t"]), block_operator_from_json(s["operator"]))
            for s in doc["samples"]
        ),
        construction_tag=str(doc["construction"]),
        min_segment_gap=doc.get("min_segment_gap"),
    )


def certificate_to_json(cert: PathCertificate) -> dict:
    return {
        "all_partial_isometries": cert.all_partial_isometries,
        "max_pi_residual": cert.max_pi_residual,
        "max_step": cert.max_step,
        "step_bound": cert.step_bound,
        "endpoints_match": cert.endpoints_match,
        "all_extremal": cert.all_extremal,
        "min_segment_gap": cert.min_segment_gap,
        "passed": cert.passed,
    }


def _sig12(x: float) -> float:
    return float(f"{x:.12g}")


def decomposition_to_json(dec: FivePartDecomposition) -> dict:
    """Decomposition report: dimensions, angles (12 significant digits),
    and the adapted basis."""
    d00, d01, d10, d11 = dec.dims
    return {
        "ambient": dec.ambient,
        "dims": {"d00": d00, "d01": d01, "d10": d10, "d11": d11},
        "angles": [_sig12(t) for t in dec.angles],
        "basis": matrix_to_json(dec.basis),
    }


def dumps(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, newline-terminated)."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
