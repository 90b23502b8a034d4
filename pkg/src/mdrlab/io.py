"""JSON file formats for states, POVMs and channels.

A complex matrix is stored as an array of rows, each entry a two-element
array ``[real, imaginary]``.  The three document kinds are:

* state:   ``{"labels": [...], "dims": [...], "matrix": M}``
* POVM:    ``{"labels": [...], "dims": [...], "elements": [M, ...]}``
* channel: ``{"labels": [...], "dims": [...],
  "output_labels": [...], "output_dims": [...], "kraus": [M, ...]}``
  where ``labels``/``dims`` describe the input layout.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import DensityOperator, Povm, QuantumChannel, SystemLayout


def matrix_to_json(m) -> list:
    a = np.asarray(m, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def matrix_from_json(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim != 3 or a.shape[2] != 2:
        raise ValueError("matrix entries must be [real, imaginary] pairs")
    return a[..., 0] + 1j * a[..., 1]


def _layout_from(doc: dict, labels_key: str = "labels", dims_key: str = "dims") -> SystemLayout:
    try:
        return SystemLayout(tuple(doc[labels_key]), tuple(doc[dims_key]))
    except KeyError as exc:
        raise ValueError(f"missing field {exc.args[0]!r}") from None


def _load(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValueError("top-level JSON value must be an object")
    return doc


def load_state(path) -> DensityOperator:
    doc = _load(path)
    if "matrix" not in doc:
        raise ValueError("state file requires a 'matrix' field")
    return DensityOperator(_layout_from(doc), matrix_from_json(doc["matrix"]))


def save_state(path, rho: DensityOperator) -> None:
    doc = {
        "labels": list(rho.layout.labels),
        "dims": list(rho.layout.dims),
        "matrix": matrix_to_json(rho.matrix),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_povm(path) -> Povm:
    doc = _load(path)
    if "elements" not in doc:
        raise ValueError("POVM file requires an 'elements' field")
    return Povm(_layout_from(doc), [matrix_from_json(e) for e in doc["elements"]])


def save_povm(path, povm: Povm) -> None:
    doc = {
        "labels": list(povm.layout.labels),
        "dims": list(povm.layout.dims),
        "elements": [matrix_to_json(e) for e in povm.elements],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_channel(path) -> QuantumChannel:
    doc = _load(path)
    if "kraus" not in doc:
        raise ValueError("channel file requires a 'kraus' field")
    inp = _layout_from(doc)
    out = _layout_from(doc, "output_labels", "output_dims")
    return QuantumChannel(inp, out, [matrix_from_json(k) for k in doc["kraus"]])


def save_channel(path, channel: QuantumChannel) -> None:
    doc = {
        "labels": list(channel.input_layout.labels),
        "dims": list(channel.input_layout.dims),
        "output_labels": list(channel.output_layout.labels),
        "output_dims": list(channel.output_layout.dims),
        "kraus": [matrix_to_json(k) for k in channel.kraus],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")
