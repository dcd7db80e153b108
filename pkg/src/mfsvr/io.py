"""CSV sample tables, result tables and the JSON model document."""

from __future__ import annotations

import csv
import io as _io
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .doe import DomainBox
from .errors import ConfigurationError, ParseError
from .kernels import CoSvrHyperparams, KernelParams
from .lssvr import LssvrModel, Normalizer, SampleSet

__all__ = [
    "SampleTable",
    "read_samples",
    "write_samples",
    "format_float",
    "write_table",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
    "MODEL_FORMAT",
]

MODEL_FORMAT = "mfsvr-model"
MODEL_VERSION = 1

_UNIT_RE = re.compile(r"^\s*(.*?)\s*\[(.*)\]\s*$")


def format_float(v) -> str:
    """Shortest decimal string that round-trips exactly."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v)


@dataclass
class SampleTable:
    """Rows of ``s`` inputs and one response, with column names and free-text units."""

    points: np.ndarray
    responses: np.ndarray
    input_names: list
    response_name: str = "y"
    units: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def to_samples(self, domain: Optional[DomainBox] = None) -> SampleSet:
        return SampleSet(self.points, self.responses, domain)


def _split_unit(name: str):
    m = _UNIT_RE.match(name)
    if m:
        return m.group(1), m.group(2)
    return name.strip(), None


def read_samples(path, require_response: bool = True) -> SampleTable:
    """Read a sample CSV: header row, then ``x1..xs, y`` rows.

    The last column is the response unless ``require_response`` is false, in
    which case every column is an input. ``name [unit]`` headers carry units.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc}", path=path) from None
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or not any(c.strip() for c in rows[0]):
        raise ParseError("missing header row", line=1, path=path)
    header = [c.strip() for c in rows[0]]
    if any(not c for c in header):
        raise ParseError("empty column name in header", line=1, path=path)
    ncol = len(header)
    if require_response and ncol < 2:
        raise ParseError("need at least one input column and one response column", line=1, path=path)
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != ncol:
            raise ParseError(f"expected {ncol} fields, found {len(row)}", line=lineno, path=path)
        try:
            nums = [float(c) for c in row]
        except ValueError:
            raise ParseError(f"non-numeric value in {row}", line=lineno, path=path) from None
        if not all(math.isfinite(v) for v in nums):
            raise ParseError("non-finite value", line=lineno, path=path)
        values.append(nums)
    if not values:
        raise ParseError("no data rows", line=2, path=path)
    arr = np.array(values, dtype=float)
    names, units = [], {}
    for col in header:
        name, unit = _split_unit(col)
        names.append(name)
        if unit is not None:
            units[name] = unit
    if require_response:
        return SampleTable(arr[:, :-1], arr[:, -1], names[:-1], names[-1], units)
    return SampleTable(arr, np.full(arr.shape[0], np.nan), names, "", units)


def _header(table_names, units):
    return [f"{n} [{units[n]}]" if n in units else n for n in table_names]


def write_samples(path, points, responses=None, input_names=None, response_name="y", units=None) -> None:
    """Write a sample CSV. ``responses=None`` writes inputs only."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    s = pts.shape[1]
    names = list(input_names) if input_names else [f"x{k + 1}" for k in range(s)]
    units = units or {}
    cols = names + ([response_name] if responses is not None else [])
    rows = [_header(cols, units)]
    y = None if responses is None else np.asarray(responses, dtype=float).ravel()
    for i in range(pts.shape[0]):
        row = [format_float(v) for v in pts[i]]
        if y is not None:
            row.append(format_float(y[i]))
        rows.append(row)
    write_table(path, rows)


def write_table(path, rows) -> None:
    buf = _io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    Path(path).write_text(buf.getvalue())


# --- model document ------------------------------------------------------------

def _samples_dict(ss: SampleSet) -> dict:
    return {"points": ss.points.tolist(), "responses": ss.responses.tolist()}


def model_to_dict(model) -> dict:
    """Self-describing JSON-ready document for a trained Co_SVR or LS-SVR model."""
    from .cosvr import CoSvrModel

    doc = {"format": MODEL_FORMAT, "version": MODEL_VERSION}
    if isinstance(model, CoSvrModel):
        doc.update(
            kind="cosvr",
            hyperparameters=model.hp.to_dict(),
            domain=model.training.domain.to_list(),
            normalization=model.normalizer.to_dict(),
            lf=_samples_dict(model.training.lf),
            hf=_samples_dict(model.training.hf),
        )
    elif isinstance(model, LssvrModel):
        doc.update(
            kind="lssvr",
            hyperparameters={
                "sigma": model.kernel.sigma,
                "theta": model.kernel.theta.tolist(),
                "gamma": model.gamma,
            },
            domain=model.training.domain.to_list(),
            normalization=model.normalizer.to_dict(),
            training=_samples_dict(model.training),
        )
    else:
        raise ConfigurationError(f"cannot export object of type {type(model).__name__}")
    doc["alpha"] = np.asarray(model.alpha).tolist()
    doc["b"] = model.b
    return doc


def model_from_dict(doc: dict):
    from .cosvr import CoSvrModel, MultiFidelityData

    if doc.get("format") != MODEL_FORMAT:
        raise ParseError(f"not a {MODEL_FORMAT} document")
    if doc.get("version") != MODEL_VERSION:
        raise ParseError(f"unsupported model document version {doc.get('version')!r}")
    try:
        domain = DomainBox(tuple(tuple(iv) for iv in doc["domain"]))
        norm = Normalizer.from_dict(doc["normalization"])
        alpha = np.asarray(doc["alpha"], dtype=float)
        b = float(doc["b"])
        hp = doc["hyperparameters"]
        if doc["kind"] == "cosvr":
            data = MultiFidelityData(
                SampleSet(doc["lf"]["points"], doc["lf"]["responses"], domain),
                SampleSet(doc["hf"]["points"], doc["hf"]["responses"], domain),
            )
            return CoSvrModel(alpha, b, CoSvrHyperparams(**hp), data, norm)
        if doc["kind"] == "lssvr":
            ss = SampleSet(doc["training"]["points"], doc["training"]["responses"], domain)
            return LssvrModel(alpha, b, KernelParams(hp["sigma"], hp["theta"]), float(hp["gamma"]), ss, norm)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed model document: {exc!r}") from None
    raise ParseError(f"unknown model kind {doc.get('kind')!r}")


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read model document: {exc}", path=path) from None
    return model_from_dict(doc)
