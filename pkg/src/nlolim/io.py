"""JSON and CSV serialization.  Every document carries ``"schema": "nlolim/1"``.

JSON floats use Python's shortest round-trip repr, so reading a file back
reproduces every value bit for bit.  CSV numbers use 17 significant digits
in scientific notation; NaN is written as an empty field.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from nlolim.spectral import Spectrum
from nlolim.sumrules import LambdaMatrix, LambdaSet
from nlolim.units import SCHEMA


class SchemaError(ValueError):
    pass


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return f"{v:.16e}"


def parse(field: str) -> float:
    return math.nan if field == "" else float(field)


def _clean(obj):
    """JSON-safe copy: numpy to lists, NaN/inf to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if not math.isfinite(v) else v
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_clean({"schema": SCHEMA, **doc}), indent=1, sort_keys=False) + "\n"


def check_schema(doc: dict) -> dict:
    if doc.get("schema") != SCHEMA:
        raise SchemaError(f"expected schema {SCHEMA!r}, found {doc.get('schema')!r}")
    return doc


def spectrum_to_dict(s: Spectrum, lam: LambdaMatrix | None = None,
                     lambda_set: LambdaSet | None = None, metadata: dict | None = None) -> dict:
    doc = {
        "energies": s.energies,
        "moments": s.moments,
        "charge": s.charge,
        "mass": s.mass,
    }
    if lam is not None:
        doc["lambda"] = lam.to_dict()
    if lambda_set is not None:
        doc["lambda_set"] = lambda_set.as_dict()
    if metadata is not None:
        doc["metadata"] = metadata
    return doc


def spectrum_from_dict(doc: dict):
    """Returns (Spectrum, LambdaMatrix or None, LambdaSet or None)."""
    s = Spectrum(doc["energies"], doc["moments"], doc.get("charge", 1.0), doc.get("mass", 1.0))
    lam = LambdaMatrix.from_dict(doc["lambda"]) if doc.get("lambda") else None
    ls = LambdaSet(**doc["lambda_set"]) if doc.get("lambda_set") else None
    return s, lam, ls


def dump_spectrum(path, s: Spectrum, lam=None, lambda_set=None, metadata=None) -> None:
    Path(path).write_text(dumps(spectrum_to_dict(s, lam, lambda_set, metadata)))


def load_spectrum(path):
    doc = json.loads(Path(path).read_text())
    if "schema" in doc:
        check_schema(doc)
    return spectrum_from_dict(doc)


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())
