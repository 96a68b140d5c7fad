"""Instance documents and canonical JSON.

An instance document looks like::

    {"kind": "matrix-hat",
     "payload": {"c_hat": [0, 0], "b_hat": [1, 1],
                 "b_hat_n": {"re": 0, "im": 1}, "a_hat_n": {"re": 0, "im": 0}},
     "tol": 1e-8}

Complex numbers are ``{"re": x, "im": y}`` objects; plain JSON numbers are
accepted where the imaginary part is zero. ``tol`` is optional.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidData, InvalidMatrix, ParseError
from .inverse import SpectralData
from .matrices import PeriodicMatrixGeneral, PeriodicMatrixHat, validate

KINDS = ("matrix-general", "matrix-hat", "spectral-data")

_FIELDS = {
    "matrix-general": ("c", "b", "a_n"),
    "matrix-hat": ("c_hat", "b_hat", "b_hat_n", "a_hat_n"),
    "spectral-data": ("lambda", "mu", "beta"),
}


@dataclass(frozen=True)
class InstanceFile:
    kind: str
    value: object
    tol: float | None = None


# Canonical JSON


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    if x == 0:
        return "0.0"
    text = format(x, ".17g")
    # Keep a float marker so the value parses back as a float.
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _encode(obj, indent: str, level: int) -> str:
    pad = "\n" + indent * (level + 1)
    end = "\n" + indent * level
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode(complex_to_json(obj), indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        return "[" + pad + ("," + pad).join(_encode(v, indent, level + 1) for v in seq) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj, indent: int = 2) -> str:
    """Deterministic JSON: sorted keys, 17 significant digits, trailing newline."""
    return _encode(obj, " " * indent, 0) + "\n"


def digest(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def complex_to_json(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def complex_list(values) -> list:
    return [complex_to_json(z) for z in np.ravel(values)]


def real_list(values) -> list:
    return [float(x) for x in np.ravel(values)]


# Instance documents


def instance_payload(value) -> tuple[str, dict]:
    if isinstance(value, PeriodicMatrixHat):
        return "matrix-hat", {
            "c_hat": real_list(value.c_hat),
            "b_hat": real_list(value.b_hat),
            "b_hat_n": complex_to_json(value.b_hat_n),
            "a_hat_n": complex_to_json(value.a_hat_n),
        }
    if isinstance(value, PeriodicMatrixGeneral):
        return "matrix-general", {
            "c": real_list(value.c),
            "b": complex_list(value.b),
            "a_n": complex_to_json(value.a_n),
        }
    if isinstance(value, SpectralData):
        return "spectral-data", {
            "lambda": complex_list(value.lambda_),
            "mu": real_list(value.mu),
            "beta": complex_to_json(value.beta),
        }
    raise TypeError(f"cannot serialize {type(value).__name__}")


def serialize_instance(inst: InstanceFile | object) -> str:
    if not isinstance(inst, InstanceFile):
        inst = InstanceFile(instance_payload(inst)[0], inst)
    kind, payload = instance_payload(inst.value)
    doc = {"kind": kind, "payload": payload}
    if inst.tol is not None:
        doc["tol"] = float(inst.tol)
    return canonical_json(doc)


def _number(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{path}: expected a number, got {type(x).__name__}")
    return float(x)


def _complex(x, path: str) -> complex:
    if isinstance(x, dict):
        extra = set(x) - {"re", "im"}
        if extra or "re" not in x or "im" not in x:
            raise ParseError(f"{path}: complex numbers are {{\"re\": ..., \"im\": ...}} objects")
        return complex(_number(x["re"], path + ".re"), _number(x["im"], path + ".im"))
    return complex(_number(x, path))


def _array(x, path: str, item) -> list:
    if not isinstance(x, list):
        raise ParseError(f"{path}: expected an array")
    return [item(v, f"{path}[{i}]") for i, v in enumerate(x)]


def _build(kind: str, payload: dict):
    if kind == "matrix-general":
        m = PeriodicMatrixGeneral(
            c=_array(payload["c"], "payload.c", _number),
            b=_array(payload["b"], "payload.b", _complex),
            a_n=_complex(payload["a_n"], "payload.a_n"),
        )
        validate(m)
        return m
    if kind == "matrix-hat":
        m = PeriodicMatrixHat(
            c_hat=_array(payload["c_hat"], "payload.c_hat", _number),
            b_hat=_array(payload["b_hat"], "payload.b_hat", _number),
            b_hat_n=_complex(payload["b_hat_n"], "payload.b_hat_n"),
            a_hat_n=_complex(payload["a_hat_n"], "payload.a_hat_n"),
        )
        validate(m)
        return m
    return SpectralData(
        lambda_=_array(payload["lambda"], "payload.lambda", _complex),
        mu=_array(payload["mu"], "payload.mu", _number),
        beta=_complex(payload["beta"], "payload.beta"),
    )


def parse_instance(text: str) -> InstanceFile:
    """Parse and validate an instance document.

    Syntax errors become ParseError with line and column; structural errors
    name the offending field path. Invalid matrices and data keep their
    own exception types, with the field prefixed by ``payload.``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    unknown = set(doc) - {"kind", "payload", "tol"}
    if unknown:
        raise ParseError(f"unknown top-level field(s): {', '.join(sorted(unknown))}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ParseError(f"kind: expected one of {', '.join(KINDS)}, got {kind!r}")
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        raise ParseError("payload: expected an object")
    for name in _FIELDS[kind]:
        if name not in payload:
            raise ParseError(f"payload.{name}: missing")
    extra = set(payload) - set(_FIELDS[kind])
    if extra:
        raise ParseError(f"payload: unknown field(s) {', '.join(sorted(extra))}")
    tol = doc.get("tol")
    if tol is not None:
        tol = _number(tol, "tol")
        if not tol > 0:
            raise ParseError("tol: must be positive")
    try:
        value = _build(kind, payload)
    except InvalidMatrix as exc:
        raise InvalidMatrix(exc.reason, _prefixed(exc.field)) from None
    except InvalidData as exc:
        raise InvalidData(exc.reason, _prefixed(exc.field)) from None
    return InstanceFile(kind=kind, value=value, tol=tol)


def _prefixed(field):
    if field is None:
        return "payload"
    name = field.replace("lambda_", "lambda")
    return f"payload.{name}"
