"""Versioned JSON format for witness triples, plus report serialization."""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import DocumentError, WitnessError
from .matcore import Density2, Hermitian2, MixedState, PureState
from .witness import Observable, WitnessTriple

SCHEMA_VERSION = 1
#: Pure-state amplitudes off unit norm by less than this are renormalized on load.
RENORMALIZE_TOL = 1e-2

_MATRIX_KEYS = ("a11", "a22", "a12_re", "a12_im")
_PURE_KEYS = ("alpha_re", "alpha_im", "beta_re", "beta_im")
_MIXED_KEYS = ("rho11", "rho22", "rho12_re", "rho12_im")


def _matrix_doc(m: Hermitian2) -> dict:
    return {"a11": m.a11, "a22": m.a22, "a12_re": m.a12.real, "a12_im": m.a12.imag}


def _state_doc(s) -> dict:
    if isinstance(s, PureState):
        return {
            "kind": "pure",
            "alpha_re": s.alpha.real,
            "alpha_im": s.alpha.imag,
            "beta_re": s.beta.real,
            "beta_im": s.beta.imag,
        }
    h = s.rho.h
    return {"kind": "mixed", "rho11": h.a11, "rho22": h.a22, "rho12_re": h.a12.real, "rho12_im": h.a12.imag}


def triple_to_document(t: WitnessTriple, metadata: dict | None = None) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "A": _matrix_doc(t.A.m),
        "B": _matrix_doc(t.B.m),
        "state": _state_doc(t.state),
        "metadata": dict(metadata or {}),
    }


def _number(section: dict, key: str, where: str) -> float:
    if key not in section:
        raise DocumentError("missing field", f"{where}.{key}")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DocumentError(f"expected a number, got {value!r}", f"{where}.{key}")
    value = float(value)
    if not math.isfinite(value):
        raise DocumentError("non-finite number", f"{where}.{key}")
    return value


def _section(doc: dict, key: str) -> dict:
    if key not in doc:
        raise DocumentError("missing section", key)
    if not isinstance(doc[key], dict):
        raise DocumentError("expected an object", key)
    return doc[key]


def _extra(section: dict, known, prefix: str) -> dict:
    return {f"{prefix}{k}": v for k, v in section.items() if k not in known}


def document_to_triple(doc: Any) -> tuple[WitnessTriple, dict]:
    """Validate a parsed document; returns (triple, metadata).

    Unknown fields are kept under ``metadata["unknown_fields"]``.
    """
    if not isinstance(doc, dict):
        raise DocumentError("top level must be an object", "document")
    if "version" not in doc:
        raise DocumentError("missing field", "version")
    if doc["version"] != SCHEMA_VERSION:
        raise DocumentError(f"unsupported version {doc['version']!r} (expected {SCHEMA_VERSION})", "version")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise DocumentError("expected an object", "metadata")
    metadata = dict(metadata)
    unknown = _extra(doc, ("version", "A", "B", "state", "metadata"), "")

    mats = {}
    for name in ("A", "B"):
        sec = _section(doc, name)
        vals = [_number(sec, k, name) for k in _MATRIX_KEYS]
        try:
            mats[name] = Hermitian2(vals[0], vals[1], complex(vals[2], vals[3]))
        except WitnessError as exc:
            raise DocumentError(str(exc), name) from None
        unknown.update(_extra(sec, _MATRIX_KEYS, f"{name}."))

    sec = _section(doc, "state")
    kind = sec.get("kind")
    try:
        if kind == "pure":
            ar, ai, br, bi = (_number(sec, k, "state") for k in _PURE_KEYS)
            alpha, beta = complex(ar, ai), complex(br, bi)
            norm = math.hypot(abs(alpha), abs(beta))
            if abs(norm * norm - 1.0) > 1e-12:
                if abs(norm - 1.0) > RENORMALIZE_TOL:
                    raise DocumentError(f"state norm {norm!r} is not 1", "state")
                metadata["state_renormalized_from_norm"] = norm
                alpha, beta = alpha / norm, beta / norm
            state = PureState(alpha, beta)
            unknown.update(_extra(sec, ("kind",) + _PURE_KEYS, "state."))
        elif kind == "mixed":
            r11, r22, rr, ri = (_number(sec, k, "state") for k in _MIXED_KEYS)
            state = MixedState(Density2(Hermitian2(r11, r22, complex(rr, ri))))
            unknown.update(_extra(sec, ("kind",) + _MIXED_KEYS, "state."))
        else:
            raise DocumentError(f"kind must be 'pure' or 'mixed', got {kind!r}", "state.kind")
    except DocumentError:
        raise
    except WitnessError as exc:
        raise DocumentError(str(exc), "state") from None

    if unknown:
        metadata.setdefault("unknown_fields", {}).update(unknown)
    return WitnessTriple(Observable(mats["A"], "A"), Observable(mats["B"], "B"), state), metadata


def dumps_document(doc: dict) -> str:
    """Full-precision JSON (floats via repr) so documents round-trip exactly."""
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def loads_triple(text: str) -> tuple[WitnessTriple, dict]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return document_to_triple(doc)


def load_triple(path) -> tuple[WitnessTriple, dict]:
    """Read a triple document, falling back to the bundled fixtures by file name."""
    p = Path(path)
    if not p.exists():
        bundled = resources.files("qwitness") / "data" / p.name
        if p.parent == Path(".") and bundled.is_file():
            return loads_triple(bundled.read_text())
    try:
        text = p.read_text()
    except OSError as exc:
        raise DocumentError(exc.strerror or str(exc), str(path)) from None
    return loads_triple(text)


def golden_triple() -> WitnessTriple:
    """The bundled ``eq15.json`` reference triple."""
    return load_triple("eq15.json")[0]


# -- reports -----------------------------------------------------------------


def report_value(x):
    """Round floats to 12 significant digits; non-finite values become strings."""
    if isinstance(x, bool) or x is None or isinstance(x, (str, int)):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(f"{x:.12g}")
    if isinstance(x, complex):
        return {"re": report_value(x.real), "im": report_value(x.imag)}
    if isinstance(x, dict):
        return {str(k): report_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [report_value(v) for v in x]
    if hasattr(x, "item"):  # numpy scalar
        return report_value(x.item())
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps_report(obj) -> str:
    return json.dumps(report_value(obj), indent=2) + "\n"
