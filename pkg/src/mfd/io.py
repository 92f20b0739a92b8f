"""Reading and writing the ``mfd/1`` JSON container.

A document is ``{"format": "mfd/1", "type": ..., "crc32": ..., "payload": ...}``.
Arrays are stored with their dtype, shape and row-major data; complex
entries become ``[re, im]`` pairs.  Floats are written with ``repr`` so a
save/load cycle is bit-exact.  The CRC-32 covers the canonical
(sorted-key, compact) serialization of the payload.
"""
import dataclasses
import json
import zlib

import numpy as np

from .domain import SimplicialDomain
from .errors import FormatError, IntegrityError, SchemaError
from .field import (
    DiagonalFrameField,
    EdgeTransport,
    Generator,
    GeneratorField,
    ResidualReport,
    TriangleFill,
)
from .homotopy import HomotopyPath
from .matching import MatchingPlan
from .obstruction import ObstructionReport

FORMAT = "mfd/1"
REPORT_MARKER = "\n---\n"

_TYPES = {
    "domain": SimplicialDomain,
    "generator": Generator,
    "field": GeneratorField,
    "transport": EdgeTransport,
    "fill": TriangleFill,
    "frames": DiagonalFrameField,
    "plan": MatchingPlan,
    "obstruction": ObstructionReport,
    "residual": ResidualReport,
    "homotopy": HomotopyPath,
}
_NAMES = {cls: name for name, cls in _TYPES.items()}


def _float(x):
    x = float(x)
    if np.isfinite(x):
        return x
    return {"__float__": "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")}


def _array(a):
    a = np.ascontiguousarray(a)
    if np.iscomplexobj(a):
        kind = "complex"
        flat = [[_float(z.real), _float(z.imag)] for z in a.ravel()]
    elif a.dtype == bool:
        kind = "bool"
        flat = [bool(x) for x in a.ravel()]
    elif np.issubdtype(a.dtype, np.integer):
        kind = "int"
        flat = [int(x) for x in a.ravel()]
    elif np.issubdtype(a.dtype, np.floating):
        kind = "float"
        flat = [_float(x) for x in a.ravel()]
    else:
        raise SchemaError(f"cannot store arrays of dtype {a.dtype}")
    return {"__array__": {"dtype": kind, "shape": list(a.shape), "data": flat}}


def encode(obj):
    """Turn supported objects into JSON-compatible structures."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, np.bool_):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"__complex__": [_float(obj.real), _float(obj.imag)]}
    if isinstance(obj, np.ndarray):
        return _array(obj)
    if isinstance(obj, tuple):
        return {"__tuple__": [encode(x) for x in obj]}
    if isinstance(obj, list):
        return [encode(x) for x in obj]
    if isinstance(obj, dict):
        if all(isinstance(k, str) for k in obj):
            return {"__dict__": {k: encode(v) for k, v in obj.items()}}
        return {"__items__": [[encode(k), encode(v)] for k, v in obj.items()]}
    name = _NAMES.get(type(obj))
    if name is None:
        raise SchemaError(f"cannot store objects of type {type(obj).__name__}")
    fields = {f.name: encode(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    return {"__obj__": name, "fields": fields}


_DTYPES = {"complex": complex, "float": float, "int": np.int64, "bool": bool}


def _unfloat(x):
    if isinstance(x, dict):
        return float(x["__float__"])
    return float(x)


def decode(x):
    """Inverse of :func:`encode`; raises ``SchemaError`` on malformed input."""
    try:
        return _decode(x)
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        raise SchemaError(f"malformed payload: {exc}") from exc


def _decode(x):
    if isinstance(x, list):
        return [_decode(v) for v in x]
    if not isinstance(x, dict):
        return x
    if "__array__" in x:
        spec = x["__array__"]
        kind = spec["dtype"]
        shape = tuple(int(s) for s in spec["shape"])
        data = spec["data"]
        if kind == "complex":
            vals = [complex(_unfloat(re), _unfloat(im)) for re, im in data]
        elif kind == "float":
            vals = [_unfloat(v) for v in data]
        else:
            vals = data
        arr = np.array(vals, dtype=_DTYPES[kind])
        if arr.size != int(np.prod(shape, dtype=np.int64)):
            raise SchemaError("array data does not match its shape")
        return arr.reshape(shape)
    if "__float__" in x:
        return _unfloat(x)
    if "__complex__" in x:
        re, im = x["__complex__"]
        return complex(_unfloat(re), _unfloat(im))
    if "__tuple__" in x:
        return tuple(_decode(v) for v in x["__tuple__"])
    if "__dict__" in x:
        return {k: _decode(v) for k, v in x["__dict__"].items()}
    if "__items__" in x:
        return {_hashable(_decode(k)): _decode(v) for k, v in x["__items__"]}
    if "__obj__" in x:
        cls = _TYPES.get(x["__obj__"])
        if cls is None:
            raise SchemaError(f"unknown object type {x['__obj__']!r}")
        return cls(**{k: _decode(v) for k, v in x["fields"].items()})
    raise SchemaError("untagged object in payload")


def _hashable(k):
    return tuple(k) if isinstance(k, list) else k


def _canonical(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def dumps(obj):
    """Serialize a supported object to an ``mfd/1`` document string."""
    payload = encode(obj)
    kind = payload["__obj__"] if isinstance(payload, dict) and "__obj__" in payload else "data"
    crc = zlib.crc32(_canonical(payload).encode("utf-8"))
    doc = {"format": FORMAT, "type": kind, "crc32": crc, "payload": payload}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def _extract_json(text):
    """Accept a bare document or a report with a text summary above ``---``."""
    if text.lstrip().startswith("{"):
        return text
    k = text.rfind(REPORT_MARKER)
    if k < 0:
        raise FormatError("no mfd/1 document found")
    return text[k + len(REPORT_MARKER):]


def loads(text, expect=None):
    """Parse an ``mfd/1`` document.

    Raises ``FormatError`` for invalid JSON or a wrong version tag,
    ``IntegrityError`` for a CRC mismatch and ``SchemaError`` for a payload
    that does not decode or has an unexpected type.
    """
    try:
        doc = json.loads(_extract_json(text))
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise FormatError(f"expected format {FORMAT!r}")
    for key in ("type", "crc32", "payload"):
        if key not in doc:
            raise FormatError(f"missing field {key!r}")
    if zlib.crc32(_canonical(doc["payload"]).encode("utf-8")) != doc["crc32"]:
        raise IntegrityError("CRC-32 mismatch")
    if expect is not None and doc["type"] not in _as_tuple(expect):
        raise SchemaError(f"expected a {expect!r} document, found {doc['type']!r}")
    return decode(doc["payload"])


def _as_tuple(x):
    return (x,) if isinstance(x, str) else tuple(x)


def save(path, obj, summary=None):
    """Write ``obj``; with ``summary`` the file is a text report followed by
    ``---`` and the document."""
    text = dumps(obj)
    if summary is not None:
        text = summary.rstrip("\n") + REPORT_MARKER + text
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load(path, expect=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path} is not UTF-8") from exc
    return loads(text, expect)


def check_compatible(fld, frames):
    """Raise ``SchemaError`` unless the frames fit the field."""
    if frames.frames.shape[0] != fld.domain.n_vertices:
        raise SchemaError("frames and field have different vertex counts")
    if frames.n != fld.n:
        raise SchemaError(f"frames have n = {frames.n}, field has n = {fld.n}")
    if frames.labels.shape[-1] != fld.g:
        raise SchemaError("frames and field have different generator counts")
