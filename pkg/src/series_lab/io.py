"""Series documents (JSON) and run reports.

A series document looks like::

    {"center": [0, 0], "coeffs": [[1, 0], [0, 1]], "trunc_order": 8}
    {"center": [0, 0], "generator": {"name": "geometric", "params": {"r": 1}}}

Complex numbers are always ``[re, im]`` pairs.  When both ``coeffs`` and
``generator`` are present the literal coefficients win.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .core import DEFAULT_TRUNC_ORDER, Generator, catalog_lookup
from .errors import DomainError, ParseError, ValidationError
from .power_series import PowerSeries

DOC_KEYS = ("center", "coeffs", "generator", "trunc_order")
GEN_KEYS = ("name", "params")


@dataclass(frozen=True, eq=False)
class SeriesDocument:
    center: complex = 0j
    coeffs: tuple[complex, ...] | None = None
    generator: dict | None = None  # {"name": str, "params": {str: number}}
    trunc_order: int | None = None

    def to_series(self, default_order: int = DEFAULT_TRUNC_ORDER) -> PowerSeries:
        if self.coeffs is not None:
            arr = np.asarray(self.coeffs, dtype=np.complex128)
            if self.trunc_order is not None:
                arr = _fit(arr, self.trunc_order)
            return PowerSeries(arr, self.center)
        assert self.generator is not None
        gen = catalog_lookup(self.generator["name"], self.generator.get("params") or {})
        order = self.trunc_order if self.trunc_order is not None else default_order
        return PowerSeries.from_generator(gen, order, self.center)

    @classmethod
    def from_series(cls, f: PowerSeries) -> "SeriesDocument":
        gen = f.source.spec() if f.source is not None else None
        return cls(f.center, tuple(complex(c) for c in f.coeffs), gen, f.order)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"center": _pair(self.center)}
        if self.coeffs is not None:
            out["coeffs"] = [_pair(c) for c in self.coeffs]
        if self.generator is not None:
            out["generator"] = {
                "name": self.generator["name"],
                "params": {k: _num(v) for k, v in (self.generator.get("params") or {}).items()},
            }
        if self.trunc_order is not None:
            out["trunc_order"] = self.trunc_order
        return out


def _fit(arr: np.ndarray, order: int) -> np.ndarray:
    if len(arr) > order + 1:
        return arr[: order + 1]
    return np.concatenate([arr, np.zeros(order + 1 - len(arr), dtype=np.complex128)])


def _num(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def _pair(z) -> list:
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def canonical_json(obj, indent: int | None = None) -> str:
    """Sorted keys, shortest round-trip float repr, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=indent, allow_nan=False) + "\n"


# -- parsing ------------------------------------------------------------------------

def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _is_real(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _complex_field(value, name: str, text: str) -> complex:
    if not (isinstance(value, list) and len(value) == 2 and all(_is_real(v) for v in value)):
        raise ParseError(
            "expected a [re, im] pair of finite numbers", field=name, line=_line_of(text, name.split("[")[0])
        )
    return complex(value[0], value[1])


def parse_document(text: str) -> SeriesDocument:
    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", line=exc.lineno) from None
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if not isinstance(raw, dict):
        raise ParseError("a series document must be a JSON object", line=1)
    unknown = sorted(set(raw) - set(DOC_KEYS))
    if unknown:
        raise ValidationError("unknown key", field=unknown[0], line=_line_of(text, unknown[0]))

    center = _complex_field(raw["center"], "center", text) if "center" in raw else 0j

    coeffs = None
    if "coeffs" in raw:
        value = raw["coeffs"]
        if not isinstance(value, list):
            raise ParseError("coeffs must be a list of [re, im] pairs", field="coeffs", line=_line_of(text, "coeffs"))
        if not value:
            raise ValidationError("coeffs must not be empty", field="coeffs", line=_line_of(text, "coeffs"))
        coeffs = tuple(_complex_field(c, f"coeffs[{i}]", text) for i, c in enumerate(value))

    generator = None
    if "generator" in raw:
        generator = _parse_generator(raw["generator"], text)

    if coeffs is None and generator is None:
        raise ValidationError("document needs 'coeffs' or 'generator'", field="coeffs")

    trunc = raw.get("trunc_order")
    if "trunc_order" in raw and (isinstance(trunc, bool) or not isinstance(trunc, int) or trunc < 0):
        raise ValidationError(
            "trunc_order must be a non-negative integer", field="trunc_order", line=_line_of(text, "trunc_order")
        )
    return SeriesDocument(center, coeffs, generator, trunc)


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def _parse_generator(value, text: str) -> dict:
    line = _line_of(text, "generator")
    if not isinstance(value, dict):
        raise ParseError("generator must be an object", field="generator", line=line)
    unknown = sorted(set(value) - set(GEN_KEYS))
    if unknown:
        raise ValidationError("unknown key", field=f"generator.{unknown[0]}", line=_line_of(text, unknown[0]))
    name = value.get("name")
    if not isinstance(name, str):
        raise ValidationError("generator.name must be a string", field="generator.name", line=line)
    params = value.get("params", {})
    if not isinstance(params, dict) or not all(_is_real(v) for v in params.values()):
        raise ValidationError(
            "generator.params must map names to finite numbers", field="generator.params", line=line
        )
    # resolve now so unknown names and bad parameters surface at parse time
    catalog_lookup(name, params)
    return {"name": name, "params": dict(params)}


def load_document(path) -> SeriesDocument:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc.strerror}") from None
    return parse_document(text)


def load_series(path, default_order: int = DEFAULT_TRUNC_ORDER) -> PowerSeries:
    return load_document(path).to_series(default_order)


def serialize_series(f: PowerSeries) -> str:
    return canonical_json(SeriesDocument.from_series(f).to_json())


def serialize_document(doc: SeriesDocument) -> str:
    return canonical_json(doc.to_json())


# -- run reports -----------------------------------------------------------------------

def digest(*parts: str | bytes) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode() if isinstance(part, str) else part)
        h.update(b"\0")
    return h.hexdigest()


@dataclass
class RunReport:
    operation: str
    inputs_digest: str
    seed: int
    config: dict
    outputs: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "operation": self.operation,
            "inputs_digest": self.inputs_digest,
            "seed": self.seed,
            "config": self.config,
            "outputs": _jsonable(self.outputs),
            "verdicts": _jsonable(self.verdicts),
        }

    def dumps(self) -> str:
        return canonical_json(self.to_json(), indent=2)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (complex, np.complexfloating)):
        return _pair(x)
    if isinstance(x, (np.integer, np.floating)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def load_generator_spec(spec: str) -> Generator:
    """``"geometric:r=0.5"`` or ``"exponential"`` to a catalog generator."""
    name, _, rest = spec.partition(":")
    params: dict[str, float] = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise ParseError(f"bad generator parameter '{item}', expected key=value", field=key)
        try:
            num = float(value)
        except ValueError:
            raise ParseError(f"parameter '{key}' is not a number: {value!r}", field=key) from None
        if not math.isfinite(num):
            raise DomainError(f"parameter '{key}' must be finite")
        params[key.strip()] = int(num) if num.is_integer() else num
    return catalog_lookup(name.strip(), params)
