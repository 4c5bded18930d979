"""JSON documents: model specs, ground truths, range tables, fitted models."""
from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .dataset import atomic_write
from .errors import AmdahlError, InputError
from .features import FeatureTerm, ModelSpec, standard_terms
from .model_core import FractionSet, ResourceSchema, ResourceVector
from .regression import FittedModel, Scaler
from .synthetic import GroundTruth, RangeTable

MODEL_FORMAT = "amdahl-model/1"
BUILTIN_PREFIX = "builtin:"
BUILTINS = {
    "example-spec": "example_spec.json",
    "e1-ranges": "e1_ranges.json",
    "default-truth": "default_truth.json",
}
_RESERVED = {"label", "fraction", "exponents"}


def resolve_path(path) -> Path:
    """Map ``builtin:<name>`` to a bundled file; other paths pass through."""
    text = str(path)
    if text.startswith(BUILTIN_PREFIX):
        name = text[len(BUILTIN_PREFIX):]
        if name not in BUILTINS:
            raise InputError(f"unknown bundled file {name!r}; choose from {', '.join(sorted(BUILTINS))}")
        return Path(str(resources.files("amdahl_learn") / "data" / BUILTINS[name]))
    return Path(path)


def read_json(path) -> Any:
    path = resolve_path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read file: {exc.strerror}", path) from None
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def dumps(doc: Any) -> str:
    """Deterministic JSON text; floats use shortest round-trip repr."""
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_json(path, doc: Any):
    atomic_write(path, dumps(doc))


# -- terms and specs ---------------------------------------------------------

def term_to_dict(term: FeatureTerm) -> dict:
    return {"exponents": term.as_dict(), "label": term.label}


def term_from_obj(obj, source=None) -> tuple[FeatureTerm, float | None]:
    if not isinstance(obj, dict):
        raise InputError(f"a term must be a JSON object, got {obj!r}", source)
    if "exponents" in obj:
        exps, label = obj["exponents"], obj.get("label", "")
        if not isinstance(exps, dict):
            raise InputError(f"term exponents must be an object, got {exps!r}", source)
    else:
        exps = {k: v for k, v in obj.items() if k not in _RESERVED}
        label = obj.get("label", "")
    try:
        term = FeatureTerm(tuple(exps.items()), str(label or ""))
    except AmdahlError as exc:
        raise InputError(f"term {obj!r}: {exc}", source) from None
    fraction = obj.get("fraction")
    return term, (None if fraction is None else float(fraction))


def _schema_from(doc, source) -> ResourceSchema:
    names = doc.get("resources")
    if not isinstance(names, list):
        raise InputError("'resources' must be a list of resource names", source)
    reserved = [n for n in names if n in _RESERVED or n == "score"]
    if reserved:
        raise InputError(f"reserved resource name(s): {', '.join(reserved)}", source)
    try:
        return ResourceSchema(tuple(names))
    except AmdahlError as exc:
        raise InputError(str(exc), source) from None


def _baseline_from(schema, obj, source):
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise InputError("'baseline' must map resource names to values", source)
    try:
        return ResourceVector.from_mapping(schema, {k: float(v) for k, v in obj.items()})
    except (AmdahlError, TypeError, ValueError) as exc:
        raise InputError(f"baseline: {exc}", source) from None


def spec_from_dict(doc, source=None) -> tuple[ModelSpec, dict]:
    """Parse a spec document; also returns per-term fractions when present."""
    if not isinstance(doc, dict):
        raise InputError("a model spec must be a JSON object", source)
    schema = _schema_from(doc, source)
    pairwise = doc.get("include_pairwise", False)
    singles = doc.get("include_singles", pairwise)
    if not isinstance(pairwise, bool) or not isinstance(singles, bool):
        raise InputError("include_pairwise/include_singles must be true or false", source)
    raw_terms = doc.get("terms", [])
    if not isinstance(raw_terms, list):
        raise InputError("'terms' must be a list", source)
    parsed = [term_from_obj(t, source) for t in raw_terms]
    fractions = {t: f for t, f in parsed if f is not None}
    explicit = [t for t, _ in parsed]
    seen = set()
    for t in explicit:
        if t in seen:
            raise InputError(f"duplicate term {t.label!r}", source)
        seen.add(t)
    try:
        if singles or pairwise:
            terms = standard_terms(schema, include_pairwise=pairwise, extra=explicit)
            if not singles:
                single_set = set(standard_terms(schema))
                terms = [t for t in terms if t not in single_set or t in seen]
        else:
            terms = [t.validate(schema) for t in explicit]
        if not terms:
            raise InputError("model spec has no terms", source)
        spec = ModelSpec(schema, tuple(terms), _baseline_from(schema, doc.get("baseline"), source),
                         label=str(doc.get("label", "")))
    except InputError:
        raise
    except AmdahlError as exc:
        raise InputError(str(exc), source) from None
    return spec, fractions


def load_model_spec(path) -> ModelSpec:
    return spec_from_dict(read_json(path), resolve_path(path))[0]


def spec_to_dict(spec: ModelSpec, fractions: FractionSet | None = None) -> dict:
    doc: dict[str, Any] = {}
    if spec.label:
        doc["label"] = spec.label
    doc["resources"] = list(spec.schema.names)
    terms = []
    for t in spec.terms:
        item = term_to_dict(t)
        if fractions is not None:
            item["fraction"] = fractions.per_term[t]
        terms.append(item)
    doc["terms"] = terms
    if spec.baseline is not None:
        doc["baseline"] = spec.baseline.as_dict()
    return doc


# -- ground truth ------------------------------------------------------------

def truth_to_dict(truth: GroundTruth) -> dict:
    doc = spec_to_dict(truth.spec, truth.fractions)
    doc["serial"] = truth.fractions.serial
    doc["baseline_perf"] = truth.baseline_perf
    return doc


def truth_from_dict(doc, source=None, default_baseline: ResourceVector | None = None) -> GroundTruth:
    spec, fractions = spec_from_dict(doc, source)
    missing = [t.label for t in spec.terms if t not in fractions]
    if missing:
        raise InputError(f"ground truth lacks a 'fraction' for term(s): {', '.join(missing)}", source)
    if spec.baseline is None:
        if default_baseline is None:
            raise InputError("ground truth needs a 'baseline'", source)
        spec = spec.with_baseline(ResourceVector.from_mapping(
            spec.schema, {n: default_baseline.as_dict()[n] for n in spec.schema.names}))
    try:
        serial = doc.get("serial")
        if serial is None:
            serial = 1.0 - math.fsum(fractions.values())
        return GroundTruth(spec, FractionSet(float(serial), fractions), float(doc.get("baseline_perf", 1.0)))
    except (AmdahlError, TypeError, ValueError) as exc:
        raise InputError(f"invalid ground truth: {exc}", source) from None


def load_truth(path, default_baseline=None) -> GroundTruth:
    return truth_from_dict(read_json(path), resolve_path(path), default_baseline)


# -- ranges ------------------------------------------------------------------

def ranges_from_dict(doc, source=None) -> RangeTable:
    if isinstance(doc, dict) and "resources" in doc:
        doc = doc["resources"]
    if not isinstance(doc, dict) or not doc:
        raise InputError("ranges must map resource names to {levels} or {min, max, step}", source)
    try:
        return RangeTable.from_spec(doc)
    except (AmdahlError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid ranges: {exc!r}" if isinstance(exc, KeyError) else f"invalid ranges: {exc}",
                         source) from None


def load_ranges(path) -> RangeTable:
    return ranges_from_dict(read_json(path), resolve_path(path))


# -- fitted models -----------------------------------------------------------

def model_to_dict(model: FittedModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "label": model.spec.label,
        "resources": list(model.spec.schema.names),
        "terms": [term_to_dict(t) for t in model.spec.terms],
        "baseline": model.spec.baseline.as_dict(),
        "coefficients_raw": [float(a) for a in model.coefficients_raw],
        "coefficients_scaled": [float(b) for b in model.coefficients_scaled],
        "scaler": {
            "mean": [float(m) for m in model.scaler.mean],
            "std": [float(s) for s in model.scaler.std],
            "degenerate": [bool(d) for d in model.scaler.degenerate],
            "n": int(model.scaler.n),
        },
        "rank": int(model.rank),
        "condition": _finite_or_none(model.condition),
        "training_mape_pct": float(model.training_mape),
        "diagnostics": list(model.diagnostics),
    }


def model_from_dict(doc, source=None) -> FittedModel:
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        found = doc.get("format") if isinstance(doc, dict) else None
        raise InputError(f"not a {MODEL_FORMAT} document (format={found!r})", source)
    try:
        schema = _schema_from(doc, source)
        terms = tuple(term_from_obj(t, source)[0] for t in doc["terms"])
        spec = ModelSpec(schema, terms, _baseline_from(schema, doc["baseline"], source),
                         label=str(doc.get("label", "")))
        sc = doc["scaler"]
        scaler = Scaler(np.array(sc["mean"], dtype=float), np.array(sc["std"], dtype=float),
                        np.array(sc["degenerate"], dtype=bool), int(sc["n"]))
        raw = np.array(doc["coefficients_raw"], dtype=float)
        scaled = np.array(doc["coefficients_scaled"], dtype=float)
        if raw.shape != (len(terms) + 1,) or scaled.shape != raw.shape:
            raise InputError(f"expected {len(terms) + 1} coefficients", source)
        condition = doc.get("condition")
        return FittedModel(spec=spec, coefficients_raw=raw, coefficients_scaled=scaled, scaler=scaler,
                           rank=int(doc["rank"]), condition=float("inf") if condition is None else float(condition),
                           training_mape=float(doc["training_mape_pct"]),
                           diagnostics=tuple(doc.get("diagnostics", ())))
    except InputError:
        raise
    except (AmdahlError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed model document: {exc!r}", source) from None


def save_model(path, model: FittedModel):
    write_json(path, model_to_dict(model))


def load_model(path) -> FittedModel:
    return model_from_dict(read_json(path), resolve_path(path))
