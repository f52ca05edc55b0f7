"""JSON model-file schema: load and save AffineControlSystem values.

Schema:

    {
      "state":     ["v_x", ...],
      "inputs":    ["wm_x", ...],
      "constants": ["g"],
      "drift":     ["expr", ...],
      "fields":    [["expr", ...], ...],      one inner list per input
      "outputs":   {"name": "expr", ...},
      "constraints": [
        {"kind": "zero_state" | "const_state" | "zero_affine" | "const_affine",
         "c0": "expr",
         "input_terms": [{"input": "wm_x", "coeff": "expr"}, ...],
         "solve_for": "wm_x",            optional
         "d_name": "d_x"}                optional, const kinds only
      ]
    }

Expression strings use the grammar of noct.expr.parse.
"""

from __future__ import annotations

import json
from pathlib import Path

from .expr import ParseError, parse, to_string
from .system import AffineControlSystem, Constraint, ConstraintKind, validate


class ModelFileError(Exception):
    """Malformed model file (bad JSON, bad schema, or invalid system)."""


def _parse_expr(text, where: str):
    if not isinstance(text, str):
        raise ModelFileError(f"{where}: expected an expression string, got {type(text).__name__}")
    try:
        return parse(text)
    except ParseError as e:
        raise ModelFileError(f"{where}: {e}") from None


def _names(value, where: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise ModelFileError(f"{where}: expected a list of names")
    return tuple(value)


def system_from_dict(doc: dict) -> AffineControlSystem:
    if not isinstance(doc, dict):
        raise ModelFileError("model document must be a JSON object")
    state = _names(doc.get("state", []), "state")
    inputs = _names(doc.get("inputs", []), "inputs")
    constants = _names(doc.get("constants", []), "constants")

    drift_raw = doc.get("drift", [])
    if not isinstance(drift_raw, list):
        raise ModelFileError("drift: expected a list of expression strings")
    drift = tuple(_parse_expr(e, f"drift[{k}]") for k, e in enumerate(drift_raw))

    fields_raw = doc.get("fields", [])
    if not isinstance(fields_raw, list):
        raise ModelFileError("fields: expected a list of lists")
    fields = []
    for i, vec in enumerate(fields_raw):
        if not isinstance(vec, list):
            raise ModelFileError(f"fields[{i}]: expected a list of expression strings")
        fields.append(tuple(_parse_expr(e, f"fields[{i}][{k}]") for k, e in enumerate(vec)))

    outputs_raw = doc.get("outputs", {})
    if not isinstance(outputs_raw, dict):
        raise ModelFileError("outputs: expected an object of name -> expression")
    outputs = tuple((name, _parse_expr(e, f"outputs[{name}]"))
                    for name, e in outputs_raw.items())

    constraints = []
    for ci, cdoc in enumerate(doc.get("constraints", [])):
        if not isinstance(cdoc, dict):
            raise ModelFileError(f"constraints[{ci}]: expected an object")
        kind_str = cdoc.get("kind")
        try:
            kind = ConstraintKind(kind_str)
        except ValueError:
            raise ModelFileError(
                f"constraints[{ci}]: unknown kind {kind_str!r}") from None
        terms = []
        for ti, tdoc in enumerate(cdoc.get("input_terms", [])):
            if not isinstance(tdoc, dict) or "input" not in tdoc or "coeff" not in tdoc:
                raise ModelFileError(
                    f"constraints[{ci}].input_terms[{ti}]: expected "
                    "{{\"input\": name, \"coeff\": expr}}")
            terms.append((tdoc["input"],
                          _parse_expr(tdoc["coeff"], f"constraints[{ci}].input_terms[{ti}]")))
        constraints.append(Constraint(
            kind=kind,
            c0=_parse_expr(cdoc.get("c0", "0"), f"constraints[{ci}].c0"),
            input_terms=tuple(terms),
            solve_for=cdoc.get("solve_for"),
            d_name=cdoc.get("d_name"),
        ))

    return AffineControlSystem(
        state=state, inputs=inputs, constants=constants,
        drift=drift, input_fields=tuple(fields), outputs=outputs,
        constraints=tuple(constraints),
    )


def system_to_dict(sys: AffineControlSystem) -> dict:
    doc: dict = {
        "state": list(sys.state),
        "inputs": list(sys.inputs),
        "constants": list(sys.constants),
        "drift": [to_string(e) for e in sys.drift],
        "fields": [[to_string(e) for e in f] for f in sys.input_fields],
        "outputs": {name: to_string(e) for name, e in sys.outputs},
        "constraints": [],
    }
    for con in sys.constraints:
        cdoc: dict = {
            "kind": con.kind.value,
            "c0": to_string(con.c0),
            "input_terms": [{"input": u, "coeff": to_string(c)}
                            for u, c in con.input_terms],
        }
        if con.solve_for is not None:
            cdoc["solve_for"] = con.solve_for
        if con.d_name is not None:
            cdoc["d_name"] = con.d_name
        doc["constraints"].append(cdoc)
    return doc


def load_model(path: str | Path, check: bool = True) -> AffineControlSystem:
    """Load and (by default) validate a model file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ModelFileError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ModelFileError(f"{path}: invalid JSON: {e}") from None
    sys = system_from_dict(doc)
    if check:
        diags = validate(sys)
        if diags:
            raise ModelFileError(f"{path}: invalid model: " + "; ".join(diags))
    return sys


def save_model(sys: AffineControlSystem, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_dict(sys), fh, indent=2)
        fh.write("\n")


def dumps_model(sys: AffineControlSystem) -> str:
    return json.dumps(system_to_dict(sys), indent=2) + "\n"
