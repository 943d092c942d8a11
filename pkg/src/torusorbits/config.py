"""JSON serialization for fields, matrices, forms, and torus paths.

Rationals travel as "p/q" strings (or bare integer strings) so coefficient
vectors roundtrip bit-exactly.  Matrix entries are coefficient vectors in
the field's power basis, row major.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .decomp import MatrixK
from .errors import ValidationError
from .numfield import FieldElement, NumberField, create_field


def rat_to_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def rat_from_str(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        return Fraction(s)
    raise ValidationError(f"expected a rational string, got {s!r}")


def elem_to_list(x: FieldElement):
    return [rat_to_str(c) for c in x.coeffs]


def elem_from_list(field: NumberField, data) -> FieldElement:
    return field.element([rat_from_str(c) for c in data])


def field_to_dict(field: NumberField) -> dict:
    out = {
        "label": field.label,
        "min_poly": [rat_to_str(c) for c in field.min_poly],
        "units": [elem_to_list(u) for u in field.units],
    }
    if field.cm_structure is not None:
        cm = field.cm_structure
        out["cm"] = {
            "subfield_poly": [rat_to_str(c) for c in cm.subfield_poly],
            "subfield_gen": elem_to_list(cm.subfield_gen),
            "d": elem_to_list(cm.d),
            "relative_gen": elem_to_list(cm.relative_gen),
        }
    return out


def field_from_dict(data: dict) -> NumberField:
    try:
        min_poly = [rat_from_str(c) for c in data["min_poly"]]
        units = [[rat_from_str(c) for c in u] for u in data.get("units", [])]
    except KeyError as exc:
        raise ValidationError(f"field config misses key {exc}")
    cm = None
    if "cm" in data and data["cm"] is not None:
        raw = data["cm"]
        cm = {
            "subfield_poly": [rat_from_str(c) for c in raw["subfield_poly"]],
            "subfield_gen": [rat_from_str(c) for c in raw["subfield_gen"]],
            "d": [rat_from_str(c) for c in raw["d"]],
            "relative_gen": [rat_from_str(c) for c in raw["relative_gen"]],
        }
    return create_field(min_poly, declared_units=units, cm_structure=cm,
                        label=data.get("label", ""))


def load_field(path) -> NumberField:
    with open(path, "r", encoding="utf-8") as fh:
        return field_from_dict(json.load(fh))


def save_field(field: NumberField, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(field_to_dict(field), fh, indent=2, sort_keys=True)
        fh.write("\n")


def matrix_to_dict(m: MatrixK) -> dict:
    out = {
        "n": m.n,
        "rows": [[elem_to_list(x) for x in row] for row in m.rows],
    }
    d = m.det()
    out["det"] = elem_to_list(d)
    return out


def matrix_from_dict(field: NumberField, data: dict) -> MatrixK:
    if isinstance(data, str) and data == "id":
        raise ValidationError("pass the size for the identity shorthand")
    rows = [[elem_from_list(field, x) for x in row] for row in data["rows"]]
    m = MatrixK(field, rows)
    if "det" in data:
        declared = elem_from_list(field, data["det"])
        if m.det() != declared:
            raise ValidationError("declared determinant does not match")
    return m


def load_matrix(field: NumberField, path) -> MatrixK:
    with open(path, "r", encoding="utf-8") as fh:
        return matrix_from_dict(field, json.load(fh))


def save_matrix(m: MatrixK, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_dict(m), fh, indent=2, sort_keys=True)
        fh.write("\n")


def form_to_dict(form) -> dict:
    return {
        "n": form.n,
        "m": form.m,
        "factors": [[elem_to_list(c) for c in place_factors_flat(form, v)]
                    for v in range(len(form.factors))],
        "scalars": [elem_to_list(s) for s in form.scalars],
    }


def place_factors_flat(form, v):
    return [c for factor in form.factors[v] for c in factor]


def form_from_dict(field: NumberField, data: dict) -> "DecomposableForm":
    from .forms import make_form
    n = data["n"]
    m = data["m"]
    factors = []
    for place_data in data["factors"]:
        flat = [elem_from_list(field, c) for c in place_data]
        if len(flat) != n * m:
            raise ValidationError("factor table has the wrong shape")
        factors.append([tuple(flat[i * n:(i + 1) * n]) for i in range(m)])
    scalars = None
    if data.get("scalars"):
        scalars = [elem_from_list(field, s) for s in data["scalars"]]
    return make_form(field, factors, scalars=scalars)


def load_form(field: NumberField, path):
    with open(path, "r", encoding="utf-8") as fh:
        return form_from_dict(field, json.load(fh))


def path_from_dict(data: dict) -> "TorusPath":
    from .dynamics import TorusPath
    bases = [rat_from_str(b) for b in data["bases"]]
    schedules = data["schedules"]
    return TorusPath(n=data["n"], bases=tuple(bases),
                     schedules=tuple(tuple(tuple(int(e) for e in step)
                                           for step in place)
                                     for place in schedules))


def load_path(path):
    with open(path, "r", encoding="utf-8") as fh:
        return path_from_dict(json.load(fh))
