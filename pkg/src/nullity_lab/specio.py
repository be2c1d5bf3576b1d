"""Immersion spec files and deterministic report serialization."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import SpecError
from .immersion import Chart, Monomial, ParametricImmersion


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _complex(value, where: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        return complex(value[0], value[1])
    raise SpecError(f"{where}: expected [re, im], got {value!r}")


def immersion_to_dict(imm: ParametricImmersion) -> dict:
    radii = imm.chart.radii
    radius = float(radii[0]) if np.all(radii == radii[0]) else [float(r) for r in radii]
    return {
        "name": imm.name,
        "domain": {
            "dim": imm.domain_dim,
            "center": [_pair(c) for c in imm.chart.center],
            "radius": radius,
        },
        "components": [[{"coeff": _pair(t.coeff), "powers": list(t.powers)} for t in comp]
                       for comp in imm.components],
        "conjugate_output": bool(imm.conjugate_output),
        "translation": [_pair(t) for t in imm.translation],
    }


def immersion_from_dict(data) -> ParametricImmersion:
    if not isinstance(data, dict):
        raise SpecError("spec must be a JSON object")
    try:
        dom = data["domain"]
        m = dom["dim"]
        if not isinstance(m, int) or m < 1:
            raise SpecError(f"domain.dim must be a positive integer, got {m!r}")
        center = [_complex(c, "domain.center") for c in dom["center"]]
        if len(center) != m:
            raise SpecError(f"domain.center has {len(center)} entries for dim {m}")
        radius = dom["radius"]
        comps = []
        for i, comp in enumerate(data["components"]):
            terms = []
            for t in comp:
                powers = t["powers"]
                if not (isinstance(powers, list) and all(isinstance(e, int) for e in powers)):
                    raise SpecError(f"components[{i}]: powers must be a list of integers")
                terms.append(Monomial(_complex(t["coeff"], f"components[{i}].coeff"), tuple(powers)))
            comps.append(tuple(terms))
        translation = data.get("translation")
        if translation is not None:
            translation = [_complex(t, "translation") for t in translation]
        return ParametricImmersion(
            str(data.get("name", "unnamed")),
            Chart(np.array(center, dtype=np.complex128), radius),
            tuple(comps),
            bool(data.get("conjugate_output", False)),
            translation,
        )
    except KeyError as exc:
        raise SpecError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(str(exc)) from None


def load_spec(path) -> ParametricImmersion:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return immersion_from_dict(data)


def dump_spec(imm: ParametricImmersion) -> str:
    return json.dumps(immersion_to_dict(imm), indent=2) + "\n"


def to_jsonable(obj):
    """Plain JSON types; complex numbers become ``[re, im]``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return _pair(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dump_report(report) -> str:
    return json.dumps(to_jsonable(report), indent=2) + "\n"
