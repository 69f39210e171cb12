"""JSON file formats.

Configuration: ``{"size": n, "colors": [[...], ...]}``.  Emitted files add
``fibers``, ``degrees``, ``transpose`` and ``blocks``; those keys are ignored
when reading.

Action: ``{"domain": n, "generators": [[...], ...]}``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from ccprime.core import CoherentConfig, ColorMatrix
from ccprime.errors import MalformedMatrix, NotBijection
from ccprime.orbitals import ActionSpec


def dumps(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True)


def read_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def matrix_from_json(obj: Any) -> ColorMatrix:
    if not isinstance(obj, dict) or "colors" not in obj:
        raise MalformedMatrix('configuration file needs a "colors" table')
    colors = obj["colors"]
    if not isinstance(colors, list) or not all(isinstance(row, list) for row in colors):
        raise MalformedMatrix('"colors" must be a list of rows')
    size = obj.get("size", len(colors))
    if size != len(colors):
        raise MalformedMatrix(f'"size" is {size} but the table has {len(colors)} rows', {"size": size})
    return ColorMatrix.from_rows(colors)


def config_to_json(cc: CoherentConfig) -> dict[str, Any]:
    nf = len(cc.fibers)
    return {
        "size": cc.size,
        "colors": cc.matrix.tolist(),
        "fibers": [list(f) for f in cc.fibers],
        "degrees": {str(r): d for r, d in enumerate(cc.degrees)},
        "transpose": {str(r): t for r, t in enumerate(cc.transpose)},
        "blocks": {f"{x},{y}": list(cc.block(x, y)) for x in range(nf) for y in range(nf)},
    }


def action_from_json(obj: Any) -> ActionSpec:
    if not isinstance(obj, dict) or "domain" not in obj or "generators" not in obj:
        raise NotBijection('action file needs "domain" and "generators"')
    gens = obj["generators"]
    if not isinstance(gens, list):
        raise NotBijection('"generators" must be a list')
    return ActionSpec.from_lists(obj["domain"], gens)


def action_to_json(action: ActionSpec) -> dict[str, Any]:
    return {"domain": action.domain_size, "generators": [list(g) for g in action.generators]}
