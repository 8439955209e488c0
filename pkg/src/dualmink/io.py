"""JSON input/output for groups, measures, bodies and solver configs.

Floats are written with 17 significant digits so that a reloaded file
reproduces every value bit for bit.  Writes go to a temporary file in the
target directory and are moved into place only once complete.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from . import group as grp
from .body import BodySpec
from .measure import DiscreteMeasure
from .solver import SolveConfig


class InputError(ValueError):
    """A file is missing, malformed, or describes an invalid object."""


# --------------------------------------------------------------------------
# serialization


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return _fmt(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    """Atomically write ``obj`` as JSON (temp file + rename)."""
    write_text(path, dumps(obj))


def write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise InputError(f"{path}: file not found") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON ({e})") from e


# --------------------------------------------------------------------------
# objects


def _matrix(x, name):
    try:
        a = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as e:
        raise InputError(f"{name} must be numeric") from e
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} contains non-finite values")
    return a


def group_from_dict(d: dict) -> grp.FiniteGroup:
    """``{"named": ..., "n": ...}``, ``{"generators": [...]}`` or ``{"elements": [...]}``."""
    try:
        if "named" in d:
            name = d["named"]
            if name not in grp.NAMED:
                raise InputError(f"unknown named group {name!r}; known: {sorted(grp.NAMED)}")
            factory = grp.NAMED[name]
            if "args" in d:
                G = factory(*d["args"])
            else:
                try:
                    G = factory(d["n"]) if "n" in d else factory()
                except TypeError:
                    G = factory()
            if "n" in d and G.n != d["n"]:
                raise InputError(f"group {name!r} acts on R^{G.n}, not R^{d['n']}")
            return G
        if "generators" in d:
            gens = [_matrix(g, "generator") for g in d["generators"]]
            return grp.close_generators(gens, d.get("n"), d.get("max_order", grp.MAX_ORDER))
        if "elements" in d:
            return grp.from_elements([_matrix(g, "element") for g in d["elements"]], d.get("n"))
    except (grp.GroupError, InputError):
        raise
    except (TypeError, ValueError, KeyError) as e:
        raise InputError(f"bad group description: {e}") from e
    raise InputError("group needs 'named', 'generators' or 'elements'")


def group_to_dict(G: grp.FiniteGroup) -> dict:
    return {"n": G.n, "elements": [g.tolist() for g in G]}


def measure_from_dict(d: dict) -> DiscreteMeasure:
    """``{"n": n, "atoms": [{"u": [...], "w": w}, ...]}``.

    The columnar form ``{"directions": [[...]], "weights": [...]}`` is accepted
    too.  Directions are renormalized; weights must be positive.
    """
    if "atoms" in d:
        try:
            U = [a["u"] for a in d["atoms"]]
            w = [a["w"] for a in d["atoms"]]
        except (TypeError, KeyError) as e:
            raise InputError("each atom needs 'u' and 'w'") from e
    elif "directions" in d and "weights" in d:
        U, w = d["directions"], d["weights"]
    else:
        raise InputError("measure needs 'atoms'")
    U = _matrix(U, "atom directions")
    w = _matrix(w, "atom weights")
    n = d.get("n", U.shape[1] if U.ndim == 2 else None)
    if U.ndim != 2 or U.shape[0] == 0 or U.shape[1] != n or w.shape != (U.shape[0],):
        raise InputError(f"atoms must be vectors in R^{n} with one weight each")
    if np.any(w <= 0):
        raise InputError("atom weights must be > 0")
    if np.any(np.linalg.norm(U, axis=1) == 0):
        raise InputError("atom directions must be nonzero")
    try:
        return DiscreteMeasure.from_atoms(U, w, n)
    except ValueError as e:
        raise InputError(str(e)) from e


def measure_to_dict(mu: DiscreteMeasure) -> dict:
    return {"n": mu.n, "atoms": [{"u": u.tolist(), "w": float(w)}
                                 for u, w in zip(mu.directions, mu.weights)]}


def body_from_dict(d: dict) -> tuple[BodySpec, float]:
    """A body ``{"normals", "h"}``, optionally with ``"scale"``; solve outputs
    (``{"body": {...}, "scale": c}``) are accepted as well.
    """
    scale = float(d.get("scale", 1.0))
    if "body" in d:
        d = d["body"]
    if "normals" not in d or "h" not in d:
        raise InputError("body needs 'normals' and 'h'")
    try:
        return BodySpec(_matrix(d["normals"], "normals"), _matrix(d["h"], "h")), scale
    except ValueError as e:
        raise InputError(str(e)) from e


def body_to_dict(B: BodySpec) -> dict:
    return {"normals": B.normals.tolist(), "h": B.h.tolist()}


def config_from_dict(d: dict, **overrides) -> SolveConfig:
    fields = {k: v for k, v in {**d, **overrides}.items() if v is not None}
    try:
        return SolveConfig(**fields)
    except (TypeError, ValueError) as e:
        raise InputError(f"bad solver config: {e}") from e


def load_group(path) -> grp.FiniteGroup:
    return group_from_dict(read_json(path))


def load_measure(path) -> DiscreteMeasure:
    return measure_from_dict(read_json(path))


def load_body(path) -> tuple[BodySpec, float]:
    return body_from_dict(read_json(path))
