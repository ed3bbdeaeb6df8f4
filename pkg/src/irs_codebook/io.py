"""Canonical JSON persistence for codebooks.

Keys are written in a fixed order and floats with 17 significant digits,
so save -> load -> save reproduces the file byte for byte. Non-finite
floats are stored as ``null``.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .array_model import Codeword, IrsGeometry
from .codebook import DESIGNERS, Codebook
from .grid import BetaGrid

FORMAT_VERSION = 1


class SchemaError(ValueError):
    """A codebook file violates the format; the message names the first violation."""


def _canonical(obj: Any, indent: int = 0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        text = format(x, ".17g")
        # keep floats recognizable as floats on reload
        if not any(c in text for c in ".en"):
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_canonical(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _canonical(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_canonical(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def codebook_to_dict(codebook: Codebook) -> dict:
    geom, grid = codebook.geometry, codebook.grid
    codewords = []
    for (m_y, m_z), cw in zip(codebook.indices, codebook.codewords):
        codewords.append({
            "m_y": int(m_y),
            "m_z": int(m_z),
            "mode": cw.mode,
            "bits": cw.bits,
            "achieved_alpha": float(cw.achieved_alpha),
            "phases": [float(p) for p in cw.phases],
        })
    return {
        "format_version": FORMAT_VERSION,
        "geometry": geom.as_dict(),
        "grid": grid.as_dict(),
        "designer": codebook.designer,
        "config": codebook.config,
        "codewords": codewords,
        "reports": list(codebook.reports),
    }


def dumps(codebook: Codebook) -> str:
    return _canonical(codebook_to_dict(codebook)) + "\n"


def save_codebook(codebook: Codebook, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(codebook))


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


def _number(value, where: str) -> float:
    _require(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        f"{where} must be a number",
    )
    return float(value)


def codebook_from_dict(data: Any) -> Codebook:
    """Validate and build a codebook; raises SchemaError on the first violation."""
    _require(isinstance(data, dict), "top level must be an object")
    for key in ("format_version", "geometry", "grid", "designer", "codewords"):
        _require(key in data, f"missing field '{key}'")
    _require(data["format_version"] == FORMAT_VERSION, f"unsupported format_version {data['format_version']!r}")
    _require(data["designer"] in DESIGNERS, f"unknown designer {data['designer']!r}")

    g = data["geometry"]
    _require(isinstance(g, dict), "geometry must be an object")
    try:
        geom = IrsGeometry(g["q_y"], g["q_z"], _number(g["d_y"], "geometry.d_y"), _number(g["d_z"], "geometry.d_z"))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid geometry: {exc}") from exc
    gr = data["grid"]
    _require(isinstance(gr, dict), "grid must be an object")
    try:
        grid = BetaGrid(
            gr["m_y"], gr["m_z"],
            _number(gr["beta_bar_y"], "grid.beta_bar_y"), _number(gr["beta_bar_z"], "grid.beta_bar_z"),
            gr["p_y"], gr["p_z"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid grid: {exc}") from exc

    entries = data["codewords"]
    _require(isinstance(entries, list), "codewords must be a list")
    by_index: dict = {}
    for n, entry in enumerate(entries):
        where = f"codewords[{n}]"
        _require(isinstance(entry, dict), f"{where} must be an object")
        for key in ("m_y", "m_z", "phases", "mode"):
            _require(key in entry, f"{where} missing field '{key}'")
        idx = (entry["m_y"], entry["m_z"])
        _require(
            all(isinstance(i, int) and not isinstance(i, bool) for i in idx)
            and 0 <= idx[0] < grid.m_y and 0 <= idx[1] < grid.m_z,
            f"{where} index {idx} outside the grid",
        )
        _require(idx not in by_index, f"{where} duplicates grid index {idx}")
        phases = entry["phases"]
        _require(isinstance(phases, list), f"{where}.phases must be a list")
        _require(len(phases) == geom.n_elements, f"{where}.phases has {len(phases)} entries, expected Q={geom.n_elements}")
        _require(
            all(isinstance(p, (int, float)) and not isinstance(p, bool) and math.isfinite(p) for p in phases),
            f"{where}.phases must be finite numbers (non-unit-modulus weight)",
        )
        mode, bits = entry["mode"], entry.get("bits")
        _require(mode in ("continuous", "discrete"), f"{where}.mode must be 'continuous' or 'discrete'")
        _require((mode == "discrete") == (bits is not None), f"{where}.bits inconsistent with mode {mode!r}")
        if bits is not None:
            _require(isinstance(bits, int) and not isinstance(bits, bool) and bits >= 1, f"{where}.bits must be a positive integer")
        alpha = entry.get("achieved_alpha")
        alpha = float("nan") if alpha is None else _number(alpha, f"{where}.achieved_alpha")
        try:
            by_index[idx] = Codeword(np.array(phases, dtype=float), bits, alpha)
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from exc
    indices = list(grid.indices())
    missing = [i for i in indices if i not in by_index]
    _require(not missing, f"grid indices not covered by any codeword: {missing[:5]}")

    config = data.get("config", {})
    _require(isinstance(config, dict), "config must be an object")
    reports = data.get("reports", [])
    _require(isinstance(reports, list), "reports must be a list")
    return Codebook(geom, grid, data["designer"], config, [by_index[i] for i in indices], indices, reports)


def loads(text: str) -> Codebook:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    return codebook_from_dict(data)


def load_codebook(path) -> Codebook:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
