"""Canonical JSON for algebra elements, module vectors, operators and reports.

Complex scalars are ``[re, im]``; an algebra element is ``{"blocks": [...]}``
with row-major blocks; a vector is a list of elements; an operator is a list
of rows of elements (codomain index first).  Canonical output sorts object
keys and writes every float with 17 significant digits, so equal data always
serializes to identical bytes.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, is_dataclass
from typing import Any

import numpy as np

from .algebra import AlgebraDescriptor, AlgebraElement
from .hilbert_module import ModuleOperator, ModuleVector


class SchemaError(ValueError):
    """Input does not match the expected structure; ``path`` names the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    if x == 0:
        return "0.0"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _write(obj, out: list):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _write(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _write(item, out)
        out.append("]")
    else:
        _write(to_jsonable(obj), out)


def dumps_canonical(obj) -> str:
    out: list[str] = []
    _write(to_jsonable(obj), out)
    return "".join(out)


# -- encoders -------------------------------------------------------------------

def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def matrix_to_json(m: np.ndarray) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(m)]


def element_to_json(a: AlgebraElement) -> dict:
    return {"blocks": [matrix_to_json(b) for b in a.blocks]}


def vector_to_json(x: ModuleVector) -> list:
    return [element_to_json(e) for e in x.entries]


def operator_to_json(t: ModuleOperator) -> list:
    return [[element_to_json(e) for e in row] for row in t.entries]


def to_jsonable(obj) -> Any:
    """Convert library objects into plain JSON data."""
    from .search import ProjectionFamily
    from .summing import Frame
    if obj is None or isinstance(obj, (bool, int, float, str, np.integer, np.floating)):
        return obj
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_json(obj)
    if isinstance(obj, AlgebraDescriptor):
        return list(obj.block_sizes)
    if isinstance(obj, AlgebraElement):
        return element_to_json(obj)
    if isinstance(obj, ModuleVector):
        return vector_to_json(obj)
    if isinstance(obj, ModuleOperator):
        return operator_to_json(obj)
    if isinstance(obj, ProjectionFamily):
        return {"projections": [operator_to_json(p) for p in obj.projections]}
    if isinstance(obj, Frame):
        return {"vectors": [vector_to_json(v) for v in obj.vectors], "bounds": list(obj.bounds)}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [to_jsonable(v) for v in obj.tolist()]
        return obj.tolist()
    if isinstance(obj, (frozenset, set)):
        return sorted(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if is_dataclass(obj):
        return {f: to_jsonable(getattr(obj, f)) for f in asdict(obj)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- decoders -------------------------------------------------------------------

def complex_from_json(obj, path: str) -> complex:
    if isinstance(obj, bool):
        raise SchemaError(path, "expected a number or [re, im]")
    if isinstance(obj, (int, float)):
        return complex(obj)
    if (isinstance(obj, list) and len(obj) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)):
        return complex(obj[0], obj[1])
    raise SchemaError(path, "expected a number or [re, im]")


def matrix_from_json(obj, size: int, path: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != size:
        raise SchemaError(path, f"expected {size} rows")
    out = np.zeros((size, size), dtype=complex)
    for r, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != size:
            raise SchemaError(f"{path}[{r}]", f"expected {size} entries")
        for c, z in enumerate(row):
            out[r, c] = complex_from_json(z, f"{path}[{r}][{c}]")
    return out


def element_from_json(obj, desc: AlgebraDescriptor, path: str) -> AlgebraElement:
    if isinstance(obj, dict) and "blocks" in obj:
        blocks = obj["blocks"]
    elif desc.block_sizes == (1,) and not isinstance(obj, dict):
        blocks = [[[obj]]]
    else:
        raise SchemaError(path, 'expected {"blocks": [...]}')
    if not isinstance(blocks, list) or len(blocks) != desc.n_blocks:
        raise SchemaError(f"{path}.blocks", f"expected {desc.n_blocks} blocks")
    return AlgebraElement(desc, [matrix_from_json(b, k, f"{path}.blocks[{j}]")
                                 for j, (b, k) in enumerate(zip(blocks, desc.block_sizes))])


def vector_from_json(obj, desc: AlgebraDescriptor, rank: int, path: str) -> ModuleVector:
    if not isinstance(obj, list):
        raise SchemaError(path, "expected a list of algebra elements")
    if len(obj) != rank:
        raise SchemaError(path, f"vector has {len(obj)} entries, module rank is {rank}")
    return ModuleVector.from_entries([element_from_json(e, desc, f"{path}[{i}]")
                                      for i, e in enumerate(obj)])


def operator_from_json(obj, desc: AlgebraDescriptor, domain_rank: int, codomain_rank: int,
                       path: str) -> ModuleOperator:
    if not isinstance(obj, list) or len(obj) != codomain_rank:
        raise SchemaError(path, f"expected {codomain_rank} rows (codomain rank)")
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != domain_rank:
            raise SchemaError(f"{path}[{i}]", f"expected {domain_rank} entries (domain rank)")
        rows.append([element_from_json(e, desc, f"{path}[{i}][{j}]") for j, e in enumerate(row)])
    return ModuleOperator.from_entries(rows)


def descriptor_from_json(obj, path: str = "algebra") -> AlgebraDescriptor:
    if (not isinstance(obj, list) or not obj
            or not all(isinstance(k, int) and not isinstance(k, bool) and k >= 1 for k in obj)):
        raise SchemaError(path, "expected a nonempty list of positive block sizes")
    return AlgebraDescriptor(tuple(obj))
