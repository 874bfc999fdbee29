"""JSON and CSV documents written by the command line.

Every document carries ``"schema": 1``, the command name and the full run
configuration.  Complex numbers are ``{"re": x, "im": y}`` in JSON and a pair
of ``<name>_re`` / ``<name>_im`` columns in CSV.  CSV floats are written with
17 significant digits; JSON floats use Python's shortest round-trip repr.
Both read back to identical values.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from xyep.exceptional import EpRecord
from xyep.model import QuasiEnergySet, SpectrumMultiset

SCHEMA = 1


def to_jsonable(obj):
    """Recursively convert numpy and complex values into JSON-ready types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if set(obj) == {"re", "im"}:
            return complex(obj["re"], obj["im"])
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def document(command, config, data) -> dict:
    return {"schema": SCHEMA, "command": command, "config": to_jsonable(config), "data": to_jsonable(data)}


def dumps_json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def loads_json(text) -> dict:
    """Parse a JSON document, turning ``{"re", "im"}`` objects back into complex."""
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}")
    return _decode(doc)


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def dumps_csv(command, config, columns, rows) -> str:
    """CSV with ``#`` header lines; complex columns are split into re/im."""
    out = io.StringIO()
    out.write(f"# schema={SCHEMA}\n")
    out.write(f"# command={command}\n")
    out.write("# config=" + json.dumps(to_jsonable(config), sort_keys=True) + "\n")
    out.write("# columns=" + ",".join(f"{n}:{k}" for n, k in columns) + "\n")
    header = []
    for name, kind in columns:
        header.extend([f"{name}_re", f"{name}_im"] if kind == "complex" else [name])
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        cells = []
        for (name, kind), v in zip(columns, row):
            if kind == "complex":
                v = complex(v)
                cells.extend([fmt(v.real), fmt(v.imag)])
            else:
                cells.append(fmt(v))
        w.writerow(cells)
    return out.getvalue()


def _parse_cell(text, kind):
    if kind == "int":
        return int(text)
    if kind == "bool":
        return text == "true"
    if kind == "str":
        return text
    return float(text) if text != "" else math.nan


def loads_csv(text, columns=None):
    """Inverse of :func:`dumps_csv`.

    The column spec is read from the ``# columns=`` header unless given.
    Returns ``(meta, rows)`` with ``meta`` holding schema, command and config.
    """
    lines = text.splitlines()
    meta = {}
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, val = line[2:].partition("=")
            meta[key] = json.loads(val) if key == "config" else val
        else:
            body.append(line)
    if int(meta.get("schema", -1)) != SCHEMA:
        raise ValueError(f"unsupported schema {meta.get('schema')!r}")
    meta["schema"] = int(meta["schema"])
    meta["config"] = _decode(meta.get("config", {}))
    if columns is None:
        columns = [tuple(c.split(":")) for c in meta["columns"].split(",")]
    reader = csv.reader(body)
    next(reader)
    rows = []
    for cells in reader:
        row, i = [], 0
        for _, kind in columns:
            if kind == "complex":
                row.append(complex(float(cells[i]), float(cells[i + 1])))
                i += 2
            else:
                row.append(_parse_cell(cells[i], kind))
                i += 1
        rows.append(row)
    return meta, rows


def svg_header(text) -> dict:
    """The schema/command/config document stored in an SVG's description."""
    import xml.etree.ElementTree as ET

    root = ET.fromstring(text)
    node = root.find(".//{http://purl.org/dc/elements/1.1/}description")
    if node is None:
        raise ValueError("SVG carries no run header")
    return loads_json(node.text)


# per-type converters -------------------------------------------------------

def quasi_to_dict(q: QuasiEnergySet) -> dict:
    return {
        "epsilons": list(q.epsilons),
        "sectors": list(q.sectors),
        "source": q.source,
        "near_degenerate": q.near_degenerate,
    }


def quasi_from_dict(d) -> QuasiEnergySet:
    q = QuasiEnergySet(np.array(d["epsilons"], dtype=complex), d["sectors"], d["source"])
    q.near_degenerate = bool(d["near_degenerate"])
    return q


def spectrum_to_dict(s: SpectrumMultiset) -> dict:
    return {"origin": s.origin, "energies": list(s.sorted())}


def spectrum_from_dict(d) -> SpectrumMultiset:
    return SpectrumMultiset(np.array(d["energies"], dtype=complex), d["origin"])


EP_FIELDS = ("k_ep", "lambda_ep", "branch", "ring", "quasi_gap", "lr_overlap", "trivial")
EP_COLUMNS = [("k_ep", "complex"), ("lambda_ep", "complex"), ("branch", "str"), ("ring", "str"),
              ("quasi_gap", "float"), ("lr_overlap", "float"), ("trivial", "bool")]


def ep_to_dict(rec: EpRecord) -> dict:
    return {f: getattr(rec, f) for f in EP_FIELDS}


def ep_from_dict(d) -> EpRecord:
    return EpRecord(**{f: d[f] for f in EP_FIELDS})


def ep_row(rec: EpRecord) -> list:
    return [getattr(rec, f) for f in EP_FIELDS]


def ep_from_row(row) -> EpRecord:
    """Record from the leading EP columns of a CSV row; extra columns are ignored."""
    return EpRecord(*row[: len(EP_FIELDS)])
