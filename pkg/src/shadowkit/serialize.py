"""Deterministic file output.

Every run artifact must be byte-identical across repeated runs with the
same configuration, so: floats are always written through '%.17g', keys
are emitted in sorted order, line endings are LF, and nothing
time-dependent ever enters a file.  JSON is written by a small local
dumper because the stdlib one cannot format floats; non-finite values
map to null.
"""
from __future__ import annotations

import numpy as np

__all__ = ["fmt", "write_csv", "write_json"]


def fmt(x) -> str:
    """Fixed textual form of a scalar: 17 significant digits for floats."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _json_token(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        xf = float(x)
        if not np.isfinite(xf):
            return "null"
        return format(xf, ".17g")
    if isinstance(x, str):
        return '"' + x.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(x)!r}")


def _json_dump(x, indent: int) -> str:
    pad = "  " * indent
    pad_in = "  " * (indent + 1)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [
            f'{pad_in}"{k}": {_json_dump(v, indent + 1)}' for k, v in sorted(x.items())
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        seq = list(x)
        if not seq:
            return "[]"
        items = [f"{pad_in}{_json_dump(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _json_token(x)


def write_json(path, obj: dict, config: dict) -> None:
    """JSON file with the resolved run configuration embedded under 'config'."""
    full = dict(obj)
    full["config"] = {k: config[k] for k in config}
    with open(path, "w", newline="\n") as f:
        f.write(_json_dump(full, 0))
        f.write("\n")


def write_csv(path, colnames, rows, config: dict) -> None:
    """CSV with '.' decimals, ',' separators, LF endings, and a '#' header
    carrying the resolved run configuration."""
    with open(path, "w", newline="\n") as f:
        for k in sorted(config):
            f.write(f"# {k}={fmt(config[k])}\n")
        f.write(",".join(colnames) + "\n")
        for row in rows:
            f.write(",".join(fmt(c) for c in row) + "\n")
