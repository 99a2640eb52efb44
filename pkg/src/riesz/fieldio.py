"""Binary-free field dumps: CSV samples plus a JSON grid manifest.

The CSV has columns index, re, im where index is the C-order flattened
position in the sample array; the coordinate of entry j on axis i is
(unravel(j)[i] - size/2) * spacing, with spacing h in the spatial domain and
dxi in the frequency domain.  The JSON manifest records the grid and domain
so a dump round-trips exactly.
"""

import json
import os

import numpy as np

from .grid import Field, GridSpec

LAYOUT_NOTE = (
    "index = C-order flattened position; coordinate on axis i is "
    "(unravel(index)[i] - size/2) * spacing"
)


def atomic_write_text(path, text):
    """Write a whole file through a temp name so readers never see partials."""
    tmp = f"{path}.tmp"
    with open(tmp, "w") as handle:
        handle.write(text)
    os.replace(tmp, path)


def field_to_csv_text(field):
    lines = ["index,re,im"]
    flat = field.samples.ravel()
    for j, value in enumerate(flat):
        lines.append(f"{j},{float(value.real)!r},{float(value.imag)!r}")
    return "\n".join(lines) + "\n"


def field_manifest(field):
    g = field.grid
    return {
        "dim": g.dim,
        "size": g.size,
        "half_width": g.half_width,
        "spacing": g.h if field.domain == "spatial" else g.dxi,
        "domain": field.domain,
        "layout": LAYOUT_NOTE,
    }


def dump_field(field, basepath):
    """Write basepath.csv and basepath.json; returns the two paths."""
    csv_path = f"{basepath}.csv"
    json_path = f"{basepath}.json"
    atomic_write_text(csv_path, field_to_csv_text(field))
    atomic_write_text(json_path, json.dumps(field_manifest(field), indent=2) + "\n")
    return csv_path, json_path


def load_field(basepath):
    """Read a dump produced by dump_field."""
    with open(f"{basepath}.json") as handle:
        meta = json.load(handle)
    grid = GridSpec(meta["dim"], meta["size"], meta["half_width"])
    data = np.loadtxt(f"{basepath}.csv", delimiter=",", skiprows=1)
    data = np.atleast_2d(data)
    order = np.argsort(data[:, 0])
    samples = (data[order, 1] + 1j * data[order, 2]).reshape(grid.shape)
    return Field(grid, meta["domain"], samples)
