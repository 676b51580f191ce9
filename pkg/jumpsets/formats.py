# coding: utf-8
"""
File formats.

A grid file is one line of JSON header ({"N", "d", "sigma", "seed"}) followed by the
N^d values as little-endian float64 in row-major order. Small grids can instead be
written as CSV: a "# " line with the same header, then index,value rows.

A mask file is one line of JSON header ({"d", "m", "cell_size"}) followed by the
bits packed eight to a byte, row-major.

JSON documents are written with sorted keys. Infinite values are written as the
string "inf" in JSON and as empty cells in CSV.
"""
import json
import math
import os

import agate
import numpy as np

from jumpsets.utils import CubicalMask, InvalidParameterError, ObservationGrid, PersistenceDiagram

# Largest side written as CSV.
CSV_MAX_SIDE = 64


def _encode(value):
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, np.ndarray):
        return _encode(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _decode(value):
    if isinstance(value, dict):
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    if value in ("inf", "-inf"):
        return float(value)
    return value


def dumps(document):
    return json.dumps(_encode(document), sort_keys=True, indent=2)


def write_json(document, path):
    _makedirs(path)
    with open(path, "w") as f:
        f.write(dumps(document))
        f.write("\n")


def read_json(path):
    with open(path) as f:
        return _decode(json.load(f))


def _makedirs(path):
    dirname = os.path.dirname(path)
    if dirname:
        os.makedirs(dirname, exist_ok=True)


def write_grid(obs, path, csv=False):
    _makedirs(path)
    header = json.dumps(obs.header(), sort_keys=True)
    if csv:
        if obs.side > CSV_MAX_SIDE:
            raise InvalidParameterError("CSV grids are limited to N <= {}, got {}".format(CSV_MAX_SIDE, obs.side))
        table = agate.Table(
            [(i, float(v)) for i, v in enumerate(obs.values)],
            ["index", "value"],
            [agate.Number(), agate.Number()],
        )
        with open(path, "w") as f:
            f.write("# {}\n".format(header))
            table.to_csv(f)
    else:
        with open(path, "wb") as f:
            f.write(header.encode("utf-8"))
            f.write(b"\n")
            f.write(np.asarray(obs.values, dtype="<f8").tobytes())


def read_grid(path):
    with open(path, "rb") as f:
        first = f.readline()
        if first.startswith(b"# "):
            header = json.loads(first[2:].decode("utf-8"))
            table = agate.Table.from_csv(path, column_types=[agate.Number(), agate.Number()], skip_lines=1)
            values = np.zeros(len(table.rows))
            for row in table.rows:
                values[int(row["index"])] = float(row["value"])
        else:
            header = json.loads(first.decode("utf-8"))
            values = np.frombuffer(f.read(), dtype="<f8").astype(float)
    return ObservationGrid(header["d"], header["N"], values, noise_sigma=header.get("sigma"), seed=header.get("seed"))


def write_mask(mask, path):
    _makedirs(path)
    header = json.dumps({"cell_size": mask.cell_size, "d": mask.dim, "m": mask.resolution}, sort_keys=True)
    with open(path, "wb") as f:
        f.write(header.encode("utf-8"))
        f.write(b"\n")
        f.write(np.packbits(mask.bits.ravel()).tobytes())


def read_mask(path):
    with open(path, "rb") as f:
        header = json.loads(f.readline().decode("utf-8"))
        payload = np.frombuffer(f.read(), dtype=np.uint8)
    dim, m = header["d"], header["m"]
    bits = np.unpackbits(payload)[: m**dim].astype(bool)
    return CubicalMask(dim, m, bits)


def diagrams_document(diagrams):
    return [{"degree": diagram.degree, "points": diagram.points.tolist()} for diagram in diagrams]


def diagrams_from_document(document):
    return [PersistenceDiagram(item["degree"], _decode(item["points"])) for item in document]


def finite_or_none(value):
    return None if value is None or not math.isfinite(value) else value


def diagrams_table(diagrams):
    rows = []
    for diagram in diagrams:
        for birth, death in diagram.points:
            rows.append((diagram.degree, float(birth), finite_or_none(float(death)), not math.isfinite(death)))
    return agate.Table(
        rows,
        ["degree", "birth", "death", "essential"],
        [agate.Number(), agate.Number(), agate.Number(), agate.Boolean()],
    )


def write_diagrams_csv(diagrams, path):
    _makedirs(path)
    diagrams_table(diagrams).to_csv(path)
