import json
import math

import agate
import numpy as np
import pytest

from jumpsets.formats import (
    diagrams_document,
    diagrams_from_document,
    dumps,
    read_grid,
    read_json,
    read_mask,
    write_diagrams_csv,
    write_grid,
    write_json,
    write_mask,
)
from jumpsets.utils import CubicalMask, InvalidParameterError, ObservationGrid, PersistenceDiagram


@pytest.fixture
def obs():
    rng = np.random.default_rng(0)
    return ObservationGrid(2, 8, rng.normal(size=64), noise_sigma=0.25, seed=0)


def test_grid_binary(tmp_path, obs):
    path = str(tmp_path / "grid" / "sample.grid")
    write_grid(obs, path)
    other = read_grid(path)
    assert (other.dim, other.side, other.noise_sigma, other.seed) == (2, 8, 0.25, 0)
    np.testing.assert_array_equal(other.values, obs.values)


def test_grid_csv(tmp_path, obs):
    path = str(tmp_path / "sample.csv")
    write_grid(obs, path, csv=True)
    with open(path) as f:
        assert f.readline().startswith("# {")
        assert f.readline().strip() == "index,value"
    other = read_grid(path)
    assert (other.dim, other.side, other.noise_sigma) == (2, 8, 0.25)
    np.testing.assert_allclose(other.values, obs.values)


def test_grid_csv_size_limit(tmp_path):
    obs = ObservationGrid(1, 65, np.zeros(65))
    with pytest.raises(InvalidParameterError):
        write_grid(obs, str(tmp_path / "big.csv"), csv=True)


def test_grid_unknown_sigma(tmp_path):
    path = str(tmp_path / "sample.grid")
    write_grid(ObservationGrid(1, 5, np.arange(5)), path)
    assert not read_grid(path).sigma_known


def test_mask(tmp_path):
    bits = np.zeros((5, 5, 5), dtype=bool)
    bits[1, 2, 3] = bits[4, 4, 4] = True
    mask = CubicalMask(3, 5, bits)
    path = str(tmp_path / "sample.mask")
    write_mask(mask, path)
    assert read_mask(path) == mask


def test_json(tmp_path):
    path = str(tmp_path / "document.json")
    write_json({"death": math.inf, "values": np.array([1.0, 2.0]), "count": np.int64(3)}, path)
    assert read_json(path) == {"death": math.inf, "values": [1.0, 2.0], "count": 3}
    assert '"death": "inf"' in dumps({"death": math.inf})


def test_diagrams_document():
    diagrams = [PersistenceDiagram(0, [(0, 0.5), (0, math.inf)]), PersistenceDiagram(1)]
    document = json.loads(dumps(diagrams_document(diagrams)))
    assert diagrams_from_document(document) == diagrams


def test_diagrams_csv(tmp_path):
    path = str(tmp_path / "diagrams.csv")
    write_diagrams_csv([PersistenceDiagram(0, [(0, 0.5), (0, math.inf)]), PersistenceDiagram(1, [(0, 0.25)])], path)
    table = agate.Table.from_csv(path, column_types=[agate.Number(), agate.Number(), agate.Number(), agate.Boolean()])
    rows = [tuple(row) for row in table.rows]
    assert rows == [(0, 0, 0.5, False), (0, 0, None, True), (1, 0, 0.25, False)]
