import struct

import numpy as np
import pytest

from bdfdyn.errors import LatticeMismatchError
from bdfdyn.io import MAGIC, format_value, read_checkpoint, write_checkpoint, write_csv
from bdfdyn.lattice import build_lattice
from bdfdyn.opspace import random_hs_sample


def test_checkpoint_round_trip(tmp_path, tiny):
    q = random_hs_sample(tiny, 1.0, 4)
    path = tmp_path / "q.bdfq"
    write_checkpoint(path, q)
    data = path.read_bytes()
    assert data[:4] == MAGIC
    assert len(data) == 28 + tiny.size**2 * 16 * 16
    back = read_checkpoint(path)
    np.testing.assert_array_equal(back.mat, q.mat)
    assert back.lattice.cutoff == tiny.cutoff and back.lattice.n_per_axis == tiny.n_per_axis
    same = read_checkpoint(path, tiny)
    assert same.lattice is tiny


def test_checkpoint_lattice_mismatch(tmp_path, tiny):
    path = tmp_path / "q.bdfq"
    write_checkpoint(path, random_hs_sample(tiny, 1.0, 0))
    with pytest.raises(LatticeMismatchError):
        read_checkpoint(path, build_lattice(1.5, 4))


def test_checkpoint_corruption(tmp_path, tiny):
    path = tmp_path / "q.bdfq"
    write_checkpoint(path, random_hs_sample(tiny, 1.0, 0))
    data = path.read_bytes()
    bad = tmp_path / "bad.bdfq"
    bad.write_bytes(b"XXXX" + data[4:])
    with pytest.raises(ValueError, match="magic"):
        read_checkpoint(bad)
    bad.write_bytes(data[:10])
    with pytest.raises(ValueError, match="truncated"):
        read_checkpoint(bad)
    bad.write_bytes(data[:-16])
    with pytest.raises(ValueError):
        read_checkpoint(bad)
    bad.write_bytes(data[:4] + struct.pack("<I", 99) + data[8:])
    with pytest.raises(ValueError, match="version"):
        read_checkpoint(bad)


def test_csv_format(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(path, ["t", "e"], [[0.0, 1.0 / 3.0], [0.1, -2e-17]])
    text = path.read_bytes().decode()
    assert text == "t,e\n0.0,0.3333333333333333\n0.1,-2e-17\n"
    assert float(format_value(np.float64(0.1) + 0.2)) == 0.1 + 0.2
