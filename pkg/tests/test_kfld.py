import struct

import numpy as np
import pytest

from kirchnorm import kfld
from kirchnorm.grid import gaussian_field, make_grid


def test_roundtrip_and_layout(tmp_path):
    grid = make_grid(2, 5.0, 16)
    u = gaussian_field(grid, 1.5, 1.0, (0.5, -0.25))
    blob = kfld.dumps(u)
    magic, version, dim, m, hw = struct.unpack_from("<4sBBQd", blob)
    assert (magic, version, dim, m, hw) == (b"KFLD", 1, 2, 16, 5.0)
    assert len(blob) == 4 + 1 + 1 + 8 + 8 + 8 * 16 * 16
    assert np.frombuffer(blob[22:30], "<f8")[0] == u.samples[0, 0]
    path = tmp_path / "u.kfld"
    kfld.write(path, u)
    back = kfld.read(path)
    assert back.grid == grid
    assert np.array_equal(back.samples, u.samples)


@pytest.mark.parametrize("mutate, msg", [
    (lambda b: b"XFLD" + b[4:], "magic"),
    (lambda b: b[:4] + bytes([2]) + b[5:], "version"),
    (lambda b: b[:-8], "payload"),
    (lambda b: b[:10], "truncated"),
])
def test_rejects_corrupt(mutate, msg):
    blob = kfld.dumps(gaussian_field(make_grid(1, 5.0, 16)))
    with pytest.raises(ValueError, match=msg):
        kfld.loads(mutate(blob))
