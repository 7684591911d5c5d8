import json
import struct

import numpy as np
import pytest

from t2p import checkpoint
from t2p.errors import DataFormatError
from t2p.model import T2PModel, preset


@pytest.fixture
def model():
    return T2PModel.initialize(preset("sy4", seed=5, kl_mode="uniform"), np.random.default_rng(0))


def test_roundtrip_is_bit_exact(model, tmp_path):
    path = tmp_path / "m.ckpt"
    checkpoint.save(model, path)
    back = checkpoint.load(path)
    assert back.config == model.config
    for a, b in zip(model.parameters(), back.parameters()):
        assert a.data.tobytes() == b.data.tobytes()
    assert checkpoint.dumps(back) == checkpoint.dumps(model)


def test_layout_is_documented(model):
    raw = checkpoint.dumps(model)
    magic, version, hlen = struct.unpack_from("<8sII", raw)
    assert magic == b"T2PCKPT\0" and version == 1
    header = json.loads(raw[16:16 + hlen])
    assert [a["name"] for a in header["arrays"]] == list(T2PModel.PARAM_ORDER)
    first = header["arrays"][0]
    n = int(np.prod(first["shape"]))
    arr = np.frombuffer(raw, "<f8", count=n, offset=16 + hlen).reshape(first["shape"])
    np.testing.assert_array_equal(arr, model.params["conv1.weight"].data)
    total = sum(int(np.prod(a["shape"])) for a in header["arrays"])
    assert len(raw) == 16 + hlen + 8 * total


def test_rejects_bad_files(model):
    raw = checkpoint.dumps(model)
    with pytest.raises(DataFormatError, match="magic"):
        checkpoint.loads(b"X" + raw[1:])
    with pytest.raises(DataFormatError, match="version"):
        checkpoint.loads(raw[:8] + struct.pack("<I", 99) + raw[12:])
    with pytest.raises(DataFormatError, match="truncated"):
        checkpoint.loads(raw[:-8])
    with pytest.raises(DataFormatError):
        checkpoint.loads(raw[:5])
