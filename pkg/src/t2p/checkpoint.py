"""Self-describing model checkpoints.

Layout (all integers little-endian)::

    offset 0   8 bytes   magic  b"T2PCKPT\\0"
    offset 8   uint32    format version (currently 1)
    offset 12  uint32    header length H in bytes
    offset 16  H bytes   UTF-8 JSON header
    offset 16+H          parameter arrays, raw '<f8', C order, back to back

The header holds ``{"config": {...}, "arrays": [{"name", "shape", "dtype"}, ...]}``
with arrays listed in :attr:`t2p.model.T2PModel.PARAM_ORDER`. Any reader that
understands this layout can restore the parameters bit-exactly.
"""

import json
import os
import struct

import numpy as np

from . import tensor as T
from .errors import DataFormatError
from .model import T2PConfig, T2PModel

MAGIC = b"T2PCKPT\0"
VERSION = 1
DTYPE = "<f8"
_PREAMBLE = struct.Struct("<8sII")


def dumps(model):
    arrays = []
    blobs = []
    for name in T2PModel.PARAM_ORDER:
        data = np.ascontiguousarray(model.params[name].data, dtype=DTYPE)
        arrays.append({"name": name, "shape": list(data.shape), "dtype": DTYPE})
        blobs.append(data.tobytes())
    header = json.dumps({"config": model.config.to_dict(), "arrays": arrays}, sort_keys=True).encode("utf-8")
    return _PREAMBLE.pack(MAGIC, VERSION, len(header)) + header + b"".join(blobs)


def loads(raw):
    if len(raw) < _PREAMBLE.size:
        raise DataFormatError("checkpoint truncated before header")
    magic, version, hlen = _PREAMBLE.unpack_from(raw)
    if magic != MAGIC:
        raise DataFormatError("not a T2P checkpoint (bad magic)")
    if version != VERSION:
        raise DataFormatError(f"unsupported checkpoint version {version}")
    start = _PREAMBLE.size
    try:
        header = json.loads(raw[start:start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"corrupt checkpoint header: {exc}") from None
    config = T2PConfig.from_dict(header["config"])
    offset = start + hlen
    params = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        nbytes = count * 8
        if offset + nbytes > len(raw):
            raise DataFormatError(f"checkpoint truncated inside array {entry['name']!r}")
        data = np.frombuffer(raw, dtype=entry["dtype"], count=count, offset=offset).reshape(shape)
        params[entry["name"]] = T.Tensor(data.astype(np.float64), requires_grad=True, name=entry["name"])
        offset += nbytes
    missing = set(T2PModel.PARAM_ORDER) - set(params)
    if missing:
        raise DataFormatError(f"checkpoint lacks arrays {sorted(missing)}")
    return T2PModel(config, params)


def save(model, path):
    """Write ``model`` to ``path`` atomically (temp file + rename)."""
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(dumps(model))
    os.replace(tmp, path)


def load(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
