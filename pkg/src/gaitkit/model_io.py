"""Binary container for trained model weights.

One format for every network: a magic tag, a kind string, string
metadata, then named float64 tensors. The per-model save/load pairs
flatten the weight structures into that namespace and rebuild them,
so a round trip is bit-exact and a file written twice is identical.

Layout, all little-endian:

    magic b"GKMD", version u32, kind string,
    meta count u32, (key, value) strings,
    tensor count u32, per tensor: name, ndim u8, dims u32 each,
    float64 payload.

Strings are u16 length + utf-8 bytes, as in the dataset container.
"""

import struct

import numpy as np

from .autodiff import Tensor
from .data import _pack_str, _unpack_str
from .extraction import EXTRACTOR_LAYERS
from .nn import LstmLayerWeights
from .recognition import CNN_SPECS, AuthModel, IdentModel

_MAGIC = b"GKMD"
_VERSION = 1


def save_model(path, kind, tensors, meta=None):
    """tensors: mapping name -> array, written in iteration order."""
    meta = dict(meta or {})
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(_pack_str(kind))
        fh.write(struct.pack("<I", len(meta)))
        for key, value in meta.items():
            fh.write(_pack_str(key))
            fh.write(_pack_str(str(value)))
        fh.write(struct.pack("<I", len(tensors)))
        for name, arr in tensors.items():
            arr = np.ascontiguousarray(arr, dtype="<f8")
            fh.write(_pack_str(name))
            fh.write(struct.pack("<B", arr.ndim))
            for dim in arr.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(arr.tobytes())


def load_model(path):
    """-> (kind, tensors dict, meta dict); tensors come back float64."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != _MAGIC:
        raise ValueError(f"{path}: not a model file")
    off = 4
    (version,) = struct.unpack_from("<I", buf, off)
    off += 4
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    kind, off = _unpack_str(buf, off)
    (n_meta,) = struct.unpack_from("<I", buf, off)
    off += 4
    meta = {}
    for _ in range(n_meta):
        key, off = _unpack_str(buf, off)
        meta[key], off = _unpack_str(buf, off)
    (n_tensors,) = struct.unpack_from("<I", buf, off)
    off += 4
    tensors = {}
    for _ in range(n_tensors):
        name, off = _unpack_str(buf, off)
        (ndim,) = struct.unpack_from("<B", buf, off)
        off += 1
        shape = struct.unpack_from(f"<{ndim}I", buf, off)
        off += 4 * ndim
        count = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(buf, dtype="<f8", count=count, offset=off)
        off += 8 * count
        tensors[name] = arr.reshape(shape).astype(np.float64)
    return kind, tensors, meta


# ---------------------------------------------------------------------------
# flatteners for each weight structure


def _layer_dict_tensors(weights, names, prefix=""):
    out = {}
    for name in names:
        w, b = weights[name]
        out[f"{prefix}{name}.w"] = w.data
        out[f"{prefix}{name}.b"] = b.data
    return out


def _layer_dict_from(tensors, names, prefix=""):
    return {
        name: (
            Tensor(tensors[f"{prefix}{name}.w"].copy()),
            Tensor(tensors[f"{prefix}{name}.b"].copy()),
        )
        for name in names
    }


def _lstm_tensors(layers):
    out = {}
    for i, layer in enumerate(layers):
        for f in LstmLayerWeights.__dataclass_fields__:
            out[f"lstm{i}.{f}"] = getattr(layer, f).data
    return out


def _lstm_from(tensors, n_layers):
    layers = []
    for i in range(n_layers):
        fields = {
            f: Tensor(tensors[f"lstm{i}.{f}"].copy())
            for f in LstmLayerWeights.__dataclass_fields__
        }
        layers.append(LstmLayerWeights(**fields))
    return layers


def save_extractor(path, weights, meta=None):
    names = [row[0] for row in EXTRACTOR_LAYERS]
    save_model(path, "extractor", _layer_dict_tensors(weights, names), meta)


def load_extractor(path):
    kind, tensors, meta = load_model(path)
    if kind != "extractor":
        raise ValueError(f"expected an extractor file, found {kind!r}")
    names = [row[0] for row in EXTRACTOR_LAYERS]
    return _layer_dict_from(tensors, names), meta


def save_ident(path, model, meta=None):
    meta = dict(meta or {})
    meta.update(
        variant=model.variant,
        n_classes=str(model.n_classes),
        bidirectional="1" if model.bidirectional else "0",
        frozen=",".join(model.frozen),
        lstm_layers=str(len(model.lstm) if model.lstm else 0),
    )
    tensors = {}
    if model.cnn is not None:
        tensors.update(_layer_dict_tensors(model.cnn, CNN_SPECS, "cnn."))
    if model.lstm is not None:
        tensors.update(_lstm_tensors(model.lstm))
    tensors["head.w"] = model.head_w.data
    tensors["head.b"] = model.head_b.data
    save_model(path, "ident", tensors, meta)


def load_ident(path):
    kind, tensors, meta = load_model(path)
    if kind != "ident":
        raise ValueError(f"expected an ident file, found {kind!r}")
    n_layers = int(meta["lstm_layers"])
    cnn = (
        _layer_dict_from(tensors, CNN_SPECS, "cnn.")
        if "cnn.conv1_1.w" in tensors
        else None
    )
    frozen = tuple(s for s in meta["frozen"].split(",") if s)
    return IdentModel(
        variant=meta["variant"],
        n_classes=int(meta["n_classes"]),
        cnn=cnn,
        lstm=_lstm_from(tensors, n_layers) if n_layers else None,
        bidirectional=meta["bidirectional"] == "1",
        head_w=Tensor(tensors["head.w"].copy()),
        head_b=Tensor(tensors["head.b"].copy()),
        frozen=frozen,
    )


def save_auth(path, model, meta=None):
    meta = dict(meta or {})
    meta.update(
        alignment=model.alignment, lstm_layers=str(len(model.lstm))
    )
    tensors = dict(_layer_dict_tensors(model.cnn, CNN_SPECS, "cnn."))
    tensors.update(_lstm_tensors(model.lstm))
    tensors["head.w"] = model.head_w.data
    tensors["head.b"] = model.head_b.data
    save_model(path, "auth", tensors, meta)


def load_auth(path):
    kind, tensors, meta = load_model(path)
    if kind != "auth":
        raise ValueError(f"expected an auth file, found {kind!r}")
    return AuthModel(
        alignment=meta["alignment"],
        cnn=_layer_dict_from(tensors, CNN_SPECS, "cnn."),
        lstm=_lstm_from(tensors, int(meta["lstm_layers"])),
        head_w=Tensor(tensors["head.w"].copy()),
        head_b=Tensor(tensors["head.b"].copy()),
    )
