"""Fixture serialization: complex matrices as interleaved (re, im) row-major
float lists under a dims header, for ChannelSet and Observation round-trips."""

import json

import numpy as np

from .model import ChannelSet, Observation

FORMAT_TAG = "complex-interleaved-v1"


def matrix_to_obj(a):
    a = np.asarray(a, dtype=np.complex128)
    flat = np.empty(2 * a.size, dtype=np.float64)
    flat[0::2] = a.real.ravel(order="C")
    flat[1::2] = a.imag.ravel(order="C")
    return {
        "format": FORMAT_TAG,
        "dims": {"rows": int(a.shape[0]), "cols": int(a.shape[1])},
        "data": flat.tolist(),
    }


def matrix_from_obj(obj):
    if obj.get("format") != FORMAT_TAG:
        raise ValueError(f"unsupported matrix format {obj.get('format')!r}")
    rows, cols = obj["dims"]["rows"], obj["dims"]["cols"]
    flat = np.asarray(obj["data"], dtype=np.float64)
    if flat.size != 2 * rows * cols:
        raise ValueError("matrix payload size disagrees with dims header")
    return (flat[0::2] + 1j * flat[1::2]).reshape(rows, cols)


def save_channel_set(ch, path):
    payload = {
        name: matrix_to_obj(getattr(ch, name))
        for name in ("Hb", "Hr", "Phi", "Q", "F1", "F2")
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_channel_set(path):
    with open(path) as fh:
        payload = json.load(fh)
    return ChannelSet(**{name: matrix_from_obj(payload[name]) for name in payload})


def save_observation(obs, path):
    payload = {
        "Y": matrix_to_obj(obs.Y),
        "noise_var": obs.noise_var,
        "U_true": matrix_to_obj(obs.U_true),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_observation(path):
    with open(path) as fh:
        payload = json.load(fh)
    return Observation(
        Y=matrix_from_obj(payload["Y"]),
        noise_var=payload["noise_var"],
        U_true=matrix_from_obj(payload["U_true"]),
    )
