"""JSON encoding of complex arrays as nested ``[re, im]`` pairs."""
from __future__ import annotations

import numpy as np


def encode_array(a) -> list:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [encode_array(x) for x in arr]


def decode_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError(f"expected trailing [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_channel(ch) -> dict:
    return {"dim_in": ch.dim_in, "dim_out": ch.dim_out,
            "kraus_ops": [encode_array(k) for k in ch.kraus_ops]}


def decode_channel(data: dict):
    from raylab.channels import KrausChannel

    ch = KrausChannel([decode_array(k) for k in data["kraus_ops"]])
    if (ch.dim_in, ch.dim_out) != (data.get("dim_in", ch.dim_in), data.get("dim_out", ch.dim_out)):
        raise ValueError("declared channel dimensions disagree with the Kraus operators")
    return ch
