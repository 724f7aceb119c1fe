# Copyright 2026 The masc Authors
# SPDX-License-Identifier: Apache-2.0

"""Reader/writer for the files the masc engine consumes.

Covers MASCTEN1 tensors, the pooler head directory, text embeddings keyed by
prompt hash, mask PNGs and the prompts JSONL emitted by `masc prepare-prompts`.
Also carries a float64 NumPy forward pass of the attention pooler for
producing reference outputs next to exported weights.
"""

import hashlib
import json
import os
import struct

import numpy as np

MAGIC = b"MASCTEN1"


def encode_tensor(name, array, meta=None):
    arr = np.ascontiguousarray(np.asarray(array, dtype="<f4"))
    if arr.ndim == 0 or 0 in arr.shape:
        raise ValueError("tensor must have rank >= 1 and no zero dims")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor contains non-finite values")
    header = {
        "dtype": "f32",
        "layout": "row-major",
        "meta": meta or {},
        "name": name,
        "shape": [int(d) for d in arr.shape],
    }
    blob = json.dumps(header, separators=(",", ":"), ensure_ascii=False, sort_keys=True).encode("utf-8")
    return MAGIC + struct.pack("<I", len(blob)) + blob + arr.tobytes()


def decode_tensor(data):
    if data[:8] != MAGIC:
        raise ValueError("bad magic")
    (n,) = struct.unpack("<I", data[8:12])
    header = json.loads(data[12 : 12 + n].decode("utf-8"))
    shape = tuple(header["shape"])
    payload = data[12 + n :]
    if len(payload) != 4 * int(np.prod(shape)):
        raise ValueError("payload length does not match shape")
    arr = np.frombuffer(payload, dtype="<f4").reshape(shape)
    return header["name"], arr, header.get("meta", {})


def write_tensor(path, name, array, meta=None):
    data = encode_tensor(name, array, meta)
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


def read_tensor(path):
    with open(path, "rb") as f:
        return decode_tensor(f.read())


def prompt_hash(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_text_embedding(directory, text, vector):
    h = prompt_hash(text)
    write_tensor(os.path.join(directory, h + ".mten"), h, np.asarray(vector).reshape(-1),
                 {"prompt_hash": h, "text": text})
    return h


def read_prompts_jsonl(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def write_mask_png(path, mask):
    from PIL import Image

    Image.fromarray(np.where(np.asarray(mask) > 0, 255, 0).astype(np.uint8), mode="L").save(path)


# Linear weights are [out_features, in_features].
POOLER_TENSORS = (
    "probe", "q_weight", "k_weight", "v_weight", "out_weight", "q_bias", "k_bias", "v_bias", "out_bias",
    "norm_scale", "norm_offset", "fc1_weight", "fc1_bias", "fc2_weight", "fc2_bias",
)


def save_pooler(directory, params, num_heads, layer_norm_eps=1e-6, activation="gelu_tanh", packed=False):
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "head.json"), "w") as f:
        json.dump({"num_heads": num_heads, "layer_norm_eps": layer_norm_eps, "activation": activation}, f)
    names = list(POOLER_TENSORS)
    if packed:
        for n in ("q_weight", "k_weight", "v_weight", "q_bias", "k_bias", "v_bias"):
            names.remove(n)
        write_tensor(os.path.join(directory, "in_proj_weight.mten"), "in_proj_weight",
                     np.concatenate([params["q_weight"], params["k_weight"], params["v_weight"]]))
        write_tensor(os.path.join(directory, "in_proj_bias.mten"), "in_proj_bias",
                     np.concatenate([params["q_bias"], params["k_bias"], params["v_bias"]]))
    if "pre_norm_scale" in params:
        names += ["pre_norm_scale", "pre_norm_offset"]
    for n in names:
        write_tensor(os.path.join(directory, n + ".mten"), n, params[n])


def _layer_norm(x, scale, offset, eps):
    mu = x.mean(-1, keepdims=True)
    var = ((x - mu) ** 2).mean(-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps) * scale + offset


def _gelu(x, activation):
    if activation == "gelu":
        from math import erf

        return 0.5 * x * (1.0 + np.vectorize(erf)(x / np.sqrt(2.0)))
    return 0.5 * x * (1.0 + np.tanh(np.sqrt(2.0 / np.pi) * (x + 0.044715 * x**3)))


def reference_pool(tokens, params, num_heads, suppress=None, layer_norm_eps=1e-6, activation="gelu_tanh",
                   return_context=False):
    """Float64 forward pass; suppressed positions (True) get -inf logits."""
    p = {k: np.asarray(v, dtype=np.float64) for k, v in params.items()}
    x = np.asarray(tokens, dtype=np.float64).reshape(-1, p["probe"].shape[-1])
    if "pre_norm_scale" in p:
        x = _layer_norm(x, p["pre_norm_scale"], p["pre_norm_offset"], layer_norm_eps)
    d = x.shape[1]
    dh = d // num_heads
    q = p["q_weight"] @ p["probe"].reshape(-1) + p["q_bias"]
    k = x @ p["k_weight"].T + p["k_bias"]
    v = x @ p["v_weight"].T + p["v_bias"]
    ctx = np.zeros(d)
    for h in range(num_heads):
        s = slice(h * dh, (h + 1) * dh)
        logits = k[:, s] @ q[s] / np.sqrt(dh)
        if suppress is not None:
            logits = np.where(np.asarray(suppress, dtype=bool).reshape(-1), -np.inf, logits)
        w = np.exp(logits - logits.max())
        w /= w.sum()
        ctx[s] = w @ v[:, s]
    attended = p["out_weight"] @ ctx + p["out_bias"]
    hidden = _gelu(p["fc1_weight"] @ _layer_norm(attended, p["norm_scale"], p["norm_offset"], layer_norm_eps)
                   + p["fc1_bias"], activation)
    pooled = attended + p["fc2_weight"] @ hidden + p["fc2_bias"]
    return (pooled, ctx) if return_context else pooled
