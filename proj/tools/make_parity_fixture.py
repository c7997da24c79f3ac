#!/usr/bin/env python3
# Copyright 2026 The tscvx Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes a toy TSCX model and its forward-pass parity fixture.

The model is a torch.nn.TransformerEncoder (pre-norm, ReLU) with one token per
input scalar, a learned position table, mean pooling and a linear decoder,
briefly fitted to random targets so the weights are not at initialization.
"""

import argparse
import json
import pathlib
import struct
import zlib

import torch
from torch import nn


class Model(nn.Module):
    def __init__(self, n_in, n_out, d, heads, layers, ffn):
        super().__init__()
        self.encoder = nn.Linear(1, d)
        self.position = nn.Parameter(torch.randn(n_in, d) * 0.1)
        layer = nn.TransformerEncoderLayer(d, heads, ffn, dropout=0.1, activation="relu",
                                           batch_first=True, norm_first=True)
        self.layers = nn.TransformerEncoder(layer, layers, enable_nested_tensor=False)
        self.final_norm = nn.LayerNorm(d)
        self.decoder = nn.Linear(d, n_out)
        self.dims = (n_in, n_out, d, heads, layers, ffn)

    def forward(self, x):
        h = self.encoder(x.unsqueeze(-1)) + self.position
        h = self.final_norm(self.layers(h))
        return self.decoder(h.mean(dim=1))


def tensors(model):
    n_in, n_out, d, heads, layers, ffn = model.dims
    t = {"config": torch.tensor([n_in, n_out, d, heads, layers, ffn], dtype=torch.float32)}
    t["encoder.weight"] = model.encoder.weight[:, 0]
    t["encoder.bias"] = model.encoder.bias
    t["position"] = model.position
    for i, L in enumerate(model.layers.layers):
        p = f"layers.{i}."
        w, b = L.self_attn.in_proj_weight, L.self_attn.in_proj_bias
        for j, name in enumerate("qkv"):
            t[p + f"attn.{name}.weight"] = w[j * d:(j + 1) * d]
            t[p + f"attn.{name}.bias"] = b[j * d:(j + 1) * d]
        t[p + "attn.out.weight"] = L.self_attn.out_proj.weight
        t[p + "attn.out.bias"] = L.self_attn.out_proj.bias
        t[p + "norm1.weight"], t[p + "norm1.bias"] = L.norm1.weight, L.norm1.bias
        t[p + "norm2.weight"], t[p + "norm2.bias"] = L.norm2.weight, L.norm2.bias
        t[p + "ffn1.weight"], t[p + "ffn1.bias"] = L.linear1.weight, L.linear1.bias
        t[p + "ffn2.weight"], t[p + "ffn2.bias"] = L.linear2.weight, L.linear2.bias
    t["final_norm.weight"], t["final_norm.bias"] = model.final_norm.weight, model.final_norm.bias
    t["decoder.weight"], t["decoder.bias"] = model.decoder.weight, model.decoder.bias
    t["input_mean"] = torch.zeros(n_in)
    t["input_std"] = torch.ones(n_in)
    t["output_mean"] = torch.zeros(n_out)
    t["output_std"] = torch.ones(n_out)
    return {k: v.detach().to(torch.float32).contiguous() for k, v in t.items()}


def write_tscx(path, t):
    names = sorted(t)
    header = 12 + sum(4 + len(n.encode()) + 8 + 4 * t[n].dim() + 12 for n in names)
    out = bytearray(b"TSCX" + struct.pack("<II", 1, len(names)))
    offset, payload = header, bytearray()
    for n in names:
        raw = t[n].numpy().astype("<f4").tobytes()
        key = n.encode()
        out += struct.pack("<I", len(key)) + key + struct.pack("<II", 0, t[n].dim())
        out += struct.pack(f"<{t[n].dim()}I", *t[n].shape)
        out += struct.pack("<QI", offset, zlib.crc32(raw))
        offset += len(raw)
        payload += raw
    pathlib.Path(path).write_bytes(bytes(out + payload))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tests/data")
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--cases", type=int, default=8)
    args = ap.parse_args()
    torch.manual_seed(args.seed)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    model = Model(17, 24, 32, 2, 2, 128)
    x = torch.randn(64, 17)
    y = (torch.randn(64, 24) > 1.0).float()
    opt = torch.optim.Adam(model.parameters(), lr=1e-3)
    model.train()
    for _ in range(50):
        opt.zero_grad()
        loss = nn.functional.binary_cross_entropy_with_logits(model(x), y)
        loss.backward()
        opt.step()
    model.eval()

    inputs = torch.cat([x[:2], torch.randn(args.cases - 2, 17)])
    with torch.no_grad():
        logits = model(inputs)
    write_tscx(out / "parity_model.tscx", tensors(model))
    fixture = {
        "weights": "parity_model.tscx",
        "tolerance": 1e-4,
        "cases": [{"input": i.tolist(), "logits": o.tolist()} for i, o in zip(inputs.double(), logits.double())],
    }
    (out / "parity_fixture.json").write_text(json.dumps(fixture, indent=1) + "\n")


if __name__ == "__main__":
    main()
