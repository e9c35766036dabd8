#!/usr/bin/env python3
"""Convert torchvision VGG-16 conv1_1..conv3_3 weights to a TNETARC1 archive.

    python tools/export_vgg16.py --out vgg16.tnetarc
    python tools/export_vgg16.py --state-dict vgg16-397923af.pth --out vgg16.tnetarc

Then train with --set extractor=pretrained-vgg16 --set extractor_weights=vgg16.tnetarc.
"""

import argparse
import json
import struct

import numpy as np

CONV_INDICES = [0, 2, 5, 7, 10, 12, 14]


def load_state_dict(args):
    import torch
    import torchvision

    if args.state_dict:
        return torch.load(args.state_dict, map_location="cpu")
    weights = None if args.untrained else torchvision.models.VGG16_Weights.IMAGENET1K_V1
    return torchvision.models.vgg16(weights=weights).state_dict()


def write_archive(path, tensors, meta):
    entries, blobs, offset = [], [], 0
    for name, array in tensors:
        data = np.ascontiguousarray(array, dtype="<f4").tobytes()
        entries.append({"name": name, "shape": list(array.shape), "dtype": "float32",
                        "offset": offset, "nbytes": len(data)})
        blobs.append(data)
        offset += len(data)
    header = json.dumps({"meta": meta, "tensors": entries}).encode()
    with open(path, "wb") as f:
        f.write(b"TNETARC1")
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        for blob in blobs:
            f.write(blob)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", required=True)
    p.add_argument("--state-dict", help="local torchvision vgg16 .pth file (skips the download)")
    p.add_argument("--untrained", action="store_true", help="random weights, for format tests only")
    args = p.parse_args()

    state = load_state_dict(args)
    tensors = []
    for idx in CONV_INDICES:
        w = state[f"features.{idx}.weight"].detach().cpu().numpy()
        b = state[f"features.{idx}.bias"].detach().cpu().numpy()
        tensors.append((f"features.{idx}.weight", w))
        tensors.append((f"features.{idx}.bias", b.reshape(1, -1, 1, 1)))
    write_archive(args.out, tensors, {"source": "torchvision vgg16", "untrained": args.untrained})
    print(f"wrote {len(tensors)} tensors to {args.out}")


if __name__ == "__main__":
    main()
