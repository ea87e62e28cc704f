#!/usr/bin/env python3
"""Convert the per-class JSON dump shipped by the `fashion-mnist` npm package
into the four standard IDX files (60000 train / 10000 test).

The npm dump does not preserve the official split; the first 6000 images of
each class go to train and the last 1000 to test, then both splits are
shuffled with a fixed seed.
"""
import argparse
import json
import pathlib
import random
import struct


def write_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("clothes_dir", help="directory holding 0.json .. 9.json")
    ap.add_argument("out_dir")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    train, test = [], []
    for c in range(10):
        rows = json.load(open(pathlib.Path(args.clothes_dir) / f"{c}.json"))["data"]
        # the dump contains a few empty placeholder rows
        rows = [r for r in rows if len(r) == 28 * 28]
        train += [(r, c) for r in rows[:6000]]
        test += [(r, c) for r in rows[-1000:]]
    rng = random.Random(args.seed)
    rng.shuffle(train)
    rng.shuffle(test)

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, split in (("train", train), ("t10k", test)):
        write_images(out / f"{name}-images-idx3-ubyte", [r for r, _ in split])
        write_labels(out / f"{name}-labels-idx1-ubyte", [c for _, c in split])


if __name__ == "__main__":
    main()
