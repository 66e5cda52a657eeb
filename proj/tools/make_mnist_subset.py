#!/usr/bin/env python3
"""Build IDX files from the 5000-image MNIST subset shipped inside mlxtend.

The subset holds the first 500 training images of each digit, grouped by
digit, in training-file order. Within-digit occurrence order is therefore the
same as in the full training set, which is all exemplar selection relies on.

Usage:
  pip download --no-deps mlxtend -d /tmp/whl
  python3 tools/make_mnist_subset.py --wheel /tmp/whl/mlxtend-*.whl --out data/mnist
"""

import argparse
import gzip
import pathlib
import struct
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def load_rows(args):
    if args.csv:
        raw = pathlib.Path(args.csv).read_bytes()
    elif args.wheel:
        with zipfile.ZipFile(args.wheel) as z:
            raw = z.read(MEMBER)
    else:
        import mlxtend  # noqa: F401

        base = pathlib.Path(mlxtend.__file__).parent
        raw = (base / "data" / "data" / "mnist_5k.csv.gz").read_bytes()
    text = gzip.decompress(raw).decode()
    rows = []
    for line in text.splitlines():
        vals = [int(float(v)) for v in line.split(",")]
        rows.append((vals[:-1], vals[-1]))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel", help="path to an mlxtend wheel")
    ap.add_argument("--csv", help="path to mnist_5k.csv.gz")
    ap.add_argument("--out", default="data/mnist")
    args = ap.parse_args()

    rows = load_rows(args)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "train-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(rows), 28, 28))
        for px, _ in rows:
            f.write(bytes(px))
    with open(out / "train-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(rows)))
        f.write(bytes(label for _, label in rows))
    print(f"wrote {len(rows)} records to {out}")


if __name__ == "__main__":
    main()
