#!/usr/bin/env python3
"""Build a small MNIST-format subset as IDX files.

Sources, in order of preference:
  --mnist-dir DIR   the original IDX files (train-images-idx3-ubyte etc.)
  otherwise         the 10,000 digits bundled with the npm package `mnist`
                    plus the 5,000 digits bundled with the Python package
                    `mlxtend`, fetched with `npm pack` / `pip download` when
                    not given explicitly.

Writes {train,valid,test}-{images,labels}.idx{3,1}-ubyte into --out.
"""

import argparse
import gzip
import io
import json
import subprocess
import sys
import tarfile
import tempfile
import zipfile
from pathlib import Path

import numpy as np


def write_idx_images(path, images):
    n = images.shape[0]
    header = np.array([0x00000803, n, 28, 28], dtype=">u4").tobytes()
    path.write_bytes(header + images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    header = np.array([0x00000801, labels.shape[0]], dtype=">u4").tobytes()
    path.write_bytes(header + labels.astype(np.uint8).tobytes())


def read_idx(path):
    data = Path(path).read_bytes()
    if str(path).endswith(".gz"):
        data = gzip.decompress(data)
    magic = int.from_bytes(data[0:4], "big")
    ndim = magic & 0xFF
    dims = [int.from_bytes(data[4 + 4 * i : 8 + 4 * i], "big") for i in range(ndim)]
    body = np.frombuffer(data, dtype=np.uint8, offset=4 + 4 * ndim)
    return body.reshape(dims[0], -1) if ndim > 1 else body


def find(dirpath, stem):
    for name in (stem, stem + ".gz", stem.replace("-idx", ".idx"), stem.replace("-idx", ".idx") + ".gz"):
        p = Path(dirpath) / name
        if p.exists():
            return p
    sys.exit(f"missing {stem} in {dirpath}")


def from_mnist_dir(d):
    xs = [read_idx(find(d, "train-images-idx3-ubyte")), read_idx(find(d, "t10k-images-idx3-ubyte"))]
    ys = [read_idx(find(d, "train-labels-idx1-ubyte")), read_idx(find(d, "t10k-labels-idx1-ubyte"))]
    return np.concatenate(xs), np.concatenate(ys)


def npm_digits(tgz):
    xs, ys = [], []
    with tarfile.open(tgz) as tar:
        for digit in range(10):
            member = tar.extractfile(f"package/src/digits/{digit}.json")
            flat = np.asarray(json.load(member)["data"], dtype=np.float64)
            images = np.rint(flat.reshape(-1, 784) * 255).astype(np.uint8)
            xs.append(images)
            ys.append(np.full(images.shape[0], digit, dtype=np.uint8))
    return np.concatenate(xs), np.concatenate(ys)


def mlxtend_digits(wheel):
    with zipfile.ZipFile(wheel) as z:
        raw = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz"))
    table = np.loadtxt(io.BytesIO(raw), delimiter=",")
    return table[:, :-1].astype(np.uint8), table[:, -1].astype(np.uint8)


def fetch(cache, npm_tgz, wheel):
    cache.mkdir(parents=True, exist_ok=True)
    if npm_tgz is None:
        subprocess.run(["npm", "pack", "mnist@1.1.0", "--pack-destination", str(cache)],
                       check=True, stdout=subprocess.DEVNULL)
        npm_tgz = cache / "mnist-1.1.0.tgz"
    if wheel is None:
        subprocess.run([sys.executable, "-m", "pip", "download", "mlxtend==0.24.0", "--no-deps",
                        "-d", str(cache), "-q"], check=True)
        wheel = next(cache.glob("mlxtend-0.24.0-*.whl"))
    return Path(npm_tgz), Path(wheel)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", required=True, type=Path)
    ap.add_argument("--mnist-dir", type=Path)
    ap.add_argument("--npm-tgz", type=Path, help="mnist-1.1.0.tgz from `npm pack mnist@1.1.0`")
    ap.add_argument("--mlxtend-wheel", type=Path, help="mlxtend-0.24.0 wheel")
    ap.add_argument("--train", type=int, default=10000)
    ap.add_argument("--valid", type=int, default=2000)
    ap.add_argument("--test", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if args.mnist_dir:
        x, y = from_mnist_dir(args.mnist_dir)
    else:
        with tempfile.TemporaryDirectory() as tmp:
            tgz, wheel = fetch(Path(tmp), args.npm_tgz, args.mlxtend_wheel)
            x1, y1 = npm_digits(tgz)
            x2, y2 = mlxtend_digits(wheel)
        x, y = np.concatenate([x1, x2]), np.concatenate([y1, y2])

    need = args.train + args.valid + args.test
    if need > x.shape[0]:
        sys.exit(f"requested {need} samples but only {x.shape[0]} are available")
    order = np.random.default_rng(args.seed).permutation(x.shape[0])[:need]
    x, y = x[order], y[order]

    args.out.mkdir(parents=True, exist_ok=True)
    bounds = {"train": (0, args.train),
              "valid": (args.train, args.train + args.valid),
              "test": (args.train + args.valid, need)}
    for name, (lo, hi) in bounds.items():
        write_idx_images(args.out / f"{name}-images.idx3-ubyte", x[lo:hi])
        write_idx_labels(args.out / f"{name}-labels.idx1-ubyte", y[lo:hi])
        counts = np.bincount(y[lo:hi], minlength=10)
        print(f"{name}: {hi - lo} samples, per class {counts.tolist()}")


if __name__ == "__main__":
    main()
