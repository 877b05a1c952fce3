#!/usr/bin/env python3
"""Write the 5000-digit MNIST subset bundled with mlxtend as IDX files.

The subset holds 500 training digits per class (0-9). Usage:

    python3 tools/make_mnist_subset.py [out_dir]

The mlxtend wheel is fetched with `pip download` when it is not installed.
"""
import glob
import gzip
import io
import os
import struct
import subprocess
import sys
import tempfile
import zipfile

import numpy as np

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def read_csv_gz():
    try:
        import mlxtend.data  # noqa: F401
        path = os.path.join(os.path.dirname(mlxtend.data.__file__), "data", "mnist_5k.csv.gz")
        with open(path, "rb") as f:
            return gzip.decompress(f.read())
    except ImportError:
        pass
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.check_call([sys.executable, "-m", "pip", "download", "--no-deps",
                               "-q", "-d", tmp, "mlxtend==0.24.0"])
        wheel = glob.glob(os.path.join(tmp, "mlxtend-*.whl"))[0]
        with zipfile.ZipFile(wheel) as z:
            return gzip.decompress(z.read(MEMBER))


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(os.path.abspath(__file__)), "..", "data", "mnist")
    os.makedirs(out, exist_ok=True)
    table = np.loadtxt(io.BytesIO(read_csv_gz()), delimiter=",").astype(np.uint8)
    pixels, labels = table[:, :-1], table[:, -1]
    n = pixels.shape[0]
    with open(os.path.join(out, "mnist5k-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, 28, 28))
        f.write(pixels.tobytes())
    with open(os.path.join(out, "mnist5k-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(labels.tobytes())
    print(f"wrote {n} digits to {out}")


if __name__ == "__main__":
    main()
