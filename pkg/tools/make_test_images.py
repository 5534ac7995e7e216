"""Generate the bundled 128x128 test images.

Three procedurally built smooth color images with low spikiness and a
fast-decaying spectrum, written as canonical binary PPM.  Run from the
repository root:

    python3 tools/make_test_images.py
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from quatcomp.imageio import image_to_qmatrix, write_ppm  # noqa: E402
from quatcomp.metrics import spikiness  # noqa: E402

N = 128
OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "quatcomp" / \
    "data" / "images"


def to_uint8(channel, lo=70.0, hi=255.0):
    c = np.asarray(channel, dtype=float)
    c = (c - c.min()) / (c.max() - c.min())
    return lo + c * (hi - lo)


def dunes():
    """Separable low-rank waves, different phase per channel."""
    x = np.linspace(0, 1, N)
    y = np.linspace(0, 1, N)
    def ridge(fx, fy, px, py):
        return np.outer(np.sin(2 * np.pi * fy * y + py) + 1.5,
                        np.sin(2 * np.pi * fx * x + px) + 1.5)
    r = ridge(1.5, 1.0, 0.3, 0.1) + 0.5 * ridge(3.0, 2.0, 1.1, 0.7)
    g = ridge(1.5, 1.0, 0.9, 0.4) + 0.5 * ridge(2.0, 3.0, 0.2, 1.9)
    b = ridge(1.0, 1.5, 2.1, 1.2) + 0.4 * ridge(2.5, 2.5, 1.4, 0.3)
    return np.stack([to_uint8(r), to_uint8(g, 60), to_uint8(b, 90)], axis=-1)


def lagoon():
    """Smooth radial blobs on a diagonal gradient."""
    yy, xx = np.meshgrid(np.linspace(-1, 1, N), np.linspace(-1, 1, N),
                         indexing="ij")
    def blob(cx, cy, s):
        return np.exp(-((xx - cx)**2 + (yy - cy)**2) / s)
    base = 0.8 * xx + 0.6 * yy
    r = base + 1.6 * blob(0.4, -0.3, 0.5) + 0.9 * blob(-0.5, 0.5, 0.3)
    g = base + 1.2 * blob(-0.2, -0.4, 0.4) + 1.1 * blob(0.5, 0.4, 0.6)
    b = 1.5 - 0.5 * base + 1.3 * blob(0.0, 0.1, 0.8)
    return np.stack([to_uint8(r, 60), to_uint8(g, 80), to_uint8(b, 100)],
                    axis=-1)


def plaid():
    """Crossed smooth stripes, rank a handful by construction."""
    t = np.linspace(0, 1, N)
    def stripes(freq, phase, sharp):
        s = 0.5 * (1 + np.sin(2 * np.pi * freq * t + phase))
        return s**sharp
    r = np.outer(stripes(2, 0.0, 1.2), np.ones(N)) \
        + np.outer(np.ones(N), stripes(3, 1.0, 1.5))
    g = np.outer(stripes(3, 0.6, 1.0), np.ones(N)) \
        + np.outer(np.ones(N), stripes(2, 0.2, 1.2))
    b = np.outer(stripes(1, 1.8, 1.0), stripes(1, 0.5, 1.0)) * 2.0
    return np.stack([to_uint8(r, 80), to_uint8(g, 70), to_uint8(b, 90)],
                    axis=-1)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, build in [("dunes", dunes), ("lagoon", lagoon),
                        ("plaid", plaid)]:
        img = np.rint(build()).astype(np.uint8)
        spk = spikiness(image_to_qmatrix(img))
        path = OUT / f"{name}.ppm"
        write_ppm(path, img)
        print(f"{path.name}: shape {img.shape}, spikiness {spk:.3f}")
        assert spk < 2.0, "bundled images must stay low-spikiness"


if __name__ == "__main__":
    main()
