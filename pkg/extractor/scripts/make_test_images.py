"""Regenerate the three bundled test images under tests/images/.

Small deterministic 96x96 PNGs with distinct content so their
embeddings are far apart: a diagonal color gradient, concentric rings,
and seeded uniform noise.
"""

import sys
from pathlib import Path

import numpy as np
from PIL import Image

OUT = Path(__file__).resolve().parents[1] / "tests" / "images"
SIZE = 96


def gradient() -> np.ndarray:
    y, x = np.mgrid[0:SIZE, 0:SIZE]
    r = (255 * x / (SIZE - 1)).astype(np.uint8)
    g = (255 * y / (SIZE - 1)).astype(np.uint8)
    b = (255 * (x + y) / (2 * SIZE - 2)).astype(np.uint8)
    return np.stack([r, g, b], axis=-1)


def rings() -> np.ndarray:
    y, x = np.mgrid[0:SIZE, 0:SIZE]
    center = (SIZE - 1) / 2
    dist = np.hypot(x - center, y - center)
    band = ((dist // 8) % 2 == 0)
    img = np.zeros((SIZE, SIZE, 3), dtype=np.uint8)
    img[band] = (220, 60, 30)
    img[~band] = (20, 90, 200)
    return img


def noise() -> np.ndarray:
    rng = np.random.default_rng(12345)
    return rng.integers(0, 256, size=(SIZE, SIZE, 3), dtype=np.uint8)


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, pixels in [("gradient.png", gradient()),
                         ("rings.png", rings()),
                         ("noise.png", noise())]:
        Image.fromarray(pixels, mode="RGB").save(OUT / name)
        print(f"wrote {OUT / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
