"""Build the 224x224 RGB photo fixtures used by the acceptance suite.

Sources are the sample photographs bundled with scikit-image and
scikit-learn. Each fixture is a seeded random square crop resized with
Lanczos filtering; grayscale sources are replicated to three channels.

    python3 tools/make_photo_fixtures.py crates/cli/tests/fixtures/photos
"""

import os
import sys

import numpy as np
from PIL import Image
import skimage
import sklearn

SIDE = 224
COUNT = 50
SEED = 20231017

SKIMAGE_SOURCES = [
    "astronaut.png",
    "chelsea.png",
    "coffee.png",
    "motorcycle_left.png",
    "motorcycle_right.png",
    "rocket.jpg",
    "camera.png",
    "coins.png",
    "moon.png",
    "brick.png",
    "grass.png",
    "gravel.png",
]
SKLEARN_SOURCES = ["china.jpg", "flower.jpg"]


def sources():
    sk = os.path.join(os.path.dirname(skimage.__file__), "data")
    sl = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "images")
    paths = [os.path.join(sk, n) for n in SKIMAGE_SOURCES]
    paths += [os.path.join(sl, n) for n in SKLEARN_SOURCES]
    return [Image.open(p).convert("RGB") for p in paths]


def main(out_dir):
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(SEED)
    images = sources()
    for idx in range(COUNT):
        img = images[idx % len(images)]
        w, h = img.size
        short = min(w, h)
        side = int(rng.integers(min(SIDE, short), short + 1))
        left = int(rng.integers(0, w - side + 1))
        top = int(rng.integers(0, h - side + 1))
        crop = img.crop((left, top, left + side, top + side))
        crop = crop.resize((SIDE, SIDE), Image.LANCZOS)
        crop.save(os.path.join(out_dir, f"photo_{idx:02}.png"), optimize=True)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/cli/tests/fixtures/photos")
