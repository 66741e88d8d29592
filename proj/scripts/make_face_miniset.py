#!/usr/bin/env python3
"""Regenerates data/faces_mini: 20 RGB photos, one face each, with box annotations.

Faces come from the LFW crops bundled with scikit-image. Each crop is upscaled,
tinted, and pasted onto a smooth synthetic background; the paste rectangle is
recorded as the annotation.
"""
import json
import pathlib

import numpy as np
from PIL import Image
from skimage import data

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "faces_mini"
COUNT = 20


def smooth_background(rng, h, w):
    coarse = rng.random((4, 5, 3)) * 90 + 80
    img = Image.fromarray(coarse.astype(np.uint8)).resize((w, h), Image.BICUBIC)
    return np.asarray(img).astype(np.float64)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    faces = data.lfw_subset()[:100]
    rng = np.random.default_rng(20240611)
    annotations = []
    for i in range(COUNT):
        face = (faces[i] * 255).astype(np.uint8)
        h, w = int(rng.integers(200, 260)), int(rng.integers(260, 340))
        size = int(rng.integers(80, min(h, w) - 40))
        x = int(rng.integers(0, w - size))
        y = int(rng.integers(0, h - size))
        big = np.asarray(Image.fromarray(face).resize((size, size), Image.BICUBIC)).astype(np.float64)
        tint = np.array([1.0, 0.86, 0.74]) * rng.uniform(0.9, 1.05)
        canvas = smooth_background(rng, h, w)
        canvas[y:y + size, x:x + size, :] = big[..., None] * tint
        img = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
        name = f"face_{i:02d}.png"
        Image.fromarray(img, "RGB").save(OUT / name)
        annotations.append({"file": name, "box": {"x": x, "y": y, "w": size, "h": size}})
    with open(OUT / "annotations.json", "w") as fh:
        json.dump({"source": "skimage lfw_subset", "images": annotations}, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
