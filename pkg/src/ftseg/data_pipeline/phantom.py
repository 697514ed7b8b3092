"""Synthetic ellipse phantoms: desk-scale stand-in for gated ultrasound data.

Each phantom is a speckle background with one filled bright ellipse and a
brighter elliptical rim; the mask is the filled ellipse. Everything is
determined by the seed.
"""

from __future__ import annotations

import cv2
import numpy as np

from .sample import Sample

# Full axis lengths as a fraction of image size; keeps the mask area
# fraction inside (0.02, 0.6) for all draws.
AXIS_FRACTION = (0.18, 0.40)


def synthesize_phantoms(n: int, seed: int, size: int = 128) -> list:
    if n < 1:
        raise ValueError("n must be >= 1")
    if size % 32 != 0:
        raise ValueError(f"size {size} not divisible by 32")
    return [_make_phantom(i, np.random.default_rng(np.random.SeedSequence([seed, i])), size)
            for i in range(n)]


def _make_phantom(index: int, rng: np.random.Generator, size: int) -> Sample:
    axes = rng.uniform(AXIS_FRACTION[0] * size, AXIS_FRACTION[1] * size, size=2)
    semi = axes / 2.0
    angle = rng.uniform(0.0, 180.0)
    margin = float(semi.max()) + 4.0
    center = rng.uniform(margin, size - margin, size=2)

    speckle = rng.rayleigh(scale=22.0, size=(size, size))
    mask = np.zeros((size, size), dtype=np.uint8)
    cv2.ellipse(mask, (round(center[0]), round(center[1])),
                (round(semi[0]), round(semi[1])), angle, 0, 360, 1, thickness=-1)
    rim = np.zeros((size, size), dtype=np.uint8)
    cv2.ellipse(rim, (round(center[0]), round(center[1])),
                (round(semi[0]), round(semi[1])), angle, 0, 360, 1, thickness=2)

    image = speckle.copy()
    image[mask == 1] += 70.0 + 40.0 * rng.random()
    image[rim == 1] += 80.0
    image = np.clip(image, 0, 255).astype(np.uint8)
    return Sample(f"phantom_{index:04d}", image, mask).validate()
