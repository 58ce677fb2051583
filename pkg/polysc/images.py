#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Copyright (C) 2022 PolySC contributors.

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU Affero General Public License as
published by the Free Software Foundation, either version 3 of the
License, or (at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
GNU Affero General Public License for more details.

You should have received a copy of the GNU Affero General Public License
along with this program. If not, see <https://www.gnu.org/licenses/>.

Name: Images
Author: PolySC contributors
Date Created: May 18, 2022
Last Modified: June 14, 2022
"""

import pathlib
from typing import Tuple

import numpy as np
from PIL import Image

SYNTHETIC_IMAGES = ("ramp", "checkerboard", "stripes", "random", "document", "video")


def check_image(image) -> np.ndarray:
    """
    validate an 8-bit grayscale image, rounding non-uint8 values

    :rtype np.ndarray: the image as a 2-D uint8 array
    """
    image = np.asarray(image)
    if image.ndim != 2 or image.size == 0:
        raise ValueError(f"expected a non-empty 2-D grayscale image, got shape {image.shape}")
    if image.dtype != np.uint8:
        if not np.issubdtype(image.dtype, np.number) or not np.all(np.isfinite(image)):
            raise ValueError(f"pixel values must be finite numbers, got dtype {image.dtype}")
        if np.any(image < 0) or np.any(image > 255):
            raise ValueError("pixel values must lie in [0, 255]")
        image = np.rint(image).astype(np.uint8)
    return image


def to_intensity(values) -> np.ndarray:
    """map values in [0, 1] to 8-bit intensities, rounding half to even"""
    return np.clip(np.rint(np.asarray(values, dtype=np.float64) * 255), 0, 255).astype(
        np.uint8
    )


def load_image(path: pathlib.Path) -> np.ndarray:
    with Image.open(path) as image:
        return check_image(np.array(image.convert("L")))


def save_image(image: np.ndarray, path: pathlib.Path) -> pathlib.Path:
    """write a binary (P5) PGM file"""
    Image.fromarray(check_image(image), mode="L").save(path, format="PPM")
    return pathlib.Path(path)


def ramp(height: int, width: int) -> np.ndarray:
    """horizontal gray ramp from 0 to 255"""
    row = np.rint(np.linspace(0, 255, width)).astype(np.uint8)
    return np.tile(row, (height, 1))


def checkerboard(height: int, width: int, block: int = 1) -> np.ndarray:
    rows, cols = np.indices((height, width))
    return np.where(((rows // block) + (cols // block)) % 2, 255, 0).astype(np.uint8)


def stripes(height: int, width: int, block: int = 1) -> np.ndarray:
    """vertical black and white stripes, `block` columns wide"""
    cols = np.arange(width)
    row = np.where((cols // block) % 2, 255, 0).astype(np.uint8)
    return np.tile(row, (height, 1))


def random_image(height: int, width: int, seed: int = 0) -> np.ndarray:
    generator = np.random.default_rng(seed)
    return generator.integers(0, 256, size=(height, width), dtype=np.uint8)


def document(height: int, width: int, seed: int = 0) -> np.ndarray:
    """dark lines of words on an unevenly lit page"""
    generator = np.random.default_rng(seed)
    rows, cols = np.indices((height, width))
    page = 120 + 110 * (rows + cols) / max(height + width - 2, 1)

    # a text line every four rows: words of 3 to 6 pixels, one pixel apart
    for top in range(1, height, 4):
        left = int(generator.integers(0, 2))
        while left < width:
            length = int(generator.integers(3, 7))
            page[top, left : left + length] *= 0.25
            left += length + 1

    noise = generator.normal(0, 2, size=(height, width))
    return np.clip(np.rint(page + noise), 0, 255).astype(np.uint8)


def video_frames(
    height: int, width: int, seed: int = 0, history: int = 32, square: int = 4
) -> Tuple[np.ndarray, np.ndarray]:
    """
    static dark textured background; a bright square walks along the top
    rows during the history and has moved to the center in the current frame

    :rtype Tuple[np.ndarray, np.ndarray]: (history frames, current frame)
    """
    generator = np.random.default_rng(seed)
    background = generator.integers(20, 121, size=(height, width)).astype(np.int64)
    step = max(width // 8, 1)
    positions = max(width - square + 1, 1)

    frames = []
    for index in range(history + 1):
        frame = background + generator.integers(-6, 7, size=(height, width))
        if index < history:
            left = (index * step) % positions
            frame[:square, left : left + square] = 240
        else:
            top, left = max((height - square) // 2, 0), max((width - square) // 2, 0)
            frame[top : top + square, left : left + square] = 240
        frames.append(np.clip(frame, 0, 255).astype(np.uint8))

    return np.stack(frames[:history]), frames[history]


def synthetic(name: str, size: int, seed: int = 0):
    """
    named synthetic input; `video` returns (history frames, current frame)
    """
    generators = {
        "ramp": lambda: ramp(size, size),
        "checkerboard": lambda: checkerboard(size, size, 4),
        "stripes": lambda: stripes(size, size, 4),
        "random": lambda: random_image(size, size, seed),
        "document": lambda: document(size, size, seed),
        "video": lambda: video_frames(size, size, seed),
    }
    if name not in generators:
        raise ValueError(f"unknown synthetic image {name!r}, choose from {SYNTHETIC_IMAGES}")
    return generators[name]()
