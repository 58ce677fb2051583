#!/usr/bin/python
# -*- coding: utf-8 -*-

import numpy as np
import pytest

from polysc.images import (
    check_image,
    document,
    load_image,
    random_image,
    save_image,
    stripes,
    synthetic,
    to_intensity,
    video_frames,
)


def test_pgm_round_trip(tmp_path):
    image = random_image(6, 9, seed=4)
    path = save_image(image, tmp_path / "image.pgm")
    assert path.read_bytes()[:2] == b"P5"
    assert np.array_equal(load_image(path), image)


def test_check_image():
    with pytest.raises(ValueError):
        check_image(np.zeros((2, 2, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        check_image(np.array([[0, 256]]))
    assert check_image(np.array([[0, 255]])).dtype == np.uint8
    with pytest.raises(ValueError):
        check_image(np.array([[0.0, np.nan]]))


def test_check_image_rounds_floats():
    image = check_image(np.array([[0.9, 127.5, 254.6]]))
    assert image.dtype == np.uint8
    assert image.tolist() == [[1, 128, 255]]


def test_to_intensity():
    assert to_intensity([0.0, 0.5, 1.0, -0.1, 1.2]).tolist() == [0, 128, 255, 0, 255]


def test_stripes_are_vertical():
    image = stripes(3, 8, 2)
    assert image[0].tolist() == [0, 0, 255, 255, 0, 0, 255, 255]
    assert (image == image[0]).all()


def test_video_frames():
    history, current = video_frames(16, 16, seed=1)
    assert history.shape == (32, 16, 16)
    assert current.shape == (16, 16)
    assert (current == 240).sum() == 16
    assert (current[6:10, 6:10] == 240).all()
    # the square only ever visits the top rows before the current frame
    assert (history[:, 4:] < 240).all()
    assert (history[:, :4] == 240).any(axis=(1, 2)).all()


def test_document_lines_cross_the_page():
    image = document(16, 16, seed=3).astype(np.int64)
    for row in range(1, 16, 4):
        assert (image[row] < 80).sum() >= 10
    assert (image[0] > 100).all()


def test_synthetic_inputs():
    assert synthetic("random", 8, seed=2).shape == (8, 8)
    assert np.array_equal(synthetic("random", 8, seed=2), synthetic("random", 8, seed=2))
    with pytest.raises(ValueError):
        synthetic("noise", 8)
