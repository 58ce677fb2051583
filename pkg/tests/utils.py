#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import numpy as np

from polysc.circuits import PIXEL_SLOT, RunConfig
from polysc.images import to_intensity
from polysc.sng import ClockDomain, Lfsr, SngConfig, generate, random_clock
from polysc.waveform import Waveform


def sync_clock(length: int = 1024, period: float = 2.0) -> ClockDomain:
    return ClockDomain.from_ns(period, horizon=length * period)


def stream(target: float, seed: int, clock: ClockDomain, width: int = 10) -> Waveform:
    """SNG output for a target probability on a maximal-length LFSR"""
    return generate(SngConfig(target, Lfsr.maximal(width, seed), clock))


def unsynchronized_clocks(seed: int, count: int = 2, length: int = 1024):
    """local clocks with periods in [2, 4] ns sharing one horizon"""
    return [
        random_clock((seed, index), 2.0, 4.0, length * 4.0) for index in range(count)
    ]


def bitstream_robert(image: np.ndarray, config: RunConfig) -> np.ndarray:
    """
    discrete bit-vector simulation of the Robert's cross array

    every cell draws its four pixel streams from one shared LFSR and its
    select stream from a second one, one bit per clock cycle
    """
    height, width = image.shape
    length = config.stream_length
    normalized = image.astype(np.float64) / 255.0
    output = np.zeros((height, width), dtype=np.float64)

    def bits(lfsr: Lfsr, target: float) -> np.ndarray:
        threshold = int(np.floor(target * (1 << lfsr.width) + 0.5))
        return lfsr.values(length) < threshold

    for row in range(height):
        for col in range(width):
            below = min(row + 1, height - 1)
            right = min(col + 1, width - 1)
            shared = config.lfsr(row, col, PIXEL_SLOT)
            r00 = bits(shared, normalized[row, col])
            r11 = bits(shared, normalized[below, right])
            r01 = bits(shared, normalized[row, right])
            r10 = bits(shared, normalized[below, col])
            select = bits(config.lfsr(row, col, 1), 0.5)
            out = np.where(select, r01 ^ r10, r00 ^ r11)
            output[row, col] = int(out.sum()) / length

    return to_intensity(output)
