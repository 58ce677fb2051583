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

Name: Configuration
Author: PolySC contributors
Date Created: May 25, 2022
Last Modified: June 18, 2022

Experiment configuration files. Keys are addressed as section.key, e.g.

    [lfsr]
    width = 10

sets lfsr.width.
"""

import configparser
import pathlib
from typing import Any, Callable, Dict, Iterable, Mapping, Tuple

from .errors import ConfigError


def _optional(parser: Callable[[str], Any]) -> Callable[[str], Any]:
    return lambda text: None if text.strip() == "" else parser(text)


def _tuple(item: Callable[[str], Any]) -> Callable[[str], Tuple]:
    return lambda text: tuple(item(part.strip()) for part in text.split(",") if part.strip())


def _boolean(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "yes", "true", "on"):
        return True
    if lowered in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# config key -> (TrialConfig field, parser)
CONFIG_KEYS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "circuit.kind": ("circuit", str),
    "circuit.window": ("window", int),
    "circuit.kde.threshold": ("kde_threshold", float),
    "circuit.kde.history": ("kde_history", int),
    "circuit.sourcing": ("sourcing", str),
    "circuit.comparator.states": ("comparator_states", int),
    "circuit.exp.states": ("exp_states", int),
    "circuit.exp.g": ("exp_g", int),
    "lfsr.width": ("lfsr_width", int),
    "lfsr.taps": ("lfsr_taps", _optional(_tuple(int))),
    "sng.master_seed": ("master_seed", int),
    "sng.invert": ("invert", _boolean),
    "clock.min_ns": ("clock_min", float),
    "clock.max_ns": ("clock_max", float),
    "clock.sync_ns": ("sync_period", float),
    "stream.length": ("stream_length", int),
    "spike.min_width_ns": ("spike_width", float),
    "experiment.trials": ("trials", int),
    "experiment.modes": ("modes", _tuple(str)),
    "experiment.rates": ("fault_rates", _tuple(float)),
    "experiment.workers": ("workers", int),
    "image.input": ("input", _optional(pathlib.Path)),
    "image.frames": ("frames", _optional(pathlib.Path)),
    "image.synthetic": ("synthetic", _optional(str)),
    "image.size": ("size", int),
    "image.seed": ("image_seed", int),
    "output.directory": ("output", pathlib.Path),
}


def parse_value(key: str, text: str) -> Tuple[str, Any]:
    """
    parse one section.key value

    :rtype Tuple[str, Any]: the TrialConfig field name and the parsed value
    """
    if key not in CONFIG_KEYS:
        raise ConfigError(f"unknown configuration key {key!r}")
    field_name, parser = CONFIG_KEYS[key]
    try:
        return field_name, parser(text)
    except ValueError as error:
        raise ConfigError(f"invalid value for {key}: {text!r} ({error})") from error


def parse_overrides(pairs: Iterable[str]) -> Dict[str, Any]:
    """parse KEY=VALUE command line overrides"""
    values = {}
    for pair in pairs:
        key, separator, text = pair.partition("=")
        if not separator:
            raise ConfigError(f"override {pair!r} is not of the form KEY=VALUE")
        field_name, value = parse_value(key.strip(), text)
        values[field_name] = value
    return values


def load_config(path: pathlib.Path) -> Dict[str, Any]:
    """
    read a configuration file

    :rtype Dict[str, Any]: parsed values keyed by TrialConfig field name
    """
    parser = configparser.ConfigParser(interpolation=None)
    with open(path, encoding="utf-8") as config_file:
        try:
            parser.read_file(config_file)
        except configparser.Error as error:
            raise ConfigError(f"cannot parse {path}: {error}") from error

    values = {}
    for section in parser.sections():
        for key, text in parser.items(section):
            field_name, value = parse_value(f"{section}.{key}", text)
            values[field_name] = value
    return values


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ", ".join(format_value(item) for item in value)
    return str(value)


def dump_config(values: Mapping[str, Any], path: pathlib.Path) -> pathlib.Path:
    """write field values back out in the sectioned key format"""
    parser = configparser.ConfigParser(interpolation=None)
    for key, (field_name, _) in CONFIG_KEYS.items():
        section, _, option = key.partition(".")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, option, format_value(values.get(field_name)))

    with open(path, "w", encoding="utf-8") as config_file:
        parser.write(config_file)
    return pathlib.Path(path)
