"""Specifications from the worked examples, shipped as package data."""
from importlib import resources

from ..parser import SpecFile, parse_spec

# name -> whether every ground stream term is productive
PRODUCTIVE = {
    "morse": True,
    "fc": True,
    "fc_raw": True,
    "alt_morse": True,
    "alt_morse_raw": True,
    "tailc": True,
    "nonfriendly": True,
    "topterm": False,
    "cycle": False,
}

RAW = ("fc_raw", "alt_morse_raw")


def names():
    return sorted(PRODUCTIVE)


def text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.spec").read_text(encoding="utf-8")


def load(name: str) -> SpecFile:
    return parse_spec(text(name), name)


def spec(name: str):
    return load(name).to_spec()
