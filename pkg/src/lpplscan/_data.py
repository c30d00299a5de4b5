"""Paths of the data files shipped inside the package."""

from importlib import resources
from pathlib import Path


def data_file(name: str) -> Path:
    return Path(str(resources.files("lpplscan") / "data" / name))
