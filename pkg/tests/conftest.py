from __future__ import annotations

import os
from pathlib import Path

import pytest


def data_root() -> Path:
    """Where the optional real datasets live. The public downloads are not
    vendored; tests that need them skip when the files are absent."""
    return Path(os.environ.get("TRAJKIT_DATA", Path(__file__).resolve().parent.parent / "data"))


def carbus_dir() -> Path:
    return data_root() / "carbus"


def geolife_dir() -> Path:
    return data_root() / "geolife" / "Data"


def require_carbus() -> Path:
    d = carbus_dir()
    if not (d / "go_track_tracks.csv").is_file() or not (d / "go_track_points.csv").is_file():
        pytest.skip(
            f"car/bus data not present under {d} (UCI 'GPS Trajectories' download; "
            "place go_track_tracks.csv and go_track_points.csv there, or set TRAJKIT_DATA)")
    return d


def require_geolife() -> Path:
    d = geolife_dir()
    if not d.is_dir():
        pytest.skip(
            f"Geolife data not present under {d} (public Geolife GPS trajectory download; "
            "place its Data directory there, or set TRAJKIT_DATA)")
    return d
