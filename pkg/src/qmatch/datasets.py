"""Bundled salary quartile datasets for eight European countries.

Each CSV ships inside the package and holds the three gross annual
salary quartiles together with the survey sample size.  The scale
divisor recorded in every file is the median salary, so normalizing
after load yields data on the unit-median scale the fits use.
"""

from __future__ import annotations

from importlib import resources

from .dataio import read_dataset
from .orderstats import QuantileObservation

__all__ = ["COUNTRY_CODES", "dataset_path", "load_salaries"]

COUNTRY_CODES = ("EL", "ES", "FR", "IT", "LU", "NL", "SE", "UK")


def _normalize_code(code: str) -> str:
    c = str(code).upper()
    if c not in COUNTRY_CODES:
        raise ValueError(f"unknown country code {code!r}; choices: "
                         f"{', '.join(COUNTRY_CODES)}")
    return c


def dataset_path(code: str):
    """Traversable path of the bundled CSV for one country code."""
    c = _normalize_code(code)
    return resources.files("qmatch").joinpath("data", f"{c.lower()}.csv")


def load_salaries(code: str) -> QuantileObservation:
    """Raw quartile observation for one country (not yet normalized)."""
    with resources.as_file(dataset_path(code)) as path:
        return read_dataset(path)
