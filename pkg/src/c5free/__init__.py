"""Exact tooling for the maximum number of induced 5-cycles in triangle-free graphs."""

from importlib import resources

__version__ = "0.1.0"


def bundled_certificate(name: str):
    """Path-like handle to one of the shipped certificates (``upper_l5``, ``lowbound_l6``, ``tightup_l6``)."""
    return resources.files(__name__).joinpath("certificates", f"{name}.json")
