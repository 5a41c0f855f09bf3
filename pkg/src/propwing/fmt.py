"""Numeric formatting for data files: shortest exact round-trip decimal."""


def fnum(x) -> str:
    """repr of a Python float: parses back bit-identically via float()."""
    return repr(float(x))
