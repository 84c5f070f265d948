"""Multipoint Seshadri constants and Kahler ball packings on blow-ups of projective space."""

__version__ = "0.1.0"
