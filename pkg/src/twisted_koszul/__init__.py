"""Exact-rational engine for twisted Koszul resolutions on formal atlases."""

__version__ = "0.1.0"
