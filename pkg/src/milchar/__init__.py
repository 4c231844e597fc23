"""Characterize multiple-instance datasets by how a zoo of MIL classifiers behaves on them."""

__version__ = "0.1.0"
