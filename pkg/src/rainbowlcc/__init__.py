"""Locally correctable code instances, rainbow-cycle search and sparse-representation compression."""

__version__ = "0.1.0"
