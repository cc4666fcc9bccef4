"""CUDF documents, the MooML preference language, and an exhaustive optimal solver."""

__version__ = "0.1.0"
