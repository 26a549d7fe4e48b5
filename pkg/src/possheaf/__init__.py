"""Exact homological algebra for sheaves of vector spaces on finite posets.

Everything is computed over an exact field (rationals by default), so ranks,
spectral sequence pages and filtrations are exact, never approximate.
"""

__version__ = "0.1.0"
