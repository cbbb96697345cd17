"""Exact-arithmetic artifacts around the Banach fixed point property of compact sets.

Subpackages: ``numerics`` (rationals and finite point sets), ``contraction``
(piecewise-affine maps, certified iteration), ``witness`` (the diagonal
construction and its verifier), ``coverage`` (non-coverage certificates),
``counterexamples`` (fixed-point-free contractions) and ``cli``.
"""

__version__ = "0.1.0"
