"""splitsim: round-based simulator and verification suite for randomized
distributed vertex-splitting algorithms, with edge- and list-coloring
applications built on a constructive Lovász Local Lemma engine."""

from ._core import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
