"""Planning with action descriptions through functional stable models.

Pipeline: parse a description, translate it to the time-stamped program
D_m, check tightness, complete it, emit SMT-LIB2, solve, decode and
re-verify the plan.  :mod:`aspmt.oracle` is a brute-force reference for the
stable model semantics on finite sorts.
"""

from pathlib import Path

__version__ = "0.1.0"

CORPUS = Path(__file__).parent / "corpus"


def corpus_path(name: str) -> Path:
    """Path of a bundled example description (``car``, ``spacecraft``, ``watertank``)."""
    return CORPUS / (name if name.endswith(".cp") else name + ".cp")


__all__ = ["__version__", "CORPUS", "corpus_path"]
