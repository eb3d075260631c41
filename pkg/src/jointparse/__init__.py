"""Joint morphological disambiguation and dependency parsing over lattices."""

from jointparse.core import (
    DEFAULT_TAGSET,
    DepTree,
    LatticeArc,
    MorphFeatures,
    MorphPath,
    SentenceLattice,
    Tagset,
    check_projective,
    count_paths,
    enumerate_paths,
    validate_lattice,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TAGSET",
    "DepTree",
    "LatticeArc",
    "MorphFeatures",
    "MorphPath",
    "SentenceLattice",
    "Tagset",
    "check_projective",
    "count_paths",
    "enumerate_paths",
    "validate_lattice",
    "__version__",
]
