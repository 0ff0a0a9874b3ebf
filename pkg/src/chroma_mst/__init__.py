"""Chromatic persistence 1-norms, Euclidean and lunar minimum spanning trees of planar point sets."""

from .analytics import cl_bounds, expected_moment, lower_incomplete_gamma, theorem31_pipeline
from .delaunay import Mosaic, triangulate, validate
from .filtration import FilteredMosaic, moment_counters, radius_values
from .geom import Topology
from .lunar import LunarTree, lunar_emst, relative1_norm
from .persistence import Diagram, emst, h0_diagram, h1_diagram, one_norm
from .sixpack import SixPackNorms, derive_norms, table1_constants

__version__ = "0.1.0"

__all__ = [
    "Topology",
    "Mosaic",
    "triangulate",
    "validate",
    "FilteredMosaic",
    "radius_values",
    "moment_counters",
    "Diagram",
    "emst",
    "h0_diagram",
    "h1_diagram",
    "one_norm",
    "LunarTree",
    "lunar_emst",
    "relative1_norm",
    "SixPackNorms",
    "derive_norms",
    "table1_constants",
    "lower_incomplete_gamma",
    "expected_moment",
    "theorem31_pipeline",
    "cl_bounds",
]
