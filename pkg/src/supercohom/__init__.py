"""Relative cohomology, invariant rings and support varieties of classical Lie superalgebras."""

from .algebra import LieSuperalgebra, bracket, build, roots, validate
from .cohomology import (
    RelativeComplex,
    annihilator_truncated,
    avrunin_scott_compare,
    cohomology_dims,
    module_action,
)
from .detecting import assemble_detecting, closed_orbit_precheck, detection_data, make_x0
from .errors import (
    AlgebraMismatch,
    ClosureFailure,
    DegenerateCoefficients,
    DimensionMismatch,
    InvalidParams,
    NoForm,
    NonSemisimpleH,
    NotPolar,
    SupercohomError,
    UnknownFamily,
)
from .invariants import DimensionSeries, generator_degrees, invariant_dimensions, predicted_series
from .modules import Supermodule, is_projective_over_x, rank_variety_probe
from .weights import atypicality, cohomological_defect, defect_combinatorial, rho

__version__ = "0.1.0"

__all__ = [
    "AlgebraMismatch",
    "ClosureFailure",
    "DegenerateCoefficients",
    "DimensionMismatch",
    "DimensionSeries",
    "InvalidParams",
    "LieSuperalgebra",
    "NoForm",
    "NonSemisimpleH",
    "NotPolar",
    "RelativeComplex",
    "SupercohomError",
    "Supermodule",
    "UnknownFamily",
    "annihilator_truncated",
    "assemble_detecting",
    "atypicality",
    "avrunin_scott_compare",
    "bracket",
    "build",
    "closed_orbit_precheck",
    "cohomological_defect",
    "cohomology_dims",
    "defect_combinatorial",
    "detection_data",
    "generator_degrees",
    "invariant_dimensions",
    "is_projective_over_x",
    "make_x0",
    "module_action",
    "predicted_series",
    "rank_variety_probe",
    "rho",
    "roots",
    "validate",
]
