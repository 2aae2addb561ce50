"""Distinct distances, discrete energies and distance measures for point sets on S^2."""

from .distance_set import (
    DistanceSpectrum,
    Quantization,
    cauchy_schwarz_bound,
    distance_spectrum,
    distinct_count,
    requantize,
)
from .energy import (
    DuplicatePointError,
    EnergyReport,
    GrowthFit,
    VerificationRecord,
    discrete_energy,
    energy_growth_fit,
    fit_growth,
    theorem_ratio,
)
from .generators import (
    FAMILIES,
    CurvedRectangle,
    PointSet,
    SpherePartition,
    concentrated_rectangle_set,
    generate,
    great_circle_equispaced,
    homogeneous_set,
    maximal_separated_set,
    sphere_partition,
)
from .harness import ExperimentConfig, ExperimentReport, run_experiment, run_measure_suite
from .sphere import Rotation, UnitVector, angular_distance, chordal_distance

__version__ = "0.1.0"
