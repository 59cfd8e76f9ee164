"""Symbolic-dynamics classification lab: densities, the Besicovitch
pseudometric, equicontinuity probes, sequence entropy and periodic
structures for a handful of example subshifts."""

__version__ = "0.1.0"

from .density import TimeSet, DensityProfile, window_density, density_profile, exact_density, pigeonhole_select
from .points import SymbolicPoint
from .systems import (
    Cylinder,
    SubshiftModel,
    full_shift,
    language,
    powers_subshift,
    regular_toeplitz_example,
    single_one_subshift,
    sturmian_model,
)
from .verdict import ProbeVerdict, Verdict
from .besicovitch import besicovitch_ball_test, besicovitch_db, disagreement_density
from .probes import diam_mean_probe, mean_equicontinuity_probe, mean_sensitivity_witness
from .seqentropy import (
    IndependenceCertificate,
    PositionSet,
    empirical_partition_entropy,
    independence_search,
    pattern_count,
    seq_entropy_estimate,
    seqentr_builder,
)
from .structure import PeriodicStructure, Progression
from .factor import extract_periodic_structure, regularity_check, sturmian_fiber_ambiguity
from .suite import SuiteConfig, emit_report, run_suite
