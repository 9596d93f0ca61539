"""Repair almost-metrics on finite measure spaces and audit the result.

>>> import metrepair as mr
>>> inst = mr.generate(mr.InstanceSpec("circle", 8))
>>> mr.triangle_defect_scan(inst.kernel, inst.space).violating_mass
0.0
"""

from .admissibility import (
    BallMassProfile,
    CrossCheckReport,
    EntropyReport,
    ball,
    ball_mass_profile,
    epsilon_entropy_exact,
    epsilon_entropy_greedy,
    lemma1_crosscheck,
)
from .core import (
    Kernel,
    MetricInputError,
    NonFiniteKernelError,
    PointSpace,
    SizeLimitError,
    Verdict,
    ViolationReport,
    default_tolerance,
    triangle_defect_scan,
    ultrametric_defect_scan,
    validate,
    violating_pairs,
)
from .correction import (
    CorrectionParams,
    PatchSpec,
    Renormalized,
    SupportResult,
    WindowError,
    limsup_correct,
    patch_from_basepoint,
    renormalize_measure,
    separable_support,
    window_average,
)
from .equivalence import (
    CoincidenceResult,
    TransferReport,
    coincidence_support,
    disagreement_graph,
    transfer_inequality_check,
)
from .generators import (
    Corruption,
    Instance,
    InstanceSpec,
    essential_diameter_sets,
    generate,
)
from .sampling import Fingerprint, fingerprint, fingerprint_compare, sample_distance_matrix
from .ultrametric import INF, PowerLadder, monotonicity_report, power_mean_correct

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
