"""Finite-scale rescaled metric and topological pressure for flows with
singularities: Bowen-ball oracles, empirical-measure covers, spanning and
separating sets, and itinerary entropy, with benchmark systems and a CLI."""

__version__ = "0.1.0"

from .errors import (
    ContractViolationError,
    DegenerateMeasureError,
    DomainEscapeError,
    EmptyCompactError,
    EstimationFailureError,
    InfeasibleCoverError,
    SingularOrbitError,
)
from .flow_core import (
    Point,
    SystemSpec,
    Trajectory,
    distance,
    distance_many,
    estimate_lipschitz,
    evaluate_field,
    integrate_batch,
    integrate_orbit,
    singular_distance,
    singular_distance_many,
)
from .warp import (
    BallVariant,
    WarpBand,
    WarpPath,
    check_warp,
    dp_feasible,
    enumerate_staircase_feasible,
    find_warp,
    in_ball,
    inclusion_check_31,
)
from .ergodic import (
    EmpiricalMeasure,
    GridPartition,
    ItineraryWord,
    birkhoff_average,
    empirical_from_orbit,
    hamming_ball_count,
    hamming_ball_count_exhaustive,
    hamming_ball_rate,
    hamming_rho,
    itinerary,
    smb_entropy,
    smb_entropy_detail,
)
from .pressure_metric import (
    CoverSolution,
    PotentialSpec,
    PressureRow,
    PressureTable,
    bounded_variation_gamma,
    constant_potential,
    katok_check,
    metric_cover_value,
    metric_pressure_table,
    orbit_integral,
    transport_defect,
)
from .pressure_topo import (
    CompactSample,
    SeparatingSolution,
    SpanningSolution,
    build_compact_sample,
    estimate_comparability,
    greedy_spanning,
    maximal_separating,
    sandwich_check,
    topo_pressure_table,
    variational_gap,
)
from .systems import (
    SystemInfo,
    get_system,
    make_cat_suspension,
    make_linear_torus,
    make_lorenz,
    make_sine_grid_torus,
    system_names,
)
