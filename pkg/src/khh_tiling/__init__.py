"""Bipartite graph generators, K_{h,h} tiling solvers, regularity checks,
and Monte Carlo threshold experiments."""

from .graph import (
    BipartiteGraph,
    VertexRef,
    format_graph_text,
    min_degree,
    neighborhood,
    new_graph,
    parse_graph_text,
    read_graph_text,
    union,
    write_graph_text,
)
from .generate import (
    ExtremalInstance,
    GenSpec,
    PerturbedInstance,
    gen_half_extremal,
    gen_lower_extremal,
    gen_perturbed,
    gen_random,
    generate,
    mix64,
    trial_seed,
)
from .matching import MatchingResult, max_matching
from .tiling import (
    Budget,
    KhhEnumeration,
    VerificationResult,
    DivisibilityError,
    KhhCopy,
    SolveOutcome,
    Tiling,
    count_k1h,
    count_k22,
    enumerate_khh,
    hall_deficiency,
    has_perfect_tiling,
    max_partial_tiling,
    verify_tiling,
)
from .regularity import (
    RegularityReport,
    Witness,
    check_regular_exact,
    check_super_regular,
    density,
    refute_regular_sampled,
)
from .harness import (
    CSV_HEADER,
    SweepResult,
    SweepRow,
    TrialConfig,
    crossovers,
    default_exponent,
    estimate_success_prob,
    fit_crossover,
    fit_exponent,
    isotonic_smooth,
    predicted_slope,
    read_sweep_csv,
    sweep,
    wilson_interval,
    write_sweep_csv,
)

__version__ = "0.1.0"
