"""Simulation of secure IoT uplinks served by a swarm of UAV base stations.

Pipeline: potential-game node association, k-means plus best-response
altitude positioning, and two-level secure power allocation, with benchmark
schemes and a paired Monte Carlo harness.
"""

from .channel import URBAN, EnvParams, avg_pathloss, channel_gain, channel_gain_matrix, los_probability
from .framework import (
    AssociationScheme,
    BcaConfig,
    PositioningScheme,
    PowerScheme,
    SCHEME_PRESETS,
    SolutionRecord,
    SystemParams,
    certify_equilibrium,
    run_bca,
    scheme_config,
)
from .harness import (
    ExperimentConfig,
    ResultRow,
    SummaryRow,
    aggregate,
    derive_stream,
    parse_config,
    run_cell,
    run_experiment,
    write_results_csv,
    write_summary_csv,
)
from .power import PowerConfig, max_sumrate_allocate, maxmin_sinr_allocate, secure_allocate
from .radio import (
    AssociationArray,
    PowerMatrix,
    SecrecySnapshot,
    SystemState,
    build_snapshot,
    positive_secrecy_fraction,
    sum_secrecy_rate,
)
from .scenario import (
    EmptyLegitimateSetError,
    RandomStream,
    Region,
    Scenario,
    choose_uav_count,
    sample_scenario,
)

__version__ = "0.1.0"
