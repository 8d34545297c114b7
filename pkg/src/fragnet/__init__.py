"""fragnet: adaptive social-network simulation of cultural diffusion.

A seeded, deterministic agent-based model in which two initially distant
cultural groups exchange culture over a directed weighted network whose
topology co-evolves with the agents' cultural states.  The package also
ships the experiment machinery around the model: a parallel parameter
sweep over the behavioral-diversity grid, outcome metrics, OLS/ANOVA
analysis, SVG scatter plots, and graph exports.
"""

from .analysis import (
    AnovaRow,
    AnovaTable,
    CellAggregate,
    RegressionFit,
    anova,
    cell_aggregates,
    fit_ols,
)
from .engine import (
    ActionOutcome,
    SimConfig,
    SimState,
    agent_action,
    init_state,
    run,
    select_source,
    step,
)
from .metrics import (
    RunResult,
    average_shortest_path_length,
    mean_intergroup_cultural_distance,
    weak_components,
)
from .model import (
    Agent,
    BehavioralAttributes,
    CulturalVector,
    DiversityParams,
    Group,
    Network,
    acceptance_probability,
    euclidean_distance,
    mix_culture,
    reinforce_weight,
    sample_attributes,
    weaken_weight,
)
from .sweep import (
    FailedRun,
    ResultTable,
    ResultsFormatError,
    SweepSpec,
    derive_seed,
    load_results,
    persist_results,
    run_sweep,
)

__version__ = "0.1.0"
