"""Fish-pond growth simulation with feeding and water-quality control."""

from .growth import (
    EnvInput,
    ModelParams,
    NO_STOCKING,
    PopulationState,
    ScenarioTrace,
    StockingPolicy,
    anabolism_coefficient,
    biomass_rhs,
    catabolism_coefficient,
    do_factor,
    mortality_coefficient,
    simulate,
    simulate_individual,
    step_day,
    temperature_factor,
    uia_factor,
)
from .controllers import ControllerState, PidGains, bangbang_feed, pid_feed
from .mpc import (
    HorizonSolution,
    Mpc1Config,
    Mpc2Config,
    mpc1_objective,
    mpc1_solve,
    mpc2_objective,
    mpc2_solve,
)
from .qlearning import (
    QConfig,
    QTable,
    TrackingEnv,
    discretize_state,
    greedy_action,
    greedy_feed,
    reward,
    td_update,
    train,
)
from .scenarios import (
    ControllerBundle,
    Profile,
    ReferenceTrajectory,
    ScenarioResult,
    ScenarioSetup,
    build_case_profiles,
    build_reference,
    food_consumption_g,
    rmse_percent,
    run_scenario,
    sensitivity_study,
)

__version__ = "0.1.0"
