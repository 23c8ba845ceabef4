"""rotbath: field modes coupled to a rotating heat bath.

Rate calculus from bath coupling spectra (KMS-consistent damping and
pumping), mean-occupation kinetics with closed forms, exact and stochastic
birth-death dynamics of the per-mode number distribution, a thermodynamic
ledger (entropy production, heat current, energy/angular-momentum balance),
black-hole bookkeeping, and the classical shear-flow analog of the bosonic
instability.  Natural units throughout: hbar = k_B = 1.
"""

__version__ = "0.1.0"

from .core import (
    BathSpec,
    Classification,
    LocalTemperatureError,
    Mode,
    RateSet,
    Statistics,
    classify,
    local_beta,
    rates,
    shifted_kms_residual,
    shifted_spectrum,
)
from .bathmodels import (
    CorrelationFunction,
    CouplingSpectrum,
    PositivityError,
    SpectrumSample,
    custom_spectrum,
    flat_spectrum,
    hawking_spectrum,
    kms_check,
    kms_extend,
    load_correlation,
    ohmic_spectrum,
    spectrum_from_correlation,
    spectrum_from_correlation_model,
)
from .kinetics import (
    MeanTrajectory,
    NoStationaryPopulationError,
    asymptotic_population,
    closed_form_mean,
    decay_constant,
    emission_spectrum,
    evolve_mean,
    mean_rhs,
)
from .birthdeath import (
    GillespieResult,
    ModeDistribution,
    NoFixedPointError,
    NonlinearParams,
    RunawayTruncationError,
    bd_generator,
    delta_state,
    evolve_distribution,
    geometric_state,
    gillespie,
    meanfield_evolve,
    saturation_fixed_point,
    stationary_distribution,
    vacuum_state,
)
from .thermo import (
    BhLedgerEntry,
    EnergyBalance,
    GridAlignmentError,
    ThermoLedger,
    bh_ledger,
    build_ledger,
    energy_balance,
    entropy,
    entropy_production,
    heat_current,
)
from .classical import (
    FlowRegime,
    ShearConfig,
    comoving_frequency,
    energy_split,
    shear_classify,
)
from .scenario import Scenario, ScenarioError, parse_scenario, print_scenario, scenario_hash
