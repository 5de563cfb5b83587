"""Cascaded two-cavity parametric amplifier: motional EPR entanglement toolkit.

Two trapped oscillators sit in separate cavities; the first is driven on
the heating sideband (parametric amplification), the second on the cooling
sideband (state transfer), and the first cavity's output feeds the second.
The steady flow of correlated quanta squeezes the joint quadratures
X1 - X2 and P1 + P2 below the vacuum level of 2.

Layers, from most idealised to most explicit:

``analytic``   closed-form occupations, variances and two-time functions of
               the cavity-eliminated model
``moments``    second-moment integration, with (``integrate_full``) and
               without (``integrate_adiabatic``) the cavity degrees of freedom
``fock``       truncated number-state density-matrix evolution, the
               non-Gaussian cross-check for everything above
``regime``     validity checks for the approximations behind the model
``scenario``   YAML run descriptions shared by the engines
``cli``        command-line front end (run / sweep / compare / validate)
"""

from .analytic import (
    DiagnosticsWarning,
    NoMinimumBelowVacuum,
    VarianceReport,
    cavity_mean_decay,
    cavity_two_time,
    cross_correlation,
    epr_variance,
    has_minimum,
    min_variance,
    occupation_mode1,
    occupation_mode2,
    t_min,
    variance_report,
)
from .errors import (
    ConfigurationError,
    IntegrationError,
    RangeError,
    SimulationError,
    TruncationError,
)
from .fock import (
    DensityMatrix,
    FockSpace,
    FockTrajectory,
    cascade_space,
    evolve,
    lindblad_rhs,
    regression_two_time,
    rwa_check,
    single_system_evolve,
)
from .moments import (
    MODES_FULL,
    MODES_REDUCED,
    MomentState,
    Trajectory,
    first_crossing,
    integrate_adiabatic,
    integrate_full,
    thermal_state,
    vacuum_state,
    variances,
)
from .params import (
    Constant,
    EffectiveParams,
    PhysicalParams,
    ReducedRates,
    SineRamp,
    SubsystemParams,
    Tabulated,
    effective_coupling,
    reduced_rates,
)
from .regime import (
    RegimeCondition,
    RegimeReport,
    full_report,
    lamb_dicke_bound,
    lamb_dicke_bound_exact,
    laser_offset,
    rwa_margins,
    strong_coupling_figure,
)
from .scenario import Scenario, SweepSpec

__version__ = "0.1.0"

__all__ = [
    "Constant",
    "ConfigurationError",
    "DensityMatrix",
    "DiagnosticsWarning",
    "EffectiveParams",
    "FockSpace",
    "FockTrajectory",
    "IntegrationError",
    "MODES_FULL",
    "MODES_REDUCED",
    "MomentState",
    "NoMinimumBelowVacuum",
    "PhysicalParams",
    "RangeError",
    "ReducedRates",
    "RegimeCondition",
    "RegimeReport",
    "Scenario",
    "SimulationError",
    "SineRamp",
    "SubsystemParams",
    "SweepSpec",
    "Tabulated",
    "Trajectory",
    "TruncationError",
    "VarianceReport",
    "cascade_space",
    "cavity_mean_decay",
    "cavity_two_time",
    "cross_correlation",
    "effective_coupling",
    "epr_variance",
    "evolve",
    "first_crossing",
    "full_report",
    "has_minimum",
    "integrate_adiabatic",
    "integrate_full",
    "lamb_dicke_bound",
    "lamb_dicke_bound_exact",
    "laser_offset",
    "lindblad_rhs",
    "min_variance",
    "occupation_mode1",
    "occupation_mode2",
    "reduced_rates",
    "regression_two_time",
    "rwa_check",
    "rwa_margins",
    "single_system_evolve",
    "strong_coupling_figure",
    "t_min",
    "thermal_state",
    "vacuum_state",
    "variance_report",
    "variances",
]
