"""Newmark time integration with backward-error-analysis compensation."""
from .bea import (
    DistortedSystem,
    DistortedVectorField,
    distorted_system,
    dvf_eval,
    euler_oscillator_distortion,
    integrate_distorted,
    integrate_dvf,
)
from .compensation import (
    CompensatedSystem,
    CompensationError,
    compensated_forcing_eval,
    damping_compensation,
    fourth_order_compensation,
)
from .harness import (
    MethodSpec,
    Scenario,
    accuracy_runtime_benchmark,
    builtin_scenario,
    convergence_study,
    energy_trace,
    observed_order,
    run_scenario,
)
from .integrators import (
    State,
    StepperConfig,
    Trajectory,
    generalized_alpha_step,
    initial_acceleration,
    integrate,
    newmark_step,
    reference_solution,
    rk4_step,
    explicit_euler_step,
)
from .model import (
    Forcing,
    SecondOrderSystem,
    evaluate_forcing,
    first_order_view,
    forcing_derivative,
    total_energy,
)
from .systems import builtin_system, fe_chain, oscillator_1dof, paper_3dof

__version__ = "0.1.0"
