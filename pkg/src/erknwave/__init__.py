"""Extended Runge-Kutta-Nystrom and trigonometric integrators for the
pseudospectrally discretised nonlinear wave equation

    u_tt - u_xx + rho u + g(u) = 0   on the periodic interval [-pi, pi).
"""
from ._backend import DEFAULT as KERNEL_BACKEND
from .diagnostics import (
    DiagnosticsRecord,
    DriftSummary,
    Recorder,
    actions,
    drift_summary,
    energy,
    modified_quantities,
    momentum,
    resonance_report,
    sobolev_norm,
    state_norm,
)
from .filters import phi0, phi1, sigma_filter, upsilon
from .integrators import (
    BlowUpError,
    StepContext,
    erkn_step,
    erkn_step_signed,
    integrate,
    jacobian_determinant_probe,
    make_context,
    phi_L,
    phi_NL,
    symplectic_form_probe,
    trig_step,
    verify_composition,
)
from .methods import ErknCoefficients, PropertyReport, builtin_methods, classify, get_method
from .spectral import (
    SpectralState,
    WaveProblem,
    collocation_grid,
    eval_nonlinearity,
    forward_dft,
    frequencies,
    inverse_dft,
    sample_initial,
)

__version__ = "0.1.0"
