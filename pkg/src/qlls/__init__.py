"""Quantum Laplace rule of succession: closed forms, unitary designs, and a simulated measurement protocol."""

__version__ = "0.1.0"

from .analytics import (  # noqa: E402
    BURES,
    CLASSICAL,
    FLAT,
    DiscreteWeights,
    MeasureSpec,
    QuadratureSpec,
    discrete_weights,
    duality_residual,
    I_value,
    p_classical,
    p_classical_beta,
    p_design_exact,
    p_discretized,
    p_qlls,
)
from .designs import (  # noqa: E402
    DesignSet,
    clifford_design,
    frame_potential,
    get_design,
    haar_frame_potential,
    icosahedral_design,
    verify_design,
)
from .discord import global_discord_2q, rho2_flat  # noqa: E402
from .protocol import RunConfig, convergence_sweep, run_experiment  # noqa: E402
