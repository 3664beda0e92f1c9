"""Numerical tolerances and defaults shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian_rel: float = 1e-12
    unitary: float = 1e-10
    state_norm: float = 1e-10
    zero_mean: float = 1e-10
    propagator_unitarity: float = 1e-8
    series_rel: float = 1e-12


TOL = Tolerances()

PHASE_GRID = 256
STEPS_PER_PERIOD = 512
EFFECTIVE_STEPS = 256
SERIES_ORDER = 12
SERIES_ORDER_CAP = 30
FD_REL_STEP = 1e-5
# field-magnitude switch for the closed-form W, in units of omega / g_F
FIELD_EPS_REL = 1e-8
# largest omega * dt accepted by the exact propagator
MAX_OMEGA_DT = 0.2
# largest eigenphase spread of H * dt accepted per step
MAX_PHASE_PER_STEP = 1.0

# Sweep tolerance at rho = 0.1 over a in [0, 4] step 0.25 (spin 1, one e_y loop).
# Frozen from scripts/calibrate_fig2.py at 2048 steps per period: converged
# max deviation 0.012022 (a = 0.75); 512 steps differs by 2.8e-5.
FIG2_DELTA_01 = 0.0125
