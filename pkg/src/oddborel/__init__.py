"""Exact perturbation series, Borel-Leroy resummation and complex-scaling
resonances for the odd anharmonic oscillators ``p^2 + x^2 + beta x^(2k+1)``."""

__version__ = "0.1.0"

from .borel import (BorelSeries, PadeApproximant, PadeDefectWarning, PoleAtPointError, QuadSpec,
                    SumResult, borel_leroy, boundary_value, distributional_sum, leroy_transform,
                    ordinary_sum, pade_construct)
from .cache import ChecksumError, HeaderMismatchError, cache_roundtrip, deserialize, serialize
from .config import ConfigError, RunConfig, parse_config
from .geometry import (RegionSpec, choose_theta, in_parallelogram_P, nevanlinna_membership,
                       sector_membership)
from .series import (BandMatrixRational, ConsistencyError, OscillatorSpec, RSExpansion,
                     potential_matrix, rs_expand, scaled_position_matrix, second_order_oracle)
from .spectral import (EigenConvergenceError, HomotopyAmbiguityError, ResonanceEstimate,
                       ScaledHamiltonian, TraceOptions, build_scaled_hamiltonian, eigen_spectrum,
                       trace_resonance)

__all__ = [name for name in dir() if not name.startswith("_")]
