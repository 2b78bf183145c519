"""
Configuration settings for the shadow Hamiltonian simulator
"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _int_env(name, default):
    raw = os.getenv(name, str(default))
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


def _float_env(name, default):
    raw = os.getenv(name, str(default))
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}")


# Oracle configuration
DENSE_CUTOFF = _int_env('SHADOWSIM_DENSE_CUTOFF', 4096)  # max Hilbert dimension for dense work
MAX_SHADOW_DIM = _int_env('SHADOWSIM_MAX_SHADOW_DIM', 1_000_000)  # cap for M^2 product spaces

# Numerics
DEFAULT_TOL = _float_env('SHADOWSIM_TOL', 1e-10)
KRYLOV_DIM = _int_env('SHADOWSIM_KRYLOV_DIM', 30)

# Reproducibility
DEFAULT_SEED = _int_env('SHADOWSIM_SEED', 1234)

LOG_LEVEL = os.getenv('SHADOWSIM_LOG_LEVEL', 'INFO').upper()

# Validation
if DENSE_CUTOFF < 1:
    raise ValueError("SHADOWSIM_DENSE_CUTOFF must be positive")
if DEFAULT_TOL <= 0:
    raise ValueError("SHADOWSIM_TOL must be positive")
if KRYLOV_DIM < 2:
    raise ValueError("SHADOWSIM_KRYLOV_DIM must be at least 2")
