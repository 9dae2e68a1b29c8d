"""polylab: numerical experiments on conjectures about polynomial zeros,
extremal polynomials, equilibrium measures and Airy-kernel operators."""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
