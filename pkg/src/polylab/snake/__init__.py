"""Snake polynomials for majorants and the Markov / Duffin-Schaeffer extremal quantities."""
from .extremal import derivative_lp, duffin_schaeffer_value, equality_probe, markov_bracket, simplex_max
from .majorant import BUILTINS, Majorant, chebyshev_density_grid
from .remez import AlternationPoint, SignPattern, SnakeResult, cheb_sign_pattern, solve_snake, weighted_snake

__all__ = [
    "derivative_lp", "duffin_schaeffer_value", "equality_probe", "markov_bracket", "simplex_max",
    "BUILTINS", "Majorant", "chebyshev_density_grid", "AlternationPoint", "SignPattern",
    "SnakeResult", "cheb_sign_pattern", "solve_snake", "weighted_snake",
]
