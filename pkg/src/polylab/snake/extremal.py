"""Markov and Duffin-Schaeffer type extremal quantities relative to a majorant."""
from __future__ import annotations

import itertools

import numpy as np
from numpy.polynomial import chebyshev as C

from ..errors import BracketInverted, LPInfeasible, NumericalFailure
from ..records import ExperimentRecord, Status
from .majorant import Majorant, chebyshev_density_grid
from .remez import GRID_SIZE, SignPattern, SnakeResult, cheb_sign_pattern, golden_max, solve_snake

EQUALITY_RTOL = 1e-8
# the grid relaxation converges slowly near zeros of mu, so the Markov gap gets a looser tolerance
BRACKET_RTOL = 5e-3


# -- Duffin-Schaeffer value ------------------------------------------------
def _functionals(mu: Majorant, sr: SnakeResult):
    """Rows of point functionals in the Chebyshev basis and their box bounds.

    A location appearing twice in the alternation set is a double point: the value and the first
    derivative are constrained, the latter by the slope of ``mu`` at its zero.
    """
    n = sr.n
    rows, bounds = [], []
    factor = mu.forced_factor()
    for x, group in itertools.groupby(sr.alternation_points):
        size = len(list(group))
        if size > 2:
            raise NumericalFailure(f"alternation point {x} has multiplicity {size} > 2")
        rows.append(C.chebvander(np.array([x]), n)[0])
        bounds.append(float(mu(x)))
        if size == 2:
            basis = np.eye(n + 1)
            rows.append(np.array([C.chebval(x, C.chebder(basis[j])) for j in range(n + 1)]))
            slope = abs(C.chebval(x, C.chebder(factor)))
            bounds.append(float(mu.reduced_weight(np.array([x]))[0]) * slope)
    return np.array(rows), np.array(bounds)


def duffin_schaeffer_value(mu: Majorant, sr: SnakeResult, k: int, grid_size: int = 2000) -> float:
    """Sup of ``||p^(k)||`` over degree-``n`` ``p`` with ``|p| <= mu`` on the alternation set.

    The data at the alternation set determine ``p``, so ``p^(k)(x0)`` is a linear functional of
    the data and its maximum over the box ``|data_i| <= bound_i`` is ``sum bound_i |w_i(x0)|``.
    """
    n = sr.n
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= n")
    a, b = _functionals(mu, sr)
    if a.shape[0] != n + 1:
        raise NumericalFailure("alternation data do not determine a degree-n polynomial")
    ainv_t = np.linalg.inv(a).T
    basis = np.eye(n + 1)
    dk = [C.chebder(basis[j], k) for j in range(n + 1)]

    def value(x0) -> float:
        g = np.array([C.chebval(x0, d) for d in dk])
        return float(np.sum(b * np.abs(ainv_t @ g)))

    x = chebyshev_density_grid(grid_size)
    g_all = np.array([C.chebval(x, d) for d in dk])
    vals = b @ np.abs(ainv_t @ g_all)
    j = int(np.argmax(vals))
    lo, hi = x[min(j + 1, len(x) - 1)], x[max(j - 1, 0)]
    _, v = golden_max(value, lo, hi)
    return float(max(v, vals[j]))


# -- linear programming ----------------------------------------------------
def simplex_max(c, a, b, eps: float = 1e-11, max_pivots: int = 100_000):
    """Maximize ``c.x`` subject to ``a x <= b``, ``x >= 0`` with ``b >= 0``.

    Dense tableau simplex started from the slack basis, Bland's rule for both the entering and
    the leaving variable.  Returns ``(value, x)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, nv = a.shape
    if np.any(b < 0):
        raise LPInfeasible("slack basis infeasible: negative right-hand side")
    t = np.zeros((m + 1, nv + m + 1))
    t[:m, :nv] = a
    t[:m, nv:nv + m] = np.eye(m)
    t[:m, -1] = b
    t[m, :nv] = -c
    basis = list(range(nv, nv + m))
    scale = max(1.0, float(np.max(np.abs(c))))
    for _ in range(max_pivots):
        candidates = np.nonzero(t[m, :-1] < -eps * scale)[0]
        if candidates.size == 0:
            x = np.zeros(nv + m)
            x[basis] = t[:m, -1]
            return float(t[m, -1]), x[:nv]
        j = int(candidates[0])
        col = t[:m, j]
        rows = np.nonzero(col > eps)[0]
        if rows.size == 0:
            raise NumericalFailure("linear program is unbounded")
        ratios = t[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + eps * max(1.0, abs(best))]
        i = int(min(ties, key=lambda r: basis[r]))
        t[i] /= t[i, j]
        factor = t[:, j].copy()
        factor[i] = 0.0
        t -= np.outer(factor, t[i])
        basis[i] = j
    raise NumericalFailure("simplex exceeded its pivot budget")


def derivative_lp(mu: Majorant, n: int, k: int, x0: float, grid_size: int, solver=simplex_max):
    """Max of ``p^(k)(x0)`` over degree-``n`` ``p`` with ``|p(x_j)| <= mu(x_j)`` on a grid."""
    xg = chebyshev_density_grid(grid_size)
    v = C.chebvander(xg, n)
    bound = mu(xg)
    basis = np.eye(n + 1)
    g = np.array([C.chebval(x0, C.chebder(basis[j], k)) for j in range(n + 1)])
    # free Chebyshev coefficients split as c = u - w with u, w >= 0
    a = np.block([[v, -v], [-v, v]])
    rhs = np.concatenate([bound, bound])
    value, z = solver(np.concatenate([g, -g]), a, rhs)
    return value, z[: n + 1] - z[n + 1:]


def _sweep_points(sr: SnakeResult, k: int, count: int = 17) -> np.ndarray:
    xs = list(chebyshev_density_grid(count))
    d = C.chebder(sr.cheb, k)
    grid = chebyshev_density_grid(GRID_SIZE)
    xs.append(float(grid[int(np.argmax(np.abs(C.chebval(grid, d))))]))
    return np.unique(np.array(xs))


def markov_bracket(mu: Majorant, n: int, k: int, grid_size: int = 128, *, sr: SnakeResult | None = None,
                   tol: float = 1e-9, sweep: int = 17) -> tuple[float, float]:
    """Bracket for ``sup ||p^(k)||`` over degree-``n`` ``p`` with ``|p| <= mu`` on [-1, 1].

    ``lower`` is the snake's derivative norm; ``upper`` is the largest grid-relaxed LP value over
    sampled evaluation points, which always include ``+-1`` and the snake's own maximizer.
    """
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= n")
    sr = sr or solve_snake(mu, n)
    lower = sr.derivative_norm(k)
    for attempt in range(2):
        size = grid_size * 2 ** attempt
        upper = max(derivative_lp(mu, n, k, float(x0), size)[0] for x0 in _sweep_points(sr, k, sweep))
        if upper >= lower - tol * max(1.0, lower):
            return lower, upper
    raise BracketInverted(f"upper {upper} < lower {lower} after refining the grid to {size}")


# -- probe -----------------------------------------------------------------
def equality_probe(mu: Majorant, n: int, k: int, grid_size: int = 128, tol: float = 1e-12,
                   rtol: float = EQUALITY_RTOL, bracket_rtol: float = BRACKET_RTOL) -> ExperimentRecord:
    """Compare the Markov bracket, the Duffin-Schaeffer value and the snake's derivative norm."""
    sr = solve_snake(mu, n, tol)
    pattern, violation = cheb_sign_pattern(sr)
    lower, upper = markov_bracket(mu, n, k, grid_size, sr=sr)
    ds = duffin_schaeffer_value(mu, sr, k)
    norm = lower
    rec = ExperimentRecord("snake", {"mu": mu.describe(), "n": n, "k": k, "grid_size": grid_size,
                                     "tol": tol, "rtol": rtol, "bracket_rtol": bracket_rtol})
    rec.results = {"markov_lower": lower, "markov_upper": upper, "duffin_schaeffer": ds,
                   "snake_derivative_norm": norm, "cheb_pattern": pattern.value,
                   "pattern_violation": violation, "snake": sr.to_dict()}
    tols = {"rtol": rtol, "bracket_rtol": bracket_rtol, "grid_size": grid_size}
    ds_equal = abs(ds - norm) <= rtol * max(1.0, norm)
    markov_tight = upper - lower <= bracket_rtol * max(1.0, lower)
    rec.add_verdict("snake.ds_equals_snake", Status.SUPPORTED if ds_equal else Status.COUNTEREXAMPLE,
                    tols, duffin_schaeffer=ds, snake_norm=norm, margin=ds - norm)
    rec.add_verdict("snake.markov_extremal_is_snake",
                    Status.SUPPORTED if markov_tight else Status.HEURISTIC, tols,
                    lower=lower, upper=upper, gap=upper - lower)
    if sr.coalesced:
        # a double alternation point leaves fewer than n + 1 distinct nodes
        rec.add_verdict("snake.pattern_implies_equality", Status.NOT_APPLICABLE, tols,
                        pattern=pattern.value, reason="coalesced alternation points")
    elif pattern in (SignPattern.NON_NEGATIVE, SignPattern.SIGN_ALTERNATING):
        holds = ds_equal and markov_tight
        rec.add_verdict("snake.pattern_implies_equality",
                        Status.SUPPORTED if holds else Status.HEURISTIC, tols,
                        pattern=pattern.value, ds_equal=ds_equal, markov_tight=markov_tight)
    else:
        rec.add_verdict("snake.pattern_implies_equality", Status.NOT_APPLICABLE, tols,
                        pattern=pattern.value)
    if mu.is_even and mu.is_convex:
        ok = pattern is SignPattern.NON_NEGATIVE
        rec.add_verdict("snake.even_convex_nonnegative",
                        Status.SUPPORTED if ok else Status.COUNTEREXAMPLE, {"coeff_tol": 1e-12},
                        pattern=pattern.value, violation=violation)
    return rec.finish()
