"""Second-order operators d/dx a d/dx + b on a Gauss-Legendre grid, and the
operator that commutes with the Airy kernel on [s, inf).

Functions are represented by their values at the nodes, scaled by
sqrt(weight), so that the discrete L^2 inner product is the Euclidean one
and the Nyström kernel matrices act on the same coordinates.  The operator
is discretized in weak form: the stiffness term is integrated exactly by the
rule (its coefficient is at most linear for the Airy operator) and no
boundary rows are imposed, which is the natural condition at x = s where
the leading coefficient vanishes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DiscretizationUnstable
from .nystrom import DEFAULT_NODES, airy_kernel_grid, airy_refined_eigenpairs, choose_length, hankel_matrix, nystrom

DRIFT_TOL = 1e-6
DECAY_TOL = 1e-8
ALIGN_TOL = 1e-6
START_LENGTH = 8.0
ALIGN_MODES = 8


@dataclass
class Grid:
    """Gauss-Legendre nodes on [a, b] with differentiation and interpolation helpers."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        t, w = np.polynomial.legendre.leggauss(self.n)
        half = 0.5 * (self.b - self.a)
        self.t = t
        self.nodes = self.a + half * (t + 1.0)
        self.weights = half * w
        # barycentric weights of Legendre points: (-1)^j sqrt((1 - t_j^2) w_j)
        self.bary = (-1.0) ** np.arange(self.n) * np.sqrt((1 - t * t) * w)
        self.root_w = np.sqrt(self.weights)

    def differentiation(self) -> np.ndarray:
        """Derivative of the interpolant at the nodes (acts on plain values)."""
        x, lam = self.nodes, self.bary
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, 1.0)
        d = (lam[None, :] / lam[:, None]) / diff
        np.fill_diagonal(d, 0.0)
        np.fill_diagonal(d, -d.sum(axis=1))
        return d

    def interpolate(self, values: np.ndarray, x: float) -> np.ndarray:
        """Interpolant of node values (last axis) at a point."""
        diff = x - self.nodes
        hit = np.flatnonzero(diff == 0)
        if hit.size:
            return values[..., hit[0]]
        c = self.bary / diff
        return (values @ c) / c.sum()


def sturm_liouville_matrix(grid: Grid, a_vals: np.ndarray, b_vals: np.ndarray) -> np.ndarray:
    """Symmetric matrix of u -> (a u')' + b u in sqrt-weight coordinates.

    The weak form uses -sum_k w_k a(x_k) u'(x_k) v'(x_k) + sum_k w_k b(x_k) u_k v_k.
    """
    d = grid.differentiation()
    g = d / grid.root_w[None, :]  # acts on sqrt-weight coordinates
    stiff = g.T @ ((grid.weights * a_vals)[:, None] * g)
    m = -stiff + np.diag(b_vals)
    return 0.5 * (m + m.T)


def ltw_coefficients(s: float, x: np.ndarray):
    """Leading coefficient x - s and potential -x (x - s)."""
    return x - s, -x * (x - s)


def ltw_matrix(grid: Grid, s: float) -> np.ndarray:
    a, b = ltw_coefficients(s, grid.nodes)
    return sturm_liouville_matrix(grid, a, b)


@dataclass
class LTWEigensystem:
    """Lowest eigenpairs of -L_TW on [s, s+L].

    ``values`` are eigenvalues of -L_TW in increasing order; ``functions``
    holds node values normalized to unit discrete L^2 norm, one per row.
    """

    s: float
    length: float
    grid: Grid
    values: np.ndarray
    functions: np.ndarray
    endpoint_ratio: np.ndarray
    drift: float | None = None

    def to_dict(self) -> dict:
        return {"s": self.s, "length": self.length, "n_nodes": self.grid.n, "values": self.values,
                "endpoint_ratio": self.endpoint_ratio, "drift": self.drift}


def _ltw_solve(s: float, length: float, n_nodes: int, n_basis: int):
    grid = Grid(s, s + length, n_nodes)
    vals, vecs = np.linalg.eigh(-ltw_matrix(grid, s))
    vals, vecs = vals[:n_basis], vecs[:, :n_basis]
    funcs = (vecs / grid.root_w[:, None]).T
    peak = np.max(np.abs(funcs), axis=1)
    end = np.abs(grid.interpolate(funcs, s + length))
    return grid, vals, funcs, end / peak


def ltw_eigensystem(s: float, length: float | None = None, n_basis: int = 10, n_nodes: int = DEFAULT_NODES,
                    check: bool = True) -> LTWEigensystem:
    """Lowest ``n_basis`` eigenpairs of the operator commuting with K_Ai on [s, s+L].

    When ``length`` is omitted it grows by 1.5x from 8 until the first
    max(8, n_basis) eigenfunctions are below 1e-8 of their peak at s+L.

    Raises
    ------
    DiscretizationUnstable
        If ``check`` and an eigenvalue moves by more than 1e-6 (relative to
        max(1, |value|)) when the node count is doubled.
    """
    probe = max(ALIGN_MODES, n_basis)
    if length is None:
        length = START_LENGTH
        while True:
            grid, vals, funcs, ratio = _ltw_solve(s, length, n_nodes, probe)
            if np.all(ratio < DECAY_TOL) or length > 64:
                break
            length *= 1.5
    grid, vals, funcs, ratio = _ltw_solve(s, length, n_nodes, n_basis)
    drift = None
    if check:
        _, fine, _, _ = _ltw_solve(s, length, 2 * n_nodes, n_basis)
        drift = float(np.max(np.abs(fine - vals) / np.maximum(1.0, np.abs(vals))))
        if drift > DRIFT_TOL:
            raise DiscretizationUnstable(f"eigenvalues drift by {drift:.2e} under grid doubling")
    return LTWEigensystem(float(s), float(length), grid, vals, funcs, ratio, drift)


@dataclass
class CommutationReport:
    """How closely the discretized K_Ai and L_TW share an eigenbasis at one s.

    ``residuals[k]`` is ||L psi_k - (psi_k^T L psi_k) psi_k|| for the k-th
    eigenvector of the kernel matrix; ``hankel_gap`` compares ||H psi_k||^2
    with <K psi_k, psi_k>; ``lidskii_ltw`` multiplies 1 - <K phi, phi> over
    the eigenvectors phi of L_TW and should reproduce ``det_direct``.
    """

    s: float
    length: float
    n_nodes: int
    commutator: float
    kernel_eigenvalues: np.ndarray
    ltw_rayleigh: np.ndarray
    residuals: np.ndarray
    hankel_norms: np.ndarray
    det_direct: float
    lidskii_ltw: float
    refined: bool

    @property
    def hankel_gap(self) -> float:
        return float(np.max(np.abs(self.hankel_norms - self.kernel_eigenvalues)))

    def aligned(self, modes: int = 5, tol: float = ALIGN_TOL) -> bool:
        return bool(np.all(self.residuals[:modes] <= tol))

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("s", "length", "n_nodes", "commutator", "kernel_eigenvalues",
                                              "ltw_rayleigh", "residuals", "hankel_norms", "det_direct",
                                              "lidskii_ltw", "refined")} | {"hankel_gap": self.hankel_gap}


def _common_length(s: float, n_nodes: int) -> float:
    mass = choose_length(airy_kernel_grid, s)
    decay = ltw_eigensystem(s, None, ALIGN_MODES, n_nodes, check=False).length
    return max(mass, decay)


def _commutation(s: float, length: float, n_nodes: int, modes: int, refined: bool) -> CommutationReport:
    disc = nystrom(airy_kernel_grid, s, length, n_nodes)
    grid = Grid(s, s + length, n_nodes)
    lop = ltw_matrix(grid, s)
    m = disc.matrix
    comm = np.linalg.norm(m @ lop - lop @ m) / (np.linalg.norm(m) * np.linalg.norm(lop))
    lam, psi = airy_refined_eigenpairs(disc, modes)
    lpsi = lop @ psi
    mu = np.einsum("ik,ik->k", psi, lpsi)
    res = np.linalg.norm(lpsi - psi * mu[None, :], axis=0)
    h = hankel_matrix(disc)
    hn = np.sum((h @ psi) ** 2, axis=0)
    _, phi = np.linalg.eigh(lop)
    quotients = np.einsum("ik,ij,jk->k", phi, m, phi)
    return CommutationReport(float(s), float(length), n_nodes, float(comm), lam, mu, res, hn,
                             disc.det_direct(), float(np.prod(1.0 - quotients)), refined)


def commutation_check(s: float = 0.0, length: float | None = None, n_nodes: int = DEFAULT_NODES,
                      modes: int = ALIGN_MODES) -> CommutationReport:
    """Compare the Airy-kernel Nyström matrix with the L_TW discretization on a common grid.

    If the leading five modes are not aligned to 1e-6 the grid is refined
    once (1.5x nodes, 1.25x length) and the refined report is returned.
    """
    if length is None:
        length = _common_length(s, n_nodes)
    rep = _commutation(s, length, n_nodes, modes, False)
    if not rep.aligned():
        rep = _commutation(s, 1.25 * length, int(1.5 * n_nodes), modes, True)
    return rep
