"""
Constrained Rayleigh quotients of the linearized operators as dense
generalized eigenproblems on a coarse log grid.

First order: <L_U w | w> / ||w||_H^2. In x = log r both forms are free of
radial weights,

    int (w_x^2 + k^2 cos(2U) w^2) dx   over   int (w_x^2 + k^2 w^2) dx,

with w_x taken at the cell midpoints. Second order: ||L_U w||^2 / ||L0 w||^2,
solved as the smallest singular value of S L_U L0^-1 S^-1 (S the diagonal
of the L2 weight), which stays well conditioned where the weight does not.
Functions vanish outside the grid.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg, sparse

from bubblelab.core.ansatz.assemble import two_bubble
from bubblelab.core.errors import CODE_EIGEN_SOLVER, CODE_INVALID_INPUT, error_from_code
from bubblelab.core.grid import RadialGrid
from bubblelab.core.profiles.ground_state import ground_state, lambda_q
from bubblelab.core.report import Convention, Provenance, Report

logger = logging.getLogger(__name__)

OPERATOR_IDS = ("L", "L2", "LPhi", "LPhi2-pair")


@dataclass(frozen=True)
class RayleighMin:
    value: float
    vector: np.ndarray


@dataclass(frozen=True)
class CoercivitySetup:
    """Grid and scales for one operator family; n is the coarse node count."""
    k: int
    n: int = 600
    r_min: float = 1e-4
    r_max: float = 1e4
    lam: float = 1e-2
    mu: float = 1.0

    def grid(self, refine: int = 1) -> RadialGrid:
        return RadialGrid(self.r_min, self.r_max, self.n * refine)


def _midpoint_d1(n: int, h: float) -> np.ndarray:
    """(n+1) x n, fourth-order staggered derivative; no odd-even null mode."""
    D = sparse.diags([1.0, -27.0, 27.0, -1.0], [-2, -1, 0, 1], shape=(n + 1, n))
    return D.toarray() / (24.0 * h)


def _second_x(n: int, h: float) -> np.ndarray:
    D2 = sparse.diags([-1.0, 16.0, -30.0, 16.0, -1.0], [-2, -1, 0, 1, 2], shape=(n, n))
    return D2.toarray() / (12.0 * h * h)


def _constraint_basis(constraints: np.ndarray) -> np.ndarray:
    if constraints.shape[1] == 0:
        return np.eye(constraints.shape[0])
    scaled = constraints / np.linalg.norm(constraints, axis=0)
    return linalg.null_space(scaled.T)


def first_order_min(grid: RadialGrid, k: int, cos2u: np.ndarray, constraints: np.ndarray) -> RayleighMin:
    """
    Minimum of <L_U w|w> / ||w||_H^2 over w orthogonal (in L2) to the columns
    of constraints, given as samples.
    """
    n, h = grid.n, grid.dx
    D = _midpoint_d1(n, h)
    stiffness = h * D.T @ D
    A = stiffness + k**2 * np.diag(grid.trap * cos2u)
    B = stiffness + k**2 * np.diag(grid.trap)
    pairing = (grid.weights[:, None] * constraints)
    Z = _constraint_basis(pairing)
    try:
        vals, vecs = linalg.eigh(Z.T @ A @ Z, Z.T @ B @ Z, subset_by_index=[0, 0])
    except linalg.LinAlgError as e:
        raise error_from_code(CODE_EIGEN_SOLVER, f"first order eigenproblem failed: {e}") from e
    return RayleighMin(float(vals[0]), Z @ vecs[:, 0])


def second_order_min(grid: RadialGrid, k: int, cos2u: np.ndarray, constraints: np.ndarray) -> RayleighMin:
    """Minimum of ||L_U w||^2 / ||L0 w||^2 over the same constrained set."""
    n, h = grid.n, grid.dx
    D2 = _second_x(n, h)
    L0x = -D2 + k**2 * np.eye(n)
    Lx = -D2 + k**2 * np.diag(cos2u)
    S = np.sqrt(grid.trap) / grid.r
    try:
        Y = linalg.solve(L0x, np.diag(1.0 / S))
        X = S[:, None] * (Lx @ Y)
        pairing = grid.weights[:, None] * constraints
        G = linalg.solve(L0x.T, pairing) / S[:, None]
        Z = _constraint_basis(G)
        _, sing, vt = linalg.svd(X @ Z)
    except linalg.LinAlgError as e:
        raise error_from_code(CODE_EIGEN_SOLVER, f"second order eigenproblem failed: {e}") from e
    u = Z @ vt[-1]
    w = linalg.solve(L0x, u / S)
    return RayleighMin(float(sing[-1] ** 2), w)


def _h_overlap(grid: RadialGrid, k: int, w: np.ndarray, v: np.ndarray) -> float:
    """|<w, v>_H| / (||w||_H ||v||_H) with the discrete H form."""
    D = _midpoint_d1(grid.n, grid.dx)
    B = grid.dx * D.T @ D + k**2 * np.diag(grid.trap)
    return float(abs(w @ B @ v) / np.sqrt((w @ B @ w) * (v @ B @ v)))


def _background(setup: CoercivitySetup, grid: RadialGrid, operator_id: str):
    k, r = setup.k, grid.r
    if operator_id in ("L", "L2"):
        U = ground_state(k, r)
        kernel = [lambda_q(k, r)]
    else:
        U = two_bubble(k, r, setup.lam, setup.mu)
        kernel = [lambda_q(k, r / setup.lam), lambda_q(k, r / setup.mu)]
    return np.cos(2.0 * U), np.column_stack(kernel)


def rayleigh_min(setup: CoercivitySetup, operator_id: str, refine: int = 1, constrained: bool = True) -> RayleighMin:
    if operator_id not in OPERATOR_IDS:
        raise error_from_code(CODE_INVALID_INPUT, f"unknown operator id {operator_id!r}")
    grid = setup.grid(refine)
    cos2u, kernel = _background(setup, grid, operator_id)
    constraints = kernel if constrained else np.zeros((grid.n, 0))
    if operator_id in ("L", "LPhi"):
        return first_order_min(grid, setup.k, cos2u, constraints)
    if operator_id == "L2":
        return second_order_min(grid, setup.k, cos2u, constraints)
    # the pair form splits into a second order part in w and a first order part in w_dot
    pos = second_order_min(grid, setup.k, cos2u, constraints)
    vel = first_order_min(grid, setup.k, cos2u, constraints)
    return pos if pos.value <= vel.value else vel


def coercivity_rayleigh(
    operator_id: str,
    n_samples: int,
    k: int,
    setup: Optional[CoercivitySetup] = None,
    grid_tol: float = 0.05,
    report: Optional[Report] = None,
) -> Report:
    """
    Constrained minimum on n_samples nodes and on twice as many; for L and L2
    also the unconstrained minimum and its alignment with Lambda Q.
    """
    setup = setup or CoercivitySetup(k=k, n=n_samples)
    report = report or Report(experiment_id="coercivity")
    coarse = rayleigh_min(setup, operator_id)
    fine = rayleigh_min(setup, operator_id, refine=2)
    logger.info(f"{operator_id} k={k}: constrained minimum {coarse.value:.6g} -> {fine.value:.6g} under refinement")
    anchor = "localized coercivity" if operator_id.startswith("LPhi") else "coercivity"
    report.check_above(
        f"{operator_id} constrained minimum", fine.value, 1e-3, provenance=Provenance.LITERATURE,
        anchor=anchor, n=2 * setup.n, coarse=coarse.value,
    )
    drift = abs(coarse.value - fine.value) / max(abs(fine.value), 1e-300)
    report.check_below(
        f"{operator_id} grid stability", drift, grid_tol, provenance=Provenance.DERIVED,
        anchor=anchor,
    )
    if operator_id in ("L", "L2"):
        free = rayleigh_min(setup, operator_id, constrained=False)
        report.check_below(
            f"{operator_id} unconstrained minimum", abs(free.value), 1e-3 * coarse.value,
            provenance=Provenance.TRIVIAL, anchor="kernel of the linearized operator",
            convention=Convention.NONE, value=free.value,
        )
        grid = setup.grid()
        overlap = _h_overlap(grid, k, free.vector, lambda_q(k, grid.r))
        report.check_above(
            f"{operator_id} kernel alignment", overlap, 0.99, provenance=Provenance.TRIVIAL,
            anchor="kernel of the linearized operator",
        )
    return report


def coercivity_suite(
    k: int,
    operator_ids: Sequence[str] = OPERATOR_IDS,
    n: int = 600,
    report: Optional[Report] = None,
) -> Report:
    """All operator families into one report; the localized ones need the inner scale resolved."""
    report = report or Report(experiment_id="coercivity")
    for op in operator_ids:
        setup = CoercivitySetup(k=k, n=n) if op in ("L", "L2") else CoercivitySetup(k=k, n=n + 200, r_min=1e-6)
        coercivity_rayleigh(op, setup.n, k, setup, report=report)
    return report
