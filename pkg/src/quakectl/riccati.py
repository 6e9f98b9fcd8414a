"""Continuous algebraic Riccati equation and robust e-LQR synthesis.

The CARE ``A'X + XA - XBR^{-1}B'X + Q = 0`` is solved through the stable
invariant subspace of the Hamiltonian matrix, followed by a few Newton
(Kleinman) refinement sweeps. The robust weight adds a bound on the
state-dependent model error to the designer's ``Q0``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .controllers import ElqrGains
from .model import FaultParams, FrictionLaw

__all__ = [
    "CareError",
    "AugmentedPlant",
    "Uncertainty",
    "RobustWeights",
    "ElqrSynthesis",
    "build_G",
    "solve_care",
    "care_residual",
    "synthesize",
    "synthesize_elqr",
]


class CareError(RuntimeError):
    """The Riccati equation has no stabilizing solution or did not converge."""


@dataclass(frozen=True)
class AugmentedPlant:
    """Nominal slip/slip-rate dynamics extended with a double integrator.

    State order is ``(x1, x2, xi1, xi2)`` with ``xi1' = x1 - r`` and
    ``xi2' = xi1``; the input column acts through ``mu_res * N_hat``.
    """

    A0: np.ndarray
    B0: np.ndarray

    @classmethod
    def from_nominal(cls, k_hat0: float, eta_hat0: float, b0: float) -> AugmentedPlant:
        A0 = np.array([
            [0.0, 1.0, 0.0, 0.0],
            [-k_hat0, -eta_hat0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        B0 = np.array([[0.0], [b0], [0.0], [0.0]])
        return cls(A0, B0)

    @classmethod
    def from_fault(cls, params: FaultParams, law: FrictionLaw | None = None) -> AugmentedPlant:
        law = law or params.friction_law
        return cls.from_nominal(params.k_hat, params.eta_hat, law.mu_res * params.N_hat)


@dataclass(frozen=True)
class Uncertainty:
    """Maximum deviations from nominal and Lipschitz constants of the disturbance.

    Units: ``dk_hat_max`` [1/s^2], ``deta_hat_max`` [1/s],
    ``dN_hat_max`` [m^2/kg], ``phi1e`` [1/s^2], ``phi2e`` [1/s].
    """

    dk_hat_max: float = 0.0
    deta_hat_max: float = 0.0
    dN_hat_max: float = 0.0
    phi1e: float = 0.0
    phi2e: float = 0.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value >= 0:
                raise ValueError(f"uncertainty {name} must be non-negative")


def build_G(params: FaultParams, law: FrictionLaw | None, unc: Uncertainty) -> np.ndarray:
    """Lipschitz row bounding the matched model error, shape ``(1, 4)``."""
    law = law or params.friction_law
    b = law.mu_res * params.N_hat
    if not b > 0:
        raise ValueError("mu_res * N_hat must be positive")
    slope_max = abs(law.delta_mu) / law.d_c
    g1 = unc.dk_hat_max + slope_max * params.sigma_n * unc.dN_hat_max + unc.phi1e
    g2 = unc.deta_hat_max + unc.phi2e
    return np.array([[g1, g2, 0.0, 0.0]]) / b


@dataclass(frozen=True)
class RobustWeights:
    Q0: np.ndarray
    R: np.ndarray
    G: np.ndarray = field(default_factory=lambda: np.zeros((1, 4)))

    def __post_init__(self):
        Q0 = np.atleast_2d(np.asarray(self.Q0, dtype=float))
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        if not np.allclose(Q0, Q0.T) or np.linalg.eigvalsh(Q0).min() <= 0:
            raise ValueError("Q0 must be symmetric positive definite")
        if not np.allclose(R, R.T) or np.linalg.eigvalsh(R).min() <= 0:
            raise ValueError("R must be symmetric positive definite")
        if G.shape[1] != Q0.shape[0]:
            raise ValueError("G must have one column per state")
        object.__setattr__(self, "Q0", Q0)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "G", G)

    @property
    def Q(self) -> np.ndarray:
        # ||R^{1/2}||_2^2 equals the largest eigenvalue of R
        r_norm_sq = np.linalg.eigvalsh(self.R).max()
        Q = self.Q0 + r_norm_sq * self.G.T @ self.G
        return 0.5 * (Q + Q.T)


def care_residual(A, B, Q, R, X) -> np.ndarray:
    A, B, Q, R, X = (np.atleast_2d(np.asarray(m, dtype=float)) for m in (A, B, Q, R, X))
    return A.T @ X + X @ A - X @ B @ np.linalg.solve(R, B.T @ X) + Q


def _check_inputs(A, B, Q, R):
    A, B, Q, R = (np.atleast_2d(np.asarray(m, dtype=float)) for m in (A, B, Q, R))
    n = A.shape[0]
    if A.shape != (n, n) or B.shape[0] != n or Q.shape != (n, n):
        raise ValueError("inconsistent CARE dimensions")
    m = B.shape[1]
    if R.shape != (m, m):
        raise ValueError("R must be m x m")
    if not np.allclose(Q, Q.T) or np.linalg.eigvalsh(0.5 * (Q + Q.T)).min() < -1e-12 * max(1.0, np.abs(Q).max()):
        raise ValueError("Q must be symmetric positive semi-definite")
    if not np.allclose(R, R.T) or np.linalg.eigvalsh(R).min() <= 0:
        raise ValueError("R must be symmetric positive definite")
    return A, B, 0.5 * (Q + Q.T), R


def _balancing(A, B, Q, R):
    """Power-of-two state scaling ``d`` keeping the Hamiltonian structure.

    With ``x = diag(d) z`` the balanced problem is
    ``(D^-1 A D, D^-1 B, D Q D, R)`` and ``X = D^-1 X_bal D^-1``.
    """
    n = A.shape[0]
    S = B @ np.linalg.solve(R, B.T)
    M = np.abs(np.block([[A, S], [Q, A.T]]))
    M[np.diag_indices_from(M)] = 0.0
    if not M.any():
        return np.ones(n)
    _, (sca, _) = linalg.matrix_balance(M, permute=False, separate=True)
    log_sca = np.log2(sca)
    return 2.0 ** np.round((log_sca[:n] - log_sca[n:]) / 2.0)


def _hamiltonian_solve(A, B, Q, R):
    n = A.shape[0]
    S = B @ np.linalg.solve(R, B.T)
    H = np.block([[A, -S], [-Q, -A.T]])
    _, Z, sdim = linalg.schur(H, output="real", sort="lhp")
    if sdim != n:
        raise CareError("Hamiltonian has eigenvalues on the imaginary axis; "
                        "(A, B) not stabilizable or (A, Q) not detectable")
    U11, U21 = Z[:n, :n], Z[n:, :n]
    if np.linalg.cond(U11) > 1e14:
        raise CareError("stable subspace is not a graph; (A, B) not stabilizable")
    X = np.linalg.solve(U11.T, U21.T).T
    return 0.5 * (X + X.T)


def _refined_solve(A, B, Q, R, d, refine_steps):
    """Hamiltonian solve in coordinates scaled by ``d``, then Newton sweeps.

    Returns ``(X, residual_norm)`` in the original coordinates.
    """
    Ab = A * d[None, :] / d[:, None]
    Bb = B / d[:, None]
    Qb = Q * d[:, None] * d[None, :]
    Xb = _hamiltonian_solve(Ab, Bb, Qb, R)

    def unbalance(Xb):
        return Xb / d[:, None] / d[None, :]

    X = unbalance(Xb)
    res = np.linalg.norm(care_residual(A, B, Q, R, X), 2)
    for _ in range(refine_steps):
        K = np.linalg.solve(R, Bb.T @ Xb)
        Ac = Ab - Bb @ K
        if np.linalg.eigvals(Ac).real.max() >= 0:
            break
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            Xb_new = linalg.solve_continuous_lyapunov(Ac.T, -(Qb + K.T @ R @ K))
        Xb_new = 0.5 * (Xb_new + Xb_new.T)
        X_new = unbalance(Xb_new)
        res_new = np.linalg.norm(care_residual(A, B, Q, R, X_new), 2)
        if not res_new < res:
            break
        Xb, X, res = Xb_new, X_new, res_new
    return X, res


def solve_care(A0, B0, Q, R, *, refine_steps: int = 4, rtol: float = 1e-8) -> np.ndarray:
    """Stabilizing solution of the CARE.

    Parameters
    ----------
    A0, B0 : array_like
        System and input matrices, shapes ``(n, n)`` and ``(n, m)``.
    Q, R : array_like
        State weight (PSD) and input weight (PD).
    rtol : float
        Required bound on ``||residual||_2 / ||Q||_2``.

    Raises
    ------
    CareError
        If no stabilizing solution exists or the residual bound is missed.
    """
    A, B, Q, R = _check_inputs(A0, B0, Q, R)
    # Badly scaled plants (B ~ 1e-8 for a real fault) can lose the stable
    # subspace to rounding; try the balanced and the raw problem and keep
    # whichever satisfies the equation best.
    n = A.shape[0]
    best, errors = None, []
    for d in (_balancing(A, B, Q, R), np.ones(n)):
        try:
            X, res = _refined_solve(A, B, Q, R, d, refine_steps)
        except CareError as exc:
            errors.append(str(exc))
            continue
        K = np.linalg.solve(R, B.T @ X)
        if np.linalg.eigvals(A - B @ K).real.max() >= 0:
            errors.append("solution is not stabilizing")
            continue
        if best is None or res < best[1]:
            best = (X, res)
    if best is None:
        raise CareError(errors[0])
    X, res = best
    q_norm = max(np.linalg.norm(Q, 2), np.finfo(float).tiny)
    if res > rtol * q_norm:
        raise CareError(f"CARE residual {res:.3e} exceeds {rtol:g} * ||Q|| = {rtol * q_norm:.3e}")
    return X


@dataclass(frozen=True)
class ElqrSynthesis:
    gains: ElqrGains
    Theta: np.ndarray
    Q: np.ndarray
    residual: float
    closed_loop_poles: np.ndarray


def synthesize(plant: AugmentedPlant, weights: RobustWeights, **care_kwargs) -> ElqrSynthesis:
    """Solve the robust CARE and return gains with diagnostics."""
    Q = weights.Q
    Theta = solve_care(plant.A0, plant.B0, Q, weights.R, **care_kwargs)
    K = np.linalg.solve(weights.R, plant.B0.T @ Theta).ravel()
    res = np.linalg.norm(care_residual(plant.A0, plant.B0, Q, weights.R, Theta), 2)
    poles = np.linalg.eigvals(plant.A0 - plant.B0 @ K[None, :])
    return ElqrSynthesis(ElqrGains(*K), Theta, Q, float(res), poles)


def synthesize_elqr(plant: AugmentedPlant, weights: RobustWeights) -> ElqrGains:
    """e-LQR gains ``K = R^{-1} B0' Theta``; ``p = -K x_a``."""
    return synthesize(plant, weights).gains
