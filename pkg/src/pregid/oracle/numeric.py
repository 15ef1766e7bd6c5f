"""Ground-truth numerics: implied covariances, partial regressions and the
orthogonalization coefficients of the error terms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import NonPositiveVariance, SingularSubmatrix
from ..model import CausalDiagram, CovarianceMatrix, Parameterization

SINGULAR_TOL = 1e-12


def implied_covariance(p: Parameterization) -> CovarianceMatrix:
    """Sigma = (I - C)^-1 Psi (I - C)^-T.

    C is strictly lower triangular, so I - C is unit lower triangular and the
    inverse always exists.
    """
    n = p.diagram.n
    a = np.eye(n) - p.C
    b = np.linalg.solve(a, p.Psi)
    sigma = np.linalg.solve(a, b.T).T
    sigma = 0.5 * (sigma + sigma.T)
    return CovarianceMatrix(p.diagram.variables, sigma)


def standardize(p: Parameterization) -> Parameterization:
    """Rescale every variable to unit variance without changing the edge pattern."""
    sigma = implied_covariance(p).values
    d = 1.0 / np.sqrt(np.diag(sigma))
    C = p.C * np.outer(d, 1.0 / d)
    Psi = p.Psi * np.outer(d, d)
    return Parameterization(p.diagram, C, 0.5 * (Psi + Psi.T))


def partial_regression(sigma: np.ndarray | CovarianceMatrix, i: int, j: int, S: Iterable[int]) -> float:
    """Coefficient of V_j in the linear regression of V_i on {V_j} and S.

    Both numerator and denominator are Schur complements of Sigma_SS.
    """
    if isinstance(sigma, CovarianceMatrix):
        sigma = sigma.values
    S = list(S)
    if not S:
        den = sigma[j, j]
        if den <= SINGULAR_TOL * max(1.0, abs(sigma[i, i])):
            raise SingularSubmatrix(f"variance of V{j} is not positive")
        return float(sigma[i, j] / den)
    sss = sigma[np.ix_(S, S)]
    try:
        chol = np.linalg.cholesky(sss)
    except np.linalg.LinAlgError:
        raise SingularSubmatrix(f"Sigma_SS for S={S} is not positive definite") from None
    diag = np.diag(chol)
    if diag.min() ** 2 <= SINGULAR_TOL * np.max(np.diag(sss)):
        raise SingularSubmatrix(f"Sigma_SS for S={S} is numerically singular")
    # whitened cross covariances: w = L^-1 Sigma_S.
    wi = np.linalg.solve(chol, sigma[S, i])
    wj = np.linalg.solve(chol, sigma[S, j])
    num = sigma[i, j] - wi @ wj
    den = sigma[j, j] - wj @ wj
    if den <= SINGULAR_TOL * max(1.0, abs(sigma[j, j])):
        raise SingularSubmatrix(f"V{j} is numerically determined by S={S}")
    return float(num / den)


def gram_schmidt_alphas(psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonalize the error terms, working only with their covariances.

    Returns ``(alpha, v)`` where ``alpha[j, k]`` (k < j) is the coefficient of
    the k-th orthogonalized error in error j, and ``v[k]`` is the variance of
    the k-th orthogonalized error.  Equivalently ``Psi = L diag(v) L^T`` with
    ``L = I + alpha``.
    """
    psi = np.asarray(psi, dtype=float)
    n = psi.shape[0]
    alpha = np.zeros((n, n))
    m = np.zeros((n, n))  # m[j, k] = Cov(eps_j, eps'_k)
    v = np.zeros(n)
    scale = max(1.0, float(np.max(np.abs(np.diag(psi))))) if n else 1.0
    for k in range(n):
        v[k] = psi[k, k] - np.dot(alpha[k, :k] ** 2, v[:k])
        if v[k] <= SINGULAR_TOL * scale:
            raise NonPositiveVariance(f"orthogonalized error {k} has variance {v[k]:.3g}")
        for j in range(k + 1, n):
            m[j, k] = psi[j, k] - np.dot(alpha[k, :k], m[j, :k])
            alpha[j, k] = m[j, k] / v[k]
    return alpha, v


def random_parameterization(d: CausalDiagram, seed: int, trial: int = 0) -> Parameterization:
    """Draw a generic standardized parameterization of ``d``.

    The draw is a pure function of ``(d, seed, trial)``.  Path coefficients
    have magnitude in [0.5, 1.5] with random sign.  Each bidirected edge gets
    its own latent confounder with loadings in [0.4, 0.9], which keeps Psi
    positive definite and its support exactly equal to the bidirected edges.
    """
    rng = np.random.default_rng([seed, trial])
    n = d.n
    C = np.zeros((n, n))
    for k, j in sorted(d.directed):
        C[j, k] = rng.uniform(0.5, 1.5) * rng.choice((-1.0, 1.0))
    Psi = np.zeros((n, n))
    for i, l in sorted(d.bidirected):
        li, ll = rng.uniform(0.4, 0.9, size=2)
        Psi[i, l] += li * ll
        Psi[l, i] += li * ll
        Psi[i, i] += li * li
        Psi[l, l] += ll * ll
    Psi[np.diag_indices(n)] += 0.5
    return standardize(Parameterization(d, C, Psi))


@dataclass(frozen=True)
class OracleTrial:
    """One sampled standardized model with its covariance and alpha matrix."""

    parameterization: Parameterization
    sigma: CovarianceMatrix
    alphas: np.ndarray
    seed: int
    trial: int

    def beta(self, i: int, j: int, S: Iterable[int]) -> float:
        return partial_regression(self.sigma.values, i, j, S)

    def s_beta(self, j: int, k: int) -> float:
        """beta_{jk.S_jk} with S_jk = {0..j-1} minus {k}."""
        return self.beta(j, k, [i for i in range(j) if i != k])

    def equation_residuals(self) -> np.ndarray:
        """Residual of every partial regression equation, indexed ``[j, k]``."""
        n = self.sigma.n
        C, a = self.parameterization.C, self.alphas
        res = np.zeros((n, n))
        sb = np.zeros((n, n))
        for j in range(n):
            for k in range(j):
                sb[j, k] = self.s_beta(j, k)
        for j in range(n):
            for k in range(j):
                rhs = C[j, k] + a[j, k] - sum(sb[l, k] * a[j, l] for l in range(k + 1, j))
                res[j, k] = sb[j, k] - rhs
        return res


def oracle_trial(d: CausalDiagram, seed: int, trial: int = 0) -> OracleTrial:
    p = random_parameterization(d, seed, trial)
    sigma = implied_covariance(p)
    alphas, _ = gram_schmidt_alphas(p.Psi)
    return OracleTrial(p, sigma, alphas, seed, trial)
