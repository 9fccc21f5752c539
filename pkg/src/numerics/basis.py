"""
One-dimensional polynomial infrastructure

Legendre-Gauss nodes and weights, Lagrange interpolation and derivative
operators, the normalized-Legendre modal transform, the conservative DG to
FV sub-cell projection and the degree-reducing L2 projection. Everything is
a deterministic function of the degree and cached per degree.

Two-dimensional element data is stored as (..., N+1, N+1, ...) with the
x node index before the y node index; `apply_x` / `apply_y` apply a 1D
operator along those axes.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.common.exceptions import ConfigurationError

NEWTON_TOLERANCE = 1e-14
NEWTON_MAX_ITERATIONS = 100


def legendre(n: int, x: np.ndarray):
    """
    Legendre polynomial P_n and its derivative by the three-term recurrence

    Returns:
        (P_n(x), P_n'(x))
    """
    x = np.asarray(x, dtype=np.float64)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    # derivative from the standard identity; valid away from |x| = 1
    with np.errstate(divide='ignore', invalid='ignore'):
        dp = n * (x * p - p_prev) / (x * x - 1.0)
    at_end = np.isclose(np.abs(x), 1.0)
    if np.any(at_end):
        dp = np.where(at_end, np.sign(x) ** (n + 1) * n * (n + 1) / 2.0, dp)
    return p, dp


def legendre_vandermonde(x: np.ndarray, n_modes: int) -> np.ndarray:
    """Matrix V[i, j] = psi_j(x_i) of orthonormal Legendre polynomials on [-1, 1]"""
    x = np.asarray(x, dtype=np.float64)
    V = np.empty((x.size, n_modes))
    for j in range(n_modes):
        V[:, j] = legendre(j, x)[0] * np.sqrt((2 * j + 1) / 2.0)
    return V


@dataclass(frozen=True)
class NodalBasis1D:
    """Legendre-Gauss nodal basis of degree N"""
    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    bary_weights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.degree + 1

    def interpolation_matrix(self, x: np.ndarray) -> np.ndarray:
        """Matrix L[k, j] = l_j(x_k) by the barycentric formula"""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        diff = x[:, None] - self.nodes[None, :]
        exact = np.isclose(diff, 0.0, atol=1e-15, rtol=0.0)
        with np.errstate(divide='ignore', invalid='ignore'):
            terms = self.bary_weights[None, :] / diff
            L = terms / np.sum(terms, axis=1, keepdims=True)
        hit_rows = np.any(exact, axis=1)
        L[hit_rows] = exact[hit_rows].astype(np.float64)
        return L

    def derivative_matrix(self) -> np.ndarray:
        """Matrix D[i, j] = l_j'(x_i)"""
        n = self.n_nodes
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i != j:
                    D[i, j] = (self.bary_weights[j] / self.bary_weights[i]) / (self.nodes[i] - self.nodes[j])
            D[i, i] = -np.sum(D[i])
        return D


@lru_cache(maxsize=None)
def gauss_nodes(degree: int) -> NodalBasis1D:
    """
    Legendre-Gauss rule with degree+1 points

    Roots of P_{N+1} found by Newton iteration from Chebyshev initial guesses.

    Raises:
        ConfigurationError: invalid degree or Newton non-convergence
    """
    if degree < 1:
        raise ConfigurationError(f"Polynomial degree must be >= 1, got {degree}")
    n = degree + 1
    k = np.arange(n)
    x = -np.cos((2 * k + 1) * np.pi / (2 * n))

    for _ in range(NEWTON_MAX_ITERATIONS):
        p, dp = legendre(n, x)
        delta = p / dp
        x = x - delta
        if np.max(np.abs(delta)) < NEWTON_TOLERANCE:
            break
    else:
        raise ConfigurationError(
            f"Gauss node Newton iteration did not converge for degree {degree}"
        )

    x = 0.5 * (x - x[::-1])  # exact symmetry
    _, dp = legendre(n, x)
    weights = 2.0 / ((1.0 - x * x) * dp * dp)
    weights = 0.5 * (weights + weights[::-1])

    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)

    for array in (x, weights, bary):
        array.setflags(write=False)
    return NodalBasis1D(degree=degree, nodes=x, weights=weights, bary_weights=bary)


def subcell_centers(degree: int) -> np.ndarray:
    """Centers of the N+1 equispaced sub-cells of [-1, 1] (the equispaced node family)"""
    h = 2.0 / (degree + 1)
    return -1.0 + h * (np.arange(degree + 1) + 0.5)


def build_modal_transform(basis: NodalBasis1D):
    """
    Nodal <-> orthonormal Legendre transforms

    Returns:
        (modal_fwd, modal_bwd): fwd maps nodal values to coefficients,
        bwd is the Vandermonde matrix mapping coefficients back.
    """
    modal_bwd = legendre_vandermonde(basis.nodes, basis.n_nodes)
    # Gauss quadrature integrates psi_j * l_i exactly
    modal_fwd = modal_bwd.T * basis.weights[None, :]
    return modal_fwd, modal_bwd


def build_fv_projection(basis: NodalBasis1D):
    """
    Conservative DG -> sub-cell mean projection and its inverse

    Row i of V_FV holds the means of each Lagrange polynomial over the
    equispaced sub-interval i, computed exactly with N//2+1 Gauss points
    per sub-interval.
    """
    n = basis.n_nodes
    h = 2.0 / n
    quad = gauss_nodes(max(basis.degree // 2, 1))
    V_FV = np.empty((n, n))
    for i in range(n):
        left = -1.0 + i * h
        points = left + 0.5 * h * (quad.nodes + 1.0)
        L = basis.interpolation_matrix(points)
        V_FV[i] = 0.5 * quad.weights @ L
    V_FV_inv = np.linalg.inv(V_FV)
    return V_FV, V_FV_inv


def build_degree_projection(high_degree: int, low_degree: int) -> np.ndarray:
    """
    L2 projection from degree-N_high Gauss-nodal data to degree-N_low nodal data

    Modal truncation: forward transform on the high basis, keep modes
    0..N_low, evaluate on the low basis.
    """
    if low_degree > high_degree:
        raise ConfigurationError(
            f"Cannot project degree {high_degree} up to degree {low_degree}"
        )
    high_fwd, _ = build_modal_transform(gauss_nodes(high_degree))
    _, low_bwd = build_modal_transform(gauss_nodes(low_degree))
    return low_bwd @ high_fwd[: low_degree + 1, :]


@dataclass(frozen=True)
class TransferMatrices:
    """Transfer operators of one degree"""
    modal_fwd: np.ndarray
    modal_bwd: np.ndarray
    V_FV: np.ndarray
    V_FV_inv: np.ndarray
    project_2N_to_N: np.ndarray


@dataclass(frozen=True)
class ElementOperators:
    """Everything the element kernels need for one degree"""
    basis: NodalBasis1D
    transfer: TransferMatrices
    D: np.ndarray
    D_hat: np.ndarray
    ell_minus: np.ndarray
    ell_plus: np.ndarray

    @property
    def degree(self) -> int:
        return self.basis.degree

    @property
    def nodes(self) -> np.ndarray:
        return self.basis.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.basis.weights


@lru_cache(maxsize=None)
def get_operators(degree: int) -> ElementOperators:
    """Cached operator set of a degree"""
    basis = gauss_nodes(degree)
    modal_fwd, modal_bwd = build_modal_transform(basis)
    V_FV, V_FV_inv = build_fv_projection(basis)
    transfer = TransferMatrices(
        modal_fwd=modal_fwd,
        modal_bwd=modal_bwd,
        V_FV=V_FV,
        V_FV_inv=V_FV_inv,
        project_2N_to_N=build_degree_projection(2 * degree, degree),
    )
    D = basis.derivative_matrix()
    w = basis.weights
    D_hat = -(D.T * w[None, :]) / w[:, None]
    ell_minus = basis.interpolation_matrix(np.array([-1.0]))[0]
    ell_plus = basis.interpolation_matrix(np.array([1.0]))[0]
    return ElementOperators(
        basis=basis,
        transfer=transfer,
        D=D,
        D_hat=D_hat,
        ell_minus=ell_minus,
        ell_plus=ell_plus,
    )


def apply_x(matrix: np.ndarray, field: np.ndarray) -> np.ndarray:
    """Apply a 1D operator along the x node axis of (n_elem, Nx, Ny, ...) data"""
    return np.einsum('ij,ej...->ei...', matrix, field)


def apply_y(matrix: np.ndarray, field: np.ndarray) -> np.ndarray:
    """Apply a 1D operator along the y node axis of (n_elem, Nx, Ny, ...) data"""
    return np.einsum('kl,eil...->eik...', matrix, field)


def apply_xy(matrix: np.ndarray, field: np.ndarray) -> np.ndarray:
    """Tensor-product application in x then y"""
    return apply_y(matrix, apply_x(matrix, field))
