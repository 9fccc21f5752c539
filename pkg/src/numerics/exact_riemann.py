"""
Exact Riemann solver for the 1D Euler equations

Pressure-function Newton iteration for the star region followed by
self-similar sampling. Serves as the reference solution for shock-tube
validation runs.
"""
from dataclasses import dataclass

import numpy as np

from src.common.exceptions import ConfigurationError
from src.numerics.euler import GAMMA


@dataclass(frozen=True)
class PrimState1D:
    rho: float
    u: float
    p: float

    @property
    def c(self) -> float:
        return float(np.sqrt(GAMMA * self.p / self.rho))


class ExactRiemannSolver:
    """Exact solution of a 1D Riemann problem for a gamma-law gas"""

    def __init__(self, left: PrimState1D, right: PrimState1D, tolerance: float = 1e-12, max_iterations: int = 200):
        self.left = left
        self.right = right
        self.tolerance = tolerance
        self.max_iterations = max_iterations

        self.g1 = 0.5 * (GAMMA - 1.0) / GAMMA
        self.g2 = 0.5 * (GAMMA + 1.0) / GAMMA
        self.g4 = 2.0 / (GAMMA - 1.0)

        if self.g4 * (left.c + right.c) <= right.u - left.u:
            raise ConfigurationError("Riemann data generates vacuum")

        self.p_star, self.u_star = self._solve_star()

    def _pressure_function(self, p: float, state: PrimState1D):
        if p <= state.p:
            ratio = p / state.p
            f = self.g4 * state.c * (ratio ** self.g1 - 1.0)
            df = (1.0 / (state.rho * state.c)) * ratio ** (-self.g2)
        else:
            a = 2.0 / ((GAMMA + 1.0) * state.rho)
            b = (GAMMA - 1.0) / (GAMMA + 1.0) * state.p
            root = np.sqrt(a / (b + p))
            f = (p - state.p) * root
            df = (1.0 - 0.5 * (p - state.p) / (b + p)) * root
        return f, df

    def _initial_guess(self) -> float:
        left, right = self.left, self.right
        pvrs = 0.5 * (left.p + right.p) - 0.125 * (right.u - left.u) * (left.rho + right.rho) * (left.c + right.c)
        return max(self.tolerance, pvrs)

    def _solve_star(self):
        left, right = self.left, self.right
        du = right.u - left.u
        p = self._initial_guess()
        for _ in range(self.max_iterations):
            fL, dfL = self._pressure_function(p, left)
            fR, dfR = self._pressure_function(p, right)
            p_new = p - (fL + fR + du) / (dfL + dfR)
            if p_new < 0.0:
                p_new = self.tolerance
            change = 2.0 * abs(p_new - p) / (p_new + p)
            p = p_new
            if change < self.tolerance:
                break
        else:
            raise ConfigurationError("Exact Riemann solver did not converge")
        fL, _ = self._pressure_function(p, left)
        fR, _ = self._pressure_function(p, right)
        return p, 0.5 * (left.u + right.u) + 0.5 * (fR - fL)

    def _sample_side(self, xi: np.ndarray, state: PrimState1D, sign: float):
        """Sample one side of the contact; sign = -1 for the left, +1 for the right"""
        gm, gp = GAMMA - 1.0, GAMMA + 1.0
        p_star, u_star = self.p_star, self.u_star
        rho = np.full_like(xi, state.rho)
        u = np.full_like(xi, state.u)
        p = np.full_like(xi, state.p)

        if p_star > state.p:
            ratio = p_star / state.p
            rho_star = state.rho * (ratio + gm / gp) / (gm / gp * ratio + 1.0)
            shock = state.u + sign * state.c * np.sqrt(self.g2 * ratio + self.g1)
            behind = sign * xi < sign * shock
            rho[behind] = rho_star
            u[behind] = u_star
            p[behind] = p_star
        else:
            rho_star = state.rho * (p_star / state.p) ** (1.0 / GAMMA)
            c_star = state.c * (p_star / state.p) ** self.g1
            head = state.u + sign * state.c
            tail = u_star + sign * c_star
            star = sign * xi < sign * tail
            fan = ~star & (sign * xi < sign * head)
            rho[star] = rho_star
            u[star] = u_star
            p[star] = p_star
            if np.any(fan):
                x = xi[fan]
                factor = 2.0 / gp - sign * gm / (gp * state.c) * (state.u - x)
                rho[fan] = state.rho * factor ** self.g4
                u[fan] = 2.0 / gp * (-sign * state.c + gm / 2.0 * state.u + x)
                p[fan] = state.p * factor ** (1.0 / self.g1)
        return rho, u, p

    def sample(self, xi: np.ndarray):
        """
        Solution at similarity coordinates xi = (x - x0) / t

        Returns:
            (rho, u, p) arrays shaped like xi
        """
        xi = np.asarray(xi, dtype=np.float64)
        left = self._sample_side(xi, self.left, -1.0)
        right = self._sample_side(xi, self.right, 1.0)
        on_left = xi < self.u_star
        return tuple(np.where(on_left, lv, rv) for lv, rv in zip(left, right))

    def solution(self, x: np.ndarray, t: float, x0: float = 0.5):
        """Solution at positions x and time t for an interface initially at x0"""
        x = np.asarray(x, dtype=np.float64)
        if t <= 0.0:
            rho = np.where(x < x0, self.left.rho, self.right.rho)
            u = np.where(x < x0, self.left.u, self.right.u)
            p = np.where(x < x0, self.left.p, self.right.p)
            return rho, u, p
        return self.sample((x - x0) / t)
