"""Equilibrium positions of macroscopic bars of monomers on the axis.

For s bars with length fractions gamma_1..gamma_s and gaps alpha_1..alpha_s in
front of them, the log of the count is n^2 F + o(n^2) with

    F = sum over pairs of points of I of eps * x^2 ln x,

where I holds the cumulative sums of alpha_1, gamma_1, ..., alpha_s, gamma_s and
the last gap 1 - sum(alpha), x is the distance of a pair and eps = (-1)^(number
of points of I strictly between them). The most likely placement is the
maximizer of F over {alpha_i > 0, sum(alpha) < 1}.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config import get_settings
from app.models.schemas import BarSystem, EquilibriumReport
from app.utils.errors import NonConvergenceError

logger = logging.getLogger(__name__)


class FreeEnergyLandscape:
    """F and its derivatives as functions of the gap vector, for fixed bar lengths."""

    def __init__(self, gammas: Sequence[float]):
        self.gammas = np.asarray(gammas, dtype=float)
        if self.gammas.ndim != 1 or self.gammas.size == 0 or np.any(self.gammas <= 0):
            raise ValueError("bar lengths must be a non-empty list of positive numbers")
        s = self.gammas.size
        self.s = s
        n_points = 2 * s + 2
        pairs = [(i, j) for i in range(n_points) for j in range(i + 1, n_points)]
        self._i = np.array([i for i, _ in pairs])
        self._j = np.array([j for _, j in pairs])
        self.eps = np.where((self._j - self._i - 1) % 2 == 0, 1.0, -1.0)
        # segment m (1-based) joins points m-1 and m; alpha_t is segment 2t-1, the last gap is 2s+1
        deriv = np.zeros((len(pairs), s))
        for row, (i, j) in enumerate(pairs):
            for t in range(s):
                deriv[row, t] = float(i < 2 * t + 1 <= j) - float(i < 2 * s + 1 <= j)
        self.deriv = deriv

    def segments(self, alphas: np.ndarray) -> np.ndarray:
        seg = np.empty(2 * self.s + 1)
        seg[0:2 * self.s:2] = alphas
        seg[1:2 * self.s:2] = self.gammas
        seg[-1] = 1.0 - alphas.sum()
        return seg

    def distances(self, alphas: np.ndarray) -> np.ndarray:
        alphas = np.asarray(alphas, dtype=float)
        if alphas.shape != (self.s,):
            raise ValueError(f"expected {self.s} gaps, got {alphas.shape}")
        seg = self.segments(alphas)
        if np.any(seg <= 0):
            raise ValueError(f"gaps {alphas.tolist()} are not interior to the simplex")
        points = np.concatenate(([0.0], np.cumsum(seg)))
        return points[self._j] - points[self._i]

    def value(self, alphas: np.ndarray) -> float:
        x = self.distances(alphas)
        return float(np.sum(self.eps * x * x * np.log(x)))

    def gradient(self, alphas: np.ndarray) -> np.ndarray:
        x = self.distances(alphas)
        return self.deriv.T @ (self.eps * (2.0 * x * np.log(x) + x))

    def hessian(self, alphas: np.ndarray) -> np.ndarray:
        x = self.distances(alphas)
        weights = self.eps * (2.0 * np.log(x) + 3.0)
        return self.deriv.T @ (weights[:, None] * self.deriv)

    def hessian_fd(self, alphas: np.ndarray, h: float = 1e-5) -> np.ndarray:
        """Central-difference Hessian built from the analytic gradient."""
        alphas = np.asarray(alphas, dtype=float)
        out = np.empty((self.s, self.s))
        for t in range(self.s):
            step = np.zeros(self.s)
            step[t] = h
            out[:, t] = (self.gradient(alphas + step) - self.gradient(alphas - step)) / (2 * h)
        return (out + out.T) / 2


def _landscape(sys: BarSystem) -> Tuple[FreeEnergyLandscape, np.ndarray]:
    return FreeEnergyLandscape(sys.gammas), np.asarray(sys.alphas, dtype=float)


# ---------------------------------------------------------------------------
# Optimizer
# ---------------------------------------------------------------------------

def simplex_project(x: np.ndarray, radius: float) -> np.ndarray:
    """Project x onto {y >= 0, sum(y) = radius}."""
    sorted_x = np.sort(x)
    n = sorted_x.size
    t_hat = 0.0
    for i in range(n - 2, -2, -1):
        t_hat = (sorted_x[i + 1:].sum() - radius) / (n - 1 - i)
        if i >= 0 and t_hat >= sorted_x[i]:
            break
    return np.fmax(x - t_hat, 0.0)


def project(alphas: np.ndarray, margin: float) -> np.ndarray:
    """Project onto {alpha_i >= margin, sum(alpha) <= 1 - margin}."""
    radius = 1.0 - margin * (alphas.size + 1)
    shifted = alphas - margin
    clipped = np.fmax(shifted, 0.0)
    if clipped.sum() <= radius:
        return clipped + margin
    return simplex_project(shifted, radius) + margin


def _ascend(land: FreeEnergyLandscape, start: np.ndarray) -> Tuple[np.ndarray, int]:
    """Projected gradient ascent with backtracking, finished by Newton steps."""
    settings = get_settings()
    margin, tol = settings.optimizer_margin, settings.optimizer_grad_tol
    alphas = project(np.asarray(start, dtype=float), margin)
    step = 1e-1
    for iteration in range(settings.optimizer_max_iter):
        grad = land.gradient(alphas)
        grad_norm = np.linalg.norm(grad)
        if grad_norm < tol:
            return alphas, iteration

        hess = land.hessian(alphas)
        if np.linalg.eigvalsh(hess).max() < 0:
            candidate = alphas - np.linalg.solve(hess, grad)
            if np.allclose(project(candidate, margin), candidate, rtol=0, atol=1e-15):
                if np.linalg.norm(land.gradient(candidate)) < grad_norm:
                    alphas = candidate
                    continue

        current = land.value(alphas)
        t = step
        while True:
            candidate = project(alphas + t * grad, margin)
            if land.value(candidate) >= current + 1e-4 * grad @ (candidate - alphas):
                break
            t *= 0.5
            if t < 1e-18:
                raise NonConvergenceError(f"line search stalled at {alphas.tolist()}, |grad| = {grad_norm:.3e}")
        alphas = candidate
        step = min(2 * t, 1.0)
    raise NonConvergenceError(
        f"no convergence after {settings.optimizer_max_iter} iterations, |grad| = {np.linalg.norm(land.gradient(alphas)):.3e}"
    )


def _starts(s: int) -> List[np.ndarray]:
    settings = get_settings()
    margin = settings.optimizer_margin
    starts = [np.full(s, (1.0 - margin) / (s + 1))]
    rng = np.random.default_rng(settings.optimizer_seed)
    for _ in range(settings.optimizer_starts):
        starts.append(rng.dirichlet(np.ones(s + 1))[:s] * (1.0 - 2 * margin))
    return starts


class EquilibriumService:
    """F on a bar system and its maximizer over the gaps."""

    def f_value(self, sys: BarSystem) -> float:
        land, alphas = _landscape(sys)
        return land.value(alphas)

    def f_gradient(self, sys: BarSystem) -> np.ndarray:
        land, alphas = _landscape(sys)
        return land.gradient(alphas)

    def f_hessian(self, sys: BarSystem) -> np.ndarray:
        land, alphas = _landscape(sys)
        return land.hessian(alphas)

    def reflect(self, sys: BarSystem) -> BarSystem:
        """Mirror the axis: bars in reverse order, the last gap becomes the first."""
        alphas = list(sys.alphas)
        last_gap = 1.0 - sum(alphas)
        return BarSystem(gammas=list(reversed(sys.gammas)), alphas=[last_gap] + list(reversed(alphas[1:])))

    def find_equilibrium(self, gammas: Sequence[float], displace: Optional[Sequence[float]] = None) -> EquilibriumReport:
        """Maximize F from the barycentric start and seeded random starts."""
        settings = get_settings()
        land = FreeEnergyLandscape(gammas)
        results = []
        for idx, start in enumerate(_starts(land.s)):
            alphas, iterations = _ascend(land, start)
            logger.debug(f"start {idx}: {alphas.tolist()} after {iterations} iterations")
            results.append(alphas)

        best = max(results, key=lambda a: (land.value(a), tuple(-a)))
        spread = max(float(np.linalg.norm(a - best)) for a in results)
        agreement = spread < settings.multistart_tol
        if not agreement:
            logger.warning(f"starts disagree by {spread:.3e} (tolerance {settings.multistart_tol})")

        eigs = np.linalg.eigvalsh(land.hessian_fd(best))
        f_best = land.value(best)
        logger.info(f"equilibrium for gammas={list(gammas)}: alphas={best.tolist()}, F={f_best:.12f}")

        displaced, gap = None, None
        if displace is not None:
            shifted = best + np.asarray(displace, dtype=float)
            displaced = shifted.tolist()
            gap, _ = self.displacement_likelihood(
                BarSystem(gammas=list(gammas), alphas=displaced),
                BarSystem(gammas=list(gammas), alphas=best.tolist()),
            )

        return EquilibriumReport(
            gammas=list(gammas),
            alphas=best.tolist(),
            F=f_best,
            grad_norm=float(np.linalg.norm(land.gradient(best))),
            hessian_eigs=eigs.tolist(),
            starts=len(results),
            multistart_spread=spread,
            agreement=agreement,
            displaced_alphas=displaced,
            lambda_gap=gap,
        )

    def displacement_likelihood(self, sys: BarSystem, sys0: BarSystem, n: Optional[int] = None) -> Tuple[float, Optional[float]]:
        """lambda = F(sys0) - F(sys), and the log count ratio -n^2 lambda when n is given."""
        if list(sys.gammas) != list(sys0.gammas):
            raise ValueError("displacement must keep the bar lengths")
        gap = self.f_value(sys0) - self.f_value(sys)
        if gap < 0:
            logger.warning(f"reference system is not a maximizer: lambda = {gap:.3e}")
        return gap, (None if n is None else -n * n * gap)


equilibrium_service = EquilibriumService()
