"""Primal program: minimize ``||F||_p^p`` directly over majorants on the window.

An independent route to the minimal majorant. Variables are real coefficients
on ``T = majorant_window(supp f̂, j)``. Full mode imposes ``F̂ >= |f̂|`` on S and
``F̂ >= 0`` on ``T \\ S``; partial mode drops the sign condition off S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import minimize

from .dual import (
    DEFAULT_SOLVER,
    ConjugateResult,
    DualSolution,
    EmptyInput,
    SolverConfig,
    minimal_majorant,
)
from .spectral import (
    DEFAULT_QUADRATURE,
    CoefficientSequence,
    ExponentPair,
    QuadratureConfig,
    evaluate_on_grid,
    grid_coefficients,
    grid_points,
    norm_p,
    sgn_power,
)
from .sumsets import FrequencySet, majorant_window

Mode = Literal["partial", "full"]


class MismatchError(AssertionError):
    """Independent routes to the minimal majorant disagree."""

    def __init__(self, report: CrossValidation):
        super().__init__(f"max coefficient discrepancy {report.max_discrepancy:.3e} > {report.tol:.1e}")
        self.report = report


@dataclass(frozen=True)
class PrimalSolution:
    F: CoefficientSequence
    norm_p: float
    active_set: FrequencySet
    iterations: int
    converged: bool
    window: FrequencySet
    mode: str
    kkt_residual: float


class PrimalProblem:
    """Objective ``ψ(y) = ||F_y||_p^p`` and its gradient on a fixed quadrature grid."""

    def __init__(self, f: CoefficientSequence, j: int, mode: Mode = "full", grid: int | None = None):
        if mode not in ("partial", "full"):
            raise ValueError(f"mode must be 'partial' or 'full', got {mode!r}")
        if not f:
            raise EmptyInput("f has no nonzero coefficients")
        self.j = ExponentPair.special(j).j
        self.p = float(ExponentPair(self.j).p)
        self.S = f.support
        self.window = majorant_window(self.S, self.j)
        self.freqs = np.array(self.window.elements, dtype=np.int64)
        floor = 4 * self.window.span + 4
        N = grid or DEFAULT_QUADRATURE.solver_grid
        self.N = max(N, 1 << (floor - 1).bit_length())
        self.lower = np.array(
            [abs(f[int(n)]) if n in self.S else (0.0 if mode == "full" else -math.inf) for n in self.freqs]
        )

    def objective(self, y: np.ndarray) -> float:
        vals = evaluate_on_grid(self.freqs, y, self.N)
        return float(np.mean(np.abs(vals) ** self.p))

    def gradient(self, y: np.ndarray) -> tuple[np.ndarray, float]:
        """``p * Re Ĝ_y(n)`` on the window, with ``G_y = |F_y|^(p-1) sgn(F_y)``; also ψ(y)."""
        vals = evaluate_on_grid(self.freqs, y, self.N)
        psi = float(np.mean(np.abs(vals) ** self.p))
        G = grid_coefficients(sgn_power(vals, self.p - 1), self.freqs)
        return self.p * G.real, psi

    def hessian(self, y: np.ndarray) -> np.ndarray:
        """Exact Hessian of the grid objective (moduli floored to keep nodal zeros finite)."""
        p, N = self.p, self.N
        vals = evaluate_on_grid(self.freqs, y, N)
        mod = np.abs(vals)
        mod = np.maximum(mod, 1e-12 * mod.max())
        waves = np.exp(1j * np.outer(grid_points(N), self.freqs))
        U = (np.conj(vals)[:, None] * waves).real
        radial = (U * (mod ** (p - 4) / N)[:, None]).T @ U
        span = int(self.freqs[-1] - self.freqs[0])
        lags = np.arange(-span, span + 1)
        c = grid_coefficients(mod ** (p - 2), lags).real
        toeplitz = c[self.freqs[:, None] - self.freqs[None, :] + span]
        return p * ((p - 2) * radial + toeplitz)

    def project(self, y: np.ndarray) -> np.ndarray:
        return np.maximum(y, self.lower)

    def kkt_residual(self, y: np.ndarray, g: np.ndarray) -> float:
        """``max |min(y - lower, g)|`` relative to the largest gradient entry."""
        r = np.abs(np.minimum(y - self.lower, g))
        return float(r.max() / max(np.abs(g).max(), 1e-300))

    def start(self, start, seed: int) -> np.ndarray:
        base = np.where(np.isfinite(self.lower), np.maximum(self.lower, 0.0), 0.0)
        if isinstance(start, str):
            if start == "exact":
                return base
            if start == "random":
                rng = np.random.default_rng(seed)
                scale = float(base.max())
                return base + rng.uniform(0.0, 0.5 * scale, size=base.size)
            raise ValueError(f"unknown start {start!r}")
        if isinstance(start, CoefficientSequence):
            return self.project(np.array([start[int(n)].real for n in self.freqs]))
        return self.project(np.asarray(start, dtype=float))


def _lbfgsb(prob: PrimalProblem, y: np.ndarray, cfg: SolverConfig) -> tuple[np.ndarray, int, bool]:
    def fun(v):
        g, psi = prob.gradient(v)
        return psi, g

    bounds = [(lb if np.isfinite(lb) else None, None) for lb in prob.lower]
    r = minimize(
        fun,
        y,
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        options={"maxiter": cfg.max_iters, "ftol": 1e-16, "gtol": 1e-14, "maxcor": 30},
    )
    # status 2 is a failed line search, which here means the quadrature noise floor
    return prob.project(r.x), int(r.nit), r.status in (0, 2)


def _newton_polish(prob: PrimalProblem, y: np.ndarray, cfg: SolverConfig, max_steps: int = 200) -> tuple[np.ndarray, int]:
    """Projected Newton steps on the free coordinates with an Armijo backtrack.

    Near the optimum the zeros of F make the objective badly conditioned, which
    stalls quasi-Newton updates well before coefficient accuracy is reached.
    """
    scale = max(float(np.abs(y).max()), 1.0)
    g, psi = prob.gradient(y)
    steps = 0
    for steps in range(1, min(max_steps, cfg.max_iters) + 1):
        free = ~((y - prob.lower <= 1e-12 * scale) & (g > 0))
        if not free.any():
            break
        H = prob.hessian(y)[np.ix_(free, free)]
        H[np.diag_indices_from(H)] += 1e-14 * float(np.abs(np.diag(H)).max())
        d = np.zeros_like(y)
        d[free] = -np.linalg.solve(H, g[free])
        a = 1.0
        while True:
            yn = prob.project(y + a * d)
            gn, psin = prob.gradient(yn)
            if psin <= psi + cfg.armijo * float(g @ (yn - y)) or a < 1e-12:
                break
            a *= 0.5
        if psin > psi:
            break
        moved = float(np.abs(yn - y).max())
        y, g, psi = yn, gn, psin
        if moved <= 1e-13 * scale:
            break
    return y, steps


def _projected_gradient(prob: PrimalProblem, y: np.ndarray, cfg: SolverConfig) -> tuple[np.ndarray, int, bool]:
    g, psi = prob.gradient(y)
    res = prob.kkt_residual(y, g)
    scale = float(np.abs(y).max()) / max(float(np.abs(g).max()), 1e-300)
    step = (cfg.fixed_step if cfg.step_rule == "fixed" else 0.1) * scale
    it = 0
    while res >= cfg.tol_kkt and it < cfg.max_iters:
        it += 1
        if cfg.step_rule == "fixed":
            yn = prob.project(y - step * g)
            gn, psin = prob.gradient(yn)
        else:
            a = step
            while True:
                yn = prob.project(y - a * g)
                gn, psin = prob.gradient(yn)
                if psin <= psi + cfg.armijo * float(g @ (yn - y)):
                    break
                a *= 0.5
                if a < 1e-20 * step:
                    break
            if psin > psi or not np.any(yn != y):
                break  # stalled at the quadrature noise floor
            s, yv = yn - y, gn - g
            sy = float(s @ yv)
            step = float(s @ s) / sy if sy > 0 else 2 * a
        y, g, psi = yn, gn, psin
        res = prob.kkt_residual(y, g)
    return y, it, res < cfg.tol_kkt


def solve_primal(
    f: CoefficientSequence,
    j: int,
    mode: Mode = "full",
    cfg: SolverConfig = DEFAULT_SOLVER,
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
    start: str | CoefficientSequence | np.ndarray = "exact",
    method: Literal["lbfgsb", "projected_gradient"] = "lbfgsb",
) -> PrimalSolution:
    """Minimize ``||F||_p^p`` over real coefficients on the window subject to majorization.

    ``method="lbfgsb"`` (default) runs SciPy's bound-constrained quasi-Newton
    solver followed, when ``cfg.newton_polish`` is set, by projected Newton
    steps on the grid objective; ``"projected_gradient"`` runs plain projected gradient with
    Barzilai-Borwein/Armijo or fixed steps per ``cfg.step_rule``. Both use the
    same objective and gradient on a fixed grid of ``quad.solver_grid`` nodes.
    Starts from the exact majorant (``start="exact"``), a seeded random feasible
    point (``"random"``), or a supplied guess.

    ``converged`` requires the optimizer to stop on its own criterion and the
    complementarity residual ``max |min(y - lower, ∇ψ)|`` (relative to the
    gradient scale) to be below ``cfg.tol_kkt``.
    """
    prob = PrimalProblem(f, j, mode, quad.solver_grid)
    y = prob.start(start, cfg.seed)
    if method == "lbfgsb":
        y, it, stopped = _lbfgsb(prob, y, cfg)
        if cfg.newton_polish:
            y, extra = _newton_polish(prob, y, cfg)
            it += extra
    elif method == "projected_gradient":
        y, it, stopped = _projected_gradient(prob, y, cfg)
    else:
        raise ValueError(f"unknown method {method!r}")
    g, _ = prob.gradient(y)
    res = prob.kkt_residual(y, g)

    F = CoefficientSequence.from_arrays(prob.freqs, y)
    slack = y - prob.lower
    scale = max(float(np.abs(y).max()), 1.0)
    active = FrequencySet(int(n) for n, s in zip(prob.freqs, slack) if s <= 1e-9 * scale)
    return PrimalSolution(
        F=F,
        norm_p=norm_p(F, prob.p, quad),
        active_set=active,
        iterations=it,
        converged=bool(stopped and res < cfg.tol_kkt),
        window=prob.window,
        mode=mode,
        kkt_residual=res,
    )


@dataclass(frozen=True)
class CrossValidation:
    dual: ConjugateResult
    K: float
    full: PrimalSolution
    partial: PrimalSolution
    discrepancies: dict[str, float]
    tol: float
    solution: DualSolution | None = None

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancies.values())

    @property
    def agree(self) -> bool:
        return self.max_discrepancy <= self.tol


def cross_validate(
    f: CoefficientSequence,
    j: int,
    cfg: SolverConfig = DEFAULT_SOLVER,
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
    tol: float = 1e-5,
    check: bool = True,
) -> CrossValidation:
    """Compare the dual pipeline with full- and partial-mode primal solves.

    With ``check=True`` a disagreement above ``tol`` raises :class:`MismatchError`
    carrying the report.
    """
    sol, conj = minimal_majorant(f, j, cfg, quad)
    full = solve_primal(f, j, "full", cfg, quad)
    partial = solve_primal(f, j, "partial", cfg, quad)
    report = CrossValidation(
        dual=conj,
        K=sol.K,
        full=full,
        partial=partial,
        discrepancies={
            "dual_vs_full": conj.F.max_abs_diff(full.F),
            "dual_vs_partial": conj.F.max_abs_diff(partial.F),
            "full_vs_partial": full.F.max_abs_diff(partial.F),
        },
        tol=tol,
        solution=sol,
    )
    if check and not report.agree:
        raise MismatchError(report)
    return report
