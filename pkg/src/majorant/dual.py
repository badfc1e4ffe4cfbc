"""Dual program: minimal ``||g||_{2j}`` over nonnegative spectra on supp f̂.

The feasible set is the weighted simplex ``{x >= 0 on S, Σ |f̂(n)| x_n = 1}``.
Its minimizer h gives ``K = ||h||_{2j}``; rescaling ``G = K^(-p) h`` yields the
p-conjugate and ``F = conj(G)^(j-1) G^j`` is the minimal majorant of f in L^p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .spectral import (
    DEFAULT_QUADRATURE,
    CoefficientSequence,
    ExponentPair,
    QuadratureConfig,
    norm_even,
    norm_p,
    power_product,
)
from .sumsets import FrequencySet


class EmptyInput(ValueError):
    """The input polynomial has no nonzero coefficient."""


class ScalingMismatch(ArithmeticError):
    """The rescaled conjugate fails the identity ``Σ |f̂| Ĝ = ||G||_{2j}^{2j}``."""


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 20000
    step_rule: Literal["fixed", "backtracking"] = "backtracking"
    tol_gap: float = 1e-10
    tol_feas: float = 1e-12
    seed: int = 0
    armijo: float = 1e-4
    # fixed-step mode uses step = fixed_step / ||Hessian(x0)||
    fixed_step: float = 0.5
    # primal stationarity tolerance, relative to the largest gradient entry
    tol_kkt: float = 1e-4
    newton_polish: bool = True

    def __post_init__(self):
        if self.tol_gap <= 0 or self.tol_feas <= 0 or self.tol_kkt <= 0:
            raise ValueError("tolerances must be positive")
        if self.step_rule not in ("fixed", "backtracking"):
            raise ValueError(f"unknown step_rule {self.step_rule!r}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")


DEFAULT_SOLVER = SolverConfig()


@dataclass(frozen=True)
class DualSolution:
    h: CoefficientSequence
    K: float
    iterations: int
    gap: float
    converged: bool
    support: FrequencySet
    objective: float


@dataclass(frozen=True)
class ConjugateResult:
    G: CoefficientSequence
    F: CoefficientSequence
    norm_F_p: float
    norm_G_2j: float
    slackness_active: FrequencySet
    slackness_residuals: dict[int, float]
    j: int
    K: float | None = None
    scale: float | None = None
    extras: dict = field(default_factory=dict)


# --- objective on the simplex ------------------------------------------------------


class _Simplex:
    """Weighted simplex on the support S of f̂, with dense-array helpers."""

    def __init__(self, f: CoefficientSequence):
        f = CoefficientSequence({n: v for n, v in f.items()})
        if not f:
            raise EmptyInput("f has no nonzero coefficients")
        self.freqs = np.array(list(f), dtype=np.int64)
        self.w = np.array([abs(v) for v in f.values()])
        self.lo = int(self.freqs.min())
        self.pos = self.freqs - self.lo
        self.L = int(self.pos.max()) + 1

    def dense(self, x: np.ndarray) -> np.ndarray:
        d = np.zeros(self.L)
        d[self.pos] = x
        return d

    def project(self, y: np.ndarray) -> np.ndarray:
        return project_weighted_simplex(y, self.w)


def _conv_power(d: np.ndarray, k: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(k):
        out = np.convolve(out, d)
    return out


def dual_objective(x: np.ndarray, freqs: np.ndarray, j: int) -> float:
    """``||x||_{2j}^{2j}`` for real coefficients x on integer frequencies ``freqs``."""
    freqs = np.asarray(freqs, dtype=np.int64)
    d = np.zeros(int(freqs.max() - freqs.min()) + 1)
    d[freqs - freqs.min()] = x
    a = _conv_power(d, j)
    return float(a @ a)


def dual_gradient(x: np.ndarray, freqs: np.ndarray, j: int) -> np.ndarray:
    """Analytic gradient ``2j * power_product(x, j)`` restricted to ``freqs``."""
    freqs = np.asarray(freqs, dtype=np.int64)
    pos = freqs - freqs.min()
    L = int(pos.max()) + 1
    d = np.zeros(L)
    d[pos] = x
    prod = np.convolve(_conv_power(d, j), _conv_power(d[::-1], j - 1))
    return 2 * j * prod[pos + (j - 1) * (L - 1)]


def dual_hessian(x: np.ndarray, freqs: np.ndarray, j: int) -> np.ndarray:
    """Analytic Hessian of ``||x||_{2j}^{2j}`` in the real coefficients (j >= 2)."""
    freqs = np.asarray(freqs, dtype=np.int64)
    pos = freqs - freqs.min()
    L = int(pos.max()) + 1
    d = np.zeros(L)
    d[pos] = x
    rev = d[::-1]
    # A = X^(j-2) conj(X)^j, B = |X|^(2j-2)
    A = np.convolve(_conv_power(d, j - 2), _conv_power(rev, j))
    B = np.convolve(_conv_power(d, j - 1), _conv_power(rev, j - 1))
    ra = pos[:, None]
    rb = pos[None, :]
    return 2 * j * (j - 1) * A[j * (L - 1) - ra - rb] + 2 * j * j * B[ra - rb + (j - 1) * (L - 1)]


def project_weighted_simplex(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, Σ w x = 1}`` (w > 0), exact via sorting."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    ratio = y / w
    order = np.argsort(-ratio, kind="stable")
    cum_wy = np.cumsum(w[order] * y[order])
    cum_ww = np.cumsum(w[order] ** 2)
    tau = (cum_wy - 1.0) / cum_ww
    k = np.nonzero(ratio[order] > tau)[0]
    t = tau[k[-1]] if k.size else tau[-1]
    x = np.maximum(y - t * w, 0.0)
    # restore the equality exactly after rounding
    s = float(w @ x)
    return x / s if s > 0 else np.full_like(w, 1.0 / (w.size * w))


def frank_wolfe_gap(x: np.ndarray, g: np.ndarray, w: np.ndarray) -> float:
    """``max_v <g, x - v>`` over vertices ``v = e_n / w_n``, relative to ``<g, x>``."""
    gx = float(g @ x)
    return (gx - float(np.min(g / w))) / gx if gx > 0 else math.inf


# --- solver -------------------------------------------------------------------------


def _newton_face_step(x, g, w, freqs, j):
    """One Newton step on the face ``{x_free > 0}``; returns a feasible point or None."""
    free = x > 0
    if free.sum() < 2:
        return None
    H = dual_hessian(x, freqs, j)[np.ix_(free, free)]
    wf = w[free]
    m = int(free.sum())
    kkt = np.zeros((m + 1, m + 1))
    kkt[:m, :m] = H
    kkt[:m, m] = wf
    kkt[m, :m] = wf
    rhs = np.concatenate([-g[free], [0.0]])
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        return None
    d = np.zeros_like(x)
    d[free] = sol[:m]
    t = 1.0
    neg = d < 0
    if np.any(neg):
        t = min(1.0, float(np.min(-x[neg] / d[neg])))
    xn = x + t * d
    xn[xn <= 1e-15 * float(np.abs(xn).max())] = 0.0
    s = float(w @ xn)
    if s <= 0:
        return None
    return xn / s


def _start_point(space: _Simplex, start, cfg: SolverConfig) -> np.ndarray:
    if isinstance(start, str):
        if start == "uniform":
            return space.project(np.zeros_like(space.w) + 1.0 / space.w)
        if start == "random":
            rng = np.random.default_rng(cfg.seed)
            return rng.dirichlet(np.ones(space.w.size)) / space.w
        raise ValueError(f"unknown start {start!r}")
    if isinstance(start, CoefficientSequence):
        x0 = np.array([max(start[int(n)].real, 0.0) for n in space.freqs])
    else:
        x0 = np.asarray(start, dtype=float)
    return space.project(x0)


def solve_dual(
    f: CoefficientSequence,
    j: int,
    cfg: SolverConfig = DEFAULT_SOLVER,
    start: str | CoefficientSequence | np.ndarray = "uniform",
) -> DualSolution:
    """Minimize ``||x||_{2j}^{2j}`` over the weighted simplex built from ``|f̂|``.

    Projected gradient (Barzilai-Borwein step, Armijo backtracking, or a fixed
    step) with an optional Newton polish on the current face once the
    Frank-Wolfe gap is small. Stops when the relative gap drops below
    ``cfg.tol_gap``. ``start`` is ``"uniform"``, ``"random"`` (seeded by
    ``cfg.seed``) or an explicit feasible guess.
    """
    ExponentPair.special(j)
    space = _Simplex(f)
    freqs, w = space.freqs, space.w
    x = _start_point(space, start, cfg)

    phi = dual_objective(x, freqs, j)
    g = dual_gradient(x, freqs, j)
    gap = frank_wolfe_gap(x, g, w)
    step = None
    if cfg.step_rule == "fixed":
        step = cfg.fixed_step / max(np.linalg.norm(dual_hessian(x, freqs, j), 2), 1e-300)

    it = 0
    while gap >= cfg.tol_gap and it < cfg.max_iters:
        it += 1
        if cfg.newton_polish and gap < 1e-3:
            xn = _newton_face_step(x, g, w, freqs, j)
            if xn is not None:
                phin = dual_objective(xn, freqs, j)
                if phin <= phi * (1 + 1e-15):
                    gn = dual_gradient(xn, freqs, j)
                    gapn = frank_wolfe_gap(xn, gn, w)
                    if gapn < gap or phin < phi:
                        x, phi, g, gap = xn, phin, gn, gapn
                        continue

        if cfg.step_rule == "fixed":
            xn = space.project(x - step * g)
            phin = dual_objective(xn, freqs, j)
        else:
            if step is None:
                step = float(np.abs(x).max() / max(np.abs(g).max(), 1e-300))
            a = step
            while True:
                xn = space.project(x - a * g)
                phin = dual_objective(xn, freqs, j)
                if phin <= phi + cfg.armijo * float(g @ (xn - x)):
                    break
                a *= 0.5
                if a < 1e-30 * step:
                    break
            if phin > phi:
                break  # no descent possible at working precision
        gn = dual_gradient(xn, freqs, j)
        if cfg.step_rule == "backtracking":
            s, yv = xn - x, gn - g
            sy = float(s @ yv)
            step = float(s @ s) / sy if sy > 0 else 2 * step
        x, phi, g = xn, phin, gn
        gap = frank_wolfe_gap(x, g, w)

    h = CoefficientSequence.from_arrays(freqs, x)
    return DualSolution(
        h=h,
        K=phi ** (1.0 / (2 * j)),
        iterations=it,
        gap=gap,
        converged=bool(gap < cfg.tol_gap),
        support=FrequencySet(freqs.tolist()),
        objective=phi,
    )


# --- rescaling and KKT report -----------------------------------------------------------


def build_conjugate(
    f: CoefficientSequence,
    G: CoefficientSequence,
    j: int,
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
    tol: float = 1e-7,
) -> ConjugateResult:
    """Assemble ``F = conj(G)^(j-1) G^j``, norms and slackness data for a candidate G."""
    pair = ExponentPair.special(j)
    F = power_product(G, j)
    scale = max((abs(v) for v in f.values()), default=1.0)
    residuals = {n: F[n].real - abs(v) for n, v in f.items()}
    active = FrequencySet(n for n, r in residuals.items() if abs(r) <= tol * scale)
    return ConjugateResult(
        G=G,
        F=F,
        norm_F_p=norm_p(F, float(pair.p), quad),
        norm_G_2j=norm_even(G, j),
        slackness_active=active,
        slackness_residuals=residuals,
        j=j,
    )


def conjugate_scale(K: float, j: int) -> float:
    """The factor ``t = K^(-p)`` taking the dual minimizer h to the conjugate G."""
    return K ** (-float(ExponentPair.special(j).p))


def rescale_to_conjugate(
    sol: DualSolution,
    f: CoefficientSequence,
    j: int,
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
) -> ConjugateResult:
    """Turn the dual minimizer into the p-conjugate G and the minimal majorant F.

    With ``||h||_{2j} = K`` and ``Σ |f̂| ĥ = 1`` the majorant is
    ``power_product(h, j) / K^(2j)``, so ``G = K^(-p) h``. The choice is validated
    through ``Σ |f̂(n)| Ĝ(n) = ||G||_{2j}^{2j}``, which only holds at that scale.
    """
    t = conjugate_scale(sol.K, j)
    G = sol.h * t
    res = build_conjugate(f, G, j, quad)
    lhs = sum(abs(f[n]) * v.real for n, v in G.items())
    rhs = res.norm_G_2j ** (2 * j)
    if abs(lhs - rhs) > 1e-6 * abs(rhs):
        raise ScalingMismatch(f"sum |f|G = {lhs!r} but ||G||^(2j) = {rhs!r}")
    return ConjugateResult(
        G=res.G,
        F=res.F,
        norm_F_p=res.norm_F_p,
        norm_G_2j=res.norm_G_2j,
        slackness_active=res.slackness_active,
        slackness_residuals=res.slackness_residuals,
        j=j,
        K=sol.K,
        scale=t,
    )


def minimal_majorant(
    f: CoefficientSequence,
    j: int,
    cfg: SolverConfig = DEFAULT_SOLVER,
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
) -> tuple[DualSolution, ConjugateResult]:
    """Dual pipeline: solve for h, then rescale to (G, F)."""
    sol = solve_dual(f, j, cfg)
    return sol, rescale_to_conjugate(sol, f, j, quad)


def kkt_report(f: CoefficientSequence, result: ConjugateResult, j: int) -> dict[str, float]:
    """Named residuals of the p-conjugate conditions for ``result``.

    ``nonnegativity`` and ``majorization`` should be >= -tol; the other two <= tol.
    """
    G, F = result.G, result.F
    S = f.support
    keys = sorted(set(G) | set(F) | set(S))
    return {
        # minimum over all integers, where absent frequencies read as zero
        "nonnegativity": min(0.0, min((G[n].real for n in keys), default=0.0)),
        "majorization": min((F[n].real - abs(f[n]) for n in S), default=0.0),
        "complementary_slackness": max(
            (min(G[n].real, F[n].real - abs(f[n])) for n in keys), default=0.0
        ),
        "support_leakage": max((abs(G[n]) for n in G if n not in S), default=0.0),
    }
