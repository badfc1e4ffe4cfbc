"""Independent checks of the structural claims about minimal majorants.

Everything here reports rather than raises, except where a precondition of
the checked statement itself is violated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .spectral import (
    DEFAULT_QUADRATURE,
    CoefficientSequence,
    ExponentPair,
    QuadratureConfig,
    dual_function_coeffs,
    exact_majorant,
    norm_even,
    norm_p,
    power_product,
)
from .sumsets import FrequencySet, is_bj_set, majorant_window

DEFAULT_TOL = 1e-6


class PreconditionViolated(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class Check(NamedTuple):
    name: str
    passed: bool
    residual: float
    anchor: str


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, residual: float, anchor: str) -> None:
        if any(c.name == name for c in self.checks):
            raise ValueError(f"duplicate check name {name!r}")
        self.checks.append(Check(name, bool(passed), float(residual), anchor))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'} {c.name} residual={c.residual:.3e} ({c.anchor})" for c in self.checks]


# --- p-conjugate conditions ---------------------------------------------------------


def verify_conjugate(
    f: CoefficientSequence, H: CoefficientSequence, j: int, tol: float = DEFAULT_TOL
) -> VerificationReport:
    """Check the four p-conjugate conditions for a candidate H, each with its residual."""
    ExponentPair.special(j)
    S = f.support
    J = power_product(H, j)
    keys = sorted(set(H) | set(J) | set(S))
    rep = VerificationReport()

    neg = min((H[n].real for n in H), default=0.0)
    imag = max((abs(H[n].imag) for n in H), default=0.0)
    rep.add(
        "nonnegative",
        neg >= -tol and imag <= tol,
        min(neg, -imag),
        "coefficients of H are nonnegative",
    )

    maj = min((J[n].real - abs(f[n]) for n in keys), default=0.0)
    maj_imag = max((abs(J[n].imag) for n in J), default=0.0)
    rep.add(
        "majorizes",
        maj >= -tol and maj_imag <= tol,
        min(maj, -maj_imag),
        "conj(H)^(j-1) H^j majorizes f",
    )

    slack = max((H[n].real for n in keys if J[n].real > abs(f[n]) + tol), default=0.0)
    rep.add("slackness", slack <= tol, slack, "H vanishes where the majorant is strict")

    leak = max((abs(H[n]) for n in H if n not in S), default=0.0)
    rep.add("support", leak <= tol, leak, "H vanishes off supp f")

    first_three = all(c.passed for c in rep.checks[:3])
    rep.add(
        "consistency",
        not (first_three and leak > tol),
        leak if first_three else 0.0,
        "the support condition follows from the other three",
    )
    return rep


# --- dual norm inequality -------------------------------------------------------------


def check_dual_norm_inequality(
    G: CoefficientSequence,
    f: CoefficientSequence,
    j: int,
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
    tol: float = 1e-8,
) -> tuple[bool, float]:
    """For ``Ĝ >= 0`` and ``|f̂| >= F̂`` on supp Ĝ, check ``||f||_p >= ||F||_p``.

    Returns ``(ok, margin)`` with ``margin = ||f||_p - ||F||_p``.
    """
    pair = ExponentPair.special(j)
    if not G.is_nonnegative(1e-12):
        raise PreconditionViolated("G must have nonnegative coefficients")
    F = power_product(G, j)
    for n in G:
        if abs(f[n]) < F[n].real - 1e-12 * max(1.0, abs(F[n])):
            raise PreconditionViolated(f"|f^({n})| = {abs(f[n])!r} < F^({n}) = {F[n].real!r}")
    p = float(pair.p)
    nF = norm_p(F, p, quad)
    margin = norm_p(f, p, quad) - nF
    return margin >= -tol * max(1.0, nF), margin


# --- equality cases --------------------------------------------------------------------


@dataclass(frozen=True)
class EqualityCase:
    k: CoefficientSequence
    E_k: CoefficientSequence
    f: CoefficientSequence
    F: CoefficientSequence
    j: int

    @classmethod
    def build(cls, k: CoefficientSequence, j: int) -> EqualityCase:
        E = exact_majorant(k)
        return cls(k=k, E_k=E, f=power_product(k, j), F=power_product(E, j), j=j)


def cancelling_minorant(k: CoefficientSequence, j: int) -> CoefficientSequence | None:
    """An exact minorant of ``|k̂|`` whose j-th power loses norm, if supp k̂ is not B_j.

    Uses a collision ``α ≠ β`` of two j-fold representations: rotating one
    frequency m with ``α(m) ≠ β(m)`` by ``π / (α(m) - β(m))`` puts the two
    corresponding products of g^j in opposite directions.
    """
    ok, witness = is_bj_set(k.support, j)
    if ok:
        return None
    a, b = witness.rep_a, witness.rep_b
    m = next(n for n in sorted(set(a) | set(b)) if a.get(n, 0) != b.get(n, 0))
    angle = math.pi / (a.get(m, 0) - b.get(m, 0))
    return CoefficientSequence(
        {n: abs(v) * (complex(math.cos(angle), math.sin(angle)) if n == m else 1) for n, v in k.items()}
    )


def equality_case_report(
    k: CoefficientSequence,
    j: int,
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
    tol: float = 1e-8,
) -> VerificationReport:
    """Check the equality case of the dual norm inequality built from k.

    With ``f = conj(k)^(j-1) k^j`` and ``F = conj(E_k)^(j-1) E_k^j``:
    ``||f||_p = ||F||_p`` exactly when ``||k||_{2j} = ||E_k||_{2j}``; on a B_j
    support that holds for every k, and off one some exact minorant of ``E_k``
    has strictly smaller norm.
    """
    if not k:
        raise ValueError("k must be nontrivial")
    pair = ExponentPair.special(j)
    p = float(pair.p)
    case = EqualityCase.build(k, j)
    rep = VerificationReport()

    nk, nE = norm_even(case.k, j), norm_even(case.E_k, j)
    gap = nE ** (2 * j) - nk ** (2 * j)
    equal = abs(gap) <= 1e-12 * nE ** (2 * j)
    rep.add("minorant_norm", gap >= -1e-12 * nE ** (2 * j), gap, "||k||_2j <= ||E_k||_2j")

    bj, _ = is_bj_set(k.support, j)
    rep.add("bj_implies_equal_norms", equal or not bj, 0.0 if equal else gap, "B_j support forces equal norms")

    if not bj:
        k2 = cancelling_minorant(k, j)
        g2 = nE ** (2 * j) - norm_even(k2, j) ** (2 * j)
        rep.add(
            "non_bj_strict_minorant",
            g2 > 1e-12 * nE ** (2 * j),
            g2,
            "a non-B_j support has an exact minorant of smaller norm",
        )

    nf, nF = norm_p(case.f, p, quad), norm_p(case.F, p, quad)
    rep.add("norm_ordering", nf <= nF * (1 + tol), nF - nf, "||f||_p <= ||F||_p for F built from E_k")
    if equal:
        rep.add("equal_norms_transfer", abs(nF - nf) <= tol * nF, nF - nf, "equal 2j-norms give ||f||_p = ||F||_p")
    major = min((case.F[n].real - abs(case.f[n]) for n in set(case.F) | set(case.f)), default=0.0)
    rep.add("F_majorizes_f", major >= -tol * max(1.0, nF), major, "F majorizes f")
    return rep


# --- factorability -----------------------------------------------------------------------


class Verdict(str, enum.Enum):
    FACTORABLE = "factorable"
    NOT_FACTORABLE = "not_factorable"
    INCONCLUSIVE = "inconclusive"


class Factorability(NamedTuple):
    verdict: Verdict
    H: CoefficientSequence | None


def root_window(F: CoefficientSequence, j: int) -> tuple[int, int]:
    """Interval that would hold supp Ĥ if ``F = conj(H)^(j-1) H^j`` with H a polynomial."""
    lo, hi = min(F), max(F)
    width = (hi - lo) / (2 * j - 1)
    a = lo + (j - 1) * width
    return math.floor(a + 1e-9), math.ceil(a + width - 1e-9)


def factorability_check(
    F: CoefficientSequence,
    j: int,
    window: FrequencySet | None = None,
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
    tol: float = DEFAULT_TOL,
) -> Factorability:
    """Decide whether F is ``conj(H)^(j-1) H^j`` with ``Ĥ >= 0``.

    Two or three nonzero coefficients can never factor this way. Otherwise the
    candidate ``H = |F|^(1/(2j-1)) sgn(F)`` is computed by quadrature on
    ``window`` (default: the hull of supp F̂ widened by twice its span). A clearly
    negative coefficient rules factoring out; a truncated H that reproduces F
    confirms it; anything else is inconclusive, since H need not be a polynomial.
    """
    pair = ExponentPair.special(j)
    if not F:
        raise ValueError("F must be nontrivial")
    if len(F) in (2, 3):
        return Factorability(Verdict.NOT_FACTORABLE, None)
    if window is None:
        span = max(F) - min(F)
        window = FrequencySet(range(min(F) - 2 * span, max(F) + 2 * span + 1))
    H = dual_function_coeffs(F, float(pair.p), window, quad)
    scale = max(abs(v) for v in H.values()) if H else 1.0
    if any(v.real < -10 * tol * scale for v in H.values()):
        return Factorability(Verdict.NOT_FACTORABLE, H)
    a, b = root_window(F, j)
    inside = all(v.real >= -tol * scale for n, v in H.items() if a <= n <= b)
    outside = max((abs(v) for n, v in H.items() if not a <= n <= b), default=0.0)
    trunc = CoefficientSequence(
        {n: v.real for n, v in H.items() if a <= n <= b and v.real > tol * scale}
    )
    fscale = max(abs(v) for v in F.values())
    if inside and outside <= tol * scale and power_product(trunc, j).max_abs_diff(F) <= tol * fscale:
        return Factorability(Verdict.FACTORABLE, trunc)
    return Factorability(Verdict.INCONCLUSIVE, H)


# --- brute-force oracle --------------------------------------------------------------------


def brute_oracle(
    f: CoefficientSequence,
    j: int,
    resolution: float = 1e-7,
    seed: int = 0,
    max_window: int = 6,
    max_evals: int = 200_000,
    grid: int = 8192,
) -> CoefficientSequence:
    """Minimal full majorant by derivative-free search on the window.

    Runs Powell's conjugate-direction method on ``||F||_p`` itself, evaluated by
    quadrature on a fixed grid of ``grid`` nodes, with box bounds
    ``[lower bound, ||f_exact||_p]`` per coordinate. The upper bound is safe
    because ``|F̂(n)| <= ||F||_1 <= ||F||_p``. No gradient or dual information is
    used. The first cycle searches the coordinate axes in a seeded random
    order; later cycles add conjugate directions, which keeps coupled
    coordinates from zig-zagging. The search restarts from its own result
    until a restart moves no coordinate by ``resolution`` or more.
    Desk-scale only: the window may hold at most ``max_window`` frequencies.
    """
    pair = ExponentPair.special(j)
    p = float(pair.p)
    if not f:
        raise ValueError("f must be nontrivial")
    S = f.support
    T = majorant_window(S, j)
    if len(T) > max_window:
        raise BudgetExceeded(f"window has {len(T)} frequencies, limit {max_window}")
    freqs = list(T)
    lower = np.array([abs(f[n]) for n in freqs])
    quad = QuadratureConfig(base_grid=grid, max_refinements=0)

    def norm_at(vals) -> float:
        return norm_p(CoefficientSequence(zip(freqs, vals), prune=0.0), p, quad)

    hi = norm_at(lower)
    # first cycle is coordinate line searches in a seeded order
    basis = np.eye(len(freqs))[np.random.default_rng(seed).permutation(len(freqs))]
    x, evals = lower, 0
    while True:
        r = minimize(
            norm_at,
            x,
            method="Powell",
            bounds=[(lb, max(lb, hi)) for lb in lower],
            # scipy runs Powell line searches at 100 * xtol
            options={"xtol": 0.01 * resolution, "ftol": 0.0, "maxfev": max_evals - evals, "direc": basis},
        )
        evals += r.nfev
        if evals >= max_evals:
            raise BudgetExceeded(f"search did not settle within {max_evals} evaluations")
        moved = float(np.abs(r.x - x).max())
        x = np.maximum(r.x, lower)
        if moved < resolution:
            break
    return CoefficientSequence(zip(freqs, x))
