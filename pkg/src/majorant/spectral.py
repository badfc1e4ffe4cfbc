"""Sparse algebra on trigonometric-polynomial coefficients and L^p norms.

All coefficients use the normalized measure ``dθ/2π``, so ``e^{inθ}`` has unit
norm in every L^p and ``f̂(n) = (1/2π) ∫ f(θ) e^{-inθ} dθ``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple

import numpy as np

from .sumsets import FrequencySet

PRUNE_EPS = 1e-14


class NonConvergence(RuntimeWarning):
    """Quadrature refinement budget exhausted before reaching ``rel_tol``."""


class CoefficientSequence:
    """Finitely supported map from integer frequencies to complex coefficients.

    Immutable. Entries with modulus below ``PRUNE_EPS`` are dropped on
    construction, so reading an absent frequency gives exactly zero.
    """

    __slots__ = ("_c",)

    def __init__(self, entries: Mapping[int, complex] | Iterable[tuple[int, complex]] = (), prune: float = PRUNE_EPS):
        items = entries.items() if isinstance(entries, Mapping) else entries
        c: dict[int, complex] = {}
        for n, v in items:
            n = int(n)
            c[n] = c.get(n, 0j) + complex(v)
        self._c = {n: v for n, v in sorted(c.items()) if abs(v) >= prune and abs(v) > 0}

    @classmethod
    def from_dense(cls, lo: int, values: np.ndarray, prune: float = PRUNE_EPS) -> CoefficientSequence:
        return cls(((lo + i, v) for i, v in enumerate(values)), prune=prune)

    @classmethod
    def from_arrays(cls, freqs: Iterable[int], values: Iterable[complex], prune: float = PRUNE_EPS) -> CoefficientSequence:
        return cls(zip(freqs, values), prune=prune)

    def __getitem__(self, n: int) -> complex:
        return self._c.get(n, 0j)

    def __len__(self) -> int:
        return len(self._c)

    def __iter__(self) -> Iterator[int]:
        return iter(self._c)

    def __bool__(self) -> bool:
        return bool(self._c)

    def items(self):
        return self._c.items()

    def values(self):
        return self._c.values()

    @property
    def support(self) -> FrequencySet:
        return FrequencySet(self._c)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoefficientSequence):
            return NotImplemented
        return self._c == other._c

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        body = ", ".join(f"{n}: {_fmt(v)}" for n, v in self._c.items())
        return f"CoefficientSequence({{{body}}})"

    def __add__(self, other: CoefficientSequence) -> CoefficientSequence:
        return CoefficientSequence([*self._c.items(), *other._c.items()])

    def __sub__(self, other: CoefficientSequence) -> CoefficientSequence:
        return CoefficientSequence([*self._c.items(), *((n, -v) for n, v in other._c.items())])

    def __mul__(self, scalar: complex) -> CoefficientSequence:
        return CoefficientSequence({n: v * scalar for n, v in self._c.items()})

    __rmul__ = __mul__

    def __neg__(self) -> CoefficientSequence:
        return self * -1

    def restrict(self, freqs: Iterable[int]) -> CoefficientSequence:
        keep = set(freqs)
        return CoefficientSequence({n: v for n, v in self._c.items() if n in keep})

    def dense(self, lo: int | None = None, hi: int | None = None) -> tuple[int, np.ndarray]:
        """Dense complex array over ``[lo, hi]`` (defaults to the support hull)."""
        if lo is None:
            lo = min(self._c) if self._c else 0
        if hi is None:
            hi = max(self._c) if self._c else lo - 1
        arr = np.zeros(hi - lo + 1, dtype=complex)
        for n, v in self._c.items():
            arr[n - lo] = v
        return lo, arr

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(v.imag) <= tol for v in self._c.values())

    def is_nonnegative(self, tol: float = 0.0) -> bool:
        return all(abs(v.imag) <= tol and v.real >= -tol for v in self._c.values())

    def real_part(self) -> CoefficientSequence:
        return CoefficientSequence({n: v.real for n, v in self._c.items()})

    def max_abs_diff(self, other: CoefficientSequence) -> float:
        keys = set(self._c) | set(other._c)
        return max((abs(self[n] - other[n]) for n in keys), default=0.0)

    def evaluate(self, theta: np.ndarray | float) -> np.ndarray:
        """Direct evaluation of ``Σ c_n e^{inθ}``."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=complex)
        for n, v in self._c.items():
            out += v * np.exp(1j * n * theta)
        return out

    def to_dict(self) -> dict[int, complex]:
        return dict(self._c)


def _fmt(v: complex) -> str:
    if v.imag == 0:
        return repr(v.real)
    return repr(v)


@dataclass(frozen=True)
class ExponentPair:
    """Special exponent ``p = 2j/(2j-1)`` and its even conjugate ``p' = 2j``."""

    j: int

    def __post_init__(self):
        if int(self.j) != self.j or self.j < 1:
            raise ValueError(f"j must be an integer >= 1, got {self.j!r}")

    @property
    def p(self) -> Fraction:
        return Fraction(2 * self.j, 2 * self.j - 1)

    @property
    def p_conj(self) -> int:
        return 2 * self.j

    @classmethod
    def special(cls, j: int) -> ExponentPair:
        """Pair usable by the conjugate/majorant operations (requires j >= 2)."""
        if int(j) != j or j < 2:
            raise ValueError(f"majorant operations need an integer j >= 2, got {j!r}")
        return cls(int(j))


@dataclass(frozen=True)
class QuadratureConfig:
    """Uniform periodic trapezoid rule with grid doubling.

    ``base_grid=None`` picks the smallest power of two meeting the
    ``4 * span + 4`` floor (at least 64). An explicit grid below that floor is
    raised to it. ``max_refinements=0`` means a single fixed grid with no
    convergence check. ``solver_grid`` is the fixed grid used inside iterative
    solvers, where objective and gradient must come from the same rule.
    """

    base_grid: int | None = None
    max_refinements: int = 12
    rel_tol: float = 1e-9
    solver_grid: int = 4096

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.max_refinements < 0:
            raise ValueError("max_refinements must be >= 0")
        if self.base_grid is not None and self.base_grid < 1:
            raise ValueError("base_grid must be positive")

    def grid_for(self, span: int) -> int:
        floor = 4 * span + 4
        if self.base_grid is None:
            return max(64, 1 << (floor - 1).bit_length())
        return max(self.base_grid, floor)


DEFAULT_QUADRATURE = QuadratureConfig()


# --- exact algebra --------------------------------------------------------------


def convolve(a: CoefficientSequence, b: CoefficientSequence) -> CoefficientSequence:
    """Coefficients of the product of two trigonometric polynomials."""
    if not a or not b:
        return CoefficientSequence()
    span = (max(a) - min(a)) + (max(b) - min(b)) + 1
    if len(a) * len(b) <= span:
        out: dict[int, complex] = {}
        for m, u in a.items():
            for k, v in b.items():
                out[m + k] = out.get(m + k, 0j) + u * v
        return CoefficientSequence(out)
    lo_a, da = a.dense()
    lo_b, db = b.dense()
    return CoefficientSequence.from_dense(lo_a + lo_b, np.convolve(da, db))


def reflect_conjugate(a: CoefficientSequence) -> CoefficientSequence:
    """Coefficients of the conjugate function: ``n -> conj(a(-n))``."""
    return CoefficientSequence({-n: v.conjugate() for n, v in a.items()})


def _check_j(j: int) -> int:
    if int(j) != j or j < 1:
        raise ValueError(f"j must be an integer >= 1, got {j!r}")
    return int(j)


def self_convolve(g: CoefficientSequence, j: int) -> CoefficientSequence:
    """j-fold convolution of g with itself (coefficients of g^j)."""
    j = _check_j(j)
    out = g
    for _ in range(j - 1):
        out = convolve(out, g)
    return out


def power_product(G: CoefficientSequence, j: int) -> CoefficientSequence:
    """Coefficients of ``conj(G)^(j-1) * G^j``; returns G itself for j = 1."""
    j = _check_j(j)
    out = self_convolve(G, j)
    if j > 1:
        out = convolve(out, self_convolve(reflect_conjugate(G), j - 1))
    return out


def exact_majorant(a: CoefficientSequence) -> CoefficientSequence:
    return CoefficientSequence({n: abs(v) for n, v in a.items()})


def norm_even(g: CoefficientSequence, j: int) -> float:
    """``||g||_{2j}`` computed exactly by Parseval on the coefficients of g^j."""
    j = _check_j(j)
    if not g:
        return 0.0
    _, arr = self_convolve(g, j).dense()
    return float(np.sum(np.abs(arr) ** 2)) ** (1.0 / (2 * j))


# --- quadrature -----------------------------------------------------------------


def grid_points(N: int) -> np.ndarray:
    """The N uniform nodes ``-π + 2πk/N`` on ``[-π, π)``."""
    return -math.pi + 2.0 * math.pi * np.arange(N) / N


def evaluate_on_grid(freqs: np.ndarray, values: np.ndarray, N: int) -> np.ndarray:
    """Values of ``Σ values[i] e^{i freqs[i] θ}`` at ``grid_points(N)`` via one FFT."""
    freqs = np.asarray(freqs, dtype=np.int64)
    buf = np.zeros(N, dtype=complex)
    sign = np.where(freqs % 2 == 0, 1.0, -1.0)
    np.add.at(buf, freqs % N, np.asarray(values) * sign)
    return N * np.fft.ifft(buf)


def grid_coefficients(samples: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """Trapezoid-rule Fourier coefficients at ``freqs`` from samples on ``grid_points(N)``."""
    N = len(samples)
    freqs = np.asarray(freqs, dtype=np.int64)
    spec = np.fft.fft(samples) / N
    sign = np.where(freqs % 2 == 0, 1.0, -1.0)
    return spec[freqs % N] * sign


def sgn_power(values: np.ndarray, a: float) -> np.ndarray:
    """Pointwise ``|v|^a sgn(v)`` with ``sgn(0) = 0``."""
    mag = np.abs(values)
    out = np.zeros_like(values, dtype=complex)
    nz = mag > 0
    out[nz] = mag[nz] ** a * (values[nz] / mag[nz])
    return out


class QuadratureEstimate(NamedTuple):
    value: float
    converged: bool
    grid: int


def _arrays(F: CoefficientSequence) -> tuple[np.ndarray, np.ndarray]:
    freqs = np.fromiter(F, dtype=np.int64, count=len(F))
    vals = np.fromiter(F.values(), dtype=complex, count=len(F))
    return freqs, vals


def norm_p_estimate(F: CoefficientSequence, p: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> QuadratureEstimate:
    """``((1/2π) ∫ |F|^p)^(1/p)`` by trapezoid rule, doubling the grid until stable."""
    p = float(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    if not F:
        return QuadratureEstimate(0.0, True, 0)
    freqs, vals = _arrays(F)
    N = cfg.grid_for(int(freqs.max() - freqs.min()))

    def estimate(N: int) -> float:
        return float(np.mean(np.abs(evaluate_on_grid(freqs, vals, N)) ** p)) ** (1.0 / p)

    prev = estimate(N)
    if cfg.max_refinements == 0:
        return QuadratureEstimate(prev, True, N)
    for _ in range(cfg.max_refinements):
        N *= 2
        cur = estimate(N)
        if abs(cur - prev) <= cfg.rel_tol * abs(cur):
            return QuadratureEstimate(cur, True, N)
        prev = cur
    return QuadratureEstimate(prev, False, N)


def norm_p(F: CoefficientSequence, p: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Quadrature L^p norm; warns with :class:`NonConvergence` if refinement stalls."""
    est = norm_p_estimate(F, p, cfg)
    if not est.converged:
        warnings.warn(
            f"norm_p did not reach rel_tol={cfg.rel_tol} by grid {est.grid}", NonConvergence, stacklevel=2
        )
    return est.value


def dual_function_coeffs(
    F: CoefficientSequence,
    p: float,
    window: Iterable[int],
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> CoefficientSequence:
    """Coefficients of ``|F|^(p-1) sgn(F)`` on ``window``, by refined quadrature.

    Accuracy degrades when F vanishes on or near grid nodes, since the integrand
    is then only Hölder continuous there.
    """
    p = float(p)
    if not 1 < p < math.inf:
        raise ValueError("p must lie in (1, inf)")
    window = np.array(sorted(set(window)), dtype=np.int64)
    if not F or window.size == 0:
        return CoefficientSequence()
    freqs, vals = _arrays(F)
    span = int(max(freqs.max(), window.max()) - min(freqs.min(), window.min()))
    N = cfg.grid_for(span)

    def estimate(N: int) -> np.ndarray:
        return grid_coefficients(sgn_power(evaluate_on_grid(freqs, vals, N), p - 1), window)

    prev = estimate(N)
    converged = cfg.max_refinements == 0
    for _ in range(cfg.max_refinements):
        N *= 2
        cur = estimate(N)
        scale = max(float(np.abs(cur).max()), 1e-300)
        done = float(np.abs(cur - prev).max()) <= cfg.rel_tol * scale
        prev = cur
        if done:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"dual_function_coeffs did not reach rel_tol={cfg.rel_tol} by grid {N}", NonConvergence, stacklevel=2
        )
    return CoefficientSequence.from_arrays(window, prev)
