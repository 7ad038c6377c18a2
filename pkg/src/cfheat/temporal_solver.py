"""Per-mode solution of the reduced constant-coefficient IVP.

Two independent solvers:

* :func:`solve_mode_closed_form` (third order only) classifies the
  characteristic cubic by its discriminant, builds the matching real
  fundamental system and adds a variation-of-parameters particular solution
  written as exponential moments ``int_0^t (t-z)^p/p! e^{mu (t-z)} g(z) dz``;
* :func:`solve_mode_companion` integrates the companion first-order system
  with the classical fourth-order Runge-Kutta method.

Both return a :class:`TemporalSolution` that evaluates ``T_m`` and its
derivatives in the original (untransformed) variable.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.signal import lfilter

from cfheat.ode_reduction import ModeODE
from cfheat.quadrature import simpson_panels

__all__ = [
    "RootCase",
    "RootClassification",
    "TemporalSolution",
    "SingularSystemError",
    "discriminant",
    "classify_cubic",
    "fundamental_matrix",
    "solve_constants",
    "solve_mode_closed_form",
    "solve_mode_companion",
    "solve_mode",
    "companion_matrix",
]

DEGENERACY_TOL = 1e-9
DEFAULT_MOMENT_INTERVALS = 2**12
DEFAULT_RK_STEPS = 2**14


class SingularSystemError(np.linalg.LinAlgError):
    pass


class RootCase(enum.Enum):
    THREE_DISTINCT_REAL = "three_distinct_real"
    ONE_REAL_CONJUGATE_PAIR = "one_real_conjugate_pair"
    DOUBLE_ROOT = "double_root"
    TRIPLE_ROOT = "triple_root"


# {{{ cubic classification


def discriminant(A1: float, A2: float, A3: float) -> float:
    """Discriminant of the monic cubic ``mu^3 + A1 mu^2 + A2 mu + A3``."""
    return (
        -4.0 * A1**3 * A3
        + A1**2 * A2**2
        - 4.0 * A2**3
        + 18.0 * A1 * A2 * A3
        - 27.0 * A3**2
    )


@dataclass(frozen=True)
class RootClassification:
    """Discriminant, case tag and roots of the characteristic cubic.

    ``roots`` are complex numbers: ascending reals for the distinct real
    case, ``(mu_1, mu_21 + i mu_22, mu_21 - i mu_22)`` with ``mu_22 > 0`` for
    the conjugate case, ``(mu_d, mu_d, mu_s)`` for a double root.
    """

    coefficients: tuple[float, float, float]
    discriminant: float
    case: RootCase
    roots: tuple[complex, complex, complex]

    @property
    def real_roots(self) -> tuple[float, ...]:
        return tuple(r.real for r in self.roots if r.imag == 0.0)

    def residuals(self) -> np.ndarray:
        A1, A2, A3 = self.coefficients
        return np.array([abs(((r + A1) * r + A2) * r + A3) for r in self.roots])


def _polish(root: complex, A1: float, A2: float, A3: float) -> complex:
    p = ((root + A1) * root + A2) * root + A3
    dp = (3.0 * root + 2.0 * A1) * root + A2
    return root - p / dp if dp != 0 else root


def _raw_roots(A1: float, A2: float, A3: float, delta: float) -> list[complex]:
    # depressed cubic y^3 + p y + r with mu = y - A1/3
    shift = A1 / 3.0
    p = A2 - A1 * shift
    r = 2.0 * shift**3 - shift * A2 + A3
    if delta > 0 and p < 0:
        amp = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * r / (p * amp)))
        theta = math.acos(arg) / 3.0
        ys = [amp * math.cos(theta - 2.0 * math.pi * j / 3.0) for j in range(3)]
        return [complex(y - shift) for y in sorted(ys)]
    # one real root by Cardano, in the cancellation-free form
    half = r / 2.0
    disc = half * half + p**3 / 27.0
    sq = math.sqrt(max(disc, 0.0))
    u = np.cbrt(-half - math.copysign(sq, half)) if half != 0 else np.cbrt(sq)
    y1 = float(u - p / (3.0 * u)) if u != 0 else 0.0
    mu1 = y1 - shift
    # remaining pair from Vieta: sum and pairwise product
    s = -A1 - mu1
    prod = A2 - mu1 * s
    rad = cmath.sqrt(s * s / 4.0 - prod)
    return [complex(mu1), s / 2.0 + rad, s / 2.0 - rad]


def classify_cubic(
    A1: float, A2: float, A3: float, tol: float = DEGENERACY_TOL
) -> RootClassification:
    """Classify ``mu^3 + A1 mu^2 + A2 mu + A3`` by the sign of its discriminant.

    ``|Delta| <= tol * s**6`` counts as zero, where
    ``s = max(1, |A1|, |A2|**(1/2), |A3|**(1/3))`` has the size of the
    largest root (``Delta`` is homogeneous of degree 6 in the roots). In that
    branch the nearly coincident roots are merged (their mean), and the
    double/triple split is decided from pairwise root distances.
    """
    A1, A2, A3 = float(A1), float(A2), float(A3)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    delta = discriminant(A1, A2, A3)
    scale = max(1.0, abs(A1), math.sqrt(abs(A2)), abs(A3) ** (1.0 / 3.0))
    raw = _raw_roots(A1, A2, A3, delta)

    if abs(delta) <= tol * scale**6:
        pairs = [(abs(raw[i] - raw[j]), i, j) for i, j in ((0, 1), (0, 2), (1, 2))]
        pairs.sort()
        closest, i, j = pairs[0]
        widest = pairs[-1][0]
        if widest <= 4.0 * closest + math.sqrt(np.finfo(float).eps) * scale:
            mu = -A1 / 3.0
            return RootClassification(
                (A1, A2, A3), delta, RootCase.TRIPLE_ROOT, (complex(mu),) * 3
            )
        # the simple root is well conditioned; the double one follows from the trace
        (lone,) = {0, 1, 2} - {i, j}
        mu_s = _polish(complex(raw[lone].real), A1, A2, A3).real
        mu_d = 0.5 * (-A1 - mu_s)
        return RootClassification(
            (A1, A2, A3),
            delta,
            RootCase.DOUBLE_ROOT,
            (complex(mu_d), complex(mu_d), complex(mu_s)),
        )

    roots = [_polish(r, A1, A2, A3) for r in raw]
    if delta > 0:
        ordered = tuple(sorted((complex(r.real) for r in roots), key=lambda z: z.real))
        return RootClassification(
            (A1, A2, A3), delta, RootCase.THREE_DISTINCT_REAL, ordered
        )

    real = min(roots, key=lambda z: abs(z.imag))
    pair = max(roots, key=lambda z: z.imag)
    upper = complex(pair.real, abs(pair.imag))
    return RootClassification(
        (A1, A2, A3),
        delta,
        RootCase.ONE_REAL_CONJUGATE_PAIR,
        (complex(real.real), upper, upper.conjugate()),
    )


# }}}


# {{{ fundamental systems


@dataclass(frozen=True)
class _Basis:
    """``t^p e^{mu t}`` (real or imaginary part)."""

    mu: complex
    power: int = 0
    imag: bool = False

    def derivatives(self, t: np.ndarray, upto: int, shift: float = 0.0) -> np.ndarray:
        """Rows ``d^r/dt^r [t^p e^{(mu - shift) t}]`` for ``r = 0..upto``."""
        nu = self.mu - shift
        t = np.asarray(t, dtype=float)
        expo = np.exp(nu * t) if nu.imag else np.exp(nu.real * t).astype(complex)
        out = np.empty((upto + 1,) + t.shape)
        p = self.power
        for r in range(upto + 1):
            acc = np.zeros(t.shape, dtype=complex)
            for i in range(min(r, p) + 1):
                falling = math.factorial(p) // math.factorial(p - i)
                acc = acc + math.comb(r, i) * nu ** (r - i) * falling * t ** (p - i)
            value = acc * expo
            out[r] = value.imag if self.imag else value.real
        return out


def _fundamental_system(classification: RootClassification) -> list[_Basis]:
    roots = classification.roots
    case = classification.case
    if case is RootCase.THREE_DISTINCT_REAL:
        return [_Basis(r) for r in roots]
    if case is RootCase.ONE_REAL_CONJUGATE_PAIR:
        return [_Basis(roots[0]), _Basis(roots[1]), _Basis(roots[1], imag=True)]
    if case is RootCase.DOUBLE_ROOT:
        return [_Basis(roots[0]), _Basis(roots[0], 1), _Basis(roots[2])]
    return [_Basis(roots[0]), _Basis(roots[0], 1), _Basis(roots[0], 2)]


def fundamental_matrix(classification: RootClassification, beta: float) -> np.ndarray:
    """Values and first two derivatives at 0 of the shifted fundamental system.

    Column ``j`` holds ``phi_j(0), phi_j'(0), phi_j''(0)`` where
    ``phi_j(t) = e^{-beta t} psi_j(t)``; for distinct real roots this is the
    Vandermonde matrix in ``nu_j = mu_j - beta``.
    """
    zero = np.zeros(1)
    columns = [b.derivatives(zero, 2, shift=beta)[:, 0] for b in _fundamental_system(classification)]
    return np.column_stack(columns)


def solve_constants(
    classification: RootClassification,
    beta: float,
    initial: Sequence[float],
    d: Sequence[float] = (0.0, 0.0, 0.0),
) -> np.ndarray:
    """Homogeneous constants matching ``T^(i)(0) = initial[i]``.

    ``d`` is the particular solution's contribution ``T_p^(i)(0)``. The
    3x3 system is solved by LU with partial pivoting.
    """
    matrix = fundamental_matrix(classification, beta)
    rhs = np.asarray(initial, dtype=float) - np.asarray(d, dtype=float)
    if np.linalg.cond(matrix) > 1e14:
        raise SingularSystemError(
            f"fundamental matrix is numerically singular for {classification.case.value}"
        )
    return np.linalg.solve(matrix, rhs)


# }}}


# {{{ exponential moments


class _Moments:
    """Cumulative ``I_p(t) = int_0^t (t-z)^p/p! e^{mu (t-z)} g(z) dz``, ``p <= P``.

    Tabulated on a uniform grid by an exact exponential recursion across
    panels and Simpson's rule inside each panel; evaluation between grid
    nodes propagates from the nearest node below with one partial panel.
    """

    def __init__(self, mu: complex, max_power: int, g, q: float, intervals: int):
        self.mu = complex(mu)
        self.max_power = max_power
        self.g = g
        self.q = q
        self.h = q / intervals
        self.intervals = intervals
        self.grid = np.linspace(0.0, q, intervals + 1)

        h = self.h
        g_left = g(self.grid[:-1])
        g_mid = g(self.grid[:-1] + 0.5 * h)
        g_right = g(self.grid[1:])
        decay = cmath.exp(self.mu * h)
        table = np.zeros((max_power + 1, intervals + 1), dtype=complex)
        for p in range(max_power + 1):
            local = self._local(p, h, g_left, g_mid, g_right)
            carry = np.zeros(intervals, dtype=complex)
            for r in range(p):
                carry += h ** (p - r) / math.factorial(p - r) * table[r, :-1]
            table[p, 1:] = lfilter([1.0], [1.0, -decay], decay * carry + local)
        self.table = table

    def _local(self, p, width, g_left, g_mid, g_right):
        mu = self.mu
        left = width**p / math.factorial(p) * np.exp(mu * width) * g_left
        mid = (0.5 * width) ** p / math.factorial(p) * np.exp(0.5 * mu * width) * g_mid
        right = g_right if p == 0 else 0.0 * g_right
        return simpson_panels(left, mid, right, width)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        """Array of shape ``(P + 1,) + t.shape``."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.q * (1 + 1e-12)):
            raise ValueError(f"evaluation outside [0, {self.q}]")
        idx = np.minimum((t / self.h).astype(int), self.intervals - 1)
        base = self.grid[idx]
        delta = np.clip(t - base, 0.0, None)
        g_left = self.g(base)
        g_mid = self.g(base + 0.5 * delta)
        g_right = self.g(t)
        decay = np.exp(self.mu * delta)
        out = np.empty((self.max_power + 1,) + t.shape, dtype=complex)
        for p in range(self.max_power + 1):
            acc = np.zeros(t.shape, dtype=complex)
            for r in range(p + 1):
                acc += delta ** (p - r) / math.factorial(p - r) * self.table[r, idx]
            out[p] = decay * acc + self._local(p, delta, g_left, g_mid, g_right)
        return out


def _greens_terms(classification: RootClassification) -> list[tuple[complex, int, complex]]:
    """Impulse response ``G = Re sum c t^p/p! e^{mu t}`` as ``(mu, p, c)`` terms.

    ``G(0) = G'(0) = 0`` and ``G''(0) = 1`` in every case.
    """
    r = classification.roots
    case = classification.case
    if case is RootCase.THREE_DISTINCT_REAL:
        return [
            (r[j], 0, 1.0 / ((r[j] - r[(j + 1) % 3]) * (r[j] - r[(j + 2) % 3])))
            for j in range(3)
        ]
    if case is RootCase.ONE_REAL_CONJUGATE_PAIR:
        mu1, mu2, mu3 = r
        return [
            (mu1, 0, 1.0 / ((mu1 - mu2) * (mu1 - mu3))),
            # conjugate partner folded in by taking twice the real part
            (mu2, 0, 2.0 / ((mu2 - mu1) * (mu2 - mu3))),
        ]
    if case is RootCase.DOUBLE_ROOT:
        mu_d, mu_s = r[0], r[2]
        gap = mu_s - mu_d
        return [
            (mu_s, 0, 1.0 / gap**2),
            (mu_d, 0, -1.0 / gap**2),
            (mu_d, 1, -1.0 / gap),
        ]
    return [(r[0], 2, 1.0)]


def _differentiate_terms(terms):
    """d/dt of ``sum c I_{mu,p}``, dropping ``g`` terms (they cancel for r <= 2)."""
    out: dict[tuple[complex, int], complex] = {}
    for mu, p, c in terms:
        out[(mu, p)] = out.get((mu, p), 0.0) + c * mu
        if p > 0:
            out[(mu, p - 1)] = out.get((mu, p - 1), 0.0) + c
    return [(mu, p, c) for (mu, p), c in out.items()]


# }}}


# {{{ solutions


class TemporalSolution:
    """Modal solution ``T_m(t)`` on ``[0, q]``.

    ``state(t)`` returns the transformed derivatives
    ``Tt, Tt', ..., Tt^(n-1)`` (``n`` the ODE order); the top derivative
    comes from the ODE itself, and everything is mapped back to ``T``.
    """

    def __init__(
        self,
        ode: ModeODE,
        state: Callable[[np.ndarray], np.ndarray],
        provenance: str,
        classification: RootClassification | None = None,
        constants: np.ndarray | None = None,
    ):
        self.ode = ode
        self._state = state
        self.provenance = provenance
        self.classification = classification
        self.constants = constants

    @property
    def m(self) -> int:
        return self.ode.m

    @property
    def order(self) -> int:
        return self.ode.order

    def __repr__(self):
        return f"TemporalSolution(m={self.m}, provenance={self.provenance!r})"

    def tilde_derivatives(self, t) -> np.ndarray:
        """Rows ``Tt^(r)(t)`` for ``r = 0..order``."""
        t = np.asarray(t, dtype=float)
        state = self._state(t)
        coeffs = self.ode.coefficients
        top = np.asarray(self.ode.rhs(t), dtype=float).copy()
        for r in range(self.order):
            top -= coeffs[self.order - r] * state[r]
        return np.concatenate([state, top[None]], axis=0)

    def derivatives(self, t, upto: int | None = None) -> np.ndarray:
        """Rows ``T^(r)(t)`` for ``r = 0..upto`` (default: the ODE order)."""
        upto = self.order if upto is None else upto
        if upto > self.order:
            raise ValueError(f"derivatives beyond order {self.order} are not available")
        t = np.asarray(t, dtype=float)
        tilde = self.tilde_derivatives(t)
        beta = self.ode.beta
        damp = np.exp(-beta * t)
        out = np.empty((upto + 1,) + t.shape)
        for r in range(upto + 1):
            acc = np.zeros(t.shape)
            weight = 1.0
            # T^(r) e^{beta t} = sum_i binom(r, i) (-beta)^(r-i) Tt^(i)
            for i in range(r, -1, -1):
                acc += math.comb(r, i) * weight * tilde[i]
                weight *= -beta
            out[r] = acc * damp
        return out

    def derivative(self, t, r: int):
        return self.derivatives(t, r)[r]

    def __call__(self, t):
        return self.derivatives(t, 0)[0]

    def sup_norm(self, samples: int = 1025) -> float:
        t = np.linspace(0.0, self.ode.q, samples)
        return float(np.max(np.abs(self(t))))


def solve_mode_closed_form(
    ode: ModeODE,
    classification: RootClassification | None = None,
    *,
    intervals: int = DEFAULT_MOMENT_INTERVALS,
) -> TemporalSolution:
    """Closed-form solution of a third-order reduced IVP."""
    if ode.order != 3:
        raise ValueError(f"closed-form solver handles order 3 only, got {ode.order}")
    if classification is None:
        classification = classify_cubic(*ode.coefficients[1:])

    beta = ode.beta
    basis = _fundamental_system(classification)
    greens = _greens_terms(classification)

    max_power: dict[complex, int] = {}
    for mu, p, _ in greens:
        max_power[mu] = max(max_power.get(mu, 0), p)
    moments = {
        mu: _Moments(mu, p, ode.rhs, ode.q, intervals) for mu, p in max_power.items()
    }
    term_sets = [greens]
    for _ in range(2):
        term_sets.append(_differentiate_terms(term_sets[-1]))

    def particular(t):
        values = {mu: mom(t) for mu, mom in moments.items()}
        out = np.zeros((3,) + np.shape(t))
        for r, terms in enumerate(term_sets):
            acc = np.zeros(np.shape(t), dtype=complex)
            for mu, p, c in terms:
                acc += c * values[mu][p]
            out[r] = acc.real
        return out

    zero = np.zeros(1)
    tilde_p0 = particular(zero)[:, 0]
    d = np.array(_to_physical(tilde_p0, beta))
    constants = solve_constants(classification, beta, ode.physical_initial, d)

    def state(t):
        t = np.asarray(t, dtype=float)
        out = particular(t)
        for c, b in zip(constants, basis):
            out += c * b.derivatives(t, 2)
        return out

    return TemporalSolution(
        ode, state, "closed-form", classification=classification, constants=constants
    )


def _to_physical(tilde: Sequence[float], beta: float) -> list[float]:
    return [
        sum(math.comb(r, i) * (-beta) ** (r - i) * tilde[i] for i in range(r + 1))
        for r in range(len(tilde))
    ]


def companion_matrix(coefficients: Sequence[float]) -> np.ndarray:
    """First-order system matrix for ``(Tt, Tt', ..., Tt^(n-1))``."""
    coefficients = np.asarray(coefficients, dtype=float)
    n = coefficients.size - 1
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1] = -coefficients[:0:-1]
    return A


def _rk4_affine_map(A: np.ndarray, h: float):
    """Classical RK4 step for ``y' = A y + e_n g`` as ``y+ = R y + w0 g0 + wm gm + w1 g1``."""
    n = A.shape[0]
    e = np.zeros(n)
    e[-1] = 1.0

    def step(y, g0, gm, g1):
        k1 = A @ y + e * g0
        k2 = A @ (y + 0.5 * h * k1) + e * gm
        k3 = A @ (y + 0.5 * h * k2) + e * gm
        k4 = A @ (y + h * k3) + e * g1
        return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    R = np.column_stack([step(col, 0.0, 0.0, 0.0) for col in np.eye(n)])
    zero = np.zeros(n)
    return R, step(zero, 1.0, 0.0, 0.0), step(zero, 0.0, 1.0, 0.0), step(zero, 0.0, 0.0, 1.0)


def solve_mode_companion(ode: ModeODE, *, steps: int = DEFAULT_RK_STEPS) -> TemporalSolution:
    """Integrate the reduced IVP of any order with fixed-step RK4.

    Dense output is a cubic Hermite interpolant of the state and its
    derivative at the step nodes.
    """
    if steps < 16:
        raise ValueError(f"need at least 16 steps, got {steps}")
    A = companion_matrix(ode.coefficients)
    h = ode.q / steps
    t = np.linspace(0.0, ode.q, steps + 1)
    g = np.asarray(ode.rhs(t), dtype=float)
    g_mid = np.asarray(ode.rhs(t[:-1] + 0.5 * h), dtype=float)
    R, w0, wm, w1 = _rk4_affine_map(A, h)
    forcing = np.outer(g[:-1], w0) + np.outer(g_mid, wm) + np.outer(g[1:], w1)

    n = ode.order
    y = np.empty((steps + 1, n))
    y[0] = ode.initial
    current = y[0].copy()
    for i in range(steps):
        current = R @ current + forcing[i]
        y[i + 1] = current
    dy = y @ A.T
    dy[:, -1] += g
    spline = CubicHermiteSpline(t, y, dy, axis=0)

    def state(tt):
        tt = np.asarray(tt, dtype=float)
        return np.moveaxis(spline(tt), -1, 0)

    return TemporalSolution(ode, state, "companion")


def solve_mode(ode: ModeODE, solver: str = "auto") -> TemporalSolution:
    if solver == "auto":
        solver = "closed-form" if ode.order == 3 else "companion"
    if solver == "closed-form":
        return solve_mode_closed_form(ode)
    if solver == "companion":
        return solve_mode_companion(ode)
    raise ValueError(f"unknown solver {solver!r}")


# }}}
