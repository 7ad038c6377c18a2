"""Reference computations that share no code path with the package.

* ``cf_quad``: adaptive Gauss-Kronrod (``scipy.integrate.quad``) of the CF
  kernel integral, unrelated to the package's trapezoid/Richardson rule.
* ``exp_poly_cf``: exact CF derivatives of ``P(t) e^{-beta t}``. With
  ``g' = Q(s) e^{-beta s}`` the kernel integral collapses to
  ``e^{-beta t} int_0^t Q``, a polynomial antiderivative.
* ``hockey_stick_coefficients``: reduced-ODE coefficients from
  ``sum_{i<=n-r+1} binom(n-i, r-1) = binom(n+1, r)``, a closed form of the
  nested sums the package evaluates term by term.
* ``k2_coefficients``: the third-order coefficients written out by hand.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad


def beta_of(alpha: float) -> float:
    return alpha / (1.0 - alpha)


def cf_quad(gprime, alpha: float, t: float, a: float = 0.0) -> float:
    beta = beta_of(alpha)
    value, _ = quad(
        lambda s: gprime(s) * math.exp(-beta * (t - s)), a, t, epsabs=1e-13, epsrel=1e-12, limit=200
    )
    return value / (1.0 - alpha)


class ExpPoly:
    """``P(t) e^{c t}`` with exact derivatives."""

    def __init__(self, coef, c: float):
        self.P = Polynomial(coef)
        self.c = float(c)

    def deriv(self) -> "ExpPoly":
        return ExpPoly((self.P.deriv() + self.c * self.P).coef, self.c)

    def nth(self, n: int) -> "ExpPoly":
        out = self
        for _ in range(n):
            out = out.deriv()
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.P(t) * np.exp(self.c * t)


def exp_poly_cf(T: ExpPoly, alpha: float, n: int) -> ExpPoly:
    """``D^{alpha+n} T`` for ``T = P e^{-beta t}``, itself of the same form."""
    beta = beta_of(alpha)
    if abs(T.c + beta) > 1e-15:
        raise ValueError("exact formula needs the exponent -beta")
    Q = T.nth(n + 1).P
    antiderivative = Q.integ(lbnd=0.0)
    return ExpPoly((antiderivative / (1.0 - alpha)).coef, -beta)


def manufactured_forcing(T: ExpPoly, alpha: float, lambdas, m: int) -> ExpPoly:
    """``sum_n lambda_n D^{alpha+n} T + (m pi)^2 T`` in closed form."""
    beta = beta_of(alpha)
    acc = Polynomial((m * math.pi) ** 2 * T.P.coef)
    for n, lam in enumerate(lambdas):
        acc = acc + lam * exp_poly_cf(T, alpha, n).P
    return ExpPoly(acc.coef, -beta)


def hockey_stick_coefficients(alpha: float, lambdas, m: int) -> np.ndarray:
    """Unnormalized ``(B_{k+1}, ..., B_0)``."""
    beta = beta_of(alpha)
    k = len(lambdas) - 1
    B = np.zeros(k + 2)
    for r in range(k + 2):
        B[r] = sum(
            lam * math.comb(n + 1, r) * (-beta) ** (n + 1 - r)
            for n, lam in enumerate(lambdas)
            if r <= n + 1
        )
    B[1] += (m * math.pi) ** 2 * (1.0 - alpha)
    return B[::-1]


def k2_coefficients(alpha: float, lambdas, m: int) -> tuple[float, float, float]:
    l0, l1, l2 = lambdas
    b = -alpha / (1.0 - alpha)
    A1 = 3.0 * b + l1 / l2
    A2 = 3.0 * b**2 + (l0 + 2.0 * b * l1 + (m * math.pi) ** 2 * (1.0 - alpha)) / l2
    A3 = b**3 + (b**2 * l1 + b * l0) / l2
    return A1, A2, A3


def cubic_from_roots(r1, r2, r3) -> tuple[float, float, float]:
    """Monic coefficients of ``(mu - r1)(mu - r2)(mu - r3)``."""
    c = np.poly([r1, r2, r3])
    return float(c[1].real), float(c[2].real), float(c[3].real)


def product_derivatives(coef, kind: str, w: float, order: int):
    """Evaluators of ``(P h)^(j)``, ``j = 0..order``, for ``h`` in {1, sin(w t), exp(w t)}.

    Uses the Leibniz rule with hand-written derivatives of ``h``.
    """
    P = Polynomial(coef)

    def h(j):
        if kind == "poly":
            return (lambda t: np.ones_like(t)) if j == 0 else (lambda t: np.zeros_like(t))
        if kind == "sin":
            # d^j sin(w t) = w^j sin(w t + j pi / 2)
            return lambda t: w**j * np.sin(w * t + j * math.pi / 2)
        if kind == "exp":
            return lambda t: w**j * np.exp(w * t)
        raise ValueError(kind)

    def make(r):
        def g(t):
            t = np.asarray(t, dtype=float)
            return sum(math.comb(r, j) * P.deriv(r - j)(t) * h(j)(t) for j in range(r + 1))

        return g

    return [make(r) for r in range(order + 1)]


def random_smooth_functions(count: int, seed: int = 7):
    """``count`` test functions ``(label, [g, g', ..., g'''])``."""
    rng = np.random.default_rng(seed)
    kinds = ["poly", "sin", "exp"]
    out = []
    for i in range(count):
        degree = int(rng.integers(0, 6))
        coef = rng.uniform(-2, 2, degree + 1)
        kind = kinds[i % 3]
        w = float(rng.uniform(0.5, 3.0)) if kind != "exp" else float(rng.uniform(-1.5, 1.0))
        out.append((f"{kind}{degree}#{i}", product_derivatives(coef, kind, w, 3)))
    return out


def manufactured_ode(coefficients, beta: float, q: float = 1.0, m: int = 1):
    """Reduced IVP whose exact solution is ``T*(t) = t^3 e^{-beta t}``.

    ``Tt* = t^3`` so ``g = 6 + 6 A1 t + 3 A2 t^2 + A3 t^3`` and all initial
    data vanish.
    """
    from cfheat.ode_reduction import ModeODE

    _, A1, A2, A3 = coefficients
    g = Polynomial([6.0, 6.0 * A1, 3.0 * A2, A3])
    ode = ModeODE(m, np.asarray(coefficients, float), lambda t: g(np.asarray(t, float)), (0.0, 0.0, 0.0), beta, q)
    exact = ExpPoly([0, 0, 0, 1.0], -beta)
    return ode, exact


def random_k2_problem(rng, want: str):
    """A reduced third-order IVP from a random ``(alpha, lambda, m, f_m)``.

    ``want`` selects the discriminant sign ("positive", "negative") by
    rejection sampling over the physical parameters, or a constructed
    repeated root ("zero"), which has measure zero in parameter space.
    """
    from cfheat.cf_operator import FractionalOrder
    from cfheat.ode_reduction import ModeODE, ProblemSpec, reduce_mode
    from cfheat.spectral import ModalCoefficients
    from cfheat.temporal_solver import discriminant

    coef = rng.uniform(-1, 1, 4)
    P = Polynomial(np.concatenate([[0.0], coef]))
    fm_value, fm_slope = P, P.deriv()

    if want == "zero":
        beta = float(rng.uniform(0.2, 3))
        mu_d, mu_s = rng.uniform(-2, 2, 2)
        if rng.random() < 0.5:
            mu_s = mu_d
        _, A1, A2, A3 = np.poly([mu_d, mu_d, mu_s])
        initial = tuple(rng.uniform(-1, 1, 3))
        ode = ModeODE(1, np.array([1.0, A1, A2, A3]), lambda t: fm_value(np.asarray(t, float)) * np.exp(beta * np.asarray(t, float)), initial, beta, 1.0)
        return ode

    while True:
        alpha = float(rng.uniform(0.1, 0.9))
        lambdas = tuple(rng.uniform(-4, 4, 2)) + (float(rng.uniform(0.3, 2)),)
        if want == "positive":
            lambdas = (lambdas[0], float(rng.uniform(6, 30)) * lambdas[2], lambdas[2])
        m = int(rng.integers(1, 4))
        spec = ProblemSpec(FractionalOrder(alpha), 2, lambdas, initial={m: tuple(rng.uniform(-1, 1, 3))}, modes=m)
        fm = ModalCoefficients(m, fm_value, fm_slope)
        ode = reduce_mode(spec, m, fm)
        delta = discriminant(*ode.coefficients[1:])
        if (delta > 1e-3) if want == "positive" else (delta < -1e-3):
            return ode
