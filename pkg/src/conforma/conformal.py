"""Conformal Schouten calculus on flat domains and the circle-sphere product.

The flat conformal matrix of a positive field u is

    A^u = -(2/(n-2)) u^{-(n+2)/(n-2)} Hess(u)
          + (2n/(n-2)^2) u^{-2n/(n-2)} grad(u) x grad(u)
          - (2/(n-2)^2) u^{-2n/(n-2)} |grad(u)|^2 I,

and its eigenvalue vector is invariant under Mobius conjugation: the pullback
u_psi = |J_psi|^{(n-2)/(2n)} (u o psi) satisfies
lambda(A^{u_psi}) = lambda(A^u) o psi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PositivityError, SingularityError
from .fields import CircleField, FDField, ScalarField, finite_difference
from .jacobi import jacobi_eigenvalues

POLE_GUARD_ANALYTIC = 1e-12


# ---------------------------------------------------------------------------
# Mobius maps


@dataclass(frozen=True)
class Translate:
    v: tuple

    def apply(self, x):
        return x + np.asarray(self.v, dtype=float)

    def jac_det_abs(self, x):
        return 1.0

    def inverse(self):
        return Translate(tuple(-c for c in self.v))


@dataclass(frozen=True)
class Scale:
    c: float

    def __post_init__(self):
        if self.c == 0:
            raise DomainError("scale generator needs a nonzero constant")

    def apply(self, x):
        return self.c * x

    def jac_det_abs(self, x):
        return abs(self.c) ** len(x)

    def inverse(self):
        return Scale(1.0 / self.c)


@dataclass(frozen=True)
class Invert:
    guard: float = POLE_GUARD_ANALYTIC

    def apply(self, x):
        r2 = float(x @ x)
        if r2 <= self.guard**2:
            raise SingularityError("evaluation inside the inversion pole guard")
        return x / r2

    def jac_det_abs(self, x):
        r2 = float(x @ x)
        if r2 <= self.guard**2:
            raise SingularityError("evaluation inside the inversion pole guard")
        return r2 ** (-len(x))

    def inverse(self):
        return Invert(self.guard)


@dataclass(frozen=True)
class MoebiusMap:
    """Word of generators, applied first-to-last: psi(x) = g_m(...g_1(x))."""

    word: tuple

    def apply(self, x):
        y = np.asarray(x, dtype=float)
        for g in self.word:
            y = g.apply(y)
        return y

    def jac_det_abs(self, x):
        """|det D psi|(x), by the chain rule along the word."""
        y = np.asarray(x, dtype=float)
        det = 1.0
        for g in self.word:
            det *= g.jac_det_abs(y)
            y = g.apply(y)
        return det

    def inverse(self):
        return MoebiusMap(tuple(g.inverse() for g in reversed(self.word)))

    def then(self, other: "MoebiusMap") -> "MoebiusMap":
        """Map equal to: apply self first, then other (other o self)."""
        return MoebiusMap(self.word + other.word)


def identity_map() -> MoebiusMap:
    return MoebiusMap(())


def sphere_inversion_map(x, lam: float) -> MoebiusMap:
    """y -> x + lam^2 (y - x)/|y - x|^2 as a Mobius word."""
    if not lam > 0:
        raise DomainError("inversion radius must be positive")
    x = tuple(float(c) for c in np.atleast_1d(x))
    neg = tuple(-c for c in x)
    return MoebiusMap(
        (Translate(neg), Scale(1.0 / lam), Invert(), Scale(lam), Translate(x))
    )


# ---------------------------------------------------------------------------
# Pullback fields (one chain-rule wrapper per generator)


class _TranslatePullback(ScalarField):
    def __init__(self, inner: ScalarField, v):
        super().__init__(inner.n, None)
        self.inner = inner
        self.v = np.asarray(v, dtype=float)

    def _value(self, x):
        return self.inner.value(x + self.v)

    def values(self, X):
        return self.inner.values(np.atleast_2d(X) + self.v)

    def _grad(self, x):
        return self.inner.grad(x + self.v)

    def _hess(self, x):
        return self.inner.hess(x + self.v)


class _ScalePullback(ScalarField):
    def __init__(self, inner: ScalarField, c: float):
        super().__init__(inner.n, None)
        self.inner = inner
        self.c = float(c)
        self.pref = abs(self.c) ** (0.5 * (inner.n - 2))

    def _value(self, x):
        return self.pref * self.inner.value(self.c * x)

    def values(self, X):
        return self.pref * self.inner.values(self.c * np.atleast_2d(X))

    def _grad(self, x):
        return self.pref * self.c * self.inner.grad(self.c * x)

    def _hess(self, x):
        return self.pref * self.c**2 * self.inner.hess(self.c * x)


class _KelvinPullback(ScalarField):
    """w(x) = |x|^{2-n} u(x/|x|^2) with exact chain-rule derivatives."""

    def __init__(self, inner: ScalarField, guard: float = POLE_GUARD_ANALYTIC):
        super().__init__(inner.n, None)
        self.inner = inner
        self.guard = guard

    def _point(self, x):
        r2 = float(x @ x)
        if r2 <= self.guard**2:
            raise SingularityError("evaluation inside the inversion pole guard")
        return x / r2, r2

    def _value(self, x):
        y, r2 = self._point(x)
        return r2 ** (0.5 * (2.0 - self.n)) * self.inner.value(y)

    def values(self, X):
        X = np.atleast_2d(X)
        r2 = np.einsum("ij,ij->i", X, X)
        if np.any(r2 <= self.guard**2):
            raise SingularityError("evaluation inside the inversion pole guard")
        Y = X / r2[:, None]
        return r2 ** (0.5 * (2.0 - self.n)) * self.inner.values(Y)

    def _grad(self, x):
        n = self.n
        y, r2 = self._point(x)
        r = math.sqrt(r2)
        u = self.inner.value(y)
        gu = self.inner.grad(y)
        p = r ** (2.0 - n)
        dp = (2.0 - n) * r ** (-n) * x
        dy = (np.eye(n) - 2.0 * np.outer(x, x) / r2) / r2
        return dp * u + p * (dy.T @ gu)

    def _hess(self, x):
        n = self.n
        y, r2 = self._point(x)
        r = math.sqrt(r2)
        u = self.inner.value(y)
        gu = self.inner.grad(y)
        hu = self.inner.hess(y)
        p = r ** (2.0 - n)
        dp = (2.0 - n) * r ** (-n) * x
        hp = (2.0 - n) * (r ** (-n) * np.eye(n) - n * r ** (-n - 2.0) * np.outer(x, x))
        dy = (np.eye(n) - 2.0 * np.outer(x, x) / r2) / r2
        # second derivatives of y_k = x_k / |x|^2
        d2y = np.zeros((n, n, n))  # [k, i, j]
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    d2y[k, i, j] = (
                        -2.0
                        * (
                            (i == k) * x[j]
                            + (j == k) * x[i]
                            + (i == j) * x[k]
                        )
                        / r2**2
                        + 8.0 * x[i] * x[j] * x[k] / r2**3
                    )
        grad_comp = dy.T @ gu  # gradient of u o y
        hess_comp = dy.T @ hu @ dy + np.einsum("k,kij->ij", gu, d2y)
        return (
            hp * u
            + np.outer(dp, grad_comp)
            + np.outer(grad_comp, dp)
            + p * hess_comp
        )


def _pullback_one(field: ScalarField, gen) -> ScalarField:
    if isinstance(gen, Translate):
        return _TranslatePullback(field, gen.v)
    if isinstance(gen, Scale):
        return _ScalePullback(field, gen.c)
    if isinstance(gen, Invert):
        return _KelvinPullback(field, gen.guard)
    raise DomainError(f"unknown Mobius generator {gen!r}")


def pullback_u(u: ScalarField, psi: MoebiusMap) -> ScalarField:
    """Conformal-factor pullback u_psi = |J_psi|^{(n-2)/(2n)} (u o psi).

    Analytic derivative mode propagates through the chain rule; a finite
    difference source keeps finite differences (same step and order).
    """
    fd = isinstance(u, FDField)
    base = u.inner if fd else u
    out = base
    for gen in reversed(psi.word):
        out = _pullback_one(out, gen)
    if fd:
        out = finite_difference(out, h=u.h, order=u.order)
    return out


def sphere_inversion_u(u: ScalarField, x, lam: float) -> ScalarField:
    """u_{x,lam}(y) = (lam/|y-x|)^{n-2} u(x + lam^2 (y-x)/|y-x|^2)."""
    return pullback_u(u, sphere_inversion_map(x, lam))


def sphere_inversion_value(u: ScalarField, x, lam: float, y) -> float:
    """Direct closed-form evaluation of u_{x,lam}(y) (no pullback chain)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d2 = float((y - x) @ (y - x))
    if d2 <= POLE_GUARD_ANALYTIC**2:
        raise SingularityError("u_{x,lam} evaluated at its pole y = x")
    kernel = (lam * lam / d2) ** (0.5 * (u.n - 2))
    return kernel * u.value(x + lam * lam * (y - x) / d2)


def sphere_inversion_values(u: ScalarField, x, lam: float, Y) -> np.ndarray:
    """Vectorized direct u_{x,lam} over rows of Y."""
    x = np.asarray(x, dtype=float)
    Y = np.atleast_2d(Y)
    D = Y - x
    d2 = np.einsum("ij,ij->i", D, D)
    if np.any(d2 <= POLE_GUARD_ANALYTIC**2):
        raise SingularityError("u_{x,lam} evaluated at its pole y = x")
    kernel = (lam * lam / d2) ** (0.5 * (u.n - 2))
    return kernel * u.values(x + lam * lam * D / d2[:, None])


# ---------------------------------------------------------------------------
# Conformal matrices and eigenvalues


def a_matrix_flat(u: ScalarField, x) -> np.ndarray:
    """Conformal Schouten matrix A^u(x) of the flat metric factor u."""
    x = np.asarray(x, dtype=float)
    n = u.n
    if n < 3:
        raise DomainError("conformal matrix needs n >= 3")
    val = u.value(x)
    if not val > 0:
        raise PositivityError(f"u(x) = {val:.6g} is not positive")
    g = u.grad(x)
    H = u.hess(x)
    c1 = -2.0 / (n - 2)
    c2 = 2.0 * n / (n - 2) ** 2
    c3 = -2.0 / (n - 2) ** 2
    w1 = val ** (-(n + 2.0) / (n - 2.0))
    w2 = val ** (-2.0 * n / (n - 2.0))
    g2 = float(g @ g)
    # assemble the upper triangle, then mirror: exact symmetry by construction
    A = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            val_ij = c1 * w1 * 0.5 * (H[i, j] + H[j, i]) + c2 * w2 * g[i] * g[j]
            if i == j:
                val_ij += c3 * w2 * g2
            A[i, j] = val_ij
            A[j, i] = val_ij
    return A


def schouten_eigen_flat(u: ScalarField, x) -> np.ndarray:
    """Ascending eigenvalues of A^u(x)."""
    return jacobi_eigenvalues(a_matrix_flat(u, x), ascending=True)


def product_background_eigenvalues(n: int) -> np.ndarray:
    """Schouten eigenvalues of the circle-sphere product metric:
    (-1/2, 1/2, ..., 1/2)."""
    lam = 0.5 * np.ones(n)
    lam[0] = -0.5
    return lam


def product_eigenvalues(vv: float, vp: float, vpp: float, n: int) -> np.ndarray:
    """Eigenvalues (lambda_t, lambda_s, ..., lambda_s) of the conformal
    Schouten tensor on S^1(L) x S^{n-1} for the factor v at one point."""
    if not vv > 0:
        raise PositivityError(f"profile value {vv:.6g} is not positive")
    conf = vv ** (-4.0 / (n - 2))
    lam_t = conf * (
        -2.0 / (n - 2) * vpp / vv
        + 2.0 * (n - 1) / (n - 2) ** 2 * (vp / vv) ** 2
        - 0.5
    )
    lam_s = conf * (-2.0 / (n - 2) ** 2 * (vp / vv) ** 2 + 0.5)
    out = np.full(n, lam_s)
    out[0] = lam_t
    return out


def schouten_eigen_product(v: CircleField, t: float, n: int) -> np.ndarray:
    """Product-manifold conformal eigenvalues for the profile v at angle t."""
    return product_eigenvalues(v.value(t), v.d1(t), v.d2(t), n)


# ---------------------------------------------------------------------------
# Checks


def conjugation_residual(u: ScalarField, psi: MoebiusMap, sample_points) -> float:
    """max over samples of || sorted lambda(A^{u_psi})(x) -
    sorted lambda(A^u)(psi(x)) ||_inf."""
    upsi = pullback_u(u, psi)
    worst = 0.0
    for x in np.atleast_2d(np.asarray(sample_points, dtype=float)):
        lam_pull = schouten_eigen_flat(upsi, x)
        lam_push = schouten_eigen_flat(u, psi.apply(x))
        worst = max(worst, float(np.max(np.abs(lam_pull - lam_push))))
    return worst


@dataclass(frozen=True)
class SuperharmonicReport:
    max_laplacian: float
    tol: float
    passed: bool
    samples_used: int

    def to_json_dict(self):
        return {
            "max_laplacian": self.max_laplacian,
            "tol": self.tol,
            "pass": self.passed,
            "samples_used": self.samples_used,
        }


def superharmonic_check(u: ScalarField, sample_points) -> SuperharmonicReport:
    """Reports the largest sampled Laplacian; superharmonic means <= 0
    (tolerance 1e-8 analytic, 1e-4 finite differences)."""
    pts = np.atleast_2d(np.asarray(sample_points, dtype=float))
    worst = -math.inf
    for x in pts:
        worst = max(worst, float(np.trace(u.hess(x))))
    tol = 1e-4 if u.mode == "fd" else 1e-8
    return SuperharmonicReport(
        max_laplacian=worst, tol=tol, passed=worst <= tol, samples_used=len(pts)
    )
