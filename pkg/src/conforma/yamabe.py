"""Damped-Newton solver for f(lam(A)) = 1 on the circle-sphere product.

The background metric on S^1(L) x S^{n-1} has Schouten eigenvalues
(-1/2, 1/2, ..., 1/2). A conformal factor v depending only on the circle
coordinate produces the two explicit eigenvalue branches of
conformal.product_eigenvalues, so the discretized problem lives on a single
periodic grid. The homotopy f_t(lam) = f(t lam + (1-t) sigma_1(lam) e)
connects a semilinear t = 0 problem (solved from a constant start) to the
full operator at t = 1.

Existence is not certified: solutions are accepted only through residual and
cone gates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .cones import CurvatureOperator, homotopy_operator
from .conformal import product_background_eigenvalues, product_eigenvalues
from .errors import ConeError, ConvergenceError, DomainError, PositivityError
from .radial import mu_star

MIN_STEP = 1e-4
STAGNATION_WINDOW = 5
STAGNATION_DROP = 1e-3
FD_JACOBIAN_SCALE = 1e-6

_deriv_cache: dict = {}


def _spectral_matrices(N: int, L: float):
    k = 2.0 * math.pi * np.fft.fftfreq(N, d=L / N)
    ik = 1j * k
    if N % 2 == 0:
        ik[N // 2] = 0.0  # drop the odd-derivative Nyquist mode
    eye = np.eye(N)
    D1 = np.real(np.fft.ifft(ik[:, None] * np.fft.fft(eye, axis=0), axis=0))
    D2 = np.real(np.fft.ifft(-(k**2)[:, None] * np.fft.fft(eye, axis=0), axis=0))
    return D1, D2


def _fd4_matrices(N: int, L: float):
    h = L / N
    D1 = np.zeros((N, N))
    D2 = np.zeros((N, N))
    for i in range(N):
        D1[i, (i + 2) % N] += -1.0 / (12.0 * h)
        D1[i, (i + 1) % N] += 8.0 / (12.0 * h)
        D1[i, (i - 1) % N] += -8.0 / (12.0 * h)
        D1[i, (i - 2) % N] += 1.0 / (12.0 * h)
        D2[i, (i + 2) % N] += -1.0 / (12.0 * h * h)
        D2[i, (i + 1) % N] += 16.0 / (12.0 * h * h)
        D2[i, i] += -30.0 / (12.0 * h * h)
        D2[i, (i - 1) % N] += 16.0 / (12.0 * h * h)
        D2[i, (i - 2) % N] += -1.0 / (12.0 * h * h)
    return D1, D2


def derivative_matrices(N: int, L: float, scheme: str):
    key = (N, L, scheme)
    if key not in _deriv_cache:
        if scheme == "spectral":
            _deriv_cache[key] = _spectral_matrices(N, L)
        elif scheme == "fd4":
            _deriv_cache[key] = _fd4_matrices(N, L)
        else:
            raise DomainError(f"unknown derivative scheme {scheme!r}")
    return _deriv_cache[key]


@dataclass
class PeriodicGrid:
    """Positive nodal values on the uniform periodic grid t_i = i L/N."""

    L: float
    values: np.ndarray
    scheme: str = "spectral"

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError("circle length L must be positive")
        self.values = np.asarray(self.values, dtype=float).copy()
        N = len(self.values)
        if N < 8 or N & (N - 1):
            raise DomainError(f"node count N={N} must be a power of two, >= 8")
        if not np.all(self.values > 0):
            raise PositivityError("grid values must be strictly positive")
        if self.scheme not in ("spectral", "fd4"):
            raise DomainError(f"unknown derivative scheme {self.scheme!r}")

    @property
    def N(self) -> int:
        return len(self.values)

    def nodes(self) -> np.ndarray:
        return np.arange(self.N) * (self.L / self.N)

    def matrices(self):
        return derivative_matrices(self.N, self.L, self.scheme)

    def with_values(self, values) -> "PeriodicGrid":
        return PeriodicGrid(L=self.L, values=values, scheme=self.scheme)

    def write_csv(self, path):
        from . import reporting

        rows = zip(self.nodes().tolist(), self.values.tolist())
        reporting.write_csv(path, ("t_node", "u"), rows)


def node_eigenvalues(g: PeriodicGrid, n: int) -> np.ndarray:
    """Per-node eigenvalue rows (lambda_t, lambda_s x (n-1))."""
    D1, D2 = g.matrices()
    u = g.values
    up = D1 @ u
    upp = D2 @ u
    out = np.empty((g.N, n))
    for i in range(g.N):
        out[i] = product_eigenvalues(float(u[i]), float(up[i]), float(upp[i]), n)
    return out


def residual(op: CurvatureOperator, g: PeriodicGrid) -> np.ndarray:
    """Per-node f(lam) - 1, gated on cone membership at every node."""
    n = op.n
    lam = node_eigenvalues(g, n)
    res = np.empty(g.N)
    bad = []
    for i in range(g.N):
        try:
            res[i] = op.f(lam[i]) - 1.0
        except ConeError:
            bad.append(i)
    if bad:
        raise ConeError(
            f"eigenvalues leave the cone at nodes {bad}",
            witness=[(i, lam[i].tolist()) for i in bad],
        )
    return res


def _eigen_partials(u, up, upp, n):
    """Partial derivatives of (lambda_t, lambda_s) in (v, v', v'')."""
    e4 = 4.0 / (n - 2.0)
    c = 2.0 / (n - 2.0)
    w = u ** (-e4)
    T = -c * upp / u + c * (n - 1.0) / (n - 2.0) * (up / u) ** 2 - 0.5
    S = -c / (n - 2.0) * (up / u) ** 2 + 0.5
    dt_dvpp = -c * w / u
    dt_dvp = w * (2.0 * c * (n - 1.0) / (n - 2.0)) * up / u**2
    dt_dv = -e4 * w / u * T + w * (
        c * upp / u**2 - 2.0 * c * (n - 1.0) / (n - 2.0) * up**2 / u**3
    )
    ds_dvp = -w * (2.0 * c / (n - 2.0)) * up / u**2
    ds_dv = -e4 * w / u * S + w * (2.0 * c / (n - 2.0)) * up**2 / u**3
    return dt_dv, dt_dvp, dt_dvpp, ds_dv, ds_dvp


def jacobian(op: CurvatureOperator, g: PeriodicGrid) -> np.ndarray:
    """d(residual_i)/d(u_j) assembled through the two eigenvalue branches."""
    n = op.n
    D1, D2 = g.matrices()
    u = g.values
    up = D1 @ u
    upp = D2 @ u
    dt_dv, dt_dvp, dt_dvpp, ds_dv, ds_dvp = _eigen_partials(u, up, upp, n)

    gt = np.empty(g.N)
    Gs = np.empty(g.N)
    for i in range(g.N):
        lam = product_eigenvalues(float(u[i]), float(up[i]), float(upp[i]), n)
        grad = np.asarray(op.grad_f(lam), dtype=float)
        gt[i] = grad[0]
        Gs[i] = float(grad[1:].sum())

    diag_v = gt * dt_dv + Gs * ds_dv
    diag_vp = gt * dt_dvp + Gs * ds_dvp
    diag_vpp = gt * dt_dvpp
    return np.diag(diag_v) + (diag_vp[:, None] * D1) + (diag_vpp[:, None] * D2)


def jacobian_fd(op: CurvatureOperator, g: PeriodicGrid, step: float | None = None):
    """Central-difference Jacobian oracle (step 1e-6 ||u||_inf by default)."""
    if step is None:
        step = FD_JACOBIAN_SCALE * float(np.max(np.abs(g.values)))
    N = g.N
    J = np.empty((N, N))
    for j in range(N):
        up = g.values.copy()
        dn = g.values.copy()
        up[j] += step
        dn[j] -= step
        J[:, j] = (residual(op, g.with_values(up)) - residual(op, g.with_values(dn))) / (
            2.0 * step
        )
    return J


def min_cone_margin(op: CurvatureOperator, g: PeriodicGrid) -> float:
    lam = node_eigenvalues(g, op.n)
    return min(float(op.cone.margin(lam[i])) for i in range(g.N))


@dataclass
class NewtonRecord:
    t: float
    iter: int
    residual_inf: float
    step_norm: float
    min_cone_margin: float

    def to_json_dict(self):
        return {
            "t": self.t,
            "iter": self.iter,
            "residual_inf": self.residual_inf,
            "step_norm": self.step_norm,
            "min_cone_margin": self.min_cone_margin,
        }


def newton_solve(
    op: CurvatureOperator,
    g0: PeriodicGrid,
    tol: float = 1e-10,
    max_iter: int = 40,
    t_label: float = 1.0,
    records: list | None = None,
) -> PeriodicGrid:
    """Damped Newton with residual backtracking and positivity clipping.

    Backtracking halves the step while the 2-norm of the residual does not
    decrease, down to step factor 1e-4; iterates are clipped to stay above
    0.1 min(g0). Raises a non-convergence error carrying the last iterate
    when the line search dies, the residual stagnates (< 1e-3 relative drop
    over 5 iterations), or max_iter runs out.
    """
    g = g0.with_values(g0.values)
    floor = 0.1 * float(np.min(g0.values))
    r = residual(op, g)
    norms = [float(np.linalg.norm(r))]
    if records is not None:
        records.append(
            NewtonRecord(
                t=t_label,
                iter=0,
                residual_inf=float(np.max(np.abs(r))),
                step_norm=0.0,
                min_cone_margin=min_cone_margin(op, g),
            )
        )

    for it in range(1, max_iter + 1):
        if float(np.max(np.abs(r))) <= tol:
            return g
        J = jacobian(op, g)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian: {exc}", iterate=g) from exc

        alpha = 1.0
        accepted = False
        while alpha >= MIN_STEP:
            cand = np.maximum(g.values + alpha * step, floor)
            try:
                g_new = g.with_values(cand)
                r_new = residual(op, g_new)
            except (ConeError, PositivityError):
                alpha *= 0.5
                continue
            if float(np.linalg.norm(r_new)) < norms[-1]:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            raise ConvergenceError(
                f"line search failed at iteration {it} "
                f"(residual {norms[-1]:.3e})",
                iterate=g,
            )
        g, r = g_new, r_new
        norms.append(float(np.linalg.norm(r)))
        if records is not None:
            records.append(
                NewtonRecord(
                    t=t_label,
                    iter=it,
                    residual_inf=float(np.max(np.abs(r))),
                    step_norm=float(np.linalg.norm(alpha * step)),
                    min_cone_margin=min_cone_margin(op, g),
                )
            )
        if float(np.max(np.abs(r))) > tol and len(norms) > STAGNATION_WINDOW:
            old = norms[-1 - STAGNATION_WINDOW]
            if norms[-1] > old * (1.0 - STAGNATION_DROP):
                raise ConvergenceError(
                    f"residual stagnated near {norms[-1]:.3e} "
                    f"over {STAGNATION_WINDOW} iterations",
                    iterate=g,
                )

    if float(np.max(np.abs(r))) <= tol:
        return g
    raise ConvergenceError(
        f"no convergence in {max_iter} iterations "
        f"(residual {float(np.max(np.abs(r))):.3e})",
        iterate=g,
    )


def background_admissible(op: CurvatureOperator) -> bool:
    return op.cone.contains(product_background_eigenvalues(op.n))


def c_star(op: CurvatureOperator) -> float:
    """Constant solution c* = f(lam(A_g))^{(n-2)/4} for degree-1 operators."""
    n = op.n
    val = op.f(product_background_eigenvalues(n))
    return val ** (0.25 * (n - 2.0))


def constant_start(op: CurvatureOperator) -> float:
    """Constant solving the t = 0 semilinear problem f(sigma_1(lam) e) = 1."""
    n = op.n
    s1 = float(np.sum(product_background_eigenvalues(n)))
    if not s1 > 0:
        raise DomainError("background sigma_1 must be positive for the t=0 start")
    return (s1 / mu_star(op)) ** (0.25 * (n - 2.0))


@dataclass
class StepSummary:
    t: float
    iterations: int
    residual_inf: float
    min_cone_margin: float

    def to_json_dict(self):
        return {
            "t": self.t,
            "iterations": self.iterations,
            "residual_inf": self.residual_inf,
            "min_cone_margin": self.min_cone_margin,
        }


@dataclass
class ContinuationResult:
    status: str
    c0: float
    t_values: list
    steps: list = dc_field(default_factory=list)
    records: list = dc_field(default_factory=list)
    final: PeriodicGrid | None = None
    failure: str = ""

    def to_json_dict(self):
        return {
            "status": self.status,
            "c0": self.c0,
            "t_values": list(self.t_values),
            "steps": [s.to_json_dict() for s in self.steps],
            "failure": self.failure,
        }


def continuation(
    op: CurvatureOperator,
    L: float,
    N: int,
    t_steps: int = 11,
    tol: float = 1e-10,
    scheme: str = "spectral",
    max_iter: int = 40,
) -> ContinuationResult:
    """Homotopy path from the semilinear t = 0 problem to f at t = 1.

    Starts each Newton solve from the previous step's solution (constant
    c0 at t = 0). The trace carries every Newton iteration; a failed step
    truncates the path with diagnostics instead of guessing.
    """
    if t_steps < 2:
        raise DomainError("t_steps must be at least 2")
    if not background_admissible(op):
        lam = product_background_eigenvalues(op.n)
        raise DomainError(
            "background eigenvalues "
            f"{lam.tolist()} are not admissible for {op.name}; "
            "this (n, k) pairing has no cone interior to work in"
        )
    c0 = constant_start(op)
    grid = PeriodicGrid(L=L, values=np.full(N, c0), scheme=scheme)
    t_values = [i / (t_steps - 1) for i in range(t_steps)]
    result = ContinuationResult(status="ok", c0=c0, t_values=t_values)

    for t in t_values:
        op_t = homotopy_operator(op, t)
        recs: list = []
        try:
            grid = newton_solve(
                op_t, grid, tol=tol, max_iter=max_iter, t_label=t, records=recs
            )
        except (ConvergenceError, ConeError) as exc:
            result.records.extend(recs)
            result.status = f"failed_at_t={t:g}"
            result.failure = str(exc)
            it = getattr(exc, "iterate", None)
            if isinstance(it, PeriodicGrid):
                result.final = it
            return result
        result.records.extend(recs)
        r_inf = float(np.max(np.abs(residual(op_t, grid))))
        result.steps.append(
            StepSummary(
                t=t,
                iterations=len(recs) - 1 if recs else 0,
                residual_inf=r_inf,
                min_cone_margin=min_cone_margin(op_t, grid),
            )
        )

    result.final = grid
    return result
