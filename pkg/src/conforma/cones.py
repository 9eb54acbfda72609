"""Symmetric functions, admissibility cones, and curvature operator objects.

An eigenvalue vector is any sequence of n >= 3 finite floats. Operators are
(f, cone) pairs; f is symmetric, evaluates only inside its cone, and raises
ConeError outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConeError, ConvergenceError, DomainError

# Root-finder policy shared by every on-a-ray solve: bracket by doubling or
# halving from s=1 within [S_MIN, S_MAX], 60 bisections, then Newton polish.
S_MIN = 1e-9
S_MAX = 1e9
BISECT_ITERS = 60
NEWTON_POLISH = 5


def _check_eigenvec(lam) -> tuple:
    vals = tuple(float(x) for x in lam)
    if len(vals) < 3:
        raise DomainError(f"eigenvalue vector needs n >= 3, got n={len(vals)}")
    if not all(math.isfinite(x) for x in vals):
        raise DomainError("eigenvalue vector has non-finite entries")
    return vals


def sigma_all(lam) -> list:
    """All elementary symmetric polynomials sigma_1..sigma_n of lam.

    Product-expansion recurrence, O(n^2): on positive input every update adds
    positives, so no cancellation (Newton's identities on power sums lose the
    small sigmas entirely when the entries are strongly scaled). Entries are
    sorted first so the result is bit-identical under permutation of the input.
    """
    vals = sorted(float(x) for x in lam)
    n = len(vals)
    e = [1.0] + [0.0] * n
    for m, x in enumerate(vals, start=1):
        for k in range(m, 0, -1):
            e[k] += x * e[k - 1]
    return e[1:]


def sigma_k(lam, k: int) -> float:
    """k-th elementary symmetric polynomial of the eigenvalue vector."""
    vals = _check_eigenvec(lam)
    n = len(vals)
    if not 1 <= k <= n:
        raise DomainError(f"k={k} out of range 1..{n}")
    return sigma_all(vals)[k - 1]


def in_gamma_k(lam, k: int) -> bool:
    """Membership in the Garding cone: sigma_j(lam) > 0 for every j = 1..k."""
    vals = _check_eigenvec(lam)
    n = len(vals)
    if not 1 <= k <= n:
        raise DomainError(f"k={k} out of range 1..{n}")
    e = sigma_all(vals)
    return all(e[j] > 0.0 for j in range(k))


def scalar_curvature(lam) -> float:
    """Scalar curvature encoded by Schouten eigenvalues: 2(n-1) sigma_1."""
    vals = _check_eigenvec(lam)
    n = len(vals)
    return 2.0 * (n - 1) * sigma_all(vals)[0]


def _sigma_minor(lam, e, j: int, i: int) -> float:
    """sigma_j of lam with entry i removed, from the full sigmas e."""
    # s_m(lam minus i) satisfies s_m = e_m - lam_i * s_{m-1}
    s = 1.0
    for m in range(1, j + 1):
        s = e[m - 1] - lam[i] * s
    return s


# ---------------------------------------------------------------------------
# Cones


class ConeSpec:
    """Open convex symmetric cone with vertex at the origin."""

    kind = "abstract"
    n: int

    def contains(self, lam) -> bool:
        raise NotImplementedError

    def margin(self, lam) -> float:
        """Positive-inside proxy for the distance to the cone boundary."""
        return 1.0 if self.contains(lam) else -1.0


@dataclass(frozen=True)
class GammaKCone(ConeSpec):
    n: int
    k: int
    kind = "gamma_k"

    def __post_init__(self):
        if not (self.n >= 3 and 1 <= self.k <= self.n):
            raise DomainError(f"bad Garding cone indices n={self.n}, k={self.k}")

    def contains(self, lam) -> bool:
        e = sigma_all(lam)
        return all(e[j] > 0.0 for j in range(self.k))

    def margin(self, lam) -> float:
        e = sigma_all(lam)
        return min(e[: self.k])


@dataclass(frozen=True)
class LevelSetCone(ConeSpec):
    """Cone over the boundary of V = {g > 1} for smooth symmetric g.

    Membership uses the ray structure of such sets: {s : s*lam in V} is a
    half-line, so lam generates a ray through V iff the far sample is inside.
    """

    n: int
    generator: Callable[[Sequence[float]], float]
    kind = "level_set"

    def contains(self, lam) -> bool:
        arr = np.asarray(lam, dtype=float)
        if not np.all(np.isfinite(arr)) or np.all(arr == 0.0):
            return False
        try:
            val = float(self.generator(S_MAX * arr))
        except (ConeError, DomainError, ValueError, OverflowError, FloatingPointError):
            return False
        return val > 1.0  # nan compares false; +inf counts as inside


@dataclass(frozen=True)
class HomotopyCone(ConeSpec):
    """Pullback cone {lam : t*lam + (1-t)*sigma_1(lam)*e in inner}."""

    inner: ConeSpec
    t: float
    kind = "homotopy"

    @property
    def n(self):
        return self.inner.n

    def _map(self, lam):
        s1 = float(sum(float(x) for x in lam))
        return [self.t * float(x) + (1.0 - self.t) * s1 for x in lam]

    def contains(self, lam) -> bool:
        return self.inner.contains(self._map(lam))

    def margin(self, lam) -> float:
        return self.inner.margin(self._map(lam))


# ---------------------------------------------------------------------------
# Operators


@dataclass(frozen=True)
class CurvatureOperator:
    """Symmetric operator f together with its admissibility cone."""

    name: str
    f: Callable[[Sequence[float]], float]
    grad_f: Callable[[Sequence[float]], np.ndarray]
    cone: ConeSpec
    homogeneous_degree: Optional[float] = None

    def __call__(self, lam) -> float:
        return self.f(lam)

    @property
    def n(self) -> int:
        return self.cone.n


def make_sigma_k_operator(n: int, k: int) -> CurvatureOperator:
    """(sigma_k^{1/k}, Gamma_k) with its analytic gradient."""
    if not (n >= 3 and 1 <= k <= n):
        raise DomainError(f"bad operator indices n={n}, k={k}")
    cone = GammaKCone(n, k)
    inv_k = 1.0 / k

    def f(lam):
        e = sigma_all(lam)
        for j in range(k):
            if not e[j] > 0.0:
                raise ConeError(
                    f"lambda outside Gamma_{k} (sigma_{j + 1} = {e[j]:.6g})",
                    witness=list(lam),
                )
        return e[k - 1] ** inv_k

    def grad_f(lam):
        vals = [float(x) for x in lam]
        e = sigma_all(vals)
        for j in range(k):
            if not e[j] > 0.0:
                raise ConeError(
                    f"lambda outside Gamma_{k} (sigma_{j + 1} = {e[j]:.6g})",
                    witness=vals,
                )
        front = inv_k * e[k - 1] ** (inv_k - 1.0)
        return np.array(
            [front * _sigma_minor(vals, e, k - 1, i) for i in range(n)]
        )

    return CurvatureOperator(
        name=f"sigma{k}_n{n}",
        f=f,
        grad_f=grad_f,
        cone=cone,
        homogeneous_degree=1.0,
    )


def solve_unit_level(
    fn: Callable[[np.ndarray], float],
    lam,
    dfn_ds: Optional[Callable[[float, np.ndarray], float]] = None,
    tol: float = 1e-12,
) -> float:
    """Unique s > 0 with fn(s*lam) = 1 on a ray where fn is increasing.

    Bracket by doubling/halving from s=1 within [1e-9, 1e9], 60 bisections,
    then up to 5 Newton steps. Raises ConvergenceError when no bracket exists
    (numerical failure of the unbounded-growth hypothesis).
    """
    arr = np.asarray(lam, dtype=float)

    def g(s):
        return float(fn(s * arr)) - 1.0

    s = 1.0
    gs = g(s)
    if gs == 0.0:
        return s
    if gs > 0.0:
        hi, ghi = s, gs
        lo = s
        while True:
            lo *= 0.5
            if lo < S_MIN:
                raise ConvergenceError(
                    "no root of f(s*lambda)=1 with s in [1e-9, 1e9] (lower side)"
                )
            glo = g(lo)
            if glo < 0.0:
                break
            hi, ghi = lo, glo
    else:
        lo, glo = s, gs
        hi = s
        while True:
            hi *= 2.0
            if hi > S_MAX:
                raise ConvergenceError(
                    "no root of f(s*lambda)=1 with s in [1e-9, 1e9] (upper side)"
                )
            ghi = g(hi)
            if ghi > 0.0:
                break
            lo, glo = hi, ghi

    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        gm = g(mid)
        if gm > 0.0:
            hi = mid
        elif gm < 0.0:
            lo = mid
        else:
            return mid

    s = 0.5 * (lo + hi)
    if dfn_ds is not None:
        for _ in range(NEWTON_POLISH):
            gs = g(s)
            if abs(gs) <= tol:
                break
            d = dfn_ds(s, arr)
            if d == 0.0 or not math.isfinite(d):
                break
            step = gs / d
            cand = s - step
            if not (lo <= cand <= hi) or cand <= 0.0:
                break
            s = cand

    if abs(g(s)) > tol:
        raise ConvergenceError(f"ray solve stalled at |f-1| = {abs(g(s)):.3g}")
    return s


def homogenize(op: CurvatureOperator) -> CurvatureOperator:
    """Degree-1 operator with the same unit level set as op.

    f_tilde(lam) = 1/phi(lam) where phi solves f(phi*lam) = 1.
    """

    def dfn_ds(s, arr):
        return float(np.dot(op.grad_f(s * arr), arr))

    def phi(lam):
        return solve_unit_level(op.f, lam, dfn_ds=dfn_ds)

    def f(lam):
        return 1.0 / phi(lam)

    def grad_f(lam):
        arr = np.asarray(lam, dtype=float)
        s = phi(arr)
        g = np.asarray(op.grad_f(s * arr), dtype=float)
        denom = s * float(np.dot(g, arr))
        return g / denom

    return CurvatureOperator(
        name=f"{op.name}_deg1",
        f=f,
        grad_f=grad_f,
        cone=op.cone,
        homogeneous_degree=1.0,
    )


def homotopy_operator(op: CurvatureOperator, t: float) -> CurvatureOperator:
    """Interpolant f_t(lam) = f(t*lam + (1-t)*sigma_1(lam)*e) on its cone."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"homotopy parameter t={t} outside [0, 1]")
    cone = HomotopyCone(inner=op.cone, t=t)
    n = op.cone.n

    def mapped(lam):
        vals = [float(x) for x in lam]
        if len(vals) != n:
            raise DomainError(f"expected n={n} entries, got {len(vals)}")
        s1 = sum(vals)
        c = (1.0 - t) * s1
        return [t * x + c for x in vals]

    def f(lam):
        m = mapped(lam)
        try:
            return op.f(m)
        except ConeError as exc:
            raise ConeError(
                f"lambda outside homotopy cone at t={t:g}: {exc}",
                witness=list(lam),
            ) from exc

    def grad_f(lam):
        m = mapped(lam)
        g = np.asarray(op.grad_f(m), dtype=float)
        return t * g + (1.0 - t) * float(g.sum()) * np.ones(n)

    return CurvatureOperator(
        name=f"{op.name}_t{t:g}",
        f=f,
        grad_f=grad_f,
        cone=cone,
        homogeneous_degree=op.homogeneous_degree,
    )


def cone_ray_scale(generator: Callable[[np.ndarray], float], lam) -> float:
    """Scale s_bar > 0 putting s_bar*lam on the boundary of V = {g > 1}.

    The set {s : s*lam in V} is a half-line, so the crossing is unique and
    bisection is safe. Resolution 1e-10 in s (relative).
    """
    arr = np.asarray(lam, dtype=float)

    def inside(s):
        try:
            val = float(generator(s * arr))
        except (ConeError, DomainError, ValueError, FloatingPointError):
            return False
        return val > 1.0

    s = 1.0
    if inside(s):
        hi = s
        lo = s
        while True:
            lo *= 0.5
            if lo < S_MIN:
                raise ConeError("ray enters V at every probed scale down to 1e-9")
            if not inside(lo):
                break
            hi = lo
    else:
        lo = s
        hi = s
        while True:
            hi *= 2.0
            if hi > S_MAX:
                raise ConeError("no positive multiple of lambda lies in V")
            if inside(hi):
                break
            lo = hi

    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Validation


@dataclass
class CheckResult:
    passed: bool
    worst_violation: float
    witness: list = field(default_factory=list)


@dataclass
class ValidationReport:
    checks: dict

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_json_dict(self) -> dict:
        return {
            name: {
                "pass": c.passed,
                "worst_violation": c.worst_violation,
                "witness": list(c.witness),
            }
            for name, c in self.checks.items()
        }


def sample_cone_directions(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    """Validation sampling measure: uniform simplex direction times
    log-uniform scale in [1e-2, 1e2]."""
    dirs = rng.dirichlet(np.ones(n), size=count)
    scales = np.exp(rng.uniform(math.log(1e-2), math.log(1e2), size=count))
    return dirs * scales[:, None]


def _boundary_point(op, rng, lam):
    """Walk from interior lam along a random direction to the cone boundary.

    Returns the last strictly-inside iterate of the bisection, or None when no
    exit was found.
    """
    cone = op.cone
    base = np.asarray(lam, dtype=float)
    scale = float(np.linalg.norm(base))
    for _ in range(8):
        v = rng.normal(size=base.size)
        v /= np.linalg.norm(v)
        for direction in (v, -v):
            tau_out = None
            tau = scale
            for _ in range(12):
                if not cone.contains(base + tau * direction):
                    tau_out = tau
                    break
                tau *= 2.0
            if tau_out is None:
                continue
            lo, hi = 0.0, tau_out
            for _ in range(BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                if cone.contains(base + mid * direction):
                    lo = mid
                else:
                    hi = mid
            return base + lo * direction
    return None


def validate_operator(
    op: CurvatureOperator, sample_count: int = 500, seed: int = 0
) -> ValidationReport:
    """Sampled hypothesis checks: symmetry, gradient positivity, concavity,
    ray growth, cone nesting, boundary vanishing, and (when tagged) degree
    homogeneity. Failures land in the report, never as exceptions."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n = op.cone.n
    samples = sample_cone_directions(rng, n, sample_count)
    checks = {}

    # permutation symmetry
    worst, witness = 0.0, []
    for lam in samples:
        perm = rng.permutation(n)
        try:
            d = abs(op.f(lam) - op.f(lam[perm]))
        except ConeError:
            continue
        if d > worst:
            worst, witness = d, list(lam)
    checks["permutation_symmetry"] = CheckResult(worst <= 1e-12, worst, witness)

    # gradient positivity (hypothesis: components of grad f positive on the cone)
    worst, witness = -math.inf, []
    for lam in samples:
        try:
            g = np.asarray(op.grad_f(lam), dtype=float)
        except ConeError:
            continue
        v = float(-g.min())
        if v > worst:
            worst, witness = v, list(lam)
    checks["gradient_positivity"] = CheckResult(worst < 0.0, worst, witness)

    # midpoint concavity
    worst, witness = 0.0, []
    for i in range(0, len(samples) - 1, 2):
        lam, mu = samples[i], samples[i + 1]
        try:
            fl, fm = op.f(lam), op.f(mu)
            fmid = op.f(0.5 * (lam + mu))
        except ConeError:
            continue
        unit = max(1.0, abs(fl), abs(fm))
        v = (0.5 * (fl + fm) - fmid) / unit
        if v > worst:
            worst, witness = v, list(lam) + list(mu)
    checks["midpoint_concavity"] = CheckResult(worst <= 1e-9, worst, witness)

    # ray growth: f(s*lam) increasing over a log grid (finite test of
    # unbounded growth along rays)
    worst, witness = 0.0, []
    s_grid = np.exp(np.linspace(math.log(1e-2), math.log(1e2), 17))
    for lam in samples[: min(64, len(samples))]:
        try:
            vals = [op.f(s * lam) for s in s_grid]
        except ConeError:
            continue
        v = max(
            (vals[j] - vals[j + 1]) for j in range(len(vals) - 1)
        )
        if v > worst:
            worst, witness = v, list(lam)
    checks["ray_growth"] = CheckResult(worst <= 0.0, worst, witness)

    # cone nesting, positive orthant side: every positive vector is a member
    worst, witness = 0.0, []
    for lam in samples:
        if not op.cone.contains(lam):
            worst, witness = 1.0, list(lam)
            break
    checks["cone_contains_positive_orthant"] = CheckResult(worst == 0.0, worst, witness)

    # cone nesting, Gamma_1 side: members have positive entry sum
    worst, witness = -math.inf, []
    members = []
    for lam in samples[: min(200, len(samples))]:
        members.append(lam)
        jitter = lam + rng.normal(0.0, 0.4 * np.linalg.norm(lam) / math.sqrt(n), size=n)
        if op.cone.contains(jitter):
            members.append(jitter)
    for lam in members:
        v = float(-np.sum(lam))
        if v > worst:
            worst, witness = v, list(lam)
    checks["cone_inside_gamma1"] = CheckResult(worst < 0.0, worst, witness)

    # boundary vanishing: f decays below 1e-3 along segments approaching
    # sampled boundary points (unit scale)
    worst, witness = 0.0, []
    n_boundary = max(4, min(20, sample_count // 10))
    # reach 1e-12: sigma_k^{1/k}-type operators vanish like eps^{1/k}, so the
    # shallow end of the grid must sit well below (1e-3)^k
    eps_grid = [10.0 ** (-j) for j in range(1, 13)]
    for lam in samples[:n_boundary]:
        lam = lam / np.linalg.norm(lam)
        bpt = _boundary_point(op, rng, lam)
        if bpt is None:
            continue
        norm = np.linalg.norm(bpt)
        if norm > 0:
            bpt, lam_in = bpt / norm, lam / norm
        else:
            lam_in = lam
        try:
            seq = [op.f(bpt + e * (lam_in - bpt)) for e in eps_grid]
        except ConeError:
            worst, witness = max(worst, 1.0), list(bpt)
            continue
        increase = max(
            (seq[j + 1] - seq[j]) for j in range(len(seq) - 1)
        )
        v = max(seq[-1], increase)
        if v > worst:
            worst, witness = v, list(bpt)
    checks["boundary_vanishing"] = CheckResult(worst < 1e-3, worst, witness)

    # tagged homogeneity
    if op.homogeneous_degree is not None:
        d = op.homogeneous_degree
        worst, witness = 0.0, []
        for lam in samples[: min(100, len(samples))]:
            try:
                f1 = op.f(lam)
                for s in (0.5, 2.0, 7.3):
                    v = abs(op.f(s * lam) - s**d * f1) / max(1e-30, abs(s**d * f1))
                    if v > worst:
                        worst, witness = v, list(lam)
            except ConeError:
                continue
        checks["degree_homogeneity"] = CheckResult(worst <= 1e-9, worst, witness)

    return ValidationReport(checks=checks)
