"""Moving-sphere sweeps, the alpha invariant, interval-lemma checks, and the
explicit Harnack product bound.

The central object is the inversion comparison

    u_{x,lam}(y) = (lam/|y-x|)^{n-2} u(x + lam^2 (y-x)/|y-x|^2) <= u(y)

for |y-x| >= lam (the moving-sphere inequality, MSI). The critical radius
lam_bar(x) is the largest lam for which MSI holds, estimated here on a
truncated sampled domain. For exact bubbles lam_bar(x)^{n-2} u(x) is a
constant alpha, which the sweep verifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conformal import sphere_inversion_values
from .errors import ConvergenceError, DomainError, GeometryError
from .fields import ScalarField
from .sampling import ball_points, make_rng, parallel_map

BISECT_ITERS = 40
DEFAULT_GUARD = 1e-6


@dataclass
class SweepConfig:
    """Log-spaced lambda sweep plus the fixed comparison point set."""

    lambda_min: float
    lambda_max: float
    check_points: np.ndarray
    lambda_steps: int = 256
    violation_tol: float = 0.0

    def __post_init__(self):
        if not (self.lambda_min > 0 and self.lambda_min < self.lambda_max):
            raise DomainError("need 0 < lambda_min < lambda_max")
        if self.lambda_steps < 16:
            raise DomainError("lambda_steps must be at least 16")
        if self.violation_tol < 0:
            raise DomainError("violation_tol must be nonnegative")
        self.check_points = np.atleast_2d(np.asarray(self.check_points, dtype=float))

    def lambda_grid(self) -> np.ndarray:
        return np.exp(
            np.linspace(
                math.log(self.lambda_min), math.log(self.lambda_max), self.lambda_steps
            )
        )

    def grid_guard(self) -> float:
        """One multiplicative grid cell, the exclusion band around |y-x|=lam."""
        ratio = (self.lambda_max / self.lambda_min) ** (1.0 / (self.lambda_steps - 1))
        return ratio - 1.0


def msi_violation(
    u: ScalarField, x, lam: float, points, guard: float = DEFAULT_GUARD
) -> float:
    """max over check points y with |y-x| >= lam(1+guard) of u_{x,lam}(y) - u(y).

    Nonpositive means MSI holds on the sampled truncation.
    """
    if not lam > 0:
        raise DomainError(f"inversion radius lam = {lam:g} must be positive")
    x = np.asarray(x, dtype=float)
    if u.domain is not None:
        # the inverted sphere B_lam(x) must sit inside the field's domain
        r = float(np.linalg.norm(x)) + lam
        probe = x.copy()
        probe[0] += lam
        if u.domain.kind == "ball":
            ok = r <= u.domain.outer
        else:
            ok = u.domain.contains(probe, margin=0.0)
        if not ok:
            raise GeometryError(
                f"inversion ball of radius {lam:g} at {x.tolist()} leaves the domain"
            )
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dist = np.linalg.norm(pts - x, axis=1)
    keep = dist >= lam * (1.0 + guard)
    if not np.any(keep):
        raise DomainError("no check points outside the guarded sphere")
    pts = pts[keep]
    inverted = sphere_inversion_values(u, x, lam, pts)
    direct = u.values(pts)
    return float(np.max(inverted - direct))


@dataclass(frozen=True)
class CriticalRadius:
    lambda_bar: float
    flag: str = ""

    def to_json_dict(self):
        return {"lambda_bar": self.lambda_bar, "flag": self.flag}


def critical_radius(u: ScalarField, x, cfg: SweepConfig) -> CriticalRadius:
    """Sampled estimate of lam_bar(x) = sup{mu : MSI holds for all lam < mu}.

    Scans the log grid for the first violation beyond violation_tol, then
    bisects 40 times between the last passing and first failing lambda.
    Returns lambda_max with flag "unbounded" when the whole range passes,
    lambda_min with flag "fails_at_min" when even the smallest lambda fails.
    """
    guard = cfg.grid_guard()
    grid = cfg.lambda_grid()

    def violated(lam):
        return msi_violation(u, x, lam, cfg.check_points, guard) > cfg.violation_tol

    if violated(grid[0]):
        return CriticalRadius(lambda_bar=float(grid[0]), flag="fails_at_min")
    lo = grid[0]
    hi = None
    for lam in grid[1:]:
        if violated(lam):
            hi = lam
            break
        lo = lam
    if hi is None:
        return CriticalRadius(lambda_bar=float(grid[-1]), flag="unbounded")
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if violated(mid):
            hi = mid
        else:
            lo = mid
    return CriticalRadius(lambda_bar=0.5 * (lo + hi))


@dataclass(frozen=True)
class AlphaReport:
    values: list
    spread: float
    reference: float

    def to_json_dict(self):
        return {
            "values": list(self.values),
            "spread": self.spread,
            "reference": self.reference,
        }


def alpha_invariant(u: ScalarField, xs, cfg: SweepConfig) -> AlphaReport:
    """lam_bar(x)^{n-2} u(x) per center, its spread, and the rim estimate of
    lim |y|^{n-2} u(y). Centers are swept in parallel (read-only field)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    n = u.n

    def one(x):
        cr = critical_radius(u, x, cfg)
        if cr.flag:
            raise ConvergenceError(
                f"center {x.tolist()} has flagged critical radius ({cr.flag})"
            )
        return cr.lambda_bar ** (n - 2) * u.value(x)

    values = parallel_map(one, list(xs))
    rim = np.linalg.norm(cfg.check_points, axis=1)
    sel = rim >= 0.9 * float(np.max(rim))
    ref_pts = cfg.check_points[sel]
    ref = float(
        np.mean(
            np.linalg.norm(ref_pts, axis=1) ** (n - 2) * u.values(ref_pts)
        )
    )
    return AlphaReport(
        values=[float(v) for v in values],
        spread=float(max(values) - min(values)),
        reference=ref,
    )


# ---------------------------------------------------------------------------
# Interval lemmas (one-dimensional moving-sphere algebra)


@dataclass(frozen=True)
class HLemmaReport:
    hypothesis_pass: bool
    hypothesis_worst: float
    conclusion_pass: bool
    conclusion_worst: float
    alpha: float
    a: float

    def implication_holds(self) -> bool:
        return (not self.hypothesis_pass) or self.conclusion_pass

    def to_json_dict(self):
        return {
            "hypothesis_pass": self.hypothesis_pass,
            "hypothesis_worst": self.hypothesis_worst,
            "conclusion_pass": self.conclusion_pass,
            "conclusion_worst": self.conclusion_worst,
            "alpha": self.alpha,
            "a": self.a,
        }


HYPOTHESIS_TOL = 1e-12
CONCLUSION_TOL = 1e-9


def h_lemma_check(
    h, h_prime, alpha: float, a: float, sample_density: int = 64
) -> HLemmaReport:
    """Brute-force check of the interval inversion lemma.

    Hypothesis, over |tau| < 2a, |s| <= 4a, 0 < lam < a, lam < |s - tau|:

        (lam/|s-tau|)^alpha h(tau + lam^2 (s-tau)/|s-tau|^2) <= h(s).

    Conclusion: |h'(s)| <= (alpha/2a) h(s) for |s| <= a. Both sides are
    sampled on a density^3 grid; the mapped points land in (-3a, 3a)
    automatically. h and h_prime must accept numpy arrays.
    """
    if not a > 0:
        raise DomainError("interval half-width a must be positive")
    if alpha < 0:
        raise DomainError("decay exponent alpha must be nonnegative")
    d = int(sample_density)
    if d < 8:
        raise DomainError("sample_density must be at least 8")

    shrink = 1.0 - 1.0 / d
    tau = np.linspace(-2.0 * a * shrink, 2.0 * a * shrink, d)[:, None, None]
    s = np.linspace(-4.0 * a, 4.0 * a, d)[None, :, None]
    lam = np.linspace(a / d, a * shrink, d)[None, None, :]

    diff = s - tau
    dist = np.abs(diff)
    mask = lam < dist
    safe = np.where(mask, dist, 1.0)
    mapped = tau + lam**2 * diff / safe**2
    lhs = (lam / safe) ** alpha * h(mapped)
    rhs = h(np.broadcast_to(s, lhs.shape))
    gap = np.where(mask, lhs - rhs, -np.inf)
    hyp_worst = float(np.max(gap))
    scale = float(np.max(np.abs(h(np.linspace(-4.0 * a, 4.0 * a, d)))))
    hyp_pass = hyp_worst <= HYPOTHESIS_TOL * max(1.0, scale)

    sc = np.linspace(-a, a, d)
    concl_gap = np.abs(h_prime(sc)) - (alpha / (2.0 * a)) * h(sc)
    concl_worst = float(np.max(concl_gap))
    concl_pass = concl_worst <= CONCLUSION_TOL

    return HLemmaReport(
        hypothesis_pass=hyp_pass,
        hypothesis_worst=hyp_worst,
        conclusion_pass=concl_pass,
        conclusion_worst=concl_worst,
        alpha=alpha,
        a=a,
    )


@dataclass(frozen=True)
class GradientBoundReport:
    hypothesis_pass: bool
    hypothesis_worst: float
    vacuous: bool
    conclusion_pass: bool | None
    conclusion_worst: float | None
    slack: float | None
    bound_coeff: float

    def to_json_dict(self):
        return {
            "hypothesis_pass": self.hypothesis_pass,
            "hypothesis_worst": self.hypothesis_worst,
            "vacuous": self.vacuous,
            "conclusion_pass": self.conclusion_pass,
            "conclusion_worst": self.conclusion_worst,
            "slack": self.slack,
            "bound_coeff": self.bound_coeff,
        }


def gradient_bound_check(
    u: ScalarField,
    a: float,
    x_count: int = 24,
    lambda_steps: int = 12,
    y_count: int = 2048,
    conclusion_count: int = 256,
    seed: int = 0,
    hypothesis_tol: float = 1e-10,
) -> GradientBoundReport:
    """Gradient bound from the moving-sphere hypothesis.

    Hypothesis: MSI sampled over centers x in B_{4a}, radii 0 < lam < 2a,
    comparison points in B_{8a}. If it fails the conclusion is vacuous and
    not asserted. Otherwise asserts |grad u| <= ((n-2)/2a) u on B_a with
    relative tolerance 1e-8, and reports the measured relative slack.
    """
    if not a > 0:
        raise DomainError("radius a must be positive")
    n = u.n
    rng = make_rng(seed)
    centers = ball_points(rng, n, x_count, radius=4.0 * a)
    ys = ball_points(rng, n, y_count, radius=8.0 * a)
    lams = 2.0 * a * (np.arange(1, lambda_steps + 1) / (lambda_steps + 1.0))

    hyp_worst = -math.inf
    for x in centers:
        for lam in lams:
            hyp_worst = max(hyp_worst, msi_violation(u, x, float(lam), ys))
    hyp_pass = hyp_worst <= hypothesis_tol

    if not hyp_pass:
        return GradientBoundReport(
            hypothesis_pass=False,
            hypothesis_worst=hyp_worst,
            vacuous=True,
            conclusion_pass=None,
            conclusion_worst=None,
            slack=None,
            bound_coeff=(n - 2.0) / (2.0 * a),
        )

    coeff = (n - 2.0) / (2.0 * a)
    pts = ball_points(rng, n, conclusion_count, radius=a)
    worst = -math.inf
    slack = math.inf
    for x in pts:
        gn = float(np.linalg.norm(u.grad(x)))
        bound = coeff * u.value(x)
        worst = max(worst, (gn - bound) / bound)
        slack = min(slack, (bound - gn) / bound)
    return GradientBoundReport(
        hypothesis_pass=True,
        hypothesis_worst=hyp_worst,
        vacuous=False,
        conclusion_pass=worst <= 1e-8,
        conclusion_worst=worst,
        slack=slack,
        bound_coeff=coeff,
    )


# ---------------------------------------------------------------------------
# Harnack product with the explicit constant


def harnack_constant(n: int) -> int:
    """C(n) = 4^{n-2} (2^{n+6} n^4)^{n-2}, exact integer arithmetic."""
    if n < 3:
        raise DomainError("Harnack constant needs n >= 3")
    r = 2 ** (n + 6) * n**4
    return 4 ** (n - 2) * r ** (n - 2)


@dataclass(frozen=True)
class HarnackReport:
    P: float
    B: float
    passed: bool
    rescaling_exactness: float
    sup_u: float
    inf_u: float

    def to_json_dict(self):
        return {
            "P": self.P,
            "B": self.B,
            "pass": self.passed,
            "rescaling_exactness": self.rescaling_exactness,
            "sup_u": self.sup_u,
            "inf_u": self.inf_u,
        }


def harnack_product(
    u: ScalarField,
    R: float,
    delta: float,
    n: int,
    sample_count: int = 4096,
    seed: int = 0,
) -> HarnackReport:
    """P = (sup_{B_R} u)(inf_{B_{2R}} u) against

        B = C(n) delta^{(2-n)/2} R^{2-n}.

    The rescaled field v(x) = delta^{(n-2)/4} R^{(n-2)/2} u(Rx) is evaluated
    at the same sample points mapped x -> Rx, so its unit-radius product
    equals delta^{(n-2)/2} R^{n-2} P up to rounding; the residual of that
    identity is reported as rescaling_exactness.
    """
    if not (R > 0 and delta > 0):
        raise DomainError("need R > 0 and delta > 0")
    if n != u.n:
        raise DomainError(f"dimension mismatch: field n={u.n}, requested n={n}")
    rng = make_rng(seed)
    inner = ball_points(rng, n, sample_count, radius=R)
    outer = ball_points(rng, n, sample_count, radius=2.0 * R)
    sup_u = float(np.max(u.values(inner)))
    inf_u = float(np.min(u.values(outer)))
    P = sup_u * inf_u
    B = harnack_constant(n) * delta ** (0.5 * (2.0 - n)) * R ** (2.0 - n)

    pref = delta ** (0.25 * (n - 2.0)) * R ** (0.5 * (n - 2.0))
    # evaluate the rescaled field at the SAME samples, mapped x -> Rx
    unit_inner = inner / R
    unit_outer = outer / R
    sup_v = float(np.max(pref * u.values(R * unit_inner)))
    inf_v = float(np.min(pref * u.values(R * unit_outer)))
    rescaled_product = sup_v * inf_v
    exactness = abs(rescaled_product - delta ** (0.5 * (n - 2.0)) * R ** (n - 2.0) * P)

    return HarnackReport(
        P=P,
        B=float(B),
        passed=P <= B,
        rescaling_exactness=exactness,
        sup_u=sup_u,
        inf_u=inf_u,
    )
