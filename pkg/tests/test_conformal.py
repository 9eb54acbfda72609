"""Moebius maps, conformal pullback, the flat Schouten matrix, and the
conjugation identity that ties them together."""

import numpy as np
import pytest

from helpers import catalog_fields, random_word

from conforma.bubbles import BubbleParams
from conforma.conformal import (
    Invert,
    MoebiusMap,
    Scale,
    Translate,
    a_matrix_flat,
    conjugation_residual,
    identity_map,
    product_background_eigenvalues,
    product_eigenvalues,
    pullback_u,
    schouten_eigen_flat,
    schouten_eigen_product,
    sphere_inversion_map,
    sphere_inversion_u,
    sphere_inversion_value,
    sphere_inversion_values,
    superharmonic_check,
)
from conforma.errors import DomainError, SingularityError
from conforma.fields import (
    BubbleField,
    ConstantField,
    ConstantCircleField,
    HarmonicPowerField,
    QuadraticField,
    finite_difference,
)
from conforma.radial import order_estimate
from conforma.sampling import ball_points, make_rng, shell_points


def test_bubble_schouten_is_constant_multiple_of_identity():
    # the closed-form family has A^u = 2 beta a^{-2} I everywhere
    rng = make_rng(0)
    for n in (3, 4, 5, 6):
        p = BubbleParams(n=n, a=1.7, beta=0.6, center=0.1 * np.arange(n))
        u = BubbleField(p)
        target = 2.0 * p.beta / p.a**2
        for x in ball_points(rng, n, 25, radius=3.0):
            A = a_matrix_flat(u, x)
            assert np.max(np.abs(A - target * np.eye(n))) <= 1e-10
            lam = schouten_eigen_flat(u, x)
            assert np.max(np.abs(lam - target)) <= 1e-10


def test_constant_and_harmonic_power_are_flat():
    # both are pullbacks of the flat metric, so A^u vanishes
    rng = make_rng(1)
    c = ConstantField(4, 3.2)
    hp = HarmonicPowerField(4)
    for x in shell_points(rng, 4, 20, 0.5, 2.0):
        assert np.max(np.abs(a_matrix_flat(c, x))) <= 1e-14
        assert np.max(np.abs(a_matrix_flat(hp, x))) <= 1e-10


def test_moebius_inverse_roundtrip_and_jacobians():
    rng = make_rng(2)
    for _ in range(10):
        w = random_word(rng, 3)
        inv = w.inverse()
        for x in shell_points(rng, 3, 5, 0.7, 1.3):
            y = inv.apply(w.apply(x))
            assert np.max(np.abs(y - x)) <= 1e-12
            # chain rule: |J_{w^{-1}}|(w(x)) |J_w|(x) = 1
            assert w.jac_det_abs(x) * inv.jac_det_abs(w.apply(x)) == pytest.approx(
                1.0, rel=1e-12
            )


def test_generator_jacobian_closed_forms():
    x = np.array([0.3, -0.4, 1.2])
    assert Translate(np.ones(3)).jac_det_abs(x) == 1.0
    assert Scale(-2.0).jac_det_abs(x) == pytest.approx(8.0, rel=1e-15)
    r2 = float(x @ x)
    assert Invert().jac_det_abs(x) == pytest.approx(r2**-3, rel=1e-14)
    assert identity_map().jac_det_abs(x) == 1.0


def test_pole_guard():
    with pytest.raises(SingularityError):
        Invert().apply(np.zeros(3))
    u = ConstantField(3, 1.0)
    with pytest.raises(SingularityError):
        sphere_inversion_value(u, np.zeros(3), 1.0, np.zeros(3))


def test_scale_zero_rejected():
    with pytest.raises(DomainError):
        Scale(0.0)
    with pytest.raises(DomainError):
        sphere_inversion_map(np.zeros(3), -1.0)


def test_pullback_composition_law():
    # u_{B o A} = (u_B)_A, with B o A spelled A.then(B)
    rng = make_rng(3)
    u = BubbleField(BubbleParams(n=3, a=1.0, beta=1.0))
    A = MoebiusMap((Translate(np.array([0.1, 0.0, -0.2])), Scale(1.4)))
    B = MoebiusMap((Invert(), Scale(0.8)))
    composed = pullback_u(u, A.then(B))
    nested = pullback_u(pullback_u(u, B), A)
    for x in shell_points(rng, 3, 20, 0.7, 1.3):
        assert composed.value(x) == pytest.approx(nested.value(x), rel=1e-12)
        assert np.allclose(composed.grad(x), nested.grad(x), rtol=1e-10, atol=1e-12)


def test_sphere_inversion_matches_closed_form():
    rng = make_rng(4)
    u = BubbleField(BubbleParams(n=5, a=1.3, beta=0.7))
    x0 = np.array([0.2, -0.1, 0.0, 0.3, 0.1])
    lam = 0.9
    chain = sphere_inversion_u(u, x0, lam)
    Y = x0 + shell_points(rng, 5, 30, 0.4, 2.5)
    direct = sphere_inversion_values(u, x0, lam, Y)
    for y, d in zip(Y, direct):
        assert chain.value(y) == pytest.approx(d, rel=1e-10)
        assert sphere_inversion_value(u, x0, lam, y) == pytest.approx(d, rel=1e-14)


def test_inversion_of_constant_is_harmonic_power():
    # (1)_{0,1}(y) = |y|^{2-n}
    u = ConstantField(4, 1.0)
    hp = HarmonicPowerField(4)
    rng = make_rng(5)
    for y in shell_points(rng, 4, 20, 0.3, 3.0):
        got = sphere_inversion_value(u, np.zeros(4), 1.0, y)
        assert got == pytest.approx(hp.value(y), rel=1e-13)


def test_inversion_fixed_sphere():
    # on |y - x| = lam the kernel is 1 and the argument is y itself
    u = BubbleField(BubbleParams(n=3, a=1.0, beta=2.0))
    x0 = np.array([0.1, 0.2, 0.0])
    lam = 0.75
    rng = make_rng(6)
    for d in shell_points(rng, 3, 10, 1.0, 1.0):
        y = x0 + lam * d / np.linalg.norm(d)
        assert sphere_inversion_value(u, x0, lam, y) == pytest.approx(
            u.value(y), rel=1e-12
        )


def test_conjugation_identity_analytic():
    rng = make_rng(7)
    words = [random_word(rng, 3) for _ in range(20)]
    pts = shell_points(rng, 3, 10, 0.7, 1.3)
    worst = 0.0
    for u in catalog_fields(3):
        for w in words:
            worst = max(worst, conjugation_residual(u, w, pts))
    assert worst <= 1e-10


def test_conjugation_identity_fd():
    rng = make_rng(7)
    words = [random_word(rng, 3) for _ in range(20)]
    pts = shell_points(rng, 3, 10, 0.7, 1.3)
    worst = 0.0
    for u in catalog_fields(3):
        ufd = finite_difference(u, h=1e-3, order=2)
        for w in words:
            worst = max(worst, conjugation_residual(ufd, w, pts))
    assert worst <= 1e-4


def test_conjugation_fd_second_order():
    rng = make_rng(7)
    word = random_word(rng, 3)
    pts = shell_points(rng, 3, 10, 0.7, 1.3)
    u = catalog_fields(3)[0]
    hs = [4e-3, 2e-3, 1e-3]
    devs = [conjugation_residual(finite_difference(u, h=h), word, pts) for h in hs]
    slope = order_estimate(hs, devs)
    assert 1.8 <= slope <= 2.2, (devs, slope)


def test_conjugation_residual_identity_word_is_zero():
    u = catalog_fields(3)[0]
    pts = shell_points(make_rng(8), 3, 5, 0.8, 1.2)
    assert conjugation_residual(u, identity_map(), pts) == 0.0


def test_product_background_eigenvalues():
    for n in (3, 5, 8):
        lam = product_background_eigenvalues(n)
        assert lam[0] == -0.5
        assert np.all(lam[1:] == 0.5)
        assert lam.shape == (n,)


def test_product_eigenvalues_constant_factor():
    # a constant factor only rescales the background eigenvalues
    n = 5
    for c in (0.5, 1.0, 2.3):
        lam = product_eigenvalues(c, 0.0, 0.0, n)
        scale = c ** (-4.0 / (n - 2))
        assert np.allclose(lam, scale * product_background_eigenvalues(n), rtol=1e-14)


def test_schouten_eigen_product_constant_field():
    n = 5
    v = ConstantCircleField(1.0, 2.0)
    lam = schouten_eigen_product(v, 0.37, n)
    scale = 2.0 ** (-4.0 / (n - 2))
    assert np.allclose(lam, scale * product_background_eigenvalues(n), rtol=1e-13)


def test_superharmonic_check_passes_on_bubble():
    rng = make_rng(9)
    pts = ball_points(rng, 3, 50, radius=2.0)
    u = BubbleField(BubbleParams(n=3, a=1.0, beta=1.0))
    rep = superharmonic_check(u, pts)
    assert rep.passed and rep.max_laplacian < 0.0
    rep_fd = superharmonic_check(finite_difference(u, h=1e-3), pts)
    assert rep_fd.passed
    assert rep_fd.tol == 1e-4  # looser gate for the fd route


def test_superharmonic_check_fails_on_subharmonic():
    rng = make_rng(9)
    pts = ball_points(rng, 3, 50, radius=2.0)
    rep = superharmonic_check(QuadraticField(3, 0.5), pts)
    assert not rep.passed
    # u = c + |x|^2 has laplacian 2n everywhere
    assert rep.max_laplacian == pytest.approx(6.0, rel=1e-12)
