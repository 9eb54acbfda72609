"""Radial shooting against the closed-form bubble: exact center jet,
implicit vertical slope, RK4 convergence."""

import numpy as np
import pytest

from conforma.cones import make_sigma_k_operator
from conforma.errors import ConeError, DomainError, PositivityError
from conforma.radial import (
    bubble_deviation,
    implicit_vpp,
    matched_bubble,
    mu_star,
    order_estimate,
    profile_max_unit_residual,
    radial_eigenvalues,
    shoot,
    vpp0_exact,
)
from conforma.bubbles import bubble_value


def test_mu_star_closed_forms():
    # sigma_k(mu e)^{1/k} = mu C(n,k)^{1/k} = 1
    assert mu_star(make_sigma_k_operator(3, 1)) == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert mu_star(make_sigma_k_operator(3, 2)) == pytest.approx(3.0 ** -0.5, rel=1e-12)
    assert mu_star(make_sigma_k_operator(5, 2)) == pytest.approx(10.0 ** -0.5, rel=1e-12)


def test_center_jet_closed_form():
    op = make_sigma_k_operator(3, 1)
    assert vpp0_exact(op, 1.0) == pytest.approx(-1.0 / 6.0, rel=1e-12)
    # v''(0) scales like v0^{(n+2)/(n-2)}
    assert vpp0_exact(op, 2.0) == pytest.approx(-(2.0 ** 5.0) / 6.0, rel=1e-12)


def test_matched_bubble_parameters():
    op = make_sigma_k_operator(3, 1)
    p = matched_bubble(op, 1.0)
    assert p.a == pytest.approx(1.0, rel=1e-14)
    assert p.beta == pytest.approx(1.0 / 6.0, rel=1e-12)
    assert bubble_value(p, np.zeros(3)) == pytest.approx(1.0, rel=1e-14)


def test_radial_eigenvalues_on_bubble_are_constant():
    op = make_sigma_k_operator(4, 2)
    p = matched_bubble(op, 1.3)
    target = 2.0 * p.beta / p.a**2
    for r in (0.0, 0.2, 0.7):
        rr2 = 1.0 + p.beta * r * r
        v = p.a ** 1.0 * rr2 ** -1.0  # (n-2)/2 = 1 for n = 4
        vp = -2.0 * p.a * p.beta * r * rr2 ** -2.0
        vpp = -2.0 * p.a * p.beta * (1.0 - 3.0 * p.beta * r * r) * rr2 ** -3.0
        lam = radial_eigenvalues(v, vp if r else 0.0, vpp, r, 4)
        assert np.max(np.abs(lam - target)) <= 1e-12


def test_radial_eigenvalues_validation():
    with pytest.raises(DomainError):
        radial_eigenvalues(1.0, 0.5, -1.0, 0.0, 3)  # v'(0) != 0 is inconsistent
    with pytest.raises(PositivityError):
        radial_eigenvalues(-1.0, 0.0, 0.0, 0.5, 3)


def test_implicit_vpp_recovers_bubble_second_derivative():
    op = make_sigma_k_operator(5, 2)
    p = matched_bubble(op, 1.0)
    r = 0.4
    rr2 = 1.0 + p.beta * r * r
    e = 0.5 * (p.n - 2.0)
    v = p.a**e * rr2**-e
    vp = -2.0 * e * p.a**e * p.beta * r * rr2 ** (-e - 1.0)
    vpp_true = (
        -2.0 * e * p.a**e * p.beta * rr2 ** (-e - 2.0) * (1.0 - (2.0 * e + 1.0) * p.beta * r * r)
    )
    w = implicit_vpp(op, v, vp, r, w_hint=vpp_true * 1.3)
    assert w == pytest.approx(vpp_true, rel=1e-11)


def test_implicit_vpp_rejects_off_cone_data():
    op = make_sigma_k_operator(5, 2)
    # v' > 0 far from the center forces the tangential eigenvalues negative
    with pytest.raises(ConeError):
        implicit_vpp(op, 1.0, 1.0, 0.5, w_hint=-1.0)


@pytest.mark.parametrize("n,k", [(3, 1), (3, 3), (5, 2)])
def test_shoot_reproduces_bubble(n, k):
    op = make_sigma_k_operator(n, k)
    for v0 in (0.5, 2.0):
        prof = shoot(op, v0, h=1e-3, r_max=0.9)
        assert prof.status == "ok"
        assert len(prof) == 901
        dev = bubble_deviation(prof, matched_bubble(op, v0))
        assert dev <= 1e-9
        assert profile_max_unit_residual(op, prof) <= 1e-10


def test_shoot_convergence_order():
    op = make_sigma_k_operator(3, 1)
    hs = [4e-3, 2e-3, 1e-3]
    devs = [
        bubble_deviation(shoot(op, 1.0, h=h, r_max=0.9), matched_bubble(op, 1.0))
        for h in hs
    ]
    slope = order_estimate(hs, devs)
    assert slope >= 3.5, (devs, slope)


def test_order_estimate_recovers_exponent():
    hs = [0.1, 0.05, 0.025]
    assert order_estimate(hs, [h**4 for h in hs]) == pytest.approx(4.0, rel=1e-12)


def test_shoot_validation():
    op = make_sigma_k_operator(3, 1)
    with pytest.raises(PositivityError):
        shoot(op, -1.0)
    with pytest.raises(DomainError):
        shoot(op, 1.0, h=0.0)
    with pytest.raises(DomainError):
        shoot(op, 1.0, h=0.5, r_max=0.2)


def test_bubble_deviation_dimension_check():
    op = make_sigma_k_operator(3, 1)
    prof = shoot(op, 1.0, h=0.1, r_max=0.5)
    with pytest.raises(DomainError):
        bubble_deviation(prof, matched_bubble(make_sigma_k_operator(4, 2), 1.0))


def test_profile_serialization(tmp_path):
    op = make_sigma_k_operator(3, 2)
    prof = shoot(op, 1.0, h=0.1, r_max=0.5)
    d = prof.to_json_dict()
    assert d["status"] == "ok"
    assert d["v0"] == 1.0
    path = tmp_path / "profile.csv"
    prof.write_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "r,v,vp,vpp"
    assert len(lines) == len(prof) + 1
