import math

import numpy as np
import pytest

from kirchnorm.functionals import KirchhoffParams, energy, gn_quotient
from kirchnorm.grid import default_grid, grad_norm_sq, project_mass, random_smooth_field
from kirchnorm.landscape import (
    coefficients, fiber_curve, fiber_energy, gamma, gn_constant, gn_maximizer, phi_profile, psi_at_t_bar,
    scan_profile, t_bar, threshold_mountain_pass_norm,
)
from kirchnorm.potentials import ZERO, PotentialSpec, potential_norms
from oracles import FROZEN

P12 = KirchhoffParams(1, p=12.0, q=1.5)
GAUSS = PotentialSpec("gaussian", "nonneg", 1.0, width=1.0)


def test_gamma_values():
    assert gamma(4, 1) == 0.25
    assert gamma(6, 2) == pytest.approx(2 / 3) and 6 * gamma(6, 2) == pytest.approx(4)
    assert gamma(14 / 3, 3) == pytest.approx(6 / 7) and 14 / 3 * gamma(14 / 3, 3) == pytest.approx(4)


def test_gn_constant_matches_soliton():
    res = gn_maximizer(1, 4.0, default_grid(1))
    assert res.constant == pytest.approx(FROZEN["gn_1_4"], rel=1e-3)
    assert res.el_residual <= 1e-4
    assert res.alpha > 0 and res.beta > 0


def test_gn_constant_bounds_random_fields(rng):
    grid = default_grid(1)
    c = gn_constant(1, 5.0, grid)
    for _ in range(200):
        assert gn_quotient(random_smooth_field(grid, rng), 5.0) <= c + 1e-8


def test_gn_dimension_mismatch():
    with pytest.raises(ValueError):
        gn_maximizer(2, 4.0, default_grid(1))


def test_zero_spec_profile(fine_p12_grid):
    prof = phi_profile(P12, ZERO, fine_p12_grid)
    co = prof.coeffs
    r2 = (P12.a * P12.p / (2.0 * co.K)) ** (1.0 / (P12.p * P12.gamma_p - 2.0))
    assert prof.r1 == 0.0 and prof.r2 == pytest.approx(r2, rel=1e-14)
    t = np.geomspace(1e-3 * r2, 0.999 * r2, 500)
    assert np.all(prof.phi(t) > 0)


def test_psi_max_two_routes(fine_p12_grid):
    cnp = gn_constant(1, 12.0, fine_p12_grid)
    co = coefficients(P12, cnp, 0.0)
    tb = t_bar(P12, cnp)
    t = np.geomspace(tb / 3, 3 * tb, 20001)
    vals = co.psi(t)
    i = int(np.argmax(vals))
    from scipy.optimize import minimize_scalar

    best = minimize_scalar(lambda s: -float(co.psi(math.exp(s))), bracket=(math.log(t[i - 1]), math.log(t[i]), math.log(t[i + 1])))
    assert psi_at_t_bar(P12, cnp) == pytest.approx(-best.fun, rel=1e-8)
    assert float(co.psi(tb)) == pytest.approx(psi_at_t_bar(P12, cnp), rel=1e-12)
    wide = np.geomspace(1e-4 * tb, 1e3 * tb, 1000)
    assert np.all(co.psi(wide) <= psi_at_t_bar(P12, cnp) * (1 + 1e-12))


def _scaled(frac, grid):
    cnp = gn_constant(1, 12.0, grid)
    thr = threshold_mountain_pass_norm(P12, cnp)
    return GAUSS.with_h0(frac * thr / potential_norms(GAUSS, 1.5, 12.0, grid).norm_p_over_pmq)


def test_profile_ordering(fine_p12_grid):
    prof = phi_profile(P12, _scaled(0.1, fine_p12_grid), fine_p12_grid)
    assert prof.status == "ok"
    assert 0 < prof.t1 < prof.r1 < prof.t2 < prof.r2
    assert prof.phi(prof.t1) < 0 and prof.phi(prof.t2) > 0
    assert abs(prof.phi(prof.r1)) <= 1e-10 * prof.phi(prof.t2)
    assert abs(prof.phi(prof.r2)) <= 1e-10 * prof.phi(prof.t2)
    t = np.linspace(prof.r1, prof.r2, 1002)[1:-1]
    assert np.all(prof.phi(t) > 0)
    outside = np.concatenate([np.geomspace(prof.r1 * 1e-3, prof.r1 * (1 - 1e-6), 500),
                              np.geomspace(prof.r2 * (1 + 1e-6), prof.r2 * 1e3, 500)])
    assert np.all(prof.phi(outside) < 0)


def test_threshold_flip(fine_p12_grid):
    assert phi_profile(P12, _scaled(0.999, fine_p12_grid), fine_p12_grid).status == "ok"
    prof = phi_profile(P12, _scaled(1.001, fine_p12_grid), fine_p12_grid)
    assert prof.status == "no-positive-region"
    t = np.geomspace(1e-4, 1e3, 4000)
    assert np.all(prof.phi(t) <= 0)


def test_profile_rejects_wrong_regime():
    with pytest.raises(ValueError):
        phi_profile(KirchhoffParams(1, p=3.0), ZERO, default_grid(1))
    with pytest.raises(ValueError):
        phi_profile(P12, PotentialSpec("gaussian", "nonpos", 1.0), default_grid(1))


def test_scan_columns(fine_p12_grid):
    prof = phi_profile(P12, _scaled(0.1, fine_p12_grid), fine_p12_grid)
    data = scan_profile(prof, n=50)
    assert set(data) == {"t", "phi", "psi"} and len(data["t"]) == 50
    assert data["t"][-1] == pytest.approx(2 * prof.r2)


def test_phi_is_lower_bound(fine_p12_grid, rng):
    spec = _scaled(0.5, fine_p12_grid)
    prof = phi_profile(P12, spec, fine_p12_grid)
    for _ in range(100):
        u = project_mass(random_smooth_field(fine_p12_grid, rng, center_radius=0.5, widths=(0.1, 0.4)), 1.0)
        t = math.sqrt(grad_norm_sq(u))
        assert energy(u, P12, spec).total >= float(prof.phi(t)) - 1e-8


def test_fiber_energy_limits(gauss1, fine_p12_grid):
    prm = KirchhoffParams(1, p=12.0, q=1.5)
    assert fiber_energy(gauss1, 1.0, prm, GAUSS) == energy(gauss1, prm, GAUSS).total
    small = [abs(fiber_energy(gauss1, t, prm, GAUSS)) for t in (1e-1, 1e-2, 1e-3)]
    assert small[0] > small[1] > small[2]
    # narrow enough that the fiber maximum sits below t = 4
    from kirchnorm.grid import gaussian_field

    u = project_mass(gaussian_field(fine_p12_grid, 1.0, 0.08), 1.0)
    big = fiber_curve(u, [4.0, 8.0, 16.0], prm, ZERO)
    assert np.all(np.diff(big) < 0) and np.all(big < 0)


def test_fiber_energy_matches_materialized(gauss1):
    from kirchnorm.grid import scale_fiber

    prm = KirchhoffParams(1, p=12.0, q=1.5)
    for t in (0.6, 1.3, 2.0):
        direct = energy(scale_fiber(gauss1, t), prm, GAUSS).total
        assert fiber_energy(gauss1, t, prm, GAUSS) == pytest.approx(direct, rel=1e-6, abs=1e-9)


def test_fiber_energy_rejects_nonpositive_t(gauss1):
    with pytest.raises(ValueError):
        fiber_energy(gauss1, 0.0, P12, ZERO)


def test_fiber_mountain_shape(fine_p12_grid):
    spec = _scaled(0.1, fine_p12_grid)
    from kirchnorm.grid import gaussian_field

    u = project_mass(gaussian_field(fine_p12_grid, 1.0, 0.2), 1.0)
    prof = phi_profile(P12, spec, fine_p12_grid)
    # start well below the phi minimum: the fiber dips, climbs once, then falls
    ts = np.geomspace(1e-2 * prof.t1 / math.sqrt(grad_norm_sq(u)), 16.0, 200)
    d = np.diff(fiber_curve(u, ts, P12, spec))
    flips = np.nonzero(np.diff(np.sign(d)) != 0)[0]
    assert len(flips) == 2 and d[0] < 0
    # from the fiber's own local minimum on there is exactly one change
    assert np.count_nonzero(np.diff(np.sign(d[flips[0] + 1:])) != 0) == 1
