import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad, simpson

from lapspec import freeconv as fc
from lapspec.eigensolve import eigenvalues
from lapspec.errors import DomainError, InvalidArgumentError, RootNotFoundError
from lapspec.locallaw import build_domain, empirical_m
from lapspec.rand_models import sample_surrogate

# 40-digit values from mpmath quadrature and root finding, rounded to double
S_ONE_PLUS_I = complex(-0.28866304584607211931, 0.52086243590133672506)
S_MINUS_TWO = complex(0.48498172704521967172, 0.25894289296750165674)
M_REFERENCE = {
    complex(0.5, 0.3): complex(-0.12990284610631946028, 0.65082147807933082116),
    complex(3.0, 0.05): complex(-0.47767410310195099852, 0.083162419410522607189),
    complex(0.0, 1.0): complex(0.0, 0.51290921661900327286),
}
V_AT_0 = 0.75179152469356445746
V_AT_1 = 0.60422380045113507074
PSI_AT_1 = 1.4037027510787553796
LOCATION_3717 = 4.0106175180301662731

upper = st.builds(complex, st.floats(-30, 30), st.floats(1e-3, 30))


def _phi(x):
    return np.exp(-x * x / 2) / math.sqrt(2 * math.pi)


def _quad_stieltjes(z):
    re = quad(lambda x: (_phi(x) / (x - z)).real, -40, 40, points=[z.real], limit=400, epsabs=1e-14)[0]
    im = quad(lambda x: (_phi(x) / (x - z)).imag, -40, 40, points=[z.real], limit=400, epsabs=1e-14)[0]
    return complex(re, im)


# -- Gaussian Stieltjes transform ----------------------------------------------

def test_stieltjes_reference_values():
    assert abs(fc.gaussian_stieltjes(1 + 1j) - S_ONE_PLUS_I) <= 1e-15
    assert abs(fc.gaussian_stieltjes(-2 + 0.5j) - S_MINUS_TWO) <= 1e-15


def test_stieltjes_matches_quadrature():
    z = 1 + 1j
    q = _quad_stieltjes(z)
    assert abs(fc.gaussian_stieltjes(z) - q) <= 1e-10 * abs(q)


def test_stieltjes_reflection():
    z = 0.7 + 0.3j
    assert abs(fc.gaussian_stieltjes(-z.conjugate()) + fc.gaussian_stieltjes(z).conjugate()) <= 1e-15


def test_stieltjes_far_field():
    z = 10j
    s = fc.gaussian_stieltjes(z)
    assert abs(s - 0.1j) <= 2e-3
    # z^2 (s + 1/z) -> -1 (second moment); bounded by 2 here
    assert abs(z * z * (s + 1 / z)) <= 2


@given(upper)
def test_stieltjes_herglotz_and_bounded(z):
    s = fc.gaussian_stieltjes(z)
    assert s.imag > 0
    assert abs(s) <= math.sqrt(math.pi / 2) + 1e-12


def test_stieltjes_derivative_matches_difference():
    z = 0.4 + 0.2j
    h = 1e-6
    num = (fc.gaussian_stieltjes(z + h) - fc.gaussian_stieltjes(z - h)) / (2 * h)
    assert abs(fc.gaussian_stieltjes_prime(z) - num) <= 1e-8


@pytest.mark.parametrize("z", [1.0, 1 - 1e-3j, 2 + 0j])
def test_stieltjes_rejects_lower_half_plane(z):
    with pytest.raises(DomainError):
        fc.gaussian_stieltjes(z)


# -- fixed point -----------------------------------------------------------------

@pytest.mark.parametrize("z", list(M_REFERENCE))
def test_solve_m_reference(z):
    assert abs(fc.solve_m(z) - M_REFERENCE[z]) <= 1e-12


def test_solve_m_far_field():
    z = 100j
    m = fc.solve_m(z)
    assert abs(m + 1 / z) <= 2e-4
    assert abs(m - fc.gaussian_stieltjes(z + m)) <= 1e-12


def test_solve_m_two_hundred_points():
    rng = np.random.default_rng(1)
    z = rng.uniform(-6, 6, 200) + 1j * np.exp(rng.uniform(math.log(1e-3), math.log(10), 200))
    m = fc.solve_m(z)
    assert np.max(np.abs(m - fc.gaussian_stieltjes(z + m))) <= 1e-12
    assert np.all(m.imag > 0)
    assert np.all(np.abs(m) <= 1)
    assert np.all(fc.gaussian_stieltjes(z).imag > 0)


@given(upper)
def test_solve_m_postconditions(z):
    m = fc.solve_m(z)
    assert abs(m - fc.gaussian_stieltjes(z + m)) <= 1e-12
    assert m.imag >= 0 and abs(m) <= 1 + 1e-12


def test_solve_m_tracks_large_surrogate_spectrum():
    # Monte Carlo oracle at n = 4000 (a dense n = 20000 solve exceeds this machine's memory)
    n, z = 4000, 3 + 0.1j
    _, _, L = sample_surrogate(n, 31)
    mn = empirical_m(eigenvalues(L, backend="lapack"), z)
    assert abs(mn - fc.solve_m(z)) <= 3 / (math.sqrt(n) * z.imag)


def test_stability_residual_certifies_proximity():
    rng = np.random.default_rng(2)
    dom = build_domain(0.1, 2000, "S-tilde", 25)
    for z in dom.points:
        m = fc.solve_m(z)
        for _ in range(4):
            eps = 1e-3 * rng.uniform(0.1, 1) * np.exp(2j * np.pi * rng.uniform())
            mt = m + eps
            assert abs(mt - fc.gaussian_stieltjes(z + mt)) >= abs(eps) / 2


def test_edge_behaviour_on_spectral_domains():
    n = 2000
    pts = np.concatenate([build_domain(0.1, n, k, 50).points for k in ("S-tilde", "S-hat")])
    m = fc.solve_m(pts)
    assert np.max(m.imag) <= n ** -0.25
    tilde = build_domain(0.1, n, "S-tilde", 50)
    eta = tilde.gridEta[0]
    a = fc.solve_m(tilde.gridE + 1j * eta)
    b = fc.solve_m(tilde.gridE + 1j * math.sqrt(2) * eta)
    assert np.max(np.abs(a.real - b.real)) <= 10 / math.sqrt(n)


def test_m_prime_matches_difference():
    z = 1.5 + 0.4j
    h = 1e-6
    num = (fc.solve_m(z + h) - fc.solve_m(z - h)) / (2 * h)
    assert abs(fc.m_prime(z) - num) <= 1e-7


def test_solver_config_validation():
    with pytest.raises(InvalidArgumentError):
        fc.SolverConfig(tol=0)
    with pytest.raises(InvalidArgumentError):
        fc.SolverConfig(max_iter=0)
    with pytest.raises(InvalidArgumentError):
        fc.SolverConfig(damping=1.5)


# -- Biane functions ---------------------------------------------------------------

def _phi_integral_quad(u, v):
    return quad(lambda x: _phi(x) / ((u - x) ** 2 + v * v), -np.inf, np.inf, points=None, limit=400)[0]


def test_v_at_zero_two_routes():
    # scan for the sign change of (integral - 1), then bisect, all by scipy quadrature
    grid = np.linspace(0.05, 2, 40)
    vals = [_phi_integral_quad(0.0, v) - 1 for v in grid]
    j = next(i for i in range(len(grid) - 1) if vals[i] > 0 >= vals[i + 1])
    lo, hi = grid[j], grid[j + 1]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if _phi_integral_quad(0.0, mid) > 1 else (lo, mid)
    assert abs(fc.biane_v(0.0) - 0.5 * (lo + hi)) <= 1e-8
    assert abs(fc.biane_v(0.0) - V_AT_0) <= 1e-9
    assert abs(fc.biane_v(1.0) - V_AT_1) <= 1e-9


def test_v_even():
    assert abs(fc.biane_v(1.3) - fc.biane_v(-1.3)) <= 1e-12


def test_v_tail():
    # v(u) e^{u^2/2} tends to sqrt(pi/2); the constant 2 is calibrated on u >= 3
    for u in (3.0, 4.0, 5.0):
        assert fc.biane_v(u) <= 2.0 * math.exp(-u * u / 2)


def test_psi_values():
    assert fc.biane_psi(0.0) == pytest.approx(0.0, abs=1e-15)
    assert abs(fc.biane_psi(8.0) - 8.0) <= 2 / 8
    assert abs(fc.biane_psi(1.0) - PSI_AT_1) <= 1e-9


def test_psi_two_quadrature_rules():
    u = 1.0
    v = fc.biane_v(u)
    f = lambda x: (u - x) * _phi(x) / ((u - x) ** 2 + v * v)
    adaptive = u + quad(f, -np.inf, np.inf, limit=400)[0]
    xs = np.linspace(u - 12, u + 12, 2049)
    composite = u + simpson(f(xs), x=xs)
    assert abs(adaptive - composite) <= 1e-8
    assert abs(fc.biane_psi(u) - adaptive) <= 1e-8


def test_psi_increasing():
    us = np.linspace(-6, 6, 241)
    assert np.all(np.diff([fc.biane_psi(u) for u in us]) > 0)


def test_lipschitz_boundary():
    for u in (-1.0, 0.0, 2.5):
        assert fc.lipschitz_region_boundary(1.0, u) == fc.biane_v(u)
    # calibrated C_t = 2t
    assert fc.lipschitz_region_boundary(2.0, 4.0) <= 4.0 * math.exp(-8)
    # scan oracle for v_2(0): the integral equals 1/2 at the boundary
    grid = np.linspace(0.05, 3, 60)
    vals = [_phi_integral_quad(0.0, v) - 0.5 for v in grid]
    j = next(i for i in range(len(grid) - 1) if vals[i] > 0 >= vals[i + 1])
    lo, hi = grid[j], grid[j + 1]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if _phi_integral_quad(0.0, mid) > 0.5 else (lo, mid)
    assert abs(fc.lipschitz_region_boundary(2.0, 0.0) - 0.5 * (lo + hi)) <= 1e-8
    with pytest.raises(InvalidArgumentError):
        fc.lipschitz_region_boundary(0.5, 0.0)


# -- density ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def grid():
    return fc.density_grid(-8, 8, 2001)


def test_grid_invariants(grid):
    assert np.array_equal(grid.p_values, grid.v_values / np.pi)
    assert np.all(np.diff(grid.x_nodes) > 0)
    assert abs(grid.mass() - 1) <= 1e-4
    assert np.allclose(grid(-grid.x_nodes[::50]), grid(grid.x_nodes[::50]), atol=1e-12)


def test_density_sub_gaussian(grid):
    scaled = grid.p_values * np.exp(grid.x_nodes ** 2 / 2)
    c = float(np.max(scaled[np.abs(grid.x_nodes) <= 4]))
    # empirical constant: p(x) e^{x^2/2} stays below its |x| <= 4 maximum beyond 4
    assert c < 2.5
    assert np.all(scaled[np.abs(grid.x_nodes) > 4] <= c)


def test_density_matches_stieltjes_inversion(grid):
    xs = np.linspace(-4, 4, 801)
    inv = fc.solve_m(xs + 1e-3j).imag / np.pi
    assert np.max(np.abs(grid(xs) - inv)) <= 2e-3


def test_pointwise_density_agrees_with_grid(grid):
    xs = np.array([-2.5, 0.0, 0.3, 1.7])
    assert np.allclose(fc.density(xs), grid(xs), atol=1e-5)


def test_csv_round_trip(tmp_path, grid):
    path = grid.write_csv(tmp_path / "grid.csv")
    assert fc.DensityGrid.read_csv(path) == grid


def test_grid_rejects_bad_ranges():
    with pytest.raises(InvalidArgumentError):
        fc.density_grid(1, -1)
    with pytest.raises(InvalidArgumentError):
        fc.density_grid(-1, 1, 8)


# -- location ----------------------------------------------------------------------

def test_location_dual_methods():
    eta = 1000 ** -0.25
    newton = fc.predict_location(3.717, eta)
    bisect = fc.predict_location(3.717, eta, method="bisect")
    assert abs(newton - bisect) <= 1e-9
    assert abs(newton - LOCATION_3717) <= 1e-9
    assert abs(3.717 - newton - fc.solve_m(newton + 1j * eta).real) <= 1e-10


def test_location_asymptotics():
    X = 6.0
    E = fc.predict_location(X, 1e-3)
    assert abs(E - X - 1 / X) <= 1.5 / X ** 2


def test_location_increasing_in_x():
    xs = np.linspace(2.0, 5.0, 7)
    es = [fc.predict_location(x, 0.2) for x in xs]
    assert np.all(np.diff(es) > 0)


def test_location_errors():
    with pytest.raises(InvalidArgumentError):
        fc.predict_location(0.5, 0.1)
    with pytest.raises(InvalidArgumentError):
        fc.predict_location(3.0, 0.0)


def test_location_no_bracket(monkeypatch):
    # force a residual with no sign change on [X, X + 2]
    monkeypatch.setattr(fc, "_location_residual", lambda E, X, eta, cfg: 1.0)
    with pytest.raises(RootNotFoundError):
        fc.predict_location(3.0, 0.1)
