import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from combstate.linefit import fit_lines
from combstate.spectral import (
    CombParams,
    DegenerateVarianceError,
    EnvelopeModel,
    FrequencyGrid,
    GridError,
    ResolutionError,
    SpectralDensity,
    SpectralError,
    TruncationError,
    TruncationPolicy,
    ZeroIntegralError,
    delta_comb,
    envelope_eval,
    line_component,
    mutual_coherence,
    normalize,
    one_sided,
    positive_term,
    psd_analytic,
    truncation_bounds,
)


# -- envelope ---------------------------------------------------------------


def test_envelope_examples():
    env = EnvelopeModel(nu_c=5, bandwidth_B=2)
    assert envelope_eval(env, 5.0) == 1.0
    assert envelope_eval(env, 7.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert envelope_eval(env, 3.0) == envelope_eval(env, 7.0)


@given(d=st.floats(0, 50), scale=st.floats(0.1, 10), b=st.floats(0.1, 10))
def test_envelope_even_and_peaked(d, scale, b):
    env = EnvelopeModel(nu_c=2.5, bandwidth_B=b, amplitude_scale=scale)
    assert env(2.5 + d) == pytest.approx(env(2.5 - d), rel=1e-12, abs=1e-300)
    assert env(2.5) == scale
    assert env(2.5 + d) <= scale


@pytest.mark.parametrize(
    "kw",
    [
        dict(mu_ceo=0.3, mu_rep=0.0, sigma_ceo=0.1, sigma_rep=0.1, nu_c=1),
        dict(mu_ceo=1.2, mu_rep=1.0, sigma_ceo=0.1, sigma_rep=0.1, nu_c=1),
        dict(mu_ceo=0.0, mu_rep=1.0, sigma_ceo=0.1, sigma_rep=0.1, nu_c=1),
        dict(mu_ceo=0.3, mu_rep=1.0, sigma_ceo=-0.1, sigma_rep=0.1, nu_c=1),
    ],
)
def test_comb_params_invariants(kw):
    with pytest.raises(SpectralError):
        CombParams(**kw)


def test_grid_validation():
    with pytest.raises(GridError):
        FrequencyGrid(0.0, 0.0, 10)
    with pytest.raises(GridError):
        FrequencyGrid(0.0, 0.1, 0)
    g = FrequencyGrid.spanning(-1.0, 1.0, 0.25)
    assert g.count == 9
    assert np.all(np.diff(g.nu) > 0)


# -- single line ------------------------------------------------------------


def _line_by_characteristic_function(params, m, nu):
    """Q_m(nu) = int exp(i 2 pi xi nu) <exp(-i 2 pi xi (nu_ceo + m nu_rep))> dxi.

    The ensemble average is taken by Gauss-Hermite quadrature over both
    normal variables, the xi integral by adaptive quadrature.
    """
    x, w = np.polynomial.hermite_e.hermegauss(60)
    w = w / w.sum()
    ceo = params.mu_ceo + params.sigma_ceo * x
    rep = params.mu_rep + params.sigma_rep * x
    f = (ceo[:, None] + m * rep[None, :]).ravel()
    wf = (w[:, None] * w[None, :]).ravel()

    def integrand(xi):
        avg = np.sum(wf * np.exp(-2j * np.pi * xi * f))
        return (np.exp(2j * np.pi * xi * nu) * avg).real

    sigma = math.sqrt(params.sigma_ceo**2 + m * m * params.sigma_rep**2)
    cut = 8.0 / (2 * math.pi * sigma)
    val, _ = integrate.quad(integrand, -cut, cut, limit=400, epsabs=1e-11)
    return val


def test_line_component_examples(fig1_params):
    expected = 1.0 / math.sqrt(2 * math.pi * 0.0025)
    assert expected == pytest.approx(7.978845608, rel=1e-9)
    assert line_component(fig1_params, 0, 0.3) == pytest.approx(expected, rel=1e-14)
    assert _line_by_characteristic_function(fig1_params, 0, 0.3) == pytest.approx(expected, rel=1e-6)

    area, _ = integrate.quad(lambda v: line_component(fig1_params, 0, v), -1, 2, points=[0.3])
    assert area == pytest.approx(1.0, abs=1e-10)

    ratio = line_component(fig1_params, 5, 5.3) / line_component(fig1_params, 0, 0.3)
    assert ratio == pytest.approx(math.sqrt(0.0025 / 0.025), rel=1e-13)
    assert ratio == pytest.approx(0.316227766, rel=1e-8)


@pytest.mark.parametrize("m,nu", [(3, 3.2), (5, 5.35), (-1, -0.7)])
def test_line_component_matches_characteristic_function(fig1_params, m, nu):
    assert line_component(fig1_params, m, nu) == pytest.approx(
        _line_by_characteristic_function(fig1_params, m, nu), rel=1e-6
    )


def test_line_component_degenerate():
    p = CombParams(mu_ceo=0.3, mu_rep=1.0, sigma_ceo=0.0, sigma_rep=0.02, nu_c=5)
    with pytest.raises(DegenerateVarianceError):
        line_component(p, 0, 0.3)
    assert line_component(p, 2, 2.3) > 0


def test_line_normalization_every_included_line(fig1_params, fig1_env):
    for m in truncation_bounds(fig1_params, fig1_env, 1e-8):
        s = float(fig1_params.line_sigma(m))
        c = float(fig1_params.line_center(m))
        nu = np.linspace(c - 8 * s, c + 8 * s, 4001)
        area = integrate.trapezoid(line_component(fig1_params, m, nu), nu)
        assert area == pytest.approx(1.0, abs=1e-6)


# -- truncation -------------------------------------------------------------


def _brute_significant(params, env, rel_tol, span=200):
    m = np.arange(-span, span + 1)
    w = env.power(params.line_center(m))
    keep = m[w >= rel_tol * w.max()]
    return keep.min(), keep.max()


def test_truncation_fig1(fig1_params, fig1_env):
    r = truncation_bounds(fig1_params, fig1_env, 1e-8)
    assert r.start <= 0 and r.stop - 1 >= 10
    lo, hi = _brute_significant(fig1_params, fig1_env, 1e-8)
    assert (lo, hi) == (-1, 10)
    # margins: ceil(4 sigma / mu_rep) at each end
    assert r.start == lo - math.ceil(4 * float(fig1_params.line_sigma(lo)))
    assert r.stop - 1 == hi + math.ceil(4 * float(fig1_params.line_sigma(hi)))


@pytest.mark.parametrize("rel_tol", [1e-2, 1e-5, 1e-8, 1e-12])
@pytest.mark.parametrize("nu_c,b", [(5.0, 2.0), (17.35, 3.3), (4.8, 0.4)])
def test_truncation_excludes_only_weak_lines(rel_tol, nu_c, b):
    p = CombParams(mu_ceo=0.3, mu_rep=1.0, sigma_ceo=0.05, sigma_rep=0.01, nu_c=nu_c)
    env = EnvelopeModel(nu_c=nu_c, bandwidth_B=b)
    r = truncation_bounds(p, env, rel_tol)
    lo, hi = _brute_significant(p, env, rel_tol)
    assert r.start <= lo and r.stop - 1 >= hi


def test_truncation_single_dominant_line():
    p = CombParams(mu_ceo=0.3, mu_rep=1.0, sigma_ceo=0.05, sigma_rep=0.0, nu_c=5.3)
    env = EnvelopeModel(nu_c=5.3, bandwidth_B=2.0)
    r = truncation_bounds(p, env, 1 - 1e-12)
    # line m=5 plus one line of margin (ceil(4 * 0.05)) on either side
    assert list(r) == [4, 5, 6]


def test_truncation_narrow_envelope():
    p = CombParams(mu_ceo=0.3, mu_rep=1.0, sigma_ceo=0.05, sigma_rep=0.03, nu_c=7.3)
    env = EnvelopeModel(nu_c=7.3, bandwidth_B=0.1)
    r = truncation_bounds(p, env, 1e-8)
    assert list(r) == [6, 7, 8]


def test_explicit_truncation_policy(fig1_params, fig1_env):
    grid = FrequencyGrid.spanning(0, 10, 0.01)
    with pytest.raises(TruncationError):
        psd_analytic(fig1_params, fig1_env, grid, TruncationPolicy(1e-8, 2, 8))
    wide = psd_analytic(fig1_params, fig1_env, grid, TruncationPolicy(1e-8, -5, 16))
    assert wide.values.max() > 0


@pytest.mark.parametrize("rel_tol", [1e-3, 1e-6, 1e-8])
def test_truncation_soundness(fig1_params, fig1_env, rel_tol):
    grid = FrequencyGrid.spanning(-12, 12, 0.01)
    r = truncation_bounds(fig1_params, fig1_env, rel_tol)
    base = normalize(psd_analytic(fig1_params, fig1_env, grid, TruncationPolicy(rel_tol)))
    big = normalize(psd_analytic(fig1_params, fig1_env, grid, TruncationPolicy(rel_tol, r.start - 6, r.stop + 5)))
    diff = np.max(np.abs(big.values - base.values))
    assert diff < rel_tol
    assert diff < rel_tol * np.max(big.values)


# -- analytic PSD -----------------------------------------------------------


def test_psd_local_maxima_near_lines(fig1_params, fig1_env):
    grid = FrequencyGrid.spanning(0, 10, 0.001)
    sd = psd_analytic(fig1_params, fig1_env, grid)
    for m in (4, 5, 6):
        c = 0.3 + m
        win = (sd.nu > c - 0.5) & (sd.nu < c + 0.5)
        peak = sd.nu[win][np.argmax(sd.values[win])]
        assert abs(peak - c) < 0.05


def test_psd_symmetric(fig1_params, fig1_env):
    grid = FrequencyGrid(-12.0, 0.01, 2401)
    sd = psd_analytic(fig1_params, fig1_env, grid)
    np.testing.assert_allclose(sd.values, sd.values[::-1], rtol=1e-12, atol=0)


def test_psd_equal_width_lines_track_envelope(fig1_env):
    p = CombParams(mu_ceo=0.3, mu_rep=1.0, sigma_ceo=0.05, sigma_rep=0.0, nu_c=5.0)
    ms = np.arange(0, 10)
    centers = p.line_center(ms)
    grid = FrequencyGrid(0.0, 0.01, 1001)
    sd = psd_analytic(p, fig1_env, grid)
    at_center = np.interp(centers, sd.nu, sd.values)
    # lines are 20 sigma apart, so each centre sees only its own line
    expected = 0.25 * fig1_env(centers) ** 2 / math.sqrt(2 * math.pi * 0.0025)
    np.testing.assert_allclose(at_center, expected, rtol=1e-9)
    fits = fit_lines(sd, p, fig1_env)
    for f in fits:
        assert f.width == pytest.approx(0.05, rel=1e-6)


def test_psd_resolution_rule(fig1_params, fig1_env):
    with pytest.raises(ResolutionError):
        psd_analytic(fig1_params, fig1_env, FrequencyGrid(0, 0.0126, 100))
    psd_analytic(fig1_params, fig1_env, FrequencyGrid(0, 0.0125, 100))


def test_delta_comb_for_zero_variance(fig1_env):
    p = CombParams(mu_ceo=0.3, mu_rep=1.0, sigma_ceo=0.0, sigma_rep=0.0, nu_c=5.0)
    with pytest.raises(DegenerateVarianceError):
        psd_analytic(p, fig1_env, FrequencyGrid(0, 0.01, 100))
    dc = delta_comb(p, fig1_env)
    assert np.all(np.diff(dc.positions) > 0)
    np.testing.assert_allclose(dc.positions, -dc.positions[::-1])
    i = int(np.argmin(np.abs(dc.positions - 5.3)))
    assert dc.weights[i] == pytest.approx(0.25 * math.exp(-2 * 0.09 / 4), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(
    mu_ceo_frac=st.floats(0.01, 0.99),
    mu_rep=st.floats(0.5, 2.0),
    sigma_ceo=st.floats(0.02, 0.2),
    sigma_rep=st.floats(0.0, 0.05),
    nu_c=st.floats(2.0, 8.0),
    b=st.floats(0.5, 3.0),
)
def test_psd_nonnegative_and_finite(mu_ceo_frac, mu_rep, sigma_ceo, sigma_rep, nu_c, b):
    p = CombParams(mu_ceo_frac * mu_rep, mu_rep, sigma_ceo, sigma_rep, nu_c)
    env = EnvelopeModel(nu_c, b)
    grid = FrequencyGrid.spanning(-15, 15, sigma_ceo / 4)
    sd = psd_analytic(p, env, grid)
    assert np.all(sd.values >= 0)
    assert np.all(np.isfinite(sd.values))


def test_psd_pointwise_sum_order_independent_of_chunking(fig1_params, fig1_env):
    grid = FrequencyGrid(0.0, 0.01, 1001)
    full = psd_analytic(fig1_params, fig1_env, grid).values
    ms = truncation_bounds(fig1_params, fig1_env, 1e-8)
    parts = [
        0.25 * (positive_term(fig1_params, fig1_env, nu, ms) + positive_term(fig1_params, fig1_env, -nu, ms))
        for nu in np.array_split(grid.nu, 7)
    ]
    assert np.array_equal(np.concatenate(parts), full)


def test_one_sided_is_four_times_positive_term(fig1_params, fig1_env):
    grid = FrequencyGrid(0.0, 0.01, 1001)
    sd = psd_analytic(fig1_params, fig1_env, grid)
    os_ = one_sided(fig1_params, fig1_env, grid)
    # the negative-frequency term is below 1e-5 of the peak on nu >= 0
    assert np.max(np.abs(4 * sd.values - os_.values)) < 1e-5 * os_.values.max()


# -- width growth / suppression law ----------------------------------------


def test_width_growth_and_suppression_well_separated_lines(fig1_params, fig1_env):
    sd = psd_analytic(fig1_params, fig1_env, FrequencyGrid.spanning(0, 10, 0.002))
    checked = 0
    for f in fit_lines(sd, fig1_params, fig1_env):
        sigma = float(fig1_params.line_sigma(f.m))
        if fig1_params.mu_rep < 6 * sigma:
            continue
        checked += 1
        assert f.width == pytest.approx(sigma, rel=0.02)
        assert f.ratio == pytest.approx(0.25 / math.sqrt(2 * math.pi * sigma**2), rel=0.01)
    assert checked == 6  # m = 0..5


# -- normalization ----------------------------------------------------------


def test_normalize(fig1_params, fig1_env):
    sd = psd_analytic(fig1_params, fig1_env, FrequencyGrid(-10, 0.01, 2001))
    n1 = normalize(sd)
    assert n1.normalized
    assert n1.integral() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(normalize(n1).values, n1.values, rtol=1e-12)
    scaled = SpectralDensity(sd.grid, 7 * sd.values)
    np.testing.assert_allclose(normalize(scaled).values, n1.values, rtol=1e-13)
    with pytest.raises(ZeroIntegralError):
        normalize(SpectralDensity(sd.grid, np.zeros(sd.grid.count)))


def test_spectral_density_rejects_negative():
    with pytest.raises(SpectralError):
        SpectralDensity(FrequencyGrid(0, 1, 3), [1.0, -1.0, 0.0])


# -- mutual coherence -------------------------------------------------------


def test_coherence_zero_delay_and_bound(fig1_params, fig1_env):
    sd = normalize(psd_analytic(fig1_params, fig1_env, FrequencyGrid(-12, 0.01, 2401)))
    g = mutual_coherence(sd, 8192)
    g0 = g.values[g.zero_index]
    assert g.tau[g.zero_index] == 0.0
    assert g0.imag == 0.0
    assert g0.real == pytest.approx(1.0, abs=1e-9)
    assert np.all(g.magnitude <= g0.real * (1 + 1e-12))


def test_coherence_single_line_width():
    sigma = 0.05
    p = CombParams(mu_ceo=0.3, mu_rep=1.0, sigma_ceo=sigma, sigma_rep=0.0, nu_c=0.3)
    grid = FrequencyGrid.spanning(-0.7, 1.3, 0.005)
    line = line_component(p, 0, grid.nu)
    sd = normalize(SpectralDensity(grid, line))
    g = mutual_coherence(sd, 4096)
    width = 1 / (2 * math.pi * sigma)
    np.testing.assert_allclose(g.magnitude, np.exp(-0.5 * (g.tau / width) ** 2), atol=1e-9)


def test_coherence_revivals_of_equal_comb():
    grid = FrequencyGrid(0.0, 0.01, 1000)
    values = np.zeros(grid.count)
    for k in range(2, 8):
        values += np.exp(-0.5 * ((grid.nu - (k + 0.3)) / 0.05) ** 2)
    sd = normalize(SpectralDensity(grid, values))
    g = mutual_coherence(sd, 8192)
    dtau = g.tau[1] - g.tau[0]
    for k in (1, 2, 3):
        win = np.abs(g.tau - (k + 0.0)) < 0.3
        t_peak = g.tau[win][np.argmax(g.magnitude[win])]
        assert abs(t_peak - k) <= dtau
        assert g.magnitude[win].max() > 0.5
