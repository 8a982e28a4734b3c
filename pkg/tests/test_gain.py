"""Gain density, scalar quantizer training, and the gain distortion law.

Independent oracles used here:
  - the density of the root of a Gamma(L, beta) variable integrates to one
    and has second moment L*beta (checked by quadrature);
  - the cube of the 1/3-norm has closed form
    3 * 3**L * beta / (4 * Gamma(L)) * Gamma((L+1)/3)**3, checked against
    direct quadrature of f(r)**(1/3);
  - at L=1, beta=1 it collapses to (9/4) * Gamma(2/3)**3;
  - training on {1,2,3,4} with one bit has the exact optimum {1.5, 3.5}
    with mean squared error 1/4 (verified by scanning all sorted splits);
  - a trained 8-bit quantizer on Rayleigh data must sit near the
    high-resolution distortion law K_g * 4**(-bits).
"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from sgvq.gain import (
    GainCodebook,
    GainDistortionModel,
    GainPdfParams,
    analytic_gain_distortion,
    eigenvalue_pdf,
    empirical_gain_distortion,
    gain_pdf,
    kg_constant,
    load_gain_codebook,
    params_from_stats,
    quantize_gain,
    quantize_gain_batch,
    save_gain_codebook,
    third_power_norm,
    train_gain_codebook,
)


def test_pdf_point_value_and_shape():
    # L=1, beta=1: f(r) = 2 r exp(-r^2), so f(1) = 2/e
    params = GainPdfParams(L_e=1, beta=1.0)
    assert abs(gain_pdf(1.0, params) - 2.0 / math.e) < 1e-12
    grid = np.linspace(0.0, 3.0, 7)
    vals = gain_pdf(grid, params)
    assert vals.shape == grid.shape
    assert vals[0] == 0.0
    with pytest.raises(ValueError):
        gain_pdf(-0.5, params)


def test_pdf_normalization_and_second_moment():
    for L, beta in ((1, 1.0), (4, 0.875), (2, 3.0)):
        params = GainPdfParams(L_e=L, beta=beta)
        total, _ = integrate.quad(lambda r: gain_pdf(r, params), 0.0, np.inf)
        assert abs(total - 1.0) < 1e-9
        m2, _ = integrate.quad(lambda r: r * r * gain_pdf(r, params), 0.0, np.inf)
        assert abs(m2 - L * beta) < 1e-8 * L * beta


def test_eigenvalue_pdf_is_gamma_density():
    for L, beta in ((1, 1.0), (4, 0.875), (3, 2.5)):
        params = GainPdfParams(L_e=L, beta=beta)
        grid = np.linspace(0.05, 12.0, 40)
        want = stats.gamma.pdf(grid, a=L, scale=beta)
        got = eigenvalue_pdf(grid, params)
        assert np.max(np.abs(got - want)) < 1e-12


def test_third_power_norm_closed_form_and_quadrature():
    closed = 2.25 * math.gamma(2.0 / 3.0) ** 3
    assert abs(third_power_norm(GainPdfParams(1, 1.0)) - closed) < 1e-12 * closed
    for L, beta in ((1, 1.0), (4, 0.875), (2, 1.7)):
        params = GainPdfParams(L_e=L, beta=beta)
        val, _ = integrate.quad(
            lambda r: gain_pdf(r, params) ** (1.0 / 3.0), 0.0, np.inf, limit=300
        )
        assert abs(val**3 - third_power_norm(params)) < 1e-6 * val**3
    # the norm scales linearly in beta
    a = third_power_norm(GainPdfParams(3, 1.0))
    b = third_power_norm(GainPdfParams(3, 2.0))
    assert abs(b - 2.0 * a) < 1e-12 * b


def test_kg_constant_and_distortion_law():
    params = GainPdfParams(2, 0.9)
    model = kg_constant(params)
    assert abs(model.K_g - third_power_norm(params) / 12.0) < 1e-14
    assert analytic_gain_distortion(0, model) == model.K_g
    for bits in range(0, 9):
        ratio = analytic_gain_distortion(bits, model) / analytic_gain_distortion(
            bits + 1, model
        )
        assert abs(ratio - 4.0) < 1e-12
    with pytest.raises(ValueError):
        analytic_gain_distortion(-1, model)
    with pytest.raises(ValueError):
        GainDistortionModel(K_g=0.0, norm13=1.0)


def test_params_from_stats():
    params = params_from_stats(M=2, N_k=2, order=0, lambda_tilde=3.5)
    assert params.L_e == 4
    assert abs(params.beta - 3.5 / 4.0) < 1e-15
    params = params_from_stats(M=2, N_k=2, order=1, lambda_tilde=0.5)
    assert params.L_e == 1
    assert abs(params.beta - 0.5) < 1e-15
    with pytest.raises(ValueError):
        params_from_stats(M=2, N_k=2, order=2, lambda_tilde=1.0)


def test_train_two_level_worked_example():
    samples = np.array([1.0, 2.0, 3.0, 4.0])
    cb = train_gain_codebook(samples, 1)
    assert np.allclose(cb.centroids, [1.5, 3.5], atol=1e-12)
    assert abs(empirical_gain_distortion(cb, samples) - 0.25) < 1e-12
    # oracle: scan every sorted split of the four points into two cells
    best = np.inf
    for cut in (1, 2, 3):
        left, right = samples[:cut], samples[cut:]
        mse = (
            np.sum((left - left.mean()) ** 2) + np.sum((right - right.mean()) ** 2)
        ) / 4.0
        best = min(best, mse)
    assert abs(best - 0.25) < 1e-15


def test_train_degenerate_and_zero_bits():
    same = np.full(64, 2.5)
    cb = train_gain_codebook(same, 1)
    assert cb.centroids.shape == (2,)
    assert empirical_gain_distortion(cb, same) == 0.0
    rng = np.random.default_rng(5)
    data = rng.uniform(1.0, 2.0, 500)
    cb0 = train_gain_codebook(data, 0)
    assert cb0.centroids.shape == (1,)
    assert abs(cb0.centroids[0] - data.mean()) < 1e-12


def test_train_requires_enough_samples():
    with pytest.raises(ValueError):
        train_gain_codebook(np.array([1.0, 2.0, 3.0]), 2)


def test_trained_rayleigh_tracks_bennett_law():
    rng = np.random.default_rng(99)
    samples = np.sqrt(rng.exponential(1.0, 1_000_000))
    cb = train_gain_codebook(samples, 8)
    emp = empirical_gain_distortion(cb, samples)
    model = kg_constant(GainPdfParams(1, 1.0))
    want = analytic_gain_distortion(8, model)
    assert abs(emp - want) < 0.25 * want, (emp, want)


def test_training_distortion_monotone_in_bits():
    rng = np.random.default_rng(31)
    samples = np.sqrt(rng.exponential(1.0, 100_000))
    prev = np.inf
    for bits in range(1, 9):
        cb = train_gain_codebook(samples, bits)
        d = empirical_gain_distortion(cb, samples)
        assert d < prev, bits
        prev = d


def test_quantize_nearest_with_tie_to_lower():
    cb = GainCodebook(centroids=np.array([1.0, 2.0]), bits=1)
    idx, val = quantize_gain(1.2, cb)
    assert idx == 0 and val == 1.0
    idx, val = quantize_gain(1.5, cb)  # exact midpoint goes to the lower cell
    assert idx == 0 and val == 1.0
    idx, val = quantize_gain(1.500001, cb)
    assert idx == 1 and val == 2.0
    for i, c in enumerate(cb.centroids):
        idx, val = quantize_gain(c, cb)
        assert idx == i and val == c


def test_quantize_batch_matches_brute_force():
    rng = np.random.default_rng(314)
    centroids = np.sort(rng.uniform(0.0, 5.0, 16))
    cb = GainCodebook(centroids=centroids, bits=4)
    g = rng.uniform(-0.5, 6.0, 800).clip(min=0.0)
    idx, rec = quantize_gain_batch(g, cb)
    brute = np.argmin(np.abs(g[:, None] - centroids[None, :]), axis=1)
    assert np.array_equal(idx, brute)
    assert np.array_equal(rec, centroids[brute])
    one_idx, one_val = quantize_gain(float(g[13]), cb)
    assert one_idx == idx[13] and one_val == rec[13]


def test_empirical_distortion_membership_zero():
    cb = GainCodebook(centroids=np.array([0.5, 1.0, 2.0, 4.0]), bits=2)
    samples = np.array([0.5, 4.0, 1.0, 1.0, 2.0])
    assert empirical_gain_distortion(cb, samples) == 0.0
    with pytest.raises(ValueError):
        empirical_gain_distortion(cb, np.array([]))


def test_codebook_validation():
    with pytest.raises(ValueError):
        GainCodebook(centroids=np.array([1.0, 2.0, 3.0]), bits=1)
    with pytest.raises(ValueError):
        GainCodebook(centroids=np.array([2.0, 1.0]), bits=1)


def test_save_load_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(12)
    samples = np.sqrt(rng.exponential(1.0, 5000))
    cb = train_gain_codebook(samples, 5)
    path = tmp_path / "gain.txt"
    save_gain_codebook(cb, path)
    back = load_gain_codebook(path)
    assert back.bits == cb.bits
    assert np.array_equal(back.centroids, cb.centroids)
    bad = tmp_path / "bad.txt"
    bad.write_text("shape-codebook M=2 bits=1 seed=0\n")
    with pytest.raises(ValueError):
        load_gain_codebook(bad)
