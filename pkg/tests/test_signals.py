import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from slra.matops import numerical_rank
from slra.signals import (
    NoiseSpec,
    SignalModel,
    add_noise,
    four_tone_model,
    gen_cos_sum,
    hankel_shape,
    load_model_json,
    load_signal_csv,
    sample_signal,
    save_model_json,
    save_signal_csv,
    sigma0_heuristic,
    signal_to_hankel,
)
from slra.subspace import HankelSubspace


def random_exponential_model(rng, P, n_half=25, min_sep=0.1):
    """Distinct unit-circle exponents with enforced angular separation."""
    while True:
        angles = np.sort(rng.uniform(-np.pi * 0.95, np.pi * 0.95, size=P))
        if P == 1 or np.min(np.diff(angles)) > min_sep:
            break
    coeffs = rng.uniform(0.5, 2.0, size=P) * np.exp(2j * np.pi * rng.uniform(size=P))
    terms = tuple((c, 1j * a) for c, a in zip(coeffs, angles))
    return SignalModel.symmetric(terms, n_half)


def test_sample_constant_term():
    m = SignalModel.symmetric(((1.0, 0.0),), 3)
    assert_allclose(sample_signal(m), np.ones(7))


def test_sample_alternating():
    m = SignalModel(((1.0, 1j * np.pi),), np.array([0, 1, 2]))
    assert_allclose(sample_signal(m), [1.0, -1.0, 1.0], atol=1e-12)


def test_sample_overflow_guard():
    m = SignalModel(((1.0, 1000.0),), np.arange(10))
    with pytest.raises(OverflowError):
        sample_signal(m)


def test_four_tone_model_rank_four():
    f = sample_signal(four_tone_model())
    assert f.size == 257
    h = signal_to_hankel(f)
    assert h.shape == (129, 129)
    assert numerical_rank(h, 1e-8) == 4


def test_model_needs_terms():
    with pytest.raises(ValueError):
        SignalModel((), np.arange(3))


def test_kronecker_rank_matches_term_count():
    rng = np.random.default_rng(0)
    for P in range(1, 9):
        for _ in range(3):
            m = random_exponential_model(rng, P)
            h = signal_to_hankel(sample_signal(m))
            assert numerical_rank(h, 1e-8) == P


def test_gen_cos_sum_deterministic():
    assert_allclose(gen_cos_sum(42), gen_cos_sum(42))
    assert not np.allclose(gen_cos_sum(42), gen_cos_sum(43))


def test_gen_cos_sum_properties():
    f = gen_cos_sum(7)
    assert f.shape == (200,)
    assert np.isrealobj(f)
    h = HankelSubspace(101, 100).from_vector(f)
    assert numerical_rank(h, 1e-8) <= 8


def test_gen_cos_sum_rank_eight_typically():
    hits = sum(
        numerical_rank(HankelSubspace(101, 100).from_vector(gen_cos_sum(s)), 1e-8) == 8
        for s in range(20)
    )
    assert hits >= 15  # degenerate draws allowed, but rare


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec()
    with pytest.raises(ValueError):
        NoiseSpec(sigma=0.1, snr_dbw=10.0)
    with pytest.raises(ValueError):
        NoiseSpec(sigma=-1.0)


def test_add_noise_zero_sigma():
    f = np.arange(5.0)
    assert_allclose(add_noise(f, NoiseSpec(sigma=0.0, seed=1)), f)


def test_add_noise_seeded_determinism():
    f = np.ones(100)
    a = add_noise(f, NoiseSpec(sigma=0.5, seed=9))
    b = add_noise(f, NoiseSpec(sigma=0.5, seed=9))
    assert_allclose(a, b)


def test_add_noise_complex_variance_split():
    f = np.zeros(200_000, dtype=complex)
    noisy = add_noise(f, NoiseSpec(sigma=2.0, seed=3))
    # per-entry variance sigma^2 split evenly between components
    assert np.var(noisy.real) == pytest.approx(2.0, rel=0.05)
    assert np.var(noisy.imag) == pytest.approx(2.0, rel=0.05)


def test_add_noise_real_variance():
    noisy = add_noise(np.zeros(200_000), NoiseSpec(sigma=0.3, seed=4))
    assert np.var(noisy) == pytest.approx(0.09, rel=0.05)


def test_add_noise_zero_mean_rate():
    noisy = add_noise(np.zeros(10_000), NoiseSpec(sigma=1.0, seed=5))
    assert abs(np.mean(noisy)) <= 4.0 / np.sqrt(10_000)


def test_snr_mode_hits_target():
    rng = np.random.default_rng(6)
    f = rng.standard_normal(10_000) * 3.0
    for snr in (0.0, 10.0, 25.0):
        noisy = add_noise(f, NoiseSpec(snr_dbw=snr, seed=7))
        noise = noisy - f
        measured = 20 * np.log10(np.linalg.norm(f) / np.linalg.norm(noise))
        assert measured == pytest.approx(snr, abs=0.5)


def test_snr_mode_complex():
    f = sample_signal(four_tone_model())
    noisy = add_noise(f, NoiseSpec(snr_dbw=10.0, seed=8))
    measured = 20 * np.log10(np.linalg.norm(f) / np.linalg.norm(noisy - f))
    assert measured == pytest.approx(10.0, abs=0.7)


def test_add_noise_matrix_input():
    h = np.ones((30, 20))
    noisy = add_noise(h, NoiseSpec(sigma=0.1, seed=9))
    assert noisy.shape == h.shape
    assert np.std(noisy - h) == pytest.approx(0.1, rel=0.2)


def test_sigma0_heuristic_hand_value():
    F = np.diag([4.0, 2.0, 0.0, 0.0])
    assert sigma0_heuristic(F, 1) == pytest.approx(3.0)


def test_sigma0_heuristic_exact_rank():
    F = np.diag([5.0, 3.0, 0.0, 0.0])
    assert sigma0_heuristic(F, 2) == pytest.approx(1.5)


def test_sigma0_heuristic_ordering():
    f = sample_signal(four_tone_model())
    noisy = add_noise(f, NoiseSpec(snr_dbw=10.0, seed=10))
    F = signal_to_hankel(noisy)
    s = np.linalg.svd(F, compute_uv=False)
    s0 = sigma0_heuristic(F, 4)
    assert s[4] <= s0 <= s[3]


def test_sigma0_heuristic_range_check():
    with pytest.raises(ValueError):
        sigma0_heuristic(np.eye(3), 3)


def test_hankel_shape():
    assert hankel_shape(200) == (101, 100)
    assert hankel_shape(257) == (129, 129)
    assert hankel_shape(5) == (3, 3)


def test_signal_csv_round_trip(tmp_path):
    f = np.array([1 + 2j, -0.5, 3.25 - 1j])
    path = tmp_path / "sig.csv"
    save_signal_csv(path, f, indices=np.array([-1, 0, 1]))
    idx, back = load_signal_csv(path)
    assert_allclose(idx, [-1, 0, 1])
    assert_allclose(back, f)


def test_model_json_round_trip(tmp_path):
    m = four_tone_model()
    path = tmp_path / "model.json"
    save_model_json(path, m)
    back = load_model_json(path)
    assert back.delta == m.delta
    assert_allclose(back.indices, m.indices)
    assert_allclose(sample_signal(back), sample_signal(m))
    doc = json.loads(path.read_text())
    assert set(doc) == {"terms", "delta", "grid"}
    assert set(doc["terms"][0]) == {"c_re", "c_im", "zeta_re", "zeta_im"}
