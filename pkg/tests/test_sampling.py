import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imzero.sampling import RngState, ball_sample, gaussian_sample, sphere_sample, split_stream

seeds = st.integers(min_value=0, max_value=2**64 - 1)


def test_same_state_gives_same_draws():
    a = gaussian_sample(RngState(42, 3), 2)
    b = gaussian_sample(RngState(42, 3), 2)
    assert np.array_equal(a, b)


def test_streams_differ():
    a = gaussian_sample(RngState(42, 0), 4)
    b = gaussian_sample(RngState(42, 1), 4)
    assert not np.array_equal(a, b)


def test_counter_advances():
    rng = RngState(1)
    before = rng.counter
    gaussian_sample(rng, 8)
    assert rng.counter > before


@pytest.mark.parametrize("sampler", [gaussian_sample, sphere_sample, ball_sample])
def test_rejects_nonpositive_dimension(sampler):
    with pytest.raises(ValueError):
        sampler(RngState(0), 0)


def test_gaussian_moments():
    g = gaussian_sample(RngState(7), 3, 10**6)
    # 3.5/sqrt(M) bounds for the mean, CLT bound on the variance
    assert np.all(np.abs(g.mean(axis=0)) <= 0.005)
    assert np.all(np.abs(g.var(axis=0) - 1) <= 0.01)


def test_sphere_n1_is_sign():
    u = sphere_sample(RngState(3), 1, 1000)
    assert set(np.unique(u)) == {-1.0, 1.0}


@settings(max_examples=50, deadline=None)
@given(seed=seeds, n=st.integers(1, 60))
def test_sphere_unit_norm(seed, n):
    u = sphere_sample(RngState(seed), n)
    assert abs(np.linalg.norm(u) - 1.0) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=seeds, stream=seeds, n=st.integers(1, 12), m=st.integers(1, 40))
def test_blocks_equal_successive_single_draws(seed, stream, n, m):
    for sampler in (gaussian_sample, sphere_sample):
        block = sampler(RngState(seed, stream), n, m)
        rng = RngState(seed, stream)
        singles = np.array([sampler(rng, n) for _ in range(m)])
        assert np.array_equal(block, singles)


def test_ball_block_draws_are_deterministic_and_inside():
    v = ball_sample(RngState(5), 4, 10000)
    assert np.array_equal(v, ball_sample(RngState(5), 4, 10000))
    assert np.all(np.linalg.norm(v, axis=1) <= 1.0)


def test_ball_mean_square_radius():
    v = ball_sample(RngState(11), 2, 10**6)
    # E r^2 = n/(n+2) = 1/2 for n = 2
    assert abs(np.mean((v * v).sum(axis=1)) - 0.5) <= 0.01


@pytest.mark.parametrize("n", [2, 5, 20])
def test_second_moments(n):
    M = 10**6 if n < 20 else 2 * 10**5
    u = sphere_sample(RngState(13, n), n, M)
    S = n * (u.T @ u) / M
    # per-entry standard deviations of n u_i u_j give the Frobenius scale
    diag_var = 3 * n / (n + 2) - 1
    off_var = n / (n + 2)
    scale = np.sqrt(n * diag_var + n * (n - 1) * off_var) / np.sqrt(M)
    assert np.linalg.norm(S - np.eye(n)) <= 4 * scale
    v = ball_sample(RngState(17, n), n, M)
    B = (v.T @ v) / M
    # E r^4 = n/(n+4) combined with the sphere fourth moments
    diag_var = 3 / ((n + 4) * (n + 2)) - 1 / (n + 2) ** 2
    off_var = 1 / ((n + 4) * (n + 2))
    scale = np.sqrt(n * diag_var + n * (n - 1) * off_var) / np.sqrt(M)
    assert np.linalg.norm(B - np.eye(n) / (n + 2)) <= 4 * scale


def test_split_stream():
    root = RngState(9, 2)
    a, b = split_stream(root, 0), split_stream(root, 1)
    assert not np.array_equal(gaussian_sample(a, 3), gaussian_sample(b, 3))
    c, d = split_stream(root, 5), split_stream(root, 5)
    assert np.array_equal(gaussian_sample(c, 3), gaussian_sample(d, 3))
    assert root.counter == 0


def test_split_streams_uncorrelated():
    root = RngState(21)
    first = np.array([gaussian_sample(split_stream(root, t), 1, 10**5)[:, 0] for t in range(64)])
    rho = np.corrcoef(first)
    off = rho[~np.eye(64, dtype=bool)]
    assert np.max(np.abs(off)) <= 0.02
