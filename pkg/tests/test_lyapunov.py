import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matrixchaos import (
    DegenerateSpectrum,
    HermitianMatrix,
    assemble_U,
    build_B,
    build_graph,
    large_E_decay,
    local_lyapunov,
    lyapunov_bounds,
    lyapunov_report,
    mc_lyapunov,
    mean_lyapunov,
    q_matrix,
    spectrum_B,
    thermo_lyapunov,
    variance_lyapunov,
)
from matrixchaos.markov_map import MarkovMap

from _util import chain, complete_graph, random_hermitian, with_graph


def markov(H, E):
    H, g = with_graph(H)
    return build_B(assemble_U(H, g, E)), g


def exact_path_variance(B, t):
    """``Var(S_2t) - Var(S_t)`` over t for S the summed log step probabilities.

    Moments of S are propagated exactly over the edge distribution starting
    from the uniform (stationary) one; the difference cancels the boundary
    term, leaving the asymptotic variance up to exponentially small terms.
    """
    M = B.matrix
    L = np.zeros_like(M)
    np.log(M, out=L, where=M > 0)
    BL, BL2 = M * L, M * L**2
    p = np.full(B.D, 1.0 / B.D)
    m1 = np.zeros(B.D)
    m2 = np.zeros(B.D)
    var = {}
    for k in range(1, 2 * t + 1):
        p, m1, m2 = M @ p, M @ m1 + BL @ p, M @ m2 + 2 * BL @ m1 + BL2 @ p
        if k in (t, 2 * t):
            var[k] = m2.sum() - m1.sum() ** 2
    return (var[2 * t] - var[t]) / t


def test_k4_at_zero_energy():
    B, g = markov(complete_graph(4), 0.0)
    expected = np.log(9) / 9 + 8 / 9 * np.log(9 / 4)
    assert mean_lyapunov(B) == pytest.approx(expected, rel=1e-14)
    per_edge, per_vertex = local_lyapunov(B, g)
    np.testing.assert_allclose(per_edge, expected, rtol=1e-14)
    np.testing.assert_allclose(per_vertex, expected, rtol=1e-14)


def test_permutation_map_has_zero_exponent():
    B, g = markov(chain(2), 1.7)
    assert mean_lyapunov(B) == 0.0
    per_edge, per_vertex = local_lyapunov(B, g)
    assert np.all(per_edge == 0) and np.all(per_vertex == 0)


def test_permutation_map_has_zero_variance():
    B, _ = markov(chain(2), 0.9)
    rep = variance_lyapunov(B)
    assert rep.spectral == 0.0 and rep.biorthogonal == 0.0
    assert abs(thermo_lyapunov(B).variance) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 10), st.floats(-5, 5))
def test_thermo_variance_non_negative(seed, V, E):
    B, _ = markov(random_hermitian(np.random.default_rng(seed), V), E)
    assert thermo_lyapunov(B).variance >= -1e-8


def test_local_average_is_mean(rng):
    B, g = markov(random_hermitian(rng, 9), -0.4)
    per_edge, per_vertex = local_lyapunov(B, g)
    assert per_edge.mean() == pytest.approx(mean_lyapunov(B), rel=1e-13)
    assert np.sum(per_vertex * g.degrees) / g.D == pytest.approx(mean_lyapunov(B), rel=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 14), st.floats(-10, 10))
def test_bounds_hold(seed, V, E):
    B, g = markov(random_hermitian(np.random.default_rng(seed), V), E)
    b = lyapunov_bounds(g)
    per_edge, per_vertex = local_lyapunov(B, g)
    assert np.all(per_edge <= b.per_edge + 1e-12)
    assert np.all(per_vertex <= b.per_vertex + 1e-12)
    assert mean_lyapunov(B) <= b.total + 1e-12
    assert mean_lyapunov(B) >= 0


def test_q_matrix(rng):
    B, _ = markov(random_hermitian(rng, 5), 0.0)
    np.testing.assert_array_equal(q_matrix(B, 1.0), B.matrix)
    np.testing.assert_array_equal(q_matrix(B, 0.0), (B.matrix > 0).astype(float))
    with pytest.raises(ValueError):
        q_matrix(B, -1.0)


@pytest.mark.parametrize("seed", range(5))
def test_thermo_matches_closed_form(seed):
    B, _ = markov(random_hermitian(np.random.default_rng(seed), 6 + seed), 0.3 * seed)
    th = thermo_lyapunov(B)
    assert th.mu0 == pytest.approx(1.0, abs=1e-12)
    assert th.lyapunov == pytest.approx(mean_lyapunov(B), abs=1e-8)


def test_thermo_step_validation(rng):
    B, _ = markov(complete_graph(4), 0.0)
    for h in (0.0, 1e-2):
        with pytest.raises(ValueError):
            thermo_lyapunov(B, h)


@pytest.mark.parametrize("seed", range(5))
def test_variance_routes_against_exact_moments(seed):
    B, _ = markov(random_hermitian(np.random.default_rng(100 + seed), 5 + seed), 0.5)
    exact = exact_path_variance(B, 400)
    rep = variance_lyapunov(B, thermo=thermo_lyapunov(B))
    assert rep.biorthogonal == pytest.approx(exact, rel=1e-9, abs=1e-12)
    assert rep.thermo == pytest.approx(exact, rel=1e-4)
    assert rep.value == rep.thermo


def test_variance_regular_graph_all_routes_agree():
    # constant row and column entropies make every correction term vanish
    B, _ = markov(complete_graph(4), 0.0)
    rep = variance_lyapunov(B, thermo=thermo_lyapunov(B))
    exact = exact_path_variance(B, 200)
    assert rep.spectral == pytest.approx(exact, rel=1e-9)
    assert rep.biorthogonal == pytest.approx(exact, rel=1e-9)
    assert rep.consistent


def test_variance_rejects_reducible():
    M = np.eye(4)[[1, 0, 3, 2]]
    B = MarkovMap(0.0, M, np.arange(4))
    with pytest.raises(DegenerateSpectrum):
        variance_lyapunov(B)


def test_variance_needs_vectors(rng):
    B, _ = markov(random_hermitian(rng, 4), 0.0)
    with pytest.raises(ValueError):
        variance_lyapunov(B, spec=spectrum_B(B, full=False))


def test_mc_reproducible_and_thread_independent(rng):
    B, _ = markov(random_hermitian(rng, 6), 0.2)
    a = mc_lyapunov(B, 50, 9000, seed=7, threads=1)
    b = mc_lyapunov(B, 50, 9000, seed=7, threads=3)
    c = mc_lyapunov(B, 50, 9000, seed=8, threads=1)
    assert a == b
    assert a.mean != c.mean
    assert a.n_samples == 9000 and a.t == 50


def finite_t_variance(B, t):
    """Exact ``Var(S_t) / t`` for trajectories started from the uniform distribution."""
    M = B.matrix
    L = np.zeros_like(M)
    np.log(M, out=L, where=M > 0)
    p = np.full(B.D, 1.0 / B.D)
    m1 = np.zeros(B.D)
    m2 = np.zeros(B.D)
    for _ in range(t):
        p, m1, m2 = M @ p, M @ m1 + (M * L) @ p, M @ m2 + 2 * (M * L) @ m1 + (M * L**2) @ p
    return (m2.sum() - m1.sum() ** 2) / t


def test_mc_agrees_with_exact(rng):
    B, _ = markov(random_hermitian(rng, 7, density=0.8), -0.3)
    lam = mean_lyapunov(B)
    mc = mc_lyapunov(B, 400, 20000, seed=3)
    assert abs(mc.mean - lam) < 4 * mc.stderr
    assert abs(mc.variance - exact_path_variance(B, 400)) < 4 * mc.variance_stderr
    ft = finite_t_variance(B, 400)
    assert abs(mc.variance_t - ft) < 0.05 * ft


def test_mc_variance_removes_boundary_bias():
    # |nu_2| = 0.95: t Var[X] is biased by O(1/t), the estimator only by O(|nu_2|**(t/2))
    B, _ = markov(random_hermitian(np.random.default_rng(53), 6), 0.4)
    t = 80
    sigma2 = exact_path_variance(B, 2000)
    ft = finite_t_variance(B, t)
    mc = mc_lyapunov(B, t, 100_000, seed=11)
    assert abs(ft - sigma2) > 5 * mc.variance_stderr
    assert abs(mc.variance - sigma2) < 4 * mc.variance_stderr
    assert abs(mc.variance_t - ft) < 4 * mc.variance_stderr
    # at small t the estimator's expectation is (Var S_t - Var S_t/2) / (t/2)
    mc = mc_lyapunov(B, 20, 100_000, seed=12)
    assert abs(mc.variance - exact_path_variance(B, 10)) < 4 * mc.variance_stderr


def test_mc_single_step():
    B, _ = markov(complete_graph(4), 0.0)
    mc = mc_lyapunov(B, 1, 50_000, seed=2)
    # one step: X = -log of a single transition probability
    p_t, p_r = 4 / 9, 1 / 9
    m = -(2 * p_t * np.log(p_t) + p_r * np.log(p_r))
    v = 2 * p_t * np.log(p_t) ** 2 + p_r * np.log(p_r) ** 2 - m**2
    assert abs(mc.mean - m) < 4 * mc.stderr
    assert mc.variance == mc.variance_t
    assert abs(mc.variance - v) < 4 * mc.variance_stderr


def test_mc_argument_checks(rng):
    B, _ = markov(complete_graph(4), 0.0)
    with pytest.raises(ValueError):
        mc_lyapunov(B, 0, 10, 0)
    with pytest.raises(ValueError):
        mc_lyapunov(B, 10, 10, -1)


def test_mc_env_threads(monkeypatch, rng):
    B, _ = markov(random_hermitian(rng, 5), 0.0)
    monkeypatch.setenv("MATRIXCHAOS_THREADS", "4")
    a = mc_lyapunov(B, 20, 5000, 1)
    monkeypatch.setenv("MATRIXCHAOS_THREADS", "junk")
    assert mc_lyapunov(B, 20, 5000, 1) == a


def test_large_energy_decay():
    H, g = with_graph(complete_graph(4))
    rows = large_E_decay(H, g, [1e2, 1e3, 1e4])
    # d-regular closed form: ratio tends to 2 (d - 1) * 4 / ... computed directly
    E = rows[:, 0]
    p_t = 4 / (E**2 + 9)
    p_r = 1 - 2 * p_t
    lam = -(p_r * np.log(p_r) + 2 * p_t * np.log(p_t))
    np.testing.assert_allclose(rows[:, 1], lam, rtol=1e-8)
    np.testing.assert_allclose(rows[:, 2], lam * E**2 / np.log(E), rtol=1e-8)
    with pytest.raises(ValueError):
        large_E_decay(H, g, [0.5])
    with pytest.raises(ValueError):
        large_E_decay(HermitianMatrix.from_array(0.1 * complete_graph(3).data), build_graph(
            HermitianMatrix.from_array(0.1 * complete_graph(3).data)), [-0.9])


def test_report_contents(rng):
    H, g = with_graph(random_hermitian(rng, 5))
    rep = lyapunov_report(H, g, 0.3, mc_samples=2000, mc_steps=50, seed=1)
    d = rep.to_dict()
    assert d["lambda_mean"] == pytest.approx(d["lambda_thermo"], abs=1e-8)
    assert d["methods"]["lambda_mc"] == "monte-carlo"
    assert d["methods"]["lambda_var_thermo"] == "thermo"
    assert len(d["per_vertex"]) == 5
    assert lyapunov_report(H, g, 0.3).lambda_mc is None
