import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import best_t_term
from onebitcs.frames import make_harmonic, make_identity, make_random_tight
from onebitcs.signals import (
    GenerationError,
    direction_error,
    effective_sparsity,
    gen_analysis_sparse_effective,
    gen_synthesis_sparse,
    hard_threshold,
    is_effectively_sparse,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_hard_threshold_examples():
    assert np.array_equal(hard_threshold([3, -1, 2], 2), [3, 0, 2])
    assert np.array_equal(hard_threshold([1, -1, 1], 2), [1, -1, 0])
    assert np.array_equal(hard_threshold([1, 2], 0), [0, 0])


@pytest.mark.parametrize("t", [-1, 4])
def test_hard_threshold_range(t):
    with pytest.raises(ValueError):
        hard_threshold([1, 2, 3], t)


@pytest.mark.parametrize("seed", range(20))
def test_hard_threshold_matches_brute_force(seed):
    x = np.random.default_rng(seed).standard_normal(8)
    assert np.array_equal(hard_threshold(x, 3), best_t_term(x, 3))


def test_hard_threshold_ties_match_brute_force():
    x = np.array([2.0, -1.0, 1.0, -2.0, 1.0, 0.0, -1.0, 2.0])
    for t in range(9):
        assert np.array_equal(hard_threshold(x, t), best_t_term(x, t))


@settings(max_examples=200, deadline=None)
@given(arrays(float, st.integers(1, 20), elements=finite), st.data())
def test_hard_threshold_idempotent_and_sparse(x, data):
    t = data.draw(st.integers(0, x.size))
    z = hard_threshold(x, t)
    assert np.count_nonzero(z) <= t
    assert np.array_equal(hard_threshold(z, t), z)


def test_best_approximation_against_random_sparse():
    rng = np.random.default_rng(11)
    x = rng.standard_normal(30)
    t = 5
    err = np.linalg.norm(x - hard_threshold(x, t))
    for _ in range(1000):
        z = np.zeros(30)
        S = rng.choice(30, t, replace=False)
        z[S] = rng.standard_normal(t) * 2
        assert err <= np.linalg.norm(x - z)


@settings(max_examples=200, deadline=None)
@given(arrays(float, st.integers(1, 40), elements=finite), st.data())
def test_tail_bound(x, data):
    t = data.draw(st.integers(1, x.size))
    tail = np.linalg.norm(x - hard_threshold(x, t))
    assert tail <= np.abs(x).sum() / (2 * np.sqrt(t)) * (1 + 1e-12) + 1e-300


def test_effective_sparsity_examples():
    r = effective_sparsity([0, 0, -3.5, 0])
    assert (r.l0, r.s_eff) == (1, 1.0)
    for k in (1, 2, 7, 50):
        assert effective_sparsity(np.ones(k)).s_eff == pytest.approx(k, rel=1e-14)
    with pytest.raises(ValueError):
        effective_sparsity(np.zeros(3))


@settings(max_examples=200, deadline=None)
@given(arrays(float, st.integers(1, 30), elements=finite))
def test_effective_sparsity_bounds(x):
    if not np.any(x):
        return
    r = effective_sparsity(x)
    assert 1 - 1e-12 <= r.s_eff <= r.l0 * (1 + 1e-12)
    assert is_effectively_sparse(x, r.l0 * (1 + 1e-12))


def test_synthesis_sparse_identity_is_sparse():
    for seed in range(10):
        g = gen_synthesis_sparse(make_identity(6), 1, seed, r=2.5)
        assert np.count_nonzero(g.f) == 1
        assert g.norm_r == pytest.approx(2.5, abs=1e-12)


@pytest.mark.parametrize("D", [make_random_tight(16, 32, 3), make_harmonic(8, 13), make_identity(5)], ids=repr)
@pytest.mark.parametrize("s", [1, 3, 5])
def test_synthesis_sparse_invariants(D, s):
    for seed in range(5):
        g = gen_synthesis_sparse(D, s, seed, r=3.0)
        assert abs(np.linalg.norm(g.f) - 3.0) <= 1e-12
        assert np.count_nonzero(g.x) <= s
        assert np.linalg.norm(D.entries @ g.x - g.f) <= 1e-12
        # recompute the analysis-side effective sparsity independently
        c = D.entries.T @ g.f
        ratio = (np.abs(c).sum() / np.linalg.norm(c)) ** 2
        assert g.kappa * g.s >= ratio - 1e-9
        assert g.kappa >= 1


def test_synthesis_sparse_deterministic_and_validates():
    D = make_random_tight(4, 6, 0)
    a, b = gen_synthesis_sparse(D, 2, 9), gen_synthesis_sparse(D, 2, 9)
    assert np.array_equal(a.f, b.f)
    with pytest.raises(ValueError):
        gen_synthesis_sparse(D, 0, 1)
    with pytest.raises(ValueError):
        gen_synthesis_sparse(D, 7, 1)


def test_analysis_sparse_identity_equivalence():
    for seed in range(10):
        g = gen_analysis_sparse_effective(make_identity(8), 2, seed)
        assert is_effectively_sparse(g.f, 2)


@pytest.mark.parametrize("D,s", [(make_harmonic(4, 6), 5), (make_random_tight(4, 6, 1), 5)], ids=repr)
def test_analysis_sparse_accepted_outputs_pass_the_ratio_test(D, s):
    for seed in range(10):
        g = gen_analysis_sparse_effective(D, s, seed, r=0.5)
        c = D.entries.T @ g.f
        assert np.abs(c).sum() <= np.sqrt(s) * np.linalg.norm(c)
        assert abs(np.linalg.norm(g.f) - 0.5) <= 1e-12


def test_analysis_sparse_gives_up():
    with pytest.raises(GenerationError, match="unsuitable"):
        gen_analysis_sparse_effective(make_random_tight(16, 32, 0), 1, 0, max_attempts=50)


@pytest.mark.xfail(strict=True, reason="a random 16x32 tight frame admits no effectively 4-analysis-sparse draws "
                   "from the sparse-synthesis proposal; see decisions ledger")
def test_analysis_sparse_random_16x32_s4_acceptance_rate():
    D = make_random_tight(16, 32, 0)
    accepted = 0
    for seed in range(1000):
        try:
            gen_analysis_sparse_effective(D, 4, seed, max_attempts=50)
            accepted += 1
        except GenerationError:
            pass
    assert accepted > 0


def test_direction_error_examples():
    f = np.array([1.0, -2.0, 0.5])
    assert direction_error(f, 2 * f) == pytest.approx(0, abs=1e-15)
    assert direction_error(f, -f) == pytest.approx(2)
    assert direction_error([1, 0], [0, 1]) == pytest.approx(np.sqrt(2))
    with pytest.raises(ValueError):
        direction_error(f, np.zeros(3))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_direction_error_scale_invariant(seed, a, b):
    rng = np.random.default_rng(seed)
    f, g = rng.standard_normal(5), rng.standard_normal(5)
    e = direction_error(f, g)
    assert 0 <= e <= 2
    assert direction_error(a * f, b * g) == pytest.approx(e, abs=1e-12)
