import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wigner1n.ensembles import (
    DistributionSpec,
    InfeasibleCumulantError,
    InvalidParameterError,
    make_general_ensemble,
    make_goe,
    make_sign_ensemble,
    moment,
    sample_matrix,
)


def test_sign_ensemble_parameters():
    e = make_sign_ensemble(1.0)
    assert moment(e.offdiag, 4) == 1
    assert e.kappa4 == -2
    assert e.v2 == 0
    assert make_sign_ensemble(2.0).kappa4 == -32


def test_goe_parameters():
    e = make_goe(1.0)
    assert e.v2 == pytest.approx(2.0, rel=1e-15)
    assert e.kappa4 == 0
    assert moment(e.offdiag, 4) == 3
    assert make_goe(0.5).v2 == pytest.approx(0.5, rel=1e-15)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_nonpositive_w_rejected(bad):
    with pytest.raises(InvalidParameterError):
        make_sign_ensemble(bad)
    with pytest.raises(InvalidParameterError):
        make_goe(bad)


def test_general_ensemble_degenerates_to_sign():
    e = make_general_ensemble(1.0, -2.0, 0.0)
    assert e.offdiag.kind == "three_point"
    assert e.offdiag.scale == 1.0 and e.offdiag.prob == 0.5
    assert e.diag.kind == "zero"


def test_general_ensemble_gaussian_cumulant():
    # 2 p a^2 = 1, 2 p a^4 = 3  =>  a^2 = 3, p = 1/6
    e = make_general_ensemble(1.0, 0.0, 0.0)
    assert e.offdiag.scale ** 2 == pytest.approx(3.0, rel=1e-15)
    assert e.offdiag.prob == pytest.approx(1 / 6, rel=1e-15)


def test_general_ensemble_infeasible():
    with pytest.raises(InfeasibleCumulantError):
        make_general_ensemble(1.0, -2.5, 0.0)


def test_general_ensemble_diagonal_default():
    e = make_general_ensemble(1.0, 0.5, 2.0)
    assert e.v2 == pytest.approx(2.0, rel=1e-14)
    # documented default: a^2 = 3 v2, p = 1/6, so <v^4> = 9 v2^2 / 3 ... = 3 v2^2
    assert moment(e.diag, 4) == pytest.approx(3 * 2.0 ** 2, rel=1e-14)


def test_moment_examples():
    assert moment(DistributionSpec.sign(2.0), 4) == 16
    assert moment(DistributionSpec.three_point(1.0, 1 / 6), 6) == pytest.approx(1 / 3, rel=1e-15)
    assert moment(DistributionSpec.gaussian(1.0), 6) == 15
    assert moment(DistributionSpec.gaussian(1.0), 0) == 1


dists = st.one_of(
    st.just(DistributionSpec.zero()),
    st.floats(0.1, 5).map(DistributionSpec.sign),
    st.floats(0.1, 5).map(DistributionSpec.gaussian),
    st.tuples(st.floats(0.1, 5), st.floats(0.01, 0.5)).map(lambda t: DistributionSpec.three_point(*t)),
)


@given(dists, st.integers(0, 10).map(lambda k: 2 * k + 1))
def test_odd_moments_vanish(dist, p):
    assert moment(dist, p) == 0


@settings(max_examples=200)
@given(st.floats(0.05, 20), st.floats(-2, 10))
def test_general_ensemble_round_trip(w2, k4_ratio):
    kappa4 = k4_ratio * w2 ** 2
    e = make_general_ensemble(w2, kappa4, 0.0)
    assert e.w2 == pytest.approx(w2, rel=1e-12)
    assert e.kappa4 == pytest.approx(kappa4, rel=1e-12, abs=1e-12 * w2 ** 2)


@given(st.floats(0.05, 20))
def test_general_at_sign_bound_matches_sign_moments(w2):
    e = make_general_ensemble(w2, -2 * w2 ** 2, 0.0)
    sign = DistributionSpec.sign(math.sqrt(w2))
    for p in range(9):
        assert moment(e.offdiag, p) == pytest.approx(moment(sign, p), rel=1e-12)


def test_sample_sign_support():
    A = sample_matrix(make_sign_ensemble(1.5), 3, seed=7)
    assert np.all(np.diag(A) == 0)
    off = A[~np.eye(3, dtype=bool)]
    assert set(np.unique(off)) <= {-1.5, 1.5}
    assert np.array_equal(A, A.T)


def test_sample_one_by_one():
    A = sample_matrix(make_sign_ensemble(1.0), 1, seed=0)
    assert A.shape == (1, 1) and A[0, 0] == 0


def test_sample_deterministic():
    spec = make_general_ensemble(1.0, 0.5, 1.0)
    a = sample_matrix(spec, 9, seed=123, sample_index=4)
    b = sample_matrix(spec, 9, seed=123, sample_index=4)
    c = sample_matrix(spec, 9, seed=123, sample_index=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_rejects_bad_size():
    with pytest.raises(InvalidParameterError):
        sample_matrix(make_sign_ensemble(1.0), 0, seed=1)


@pytest.mark.parametrize("spec", [make_sign_ensemble(1.0), make_goe(0.7), make_general_ensemble(2.0, 1.0, 0.5)])
def test_entry_means_concentrate(spec):
    M = 400
    total = sum(sample_matrix(spec, 8, seed=99, sample_index=s) for s in range(M))
    mean = total / M
    bound = 4 * math.sqrt(spec.w2 / M)
    iu = np.triu_indices(8, 1)
    assert np.all(np.abs(mean[iu]) <= bound)


def test_three_point_sample_frequencies():
    dist = DistributionSpec.three_point(2.0, 0.2)
    rng = np.random.default_rng(5)
    x = dist.sample(rng, 200_000)
    for value, prob in ((2.0, 0.2), (-2.0, 0.2), (0.0, 0.6)):
        freq = np.mean(x == value)
        assert abs(freq - prob) <= 5 * math.sqrt(prob * (1 - prob) / x.size)


def test_fraction_parameters_accepted():
    e = make_general_ensemble(Fraction(1), Fraction(1, 2), Fraction(1))
    assert e.kappa4 == pytest.approx(0.5, rel=1e-12)
