import math

import numpy as np
import pytest
from scipy.stats import special_ortho_group

from mfbm.bases import build_table, coeff_b
from mfbm.errors import InsufficientSamplesError, OutsideBallError, ParameterError
from mfbm.harmonics import enumerate_indices, eval_harmonic, harmonic_count, sphere_area
from mfbm.kernel_cov import ModelParams, covariance_field, covariance_rm
from mfbm.rng import GaussianSource, derive_seed
from mfbm.simulator import (
    FieldSample,
    TruncationSpec,
    design_matrix,
    empirical_covariance,
    read_samples,
    sample_field,
    sample_replicates,
    truncated_covariance,
    truncation_diagnostic,
    write_samples,
)

P2 = ModelParams(2, 0.5)


def test_truncation_spec():
    assert TruncationSpec(2, 3).term_count(2) == (1 + 2 + 2) * 3
    assert TruncationSpec(2, 3).term_count(3) == (1 + 3 + 5) * 3
    assert TruncationSpec(0, 0).term_count(4) == 0
    with pytest.raises(ParameterError):
        TruncationSpec(-1, 3)


def test_origin_is_exactly_zero():
    pts = np.array([[0.0, 0.0], [0.3, 0.1]])
    smp = sample_field(P2, "fourier_bessel", TruncationSpec(4, 6), 11, pts)
    assert smp.values[0] == 0.0 and math.copysign(1, smp.values[0]) == 1
    assert smp.values[1] != 0.0


def test_single_term_is_hand_checkable():
    # M = 0, n_max = 1: b_01(|x|) S^1_0 xi_01
    x = np.array([0.3, -0.4])
    table = build_table(P2, "fourier_bessel", 0, 1)
    smp = sample_field(P2, table.basis, TruncationSpec(0, 1), 77, x[None], table=table)
    want = coeff_b(table, 0, 1, 0.5) * eval_harmonic(enumerate_indices(0, 2)[0], x / 0.5) * GaussianSource(77)(0, 1, 1)
    assert smp.values[0] == pytest.approx(want, rel=1e-14)
    assert eval_harmonic(enumerate_indices(0, 2)[0], x / 0.5) == pytest.approx(1 / math.sqrt(2 * math.pi))


def test_replicate_matches_direct_draw():
    pts = np.array([[0.2, 0.2], [-0.5, 0.1]])
    reps = sample_replicates(P2, "fourier_bessel", TruncationSpec(3, 5), 4, pts, [0, 7])
    direct = sample_field(P2, "fourier_bessel", TruncationSpec(3, 5), derive_seed(4, 7), pts)
    assert np.array_equal(reps[1].values, direct.values)
    assert not np.array_equal(reps[0].values, reps[1].values)


@pytest.mark.parametrize("threads", [2, 3, 8])
def test_thread_count_does_not_change_values(threads):
    rng = np.random.default_rng(1)
    pts = rng.uniform(-0.7, 0.7, size=(23, 2))
    tr = TruncationSpec(6, 12)
    a = sample_replicates(P2, "fourier_bessel", tr, 3, pts, 4, threads=1)
    b = sample_replicates(P2, "fourier_bessel", tr, 3, pts, 4, threads=threads)
    for x, y in zip(a, b):
        assert np.array_equal(x.values, y.values)


def test_refinement_extends_variates():
    # enlarging the truncation keeps every old term's variate, so the change
    # in value is exactly the contribution of the new terms
    pts = np.array([[0.4, 0.3]])
    g = GaussianSource(5)
    small_tr, big_tr = TruncationSpec(1, 2), TruncationSpec(2, 3)
    small = sample_field(P2, "fourier_bessel", small_tr, 5, pts).values[0]
    big = sample_field(P2, "fourier_bessel", big_tr, 5, pts).values[0]
    B = design_matrix(P2, "fourier_bessel", big_tr, pts)[0]
    keys = [(m, l, n) for m in range(3) for l in range(1, (1 if m == 0 else 2) + 1) for n in range(1, 4)]
    new = math.fsum(b * g(*k) for b, k in zip(B, keys) if not (k[0] <= 1 and k[2] <= 2))
    assert big - small == pytest.approx(new, rel=1e-12)


def test_outside_ball_reports_index():
    pts = np.array([[0.1, 0.1], [0.9, 0.9], [0.0, 0.2]])
    with pytest.raises(OutsideBallError) as info:
        sample_field(P2, "fourier_bessel", TruncationSpec(1, 1), 0, pts)
    assert info.value.index == 1
    with pytest.raises(ParameterError):
        sample_field(P2, "fourier_bessel", TruncationSpec(1, 1), 0, np.zeros((2, 3)))


def test_boundary_point_is_accepted():
    pts = np.array([[1.0, 0.0], [0.6, 0.8]])
    smp = sample_field(P2, "fourier_bessel", TruncationSpec(2, 3), 0, pts)
    assert np.all(np.isfinite(smp.values))


def test_truncation_diagnostic_edges_and_monotonicity():
    assert truncation_diagnostic(P2, "fourier_bessel", TruncationSpec(0, 0), 0.5) == 1.0
    values = [truncation_diagnostic(P2, "fourier_bessel", TruncationSpec(M, n), 0.5) for M, n in [(2, 5), (5, 10), (10, 20), (20, 40)]]
    assert all(0 <= v <= 1 for v in values)
    assert values == sorted(values, reverse=True)
    with pytest.raises(ParameterError):
        truncation_diagnostic(P2, "fourier_bessel", TruncationSpec(2, 2), 0.0)


def test_truncation_diagnostic_regression_value():
    # measured once with this implementation and frozen
    d = truncation_diagnostic(P2, "fourier_bessel", TruncationSpec(30, 50), 0.5)
    assert d == pytest.approx(0.017361357346660444, rel=1e-9)


def test_truncation_diagnostic_matches_design_matrix():
    p = ModelParams(3, 0.4)
    tr = TruncationSpec(4, 8)
    x = np.array([0.2, -0.3, 0.4])
    s = float(np.linalg.norm(x))
    B = design_matrix(p, "fourier_bessel", tr, x[None])
    assert 1 - np.sum(B**2) / s ** (2 * p.H) == pytest.approx(truncation_diagnostic(p, "fourier_bessel", tr, s), abs=1e-13)


def test_truncated_covariance_is_rotation_invariant():
    p = ModelParams(3, 0.6)
    tr = TruncationSpec(5, 6)
    table = build_table(p, "fourier_bessel", 5, 6)
    x, y = np.array([0.1, 0.5, -0.2]), np.array([-0.4, 0.1, 0.3])
    Q = special_ortho_group.rvs(3, random_state=2)
    a = truncated_covariance(p, table.basis, tr, x, y, table=table)
    b = truncated_covariance(p, table.basis, tr, Q @ x, Q @ y, table=table)
    assert a == pytest.approx(b, rel=1e-11)


def test_truncated_covariance_approaches_field_covariance():
    p = ModelParams(2, 0.75)
    x, y = np.array([0.5, 0.0]), np.array([0.1, 0.4])
    err = [abs(truncated_covariance(p, "fourier_bessel", TruncationSpec(M, n), x, y) - covariance_field(p, x, y))
           for M, n in [(4, 8), (16, 32), (30, 60)]]
    assert err[0] > err[1] > err[2]
    assert err[2] < 2e-3


def test_legendre_basis_sampling():
    p = ModelParams(2, 0.7)
    tr = TruncationSpec(3, 12)
    pts = np.array([[0.0, 0.0], [0.3, 0.3]])
    smp = sample_field(p, "shifted_legendre", tr, 1, pts)
    assert smp.values[0] == 0.0
    # radial convergence only: compare with the exact variance of degrees <= 3
    s = math.hypot(0.3, 0.3)
    want = sum(harmonic_count(m, 2) / sphere_area(2) * covariance_rm(p, m, s, s) for m in range(4))
    got = truncated_covariance(p, "shifted_legendre", tr, pts[1], pts[1])
    assert got <= want
    assert got == pytest.approx(want, rel=1e-2)


def test_empirical_covariance_estimates():
    V = np.array([[1.0, 2.0, 0.0], [3.0, -1.0, 0.0], [0.5, 0.5, 0.0]])
    est = empirical_covariance(V, [(0, 1), (2, 2)])
    assert est[0].estimate == pytest.approx((2 - 3 + 0.25) / 3)
    assert est[0].standard_error == pytest.approx(np.std([2, -3, 0.25], ddof=1) / math.sqrt(3))
    assert est[1].estimate == 0.0 and est[1].standard_error == 0.0
    centred = empirical_covariance(V, [(0, 1)], center=True)[0]
    assert centred.estimate == pytest.approx(np.cov(V[:, 0], V[:, 1])[0, 1])


def test_empirical_covariance_needs_two_samples():
    with pytest.raises(InsufficientSamplesError):
        empirical_covariance(np.array([[1.0, 2.0]]), [(0, 1)])


def test_empirical_covariance_requires_common_points():
    a = sample_field(P2, "fourier_bessel", TruncationSpec(1, 1), 0, np.array([[0.1, 0.0]]))
    b = sample_field(P2, "fourier_bessel", TruncationSpec(1, 1), 1, np.array([[0.2, 0.0]]))
    with pytest.raises(ParameterError):
        empirical_covariance([a, b], [(0, 0)])


def test_truncated_covariance_matches_monte_carlo():
    # isolates the random numbers from the truncation error
    p = ModelParams(2, 0.4)
    tr = TruncationSpec(4, 6)
    pts = np.array([[0.3, 0.0], [0.0, 0.6], [-0.5, 0.5]])
    table = build_table(p, "fourier_bessel", 4, 6)
    reps = sample_replicates(p, table.basis, tr, 99, pts, 4000, table=table)
    for est in empirical_covariance(reps, [(0, 0), (0, 1), (1, 2)]):
        i, j = est.pair
        want = truncated_covariance(p, table.basis, tr, pts[i], pts[j], table=table)
        assert abs(est.estimate - want) <= 4 * est.standard_error


def test_sample_csv_round_trip(tmp_path):
    pts = np.array([[0.0, 0.0], [0.25, -0.5]])
    reps = sample_replicates(P2, "fourier_bessel", TruncationSpec(2, 3), 8, pts, 3)
    path = write_samples(reps, tmp_path / "f.csv", extra_meta={"version": "x"})
    meta, P, V = read_samples(path)
    assert meta["seed"] == 8 and meta["replicates"] == [0, 1, 2] and meta["version"] == "x"
    assert np.array_equal(P, pts)
    assert np.array_equal(V, np.stack([r.values for r in reps]))


def test_field_sample_metadata():
    smp = sample_field(P2, "fourier_bessel", TruncationSpec(1, 2), 3, np.array([[0.1, 0.2]]))
    assert isinstance(smp, FieldSample)
    assert smp.metadata() == {"N": 2, "H": 0.5, "R": 1.0, "basis": "fourier_bessel", "M": 1, "n_max": 2, "seed": 3, "replicate": None}
