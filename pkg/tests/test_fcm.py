import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from msseg.errors import DegenerateClusterError, MaskTooSmallError
from msseg.fcm import (
    FcmParams,
    bias_update,
    build_neighborhoods,
    centroid_update,
    defuzzify,
    fcm_modified,
    fcm_standard,
    initial_centroids,
    membership_update,
    objective_modified,
    objective_standard,
    unflatten,
)

from .oracles import fcm_naive, memberships_naive, objective_naive, quantile_linear


def test_params_validation():
    for bad in (dict(c=1), dict(m=1.0), dict(alpha=-1), dict(tol=0), dict(max_iter=0),
                dict(init="kmeans++"), dict(bias_rule="other"), dict(neighborhood_radius=0)):
        with pytest.raises(ValueError):
            FcmParams(**bad)


# ------------------------------------------------------------------ memberships


def test_membership_examples():
    np.testing.assert_allclose(membership_update([0.5], [0.0, 1.0], 2.0).ravel(), [0.5, 0.5])
    np.testing.assert_allclose(membership_update([0.25], [0.0, 1.0], 2.0).ravel(), [0.9, 0.1],
                               atol=1e-15)
    np.testing.assert_array_equal(membership_update([0.0], [0.0, 1.0], 2.0).ravel(), [1.0, 0.0])


def test_coincident_centroids_split():
    U = membership_update([0.3, 0.9], [0.3, 0.3, 0.8], 2.0)
    np.testing.assert_array_equal(U[:, 0], [0.5, 0.5, 0.0])
    assert abs(U[:, 1].sum() - 1) < 1e-15


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, 7, elements=st.floats(-5, 5)),
       arrays(np.float64, 3, elements=st.floats(-5, 5)),
       st.floats(1.1, 4.0))
def test_membership_matches_naive(x, V, m):
    U = membership_update(x, V, m)
    np.testing.assert_allclose(U, memberships_naive(x.tolist(), V.tolist(), m), atol=1e-9)
    assert (U >= 0).all() and (U <= 1).all()
    np.testing.assert_allclose(U.sum(axis=0), 1.0, atol=1e-12)


def test_membership_extreme_ratio_no_overflow():
    with np.errstate(all="raise"):
        U = membership_update([1e-150, 1.0], [0.0, 1.0], 1.01)
    assert np.isfinite(U).all()
    np.testing.assert_allclose(U.sum(axis=0), 1.0)


# ------------------------------------------------------------------ centroids / objective


def test_centroid_examples():
    x = np.array([0.0, 1.0, 2.0, 10.0])
    crisp = np.array([[1, 1, 1, 0], [0, 0, 0, 1]], dtype=float)
    np.testing.assert_allclose(centroid_update(x, crisp, 2.0), [1.0, 10.0])
    np.testing.assert_allclose(centroid_update(x, np.full((2, 4), 0.5), 2.0), [3.25, 3.25])
    assert centroid_update([0.0, 1.0], [[1.0, 0.0], [0.0, 1.0]], 2.0)[0] == 0.0


def test_degenerate_cluster_names_index():
    with pytest.raises(DegenerateClusterError) as exc:
        centroid_update([0.0, 1.0], [[1.0, 1.0], [0.0, 0.0]], 2.0)
    assert exc.value.index == 1


def test_objective_examples():
    x = np.array([0.0, 1.0, 5.0, 7.0])
    crisp = np.array([[1, 1, 0, 0], [0, 0, 1, 1]], dtype=float)
    assert objective_standard(x, crisp, [0.5, 6.0], 2.0) == pytest.approx(0.5 + 2.0)
    V = np.array([1.0, 4.0, 6.0])
    J = objective_standard(x, np.full((3, 4), 1 / 3), V, 2.0)
    assert J == pytest.approx(sum((xj - v) ** 2 for xj in x for v in V) / 9)
    assert objective_standard(x, np.ones((1, 4)), [2.0], 2.0) == pytest.approx(4 + 1 + 9 + 25)


def test_defuzzify():
    np.testing.assert_array_equal(defuzzify([[0.9, 0.5, 0.0], [0.1, 0.5, 1.0]]), [0, 0, 1])


# ------------------------------------------------------------------ fcm_standard


def test_quantile_init_oracle():
    x = np.random.default_rng(0).random(23)
    V0 = initial_centroids(x, 4)
    ref = [quantile_linear(x.tolist(), (i + 0.5) / 4) for i in range(4)]
    np.testing.assert_allclose(V0, ref, atol=1e-15)


def test_two_blobs():
    x = [0, 0, 0, 1, 1, 1]
    st_ = fcm_standard(x, FcmParams(c=2))
    V0 = [quantile_linear(x, 0.25), quantile_linear(x, 0.75)]
    ref = fcm_naive([float(v) for v in x], V0, 2.0, st_.iterations_run)[-1][1]
    np.testing.assert_allclose(st_.V, sorted(ref), atol=1e-9)
    assert st_.V[0] < st_.V[1]
    assert abs(st_.V[0] - 0.031) < 0.05 and abs(st_.V[1] - 0.969) < 0.05
    assert st_.V[0] + st_.V[1] == pytest.approx(1.0, abs=1e-9)


def test_against_naive_trace():
    rng = np.random.default_rng(11)
    x = np.concatenate([rng.normal(0, 0.3, 15), rng.normal(2, 0.3, 15), rng.normal(5, 0.5, 10)])
    trace = []
    st_ = fcm_standard(x, FcmParams(c=3), callback=lambda it, U, V: trace.append((U, V)))
    V0 = [quantile_linear(x.tolist(), (i + 0.5) / 3) for i in range(3)]
    ref = fcm_naive(x.tolist(), V0, 2.0, st_.iterations_run)
    for (U, V), (Ur, Vr) in zip(trace, ref):
        np.testing.assert_allclose(V, Vr, atol=1e-9)
        np.testing.assert_allclose(U, Ur, atol=1e-9)
        assert objective_standard(x, U, V, 2.0) == pytest.approx(objective_naive(x, Ur, Vr, 2.0))


def test_c_equals_n():
    x = [0.1, 0.4, 0.9, 2.0]
    st_ = fcm_standard(x, FcmParams(c=4))
    np.testing.assert_allclose(st_.V, x, atol=1e-12)
    assert st_.J_history[-1] < 1e-20


def test_too_few_points():
    with pytest.raises(ValueError):
        fcm_standard([1.0], FcmParams(c=2))


def test_random_pixel_init_deterministic():
    x = np.random.default_rng(1).random(50)
    p = FcmParams(c=3, init="random-pixels", seed=42)
    a, b = fcm_standard(x, p), fcm_standard(x, p)
    np.testing.assert_array_equal(a.V, b.V)
    assert set(initial_centroids(x, 3, "random-pixels", 42)) <= set(x)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(4, 30), elements=st.floats(-10, 10)))
def test_objective_non_increasing(x):
    assume(np.unique(x).size >= 2)
    st_ = fcm_standard(x, FcmParams(c=2))
    J = np.array(st_.J_history)
    assert (np.diff(J) <= 1e-12 * max(1.0, J[0])).all()


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, 12, elements=st.floats(-3, 3)), st.integers(0, 1000))
def test_permutation_invariance(x, seed):
    assume(np.unique(x).size >= 3)
    perm = np.random.default_rng(seed).permutation(x.size)
    a = fcm_standard(x, FcmParams(c=3))
    b = fcm_standard(x[perm], FcmParams(c=3))
    np.testing.assert_allclose(a.V, b.V, atol=1e-9)
    np.testing.assert_allclose(a.U[:, perm], b.U, atol=1e-9)


def test_affine_equivariance_negative_scale():
    x = np.random.default_rng(2).random(40)
    p = FcmParams(c=3, tol=1e-13, max_iter=5000)
    a = fcm_standard(x, p)
    b = fcm_standard(-2.0 * x + 1.0, p)
    np.testing.assert_allclose(b.V, (-2.0 * a.V + 1.0)[::-1], atol=1e-6)
    np.testing.assert_allclose(b.U, a.U[::-1], atol=1e-9)


# ------------------------------------------------------------------ modified


def _scene(seed=0, shape=(12, 14)):
    rng = np.random.default_rng(seed)
    img = np.where(rng.random(shape) > 0.5, 0.7, 0.2) + rng.normal(0, 0.02, shape)
    mask = np.ones(shape, dtype=bool)
    mask[:2, :3] = False
    return img, mask


def test_neighborhoods():
    mask = np.array([[1, 1, 0], [0, 1, 0], [0, 0, 1]], dtype=bool)
    nb = build_neighborhoods(mask, 1)
    np.testing.assert_array_equal(nb.counts, [2, 2, 3, 1])
    np.testing.assert_allclose(nb.mean(np.array([1.0, 2.0, 3.0, 4.0])), [2.5, 2.0, 7 / 3, 3.0])
    lonely = build_neighborhoods(np.array([[1, 0, 1]], dtype=bool), 1)
    np.testing.assert_array_equal(lonely.counts, [0, 0])
    np.testing.assert_allclose(lonely.mean(np.array([5.0, 6.0])), [5.0, 6.0])


def test_modified_objective_reductions():
    img, mask = _scene()
    y = img[mask]
    nb = build_neighborhoods(mask)
    V = np.array([0.2, 0.7])
    U = membership_update(y, V, 2.0)
    zero = np.zeros_like(y)
    p0 = FcmParams(c=2, alpha=0.0, beta=0.0)
    assert objective_modified(y, U, V, zero, p0, nb) == pytest.approx(objective_standard(y, U, V, 2.0))
    pb = FcmParams(c=2, alpha=0.0, beta=5.0)
    assert objective_modified(y, U, V, zero, pb, nb) == pytest.approx(objective_standard(y, U, V, 2.0))
    const = np.full((5, 5), 0.4)
    nbc = build_neighborhoods(np.ones((5, 5), bool))
    crisp = np.vstack([np.ones(25), np.zeros(25)])
    for alpha in (0.0, 1.0, 3.0):
        p = FcmParams(c=2, alpha=alpha)
        assert objective_modified(const.ravel(), crisp, [0.4, 0.9], np.zeros(25), p, nbc) == 0.0


def test_reduces_to_standard():
    img, mask = _scene(3)
    p = FcmParams(c=2, alpha=0.0, beta=0.0)
    mod = fcm_modified(img, mask, p)
    std = fcm_standard(img[mask], p)
    assert mod.iterations_run == std.iterations_run
    np.testing.assert_allclose(mod.V, std.V, atol=1e-9)
    np.testing.assert_allclose(mod.U, std.U, atol=1e-9)
    assert not mod.gamma.any()


def test_constant_image_degenerate():
    st_ = fcm_modified(np.full((6, 6), 0.4), np.ones((6, 6), bool), FcmParams(c=2))
    np.testing.assert_allclose(st_.V, [0.4, 0.4])
    np.testing.assert_allclose(st_.U, 0.5)
    np.testing.assert_allclose(st_.gamma, 0.0, atol=1e-15)


def test_mask_too_small():
    mask = np.zeros((4, 4), bool)
    mask[0, 0] = mask[1, 1] = True
    with pytest.raises(MaskTooSmallError):
        fcm_modified(np.zeros((4, 4)), mask, FcmParams(c=3))


@pytest.mark.parametrize("alpha,beta", [(0.0, 1.0), (1.0, 1.0), (2.0, 0.5)])
def test_bias_minimizer_zero_gradient(alpha, beta):
    img, mask = _scene(5)
    y = img[mask]
    nb = build_neighborhoods(mask)
    p = FcmParams(c=2, alpha=alpha, beta=beta)
    V = np.array([0.25, 0.65])
    U = membership_update(y, V, 2.0)
    g = bias_update(y, U, V, 2.0, beta, alpha, nb, "minimizer")
    J0 = objective_modified(y, U, V, g, p, nb)
    h = 1e-6
    for k in (0, 17, 60, y.size - 1):
        e = np.zeros_like(y)
        e[k] = h
        Jp = objective_modified(y, U, V, g + e, p, nb)
        Jm = objective_modified(y, U, V, g - e, p, nb)
        assert abs(Jp - Jm) / (2 * h) < 1e-6
        assert Jp >= J0 and Jm >= J0


def test_modified_monotone():
    img, mask = _scene(7, (20, 20))
    st_ = fcm_modified(img, mask, FcmParams(c=2))
    J = np.array(st_.J_history)
    assert (np.diff(J) <= 1e-12 * J[0]).all()


def test_scaled_mean_rule_collapses():
    img, mask = _scene(2)
    st_ = fcm_modified(img, mask, FcmParams(c=2, bias_rule="scaled-mean"))
    assert st_.V.max() < 0.01


def test_unflatten():
    mask = np.array([[True, False], [False, True]])
    np.testing.assert_array_equal(unflatten(np.array([3, 4]), mask, fill=-1), [[3, -1], [-1, 4]])
