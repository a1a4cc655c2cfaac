"""Fuzzy C-Means on scalar intensities.

Two variants live here:

* :func:`fcm_standard` alternates the classic membership and centroid updates
  and monotonically decreases the weighted within-cluster objective.
* :func:`fcm_modified` clusters the masked pixels of an image while adding a
  neighbourhood term (weight ``alpha``) and estimating an additive bias field
  ``gamma`` (regularized with weight ``beta``); the modeled true intensity of a
  pixel is ``x = y - gamma``.

Memberships are stored as a ``(c, N)`` matrix, one row per cluster.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy import sparse

from .errors import DegenerateClusterError, MaskTooSmallError
from .image import as_image, as_mask, check_same_shape


@dataclass(frozen=True)
class FcmParams:
    c: int = 3
    m: float = 2.0
    alpha: float = 1.0
    beta: float = 1.0
    neighborhood_radius: int = 1
    max_iter: int = 200
    tol: float = 1e-5
    seed: int = 0
    init: Literal["quantile", "random-pixels"] = "quantile"
    bias_rule: Literal["minimizer", "pointwise", "scaled-mean"] = "minimizer"

    def __post_init__(self):
        if int(self.c) != self.c or self.c < 2:
            raise ValueError(f"c must be an integer >= 2, got {self.c}")
        if not self.m > 1:
            raise ValueError(f"m must be > 1, got {self.m}")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.neighborhood_radius < 1:
            raise ValueError("neighborhood_radius must be a positive integer")
        if self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.init not in ("quantile", "random-pixels"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.bias_rule not in ("minimizer", "pointwise", "scaled-mean"):
            raise ValueError(f"unknown bias_rule {self.bias_rule!r}")


@dataclass
class FcmState:
    U: np.ndarray
    V: np.ndarray
    gamma: np.ndarray
    iterations_run: int = 0
    J_history: list[float] = field(default_factory=list)
    converged: bool = False


SweepCallback = Callable[[int, np.ndarray, np.ndarray], None]


# ----------------------------------------------------------------- primitives


def memberships_from_distances(D: np.ndarray, m: float) -> np.ndarray:
    """Fuzzy partition from a ``(c, N)`` matrix of non-negative dissimilarities.

    ``u_ij = 1 / sum_k (D_ij / D_kj) ** (1 / (m - 1))``. Where a column holds
    zeros (the point sits on one or more centroids) membership 1 is split
    equally among the zero entries.
    """
    D = np.asarray(D, dtype=np.float64)
    p = 1.0 / (m - 1.0)
    zero = D == 0.0
    hit = zero.any(axis=0)
    # dividing by the column minimum keeps every ratio >= 1, avoiding overflow
    Dsafe = np.where(hit[None, :], 1.0, D)
    with np.errstate(over="ignore", under="ignore"):
        inv = (Dsafe / Dsafe.min(axis=0)) ** (-p)
    U = inv / inv.sum(axis=0)
    if hit.any():
        U[:, hit] = zero[:, hit] / zero[:, hit].sum(axis=0)
    return U


def membership_update(data, V, m: float) -> np.ndarray:
    """Classic FCM membership step for scalar data."""
    x = np.asarray(data, dtype=np.float64).ravel()
    V = np.asarray(V, dtype=np.float64).ravel()
    if not m > 1:
        raise ValueError("m must be > 1")
    D = (x[None, :] - V[:, None]) ** 2
    return memberships_from_distances(D, m)


def centroid_update(data, U, m: float) -> np.ndarray:
    """Weighted means ``sum_j u_ij^m x_j / sum_j u_ij^m``.

    Raises
    ------
    DegenerateClusterError
        A cluster's total weight is zero.
    """
    x = np.asarray(data, dtype=np.float64).ravel()
    W = np.asarray(U, dtype=np.float64) ** m
    den = W.sum(axis=1)
    empty = np.flatnonzero(den == 0)
    if empty.size:
        raise DegenerateClusterError(int(empty[0]))
    # explicit multiply-sum instead of BLAS keeps the result thread-count independent
    return (W * x[None, :]).sum(axis=1) / den


def objective_standard(data, U, V, m: float) -> float:
    x = np.asarray(data, dtype=np.float64).ravel()
    V = np.asarray(V, dtype=np.float64).ravel()
    D = (x[None, :] - V[:, None]) ** 2
    return float(np.sum(np.asarray(U) ** m * D))


def defuzzify(U) -> np.ndarray:
    """Hard labels by per-column argmax; ties go to the lowest cluster index."""
    return np.argmax(np.asarray(U), axis=0)


def initial_centroids(data, c: int, init: str = "quantile", seed: int = 0) -> np.ndarray:
    x = np.asarray(data, dtype=np.float64).ravel()
    if init == "quantile":
        return np.quantile(x, (np.arange(c) + 0.5) / c)
    if init == "random-pixels":
        rng = np.random.default_rng(seed)
        return x[rng.choice(x.size, size=c, replace=False)].copy()
    raise ValueError(f"unknown init {init!r}")


def canonical_order(state: FcmState) -> FcmState:
    """Sort centroids ascending and permute membership rows to match."""
    order = np.argsort(state.V, kind="stable")
    state.V = state.V[order]
    state.U = state.U[order]
    return state


# ----------------------------------------------------------------- standard


def fcm_standard(data, params: FcmParams = FcmParams(),
                 callback: SweepCallback | None = None,
                 V0=None) -> FcmState:
    """Classic fuzzy c-means on scalar data.

    Each sweep computes memberships from the current centroids, then new
    centroids from those memberships, and appends the objective of the
    resulting pair to ``J_history``. Iteration stops once no centroid moves by
    ``params.tol`` or more, or after ``params.max_iter`` sweeps. ``callback``
    (if given) receives ``(sweep, U, V)`` after every sweep, before the final
    canonical reordering. ``V0`` overrides the configured initialization.
    """
    x = np.asarray(data, dtype=np.float64).ravel()
    c, m = params.c, params.m
    if x.size < c:
        raise ValueError(f"need at least c={c} data points, got {x.size}")
    V = (np.asarray(V0, dtype=np.float64).ravel().copy() if V0 is not None
         else initial_centroids(x, c, params.init, params.seed))
    state = FcmState(U=np.full((c, x.size), 1.0 / c), V=V, gamma=np.zeros(x.size))
    for it in range(1, params.max_iter + 1):
        U = membership_update(x, V, m)
        V_new = centroid_update(x, U, m)
        state.J_history.append(objective_standard(x, U, V_new, m))
        shift = np.max(np.abs(V_new - V))
        state.U, state.V, V = U, V_new, V_new
        state.iterations_run = it
        if callback is not None:
            callback(it, U, V_new)
        if shift < params.tol:
            state.converged = True
            break
    return canonical_order(state)


# ----------------------------------------------------------------- modified


@dataclass(frozen=True)
class Neighborhoods:
    """Averaging operator over each active pixel's neighbourhood.

    ``matrix`` is an ``(N, N)`` sparse row-stochastic matrix; row ``j`` puts
    weight ``1/|N_j|`` on every active pixel of the ``(2r+1)²`` window around
    pixel ``j`` except ``j`` itself. A pixel with no active neighbour averages
    over itself. ``counts`` holds ``|N_j|`` (0 for those isolated pixels).
    """

    matrix: sparse.csr_matrix
    counts: np.ndarray

    def mean(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ values


def build_neighborhoods(mask, radius: int = 1) -> Neighborhoods:
    mask = as_mask(mask)
    h, w = mask.shape
    index = np.full(mask.shape, -1, dtype=np.int64)
    n = int(mask.sum())
    index[mask] = np.arange(n)
    padded = np.pad(index, radius, constant_values=-1)
    rows, cols = [], []
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dy == 0 and dx == 0:
                continue
            shifted = padded[radius + dy : radius + dy + h, radius + dx : radius + dx + w]
            ok = mask & (shifted >= 0)
            rows.append(index[ok])
            cols.append(shifted[ok])
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    counts = np.bincount(rows, minlength=n)
    lonely = np.flatnonzero(counts == 0)
    rows = np.concatenate([rows, lonely])
    cols = np.concatenate([cols, lonely])
    weights = 1.0 / np.maximum(counts, 1)[rows]
    mat = sparse.csr_matrix((weights, (rows, cols)), shape=(n, n))
    mat.sort_indices()
    return Neighborhoods(mat, counts)


def _modified_distances(x, V, gamma, alpha, beta, nb: Neighborhoods) -> np.ndarray:
    """Per-cluster dissimilarity ``(x_j - v_i)² + alpha·mean_N (x - v_i)² + beta·gamma_j²``."""
    D = (x[None, :] - V[:, None]) ** 2
    if alpha:
        neigh = np.stack([nb.mean(row) for row in D])
        D = D + alpha * neigh
    if beta:
        D = D + beta * (gamma * gamma)[None, :]
    return D


def objective_modified(y, U, V, gamma, params: FcmParams, neighborhoods: Neighborhoods) -> float:
    """Standard objective on bias-corrected data plus ``alpha·S + beta·R``."""
    y = np.asarray(y, dtype=np.float64).ravel()
    gamma = np.asarray(gamma, dtype=np.float64).ravel()
    V = np.asarray(V, dtype=np.float64).ravel()
    D = _modified_distances(y - gamma, V, gamma, params.alpha, params.beta, neighborhoods)
    return float(np.sum(np.asarray(U) ** params.m * D))


def modified_centroids(x, U, m: float, alpha: float, nb: Neighborhoods) -> np.ndarray:
    """Centroid step with the neighbourhood mean: ``sum u^m (x + alpha·xbar) / ((1+alpha) sum u^m)``."""
    if not alpha:
        return centroid_update(x, U, m)
    z = (x + alpha * nb.mean(x)) / (1.0 + alpha)
    return centroid_update(z, U, m)


def bias_update(y, U, V, m: float, beta: float, alpha: float = 0.0,
                nb: Neighborhoods | None = None, rule: str = "minimizer") -> np.ndarray:
    """Bias-field step.

    ``rule="minimizer"`` returns the exact minimizer of the modified objective
    over ``gamma`` with U and V held fixed. The objective separates per pixel:
    pixel ``k`` enters its own data term with weight ``u_ik^m`` and each
    neighbourhood average that contains it with weight ``u_ij^m / |N_j|``, so
    ``gamma_k = sum_i a_ik (y_k - v_i) / (sum_i a_ik + beta sum_i u_ik^m)``
    with ``a = u^m + alpha * (u^m @ A)``.

    ``rule="pointwise"`` drops the neighbourhood coupling and minimizes only the
    pixel's own terms: ``gamma_j = (y_j - vbar_j) / (1 + beta)`` where ``vbar_j``
    is the ``u^m``-weighted centroid mean. It does not guarantee a monotone
    objective when ``alpha > 0``.

    ``rule="scaled-mean"`` is ``gamma_j = y_j - vbar_j / (1 + beta)``. For
    ``beta > 0`` each sweep then scales the centroids by about ``1/(1+beta)``,
    so the clustering collapses toward zero; it is kept for comparison only.
    """
    y = np.asarray(y, dtype=np.float64)
    W = np.asarray(U) ** m
    V = np.asarray(V, dtype=np.float64)
    wsum = W.sum(axis=0)
    vw = (V[:, None] * W).sum(axis=0)
    if rule == "scaled-mean":
        return y - vw / ((1.0 + beta) * wsum)
    if rule == "pointwise":
        return (y - vw / wsum) / (1.0 + beta)
    if rule != "minimizer":
        raise ValueError(f"unknown bias rule {rule!r}")
    A = W
    if alpha:
        A = W + alpha * (nb.matrix.T @ W.T).T
    resid = y[None, :] - V[:, None]
    return np.sum(A * resid, axis=0) / (A.sum(axis=0) + beta * wsum)


def fcm_modified(image, mask, params: FcmParams = FcmParams(),
                 callback: SweepCallback | None = None) -> FcmState:
    """Bias-correcting, spatially regularized FCM over the mask's pixels.

    Starting from ``gamma = 0`` and centroids initialized from the masked
    intensities, each sweep updates memberships, then centroids, then the bias
    field; every sub-update is computed for all pixels at once from the values
    available at its start. With ``alpha == beta == 0`` the bias field stays at
    zero and the iteration is exactly :func:`fcm_standard`.

    Raises
    ------
    MaskTooSmallError
        Fewer than ``params.c`` active pixels.
    DegenerateClusterError
        A cluster lost all membership weight.
    """
    img = as_image(image)
    mask = as_mask(mask)
    check_same_shape(img, mask)
    y = img[mask]
    c, m, alpha, beta = params.c, params.m, params.alpha, params.beta
    if y.size < c:
        raise MaskTooSmallError(f"mask has {y.size} active pixels, need at least {c}")
    nb = build_neighborhoods(mask, params.neighborhood_radius)
    update_bias = bool(alpha or beta)

    V = initial_centroids(y, c, params.init, params.seed)
    gamma = np.zeros_like(y)
    state = FcmState(U=np.full((c, y.size), 1.0 / c), V=V, gamma=gamma)
    for it in range(1, params.max_iter + 1):
        x = y - gamma
        U = memberships_from_distances(_modified_distances(x, V, gamma, alpha, beta, nb), m)
        V_new = modified_centroids(x, U, m, alpha, nb)
        if update_bias:
            gamma = bias_update(y, U, V_new, m, beta, alpha, nb, params.bias_rule)
        state.J_history.append(objective_modified(y, U, V_new, gamma, params, nb))
        shift = np.max(np.abs(V_new - V))
        state.U, state.V, state.gamma, V = U, V_new, gamma, V_new
        state.iterations_run = it
        if callback is not None:
            callback(it, U, V_new)
        if shift < params.tol:
            state.converged = True
            break
    return canonical_order(state)


def unflatten(values, mask, fill: float = 0.0) -> np.ndarray:
    """Scatter per-active-pixel values back onto the mask's grid."""
    mask = as_mask(mask)
    out = np.full(mask.shape, fill, dtype=np.result_type(np.asarray(values).dtype, type(fill)))
    out[mask] = values
    return out
