"""Anchor selection and nonlinear RBF anchor-graph construction.

Views are feature-major matrices (D_v x N).  A single set of M sample
indices is drawn once and reused in every view, so the per-view graphs
describe the same landmark samples and the downstream embeddings stay
comparable across views.

Anchor sampling is uniform without replacement, but over the sample order
sorted ascending by the L2 norm of each sample's concatenated all-view
feature vector.  That makes the selected set independent of the on-disk
sample order: ``order = argsort(norms); indices = order[rng.choice(N, M,
replace=False)]`` with ``rng = numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateView, DimensionMismatch, TooManyAnchors, ValidationError

# Kernel-width estimation averages at most this many (sample, anchor) pairs.
PAIR_CAP = 100_000


@dataclass
class AnchorSet:
    """Shared anchor sample indices plus per-view anchor columns and widths."""

    indices: np.ndarray                  # (M,) sample indices, shared across views
    anchors_per_view: list[np.ndarray]   # one (D_v, M) matrix per view
    sigma_per_view: list[float]          # RBF kernel width per view, > 0

    @property
    def n_anchors(self) -> int:
        return int(self.indices.size)


def _check_views(views: list[np.ndarray]) -> int:
    if not views:
        raise ValidationError("need at least one view")
    n = views[0].shape[1]
    for i, v in enumerate(views):
        if v.ndim != 2:
            raise DimensionMismatch(f"view {i} is not a matrix: shape {v.shape}")
        if v.shape[1] != n:
            raise DimensionMismatch(
                f"view {i} has {v.shape[1]} samples but view 0 has {n}"
            )
    return n


def select_anchor_indices(views: list[np.ndarray], m: int, seed: int) -> np.ndarray:
    """Draw M shared sample indices; deterministic under ``seed``."""
    n = _check_views(views)
    if not 1 <= m <= n:
        raise TooManyAnchors(f"requested {m} anchors from {n} samples")
    norms = np.zeros(n)
    for v in views:
        norms += np.einsum("dn,dn->n", v, v)
    order = np.argsort(norms, kind="stable")
    rng = np.random.default_rng(seed)
    return order[rng.choice(n, size=m, replace=False)]


def estimate_kernel_width(view: np.ndarray, anchors: np.ndarray, seed: int = 0) -> float:
    """Mean squared sample-anchor distance, over at most ``PAIR_CAP`` pairs.

    Below the cap every pair enters the mean; above it, pairs are drawn
    uniformly with a generator seeded by ``seed``.  Raises
    :class:`DegenerateView` when the mean is zero, since a zero kernel
    width is unusable (callers may override the width manually).
    """
    view = np.asarray(view, dtype=float)
    anchors = np.asarray(anchors, dtype=float)
    n, m = view.shape[1], anchors.shape[1]
    if m < 1:
        raise ValidationError("need at least one anchor")
    if n * m <= PAIR_CAP:
        sigma = float(_sqdist(anchors, view).mean())
    else:
        rng = np.random.default_rng(seed)
        si = rng.integers(n, size=PAIR_CAP)
        ai = rng.integers(m, size=PAIR_CAP)
        diff = view[:, si] - anchors[:, ai]
        sigma = float(np.einsum("dp,dp->p", diff, diff).mean())
    if sigma == 0.0:
        raise DegenerateView("all sampled sample-anchor distances are zero")
    return sigma


def build_anchor_graph(view: np.ndarray, anchors: np.ndarray, sigma: float) -> np.ndarray:
    """M x N graph with entries exp(-||x_n - z_m||^2 / sigma), in (0, 1].

    Entries equal 1 exactly when the sample coincides with the anchor:
    near-zero distances from the fast Gram expansion are recomputed by
    explicit summation, which is exact for identical columns.
    """
    if sigma <= 0:
        raise ValidationError(f"kernel width must be positive, got {sigma}")
    view = np.asarray(view, dtype=float)
    anchors = np.asarray(anchors, dtype=float)
    if view.shape[0] != anchors.shape[0]:
        raise DimensionMismatch(
            f"view has {view.shape[0]} features but anchors have {anchors.shape[0]}"
        )
    xx = np.einsum("dn,dn->n", view, view)
    zz = np.einsum("dm,dm->m", anchors, anchors)
    d2 = zz[:, None] + xx[None, :] - 2.0 * (anchors.T @ view)
    np.maximum(d2, 0.0, out=d2)
    # Expansion leaves rounding dust where columns coincide; redo those few
    # entries with the exact elementwise form.
    dust = 1e-11 * (zz[:, None] + xx[None, :])
    for mi, ni in np.argwhere(d2 <= dust):
        diff = view[:, ni] - anchors[:, mi]
        d2[mi, ni] = float(diff @ diff)
    return np.exp(-d2 / sigma)


def select_anchors(
    views: list[np.ndarray],
    m: int,
    seed: int,
    kernel_width: float | list[float] | None = None,
) -> AnchorSet:
    """Pick M shared anchors and estimate (or accept) per-view kernel widths."""
    indices = select_anchor_indices(views, m, seed)
    anchor_cols = [np.ascontiguousarray(v[:, indices]) for v in views]
    if kernel_width is None:
        sigmas = [estimate_kernel_width(v, a, seed=seed) for v, a in zip(views, anchor_cols)]
    else:
        if np.isscalar(kernel_width):
            sigmas = [float(kernel_width)] * len(views)
        else:
            sigmas = [float(s) for s in kernel_width]
            if len(sigmas) != len(views):
                raise ValidationError(
                    f"got {len(sigmas)} kernel widths for {len(views)} views"
                )
        if any(s <= 0 for s in sigmas):
            raise ValidationError("kernel widths must be positive")
    return AnchorSet(indices=indices, anchors_per_view=anchor_cols, sigma_per_view=sigmas)


def build_all_graphs(views: list[np.ndarray], anchor_set: AnchorSet) -> list[np.ndarray]:
    """One M x N anchor graph per view."""
    return [
        build_anchor_graph(v, a, s)
        for v, a, s in zip(views, anchor_set.anchors_per_view, anchor_set.sigma_per_view)
    ]


def _sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared distances between columns of a (D,M) and b (D,N) -> (M,N)."""
    aa = np.einsum("dm,dm->m", a, a)
    bb = np.einsum("dn,dn->n", b, b)
    d2 = aa[:, None] + bb[None, :] - 2.0 * (a.T @ b)
    return np.maximum(d2, 0.0, out=d2)
