"""Feature-collapse metrics: edge energies, angular spread, and rank proxies.

Every metric takes the raw feature matrix (rows are node states). The two
energies measure distance from the dominant propagation direction ``u``: the
edge energy after rescaling rows by ``u``, and the Frobenius mass outside the
rank-one subspace spanned by ``u``. The rank family (numerical rank, stable
rank, effective rank) watches the singular value profile collapse toward
rank one.

``metric_suite`` evaluates everything in one pass and is the hot path: the
singular values are computed once and shared across the three rank proxies.
On degenerate input (zero matrix, fully skipped edge set) the suite stores
``None`` markers instead of raising, so layer sweeps can keep going.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllEdgesSkipped,
    InvalidParameter,
    NoEdges,
    NonpositiveEigenvector,
    NonUnitVector,
    ShapeMismatch,
    ZeroMatrix,
)
from .graph import Graph
from .linalg import pow2_scale, singular_values
from .validation import as_matrix, as_vector, require_length

# Columns reported by layer traces and cross-run correlation, in order.
CANONICAL_METRICS = (
    "e_dir",
    "e_dir_norm",
    "e_proj",
    "e_proj_norm",
    "mad",
    "erank",
    "num_rank",
)

# Relative noise floor for the entropy/sum based rank proxies. The Gram route
# cannot resolve singular values below ~sqrt(n * machine eps) * s_1, so
# anything under this floor is rounding noise, and dropping it lets an
# exactly rank-one matrix report exactly 1.0.
SV_NOISE_FLOOR = 1e-7

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class MetricReport:
    """One layer's metric values; ``None`` marks an undefined entry.

    The normalized energies and rank proxies are ``None`` when the feature
    matrix is identically zero, ``mad`` when the graph has no edges or every
    edge touched a zero row. ``skipped_mad_edges`` counts edges excluded
    from the angular mean because an endpoint row was exactly zero.
    """

    e_dir: float
    e_dir_norm: float | None
    e_proj: float
    e_proj_norm: float | None
    mad: float | None
    num_rank: float | None
    stable_rank: float | None
    erank: float | None
    frob_norm: float
    skipped_mad_edges: int


def _features_for_graph(x, g: Graph) -> np.ndarray:
    x = as_matrix(x, "features")
    if x.shape[0] != g.n:
        raise ShapeMismatch(
            f"features have {x.shape[0]} rows for a graph with {g.n} vertices"
        )
    return x


def _check_direction(u, n: int) -> np.ndarray:
    u = as_vector(u, "direction vector")
    require_length(u, n, "direction vector")
    if np.any(u == 0.0):
        raise NonpositiveEigenvector(
            "direction vector entries must be nonzero (rows are rescaled by them)"
        )
    return u


def _check_unit(u, n: int) -> np.ndarray:
    u = as_vector(u, "direction vector")
    require_length(u, n, "direction vector")
    norm = math.sqrt(float(u @ u))
    if abs(norm - 1.0) > UNIT_TOL:
        raise NonUnitVector(f"direction vector has norm {norm!r}, expected 1")
    return u


def dirichlet_energy(x, g: Graph, u) -> float:
    """Sum over edges of ``||x_i/u_i - x_j/u_j||^2``, each edge once.

    ``u`` is the (not necessarily unit) dominant-direction weighting; its
    entries must be nonzero. Zero exactly when every row of ``x`` is the
    same multiple of its ``u`` entry.
    """
    x = _features_for_graph(x, g)
    u = _check_direction(u, g.n)
    y = x / u[:, None]
    ei, ej = g.edge_arrays
    diff = y[ei] - y[ej]
    return float(np.sum(diff * diff))


def projection_energy(x, u) -> float:
    """Squared Frobenius mass of ``x`` outside the line spanned by unit ``u``."""
    x = as_matrix(x, "features")
    u = _check_unit(u, x.shape[0])
    resid = x - np.outer(u, u @ x)
    return float(np.sum(resid * resid))


def normalized_energies(x, g: Graph, u, proj_exponent: int = 2) -> tuple[float, float]:
    """Scale-normalized energy pair ``(e_dir, e_proj) / ||x||_F^2``.

    ``proj_exponent=1`` divides the projection energy by ``||x||_F`` instead;
    the default squared denominator is the scale-invariant choice. Both
    ratios are evaluated on a power-of-two scaled copy, so they stay finite
    even when the raw energies overflow.
    """
    if proj_exponent not in (1, 2):
        raise InvalidParameter(f"proj_exponent must be 1 or 2, got {proj_exponent}")
    x = _features_for_graph(x, g)
    scale = pow2_scale(x)
    xs = x if scale == 1.0 else x / scale
    f2 = float(np.sum(xs * xs))
    if f2 == 0.0:
        raise ZeroMatrix("normalized energies are undefined for a zero matrix")
    e_dir = dirichlet_energy(xs, g, u)
    e_proj = projection_energy(xs, _check_unit(u, g.n))
    if proj_exponent == 2:
        return e_dir / f2, e_proj / f2
    return e_dir / f2, (e_proj / math.sqrt(f2)) * scale


def _mad_stats(x: np.ndarray, g: Graph) -> tuple[float | None, int, int]:
    # Returns (mean angular distance or None, skipped edges, total edges).
    ei, ej = g.edge_arrays
    total = int(ei.shape[0])
    if total == 0:
        return None, 0, 0
    scale = pow2_scale(x)
    if scale != 1.0:
        # Cosines ignore scale; the exact power-of-two division keeps the
        # row products representable for huge feature values.
        x = x / scale
    sq = np.einsum("ij,ij->i", x, x)
    live = (sq[ei] > 0.0) & (sq[ej] > 0.0)
    kept = int(np.count_nonzero(live))
    if kept == 0:
        return None, total, total
    hi, hj = ei[live], ej[live]
    dots = np.einsum("ij,ij->i", x[hi], x[hj])
    # sqrt(s * s) == s exactly in IEEE-754, so bitwise-identical rows give
    # cosine 1.0 and contribute an exact zero.
    cos = np.clip(dots / np.sqrt(sq[hi] * sq[hj]), -1.0, 1.0)
    return float(np.sum(1.0 - cos) / kept), total - kept, total


def mad(x, g: Graph) -> float:
    """Mean angular distance ``1 - cos`` across edges, in ``[0, 2]``.

    Edges with a zero-norm endpoint are skipped; raises NoEdges on an
    edgeless graph and AllEdgesSkipped when nothing remains.
    """
    x = _features_for_graph(x, g)
    value, skipped, total = _mad_stats(x, g)
    if total == 0:
        raise NoEdges("mean angular distance needs at least one edge")
    if value is None:
        raise AllEdgesSkipped(f"all {skipped} edges touch a zero-norm row")
    return value


def _rank_bound(x: np.ndarray) -> float:
    return float(min(x.shape))


def _unscale_energy(value: float, scale: float) -> float:
    # Exact power-of-two rescale; an energy beyond the float range becomes an
    # honest inf, and an exact zero must not turn into 0 * inf.
    if value == 0.0 or scale == 1.0:
        return value
    return (value * scale) * scale


def _clip_noise(sv: np.ndarray) -> np.ndarray:
    return sv[sv >= SV_NOISE_FLOOR * sv[0]]


def _num_rank_value(sv_clipped: np.ndarray, bound: float) -> float:
    # Summing the solver's own (noise-clipped) spectrum rather than the raw
    # squared entries makes an exactly rank-deficient matrix report an exact
    # ratio; the two sums agree to solver precision otherwise.
    s1 = float(sv_clipped[0])
    total = float(sv_clipped @ sv_clipped)
    return min(max(total / (s1 * s1), 1.0), bound)


def _stable_rank_value(sv_clipped: np.ndarray, bound: float) -> float:
    total = float(np.sum(sv_clipped))
    sq = float(sv_clipped @ sv_clipped)
    return min(max((total * total) / sq, 1.0), bound)


def _erank_value(sv_clipped: np.ndarray, bound: float) -> float:
    p = sv_clipped / float(np.sum(sv_clipped))
    entropy = -float(np.sum(p * np.log(p)))
    return min(max(math.exp(entropy), 1.0), bound)


def numerical_rank(x) -> float:
    """``||x||_F^2 / ||x||_2^2``, clamped into ``[1, min(rows, cols)]``."""
    x = as_matrix(x, "features")
    sv = singular_values(x)
    if sv[0] == 0.0:
        raise ZeroMatrix("numerical rank is undefined for a zero matrix")
    return _num_rank_value(_clip_noise(sv), _rank_bound(x))


def stable_rank(x) -> float:
    """``(sum sv)^2 / sum sv^2`` over the noise-clipped singular values."""
    x = as_matrix(x, "features")
    sv = singular_values(x)
    if sv[0] == 0.0:
        raise ZeroMatrix("stable rank is undefined for a zero matrix")
    return _stable_rank_value(_clip_noise(sv), _rank_bound(x))


def effective_rank(x) -> float:
    """Exponential of the entropy of the normalized singular value profile."""
    x = as_matrix(x, "features")
    sv = singular_values(x)
    if sv[0] == 0.0:
        raise ZeroMatrix("effective rank is undefined for a zero matrix")
    return _erank_value(_clip_noise(sv), _rank_bound(x))


def metric_suite(x, g: Graph, u, proj_exponent: int = 2) -> MetricReport:
    """Evaluate every metric once, sharing the singular value computation.

    ``u`` must be unit norm with nonzero entries. Degenerate cases become
    ``None`` markers rather than exceptions; see MetricReport.
    """
    if proj_exponent not in (1, 2):
        raise InvalidParameter(f"proj_exponent must be 1 or 2, got {proj_exponent}")
    x = _features_for_graph(x, g)
    u = _check_unit(u, g.n)
    _check_direction(u, g.n)
    # Everything is evaluated on a power-of-two scaled copy: bitwise
    # identical to the raw computation in range, finite out of range. The
    # absolute energies are rescaled back at the end.
    scale = pow2_scale(x)
    xs = x if scale == 1.0 else x / scale
    f2 = float(np.sum(xs * xs))
    y = xs / u[:, None]
    ei, ej = g.edge_arrays
    diff = y[ei] - y[ej]
    e_dir = float(np.sum(diff * diff))
    resid = xs - np.outer(u, u @ xs)
    e_proj = float(np.sum(resid * resid))
    if f2 > 0.0:
        e_dir_norm = e_dir / f2
        e_proj_norm = e_proj / f2 if proj_exponent == 2 else (e_proj / math.sqrt(f2)) * scale
        sv = singular_values(xs)
        bound = _rank_bound(x)
        clipped = _clip_noise(sv)
        num_rank = _num_rank_value(clipped, bound)
        stable = _stable_rank_value(clipped, bound)
        erank = _erank_value(clipped, bound)
    else:
        e_dir_norm = e_proj_norm = num_rank = stable = erank = None
    mad_value, skipped, _total = _mad_stats(xs, g)
    return MetricReport(
        e_dir=_unscale_energy(e_dir, scale),
        e_dir_norm=e_dir_norm,
        e_proj=_unscale_energy(e_proj, scale),
        e_proj_norm=e_proj_norm,
        mad=mad_value,
        num_rank=num_rank,
        stable_rank=stable,
        erank=erank,
        frob_norm=math.sqrt(f2) * scale,
        skipped_mad_edges=skipped,
    )


def numrank_upper_bound_check(x, u) -> tuple[float, float]:
    """Numerical rank and its projection-residue upper bound
    ``1 + ||x - u u^T x||_F^2 / ||x||_2^2``, returned as ``(lhs, rhs)``.

    Both sides are dimensionless and are evaluated on a power-of-two scaled
    copy of ``x`` so neither square can overflow.
    """
    x = as_matrix(x, "features")
    u = _check_unit(u, x.shape[0])
    scale = pow2_scale(x)
    xs = x if scale == 1.0 else x / scale
    sv = singular_values(xs)
    s1 = float(sv[0])
    if s1 == 0.0:
        raise ZeroMatrix("bound is undefined for a zero matrix")
    lhs = _num_rank_value(_clip_noise(sv), _rank_bound(x))
    resid = xs - np.outer(u, u @ xs)
    rhs = 1.0 + float(np.sum(resid * resid)) / (s1 * s1)
    return lhs, rhs
