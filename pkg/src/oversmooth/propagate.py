"""Deterministic message-passing simulators.

A rollout repeatedly applies ``x -> activation(A x W)`` (optionally with a
bias row and a residual tap back to the input features) and records every
intermediate feature matrix. ``A`` is either the fixed symmetrically
normalized adjacency or a per-layer attention matrix built from the current
features. All randomness flows through one xoshiro256++ stream seeded from
the config seed, with a pinned draw order: initial features first (row
major), then per layer the weight matrix, bias, attention vectors, and
residual matrix, in that order, each only when its feature is enabled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, ShapeMismatch
from .graph import Graph, sym_norm_adjacency
from .rng import Xoshiro256pp
from .validation import as_matrix, as_square_matrix, as_vector, require_length

# Feature magnitudes above this truncate a rollout.
OVERFLOW_LIMIT = 1e300


@dataclass(frozen=True)
class Activation:
    """Elementwise nonlinearity: 'leaky_relu', 'tanh', or 'identity'."""

    kind: str
    alpha: float = 0.0

    def apply(self, z: np.ndarray) -> np.ndarray:
        if self.kind == "leaky_relu":
            return np.where(z >= 0.0, z, self.alpha * z)
        if self.kind == "tanh":
            return np.tanh(z)
        return z.copy()


def leaky_relu(alpha: float = 0.01) -> Activation:
    """Slope 1 on the nonnegative axis, ``alpha`` on the negative one."""
    if not 0.0 < alpha < 1.0:
        raise InvalidParameter(f"leaky slope must lie in (0, 1), got {alpha}")
    return Activation("leaky_relu", alpha)


def tanh() -> Activation:
    return Activation("tanh")


def identity() -> Activation:
    return Activation("identity")


@dataclass(frozen=True)
class WeightScheme:
    """How layer parameters are drawn: 'identity', 'uniform_nonneg' over
    ``[0, scale)``, or 'uniform_signed' over ``[-scale, scale)``.

    ``fresh_per_layer=False`` samples every parameter once at the first
    layer and reuses it afterwards.
    """

    kind: str
    scale: float = 1.0
    fresh_per_layer: bool = True

    def sample(self, rng: Xoshiro256pp, rows: int, cols: int) -> np.ndarray:
        if self.kind == "identity":
            if rows != cols:
                raise ShapeMismatch(
                    f"identity weights need square shape, got {rows}x{cols}"
                )
            return np.eye(rows)
        if self.kind == "uniform_nonneg":
            return rng.matrix(rows, cols, 0.0, self.scale)
        return rng.matrix(rows, cols, -self.scale, self.scale)

    def sample_vector(self, rng: Xoshiro256pp, length: int) -> np.ndarray:
        # The identity scheme has no distribution to draw from; vector
        # parameters (bias, attention) degrade to zero.
        if self.kind == "identity":
            return np.zeros(length)
        if self.kind == "uniform_nonneg":
            return rng.fill(length, 0.0, self.scale)
        return rng.fill(length, -self.scale, self.scale)


def identity_weights() -> WeightScheme:
    return WeightScheme("identity")


def uniform_nonneg(scale: float = 1.0, fresh_per_layer: bool = True) -> WeightScheme:
    if not scale > 0.0:
        raise InvalidParameter(f"scale must be > 0, got {scale}")
    return WeightScheme("uniform_nonneg", scale, fresh_per_layer)


def uniform_signed(scale: float = 1.0, fresh_per_layer: bool = True) -> WeightScheme:
    if not scale > 0.0:
        raise InvalidParameter(f"scale must be > 0, got {scale}")
    return WeightScheme("uniform_signed", scale, fresh_per_layer)


@dataclass(frozen=True)
class PropagationConfig:
    """Full description of one deterministic rollout."""

    graph: Graph
    width: int
    depth: int
    arch: str = "gcn"
    activation: Activation = field(default_factory=leaky_relu)
    weights: WeightScheme = field(default_factory=identity_weights)
    seed: int = 0
    use_bias: bool = False
    use_residual: bool = False
    init: np.ndarray | None = None
    gat_leaky_alpha: float = 0.2

    def __post_init__(self):
        if self.arch not in ("gcn", "gat"):
            raise InvalidParameter(f"arch must be 'gcn' or 'gat', got {self.arch!r}")
        if not isinstance(self.depth, (int, np.integer)) or self.depth < 1:
            raise InvalidParameter(f"depth must be an integer >= 1, got {self.depth!r}")
        if not isinstance(self.width, (int, np.integer)) or self.width < 1:
            raise InvalidParameter(f"width must be an integer >= 1, got {self.width!r}")
        if not 0.0 < self.gat_leaky_alpha < 1.0:
            raise InvalidParameter(
                f"gat_leaky_alpha must lie in (0, 1), got {self.gat_leaky_alpha}"
            )
        if self.init is not None:
            x0 = as_matrix(self.init, "init features")
            if x0.shape != (self.graph.n, self.width):
                raise ShapeMismatch(
                    f"init features must be {self.graph.n}x{self.width}, "
                    f"got {x0.shape[0]}x{x0.shape[1]}"
                )
            object.__setattr__(self, "init", x0.copy())


@dataclass(frozen=True)
class LayerTrace:
    """Feature matrices (and optional per-layer reports) of one rollout.

    ``features[l]`` is the state after ``l`` layers, starting at the input.
    ``truncated_at`` is the first layer whose output overflowed; that layer's
    features are not recorded.
    """

    config: PropagationConfig
    features: tuple[np.ndarray, ...]
    reports: tuple | None
    truncated_at: int | None


def gcn_layer(a, x, w, activation: Activation, bias=None, residual=None) -> np.ndarray:
    """One propagation step ``activation(a x w + bias)``, plus the residual
    tap ``x0 w2`` (``residual=(x0, w2)``) added outside the nonlinearity.
    """
    a = as_square_matrix(a, "propagation matrix")
    x = as_matrix(x, "features")
    w = as_matrix(w, "weights")
    if a.shape[1] != x.shape[0]:
        raise ShapeMismatch(
            f"propagation matrix is {a.shape[0]}x{a.shape[1]} but features have "
            f"{x.shape[0]} rows"
        )
    if x.shape[1] != w.shape[0]:
        raise ShapeMismatch(
            f"features have {x.shape[1]} columns but weights have {w.shape[0]} rows"
        )
    z = a @ x @ w
    if bias is not None:
        bias = as_vector(bias, "bias")
        require_length(bias, w.shape[1], "bias")
        z = z + bias[None, :]
    h = activation.apply(z)
    if residual is not None:
        x0, w2 = residual
        x0 = as_matrix(x0, "residual features")
        w2 = as_matrix(w2, "residual weights")
        if x0.shape[0] != h.shape[0] or x0.shape[1] != w2.shape[0] or w2.shape[1] != h.shape[1]:
            raise ShapeMismatch("residual tap shapes do not compose")
        h = h + x0 @ w2
    return h


def gat_attention(x, w, p1, p2, g: Graph, leaky_alpha: float = 0.2) -> np.ndarray:
    """Row-stochastic attention over closed neighborhoods.

    Scores are ``leaky_relu(p1 . z_i + p2 . z_j)`` with ``z = x w``, turned
    into rows by a max-shifted softmax restricted to each closed
    neighborhood. Zero attention vectors give uniform rows ``1/(1+d_i)``.
    """
    x = as_matrix(x, "features")
    w = as_matrix(w, "weights")
    if x.shape[0] != g.n:
        raise ShapeMismatch(f"features have {x.shape[0]} rows for n={g.n}")
    if x.shape[1] != w.shape[0]:
        raise ShapeMismatch(
            f"features have {x.shape[1]} columns but weights have {w.shape[0]} rows"
        )
    p1 = as_vector(p1, "attention vector p1")
    p2 = as_vector(p2, "attention vector p2")
    require_length(p1, w.shape[1], "attention vector p1")
    require_length(p2, w.shape[1], "attention vector p2")
    if not 0.0 < leaky_alpha < 1.0:
        raise InvalidParameter(f"leaky_alpha must lie in (0, 1), got {leaky_alpha}")
    z = x @ w
    src = z @ p1
    dst = z @ p2
    scores = src[:, None] + dst[None, :]
    scores = np.where(scores >= 0.0, scores, leaky_alpha * scores)
    support = np.zeros((g.n, g.n), dtype=bool)
    ei, ej = g.edge_arrays
    support[ei, ej] = True
    support[ej, ei] = True
    np.fill_diagonal(support, True)
    masked = np.where(support, scores, -np.inf)
    shifted = np.exp(masked - masked.max(axis=1, keepdims=True))
    return shifted / shifted.sum(axis=1, keepdims=True)


def rollout(config: PropagationConfig, metric_hook=None) -> LayerTrace:
    """Run a configured propagation and record every layer.

    ``metric_hook(features)`` is evaluated on the input and after every
    layer; its results land in ``LayerTrace.reports``. Any layer output with
    an entry above ``OVERFLOW_LIMIT`` (or non-finite) truncates the rollout.
    """
    g = config.graph
    rng = Xoshiro256pp(config.seed)
    if config.init is None:
        x = rng.matrix(g.n, config.width, 0.0, 1.0)
    else:
        x = config.init.copy()
    features = [x]
    reports = [metric_hook(x)] if metric_hook is not None else None
    fixed_a = sym_norm_adjacency(g) if config.arch == "gcn" else None
    scheme = config.weights
    w = bias = p1 = p2 = w_res = None
    truncated_at = None
    for layer in range(config.depth):
        if scheme.fresh_per_layer or layer == 0:
            w = scheme.sample(rng, config.width, config.width)
            bias = scheme.sample_vector(rng, config.width) if config.use_bias else None
            if config.arch == "gat":
                p1 = scheme.sample_vector(rng, config.width)
                p2 = scheme.sample_vector(rng, config.width)
            if config.use_residual:
                w_res = scheme.sample(rng, config.width, config.width)
        if config.arch == "gat":
            a = gat_attention(x, w, p1, p2, g, config.gat_leaky_alpha)
        else:
            a = fixed_a
        residual = (features[0], w_res) if config.use_residual else None
        x_next = gcn_layer(a, x, w, config.activation, bias, residual)
        if not np.all(np.isfinite(x_next)) or np.max(np.abs(x_next)) > OVERFLOW_LIMIT:
            truncated_at = layer + 1
            break
        x = x_next
        features.append(x)
        if reports is not None:
            reports.append(metric_hook(x))
    return LayerTrace(
        config=config,
        features=tuple(features),
        reports=None if reports is None else tuple(reports),
        truncated_at=truncated_at,
    )
