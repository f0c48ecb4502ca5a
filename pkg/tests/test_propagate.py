"""Message-passing simulator tests: layer maps, attention, draw order."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oversmooth.errors import InvalidParameter, ShapeMismatch
from oversmooth.graph import Graph, barabasi_albert, sym_norm_adjacency
from oversmooth.propagate import (
    OVERFLOW_LIMIT,
    PropagationConfig,
    gat_attention,
    gcn_layer,
    identity,
    identity_weights,
    leaky_relu,
    rollout,
    tanh,
    uniform_nonneg,
    uniform_signed,
)
from oversmooth.rng import Xoshiro256pp


def edge2() -> Graph:
    return Graph.from_edges(2, [(0, 1)])


def test_leaky_relu_slopes():
    act = leaky_relu(0.25)
    assert_allclose(act.apply(np.array([2.0, -2.0])), [2.0, -0.5], rtol=0, atol=0)


def test_leaky_relu_positive_homogeneity():
    act = leaky_relu()
    z = Xoshiro256pp(1).fill(50, -3.0, 3.0)
    assert_allclose(act.apply(7.0 * z), 7.0 * act.apply(z), rtol=1e-15)


def test_tanh_matches_numpy():
    z = Xoshiro256pp(2).fill(20, -4.0, 4.0)
    assert np.array_equal(tanh().apply(z), np.tanh(z))


def test_identity_returns_a_copy():
    z = np.array([1.0, 2.0])
    out = identity().apply(z)
    out[0] = 99.0
    assert z[0] == 1.0


def test_activation_validation():
    with pytest.raises(InvalidParameter):
        leaky_relu(0.0)
    with pytest.raises(InvalidParameter):
        leaky_relu(1.0)


def test_weight_scheme_sampling():
    rng = Xoshiro256pp(3)
    assert np.array_equal(identity_weights().sample(rng, 3, 3), np.eye(3))
    with pytest.raises(ShapeMismatch):
        identity_weights().sample(rng, 2, 3)
    assert np.array_equal(identity_weights().sample_vector(rng, 4), np.zeros(4))
    m = uniform_nonneg(0.05).sample(rng, 4, 4)
    assert m.min() >= 0.0 and m.max() < 0.05
    s = uniform_signed(0.5).sample(rng, 4, 4)
    assert s.min() < 0.0 and abs(s).max() < 0.5
    with pytest.raises(InvalidParameter):
        uniform_nonneg(0.0)
    with pytest.raises(InvalidParameter):
        uniform_signed(-1.0)


def test_gcn_layer_averages_single_edge():
    a = np.array([[0.5, 0.5], [0.5, 0.5]])
    out = gcn_layer(a, [[1.0], [3.0]], [[1.0]], identity())
    assert_allclose(out, [[2.0], [2.0]], rtol=0, atol=0)


def test_gcn_layer_bias_and_residual():
    a = np.array([[0.5, 0.5], [0.5, 0.5]])
    x = np.array([[1.0], [3.0]])
    out = gcn_layer(a, x, [[1.0]], identity(), bias=[1.0], residual=(x, [[2.0]]))
    assert_allclose(out, [[5.0], [9.0]], rtol=0, atol=0)


def test_gcn_layer_shape_errors():
    a = np.eye(2)
    with pytest.raises(ShapeMismatch):
        gcn_layer(a, [[1.0], [2.0], [3.0]], [[1.0]], identity())
    with pytest.raises(ShapeMismatch):
        gcn_layer(a, [[1.0, 2.0], [3.0, 4.0]], [[1.0]], identity())
    with pytest.raises(ShapeMismatch):
        gcn_layer(a, [[1.0], [2.0]], [[1.0]], identity(), bias=[1.0, 2.0])
    with pytest.raises(ShapeMismatch):
        gcn_layer(a, [[1.0], [2.0]], [[1.0]], identity(), residual=([[1.0], [2.0]], [[1.0, 2.0]]))


def test_gat_attention_softmax_rows():
    # Score difference ln 3 between the two columns gives rows (3/4, 1/4).
    x = np.array([[math.log(3.0)], [0.0]])
    a = gat_attention(x, [[1.0]], [0.0], [1.0], edge2())
    assert_allclose(a, [[0.75, 0.25], [0.75, 0.25]], rtol=1e-14)


def test_gat_attention_zero_vectors_give_degree_uniform_rows():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    x = Xoshiro256pp(4).matrix(3, 2)
    a = gat_attention(x, np.eye(2), [0.0, 0.0], [0.0, 0.0], g)
    assert_allclose(a[1], [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], rtol=1e-15)
    assert_allclose(a[0], [0.5, 0.5, 0.0], rtol=1e-15)


def test_gat_attention_is_row_stochastic_on_support():
    g = barabasi_albert(8, 2, seed=5)
    rng = Xoshiro256pp(6)
    x = rng.matrix(8, 3, -1.0, 1.0)
    w = rng.matrix(3, 3, -1.0, 1.0)
    a = gat_attention(x, w, rng.fill(3, -1.0, 1.0), rng.fill(3, -1.0, 1.0), g)
    assert a.min() >= 0.0
    assert_allclose(a.sum(axis=1), np.ones(8), rtol=1e-12)
    support = np.zeros((8, 8), dtype=bool)
    ei, ej = g.edge_arrays
    support[ei, ej] = support[ej, ei] = True
    np.fill_diagonal(support, True)
    assert np.all(a[~support] == 0.0)


def test_gat_attention_validation():
    with pytest.raises(ShapeMismatch):
        gat_attention(np.ones((3, 1)), [[1.0]], [0.0], [0.0], edge2())
    with pytest.raises(ShapeMismatch):
        gat_attention(np.ones((2, 1)), [[1.0]], [0.0, 0.0], [0.0], edge2())
    with pytest.raises(InvalidParameter):
        gat_attention(np.ones((2, 1)), [[1.0]], [0.0], [0.0], edge2(), leaky_alpha=0.0)


def test_config_validation():
    g = edge2()
    with pytest.raises(InvalidParameter):
        PropagationConfig(graph=g, width=2, depth=1, arch="mlp")
    with pytest.raises(InvalidParameter):
        PropagationConfig(graph=g, width=0, depth=1)
    with pytest.raises(InvalidParameter):
        PropagationConfig(graph=g, width=2, depth=0)
    with pytest.raises(InvalidParameter):
        PropagationConfig(graph=g, width=2, depth=1, gat_leaky_alpha=1.5)
    with pytest.raises(ShapeMismatch):
        PropagationConfig(graph=g, width=2, depth=1, init=np.ones((3, 2)))


def test_rollout_is_deterministic():
    g = barabasi_albert(10, 2, seed=7)
    config = PropagationConfig(
        graph=g, width=4, depth=6, arch="gat", activation=tanh(),
        weights=uniform_nonneg(0.1), seed=42, use_bias=True,
    )
    a = rollout(config)
    b = rollout(config)
    assert len(a.features) == 7
    for fa, fb in zip(a.features, b.features):
        assert np.array_equal(fa, fb)


def test_rollout_gcn_draw_order():
    # One stream: init features row-major, then per layer weights, bias,
    # residual weights. The manual replay must match bitwise.
    g = barabasi_albert(6, 2, seed=8)
    width, depth, lo, hi = 3, 2, 0.0, 0.3
    config = PropagationConfig(
        graph=g, width=width, depth=depth, arch="gcn", activation=tanh(),
        weights=uniform_nonneg(hi), seed=99, use_bias=True, use_residual=True,
    )
    trace = rollout(config)

    rng = Xoshiro256pp(99)
    a = sym_norm_adjacency(g)
    x0 = rng.matrix(g.n, width, 0.0, 1.0)
    x = x0
    states = [x0]
    for _ in range(depth):
        w = rng.matrix(width, width, lo, hi)
        bias = rng.fill(width, lo, hi)
        w_res = rng.matrix(width, width, lo, hi)
        x = np.tanh(a @ x @ w + bias[None, :]) + x0 @ w_res
        states.append(x)
    assert len(trace.features) == len(states)
    for got, want in zip(trace.features, states):
        assert np.array_equal(got, want)


def test_rollout_gat_draw_order():
    # Per layer: weights, then attention vectors p1 and p2.
    g = barabasi_albert(5, 2, seed=9)
    width, depth, scale = 2, 2, 0.2
    config = PropagationConfig(
        graph=g, width=width, depth=depth, arch="gat",
        activation=leaky_relu(), weights=uniform_nonneg(scale), seed=31,
    )
    trace = rollout(config)

    rng = Xoshiro256pp(31)
    x = rng.matrix(g.n, width, 0.0, 1.0)
    states = [x]
    act = leaky_relu()
    for _ in range(depth):
        w = rng.matrix(width, width, 0.0, scale)
        p1 = rng.fill(width, 0.0, scale)
        p2 = rng.fill(width, 0.0, scale)
        a = gat_attention(x, w, p1, p2, g)
        x = act.apply(a @ x @ w)
        states.append(x)
    for got, want in zip(trace.features, states):
        assert np.array_equal(got, want)


def test_rollout_frozen_weights_reuse_first_draw():
    g = barabasi_albert(6, 2, seed=10)
    config = PropagationConfig(
        graph=g, width=3, depth=3, arch="gcn", activation=identity(),
        weights=uniform_signed(0.5, fresh_per_layer=False), seed=77,
    )
    trace = rollout(config)

    rng = Xoshiro256pp(77)
    a = sym_norm_adjacency(g)
    x = rng.matrix(g.n, 3, 0.0, 1.0)
    w = rng.matrix(3, 3, -0.5, 0.5)
    states = [x]
    for _ in range(3):
        x = a @ x @ w
        states.append(x)
    for got, want in zip(trace.features, states):
        assert np.array_equal(got, want)


def test_rollout_truncates_on_overflow():
    g = edge2()
    config = PropagationConfig(
        graph=g, width=2, depth=5, arch="gcn", activation=identity(),
        weights=identity_weights(), seed=0,
        init=np.full((2, 2), 2.0 * OVERFLOW_LIMIT),
    )
    trace = rollout(config, metric_hook=lambda x: float(np.max(x)))
    assert trace.truncated_at == 1
    assert len(trace.features) == 1
    assert len(trace.reports) == 1


def test_rollout_hook_runs_on_every_recorded_state():
    g = barabasi_albert(6, 2, seed=11)
    config = PropagationConfig(graph=g, width=2, depth=4, seed=1)
    trace = rollout(config, metric_hook=lambda x: float(np.sum(x * x)))
    assert len(trace.reports) == len(trace.features) == 5
    assert trace.reports[0] == float(np.sum(trace.features[0] ** 2))
