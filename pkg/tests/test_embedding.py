import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proforg.embedding import EmbeddingConfig, embed, embed_many, embed_position, embed_time


def reference_embed(width, d, base, position, tick):
    """Independent loop over the sinusoidal definition."""
    out = [0.0] * width
    out[position] = 1.0
    for i in range(d):
        angle = tick / base ** (2 * (i // 2) / d)
        out.append(math.sin(angle) if i % 2 == 0 else math.cos(angle))
    return np.array(out)


def test_tick_zero_vector():
    v = embed(EmbeddingConfig(), 2, 0)
    assert v.shape == (57,)
    assert v[:7].tolist() == [0, 0, 1, 0, 0, 0, 0]
    assert np.all(v[7::2] == 0.0) and np.all(v[8::2] == 1.0)


@pytest.mark.parametrize("base", [None, 10000.0, 37.0])
def test_matches_reference(base, rng):
    cfg = EmbeddingConfig(frequency_base=base)
    for p, t in zip(rng.integers(0, 7, 50), rng.integers(0, 10**5, 50)):
        np.testing.assert_allclose(embed(cfg, int(p), int(t)),
                                   reference_embed(7, 50, cfg.base, int(p), int(t)),
                                   rtol=0, atol=1e-9)


def test_default_base_aligns_second_pair_with_period():
    cfg = EmbeddingConfig()
    assert cfg.frequencies[2] == pytest.approx(2 * math.pi / 10, rel=1e-12)
    t = np.arange(0, 1000)
    np.testing.assert_allclose(embed_time(cfg, t)[:, 2:4], embed_time(cfg, t + 10)[:, 2:4], atol=1e-9)


def test_classical_base_available():
    cfg = EmbeddingConfig(frequency_base=10000)
    assert cfg.base == 10000.0
    assert cfg.frequencies[-1] == pytest.approx(10000 ** (-48 / 50))


def test_distinct_over_first_thousand_ticks():
    X = embed_many(EmbeddingConfig(), np.full(1000, 3), np.arange(1000))
    d = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(d, np.inf)
    assert d.min() > 1e-9


@pytest.mark.parametrize("base", [None, 10000.0])
def test_time_block_injective_up_to_1e5(base):
    cfg = EmbeddingConfig(frequency_base=base)
    T = embed_time(cfg, np.arange(100_001))
    # near-duplicate rows would sit next to each other after a lexicographic sort
    order = np.lexsort(T.T[::-1])
    gaps = np.abs(np.diff(T[order], axis=0)).max(axis=1)
    assert gaps.min() > 1e-9


def test_scalar_position_mode():
    cfg = EmbeddingConfig(position_mode="scalar")
    v = embed(cfg, 4, 3)
    assert cfg.dim == 51 and v[0] == 4.0


@pytest.mark.parametrize("p", [-1, 7])
def test_position_out_of_range(p):
    with pytest.raises(IndexError):
        embed(EmbeddingConfig(), p, 0)
    with pytest.raises(IndexError):
        embed_position(EmbeddingConfig(), [0, p])


def test_shape_mismatch():
    with pytest.raises(ValueError):
        embed_many(EmbeddingConfig(), [1, 2], [3])


@pytest.mark.parametrize("kwargs", [dict(time_dim=3), dict(time_dim=0), dict(frequency_base=1.0),
                                    dict(width=0), dict(position_mode="binary")])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        EmbeddingConfig(**kwargs)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 6), st.integers(0, 10**6), st.sampled_from([2, 8, 50]))
def test_feature_invariants(p, t, d):
    cfg = EmbeddingConfig(time_dim=d)
    v = embed(cfg, p, t)
    assert v.shape == (7 + d,)
    assert np.count_nonzero(v[:7]) == 1 and v[p] == 1.0
    assert np.all(np.abs(v[7:]) <= 1.0)
    assert np.array_equal(v, embed(cfg, p, t))
