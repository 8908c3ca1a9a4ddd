"""Grid maps, stream discipline, and coupled Brownian path generation."""

import math

import numpy as np
import pytest

from sde_rand_em import (
    BrownianPath,
    RandomOffsets,
    RngStream,
    TimeGrid,
    coarsen_path,
    kappa,
    kappa_tau,
    sample_brownian,
    sample_offsets,
)


def test_kappa_grid_values():
    assert kappa(4, 0.6) == 0.5
    assert kappa(4, 0.5) == 0.5
    assert kappa(10, 0.99) == 0.9
    assert kappa(5, 0.0) == 0.0
    assert kappa(5, 1.0) == 1.0


@pytest.mark.parametrize("s", [-0.1, 1.1, 2.0])
def test_kappa_domain(s):
    with pytest.raises(ValueError):
        kappa(4, s)


def test_kappa_tau_values():
    offsets = RandomOffsets(np.array([0.3, 0.4, 0.5, 0.6]))
    assert kappa_tau(4, 0.6, offsets) == pytest.approx(0.625, abs=1e-15)
    assert kappa_tau(2, 0.0, RandomOffsets(np.array([0.25, 0.5]))) == pytest.approx(
        0.125, abs=1e-15
    )
    assert kappa_tau(2, 0.75, RandomOffsets(np.array([0.5, 0.9]))) == pytest.approx(
        0.95, abs=1e-15
    )


def test_kappa_tau_rejects_short_offsets_and_bad_domain():
    offsets = RandomOffsets(np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        kappa_tau(4, 0.6, offsets)
    with pytest.raises(ValueError):
        kappa_tau(2, 1.0, offsets)


def test_kappa_sandwich():
    gen = np.random.default_rng(0)
    for _ in range(2000):
        n = int(gen.integers(1, 600))
        s = float(gen.random())
        offsets = sample_offsets(n, RngStream(1).child(n, "offsets", n))
        left = kappa(n, s)
        shifted = kappa_tau(n, s, offsets)
        assert left <= s
        assert s - left < 1.0 / n
        assert left < shifted < left + 1.0 / n


def test_timegrid_nodes():
    grid = TimeGrid(8)
    assert grid.node(0) == 0.0
    assert grid.node(8) == 1.0
    assert np.array_equal(grid.nodes(), np.arange(9) / 8)
    with pytest.raises(ValueError):
        TimeGrid(0)


def test_brownian_determinism_and_shape():
    stream = RngStream(123).child(5, "brownian", 64)
    a = sample_brownian(64, 3, stream)
    b = sample_brownian(64, 3, stream)
    assert np.array_equal(a.increments, b.increments)
    assert np.array_equal(a.positions, b.positions)
    assert a.positions.shape == (65, 3)
    assert np.all(a.positions[0] == 0.0)


def test_distinct_streams_differ():
    root = RngStream(123)
    a = sample_brownian(32, 1, root.child(0, "brownian", 32))
    b = sample_brownian(32, 1, root.child(1, "brownian", 32))
    c = sample_brownian(32, 1, root.child(0, "offsets", 32))
    assert not np.array_equal(a.increments, b.increments)
    assert not np.array_equal(a.increments, c.increments)


def test_brownian_increment_variance():
    # Pooled variance of 1e6 increments at n_fine=256 must sit within 1% of 1/256.
    root = RngStream(2024)
    samples = []
    for m in range(4000):
        samples.append(sample_brownian(256, 1, root.child(m, "brownian", 256)).increments)
    pooled = np.concatenate(samples).ravel()
    assert pooled.size >= 1_000_000
    var = pooled.var()
    assert abs(var - 1.0 / 256) < 0.01 / 256


def test_brownian_terminal_mean_zero():
    # Terminal positions over 1e5 effective paths: zero-mean Gaussian.
    gen = RngStream(55).child(0, "brownian", 8).generator()
    increments = gen.standard_normal((100_000, 8)) * math.sqrt(1.0 / 8)
    terminal = increments.sum(axis=1)
    assert abs(terminal.mean()) < 4.0 * terminal.std() / math.sqrt(terminal.size)


def test_coarsen_shared_nodes_bit_exact():
    path = sample_brownian(512, 2, RngStream(9).child(0, "brownian", 512))
    for factor in (2, 4, 8, 64, 512):
        coarse = coarsen_path(path, factor)
        assert np.array_equal(coarse.positions, path.positions[::factor])
        assert coarse.n_fine == 512 // factor


def test_coarsen_composes_bit_exact():
    path = sample_brownian(256, 1, RngStream(10).child(0, "brownian", 256))
    nested = coarsen_path(coarsen_path(path, 2), 2)
    direct = coarsen_path(path, 4)
    assert np.array_equal(nested.increments, direct.increments)
    assert np.array_equal(nested.positions, direct.positions)


def test_coarsen_total_sum_and_block_sums():
    path = sample_brownian(8, 1, RngStream(11).child(0, "brownian", 8))
    total = coarsen_path(path, 8)
    assert total.n_fine == 1
    assert np.array_equal(total.increments[0], path.positions[8])
    # Increments agree with independent left-to-right block summation.
    coarse = coarsen_path(path, 2)
    for j in range(4):
        block = path.increments[2 * j] + path.increments[2 * j + 1]
        assert coarse.increments[j, 0] == pytest.approx(block[0], abs=1e-15)


def test_coarsen_zero_input():
    path = BrownianPath.from_increments(np.zeros((16, 2)))
    coarse = coarsen_path(path, 4)
    assert np.all(coarse.increments == 0.0)
    assert np.all(coarse.positions == 0.0)


def test_coarsen_rejects_non_divisor():
    path = sample_brownian(8, 1, RngStream(12).child(0, "brownian", 8))
    with pytest.raises(ValueError):
        coarsen_path(path, 3)


def test_offsets_statistics_and_contract():
    offsets = sample_offsets(1_000_000, RngStream(303).child(0, "offsets", 1_000_000))
    assert np.all(offsets.taus > 0.0)
    assert np.all(offsets.taus < 1.0)
    assert abs(offsets.taus.mean() - 0.5) < 0.002
    again = sample_offsets(1_000_000, RngStream(303).child(0, "offsets", 1_000_000))
    assert np.array_equal(offsets.taus, again.taus)


def test_offsets_validation():
    with pytest.raises(ValueError):
        RandomOffsets(np.array([0.0, 0.5]))
    with pytest.raises(ValueError):
        RandomOffsets(np.array([0.5, 1.0]))


def test_stream_independence_brownian_vs_offsets():
    n = 100_000
    root = RngStream(77)
    inc = sample_brownian(n, 1, root.child(0, "brownian", n)).increments.ravel()
    taus = sample_offsets(n, root.child(0, "offsets", n)).taus
    corr = np.corrcoef(inc, taus)[0, 1]
    assert abs(corr) < 4.0 / math.sqrt(n)


def test_unknown_stream_tag_rejected():
    with pytest.raises(ValueError):
        RngStream(1).child("not-a-tag")


def test_immutability():
    path = sample_brownian(8, 1, RngStream(1).child(0, "brownian", 8))
    with pytest.raises(ValueError):
        path.increments[0] = 1.0
    offsets = sample_offsets(4, RngStream(1).child(0, "offsets", 4))
    with pytest.raises(ValueError):
        offsets.taus[0] = 0.5
