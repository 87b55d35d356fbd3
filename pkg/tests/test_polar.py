import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degradecost.channel import Channel, apply_partition, mutual_information
from degradecost.errors import ChannelError, ResourceLimitError
from degradecost.hard import HardChannelSpec, build_hard_channel
from degradecost.partition import Partition
from degradecost.polar import (construct, degrade_to, duplicate_posterior_partition, leaf_table_csv,
                               map_error, polar_minus, polar_plus, rate_loss_demo)

from conftest import random_channel, random_partition_blocks

seeds = st.integers(0, 2**32 - 1)

# construct(W_64, depth 6, L 16, dp), frozen from a run checked against the oracle fixtures
W64_L16_MEAN_LEAF_MI = 0.19623775123716045
W64_L16_DEGRADED_MI = 0.1997066767102138


def noiseless(q):
    return Channel(np.eye(q))


def useless(q, n=3, seed=0):
    row = np.random.default_rng(seed).dirichlet(np.ones(n))
    return Channel(np.tile(row, (q, 1)))


def hard(q, M):
    return build_hard_channel(HardChannelSpec(q, M)).to_float()


class TestTransforms:
    @pytest.mark.parametrize("q", [2, 3, 5])
    def test_noiseless(self, q):
        assert mutual_information(polar_minus(noiseless(q))) == pytest.approx(math.log(q), abs=1e-12)
        assert mutual_information(polar_plus(noiseless(q))) == pytest.approx(math.log(q), abs=1e-12)

    @pytest.mark.parametrize("q", [2, 3])
    def test_useless(self, q):
        assert mutual_information(polar_minus(useless(q))) == pytest.approx(0, abs=1e-12)
        assert mutual_information(polar_plus(useless(q))) == pytest.approx(0, abs=1e-12)

    def test_shapes_and_labels(self):
        W = hard(3, 2)
        m, p = polar_minus(W), polar_plus(W)
        assert m.n == 36 and p.n == 108
        assert m.outputs[7] == (1, 1) and p.outputs[5] == (0, 1, 2)
        assert np.allclose(m.Wf.sum(axis=1), 1) and np.allclose(p.Wf.sum(axis=1), 1)

    def test_binary_minus_is_xor_channel(self):
        # for a BSC(e) the minus channel is a BSC(2e(1-e)) seen twice
        e = 0.1
        bsc = Channel([[1 - e, e], [e, 1 - e]])
        e2 = 2 * e * (1 - e)
        target = math.log(2) + e2 * math.log(e2) + (1 - e2) * math.log(1 - e2)
        assert mutual_information(polar_minus(bsc)) == pytest.approx(target, abs=1e-12)

    def test_conservation_hard(self):
        W = build_hard_channel(HardChannelSpec(2, 2))
        total = mutual_information(polar_minus(W)) + mutual_information(polar_plus(W))
        assert total == pytest.approx(2 * (2 / 3) * math.log(2), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(seeds)
    def test_conservation_and_extremes(self, seed):
        rng = np.random.default_rng(seed)
        ch = random_channel(rng, q=int(rng.integers(2, 5)), n=int(rng.integers(1, 7)), uniform=True)
        i, im, ip = (mutual_information(c) for c in (ch, polar_minus(ch), polar_plus(ch)))
        assert im + ip == pytest.approx(2 * i, abs=1e-9)
        assert im <= i + 1e-12 and i <= ip + 1e-12

    def test_non_uniform_input_rejected(self):
        ch = Channel([[0.9, 0.1], [0.2, 0.8]], [0.3, 0.7])
        with pytest.raises(ChannelError):
            polar_minus(ch)
        with pytest.raises(ChannelError):
            polar_plus(ch)


class TestDegradeTo:
    def test_passthrough(self):
        W = hard(2, 3)
        assert degrade_to(W, 4) is W

    def test_duplicates_merge_first(self):
        W = hard(2, 2)
        m = polar_minus(W)
        dedup = duplicate_posterior_partition(m)
        assert len(dedup) < m.n
        merged = apply_partition(m, dedup)
        assert mutual_information(merged) == pytest.approx(mutual_information(m), abs=1e-12)

    def test_zero_columns_absorbed(self):
        ch = Channel([[0.0, 0.5, 0.5], [0.0, 0.5, 0.5]])
        assert duplicate_posterior_partition(ch).blocks == ((0, 1, 2),)

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_output_size_and_labels(self, seed):
        rng = np.random.default_rng(seed)
        ch = random_channel(rng, q=2, n=int(rng.integers(3, 10)), uniform=True)
        L = int(rng.integers(2, ch.n))
        Q = degrade_to(ch, L, "dp")
        assert Q.n <= L
        assert Q.outputs == tuple(range(Q.n))
        assert mutual_information(Q) <= mutual_information(ch) + 1e-12


class TestConstruct:
    def test_depth_zero(self):
        W = hard(2, 16)
        (leaf,) = construct(W, 0, 4, "dp")
        assert leaf.path == ""
        assert leaf.mi == pytest.approx(mutual_information(degrade_to(W, 4, "dp")), abs=1e-15)

    def test_noiseless_depth3(self):
        leaves = construct(noiseless(2), 3, 2)
        assert len(leaves) == 8
        assert [nd.path for nd in leaves] == sorted(nd.path for nd in leaves)
        for nd in leaves:
            assert nd.mi == pytest.approx(math.log(2), abs=1e-12)
            assert nd.pe == pytest.approx(0, abs=1e-12)

    def test_hard_depth6_chain(self):
        W = hard(2, 64)
        leaves = construct(W, 6, 16, "dp")
        assert len(leaves) == 64
        mean = float(np.mean([nd.mi for nd in leaves]))
        dmi = mutual_information(degrade_to(W, 16, "dp"))
        assert mean <= dmi <= mutual_information(W)
        assert mean == pytest.approx(W64_L16_MEAN_LEAF_MI, abs=1e-10)
        assert dmi == pytest.approx(W64_L16_DEGRADED_MI, abs=1e-12)
        for nd in leaves:
            assert 0 <= nd.mi <= math.log(2)
            assert 0 <= nd.pe <= 0.5 + 1e-12
            assert nd.output_size <= 16

    @pytest.mark.parametrize("q,M,method", [(2, 16, "dp"), (2, 16, "greedy"), (2, 64, "dp"),
                                            (3, 6, "greedy")])
    def test_leaf_mi_monotone_in_L(self, q, M, method):
        W = hard(q, M)
        Ls = [L for L in (2, 4, 8, 16) if L >= q]
        runs = [[nd.mi for nd in construct(W, 4 if q == 2 else 2, L, method)] for L in Ls]
        for small, large in zip(runs, runs[1:]):
            assert all(a <= b + 1e-12 for a, b in zip(small, large))

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_further_degrading_never_lowers_pe(self, seed):
        rng = np.random.default_rng(seed)
        ch = random_channel(rng, uniform=True)
        part = Partition.from_blocks(random_partition_blocks(rng, ch.n), ch.n)
        assert map_error(apply_partition(ch, part)) >= map_error(ch) - 1e-12

    def test_guards(self):
        W = hard(2, 4)
        with pytest.raises(ValueError):
            construct(W, -1, 4)
        with pytest.raises(ValueError):
            construct(hard(3, 2), 1, 2)
        with pytest.raises(ChannelError):
            construct(hard(3, 2), 1, 4, "dp")
        with pytest.raises(ResourceLimitError):
            construct(W, 11, 4)
        with pytest.raises(ResourceLimitError):
            construct(W, 8, 4, max_work=1000)

    def test_csv(self):
        text = leaf_table_csv(construct(noiseless(2), 1, 2))
        assert text.splitlines() == ["path,mi_nats,pe,output_size",
                                     "+,0.69314718056,0,2", "-,0.69314718056,0,2"]


class TestRateLoss:
    def test_large_L_is_lossless(self):
        rep = rate_loss_demo(2, 4, 8, 2, "dp")
        assert rep.initial is None
        assert rep.drop == pytest.approx(0, abs=1e-15)
        assert rep.identical

    def test_drop_dominates_delta_tilde(self):
        rep = rate_loss_demo(2, 64, 4, 4, "greedy")
        assert rep.drop >= rep.initial.delta_tilde_sum > 0
        assert rep.drop == pytest.approx(rep.initial.drop, abs=1e-12)
        assert rep.identical

    def test_summary_fixture(self):
        s = rate_loss_demo(2, 64, 16, 6, "dp").summary()
        assert s["identical"] is True
        assert s["mean_leaf_mi"] == pytest.approx(W64_L16_MEAN_LEAF_MI, abs=1e-10)
        assert s["mi_Q"] == pytest.approx(W64_L16_DEGRADED_MI, abs=1e-12)
        assert s["mi_W"] == pytest.approx(0.20112570383224648, abs=1e-12)
        assert s["good_fraction"] == 5 / 64

    def test_q3(self):
        rep = rate_loss_demo(3, 4, 5, 2, "greedy")
        assert rep.identical
        assert 0 <= rep.good_fraction <= 1
