import math
from fractions import Fraction

import numpy as np
import pytest

from degradecost.bounds import max_sq_deviation, punctured_delta_tilde
from degradecost.channel import Channel, joint_view, mutual_information, validate
from degradecost.errors import ChannelError, ResourceLimitError
from degradecost.hard import (HardChannelSpec, build_hard_channel, compositions,
                              hard_channel_mi, is_gallager_symmetric, posterior_of_label,
                              symmetry_orbits)
from degradecost.quantizer import delta_tilde

from oracles import hard_mi_q2

# closed form via the test oracle, frozen
HARD_MI_Q2_M64 = 0.20112570383224648


def test_spec_validation():
    with pytest.raises(ChannelError):
        HardChannelSpec(1, 3)
    with pytest.raises(ChannelError):
        HardChannelSpec(2, 0)


def test_binary_M1_is_noiseless():
    ch = build_hard_channel(HardChannelSpec(2, 1))
    assert ch.outputs == ((1, 0), (0, 1))
    assert [list(r) for r in ch.W] == [[1, 0], [0, 1]]
    assert mutual_information(ch) == pytest.approx(math.log(2), abs=1e-15)


@pytest.mark.parametrize("q,M,size", [(2, 4, 5), (3, 2, 6), (4, 8, 165), (5, 3, 35)])
def test_output_count(q, M, size):
    spec = HardChannelSpec(q, M)
    assert spec.size == size
    assert build_hard_channel(spec).n == size


def test_q3_M2_exact_rows():
    ch = build_hard_channel(HardChannelSpec(3, 2))
    assert ch.exact
    for x in range(3):
        assert sum(ch.W[x], Fraction(0)) == 1
    assert validate(ch).ok


def test_colex_order():
    labels = list(compositions(3, 2))
    assert labels == [(2, 0, 0), (1, 1, 0), (0, 2, 0), (1, 0, 1), (0, 1, 1), (0, 0, 2)]
    assert labels == sorted(labels, key=lambda j: j[::-1])


def test_entries_follow_formula():
    spec = HardChannelSpec(3, 4)
    ch = build_hard_channel(spec)
    for y, j in enumerate(ch.outputs):
        for x in range(3):
            assert ch.W[x, y] == Fraction(3 * j[x], 4 * spec.size)


@pytest.mark.parametrize("q,M,label,expected", [
    (4, 5, (5, 0, 0, 0), (1, 0, 0, 0)),
    (2, 2, (1, 1), (Fraction(1, 2), Fraction(1, 2))),
    (3, 3, (1, 1, 1), (Fraction(1, 3),) * 3),
])
def test_posterior_of_label(q, M, label, expected):
    assert posterior_of_label(HardChannelSpec(q, M), label) == expected


@pytest.mark.parametrize("label", [(1, 0), (1, 1, 0), (3, -1)])
def test_posterior_of_bad_label(label):
    with pytest.raises(ChannelError):
        posterior_of_label(HardChannelSpec(2, 2), label)


def test_posteriors_match_joint_view_exactly():
    spec = HardChannelSpec(3, 5)
    ch = build_hard_channel(spec)
    jv = joint_view(ch)
    assert all(p == Fraction(1, spec.size) for p in jv.py)
    for y, j in enumerate(ch.outputs):
        assert tuple(jv.posteriors[y]) == posterior_of_label(spec, j)


@pytest.mark.parametrize("q,M,orbits", [
    (2, 2, [(0, 2), (1,)]),
    (3, 1, [(0, 1, 2)]),
])
def test_orbits(q, M, orbits):
    assert symmetry_orbits(HardChannelSpec(q, M)) == orbits


def test_orbits_q3_M2():
    spec = HardChannelSpec(3, 2)
    orbits = symmetry_orbits(spec)
    labels = spec.labels()
    assert sorted(len(o) for o in orbits) == [3, 3]
    assert {tuple(sorted(labels[y])) for y in orbits[0]} == {(0, 0, 2)}
    assert {tuple(sorted(labels[y])) for y in orbits[1]} == {(0, 1, 1)}


def test_gallager_symmetry():
    spec = HardChannelSpec(4, 3)
    ch = build_hard_channel(spec)
    assert is_gallager_symmetric(ch, symmetry_orbits(spec))
    # a Z-channel-like matrix is not symmetric on a single block
    z = Channel([["1", "0"], ["1/3", "2/3"]])
    assert not is_gallager_symmetric(z, [(0, 1)])
    # rows permute each other but columns do not
    c = Channel([["1/2", "1/2", "0"], ["1/2", "0", "1/2"]])
    assert not is_gallager_symmetric(c, [(0, 1, 2)])


@pytest.mark.parametrize("q,M", [(2, 1), (2, 2), (2, 17), (3, 4), (4, 3), (5, 2)])
def test_mi_two_paths(q, M):
    spec = HardChannelSpec(q, M)
    assert hard_channel_mi(spec) == pytest.approx(mutual_information(build_hard_channel(spec)), abs=1e-10)


def test_mi_values():
    assert hard_channel_mi(HardChannelSpec(2, 1)) == pytest.approx(math.log(2), abs=1e-15)
    assert hard_channel_mi(HardChannelSpec(2, 2)) == pytest.approx(2 / 3 * math.log(2), abs=1e-15)
    spec = HardChannelSpec(2, 64)
    assert hard_channel_mi(spec) == pytest.approx(HARD_MI_Q2_M64, abs=1e-12)
    assert hard_mi_q2(64) == pytest.approx(HARD_MI_Q2_M64, abs=1e-15)
    assert mutual_information(build_hard_channel(spec)) == pytest.approx(HARD_MI_Q2_M64, abs=1e-10)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_mi_decreases_in_M(q):
    # W_1 is noiseless; finer grids put posteriors away from the vertices
    values = [hard_channel_mi(HardChannelSpec(q, M)) for M in range(1, 13)]
    assert values[0] == pytest.approx(math.log(q))
    assert all(a > b for a, b in zip(values, values[1:]))


def test_size_cap():
    with pytest.raises(ResourceLimitError):
        build_hard_channel(HardChannelSpec(10, 40))
    with pytest.raises(ResourceLimitError):
        hard_channel_mi(HardChannelSpec(3, 20), max_outputs=100)
    assert build_hard_channel(HardChannelSpec(3, 20), max_outputs=None).n == 231


def test_punctured_delta_tilde_not_larger(rng):
    spec = HardChannelSpec(3, 6)
    ch = build_hard_channel(spec)
    labels = spec.labels()
    for _ in range(200):
        A = rng.choice(ch.n, size=int(rng.integers(1, 10)), replace=False)
        pts = np.array([[j / spec.M for j in labels[y][:-1]] for y in A])
        assert punctured_delta_tilde(pts, spec.size) <= delta_tilde(ch, A) + 1e-15


def test_posterior_spread_condition(rng):
    # posterior sets from real channels never spread beyond squared radius 2
    for q in (2, 3, 5):
        spec = HardChannelSpec(q, 4)
        grid = np.array(spec.labels(), dtype=float) / spec.M
        assert max_sq_deviation(grid[:, :-1]) <= 2
        for _ in range(50):
            pts = rng.dirichlet(np.ones(q) * 0.2, size=int(rng.integers(1, 20)))
            w = rng.random(len(pts))
            assert max_sq_deviation(pts[:, :-1], w) <= 2
            assert max_sq_deviation(pts, w) <= 2
