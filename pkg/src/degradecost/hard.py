"""The hard channel W_M.

For input alphabet size q and grid parameter M, the outputs of W_M are the
compositions j = (j_1, ..., j_q) of M into q nonnegative parts, and

    W_M(j | x) = q * j_x / (M * C(M + q - 1, q - 1)).

Under the uniform input distribution every output is equally likely and the
posterior of output j is j / M, so the posteriors form the 1/M grid on the
probability simplex.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator, Sequence

import numpy as np

from .channel import Channel
from .entropy import entropy_rows
from .errors import ChannelError, ResourceLimitError

DEFAULT_MAX_OUTPUTS = 10**6


@dataclass(frozen=True)
class HardChannelSpec:
    q: int
    M: int

    def __post_init__(self):
        if int(self.q) < 2:
            raise ChannelError(f"hard channel needs q >= 2, got {self.q}")
        if int(self.M) < 1:
            raise ChannelError(f"hard channel needs M >= 1, got {self.M}")

    @property
    def size(self) -> int:
        return comb(self.M + self.q - 1, self.q - 1)

    def labels(self) -> list[tuple[int, ...]]:
        return list(compositions(self.q, self.M))

    def check_size(self, max_outputs: int | None = DEFAULT_MAX_OUTPUTS) -> None:
        if max_outputs is not None and self.size > max_outputs:
            raise ResourceLimitError(
                f"W_M with q={self.q}, M={self.M} has {self.size} outputs, "
                f"above the cap of {max_outputs}; raise --max-outputs to allow it")


def compositions(q: int, M: int) -> Iterator[tuple[int, ...]]:
    """Compositions of M into q nonnegative parts, colexicographic order."""
    if q == 1:
        yield (M,)
        return
    for last in range(M + 1):
        for head in compositions(q - 1, M - last):
            yield head + (last,)


def check_label(spec: HardChannelSpec, label: Sequence[int]) -> tuple[int, ...]:
    label = tuple(int(j) for j in label)
    if len(label) != spec.q or any(j < 0 for j in label) or sum(label) != spec.M:
        raise ChannelError(f"{label} is not a composition of M={spec.M} into q={spec.q} parts")
    return label


def build_hard_channel(spec: HardChannelSpec, max_outputs: int | None = DEFAULT_MAX_OUTPUTS) -> Channel:
    """W_M with exact rational entries and the uniform input distribution."""
    spec.check_size(max_outputs)
    q, M = spec.q, spec.M
    labels = spec.labels()
    denom = M * spec.size
    W = np.empty((q, len(labels)), dtype=object)
    for y, j in enumerate(labels):
        for x in range(q):
            W[x, y] = Fraction(q * j[x], denom)
    return Channel(W, None, tuple(labels))


def posterior_of_label(spec: HardChannelSpec, label: Sequence[int]) -> tuple[Fraction, ...]:
    label = check_label(spec, label)
    return tuple(Fraction(j, spec.M) for j in label)


def symmetry_orbits(spec: HardChannelSpec) -> list[tuple[int, ...]]:
    """Output indices grouped by the multiset of their composition entries.

    Orbits are listed in order of their first member.
    """
    groups: dict[tuple[int, ...], list[int]] = {}
    for y, j in enumerate(spec.labels()):
        groups.setdefault(tuple(sorted(j)), []).append(y)
    return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def is_gallager_symmetric(ch: Channel, blocks: Sequence[Sequence[int]]) -> bool:
    """Whether each block's submatrix has rows that permute its first row and
    columns that permute its first column."""
    for b in blocks:
        sub = ch.W[:, list(b)]
        first_row = sorted(sub[0])
        if any(sorted(row) != first_row for row in sub[1:]):
            return False
        first_col = sorted(sub[:, 0])
        if any(sorted(sub[:, k]) != first_col for k in range(1, sub.shape[1])):
            return False
    return True


def hard_channel_mi(spec: HardChannelSpec, max_outputs: int | None = DEFAULT_MAX_OUTPUTS) -> float:
    """I(W_M) = ln q - mean over outputs of h(j / M), without building W."""
    spec.check_size(max_outputs)
    grid = np.array(spec.labels(), dtype=float) / spec.M
    return float(np.log(spec.q) - entropy_rows(grid).mean())
