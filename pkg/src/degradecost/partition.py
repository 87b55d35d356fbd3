"""Set partitions of an output alphabet {0, ..., n-1}.

A partition defines a deterministic degrader: every output in block i is
mapped to the i-th output letter of the degraded channel. Blocks are kept in
canonical form (each block sorted, blocks ordered by their smallest member),
so two equal partitions compare equal and sort lexicographically.
"""

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import ChannelError


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[int, ...], ...]

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], n: int | None = None) -> "Partition":
        canon = []
        seen: set[int] = set()
        for block in blocks:
            b = tuple(sorted(int(y) for y in block))
            if not b:
                raise ChannelError("partition has an empty block")
            if len(set(b)) != len(b) or seen.intersection(b):
                raise ChannelError(f"partition blocks overlap at {sorted(seen.intersection(b) or b)}")
            seen.update(b)
            canon.append(b)
        if not canon:
            raise ChannelError("partition has no blocks")
        canon.sort(key=lambda b: b[0])
        part = cls(tuple(canon))
        if n is not None:
            part.check(n)
        return part

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(tuple((y,) for y in range(n)))

    @classmethod
    def whole(cls, n: int) -> "Partition":
        return cls((tuple(range(n)),))

    @classmethod
    def from_rgs(cls, rgs: Sequence[int]) -> "Partition":
        """Build from a restricted growth string (block index per element)."""
        blocks: list[list[int]] = []
        for y, b in enumerate(rgs):
            if b == len(blocks):
                blocks.append([])
            elif b > len(blocks):
                raise ChannelError(f"not a restricted growth string: {list(rgs)}")
            blocks[b].append(y)
        return cls(tuple(tuple(b) for b in blocks))

    @classmethod
    def from_masks(cls, masks: Iterable[int]) -> "Partition":
        return cls.from_blocks(_mask_members(m) for m in masks)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def size(self) -> int:
        """Number of elements covered."""
        return sum(len(b) for b in self.blocks)

    def check(self, n: int) -> None:
        """Raise ChannelError unless this is a valid partition of range(n)."""
        members = [y for b in self.blocks for y in b]
        if any(len(b) == 0 for b in self.blocks):
            raise ChannelError("partition has an empty block")
        if len(members) != len(set(members)):
            raise ChannelError("partition blocks overlap")
        missing = set(range(n)) - set(members)
        extra = set(members) - set(range(n))
        if extra:
            raise ChannelError(f"partition refers to unknown outputs {sorted(extra)}")
        if missing:
            raise ChannelError(f"partition does not cover outputs {sorted(missing)}")

    def block_of(self) -> list[int]:
        """Block index for every element."""
        out = [0] * self.size
        for i, b in enumerate(self.blocks):
            for y in b:
                out[y] = i
        return out

    def compose(self, outer: "Partition") -> "Partition":
        """Partition obtained by first merging by self, then merging the
        resulting letters by outer."""
        outer.check(len(self))
        return Partition.from_blocks(
            [y for i in ob for y in self.blocks[i]] for ob in outer.blocks
        )

    def to_json(self) -> list[list[int]]:
        return [list(b) for b in self.blocks]


def _mask_members(mask: int) -> list[int]:
    out = []
    y = 0
    while mask:
        if mask & 1:
            out.append(y)
        mask >>= 1
        y += 1
    return out


def iter_block_masks(n: int, max_blocks: int | None = None,
                     exact_blocks: int | None = None) -> Iterator[tuple[int, ...]]:
    """Enumerate all set partitions of range(n) as tuples of bit masks.

    Enumeration follows restricted growth strings in lexicographic order;
    blocks appear in order of their smallest member. max_blocks caps the
    block count, exact_blocks keeps only partitions with that many blocks.
    """
    if n < 1:
        return
    cap = n if max_blocks is None else min(n, max_blocks)
    if exact_blocks is not None:
        cap = min(cap, exact_blocks)
    masks: list[int] = []

    def rec(y: int) -> Iterator[tuple[int, ...]]:
        if y == n:
            if exact_blocks is None or len(masks) == exact_blocks:
                yield tuple(masks)
            return
        # not enough elements left to open the required number of blocks
        if exact_blocks is not None and len(masks) + (n - y) < exact_blocks:
            return
        bit = 1 << y
        for i in range(len(masks)):
            masks[i] |= bit
            yield from rec(y + 1)
            masks[i] ^= bit
        if len(masks) < cap:
            masks.append(bit)
            yield from rec(y + 1)
            masks.pop()

    yield from rec(0)


def iter_rgs(n: int, max_blocks: int | None = None) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length n, lexicographic order."""
    for masks in iter_block_masks(n, max_blocks):
        rgs = [0] * n
        for i, m in enumerate(masks):
            for y in _mask_members(m):
                rgs[y] = i
        yield tuple(rgs)
