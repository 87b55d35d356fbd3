"""q-ary polar transforms and degrade-after-each-step construction.

Inputs are identified with Z_q (input letter x <-> residue x - 1). One
polarization step maps W to

    W-(y1, y2 | u1)     = (1/q) sum_u2 W(y1 | u1 + u2) W(y2 | u2)
    W+(y1, y2, u1 | u2) = (1/q) W(y1 | u1 + u2) W(y2 | u2)

The construction degrades the channel to at most L outputs, then alternates
a transform with another degrading step until the requested depth. Because
a channel that already has at most L outputs passes through untouched, the
construction run on W and the run on its initial degradation Q are the same
computation.
"""

import csv
import io
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import fmt
from .channel import Channel, apply_partition, float_view, mutual_information
from .errors import ChannelError, ResourceLimitError
from .hard import HardChannelSpec, build_hard_channel, hard_channel_mi
from .partition import Partition
from .quantizer import DegradeResult, degrade, evaluate_partition

log = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 10
DEFAULT_MAX_WORK = 2**24
POSTERIOR_DECIMALS = 12


def _uniform_float(ch: Channel) -> np.ndarray:
    px = ch.pxf
    if not np.allclose(px, 1.0 / ch.q, rtol=0, atol=1e-12):
        raise ChannelError("polar transforms need a uniform input distribution")
    return ch.Wf


def polar_minus(ch: Channel) -> Channel:
    W = _uniform_float(ch)
    q, n = W.shape
    out = np.zeros((q, n, n))
    for u1 in range(q):
        for u2 in range(q):
            out[u1] += np.outer(W[(u1 + u2) % q], W[u2])
    out /= q
    labels = [(a, b) for a in range(n) for b in range(n)]
    return Channel(out.reshape(q, n * n), None, labels)


def polar_plus(ch: Channel) -> Channel:
    W = _uniform_float(ch)
    q, n = W.shape
    # out[u2, y1, y2, u1]
    out = np.zeros((q, n, n, q))
    for u2 in range(q):
        for u1 in range(q):
            out[u2, :, :, u1] = np.outer(W[(u1 + u2) % q], W[u2])
    out /= q
    labels = [(a, b, u1) for a in range(n) for b in range(n) for u1 in range(q)]
    return Channel(out.reshape(q, n * n * q), None, labels)


def map_error(ch: Channel) -> float:
    """Error probability of the MAP decision: 1 - sum_y max_x P(x, y)."""
    return float(1.0 - ch.joint.max(axis=1).sum())


def duplicate_posterior_partition(ch: Channel) -> Partition:
    """Group outputs whose posteriors agree to POSTERIOR_DECIMALS places;
    zero-probability outputs join the first group. Merging these is free."""
    jv = float_view(ch)
    groups: dict[bytes, list[int]] = {}
    zero = []
    rounded = np.round(jv.posteriors, POSTERIOR_DECIMALS) + 0.0
    for y in range(ch.n):
        if not jv.defined[y]:
            zero.append(y)
            continue
        groups.setdefault(rounded[y].tobytes(), []).append(y)
    blocks = list(groups.values())
    blocks[0] = blocks[0] + zero
    return Partition.from_blocks(blocks, ch.n)


def degrading_partition(ch: Channel, L: int, method: str = "greedy") -> Partition | None:
    """Partition used to bring ch down to at most L outputs; None when ch
    already has at most L outputs. Duplicate posteriors are merged first."""
    if ch.n <= L:
        return None
    dedup = duplicate_posterior_partition(ch)
    if len(dedup) <= L:
        return dedup
    small = apply_partition(ch, dedup, range(len(dedup)))
    return dedup.compose(degrade(small, L, method).partition)


def degrade_to(ch: Channel, L: int, method: str = "greedy") -> Channel:
    """Channel with at most L outputs (relabelled 0..k-1), or ch itself when
    it is already small enough."""
    part = degrading_partition(ch, L, method)
    if part is None:
        return ch
    return apply_partition(ch, part, range(len(part)))


@dataclass(frozen=True, eq=False)
class PolarNode:
    path: str
    channel: Channel
    mi: float
    pe: float

    @property
    def output_size(self) -> int:
        return self.channel.n


def _node(path: str, ch: Channel) -> PolarNode:
    return PolarNode(path, ch, mutual_information(ch), map_error(ch))


def check_construct_args(q: int, depth: int, L: int, method: str,
                         max_depth: int = DEFAULT_MAX_DEPTH,
                         max_work: int = DEFAULT_MAX_WORK) -> None:
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    if L < q:
        raise ValueError(f"L={L} must be at least q={q}")
    if method == "dp" and q != 2:
        raise ChannelError("method 'dp' is only available for q = 2")
    if depth > max_depth:
        raise ResourceLimitError(f"depth {depth} exceeds the guard of {max_depth}")
    if 2**depth * L * L > max_work:
        raise ResourceLimitError(
            f"2^depth * L^2 = {2**depth * L * L} exceeds the work guard of {max_work}")


def construct(ch: Channel, depth: int, L: int, method: str = "greedy",
              max_depth: int = DEFAULT_MAX_DEPTH,
              max_work: int = DEFAULT_MAX_WORK) -> list[PolarNode]:
    """Leaves of the degrade-after-each-step construction, sorted by path.

    Paths are strings over '-' and '+' read from the root.
    """
    check_construct_args(ch.q, depth, L, method, max_depth, max_work)
    _uniform_float(ch)
    level = [("", degrade_to(ch, L, method))]
    for _ in range(depth):
        nxt = []
        for path, c in level:
            nxt.append((path + "-", degrade_to(polar_minus(c), L, method)))
            nxt.append((path + "+", degrade_to(polar_plus(c), L, method)))
        level = nxt
        log.debug("polar level done: %d nodes", len(level))
    return sorted((_node(p, c) for p, c in level), key=lambda nd: nd.path)


LEAF_FIELDS = ("path", "mi_nats", "pe", "output_size")


def leaf_rows(nodes: Sequence[PolarNode]) -> list[list[str]]:
    return [[nd.path, fmt(nd.mi), fmt(nd.pe), str(nd.output_size)] for nd in nodes]


def leaf_table_csv(nodes: Sequence[PolarNode]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LEAF_FIELDS)
    w.writerows(leaf_rows(nodes))
    return buf.getvalue()


@dataclass(frozen=True, eq=False)
class RateLossReport:
    q: int
    M: int
    L: int
    depth: int
    method: str
    mi_W: float
    mi_Q: float
    initial: DegradeResult | None
    leaves: list[PolarNode]
    identical: bool
    threshold: float

    @property
    def drop(self) -> float:
        return self.mi_W - self.mi_Q

    @property
    def mean_leaf_mi(self) -> float:
        return float(np.mean([nd.mi for nd in self.leaves]))

    @property
    def good_fraction(self) -> float:
        """Fraction of leaves with mi >= threshold * ln q."""
        cut = self.threshold * np.log(self.q)
        return float(np.mean([nd.mi >= cut for nd in self.leaves]))

    def summary(self) -> dict:
        return {
            "q": self.q, "M": self.M, "L": self.L, "depth": self.depth,
            "method": self.method, "mi_W": self.mi_W, "mi_Q": self.mi_Q,
            "drop": self.drop,
            "delta_tilde_sum": None if self.initial is None else self.initial.delta_tilde_sum,
            "mean_leaf_mi": self.mean_leaf_mi,
            "good_fraction": self.good_fraction,
            "identical": self.identical,
        }


def rate_loss_demo(q: int, M: int, L: int, depth: int, method: str = "greedy",
                   threshold: float = 0.99, max_outputs: int | None = None,
                   max_depth: int = DEFAULT_MAX_DEPTH,
                   max_work: int = DEFAULT_MAX_WORK) -> RateLossReport:
    """Run the construction on W_M and on its initial degradation Q and
    confirm that the two runs are indistinguishable."""
    spec = HardChannelSpec(q, M)
    check_construct_args(q, depth, L, method, max_depth, max_work)
    kw = {} if max_outputs is None else {"max_outputs": max_outputs}
    W = build_hard_channel(spec, **kw).to_float()
    mi_W = hard_channel_mi(spec, **kw)
    part = degrading_partition(W, L, method)
    if part is None:
        Q, initial = W, None
    else:
        initial = evaluate_partition(W, part, method, labels=range(len(part)))
        Q = initial.degraded
    leaves_W = construct(W, depth, L, method, max_depth, max_work)
    leaves_Q = construct(Q, depth, L, method, max_depth, max_work)
    identical = (leaf_table_csv(leaves_W) == leaf_table_csv(leaves_Q)
                 and all(a.channel.same_as(b.channel) for a, b in zip(leaves_W, leaves_Q)))
    return RateLossReport(q, M, L, depth, method, mi_W, mutual_information(Q),
                          initial, leaves_W, identical, threshold)
