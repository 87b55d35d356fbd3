"""Merge costs and degrading (output quantization) algorithms.

Merging an output set A of a channel into a single letter lowers I(X;Y) by

    delta(A) = pi * (h(sum_j theta_j p_j) - sum_j theta_j h(p_j))

where pi = P_Y(A), theta_j = P_Y(y_j) / pi and p_j is the posterior of y_j.
Strong concavity of the entropy (modulus 1 on the simplex) gives the
quadratic lower bound

    delta_tilde(A) = (pi / 2) * sum_j theta_j ||p_j - p_bar||^2 <= delta(A).

Three degraders are provided: exhaustive search over set partitions (the
optimum, small alphabets only), greedy pairwise merging, and an exact
dynamic program for binary-input channels.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channel import Channel, apply_partition, float_view, mutual_information
from .entropy import entropy, entropy_rows, unnormalized_entropy
from .errors import ChannelError, ResourceLimitError
from .partition import Partition, iter_block_masks

__all__ = [
    "DegradeResult", "entropy", "delta", "delta_tilde", "delta_tilde_forms",
    "holder_defect_check", "degrade_exhaustive", "degrade_greedy",
    "degrade_binary_dp", "degrade", "evaluate_partition", "METHODS",
]

log = logging.getLogger(__name__)

EXHAUSTIVE_MAX_OUTPUTS = 12
TIE_TOL = 1e-13
METHODS = ("exhaustive", "greedy", "dp")


def _output_set(ch: Channel, A: Iterable[int]) -> list[int]:
    A = [int(y) for y in A]
    if not A:
        raise ChannelError("merge set is empty")
    if len(set(A)) != len(A):
        raise ChannelError(f"merge set has repeated outputs: {A}")
    bad = [y for y in A if not 0 <= y < ch.n]
    if bad:
        raise ChannelError(f"outputs {bad} not in channel with {ch.n} outputs")
    return A


def _weights_and_posteriors(jv, A):
    py = jv.py[A]
    pi = float(py.sum())
    keep = py > 0
    return pi, py[keep] / pi if pi > 0 else py[keep], jv.posteriors[A][keep]


def _delta_from_view(jv, A) -> float:
    pi, theta, post = _weights_and_posteriors(jv, A)
    if pi == 0:
        return 0.0
    pbar = theta @ post
    return pi * (entropy(pbar) - float(theta @ entropy_rows(post)))


def _delta_tilde_from_view(jv, A) -> tuple[float, float]:
    pi, theta, post = _weights_and_posteriors(jv, A)
    if pi == 0:
        return 0.0, 0.0
    pbar = theta @ post
    centered = 0.5 * pi * float(theta @ ((post - pbar) ** 2).sum(axis=1))
    diff = post[:, None, :] - post[None, :, :]
    pairwise = 0.25 * pi * float(theta @ (diff ** 2).sum(axis=2) @ theta)
    return centered, pairwise


def delta(ch: Channel, A: Iterable[int]) -> float:
    """Exact mutual-information loss from merging output indices A."""
    return _delta_from_view(float_view(ch), _output_set(ch, A))


def delta_tilde_forms(ch: Channel, A: Iterable[int]) -> tuple[float, float]:
    """Quadratic merge-cost bound, as (centered form, pairwise form)."""
    return _delta_tilde_from_view(float_view(ch), _output_set(ch, A))


def delta_tilde(ch: Channel, A: Iterable[int]) -> float:
    return delta_tilde_forms(ch, A)[0]


def holder_defect_check(samples: Sequence[tuple[Sequence[float], float]]) -> tuple[float, float]:
    """Entropy defect of a mixture against its quadratic lower bound.

    ``samples`` is a list of (vector, weight) pairs with weights summing to 1
    and vector entries in [0, 1]. Returns (lhs, rhs) with
    lhs = h(sum theta a) - sum theta h(a) and rhs = 0.5 sum theta ||a - a_bar||^2;
    lhs >= rhs always holds.
    """
    vecs = np.array([np.asarray(v, dtype=float) for v, _ in samples])
    theta = np.array([float(w) for _, w in samples])
    if np.any(theta < 0):
        raise ValueError("weights must be nonnegative")
    if abs(theta.sum() - 1.0) > 1e-10:
        raise ValueError(f"weights sum to {theta.sum():.15g}, expected 1")
    if np.any(vecs < 0) or np.any(vecs > 1):
        raise ValueError("vector entries must lie in [0, 1]")
    abar = theta @ vecs
    lhs = float(entropy_rows(abar) - theta @ entropy_rows(vecs))
    rhs = 0.5 * float(theta @ ((vecs - abar) ** 2).sum(axis=1))
    return lhs, rhs


@dataclass(frozen=True, eq=False)
class DegradeResult:
    partition: Partition
    degraded: Channel
    drop: float
    per_block: tuple[tuple[float, float], ...]
    method: str = ""

    @property
    def delta_sum(self) -> float:
        return sum(d for d, _ in self.per_block)

    @property
    def delta_tilde_sum(self) -> float:
        return sum(t for _, t in self.per_block)

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "partition": self.partition.to_json(),
            "drop": self.drop,
            "per_block": [[d, t] for d, t in self.per_block],
        }


def evaluate_partition(ch: Channel, part: Partition, method: str = "",
                       labels: Sequence | None = None) -> DegradeResult:
    part.check(ch.n)
    Q = apply_partition(ch, part, labels)
    jv = float_view(ch)
    per_block = []
    for b in part.blocks:
        b = list(b)
        per_block.append((_delta_from_view(jv, b), _delta_tilde_from_view(jv, b)[0]))
    drop = mutual_information(ch) - mutual_information(Q)
    return DegradeResult(part, Q, drop, tuple(per_block), method)


def _check_L(ch: Channel, L: int) -> int:
    L = int(L)
    if not 1 <= L <= ch.n:
        raise ChannelError(f"L={L} out of range 1..{ch.n}")
    return L


def _subset_costs(J: np.ndarray) -> np.ndarray:
    """Merge cost of every subset of outputs, indexed by bit mask."""
    n, q = J.shape
    S = np.zeros((1 << n, q))
    G = np.zeros(1 << n)
    g = unnormalized_entropy(J)
    for b in range(n):
        lo, hi = 1 << b, 1 << (b + 1)
        S[lo:hi] = S[:lo] + J[b]
        G[lo:hi] = G[:lo] + g[b]
    return unnormalized_entropy(S) - G


def degrade_exhaustive(ch: Channel, L: int, mode: str = "at-most",
                       max_outputs: int = EXHAUSTIVE_MAX_OUTPUTS) -> DegradeResult:
    """Optimal deterministic degrading by enumerating every set partition.

    mode "at-most" searches partitions with at most L blocks, "exactly" with
    exactly L. Among partitions whose cost agrees to within 1e-13 the one with
    the lexicographically smallest canonical block tuple wins.
    """
    if mode not in ("at-most", "exactly"):
        raise ValueError(f"unknown mode {mode!r}")
    if ch.n > max_outputs:
        raise ResourceLimitError(
            f"exhaustive search over {ch.n} outputs exceeds the guard of {max_outputs}")
    L = _check_L(ch, L)
    cost = _subset_costs(ch.joint).tolist()
    best, best_masks, best_key = np.inf, None, None
    exact = L if mode == "exactly" else None
    for masks in iter_block_masks(ch.n, max_blocks=L, exact_blocks=exact):
        c = 0.0
        for m in masks:
            c += cost[m]
        if c < best - TIE_TOL:
            best, best_masks, best_key = c, masks, None
        elif c <= best + TIE_TOL:
            if best_key is None:
                best_key = Partition.from_masks(best_masks).blocks
            key = Partition.from_masks(masks).blocks
            if key < best_key:
                best, best_masks, best_key = min(best, c), masks, key
    return evaluate_partition(ch, Partition.from_masks(best_masks), "exhaustive")


def degrade_greedy(ch: Channel, L: int) -> DegradeResult:
    """Merge the cheapest pair of current letters until L letters remain.

    Letters keep the slot of their smallest original output, so ties resolve
    to the smallest index pair in current order.
    """
    L = _check_L(ch, L)
    n = ch.n
    J = ch.joint.copy()
    g = unnormalized_entropy(J)
    members = [[y] for y in range(n)]
    C = unnormalized_entropy(J[:, None, :] + J[None, :, :]) - g[:, None] - g[None, :]
    C[np.tril_indices(n)] = np.inf
    alive = np.ones(n, dtype=bool)
    for _ in range(n - L):
        k = int(np.argmin(C))
        i, j = divmod(k, n)
        J[i] += J[j]
        g[i] = unnormalized_entropy(J[i])
        members[i] += members[j]
        members[j] = []
        alive[j] = False
        C[j, :] = np.inf
        C[:, j] = np.inf
        others = np.flatnonzero(alive)
        others = others[others != i]
        row = unnormalized_entropy(J[others] + J[i]) - g[others] - g[i]
        lo, hi = others[others < i], others[others > i]
        C[lo, i] = row[others < i]
        C[i, hi] = row[others > i]
    part = Partition.from_blocks(m for m in members if m)
    return evaluate_partition(ch, part, "greedy")


def degrade_binary_dp(ch: Channel, L: int) -> DegradeResult:
    """Optimal degrading of a binary-input channel.

    Outputs are sorted by P(X=1|Y=y) and split into at most L contiguous
    segments by dynamic programming; O(n^2 L) time.
    """
    if ch.q != 2:
        raise ChannelError(f"binary DP needs q = 2, got q = {ch.q}")
    L = _check_L(ch, L)
    n = ch.n
    J = ch.joint
    py = J.sum(axis=1)
    key = np.where(py > 0, J[:, 0] / np.where(py > 0, py, 1.0), 0.0)
    order = np.argsort(key, kind="stable")
    Js = J[order]
    P = np.vstack([np.zeros(2), np.cumsum(Js, axis=0)])
    Gp = np.concatenate([[0.0], np.cumsum(unnormalized_entropy(Js))])
    # seg[i, j]: cost of merging sorted outputs i..j-1
    seg = unnormalized_entropy(P[None, :, :] - P[:, None, :]) - (Gp[None, :] - Gp[:, None])
    seg[np.tril_indices(n + 1)] = np.inf
    f = seg[0].copy()
    back = [np.zeros(n + 1, dtype=int)]
    best_k, best = 1, f[n]
    for k in range(2, L + 1):
        tot = f[:, None] + seg
        arg = np.argmin(tot, axis=0)
        f = tot[arg, np.arange(n + 1)]
        back.append(arg)
        if f[n] < best - TIE_TOL:
            best_k, best = k, f[n]
    cuts = [n]
    j = n
    for k in range(best_k, 1, -1):
        j = int(back[k - 1][j])
        cuts.append(j)
    cuts.append(0)
    cuts.reverse()
    blocks = [order[a:b].tolist() for a, b in zip(cuts[:-1], cuts[1:])]
    return evaluate_partition(ch, Partition.from_blocks(blocks), "dp")


def degrade(ch: Channel, L: int, method: str = "greedy") -> DegradeResult:
    if method == "exhaustive":
        return degrade_exhaustive(ch, L)
    if method == "greedy":
        return degrade_greedy(ch, L)
    if method == "dp":
        return degrade_binary_dp(ch, L)
    raise ValueError(f"unknown degrading method {method!r}; expected one of {METHODS}")
