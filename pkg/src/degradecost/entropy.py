"""Entropy helpers in nats, with the convention 0 * ln 0 = 0."""

import numpy as np


def eta(p):
    """Elementwise -p ln p, zero where p == 0."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = -p[pos] * np.log(p[pos])
    return out


def entropy(p) -> float:
    """Shannon entropy of a probability vector, in nats.

    Entries must be nonnegative. A total slightly below one is accepted so
    that sub-probability vectors (e.g. joint columns) can be passed.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("entropy: negative probability entry")
    if p.sum() > 1 + 1e-10:
        raise ValueError(f"entropy: entries sum to {p.sum():.15g} > 1")
    return float(eta(p).sum())


def entropy_rows(P) -> np.ndarray:
    """Entropy of every row of a 2-d array."""
    return eta(P).sum(axis=-1)


def unnormalized_entropy(v) -> np.ndarray:
    """sum(eta(v)) - eta(sum(v)) along the last axis.

    For a joint column v = (P(x, y))_x this equals P_Y(y) * h(P(.|y)), which
    lets merge costs be evaluated without forming posteriors.
    """
    v = np.asarray(v, dtype=float)
    return eta(v).sum(axis=-1) - eta(v.sum(axis=-1))
