"""Finite discrete memoryless channels with an attached input distribution.

A channel stores its transition matrix with one row per input letter and one
column per output letter. Entries are either float64 or exact
``fractions.Fraction`` objects; exact channels keep all structural checks
(row sums, posteriors) free of rounding, and are converted to floats only
where information quantities are evaluated.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Hashable, Iterable, Sequence

import numpy as np

from .entropy import entropy, entropy_rows
from .errors import ChannelError
from .partition import Partition

ROW_TOL = 1e-12


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (bool, np.bool_)):
        raise ChannelError(f"boolean is not a probability: {v!r}")
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except ValueError:
            raise ChannelError(f"cannot parse probability {v!r}") from None
    raise TypeError


def as_prob_array(values) -> np.ndarray:
    """Coerce nested numbers to a float64 array, or to an object array of
    Fractions when every entry is exact (int, Fraction or rational string)."""
    if isinstance(values, np.ndarray) and values.dtype.kind == "f":
        return values.astype(float)
    if isinstance(values, np.ndarray) and values.dtype.kind in "iu":
        return np.vectorize(Fraction, otypes=[object])(values.astype(object))
    arr = np.array(values, dtype=object)
    flat = arr.ravel()
    try:
        exact = [_to_fraction(v) for v in flat]
    except TypeError:
        try:
            vals = [float(_to_fraction(v)) if isinstance(v, str) else float(v) for v in flat]
        except (TypeError, ValueError):
            raise ChannelError("probabilities must form a rectangular array of numbers") from None
        return np.array(vals, dtype=float).reshape(arr.shape)
    out = np.empty(arr.shape, dtype=object)
    out.ravel()[:] = exact
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Channel:
    """W[x, y] = W(y | x) with inputs 1..q stored at row indices 0..q-1."""

    W: np.ndarray
    px: np.ndarray | None = None
    outputs: tuple = field(default=None)

    def __post_init__(self):
        W = as_prob_array(self.W)
        if W.ndim != 2 or W.shape[0] < 1 or W.shape[1] < 1:
            raise ChannelError(f"transition matrix must be 2-d and nonempty, got shape {W.shape}")
        q, n = W.shape
        exact = W.dtype == object
        if self.px is None:
            px = np.array([Fraction(1, q)] * q, dtype=object) if exact else np.full(q, 1.0 / q)
        else:
            px = as_prob_array(self.px)
            if px.shape != (q,):
                raise ChannelError(f"input distribution has shape {px.shape}, expected ({q},)")
            if exact and px.dtype != object:
                W = W.astype(float)
            elif px.dtype == object and not exact:
                px = px.astype(float)
        outputs = tuple(range(n)) if self.outputs is None else tuple(self.outputs)
        if len(outputs) != n:
            raise ChannelError(f"{len(outputs)} output labels for {n} columns")
        object.__setattr__(self, "W", _frozen(W))
        object.__setattr__(self, "px", _frozen(px))
        object.__setattr__(self, "outputs", outputs)

    @property
    def q(self) -> int:
        return self.W.shape[0]

    @property
    def n(self) -> int:
        """Output alphabet size."""
        return self.W.shape[1]

    @property
    def exact(self) -> bool:
        return self.W.dtype == object

    @cached_property
    def Wf(self) -> np.ndarray:
        return self.W.astype(float)

    @cached_property
    def pxf(self) -> np.ndarray:
        return self.px.astype(float)

    @cached_property
    def joint(self) -> np.ndarray:
        """Float joint matrix P(x, y), shape (n, q): one row per output."""
        return (self.pxf[:, None] * self.Wf).T.copy()

    def to_float(self) -> "Channel":
        if not self.exact:
            return self
        return Channel(self.Wf, self.pxf, self.outputs)

    def index(self, label: Hashable) -> int:
        try:
            return self.outputs.index(label)
        except ValueError:
            raise ChannelError(f"unknown output label {label!r}") from None

    def indices(self, labels: Iterable[Hashable]) -> list[int]:
        return [self.index(lab) for lab in labels]

    def same_as(self, other: "Channel") -> bool:
        return (self.outputs == other.outputs
                and self.W.dtype == other.W.dtype
                and np.array_equal(self.W, other.W)
                and np.array_equal(self.px, other.px))


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        return "valid" if self.ok else "; ".join(self.violations)


def _fmt(v) -> str:
    return str(v) if isinstance(v, Fraction) else f"{float(v):.12g}"


def validate(ch: Channel) -> ValidationReport:
    """Collect every violated channel invariant; an empty report means valid."""
    bad: list[str] = []
    W, px = ch.W, ch.px
    for x in range(ch.q):
        for y in range(ch.n):
            if W[x, y] < 0:
                bad.append(f"negative probability W({ch.outputs[y]!r}|{x + 1}) = {_fmt(W[x, y])}")
        s = W[x].sum()
        off = (s != 1) if ch.exact else abs(float(s) - 1.0) > ROW_TOL
        if off:
            bad.append(f"row {x + 1} sums to {_fmt(s)}")
    for x in range(ch.q):
        if px[x] < 0:
            bad.append(f"negative probability P_X({x + 1}) = {_fmt(px[x])}")
    s = px.sum()
    if (s != 1) if px.dtype == object else abs(float(s) - 1.0) > ROW_TOL:
        bad.append(f"input distribution sums to {_fmt(s)}")
    if len(set(ch.outputs)) != len(ch.outputs):
        seen, dup = set(), []
        for lab in ch.outputs:
            if lab in seen:
                dup.append(lab)
            seen.add(lab)
        bad.append(f"duplicate output labels {dup}")
    return ValidationReport(tuple(bad))


def require_valid(ch: Channel) -> Channel:
    rep = validate(ch)
    if not rep.ok:
        raise ChannelError(str(rep))
    return ch


@dataclass(frozen=True, eq=False)
class JointView:
    """Output distribution and posterior vectors.

    posteriors[y] is P(X = . | Y = y); rows for outputs with py == 0 are
    undefined (nan in float mode, None in exact mode) and listed in
    ``undefined``.
    """

    py: np.ndarray
    posteriors: np.ndarray
    defined: np.ndarray

    @property
    def undefined(self) -> tuple[int, ...]:
        return tuple(int(y) for y in np.flatnonzero(~self.defined))


def joint_view(ch: Channel) -> JointView:
    if ch.exact:
        joint = (ch.px[:, None] * ch.W).T
        py = joint.sum(axis=1)
        defined = np.array([p != 0 for p in py], dtype=bool)
        post = np.empty_like(joint)
        for y in range(ch.n):
            post[y] = joint[y] / py[y] if defined[y] else [None] * ch.q
        return JointView(_frozen(py), _frozen(post), _frozen(defined))
    joint = ch.joint
    py = joint.sum(axis=1)
    defined = py > 0
    post = np.full_like(joint, np.nan)
    post[defined] = joint[defined] / py[defined, None]
    return JointView(_frozen(py), _frozen(post), _frozen(defined))


def float_view(ch: Channel) -> JointView:
    """joint_view evaluated in floating point, even for exact channels."""
    return joint_view(ch.to_float())


def mutual_information(ch: Channel) -> float:
    """I(X;Y) in nats: h(P_X) - sum_y P_Y(y) h(P(.|y))."""
    jv = float_view(ch)
    d = jv.defined
    mi = entropy(ch.pxf) - float(jv.py[d] @ entropy_rows(jv.posteriors[d]))
    # rounding can leave a useless channel a few ulps below zero
    return max(mi, 0.0)


def apply_partition(ch: Channel, part: Partition, labels: Sequence | None = None) -> Channel:
    """Merge every block of ``part`` into one output letter.

    Output i of the result is labelled with the tuple of labels in block i
    unless ``labels`` is given.
    """
    if not isinstance(part, Partition):
        part = Partition.from_blocks(part)
    part.check(ch.n)
    cols = [ch.W[:, list(b)].sum(axis=1) for b in part.blocks]
    Q = np.stack(cols, axis=1)
    if labels is None:
        labels = [tuple(ch.outputs[y] for y in b) for b in part.blocks]
    return Channel(Q, ch.px, tuple(labels))


# --- JSON ---------------------------------------------------------------

def _num_to_json(v):
    if isinstance(v, Fraction):
        return str(v)
    return float(v)


def _label_to_json(lab):
    if isinstance(lab, tuple):
        return ",".join(str(x) for x in lab)
    if isinstance(lab, (np.integer,)):
        return int(lab)
    return lab


def channel_to_dict(ch: Channel) -> dict[str, Any]:
    return {
        "q": ch.q,
        "px": [_num_to_json(v) for v in ch.px],
        "outputs": [_label_to_json(lab) for lab in ch.outputs],
        "W": [[_num_to_json(v) for v in row] for row in ch.W],
    }


def channel_from_dict(d: dict[str, Any]) -> Channel:
    try:
        q, W = int(d["q"]), d["W"]
    except (KeyError, TypeError, ValueError) as e:
        raise ChannelError(f"bad channel document: {e}") from None
    if len(W) != q:
        raise ChannelError(f"channel document has q={q} but {len(W)} rows")
    outputs = d.get("outputs")
    return Channel(W, d.get("px"), None if outputs is None else tuple(outputs))


def dumps_channel(ch: Channel) -> str:
    return json.dumps(channel_to_dict(ch), indent=1)


def loads_channel(text: str) -> Channel:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ChannelError(f"invalid JSON: {e}") from None
    return channel_from_dict(d)
