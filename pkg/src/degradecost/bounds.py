"""Bounds on the degrading cost DC(q, L) and their geometric ingredients.

DC(q, L) is the worst-case loss of mutual information (nats) when a channel
with q inputs is degraded to at most L outputs. The lower bound is

    DC(q, L) >= (q-1)/(2(q+1)) * (1/(sigma_{q-1} (q-1)!))^{2/(q-1)} * L^{-2/(q-1)}

with sigma_d the volume of the unit ball in R^d. Everything here is evaluated
in log space so that (q-1)! and the binomials stay finite for large q.
"""

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np


def log_sphere_coeff(d: int) -> float:
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1)


def sphere_coeff(d: int) -> float:
    """Volume of the unit ball in R^d."""
    return math.exp(log_sphere_coeff(d))


def _check_qL(q, L):
    if int(q) != q or q < 2:
        raise ValueError(f"q must be an integer >= 2, got {q}")
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")


def log_lower_coefficient(q: int) -> float:
    """log of the factor multiplying L^{-2/(q-1)} in the lower bound."""
    d = q - 1
    return (math.log(d / (2.0 * (q + 1)))
            - (2.0 / d) * (log_sphere_coeff(d) + math.lgamma(q)))


def dc_lower_bound(q: int, L: float) -> float:
    _check_qL(q, L)
    return math.exp(log_lower_coefficient(q) - (2.0 / (q - 1)) * math.log(L))


def required_output_size(q: int, eps: float) -> float:
    """Smallest L with dc_lower_bound(q, L) <= eps; the bound is a power law
    in L, so this inverts it in closed form. Returns a float (it may be huge)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return math.exp(log10_required_output_size(q, eps) * math.log(10))


def log10_required_output_size(q: int, eps: float) -> float:
    _check_qL(q, 1)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return 0.5 * (q - 1) * (log_lower_coefficient(q) - math.log(eps)) / math.log(10)


def dc_lower_stirling(q: int, L: float) -> float:
    """Stirling simplification e / (4 pi (q-1)) * L^{-2/(q-1)}."""
    _check_qL(q, L)
    return math.e / (4 * math.pi * (q - 1)) * L ** (-2.0 / (q - 1))


def dc_upper_bounds(q: int, L: float) -> tuple[float, float]:
    """The two constructive upper bounds: 2q L^{-1/q} and
    2 q^{1+2/(q-1)} L^{-1/(q-1)}."""
    _check_qL(q, L)
    old = 2 * q * L ** (-1.0 / q)
    new = 2 * q ** (1 + 2.0 / (q - 1)) * L ** (-1.0 / (q - 1))
    return old, new


@dataclass(frozen=True)
class BoundReport:
    q: int
    L: float
    lower_exact: float
    lower_stirling: float
    upper_old: float
    upper_new: float
    sigma: float

    CSV_FIELDS = ("q", "L", "lower_exact", "lower_stirling", "upper_old", "upper_new")

    def csv_row(self) -> list:
        return [getattr(self, f) for f in self.CSV_FIELDS]


def bound_report(q: int, L: float) -> BoundReport:
    old, new = dc_upper_bounds(q, L)
    return BoundReport(q, L, dc_lower_bound(q, L), dc_lower_stirling(q, L),
                       old, new, sphere_coeff(q - 1))


# --- grid geometry --------------------------------------------------------

def grid_ball(d: int, M: int, r: float) -> np.ndarray:
    """Integer points k in Z^d with ||k / M|| <= r, one per row."""
    R = int(math.floor(r * M + 1e-9))
    axis = np.arange(-R, R + 1)
    pts = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    limit = (r * M) ** 2 * (1 + 1e-12)
    return pts[(pts ** 2).sum(axis=1) <= limit]


def punctured_delta_tilde(points: np.ndarray, n_outputs: int) -> float:
    """(1 / (2 n_outputs)) * sum ||p' - mean||^2 over a set of punctured
    posterior vectors (each output of W_M carries probability 1/n_outputs)."""
    pts = np.asarray(points, dtype=float)
    centered = pts - pts.mean(axis=0)
    return float((centered ** 2).sum()) / (2.0 * n_outputs)


def max_sq_deviation(points, weights=None) -> float:
    """max_j ||p_j - p_bar||^2, with p_bar the (weighted) mean."""
    pts = np.asarray(points, dtype=float)
    w = np.full(len(pts), 1.0 / len(pts)) if weights is None else np.asarray(weights, float)
    pbar = (w / w.sum()) @ pts
    return float(((pts - pbar) ** 2).sum(axis=1).max())


def lattice_ball_constant(q: int) -> float:
    """(q-1)(q-1)! / (2(q+1)): scale of delta_tilde for a ball of radius r."""
    return (q - 1) * math.factorial(q - 1) / (2.0 * (q + 1))


@dataclass(frozen=True)
class BallCheck:
    q: int
    M: int
    r: float
    size: int
    vol: float
    deltatilde: float
    vol_pred: float
    dt_pred: float

    @property
    def vol_error(self) -> float:
        return abs(self.vol - self.vol_pred)

    @property
    def dt_error(self) -> float:
        return abs(self.deltatilde - self.dt_pred)


def ball_set_check(q: int, M: int, r: float) -> BallCheck:
    """Measure volume and delta_tilde of the grid ball of radius r around a
    lattice point, next to their continuum predictions."""
    if r > 4:
        raise ValueError(f"radius {r} exceeds 4")
    if q < 2 or M < 1:
        raise ValueError("need q >= 2 and M >= 1")
    d = q - 1
    pts = grid_ball(d, M, r)
    if len(pts) == 0:
        raise ValueError(f"grid ball of radius {r} at M={M} is empty")
    n_outputs = math.comb(M + q - 1, q - 1)
    sigma = sphere_coeff(d)
    return BallCheck(
        q=q, M=M, r=r, size=len(pts),
        vol=len(pts) / M ** d,
        deltatilde=punctured_delta_tilde(pts / M, n_outputs),
        vol_pred=sigma * r ** d,
        dt_pred=lattice_ball_constant(q) * sigma * r ** (q + 1),
    )


def lattice_ball_competitors(q: int, M: int, r: float, n: int = 100,
                             seed: int = 0) -> tuple[float, np.ndarray]:
    """delta_tilde of the lattice ball and of n random grid sets of equal size.

    Half the competitors are uniform random subsets of the radius-2r grid
    ball; the others are the lattice ball with 10-50% of its points swapped
    for random points of the surrounding shell.
    """
    rng = np.random.default_rng(seed)
    d = q - 1
    ball = grid_ball(d, M, r)
    big = grid_ball(d, M, 2 * r)
    t = len(ball)
    n_outputs = math.comb(M + q - 1, q - 1)
    inside = (big ** 2).sum(axis=1) <= (r * M) ** 2 * (1 + 1e-12)
    shell = big[~inside]
    out = np.empty(n)
    for i in range(n):
        if i % 2 == 0:
            cand = big[rng.choice(len(big), size=t, replace=False)]
        else:
            k = max(1, int(rng.uniform(0.1, 0.5) * t))
            keep = ball[rng.choice(t, size=t - k, replace=False)]
            cand = np.vstack([keep, shell[rng.choice(len(shell), size=k, replace=False)]])
        out[i] = punctured_delta_tilde(cand / M, n_outputs)
    return punctured_delta_tilde(ball / M, n_outputs), out


def log_grid_volume(q: int, M: int) -> float:
    """log( C(M+q-1, q-1) / M^{q-1} ): total volume of W_M's punctured grid."""
    return math.log(math.comb(M + q - 1, q - 1)) - (q - 1) * math.log(M)


def convex_allocation_bound(q: int, L: float, M: int) -> float:
    """Finite-M lower bound obtained by splitting W_M's grid volume equally
    among L cells; tends to dc_lower_bound(q, L) as M grows."""
    _check_qL(q, L)
    d = q - 1
    log_const = (math.log(d) + math.lgamma(q) - math.log(2.0 * (q + 1))
                 - (2.0 / d) * log_sphere_coeff(d))
    return math.exp(log_const + math.log(L)
                    + (q + 1) / d * (log_grid_volume(q, M) - math.log(L)))


def bounds_csv(reports: Iterable[BoundReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BoundReport.CSV_FIELDS)
    for rep in sorted(reports, key=lambda r: (r.q, r.L)):
        w.writerow([fmt(v) for v in rep.csv_row()])
    return buf.getvalue()


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.12g}"
