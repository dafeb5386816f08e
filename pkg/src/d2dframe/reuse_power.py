"""
Reuse-mode power control for the three co-channel transmitters.

The admissible powers form a polytope cut out of the box
``[0, p_max]^3`` by three SINR-threshold planes. The sum rate is
maximized over a finite candidate set of its vertices; a vectorized
grid search serves as the reference.
"""

import itertools
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .channel import (REUSE_RX, REUSE_TX, SERVES, LinkGains, PowerVector,
                      SystemParams, sinr)
from .numerics import SingularSystemError, solve_linear_2, solve_linear_3

FACE, EDGE, CORNER = "face", "edge", "max-corner"

FEASIBILITY_RTOL = 1e-9


class InfeasibleRegionError(ValueError):
    """The three SINR planes do not meet inside the power box."""


@dataclass(frozen=True)
class PowerRegion:
    """Planes ``A @ P + c >= 0`` (one row per receiver) and the power box.

    Rows and columns are ordered (DTx, MBS, FAP); row ``k`` is the
    constraint of the receiver served by transmitter ``k``.
    """
    plane_coeffs: Tuple[Tuple[float, float, float, float], ...]
    p_max: PowerVector
    p_min: PowerVector

    @property
    def A(self):
        return [row[:3] for row in self.plane_coeffs]

    @property
    def c(self):
        return [row[3] for row in self.plane_coeffs]


@dataclass(frozen=True)
class ReuseSolution:
    powers: PowerVector
    sum_rate_bps_hz: float
    vertex_kind: str
    candidates_tested: int
    feasible: bool
    evaluations: int = 0


def build_region(gains: LinkGains, params: SystemParams) -> PowerRegion:
    s2 = gains.noise_mw
    rows = []
    p_min = []
    for tx in REUSE_TX:
        rx = SERVES[tx]
        gamma = params.sinr_min(rx)
        row = [(gains(t, rx) if t == tx else -gamma * gains(t, rx)) for t in REUSE_TX]
        row.append(-gamma * s2)
        rows.append(tuple(row))
        own = gains(tx, rx)
        p_min.append(gamma * s2 / own if own > 0 else math.inf)
    p_max = PowerVector.max_of(params)
    # p_min may be inf for a dead link; PowerVector rejects it, so clip
    # to a sentinel above p_max which keeps the region visibly empty
    p_min_vec = PowerVector(*[v if math.isfinite(v) else 2 * m + 1.0
                              for v, m in zip(p_min, p_max.as_tuple())])
    return PowerRegion(tuple(rows), p_max, p_min_vec)


def joint_min_point(region: PowerRegion) -> PowerVector:
    """Intersection of the three planes: the least jointly feasible powers."""
    q = solve_linear_3(region.A, [-c for c in region.c])
    if any(v <= 0 for v in q) or any(v > m * (1 + FEASIBILITY_RTOL)
                                     for v, m in zip(q, region.p_max.as_tuple())):
        raise InfeasibleRegionError("joint minimum point %r lies outside the box" % (q,))
    return PowerVector(*q)


def sum_rate(powers: PowerVector, gains: LinkGains) -> float:
    return sum(math.log2(1.0 + sinr(powers, gains, rx)) for rx in REUSE_RX)


def sum_sinr(powers: PowerVector, gains: LinkGains) -> float:
    return sum(sinr(powers, gains, rx) for rx in REUSE_RX)


def is_feasible(powers: PowerVector, region: PowerRegion, gains: LinkGains,
                params: SystemParams) -> bool:
    for p, pmax in zip(powers.as_tuple(), region.p_max.as_tuple()):
        if p > pmax * (1.0 + FEASIBILITY_RTOL):
            return False
    for rx in REUSE_RX:
        if sinr(powers, gains, rx) < params.sinr_min(rx) * (1.0 - FEASIBILITY_RTOL):
            return False
    return True


def _clip_to_box(vals, p_max):
    # solver round-off can push a coordinate a hair past its maximum
    return [min(v, m) if v <= m * (1 + FEASIBILITY_RTOL) else v
            for v, m in zip(vals, p_max)]


def enumerate_vertices(region: PowerRegion) -> List[Tuple[PowerVector, str]]:
    """All 19 vertex constructions, before any feasibility filtering.

    * face: two planes solved with the remaining power at its maximum (9)
    * edge: one plane solved for one power, the other two at maximum (9)
    * the all-maximum corner (1)

    Constructions that are singular or land on a negative power are
    skipped.
    """
    A, c = region.A, region.c
    pmax = region.p_max.as_tuple()
    out = []

    for fixed in range(3):
        free = [k for k in range(3) if k != fixed]
        for a, b in itertools.combinations(range(3), 2):
            lhs = [[A[a][free[0]], A[a][free[1]]], [A[b][free[0]], A[b][free[1]]]]
            rhs = [-c[a] - A[a][fixed] * pmax[fixed], -c[b] - A[b][fixed] * pmax[fixed]]
            try:
                x = solve_linear_2(lhs, rhs)
            except SingularSystemError:
                continue
            vals = [0.0] * 3
            vals[fixed] = pmax[fixed]
            vals[free[0]], vals[free[1]] = x
            _append(out, vals, pmax, FACE)

    for plane in range(3):
        for solve_for in range(3):
            coef = A[plane][solve_for]
            if coef == 0.0:
                continue
            rest = sum(A[plane][k] * pmax[k] for k in range(3) if k != solve_for)
            vals = list(pmax)
            vals[solve_for] = (-c[plane] - rest) / coef
            _append(out, vals, pmax, EDGE)

    out.append((PowerVector(*pmax), CORNER))
    return out


def _append(out, vals, pmax, kind):
    vals = _clip_to_box(vals, pmax)
    if all(math.isfinite(v) and v >= 0 for v in vals):
        out.append((PowerVector(*vals), kind))


def vertex_search(gains: LinkGains, params: SystemParams) -> ReuseSolution:
    """Best feasible vertex of the power region by sum rate.

    Ties go to the lexicographically smallest power vector. When no
    candidate is feasible the solution is flagged infeasible and carries
    zero powers.
    """
    region = build_region(gains, params)
    cands = enumerate_vertices(region)
    best = None
    evals = 0
    for pv, kind in cands:
        if not is_feasible(pv, region, gains, params):
            continue
        r = sum_rate(pv, gains)
        evals += 1
        key = (r, tuple(-v for v in pv.as_tuple()))
        if best is None or key > best[0]:
            best = (key, pv, kind, r)
    if best is None:
        return ReuseSolution(PowerVector(0.0, 0.0, 0.0), 0.0, "", len(cands), False,
                             evals)
    _, pv, kind, r = best
    return ReuseSolution(pv, r, kind, len(cands), True, evals)


def _grid_sinrs(P, gains):
    """SINR arrays at each receiver for power arrays ``P = (PT, PM, PF)``."""
    out = []
    for rx in REUSE_RX:
        sig = 0.0
        intf = gains.noise_mw
        for tx, p in zip(REUSE_TX, P):
            rp = p * gains(tx, rx)
            if SERVES[tx] == rx:
                sig = rp
            else:
                intf = intf + rp
        out.append(sig / intf)
    return out


def exhaustive_search(gains: LinkGains, params: SystemParams,
                      grid_points_per_dim: int = 60) -> ReuseSolution:
    """Reference optimum over a uniform grid on ``[p_min, p_max]^3``.

    Each axis is ``linspace(p_min, p_max, n)`` with its last node pinned
    to the exact maximum. Grid points that violate an SINR threshold are
    discarded. Ties go to the lexicographically smallest point.
    """
    n = int(grid_points_per_dim)
    if n < 2:
        raise ValueError("grid_points_per_dim must be >= 2")
    region = build_region(gains, params)
    lo = region.p_min.as_tuple()
    hi = region.p_max.as_tuple()
    evals = n ** 3
    if any(l > h for l, h in zip(lo, hi)):
        return ReuseSolution(PowerVector(0.0, 0.0, 0.0), 0.0, "", evals, False, evals)
    axes = []
    for l, h in zip(lo, hi):
        ax = np.linspace(l, h, n)
        ax[-1] = h
        axes.append(ax)
    P = np.meshgrid(*axes, indexing="ij")
    sinrs = _grid_sinrs(P, gains)
    ok = np.ones(P[0].shape, dtype=bool)
    rate = np.zeros(P[0].shape)
    for s, rx in zip(sinrs, REUSE_RX):
        ok &= s >= params.sinr_min(rx) * (1.0 - FEASIBILITY_RTOL)
        rate += np.log2(1.0 + s)
    if not ok.any():
        return ReuseSolution(PowerVector(0.0, 0.0, 0.0), 0.0, "", evals, False, evals)
    rate = np.where(ok, rate, -np.inf)
    k = int(np.argmax(rate))  # first maximum in C order == lexicographic
    idx = np.unravel_index(k, rate.shape)
    pv = PowerVector(*(float(axes[d][idx[d]]) for d in range(3)))
    return ReuseSolution(pv, float(rate[idx]), "grid", evals, True, evals)
