"""
Interference-free bandwidth allocation for dedicated and cellular modes.

In both modes every transmitter runs at full power on its own slice of
spectrum, so a user holding fraction ``x`` of the band at full-band SNR
``g`` gets ``x * log2(1 + g / x)`` bits/s/Hz.
"""

import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .channel import CUE, DRX, DTX, FAP, FUE, MBS, LinkGains, SystemParams
from .numerics import grid_search_max_2d, lambert_w

LN2 = math.log(2.0)


class InfeasibleRateError(ValueError):
    """Minimum-rate targets cannot be met with the available spectrum."""


@dataclass
class SnrSet:
    """Full-band, full-power SNRs.

    ``dedicated`` holds one SNR per user, in the order (CUE, DRx, FUE) for
    the three-user case. The cellular-mode fields are the CUE uplink
    (CUE -> MBS), the D2D uplink hop (DTx -> MBS), the D2D downlink hop
    (MBS -> DRx) and the femto user.
    """
    dedicated: Tuple[float, ...] = ()
    gamma_cue_ul: float = 0.0
    gamma_d2d_ul: float = 0.0
    gamma_d2d_dl: float = 0.0
    gamma_fue: float = 0.0

    def __post_init__(self):
        vals = list(self.dedicated) + [self.gamma_cue_ul, self.gamma_d2d_ul,
                                       self.gamma_d2d_dl, self.gamma_fue]
        if any(not (v >= 0) for v in vals):
            raise ValueError("SNRs must be non-negative")

    @classmethod
    def from_gains(cls, gains: LinkGains, params: SystemParams) -> "SnrSet":
        s2 = gains.noise_mw
        return cls(
            dedicated=(params.p_max_mbs * gains(MBS, CUE) / s2,
                       params.p_max_dtx * gains(DTX, DRX) / s2,
                       params.p_max_fap * gains(FAP, FUE) / s2),
            gamma_cue_ul=params.p_max_cue * gains(CUE, MBS) / s2,
            gamma_d2d_ul=params.p_max_dtx * gains(DTX, MBS) / s2,
            gamma_d2d_dl=params.p_max_mbs * gains(MBS, DRX) / s2,
            gamma_fue=params.p_max_fap * gains(FAP, FUE) / s2)


@dataclass
class DedicatedAllocation:
    fractions: List[float]
    per_user_rate: List[float]
    sum_rate: float
    feasible: bool = True


@dataclass
class CellularAllocation:
    alpha: float
    alpha_prime: float
    beta: float
    beta_prime: float
    # (CUE uplink, D2D end-to-end, FUE)
    per_user_rate: Tuple[float, float, float]
    sum_rate: float
    feasible: bool = True
    d2d_ul_throughput: float = 0.0
    d2d_dl_throughput: float = 0.0
    evaluations: int = 0


@dataclass
class ResourceGrid:
    """Integer block allocation ``blocks[r][i]`` for user r, interval i."""
    blocks: List[List[int]]
    delta_f: float
    delta_t: float
    n_intervals: int
    rate: float = 0.0

    def __post_init__(self):
        width = round(1.0 / self.delta_f)
        for i in range(self.n_intervals):
            if sum(row[i] for row in self.blocks) > width:
                raise ValueError("interval %d exceeds the grid width" % i)
        if any(b < 0 for row in self.blocks for b in row):
            raise ValueError("block counts must be non-negative")


def slice_rate(x, gamma):
    """``x * log2(1 + gamma / x)``, continuous at ``x = 0``. Works on arrays."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        q = gamma / x
        # gamma / x overflows for subnormal x; the log difference does not
        r = np.where(np.isfinite(q), x * np.log1p(q) / LN2,
                     x * (np.log2(np.add(x, gamma)) - np.log2(x)))
    r = np.where(x > 0, r, 0.0)
    return float(r) if r.ndim == 0 else r


# ---------------------------------------------------------------------------
# dedicated mode
# ---------------------------------------------------------------------------
def dedicated_unconstrained(gammas: Sequence[float]) -> DedicatedAllocation:
    """Split the band in proportion to SNR; optimal for any number of users."""
    g = [float(v) for v in gammas]
    if len(g) < 2:
        raise ValueError("need at least two users")
    total = sum(g)
    if total == 0:
        n = len(g)
        return DedicatedAllocation([1.0 / n] * n, [0.0] * n, 0.0)
    x = [v / total for v in g]
    rates = [slice_rate(xi, gi) for xi, gi in zip(x, g)]
    return DedicatedAllocation(x, rates, math.log2(1.0 + total))


def min_fraction_for_rate(gamma: float, r_min: float) -> float:
    """Least band fraction giving ``r_min`` bits/s/Hz at full-band SNR ``gamma``.

    Closed form through the -1 branch of Lambert W:
    ``a = -g r ln2 / (r ln2 + g W_{-1}(-(r ln2 / g) 2^(-r/g)))``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if r_min < 0:
        raise ValueError("r_min must be non-negative")
    if r_min == 0:
        return 0.0
    cap = math.log2(1.0 + gamma)
    if r_min > cap * (1 + 1e-12):
        raise InfeasibleRateError("r_min=%g exceeds full-band capacity %g" % (r_min, cap))
    u = r_min * LN2 / gamma
    arg = -u * math.exp(-u)
    if arg == 0.0:
        # u e^-u underflows; u itself may be subnormal or zero
        w = _wm1_from_log(math.log(r_min) + math.log(LN2) - math.log(gamma) - u)
    else:
        w = lambert_w("minus-one", arg)
    denom = r_min * LN2 + gamma * w
    if denom >= 0:
        # u >= 1 only happens when r_min exceeds the capacity limit
        raise InfeasibleRateError("no finite fraction reaches r_min=%g" % r_min)
    return min(-gamma * r_min * LN2 / denom, 1.0)


def _wm1_from_log(log_neg_x):
    """``W_{-1}(x)`` given only ``ln(-x)``, for ``x`` too small to represent.

    Solves ``w + ln(-w) = ln(-x)`` by Newton from the usual asymptotic
    start.
    """
    L = log_neg_x
    w = L - math.log(-L)
    for _ in range(50):
        step = (w + math.log(-w) - L) / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 1e-15 * abs(w):
            break
    return w


def dedicated_constrained(gammas: Sequence[float],
                          r_mins: Sequence[float]) -> DedicatedAllocation:
    """Rate-constrained dedicated split.

    Users whose proportional share falls below their minimum fraction are
    pinned to that minimum; the remaining band is re-split among the rest
    in proportion to SNR. Repeats until no share falls short (at most one
    pass per user).
    """
    g = [float(v) for v in gammas]
    n = len(g)
    if len(r_mins) != n:
        raise ValueError("one r_min per user")
    mins = [min_fraction_for_rate(gi, ri) if ri > 0 else 0.0
            for gi, ri in zip(g, r_mins)]
    if sum(mins) > 1.0 + 1e-12:
        raise InfeasibleRateError("minimum fractions sum to %g > 1" % sum(mins))

    pinned = set()
    x = list(mins)
    for _ in range(n + 1):
        free = [k for k in range(n) if k not in pinned]
        left = 1.0 - sum(mins[k] for k in pinned)
        g_free = sum(g[k] for k in free)
        for k in free:
            if g_free > 0:
                x[k] = left * g[k] / g_free
            else:
                x[k] = left / len(free)
        short = [k for k in free if x[k] < mins[k]]
        if not short:
            break
        pinned.update(short)
        for k in short:
            x[k] = mins[k]
    else:  # pragma: no cover
        raise RuntimeError("clamp-and-redistribute did not settle")
    rates = [slice_rate(xi, gi) for xi, gi in zip(x, g)]
    return DedicatedAllocation(x, rates, sum(rates))


# ---------------------------------------------------------------------------
# cellular mode
# ---------------------------------------------------------------------------
def _hop_rates(alpha, alpha_prime, snrs):
    with np.errstate(divide="ignore", invalid="ignore"):
        r_ul = np.log2(1.0 + snrs.gamma_d2d_ul / alpha_prime)
        r_dl = np.log2(1.0 + snrs.gamma_d2d_dl / (alpha + alpha_prime))
    return r_ul, r_dl


def _beta(alpha, alpha_prime, r_ul, r_dl):
    with np.errstate(divide="ignore", invalid="ignore"):
        w = alpha_prime / (alpha + alpha_prime)
        beta = r_dl / (w * r_ul + r_dl)
    return np.where(np.isfinite(beta), beta, 1.0)


def beta_split(alpha: float, alpha_prime: float, snrs: SnrSet) -> float:
    """Uplink time share that equalizes D2D uplink and downlink throughput."""
    if not alpha_prime > 0:
        raise ValueError("alpha_prime must be positive")
    r_ul, r_dl = _hop_rates(alpha, alpha_prime, snrs)
    if r_dl == 0:
        return 1.0
    return float(_beta(alpha, alpha_prime, r_ul, r_dl))


def cellular_rates(alpha, alpha_prime, snrs: SnrSet, beta=None):
    """Per-user rates ``(cue_ul, d2d, fue)`` plus the two D2D hop throughputs.

    Vectorized over ``alpha`` / ``alpha_prime``. ``beta`` defaults to the
    balancing split.
    """
    alpha = np.asarray(alpha, dtype=float)
    alpha_prime = np.asarray(alpha_prime, dtype=float)
    r_ul, r_dl = _hop_rates(alpha, alpha_prime, snrs)
    if beta is None:
        beta = _beta(alpha, alpha_prime, r_ul, r_dl)
    beta = np.asarray(beta, dtype=float)
    cue = beta * slice_rate(alpha, snrs.gamma_cue_ul)
    with np.errstate(invalid="ignore"):
        ul = np.where(alpha_prime > 0, alpha_prime * beta * r_ul, 0.0)
    dl = (alpha + alpha_prime) * (1.0 - beta) * r_dl
    d2d = np.minimum(ul, dl)
    fue = slice_rate(1.0 - alpha - alpha_prime, snrs.gamma_fue)
    return cue, d2d, fue, ul, dl


def _cellular_from_point(a, ap, snrs, evals, feasible=True):
    if ap > 0:
        beta = beta_split(a, ap, snrs)
    else:
        beta = 1.0
    cue, d2d, fue, ul, dl = (float(v) for v in cellular_rates(a, ap, snrs, beta))
    return CellularAllocation(a, ap, beta, 1.0 - beta, (cue, d2d, fue),
                              cue + d2d + fue, feasible, ul, dl, evals)


def _d2d_dead(snrs):
    return snrs.gamma_d2d_ul == 0 or snrs.gamma_d2d_dl == 0


def _two_user_fallback(snrs, r_mins=None):
    # D2D hop dead: the relay carries nothing and the CUE keeps the whole
    # time axis, i.e. two dedicated users
    gam = (snrs.gamma_cue_ul, snrs.gamma_fue)
    if r_mins is not None:
        if r_mins[1] > 0:
            return CellularAllocation(0.0, 0.0, 1.0, 0.0, (0.0, 0.0, 0.0), 0.0, False)
        try:
            ded = dedicated_constrained(gam, (r_mins[0], r_mins[2]))
        except InfeasibleRateError:
            return CellularAllocation(0.0, 0.0, 1.0, 0.0, (0.0, 0.0, 0.0), 0.0, False)
    else:
        ded = dedicated_unconstrained(gam)
    a = ded.fractions[0]
    cue, fue = ded.per_user_rate
    return CellularAllocation(a, 0.0, 1.0, 0.0, (cue, 0.0, fue), cue + fue, True)


def cellular_unconstrained(snrs: SnrSet, step: float = 1e-3) -> CellularAllocation:
    """Lattice search over ``(alpha, alpha')`` with the balancing time split."""
    if not 0 < step <= 0.1:
        raise ValueError("step must lie in (0, 0.1]")
    if _d2d_dead(snrs):
        return _two_user_fallback(snrs)

    def objective(a, ap):
        cue, d2d, fue, _, _ = cellular_rates(a, ap, snrs)
        return cue + d2d + fue

    res = grid_search_max_2d(objective, step, exclude_zero_a=True,
                             exclude_zero_b=True, exclude_full=True)
    a, ap = res.argmax
    return _cellular_from_point(a, ap, snrs, res.evaluations)


def cellular_constrained(snrs: SnrSet, r_mins: Sequence[float],
                         step: float = 1e-3) -> CellularAllocation:
    """As :func:`cellular_unconstrained`, keeping only lattice points where
    the CUE uplink, D2D end-to-end and FUE rates each meet their minimum.

    ``r_mins`` is ordered (CUE, D2D, FUE). An allocation with
    ``feasible=False`` is returned when no lattice point qualifies.
    """
    if not 0 < step <= 0.1:
        raise ValueError("step must lie in (0, 0.1]")
    r_mins = [float(v) for v in r_mins]
    if _d2d_dead(snrs):
        return _two_user_fallback(snrs, r_mins)
    slack = 1e-12

    def objective(a, ap):
        cue, d2d, fue, _, _ = cellular_rates(a, ap, snrs)
        ok = ((cue >= r_mins[0] - slack) & (d2d >= r_mins[1] - slack)
              & (fue >= r_mins[2] - slack))
        return np.where(ok, cue + d2d + fue, -np.inf)

    res = grid_search_max_2d(objective, step, exclude_zero_a=True,
                             exclude_zero_b=True, exclude_full=True)
    if not math.isfinite(res.value):
        return CellularAllocation(0.0, 0.0, 1.0, 0.0, (0.0, 0.0, 0.0), 0.0, False,
                                  evaluations=res.evaluations)
    a, ap = res.argmax
    return _cellular_from_point(a, ap, snrs, res.evaluations)


# ---------------------------------------------------------------------------
# resource-grid oracle
# ---------------------------------------------------------------------------
def _compositions(total, parts):
    """All tuples of ``parts`` non-negative ints summing to ``total``."""
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 1 - prev - 1)
        yield tuple(out)


def grid_rate(blocks, gammas, delta_f, delta_t, high_snr=False):
    """Sum over users and intervals of ``B df dt log2(1 + g / (B df))``.

    With ``high_snr`` the ``1 +`` is dropped (the approximation behind the
    equal-split argument).
    """
    total = 0.0
    for row, g in zip(blocks, gammas):
        for b in row:
            if b == 0:
                continue
            x = b * delta_f
            total += x * delta_t * (math.log2(g / x) if high_snr else math.log2(1 + g / x))
    return total


def grid_alloc_bruteforce(gammas: Sequence[float], n_intervals: int,
                          total_blocks: int, width: Optional[int] = None,
                          high_snr: bool = False) -> ResourceGrid:
    """Exhaustive search over integer block grids (small instances only).

    Each user gets ``total_blocks`` blocks spread over ``n_intervals``
    intervals; ``width`` blocks fit in one interval (default: enough for
    every user at once). Ties keep the first allocation in enumeration
    order.
    """
    if n_intervals > 4 or total_blocks > 12:
        raise ValueError("brute force limited to n_intervals <= 4, total_blocks <= 12")
    n_users = len(gammas)
    if width is None:
        width = n_users * total_blocks
    df, dt = 1.0 / width, 1.0 / n_intervals
    per_user = list(_compositions(total_blocks, n_intervals))
    best, best_rate = None, -math.inf
    for combo in itertools.product(per_user, repeat=n_users):
        if any(sum(row[i] for row in combo) > width for i in range(n_intervals)):
            continue
        r = grid_rate(combo, gammas, df, dt, high_snr)
        if r > best_rate + 1e-15 * abs(r):
            best, best_rate = combo, r
    return ResourceGrid([list(row) for row in best], df, dt, n_intervals, best_rate)
