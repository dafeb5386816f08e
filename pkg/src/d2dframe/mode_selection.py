"""
D2D mode selection: distance gate, orthogonal-resource branch and the
interference criterion comparing D2D against two-hop cellular SINR.
"""

import math
from dataclasses import dataclass

from .channel import DRX, DTX, FAP, MBS, LinkGains, SystemParams

DEDICATED, REUSE, CELLULAR = "Dedicated", "Reuse", "Cellular"


@dataclass(frozen=True)
class ModeDecision:
    mode: str
    d_threshold_m: float
    d_adaptive_m: float
    cellular_two_hop_sinr: float
    d2d_sinr_at_max: float
    distance_gate_passed: bool
    interference_gate_passed: bool


def cellular_two_hop_sinr(gains: LinkGains, params: SystemParams) -> float:
    """SINR of the DTx -> MBS -> DRx relay path, limited by its weaker hop."""
    s2 = gains.noise_mw
    uplink = params.p_max_dtx * gains(DTX, MBS) / (params.p_max_fap * gains(FAP, MBS) + s2)
    downlink = params.p_max_mbs * gains(MBS, DRX) / (params.p_max_fap * gains(FAP, DRX) + s2)
    return min(uplink, downlink)


def _drx_interference(gains, params):
    return (params.p_max_mbs * gains(MBS, DRX) + params.p_max_fap * gains(FAP, DRX)
            + gains.noise_mw)


def d2d_sinr_at_max(gains: LinkGains, params: SystemParams) -> float:
    return params.p_max_dtx * gains(DTX, DRX) / _drx_interference(gains, params)


def adaptive_distance_threshold(gains: LinkGains, params: SystemParams) -> float:
    """DTx-DRx separation at which D2D and cellular SINR break even.

    Inverts the D2D link's own dB path-loss model, so the result is exact
    against :func:`d2d_sinr_at_max` for the same fading draw. Only the
    fading magnitude of the DTx-DRx link is used, never its distance.
    """
    s_cell = cellular_two_hop_sinr(gains, params)
    if s_cell <= 0.0:
        return math.inf
    h_tr = gains.h[(DTX, DRX)]
    if h_tr <= 0.0:
        return 0.0
    model = params.model_for(DTX, DRX)
    # PT h 10^(-PL(d)/10) / I = S  =>  PL(d) = 10 log10(PT h / (I S))
    target_pl = 10.0 * math.log10(params.p_max_dtx * h_tr
                                  / (_drx_interference(gains, params) * s_cell))
    return 10.0 ** ((target_pl - model.intercept_db) / model.slope_db_per_decade)


def distance_gate(d: float, d_adaptive: float, params: SystemParams) -> bool:
    return d <= max(params.d_constant_m, d_adaptive)


def select_mode(gains: LinkGains, params: SystemParams, d: float,
                orthogonal_available: bool) -> ModeDecision:
    """Pick Dedicated, Reuse or Cellular for one D2D pair.

    Reuse still has to pass the power-control feasibility check; callers
    fall back to Cellular when it does not (see ``framework.run_trial``).
    """
    s_cell = cellular_two_hop_sinr(gains, params)
    s_d2d = d2d_sinr_at_max(gains, params)
    d_adapt = adaptive_distance_threshold(gains, params)
    d_thr = max(params.d_constant_m, d_adapt)
    near = distance_gate(d, d_adapt, params)
    quiet = s_d2d > s_cell
    if near and orthogonal_available:
        mode = DEDICATED
    elif near and quiet:
        mode = REUSE
    else:
        mode = CELLULAR
    return ModeDecision(mode=mode, d_threshold_m=d_thr, d_adaptive_m=d_adapt,
                        cellular_two_hop_sinr=s_cell, d2d_sinr_at_max=s_d2d,
                        distance_gate_passed=near, interference_gate_passed=quiet)
