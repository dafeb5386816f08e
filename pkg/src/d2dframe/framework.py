"""
The full per-epoch decision: pick a mode, then either allocate spectrum
(dedicated / cellular) or control powers (reuse).
"""

import math
from dataclasses import dataclass, field, asdict
from typing import Dict, Optional, Sequence

from .channel import REUSE_RX, LinkGains, PowerVector, SystemParams, sinr
from .mode_selection import CELLULAR, DEDICATED, REUSE, ModeDecision, select_mode
from .ortho_alloc import (InfeasibleRateError, SnrSet, cellular_constrained,
                          cellular_unconstrained, dedicated_constrained,
                          dedicated_unconstrained)
from .reuse_power import vertex_search


@dataclass
class TrialRecord:
    mode: str
    decision: ModeDecision
    # user -> rate, users keyed "CUE", "D2D", "FUE"
    rates: Dict[str, float]
    sum_rate: float
    powers: Optional[PowerVector] = None
    fractions: Dict[str, float] = field(default_factory=dict)
    reuse_infeasible: bool = False
    infeasible: bool = False
    trial: Optional[int] = None
    point: Optional[int] = None

    def to_dict(self):
        out = asdict(self)
        if self.powers is not None:
            out["powers"] = dict(zip(("p_dtx", "p_mbs", "p_fap"), self.powers.as_tuple()))
        return out


def _cellular(snrs, r_mins, step):
    if r_mins is None:
        return cellular_unconstrained(snrs, step)
    return cellular_constrained(snrs, r_mins, step)


def run_trial(gains: LinkGains, params: SystemParams, d: float,
              orthogonal_available: bool, r_mins: Optional[Sequence[float]] = None,
              lattice_step: float = 1e-3) -> TrialRecord:
    """One pass of the decision pipeline for a single fading realization.

    ``r_mins`` (CUE, D2D, FUE) switches the allocators to their
    rate-constrained variants. A Reuse decision whose power region turns
    out empty falls back to Cellular with ``reuse_infeasible`` set.
    """
    decision = select_mode(gains, params, d, orthogonal_available)
    snrs = SnrSet.from_gains(gains, params)

    if decision.mode == DEDICATED:
        infeasible = False
        if r_mins is None:
            alloc = dedicated_unconstrained(snrs.dedicated)
        else:
            try:
                alloc = dedicated_constrained(snrs.dedicated, r_mins)
            except InfeasibleRateError:
                alloc = dedicated_unconstrained(snrs.dedicated)
                infeasible = True
        users = ("CUE", "D2D", "FUE")
        return TrialRecord(
            mode=DEDICATED, decision=decision,
            rates=dict(zip(users, alloc.per_user_rate)), sum_rate=alloc.sum_rate,
            powers=PowerVector.max_of(params),
            fractions=dict(zip(users, alloc.fractions)), infeasible=infeasible)

    reuse_infeasible = False
    if decision.mode == REUSE:
        sol = vertex_search(gains, params)
        if sol.feasible:
            rates = {u: math.log2(1 + sinr(sol.powers, gains, rx))
                     for u, rx in zip(("D2D", "CUE", "FUE"), REUSE_RX)}
            return TrialRecord(mode=REUSE, decision=decision, rates=rates,
                               sum_rate=sol.sum_rate_bps_hz, powers=sol.powers)
        reuse_infeasible = True

    alloc = _cellular(snrs, r_mins, lattice_step)
    return TrialRecord(
        mode=CELLULAR, decision=decision,
        rates=dict(zip(("CUE", "D2D", "FUE"), alloc.per_user_rate)),
        sum_rate=alloc.sum_rate, powers=PowerVector.max_of(params),
        fractions={"alpha": alloc.alpha, "alpha_prime": alloc.alpha_prime,
                   "beta": alloc.beta, "beta_prime": alloc.beta_prime},
        reuse_infeasible=reuse_infeasible, infeasible=not alloc.feasible)
