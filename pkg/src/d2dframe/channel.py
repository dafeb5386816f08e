"""
Single-cell geometry, path loss, Rayleigh block fading and SINR.

All internal quantities are linear: powers in mW, gains and SINRs as
plain ratios. dB / dBm only appear in the constructors that read
configuration values.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

MBS, FAP, CUE, FUE, DTX, DRX = "MBS", "FAP", "CUE", "FUE", "DTX", "DRX"
NODES = (MBS, FAP, CUE, FUE, DTX, DRX)

TRANSMITTERS = (DTX, MBS, FAP, CUE)
RECEIVERS = (DRX, CUE, FUE, MBS)
# every (tx, rx) pair the decision modules may ask for; fixed order so
# that a given RNG state always maps to the same fading draws
LINKS = tuple((t, r) for t in TRANSMITTERS for r in RECEIVERS if t != r)

# reuse-mode transmitter -> its intended receiver
SERVES = {DTX: DRX, MBS: CUE, FAP: FUE}
REUSE_TX = (DTX, MBS, FAP)
REUSE_RX = (DRX, CUE, FUE)


def dbm_to_mw(dbm):
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw):
    return 10.0 * math.log10(mw)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class PathlossModel:
    """``PL(d) = intercept_db + slope_db_per_decade * log10(d)``."""
    intercept_db: float
    slope_db_per_decade: float

    def __post_init__(self):
        if not self.slope_db_per_decade > 0:
            raise ValueError("path-loss slope must be positive")


D2D_MODEL = PathlossModel(28.0, 40.0)
MBS_MODEL = PathlossModel(15.3, 37.6)
FAP_MODEL = PathlossModel(38.5, 20.0)


def pathloss_db(model: PathlossModel, d: float) -> float:
    if not d > 0:
        raise ValueError("distance must be positive, got %r" % d)
    return model.intercept_db + model.slope_db_per_decade * math.log10(d)


def noise_power(density_dbm_hz: float, bandwidth_hz: float) -> float:
    """Thermal noise over ``bandwidth_hz`` in mW."""
    if not bandwidth_hz > 0:
        raise ValueError("bandwidth must be positive")
    return 10.0 ** ((density_dbm_hz + 10.0 * math.log10(bandwidth_hz)) / 10.0)


def default_link_class(tx: str, rx: str) -> str:
    """Propagation class of a link.

    Any link terminating at or leaving the macro base station is a macro
    link; other links take the class of their transmitter (femto for the
    FAP, short-range D2D for user equipment).
    """
    if MBS in (tx, rx):
        return "mbs"
    if tx == FAP:
        return "fap"
    return "d2d"


@dataclass
class SystemParams:
    """Radio parameters, stored in mW and linear ratios.

    Use :meth:`from_db` to build from the dBm / dB values of a
    configuration file.
    """
    p_max_dtx: float = dbm_to_mw(23.0)
    p_max_mbs: float = dbm_to_mw(43.0)
    p_max_fap: float = dbm_to_mw(21.0)
    p_max_cue: float = dbm_to_mw(23.0)
    sinr_min_drx: float = db_to_linear(3.0)
    sinr_min_cue: float = db_to_linear(0.0)
    sinr_min_fue: float = db_to_linear(7.0)
    bandwidth_hz: float = 20e6
    noise_density_dbm_hz: float = -174.0
    d_constant_m: float = 50.0
    path_loss_exponent_n: float = 4.0
    pathloss_models: Dict[str, PathlossModel] = field(default_factory=lambda: {
        "d2d": D2D_MODEL, "mbs": MBS_MODEL, "fap": FAP_MODEL})
    # explicit per-link class overrides, e.g. {("FAP", "MBS"): "fap"}
    link_classes: Dict[Tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("p_max_dtx", "p_max_mbs", "p_max_fap", "p_max_cue"):
            if not getattr(self, name) > 0:
                raise ValueError("%s must be positive" % name)
        for name in ("sinr_min_drx", "sinr_min_cue", "sinr_min_fue"):
            if not getattr(self, name) > 0:
                raise ValueError("%s must be positive" % name)
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")
        if self.d_constant_m < 0:
            raise ValueError("d_constant_m must be non-negative")
        if not self.path_loss_exponent_n > 0:
            raise ValueError("path_loss_exponent_n must be positive")

    @classmethod
    def from_db(cls, p_max_dtx_dbm=23.0, p_max_mbs_dbm=43.0, p_max_fap_dbm=21.0,
                p_max_cue_dbm=23.0, sinr_min_drx_db=3.0, sinr_min_cue_db=0.0,
                sinr_min_fue_db=7.0, **kw):
        return cls(p_max_dtx=dbm_to_mw(p_max_dtx_dbm),
                   p_max_mbs=dbm_to_mw(p_max_mbs_dbm),
                   p_max_fap=dbm_to_mw(p_max_fap_dbm),
                   p_max_cue=dbm_to_mw(p_max_cue_dbm),
                   sinr_min_drx=db_to_linear(sinr_min_drx_db),
                   sinr_min_cue=db_to_linear(sinr_min_cue_db),
                   sinr_min_fue=db_to_linear(sinr_min_fue_db), **kw)

    @property
    def noise_mw(self) -> float:
        return noise_power(self.noise_density_dbm_hz, self.bandwidth_hz)

    def p_max(self, tx: str) -> float:
        return {DTX: self.p_max_dtx, MBS: self.p_max_mbs,
                FAP: self.p_max_fap, CUE: self.p_max_cue}[tx]

    def sinr_min(self, rx: str) -> float:
        return {DRX: self.sinr_min_drx, CUE: self.sinr_min_cue,
                FUE: self.sinr_min_fue}[rx]

    def model_for(self, tx: str, rx: str) -> PathlossModel:
        cls_ = self.link_classes.get((tx, rx)) or default_link_class(tx, rx)
        return self.pathloss_models[cls_]

    def scaled(self, factor: float) -> "SystemParams":
        """Copy with every max power multiplied by ``factor``."""
        out = SystemParams(**{**self.__dict__})
        for name in ("p_max_dtx", "p_max_mbs", "p_max_fap", "p_max_cue"):
            setattr(out, name, getattr(self, name) * factor)
        return out


@dataclass
class Topology:
    positions: Dict[str, Tuple[float, float]]

    def __post_init__(self):
        missing = [n for n in NODES if n not in self.positions]
        if missing:
            raise ValueError("topology missing nodes: %s" % ", ".join(missing))
        for n, xy in self.positions.items():
            if len(xy) != 2 or not all(math.isfinite(float(c)) for c in xy):
                raise ValueError("bad coordinates for %s: %r" % (n, xy))

    def distance(self, a: str, b: str) -> float:
        (xa, ya), (xb, yb) = self.positions[a], self.positions[b]
        return math.hypot(xa - xb, ya - yb)

    @property
    def d(self) -> float:
        """DTx-DRx separation."""
        return self.distance(DTX, DRX)

    @classmethod
    def default_layout(cls, d_mr=600.0, d=20.0, **overrides):
        """Reference layout with the D2D pair on the x = y diagonal.

        The DRx sits ``d_mr`` metres from the MBS and the DTx ``d`` metres
        further in, towards the MBS.
        """
        u = 1.0 / math.sqrt(2.0)
        pos = {MBS: (0.0, 0.0), CUE: (500.0, 0.0), FAP: (100.0, 200.0),
               FUE: (110.0, 200.0),
               DRX: (d_mr * u, d_mr * u),
               DTX: ((d_mr - d) * u, (d_mr - d) * u)}
        pos.update(overrides)
        return cls(pos)


@dataclass
class LinkGains:
    """Channel power gains of one block-fading realization.

    ``g[(t, r)] = h[(t, r)] * 10^(-PL(d_tr)/10)`` where ``h`` is the
    squared fading magnitude.
    """
    g: Dict[Tuple[str, str], float]
    h: Dict[Tuple[str, str], float]
    noise_mw: float

    def __post_init__(self):
        if not self.noise_mw > 0:
            raise ValueError("noise_mw must be positive")

    def __call__(self, tx: str, rx: str) -> float:
        return self.g[(tx, rx)]

    def scaled_noise(self, factor: float) -> "LinkGains":
        return LinkGains(dict(self.g), dict(self.h), self.noise_mw * factor)


def sample_fading(rng: Optional[np.random.Generator]) -> Dict[Tuple[str, str], float]:
    """Unit-mean exponential |h|^2 for every link, or all ones if ``rng`` is None."""
    if rng is None:
        return {link: 1.0 for link in LINKS}
    draws = rng.exponential(1.0, size=len(LINKS))
    return {link: float(v) for link, v in zip(LINKS, draws)}


def gains_from_fading(topology: Topology, params: SystemParams,
                      h: Dict[Tuple[str, str], float],
                      noise_mw: Optional[float] = None) -> LinkGains:
    g = {}
    for (t, r) in LINKS:
        pl = pathloss_db(params.model_for(t, r), topology.distance(t, r))
        g[(t, r)] = h[(t, r)] * 10.0 ** (-pl / 10.0)
    return LinkGains(g, dict(h), params.noise_mw if noise_mw is None else noise_mw)


def sample_gains(topology: Topology, params: SystemParams,
                 rng: Optional[np.random.Generator]) -> LinkGains:
    """Draw one fading realization; ``rng=None`` forces ``|h|^2 = 1``."""
    return gains_from_fading(topology, params, sample_fading(rng))


@dataclass(frozen=True)
class PowerVector:
    p_dtx: float
    p_mbs: float
    p_fap: float

    def __post_init__(self):
        for v in (self.p_dtx, self.p_mbs, self.p_fap):
            if not (math.isfinite(v) and v >= 0):
                raise ValueError("powers must be finite and non-negative: %r"
                                 % (self,))

    def as_tuple(self):
        return (self.p_dtx, self.p_mbs, self.p_fap)

    def of(self, tx: str) -> float:
        return {DTX: self.p_dtx, MBS: self.p_mbs, FAP: self.p_fap}[tx]

    @classmethod
    def max_of(cls, params: SystemParams) -> "PowerVector":
        return cls(params.p_max_dtx, params.p_max_mbs, params.p_max_fap)


def sinr(powers: PowerVector, gains: LinkGains, receiver: str) -> float:
    """SINR at DRX, CUE or FUE with DTX, MBS and FAP all transmitting."""
    if receiver not in REUSE_RX:
        raise ValueError("receiver must be one of %s" % (REUSE_RX,))
    signal = 0.0
    interference = 0.0
    for tx in REUSE_TX:
        rx_power = powers.of(tx) * gains.g[(tx, receiver)]
        if SERVES[tx] == receiver:
            signal = rx_power
        else:
            interference += rx_power
    return signal / (interference + gains.noise_mw)
