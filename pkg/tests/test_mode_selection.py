import math

import numpy as np
import pytest

from d2dframe.channel import (DRX, DTX, SystemParams, Topology, gains_from_fading,
                              sample_fading, sample_gains)
from d2dframe.mode_selection import (CELLULAR, DEDICATED, REUSE,
                                     adaptive_distance_threshold,
                                     cellular_two_hop_sinr, d2d_sinr_at_max,
                                     distance_gate, select_mode)

from conftest import make_gains, unit_params


class TestSinrs:
    def test_two_hop_equal_branches(self):
        g = make_gains(direct=0.0, cross=0.0, DTX_MBS=0.1, MBS_DRX=0.1)
        assert cellular_two_hop_sinr(g, unit_params()) == pytest.approx(0.1)

    def test_two_hop_takes_weaker_hop(self):
        g = make_gains(direct=0.0, cross=0.0, DTX_MBS=0.1, MBS_DRX=0.4)
        assert cellular_two_hop_sinr(g, unit_params()) == pytest.approx(0.1)

    def test_two_hop_interference_limit(self):
        g = make_gains(direct=0.0, cross=0.0, DTX_MBS=0.1, MBS_DRX=0.1,
                       FAP_MBS=1e9, FAP_DRX=1e9)
        assert cellular_two_hop_sinr(g, unit_params()) < 1e-9

    def test_d2d_interference_free(self):
        g = make_gains(direct=1.0, cross=0.0)
        assert d2d_sinr_at_max(g, unit_params()) == pytest.approx(1.0)

    def test_d2d_dead_link(self):
        g = make_gains(direct=0.0, cross=0.3)
        assert d2d_sinr_at_max(g, unit_params()) == 0.0

    def test_d2d_hand_case(self):
        g = make_gains(direct=1.0, cross=0.0, MBS_DRX=0.5, FAP_DRX=0.5)
        assert d2d_sinr_at_max(g, unit_params()) == pytest.approx(0.5)


class TestAdaptiveThreshold:
    def test_anchor_distance(self):
        top = Topology.default_layout(d_mr=600.0, d=75.9)
        g = sample_gains(top, SystemParams(), None)
        assert adaptive_distance_threshold(g, SystemParams()) == pytest.approx(75.9, abs=2.0)

    def test_ignores_pair_path_gain(self):
        p = SystemParams()
        g = sample_gains(Topology.default_layout(600.0, 20.0), p, None)
        gg = dict(g.g)
        gg[(DTX, DRX)] *= 1e-3
        g2 = type(g)(gg, g.h, g.noise_mw)
        assert adaptive_distance_threshold(g2, p) == adaptive_distance_threshold(g, p)

    @pytest.mark.parametrize("seed", range(20))
    def test_break_even_is_exact(self, seed):
        # at d = threshold the D2D SINR equals the cellular SINR for the same
        # fading draw; the DTx->MBS gain is held fixed while DTx moves
        p = SystemParams()
        rng = np.random.default_rng(seed)
        h = sample_fading(rng)
        g = gains_from_fading(Topology.default_layout(600.0, 20.0), p, h)
        thr = adaptive_distance_threshold(g, p)
        model = p.model_for(DTX, DRX)
        g_new = dict(g.g)
        g_new[(DTX, DRX)] = h[(DTX, DRX)] * 10 ** (-(model.intercept_db
                                                  + model.slope_db_per_decade
                                                  * math.log10(thr)) / 10)
        g2 = type(g)(g_new, g.h, g.noise_mw)
        assert d2d_sinr_at_max(g2, p) == pytest.approx(cellular_two_hop_sinr(g, p),
                                                       rel=1e-9)

    def test_interference_drives_threshold_to_zero(self):
        p = SystemParams()
        g = sample_gains(Topology.default_layout(600.0, 20.0), p, None)
        small = []
        for boost in (1e3, 1e6, 1e9):
            gg = dict(g.g)
            gg[("MBS", "DRX")] *= boost
            gg[("FAP", "DRX")] *= boost
            small.append(adaptive_distance_threshold(type(g)(gg, g.h, g.noise_mw), p))
        assert small[0] > small[1] > small[2]
        assert small[2] < 1.0

    def test_dead_cellular_path_gives_infinite_threshold(self):
        g = make_gains(direct=1.0, cross=0.0)
        assert adaptive_distance_threshold(g, unit_params()) == math.inf


class TestGate:
    def test_inclusive_boundary(self):
        assert distance_gate(50.0, 10.0, SystemParams(d_constant_m=50.0))

    def test_adaptive_dominates(self):
        assert distance_gate(60.0, 75.9, SystemParams(d_constant_m=50.0))

    def test_exceeds_both(self):
        assert not distance_gate(100.0, 75.9, SystemParams(d_constant_m=50.0))


class TestSelectMode:
    def _gains(self, d2d, cell):
        # unit powers/noise: D2D SINR = g_TR, cellular SINR = g_TM = g_MR
        return make_gains(direct=0.0, cross=0.0, DTX_DRX=d2d, DTX_MBS=cell,
                          MBS_DRX=cell)

    def test_dedicated_ignores_interference(self):
        m = select_mode(self._gains(0.01, 1.0), unit_params(), 10.0, True)
        assert m.mode == DEDICATED
        assert not m.interference_gate_passed

    def test_reuse(self):
        m = select_mode(self._gains(1.0, 0.1), unit_params(), 10.0, False)
        assert m.mode == REUSE
        # the MBS downlink of the cellular path also interferes at DRx
        assert m.d2d_sinr_at_max == pytest.approx(1.0 / 1.1)
        assert m.cellular_two_hop_sinr == pytest.approx(0.1)

    def test_gate_fails(self):
        p = unit_params(d_constant_m=50.0)
        g = self._gains(1.0, 0.1)
        m = select_mode(g, p, 1e9, True)
        assert m.mode == CELLULAR
        assert not m.distance_gate_passed
        assert m.interference_gate_passed

    def test_no_orthogonal_and_interference_fails(self):
        m = select_mode(self._gains(0.01, 1.0), unit_params(), 10.0, False)
        assert m.mode == CELLULAR
        assert m.distance_gate_passed

    def test_threshold_is_max_of_both(self):
        m = select_mode(self._gains(1.0, 0.1), unit_params(d_constant_m=50.0), 10.0, False)
        assert m.d_threshold_m == max(50.0, m.d_adaptive_m)
