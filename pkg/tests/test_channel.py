import math

import numpy as np
import pytest

from d2dframe.channel import (CUE, D2D_MODEL, DRX, DTX, FAP, FAP_MODEL, FUE,
                              LINKS, MBS, MBS_MODEL, PathlossModel, PowerVector,
                              SystemParams, Topology, default_link_class,
                              gains_from_fading, noise_power, pathloss_db,
                              sample_fading, sample_gains, sinr)

from conftest import make_gains


class TestUnits:
    def test_noise_default_value(self):
        n = noise_power(-174.0, 20e6)
        assert n == pytest.approx(7.96e-11, rel=1e-3)
        assert 10 * math.log10(n) == pytest.approx(-100.99, abs=0.01)

    def test_noise_identities(self):
        assert noise_power(0.0, 1.0) == pytest.approx(1.0)
        assert noise_power(-174.0, 1.0) == pytest.approx(10 ** -17.4)

    def test_noise_rejects_zero_bandwidth(self):
        with pytest.raises(ValueError):
            noise_power(-174.0, 0.0)

    def test_pathloss_examples(self):
        assert pathloss_db(D2D_MODEL, 10) == pytest.approx(68.0)
        assert pathloss_db(FAP_MODEL, 10) == pytest.approx(58.5)
        assert pathloss_db(MBS_MODEL, 500) == pytest.approx(116.78, abs=0.01)

    def test_pathloss_rejects_nonpositive_distance(self):
        with pytest.raises(ValueError):
            pathloss_db(D2D_MODEL, 0.0)

    def test_pathloss_model_needs_positive_slope(self):
        with pytest.raises(ValueError):
            PathlossModel(10.0, 0.0)


class TestParams:
    def test_default_layout(self):
        p = SystemParams()
        assert 10 * math.log10(p.p_max_mbs) == pytest.approx(43.0)
        assert 10 * math.log10(p.p_max_dtx) == pytest.approx(23.0)
        assert 10 * math.log10(p.p_max_fap) == pytest.approx(21.0)
        assert (p.sinr_min_cue, p.sinr_min_fue, p.sinr_min_drx) == pytest.approx(
            (1.0, 5.012, 1.995), abs=1e-3)

    def test_from_db_round_trip(self):
        p = SystemParams.from_db(p_max_dtx_dbm=10.0, sinr_min_drx_db=10.0)
        assert p.p_max_dtx == pytest.approx(10.0)
        assert p.sinr_min_drx == pytest.approx(10.0)

    @pytest.mark.parametrize("field", ["p_max_dtx", "sinr_min_fue", "bandwidth_hz"])
    def test_rejects_nonpositive(self, field):
        with pytest.raises(ValueError):
            SystemParams(**{field: 0.0})

    def test_link_classes(self):
        assert default_link_class(DTX, MBS) == "mbs"
        assert default_link_class(MBS, DRX) == "mbs"
        assert default_link_class(FAP, FUE) == "fap"
        assert default_link_class(FAP, DRX) == "fap"
        assert default_link_class(DTX, DRX) == "d2d"
        assert default_link_class(CUE, FUE) == "d2d"

    def test_link_class_override(self):
        p = SystemParams(link_classes={(FAP, DRX): "d2d"})
        assert p.model_for(FAP, DRX) == D2D_MODEL

    def test_scaled(self):
        p = SystemParams().scaled(10.0)
        assert p.p_max_fap == pytest.approx(10 * SystemParams().p_max_fap)
        assert p.sinr_min_fue == SystemParams().sinr_min_fue


class TestTopology:
    def test_diagonal_layout(self):
        t = Topology.default_layout(d_mr=600.0, d=20.0)
        assert t.distance(MBS, DRX) == pytest.approx(600.0)
        assert t.distance(MBS, DTX) == pytest.approx(580.0)
        assert t.d == pytest.approx(20.0)
        assert t.positions[DRX] == pytest.approx((424.26, 424.26), abs=0.01)

    def test_missing_node(self):
        with pytest.raises(ValueError):
            Topology({MBS: (0, 0)})


class TestFading:
    def test_deterministic(self):
        t = Topology.default_layout()
        p = SystemParams()
        a = sample_gains(t, p, np.random.default_rng(7))
        b = sample_gains(t, p, np.random.default_rng(7))
        assert a.g == b.g

    def test_unit_mean(self):
        rng = np.random.default_rng(0)
        h = [sample_fading(rng)[(DTX, DRX)] for _ in range(100_000)]
        assert np.mean(h) == pytest.approx(1.0, abs=0.02)

    def test_no_fading_gain(self):
        t = Topology.default_layout(d_mr=600.0, d=10.0)
        g = sample_gains(t, SystemParams(), None)
        assert g(DTX, DRX) == pytest.approx(10 ** -6.8)

    def test_every_link_present(self):
        g = sample_gains(Topology.default_layout(), SystemParams(), None)
        assert set(g.g) == set(LINKS)

    def test_gain_is_fading_times_pathloss(self):
        t = Topology.default_layout()
        p = SystemParams()
        h = sample_fading(np.random.default_rng(3))
        g = gains_from_fading(t, p, h)
        for link in LINKS:
            pl = pathloss_db(p.model_for(*link), t.distance(*link))
            assert g.g[link] == pytest.approx(h[link] * 10 ** (-pl / 10))


class TestSinr:
    def test_interference_free(self):
        g = make_gains(direct=1.0, cross=0.0, noise=1.0)
        for rx in (DRX, CUE, FUE):
            assert sinr(PowerVector(1, 1, 1), g, rx) == pytest.approx(1.0)

    def test_symmetric(self):
        g = make_gains(direct=1.0, cross=1.0, noise=1.0)
        for rx in (DRX, CUE, FUE):
            assert sinr(PowerVector(1, 1, 1), g, rx) == pytest.approx(1 / 3)

    def test_hand_case(self):
        g = make_gains(direct=1.0, cross=0.0, noise=1.0, MBS_DRX=0.5, FAP_DRX=0.5)
        assert sinr(PowerVector(2, 1, 1), g, DRX) == pytest.approx(1.0)

    def test_rejects_non_reuse_receiver(self):
        with pytest.raises(ValueError):
            sinr(PowerVector(1, 1, 1), make_gains(), MBS)

    def test_power_vector_validation(self):
        with pytest.raises(ValueError):
            PowerVector(-1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            PowerVector(math.inf, 1.0, 1.0)
