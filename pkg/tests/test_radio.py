import math

import numpy as np
import pytest

import oracles
from chrome_handover.radio import (
    AccessNode,
    PropagationConfig,
    Rat,
    crossover_ratio,
    distance,
    free_space_loss_db,
    in_coverage,
    path_loss_db,
    rssi_dbm,
)

GNB = AccessNode.gnb("gNB", (0.0, 0.0))
AP = AccessNode.wifi_ap("AP2", (0.0, 0.0))


def test_rat_defaults():
    assert (GNB.tx_power, GNB.frequency, GNB.range) == (16.0, 2.412e9, 150.0)
    assert (AP.tx_power, AP.frequency, AP.range) == (2.0, 5.18e9, 60.0)
    assert AccessNode.of_rat("x", "WiFi", (1, 2), range=30).range == 30
    assert AP.rat is Rat.WIFI


def test_node_validation():
    with pytest.raises(ValueError):
        AccessNode.gnb("g", (0, 0), range=0)
    with pytest.raises(ValueError):
        AccessNode.gnb("g", (0, 0), capacity=-1)


def test_free_space_anchor_matches_oracle():
    assert free_space_loss_db(1.0, 2.412e9) == pytest.approx(oracles.fspl_db(1.0, 2.412e9), abs=1e-9)
    assert path_loss_db(1.0, 2.412e9) == pytest.approx(40.09, abs=0.01)
    assert path_loss_db(100.0, 2.412e9) == pytest.approx(110.09, abs=0.01)


def test_doubling_distance_adds_fixed_loss():
    for d in (1.0, 3.0, 40.0):
        delta = path_loss_db(2 * d, 5.18e9) - path_loss_db(d, 5.18e9)
        assert delta == pytest.approx(35 * math.log10(2), abs=1e-9)


def test_path_loss_clamps_and_validates():
    assert path_loss_db(0.2, 2.412e9) == path_loss_db(1.0, 2.412e9)
    with pytest.raises(ValueError):
        path_loss_db(0.0, 2.412e9)
    with pytest.raises(ValueError):
        path_loss_db(5.0, -1.0)


def test_rssi_at_node_position():
    assert rssi_dbm(GNB, (0.0, 0.0)) == pytest.approx(16 - 40.09, abs=0.01)


def test_rssi_monotone_and_symmetric():
    vals = [rssi_dbm(GNB, (d, 0.0)) for d in np.linspace(1, 150, 50)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert rssi_dbm(GNB, (30.0, 40.0)) == pytest.approx(rssi_dbm(GNB, (-50.0, 0.0)))


def test_gnb_beats_wifi_at_equal_distance():
    for d in (1.0, 10.0, 60.0):
        assert rssi_dbm(GNB, (d, 0.0)) > rssi_dbm(AP, (d, 0.0))


def test_crossover_ratio():
    r = crossover_ratio(GNB, AP)
    gnb = AccessNode.gnb("gNB", (r * 10.0, 0.0))
    ap = AccessNode.wifi_ap("AP", (-10.0, 0.0))
    assert rssi_dbm(gnb, (0.0, 0.0)) == pytest.approx(rssi_dbm(ap, (0.0, 0.0)), abs=1e-9)


def test_shadowing_is_reproducible_and_keyed():
    cfg = PropagationConfig(shadowing_sigma=6.0, rng_seed=7)
    a = rssi_dbm(GNB, (20.0, 0.0), cfg, epoch=3, ue_key=1)
    assert a == rssi_dbm(GNB, (20.0, 0.0), cfg, epoch=3, ue_key=1)
    assert a != rssi_dbm(GNB, (20.0, 0.0), cfg, epoch=4, ue_key=1)
    base = rssi_dbm(GNB, (20.0, 0.0))
    draws = np.array([rssi_dbm(GNB, (20.0, 0.0), cfg, epoch=k) for k in range(2000)]) - base
    assert abs(draws.mean()) < 0.5
    assert draws.std() == pytest.approx(6.0, rel=0.1)


def test_coverage_boundary_inclusive():
    assert in_coverage(GNB, (150.0, 0.0))
    assert not in_coverage(AP, (61.0, 0.0))
    assert in_coverage(AP, (0.0, 0.0))
    assert distance((0, 0), (3, 4)) == 5


def test_propagation_config_validation():
    with pytest.raises(ValueError):
        PropagationConfig(exponent=0)
    with pytest.raises(ValueError):
        PropagationConfig(shadowing_sigma=-1)
