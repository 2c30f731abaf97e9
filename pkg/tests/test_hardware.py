"""Hardware model tests: channel formulas, memory, detector, BSM."""

import math
import random

import pytest

from qnetsim.errors import CoincidenceWindowViolation, SlotBusy, SlotOutOfRange
from qnetsim.hardware import (
    BSMParams,
    BSMState,
    ChannelParams,
    DetectorParams,
    DetectorState,
    MemoryArray,
    MemoryParams,
    Photon,
    SlotState,
    dark_count_events,
    propagation_delay,
    quantize_timestamp,
    transmission_probability,
)


def binomial_3sigma(p, n):
    return 3 * math.sqrt(p * (1 - p) / n)


def nearest_multiple_tie_down(t, res):
    """Independent quantization oracle: nearest multiple, ties toward -inf."""
    lo = (t // res) * res
    hi = lo + res
    if t - lo < hi - t:
        return lo
    if hi - t < t - lo:
        return hi
    return lo  # tie


# -- channel formulas ---------------------------------------------------------


def test_propagation_delay_zero_distance():
    assert propagation_delay(ChannelParams(0, 0.2)) == 0


def test_propagation_delay_hand_values():
    # L/c * 1e12 evaluated by hand: 2e5 m / 2e8 m/s = 1e-3 s = 1e9 ps
    assert propagation_delay(ChannelParams(2e5, 0.2, light_speed_m_s=2e8)) == 10**9
    # 1 m / 2e8 m/s = 5e-9 s = 5000 ps
    assert propagation_delay(ChannelParams(1, 0.2, light_speed_m_s=2e8)) == 5000


def test_propagation_delay_linearity():
    rng = random.Random(7)
    for _ in range(1000):
        L = rng.uniform(0.1, 5e5)
        d1 = propagation_delay(ChannelParams(L, 0.2))
        d2 = propagation_delay(ChannelParams(2 * L, 0.2))
        assert abs(d2 - 2 * d1) <= 1


def test_transmission_probability_lossless():
    assert transmission_probability(ChannelParams(0, 0.2)) == 1.0


def test_transmission_probability_hand_values():
    # 10 km * 0.2 dB/km = 2 dB -> 10^-0.2, evaluated independently
    assert transmission_probability(ChannelParams(10_000, 0.2)) == pytest.approx(
        0.630957, abs=1e-6)
    # 50 km * 0.2 dB/km = 10 dB -> exactly 0.1
    assert transmission_probability(ChannelParams(50_000, 0.2)) == pytest.approx(
        0.1, abs=1e-12)


def test_transmission_probability_monotone_and_bounded():
    rng = random.Random(11)
    for _ in range(500):
        L = rng.uniform(0, 2e5)
        a = rng.uniform(0, 2)
        p = transmission_probability(ChannelParams(L, a))
        assert 0 < p <= 1.0
        assert transmission_probability(ChannelParams(L + 1000, a)) <= p
        assert transmission_probability(ChannelParams(L, a + 0.1)) <= p


# -- quantum memory -----------------------------------------------------------


MEM = MemoryParams(coherence_time_s=1.3, frequency_hz=2e4, efficiency=0.75,
                   fidelity=0.9)


def test_memory_params_validation():
    with pytest.raises(ValueError):
        MemoryParams(coherence_time_s=0, frequency_hz=1, efficiency=0.5, fidelity=0.5)
    with pytest.raises(ValueError):
        MemoryParams(coherence_time_s=1, frequency_hz=1, efficiency=1.5, fidelity=0.5)


def test_memory_excite_certain_emission():
    params = MemoryParams(1.0, 1e4, efficiency=1.0, fidelity=1.0)
    array = MemoryArray("r1", 2, params)
    rng = random.Random(0)
    photon = array.excite(0, 100, rng)
    assert isinstance(photon, Photon)
    assert photon.emitted_at == 100
    assert photon.source == ("r1", 0)


def test_memory_excite_certain_failure():
    params = MemoryParams(1.0, 1e4, efficiency=0.0, fidelity=1.0)
    array = MemoryArray("r1", 1, params)
    rng = random.Random(0)
    for k in range(20):
        assert array.excite(0, k * array.params.period_ps, rng) is None


def test_memory_excite_rate_matches_efficiency():
    params = MemoryParams(1.0, 1e6, efficiency=0.8, fidelity=1.0)
    array = MemoryArray("r1", 1, params)
    rng = random.Random(42)
    n = 100_000
    period = params.period_ps
    hits = sum(array.excite(0, k * period, rng) is not None for k in range(n))
    assert abs(hits / n - 0.8) < binomial_3sigma(0.8, n)


def test_memory_excite_respects_period():
    array = MemoryArray("r1", 1, MEM)
    rng = random.Random(1)
    period = MEM.period_ps
    array.excite(0, 0, rng)
    with pytest.raises(SlotBusy):
        array.excite(0, period - 1, rng)
    array.excite(0, period, rng)  # exactly one period later is fine


def test_memory_excite_slot_range_and_entangled_guard():
    array = MemoryArray("r1", 2, MEM)
    rng = random.Random(2)
    with pytest.raises(SlotOutOfRange):
        array.excite(2, 0, rng)
    array.set_entangled(0, ("r2", 0), since=0, fidelity=0.9)
    with pytest.raises(SlotBusy):
        array.excite(0, 10 * MEM.period_ps, rng)


def test_memory_reserved_slot_can_excite():
    array = MemoryArray("r1", 1, MEM)
    array.reserve(0)
    assert array.slot_state(0) is SlotState.RESERVED
    rng = random.Random(3)
    array.excite(0, 0, rng)
    assert array.slot_state(0) is SlotState.EXCITED


def test_memory_expiry_time():
    array = MemoryArray("r1", 1, MEM)
    array.set_entangled(0, ("r2", 0), since=500, fidelity=0.9)
    assert array.expiry_time(0) == 500 + int(1.3e12)


# -- photon detector ----------------------------------------------------------


DET = DetectorParams(efficiency=0.9, count_rate_hz=2.5e7, dark_count_rate_hz=100,
                     time_resolution_ps=100)


def test_quantize_matches_oracle():
    rng = random.Random(5)
    for _ in range(2000):
        res = rng.choice([1, 3, 50, 100, 150])
        t = rng.randrange(0, 10**9)
        assert quantize_timestamp(t, res) == nearest_multiple_tie_down(t, res)


def test_detector_quantizes_to_resolution():
    det = DetectorState(DetectorParams(1.0, 2.5e7, 0, 100))
    ev = det.observe(12345, is_real_photon=True, rng=random.Random(0))
    assert ev.timestamp == 12300  # nearest multiple of 100, tie-down oracle


def test_detector_dead_time_blocks_second_photon():
    # count_rate 1e8 Hz -> dead time 1e4 ps; second photon 1 ns later is eaten
    det = DetectorState(DetectorParams(1.0, 1e8, 0, 1))
    rng = random.Random(0)
    assert det.observe(0, True, rng) is not None
    assert det.observe(1000, True, rng) is None
    assert det.observe(10_000, True, rng) is not None


def test_detector_zero_efficiency_never_clicks():
    det = DetectorState(DetectorParams(0.0, 1e8, 0, 1))
    rng = random.Random(0)
    for t in range(0, 10**6, 10**4):
        assert det.observe(t, True, rng) is None


def test_dark_counts_zero_rate():
    det = DetectorParams(0.9, 1e9, 0, 100)
    assert dark_count_events(det, (0, 10**12), random.Random(0)) == []


def test_dark_counts_poisson_mean():
    # 100 Hz over 10 s -> Poisson(1000); mean of 200 windows within 3*sqrt(1000/200)
    det = DetectorParams(0.9, 1e9, 100, 100)
    rng = random.Random(123)
    window = (0, 10 * 10**12)
    counts = [len(dark_count_events(det, window, rng)) for _ in range(200)]
    mean = sum(counts) / len(counts)
    assert abs(mean - 1000) < 3 * math.sqrt(1000 / 200)


def test_dark_counts_range_quantization_dead_time():
    det = DetectorParams(0.9, 1e9, 5000, 100)  # dead time 1000 ps
    rng = random.Random(9)
    t0, t1 = 10**6, 10**6 + 10**10
    events = dark_count_events(det, (t0, t1), rng)
    assert events
    last = None
    for ev in events:
        assert t0 <= ev.timestamp <= t1
        assert ev.timestamp % 100 == 0
        if last is not None:
            assert ev.timestamp - last >= 1000
        last = ev.timestamp


# -- Bell state measurement -----------------------------------------------------


def ideal_bsm(efficiency=1.0):
    det = DetectorParams(efficiency=efficiency, count_rate_hz=0, dark_count_rate_hz=0,
                         time_resolution_ps=1)
    return BSMState(BSMParams(detector=det, coincidence_window_ps=200))


def photon_pair(t):
    return (Photon(emitted_at=t, source=("a", 0)),
            Photon(emitted_at=t, source=("b", 0)))


def test_bsm_missing_photon_fails():
    bsm = ideal_bsm()
    rng = random.Random(0)
    pa, pb = photon_pair(0)
    assert bsm.measure(None, pb, 0, rng).success is False
    assert bsm.measure(pa, None, 0, rng).success is False
    dead = Photon(emitted_at=0, source=("a", 0), alive=False)
    assert bsm.measure(dead, pb, 0, rng).success is False


def test_bsm_success_rate_ideal():
    # both photons always detected -> intrinsic 1/2 success
    bsm = ideal_bsm(1.0)
    rng = random.Random(21)
    n = 100_000
    wins = 0
    for k in range(n):
        pa, pb = photon_pair(k * 10**6)
        out = bsm.measure(pa, pb, k * 10**6, rng)
        if out.success:
            assert out.bell_index in (1, 2)
            wins += 1
    assert abs(wins / n - 0.5) < binomial_3sigma(0.5, n)


def test_bsm_success_rate_with_detector_efficiency():
    # p = 1/2 * eta^2 = 0.405 for eta = 0.9
    bsm = ideal_bsm(0.9)
    rng = random.Random(22)
    n = 100_000
    wins = sum(bsm.measure(*photon_pair(k * 10**6), k * 10**6, rng).success
               for k in range(n))
    assert abs(wins / n - 0.405) < binomial_3sigma(0.405, n)


def test_bsm_bell_index_uniform_over_distinguishable_states():
    bsm = ideal_bsm(1.0)
    rng = random.Random(23)
    seen = {1: 0, 2: 0}
    n = 20_000
    for k in range(n):
        out = bsm.measure(*photon_pair(k * 10**6), k * 10**6, rng)
        if out.success:
            seen[out.bell_index] += 1
    total = seen[1] + seen[2]
    assert abs(seen[1] / total - 0.5) < binomial_3sigma(0.5, total)


def test_bsm_coincidence_window_violation():
    bsm = ideal_bsm()
    rng = random.Random(0)
    pa, pb = photon_pair(0)
    with pytest.raises(CoincidenceWindowViolation):
        bsm.measure(pa, pb, 500, rng, arrival_a=0, arrival_b=500)


def test_stochastic_ops_reproducible():
    def trace(seed):
        rng = random.Random(seed)
        array = MemoryArray("r1", 1, MemoryParams(1.0, 1e6, 0.5, 0.9))
        bsm = ideal_bsm(0.7)
        out = []
        for k in range(200):
            out.append(array.excite(0, k * array.params.period_ps, rng) is not None)
            res = bsm.measure(*photon_pair(k * 10**6), k * 10**6, rng)
            out.append((res.success, res.bell_index))
        return out

    assert trace(99) == trace(99)
    assert trace(99) != trace(100)
