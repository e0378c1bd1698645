import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dostbc import construct
from dostbc.channel import (PowerConfig, draw_channels, relay_encode,
                            repetition_power_profile, simulate_dostbc_batch,
                            simulate_dostbc_frame, simulate_repetition_batch,
                            simulate_repetition_frame)
from dostbc.verifier import assemble_code_matrix, noise_covariance


def test_draws_reproducible():
    a = draw_channels(np.random.default_rng(7), 4)
    b = draw_channels(np.random.default_rng(7), 4)
    assert np.array_equal(a.h, b.h) and np.array_equal(a.f, b.f)


def test_draw_statistics():
    d = draw_channels(np.random.default_rng(1), 3, size=100_000)
    assert np.mean(np.abs(d.h) ** 2) == pytest.approx(1, rel=0.01)
    assert np.mean(np.abs(d.f) ** 2) == pytest.approx(1, rel=0.01)
    corr = np.mean(d.h[:, 0] * d.f[:, 0].conj())
    assert abs(corr) < 0.02


def test_relay_encode_small_code():
    code = construct(2, 2)
    h2, rho = 0.6 - 0.2j, 0.9
    s = np.array([1 + 1j, -1 + 0.5j])
    x = relay_encode(code.relays[1], h2 * s, rho)
    assert np.allclose(x, rho * np.conj(h2) * np.array([s[1].conj(), s[0].conj()]))
    assert not relay_encode(code.relays[0], np.zeros(2), rho).any()
    with pytest.raises(ValueError):
        relay_encode(code.relays[0], np.zeros(3), rho)


def test_idle_relay_contributes_nothing():
    code = construct(4, 5)
    x = relay_encode(code.relays[4], np.ones(4), 1.0)
    assert not x[:8].any()


@pytest.mark.parametrize("nk", [(2, 2), (4, 4), (5, 4), (4, 5), (5, 5), (3, 7)])
def test_noise_free_round_trip(nk):
    code = construct(*nk)
    rng = np.random.default_rng(0)
    s = rng.normal(size=nk[0]) + 1j * rng.normal(size=nk[0])
    power = PowerConfig(2.0, 3.0)
    frame = simulate_dostbc_frame(code, s, power, rng, noise_enabled=False)
    w = power.rho(nk[1]) * frame.draw.f
    assert np.allclose(frame.y_d, w @ assemble_code_matrix(code, frame.draw.h, s),
                       atol=1e-12)
    assert np.allclose(frame.r, noise_covariance(code, frame.draw.f, power.rho(nk[1])))


def test_frame_is_batch_of_one():
    code = construct(3, 3)
    s = np.arange(3) + 1j
    power = PowerConfig(1.0, 1.0)
    frame = simulate_dostbc_frame(code, s, power, np.random.default_rng(4))
    batch = simulate_dostbc_batch(code, s[None], power, np.random.default_rng(4))
    assert np.array_equal(frame.y_d, batch.y[0])


def test_repetition_noise_free():
    power = PowerConfig(1.0, 1.0)
    frame = simulate_repetition_frame(2, np.array([0.5 + 0.5j]), power,
                                      np.random.default_rng(2), noise_enabled=False)
    rho = power.rho(2)
    g = rho * frame.draw.f * frame.draw.h
    assert np.allclose(frame.y_d, g * (0.5 + 0.5j))
    assert np.allclose(frame.r, np.diag(1 + np.abs(rho * frame.draw.f) ** 2))


def test_repetition_slot_layout():
    s = np.array([[1, 2, 3]], complex)
    b = simulate_repetition_batch(2, s, PowerConfig(1.0, 1.0), np.random.default_rng(0),
                                  noise_enabled=False)
    y = b.y.reshape(2, 3)
    assert np.allclose(y / y[:, :1], [[1, 2, 3], [1, 2, 3]])


def test_power_config():
    p = PowerConfig(3.0, 2.0, (1.0, 2.0))
    assert np.allclose(p.rho(2), np.sqrt([2 / 4, 4 / 4]))
    with pytest.raises(ValueError):
        p.rho(3)
    with pytest.raises(ValueError):
        PowerConfig(0, 1)
    with pytest.raises(ValueError):
        PowerConfig(1, 1, (1.0, -1.0))
    assert PowerConfig.from_snr_db(20).es == pytest.approx(100)


def test_repetition_profiles():
    assert repetition_power_profile(construct(4, 4)) == (2.0, 2.0, 2.0, 2.0)
    prof = repetition_power_profile(construct(5, 5))
    assert prof == pytest.approx((2, 2, 2, 5 / 3, 2))


def _per_slot_power(x):
    return np.mean(np.abs(x) ** 2, axis=(0, 2))


@pytest.mark.parametrize("nk", [(4, 4), (5, 5)])
def test_per_slot_power_matches_between_schemes(nk):
    n, k = nk
    code = construct(n, k)
    es = er = 10.0
    rng = np.random.default_rng(11)
    p_dost, p_rep = 0, 0
    chunks = 5
    for _ in range(chunks):                       # 10**5 frames in all
        s = np.sqrt(es) * np.exp(2j * np.pi * rng.random((20_000, n)))
        dost = simulate_dostbc_batch(code, s, PowerConfig(es, er), rng,
                                     return_relay_signals=True)
        rep = simulate_repetition_batch(k, s, PowerConfig(es, er, repetition_power_profile(code)),
                                        rng, return_relay_signals=True)
        p_dost = p_dost + _per_slot_power(dost.relay_signals) / chunks
        p_rep = p_rep + _per_slot_power(rep.relay_signals) / chunks
    expect = er * code.transmissions_per_relay() / code.length
    assert np.allclose(p_dost, expect, rtol=0.02)
    assert np.allclose(p_rep, expect, rtol=0.02)


def test_large_es_amplification():
    p = PowerConfig(1e6, 4.0)
    assert p.rho(1)[0] == pytest.approx(np.sqrt(4.0 / 1e6), rel=1e-5)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_noise_free_linear_in_symbols(n, k, seed):
    code = construct(n, k)
    rng = np.random.default_rng(seed)
    s1 = rng.normal(size=n) + 1j * rng.normal(size=n)
    s2 = rng.normal(size=n) + 1j * rng.normal(size=n)
    power = PowerConfig(1.0, 1.0)
    y = [simulate_dostbc_frame(code, s, power, np.random.default_rng(seed),
                               noise_enabled=False).y_d for s in (s1, s2, s1 + s2)]
    assert np.allclose(y[0] + y[1], y[2])


def test_fixed_draw_is_held_over_the_batch():
    code = construct(3, 3)
    rng = np.random.default_rng(0)
    fixed = draw_channels(rng, 3)
    batch = simulate_dostbc_batch(code, np.ones((5, 3)), PowerConfig(1.0, 1.0), rng,
                                  noise_enabled=False, draw=fixed)
    assert np.array_equal(batch.h, np.broadcast_to(fixed.h, (5, 3)))
    assert np.allclose(batch.y, batch.y[0])
    with pytest.raises(ValueError):
        simulate_dostbc_batch(code, np.ones((5, 3)), PowerConfig(1.0, 1.0), rng,
                              draw=draw_channels(rng, 2))
