import numpy as np
import pytest

from noisebeam.schedule import NoiseSchedule, make_schedule, signal_noise


def test_alpha_bar_matches_hand_product():
    sched = make_schedule(10, 3, beta_min=0.1, beta_max=0.3)
    expected = []
    running = 1.0
    for t in range(10):
        beta = 0.1 + (0.3 - 0.1) * t / 9
        running *= 1.0 - beta
        expected.append(running)
    np.testing.assert_allclose(sched.alpha_bar, expected, rtol=1e-14)


def test_default_ddim_times_exact():
    sched = make_schedule(400, 16)
    assert sched.ddim_times.tolist() == [
        0, 25, 50, 75, 100, 125, 150, 175, 200,
        224, 249, 274, 299, 324, 349, 374, 399,
    ]
    assert sched.num_ddim_steps == 16


def test_variance_preservation():
    sched = make_schedule(400, 16)
    for t in (0, 37, 199, 399):
        a, s = signal_noise(sched, t)
        assert a * a + s * s == pytest.approx(1.0, abs=1e-12)


def test_alpha_bar_monotone_and_bounded():
    sched = make_schedule(400, 16)
    assert np.all(np.diff(sched.alpha_bar) < 0)
    assert np.all(sched.alpha_bar > 0) and np.all(sched.alpha_bar <= 1)


def test_alpha_sigma_accepts_arrays():
    sched = make_schedule(40, 8)
    t = np.array([0, 5, 39])
    a, s = sched.alpha_sigma(t)
    assert a.shape == (3,)
    np.testing.assert_allclose(a, np.sqrt(sched.alpha_bar[t]))


def test_alpha_sigma_rejects_out_of_range():
    sched = make_schedule(40, 8)
    with pytest.raises(ValueError):
        sched.alpha_sigma(40)
    with pytest.raises(ValueError):
        sched.alpha_sigma(-1)


def test_is_ddim_time_and_require():
    sched = make_schedule(40, 8)
    times = sched.ddim_times
    assert sched.is_ddim_time(times[3])
    assert sched.is_ddim_time(times)
    assert not sched.is_ddim_time(int(times[3]) + 1)
    with pytest.raises(ValueError):
        sched.require_ddim_times(1)


def test_make_schedule_validation():
    with pytest.raises(ValueError):
        make_schedule(1, 1)
    with pytest.raises(ValueError):
        make_schedule(10, 0)
    with pytest.raises(ValueError):
        make_schedule(10, 10)  # ddim_steps must be < total_steps
    with pytest.raises(ValueError):
        make_schedule(10, 3, beta_min=0.0)
    with pytest.raises(ValueError):
        make_schedule(10, 3, beta_min=0.5, beta_max=0.2)
    with pytest.raises(ValueError):
        make_schedule(10, 3, beta_max=1.0)


def test_noise_schedule_direct_validation():
    ab = np.linspace(0.9, 0.1, 10)
    with pytest.raises(ValueError):
        NoiseSchedule(total_steps=10, ddim_times=np.array([0, 5, 8]), alpha_bar=ab)
    with pytest.raises(ValueError):
        NoiseSchedule(total_steps=10, ddim_times=np.array([1, 5, 9]), alpha_bar=ab)
    with pytest.raises(ValueError):
        NoiseSchedule(total_steps=10, ddim_times=np.array([0, 9]), alpha_bar=np.ones(10))
    sched = NoiseSchedule(total_steps=10, ddim_times=np.array([0, 5, 9]), alpha_bar=ab)
    assert not sched.alpha_bar.flags.writeable
    assert not sched.ddim_times.flags.writeable
