"""Integrator behavior that is cheap to check on every run.

The expensive cross-validation of the two propagation routes lives in
test_acceptance.py; here we pin the window/step logic, the conservation
guard, and frame invariance on small, fast instances.
"""

import numpy as np
import pytest

from thermostirap.discrete import DiscreteModelParams, initial_state
from thermostirap.liouville import (
    DivergenceError,
    IntegratorConfig,
    evolve,
    mixture_oracle,
)
from thermostirap.pulses import Pulse

FAST = dict(
    pump=Pulse(2.0, 1.0, 1.0, sign="P"),
    stokes=Pulse(2.0, 1.0, 1.0, sign="S"),
)


def test_window_resolution():
    p = DiscreteModelParams()
    cfg = IntegratorConfig()
    assert cfg.resolve_t_max(p) == pytest.approx(0.5 + 5 * 2.0)
    assert IntegratorConfig(t_max=12.0).resolve_t_max(p) == 12.0
    with pytest.raises(ValueError, match="t_max"):
        IntegratorConfig(t_max=3.0).resolve_t_max(p)
    # finest scale at defaults is 1/g = 0.1
    assert cfg.resolve_dt(p) == pytest.approx(0.1 / 50.0)
    assert IntegratorConfig(dt_divisor=20.0).resolve_dt(p) == pytest.approx(0.1 / 20.0)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(dt=-0.1)
    with pytest.raises(ValueError):
        IntegratorConfig(sample_stride=0)
    with pytest.raises(ValueError):
        IntegratorConfig(frame="heisenberg")
    with pytest.raises(ValueError):
        IntegratorConfig(dt_divisor=0.0)


def test_trace_and_hermiticity_exact_by_construction():
    # The split-RK4 density stepper keeps rho symmetric-real +
    # antisymmetric-imag exactly; trace and Hermiticity drift are rounding
    r = evolve(DiscreteModelParams(temperature=2.0, **FAST), IntegratorConfig(sample_stride=50))
    assert r.diagnostics["hermiticity_drift"] < 1e-13
    assert r.diagnostics["trace_drift"] < 1e-12


def test_divergence_guard_fires_on_coarse_step():
    with pytest.raises(DivergenceError, match="reduce dt"):
        evolve(DiscreteModelParams(**FAST), IntegratorConfig(dt=0.2, conservation_tol=1e-8))


def test_frame_invariance_of_populations():
    # on resonance the rotating frame is exact, so fidelities agree
    p = DiscreteModelParams(g=4.0, **FAST)
    cfg = dict(dt=0.002, sample_stride=100)
    rot = evolve(p, IntegratorConfig(frame="rotating", **cfg))
    lab = evolve(p, IntegratorConfig(frame="lab", **cfg))
    assert np.max(np.abs(rot.f2 - lab.f2)) < 1e-7
    assert np.max(np.abs(rot.f1 - lab.f1)) < 1e-7


def test_oracle_matches_evolve_at_zero_temperature():
    # T=0: single pure-state sector, quick agreement check
    p = DiscreteModelParams(**FAST)
    cfg = IntegratorConfig(sample_stride=25)
    a = evolve(p, cfg)
    b = mixture_oracle(p, cfg)
    assert np.max(np.abs(a.f2 - b.f2)) < 1e-9
    assert a.final_fidelity == pytest.approx(b.final_fidelity, abs=1e-9)


def test_initial_sample_and_time_grid():
    r = evolve(DiscreteModelParams(**FAST), IntegratorConfig(sample_stride=40))
    assert r.times[0] == pytest.approx(-5.5)
    assert r.times[-1] == pytest.approx(5.5)
    assert r.f1[0] == pytest.approx(1.0)
    assert r.f2[0] == pytest.approx(0.0)
    assert r.final_fidelity == pytest.approx(r.f2[-1])
    assert len(r.times) == len(r.f1) == len(r.f2)


def test_custom_initial_state():
    # feeding the documented initial state explicitly changes nothing
    p = DiscreteModelParams(temperature=1.0, **FAST)
    cfg = IntegratorConfig(sample_stride=10**9)
    a = evolve(p, cfg)
    b = evolve(p, cfg, initial=initial_state(p))
    assert a.final_fidelity == pytest.approx(b.final_fidelity, abs=1e-15)


def test_mixture_weights_decompose_fidelity():
    """F(T) is an exact two-sector mixture of the T=0-style pure runs.

    The initial state is diagonal in the central spin, and each sector
    evolves unitarily, so F(T) = (1-p)F_down + p F_up with p the thermal
    excited weight.  This structural identity is what makes the oracle
    route independent of the density-matrix route.
    """
    temp = 2.5
    p_up = 1.0 / (1.0 + np.exp(1.0 / temp))
    cfg = IntegratorConfig(sample_stride=10**9)
    f_mixed = mixture_oracle(DiscreteModelParams(temperature=temp, **FAST), cfg).final_fidelity
    f_down = mixture_oracle(DiscreteModelParams(temperature=0.0, **FAST), cfg).final_fidelity
    # isolate the up-sector by differencing rather than a bespoke entry point
    f_up = (f_mixed - (1.0 - p_up) * f_down) / p_up
    f_mixed2 = mixture_oracle(DiscreteModelParams(temperature=5.0, **FAST), cfg).final_fidelity
    p_up2 = 1.0 / (1.0 + np.exp(1.0 / 5.0))
    assert f_mixed2 == pytest.approx((1.0 - p_up2) * f_down + p_up2 * f_up, abs=1e-9)
