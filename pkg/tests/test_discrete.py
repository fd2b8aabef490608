"""Structure of the five-site model: operators, thermal state, conservation."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermostirap.discrete import (
    DiscreteModelParams,
    ModelOperators,
    assert_density_matrix,
    build_hamiltonian,
    destroy,
    initial_state,
    qubit_populations,
    qubit_populations_pure,
    site_dims,
    thermal_spin_state,
)


def test_dims():
    assert site_dims(2) == (2, 3, 2, 3, 2)
    p = DiscreteModelParams(n_max=2)
    assert p.dim == 72
    assert DiscreteModelParams(n_max=3).dim == 128


def test_destroy_matrix():
    a = destroy(3)
    assert a[0, 1] == pytest.approx(1.0)
    assert a[1, 2] == pytest.approx(np.sqrt(2.0))
    assert np.count_nonzero(a) == 2


def test_thermal_spin_frozen_weights():
    # beta*omega = ln 2  ->  weights (2/3, 1/3)
    rho = thermal_spin_state(1.0, 1.0 / np.log(2.0))
    assert rho[0, 0] == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert rho[1, 1] == pytest.approx(1.0 / 3.0, abs=1e-14)
    # T = 0 is the pure ground state, no 1/T blowup
    rho0 = thermal_spin_state(1.0, 0.0)
    assert rho0[0, 0] == 1.0 and rho0[1, 1] == 0.0


def test_initial_state_is_valid_density_matrix():
    rho = initial_state(DiscreteModelParams(temperature=3.0))
    assert_density_matrix(rho)
    f1, f2 = qubit_populations(rho, site_dims(2))
    assert f1 == pytest.approx(1.0)
    assert f2 == pytest.approx(0.0)


def test_validation_errors():
    with pytest.raises(ValueError, match="n_max"):
        DiscreteModelParams(n_max=1)
    with pytest.raises(ValueError, match="temperature"):
        DiscreteModelParams(temperature=-0.1)
    with pytest.raises(ValueError, match="resonant"):
        DiscreteModelParams(omega_q1=2.0)
    from thermostirap.pulses import Pulse

    with pytest.raises(ValueError, match="sign"):
        DiscreteModelParams(pump=Pulse(1.0, 1.0, 1.0, sign="S"))


@given(
    t=st.floats(min_value=-10, max_value=10),
    g=st.floats(min_value=0, max_value=15),
    temp=st.floats(min_value=0, max_value=30),
)
def test_hamiltonian_hermitian_and_conserving(t, g, temp):
    p = DiscreteModelParams(g=g, temperature=temp)
    ops = ModelOperators(p)
    h = ops.hamiltonian(t, frame="lab")
    assert np.max(np.abs(h - h.conj().T)) < 1e-12
    # total excitation number commutes with H(t)
    comm = h @ ops.n_total - ops.n_total @ h
    assert np.max(np.abs(comm)) < 1e-12


def test_rotating_frame_drops_only_bare_terms():
    p = DiscreteModelParams()
    ops = ModelOperators(p)
    hl = ops.hamiltonian(0.3, frame="lab")
    hr = ops.hamiltonian(0.3, frame="rotating")
    assert np.max(np.abs(hl - hr - ops.h_bare)) < 1e-12
    with pytest.raises(ValueError):
        ops.hamiltonian(0.0, frame="interaction")
    assert np.max(np.abs(build_hamiltonian(p, 0.3) - hl)) < 1e-12


def test_population_helpers_agree():
    rng = np.random.default_rng(7)
    dims = site_dims(2)
    psi = rng.normal(size=72) + 1j * rng.normal(size=72)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    assert qubit_populations(rho, dims) == pytest.approx(qubit_populations_pure(psi, dims))
