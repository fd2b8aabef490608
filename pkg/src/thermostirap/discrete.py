"""Five-site discrete model: two qubits, two bosonic modes, one thermal spin.

Layout of the tensor-product basis, fixed everywhere in this package:

    q1 (2)  x  a1 (n_max+1)  x  m (2)  x  a2 (n_max+1)  x  q2 (2)

Qubit q1 exchanges an excitation with mode a1 under the pump pulse, q2
with a2 under the Stokes pulse, and both modes couple statically (with
strength g) to the central spin m, which starts in a thermal state.
All coupling terms are of the excitation-conserving a^dag sigma^- + h.c.
form, so the total excitation number commutes with H(t) at every t.

Operators are plain complex ndarrays over this basis; density matrices
are ndarrays validated by :func:`assert_density_matrix`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pulses import Pulse, default_pump, default_stokes

SITE_NAMES = ("q1", "a1", "m", "a2", "q2")

# Spin convention: index 0 = ground, 1 = excited.
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]])
NUMBER_SPIN = np.array([[0.0, 0.0], [0.0, 1.0]])


def destroy(n_levels: int) -> np.ndarray:
    """Bosonic annihilation operator truncated to n_levels Fock states."""
    return np.diag(np.sqrt(np.arange(1.0, n_levels)), k=1)


def site_dims(n_max: int) -> tuple[int, ...]:
    return (2, n_max + 1, 2, n_max + 1, 2)


def embed(op: np.ndarray, site: int, dims: tuple[int, ...]) -> np.ndarray:
    """Lift a single-site operator into the full tensor-product space."""
    out = np.array([[1.0]])
    for k, d in enumerate(dims):
        out = np.kron(out, op if k == site else np.eye(d))
    return out


@dataclass(frozen=True)
class DiscreteModelParams:
    """Physical parameters of the five-site model.

    Frequencies are angular, k_B = 1, and the intermediate splitting
    omega_m doubles as the energy unit (default 1).  With ``resonant``
    set (the default) all five bare frequencies must be equal; this is
    the regime in which the bare phases can be rotated away exactly.
    """

    g: float = 10.0
    pump: Pulse = field(default_factory=default_pump)
    stokes: Pulse = field(default_factory=default_stokes)
    temperature: float = 0.0
    n_max: int = 2
    omega_q1: float = 1.0
    omega_q2: float = 1.0
    omega_a1: float = 1.0
    omega_a2: float = 1.0
    omega_m: float = 1.0
    resonant: bool = True

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError(
                f"n_max must be >= 2 so the two-excitation sector is not clipped, got {self.n_max}"
            )
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.g < 0:
            raise ValueError(f"coupling g must be >= 0, got {self.g}")
        if self.pump.sign != "P" or self.stokes.sign != "S":
            raise ValueError("pump must have sign 'P' and stokes sign 'S'")
        if self.resonant:
            freqs = (self.omega_q1, self.omega_q2, self.omega_a1, self.omega_a2, self.omega_m)
            if any(abs(f - self.omega_m) > 1e-12 for f in freqs):
                raise ValueError(f"resonant=True requires all frequencies equal, got {freqs}")

    @property
    def dims(self) -> tuple[int, ...]:
        return site_dims(self.n_max)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))


class ModelOperators:
    """Constant matrices of the model, built once per parameter set.

    H(t) = H_bare + g*(V_1m + V_2m) + pump(t)*V_P + stokes(t)*V_S
    with V_P = a1^dag sigma1^- + h.c., V_S = a2^dag sigma2^- + h.c.,
    V_im = a_i^dag sigma_m^- + h.c.
    """

    def __init__(self, params: DiscreteModelParams):
        self.params = params
        dims = params.dims
        nb = params.n_max + 1
        a = destroy(nb)

        sm_q1 = embed(SIGMA_MINUS, 0, dims)
        a1 = embed(a, 1, dims)
        sm_m = embed(SIGMA_MINUS, 2, dims)
        a2 = embed(a, 3, dims)
        sm_q2 = embed(SIGMA_MINUS, 4, dims)

        def jc(mode, spin_minus):
            v = mode.conj().T @ spin_minus
            return v + v.conj().T

        self.v_pump = jc(a1, sm_q1)
        self.v_stokes = jc(a2, sm_q2)
        self.v_static = params.g * (jc(a1, sm_m) + jc(a2, sm_m))

        self.h_bare = (
            params.omega_q1 * embed(NUMBER_SPIN, 0, dims)
            + params.omega_a1 * embed(a.conj().T @ a, 1, dims)
            + params.omega_m * embed(NUMBER_SPIN, 2, dims)
            + params.omega_a2 * embed(a.conj().T @ a, 3, dims)
            + params.omega_q2 * embed(NUMBER_SPIN, 4, dims)
        )

        self.n_total = (
            embed(NUMBER_SPIN, 0, dims)
            + embed(a.conj().T @ a, 1, dims)
            + embed(NUMBER_SPIN, 2, dims)
            + embed(a.conj().T @ a, 3, dims)
            + embed(NUMBER_SPIN, 4, dims)
        )

        # Projector onto Fock levels >= 3 of either mode (leakage monitor;
        # nonzero only when n_max >= 3).
        leak = np.zeros((params.dim,))
        if params.n_max >= 3:
            occ = np.arange(nb)
            high = (occ >= 3).astype(float)
            leak = (
                np.diag(embed(np.diag(high), 1, dims))
                + np.diag(embed(np.diag(high), 3, dims))
            )
        self.leak_diag = leak

    def hamiltonian(self, t: float, frame: str = "lab") -> np.ndarray:
        """Full H(t); ``frame="rotating"`` drops the bare-energy terms.

        On resonance the rotating frame is exact: every coupling term
        commutes with the frame generator, so only the bare diagonals
        are removed and the fidelities are frame-invariant.
        """
        p = self.params
        h = p.pump.value(t) * self.v_pump + p.stokes.value(t) * self.v_stokes + self.v_static
        if frame == "lab":
            h = h + self.h_bare
        elif frame != "rotating":
            raise ValueError(f"frame must be 'lab' or 'rotating', got {frame!r}")
        return h


def build_hamiltonian(params: DiscreteModelParams, t: float, frame: str = "lab") -> np.ndarray:
    """One-shot H(t) constructor (see :class:`ModelOperators` for the pieces)."""
    return ModelOperators(params).hamiltonian(t, frame=frame)


def thermal_spin_state(omega_m: float, temperature: float) -> np.ndarray:
    """2x2 thermal state diag(1, e^{-omega_m/T}) / (1 + e^{-omega_m/T}).

    The T = 0 limit is taken exactly (pure ground state), avoiding the
    1/T division.
    """
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        return np.diag([1.0, 0.0]).astype(complex)
    w = np.exp(-omega_m / temperature)
    return np.diag([1.0, w]).astype(complex) / (1.0 + w)


def initial_state(params: DiscreteModelParams) -> np.ndarray:
    """Product initial state: q1 excited, modes and q2 empty, m thermal."""
    nb = params.n_max + 1
    vac = np.zeros((nb, nb), dtype=complex)
    vac[0, 0] = 1.0
    excited = np.diag([0.0, 1.0]).astype(complex)
    ground = np.diag([1.0, 0.0]).astype(complex)
    rho_m = thermal_spin_state(params.omega_m, params.temperature)
    rho = np.kron(np.kron(np.kron(np.kron(excited, vac), rho_m), vac), ground)
    return rho


def assert_hermitian(op: np.ndarray, tol: float = 1e-12) -> None:
    dev = np.max(np.abs(op - op.conj().T))
    if dev > tol:
        raise ValueError(f"operator not Hermitian: max deviation {dev:.3e} > {tol:.3e}")


def assert_density_matrix(rho: np.ndarray, trace_tol: float = 1e-10, eig_tol: float = 1e-8) -> None:
    assert_hermitian(rho, tol=1e-10)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} deviates from 1 by > {trace_tol:.3e}")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -eig_tol:
        raise ValueError(f"density matrix has eigenvalue {lo:.3e} < -{eig_tol:.3e}")


def qubit_populations(rho: np.ndarray, dims: tuple[int, ...]) -> tuple[float, float]:
    """Excited-state population of q1 and q2: <1| Tr_rest rho |1>."""
    r = rho.reshape(dims + dims)
    f1 = np.einsum("ijklmijklm->i", r)[1].real
    f2 = np.einsum("ijklmijklm->m", r)[1].real
    return float(f1), float(f2)


def qubit_populations_pure(psi: np.ndarray, dims: tuple[int, ...]) -> tuple[float, float]:
    """Same marginals for a pure state vector."""
    p = np.abs(psi.reshape(dims)) ** 2
    f1 = p.sum(axis=(1, 2, 3, 4))[1]
    f2 = p.sum(axis=(0, 1, 2, 3))[1]
    return float(f1), float(f2)
