"""Independent exact solvers used as oracles for the chain-MPS engine.

Two references at different scales:

* a single-excitation wavefunction solver working directly in the
  star-discretized basis — exact whenever the doubled bath's second
  copy carries no coupling (zero temperature), where the initial state
  |e, g, vac> lives in a closed (N+2)-dimensional sector;
* a dense state-vector integration of the full chain-mapped lattice,
  feasible only for a handful of sites, which exercises every term the
  MPS engine implements (both chains, both anomalous couplings).

Both work in the rotating frame of the qubit frequency, matching the
MPS engine's convention, so fidelity traces compare directly.
"""

from __future__ import annotations

import numpy as np
import scipy.integrate
import scipy.sparse

from .bath import ChainBath, SpectralDensity, discretize
from .pulses import Pulse


def _default_t_max(pump: Pulse, stokes: Pulse) -> float:
    width = max(pump.width, stokes.width)
    delay = max(abs(pump.delay), abs(stokes.delay))
    return delay / 2 + 5.0 * width


# ----------------------------------------------------------------------
# single-excitation solver (star basis, T = 0)


def single_excitation_run(
    pump: Pulse,
    stokes: Pulse,
    spectral: SpectralDensity | None = None,
    delta: float = 0.05,
    omega_qubit: float = 1.0,
    t_max: float | None = None,
    n_samples: int = 201,
    rtol: float = 1e-10,
    atol: float = 1e-12,
):
    """Exact zero-temperature dynamics in the star basis.

    Returns (times, f1, f2): qubit excited-state populations on a
    uniform sample grid over [-t_max, t_max].
    """
    if spectral is None:
        spectral = SpectralDensity()
    star = discretize(spectral, delta)
    if t_max is None:
        t_max = _default_t_max(pump, stokes)
    diag = np.concatenate([[0.0, 0.0], star.frequencies - omega_qubit])
    j = star.couplings

    def rhs(t, y):
        hp = pump.value(t)
        hs = stokes.value(t)
        out = diag * y
        bath_amp = j @ y[2:]
        out = out.astype(complex, copy=True)
        out[0] += hp * bath_amp
        out[1] += hs * bath_amp
        out[2:] += (hp * y[0] + hs * y[1]) * j
        return -1j * out

    y0 = np.zeros(len(diag), dtype=complex)
    y0[0] = 1.0
    times = np.linspace(-t_max, t_max, n_samples)
    sol = scipy.integrate.solve_ivp(
        rhs, (-t_max, t_max), y0, method="DOP853", t_eval=times, rtol=rtol, atol=atol
    )
    if not sol.success:
        raise RuntimeError(f"single-excitation solver failed: {sol.message}")
    f1 = np.abs(sol.y[0]) ** 2
    f2 = np.abs(sol.y[1]) ** 2
    return times, f1, f2


def single_excitation_final_fidelity(pump: Pulse, stokes: Pulse, **kw) -> float:
    """F2 at the final time of a zero-temperature star-basis run."""
    _, _, f2 = single_excitation_run(pump, stokes, **kw)
    return float(f2[-1])


# ----------------------------------------------------------------------
# dense integration of the chain-mapped lattice


def lattice_dims(chain: ChainBath, d_loc: int) -> list[int]:
    """Physical dimensions in MPS site order: chain 2 reversed, q1, q2, chain 1."""
    return [d_loc] * chain.n_chain2 + [2, 2] + [d_loc] * chain.n_chain1


def _embed(ops: dict[int, np.ndarray], dims: list[int]) -> scipy.sparse.csr_matrix:
    out = scipy.sparse.identity(1, format="csr")
    for i, d in enumerate(dims):
        factor = scipy.sparse.csr_matrix(ops[i]) if i in ops else scipy.sparse.identity(d)
        out = scipy.sparse.kron(out, factor, format="csr")
    return out


def lattice_operators(chain: ChainBath, d_loc: int, omega_qubit: float = 1.0):
    """Sparse (h0, v_pump, v_stokes) for the chain lattice, rotating frame.

    h0 carries the on-site chain energies (shifted by the frame) and the
    intra-chain hoppings; v_pump/v_stokes carry the q1/q2 couplings to
    both chain heads and are multiplied by the pulse amplitudes.
    """
    n2 = chain.n_chain2
    dims = lattice_dims(chain, d_loc)
    a = np.diag(np.sqrt(np.arange(1, d_loc)), 1)  # annihilation
    ad = a.T
    num = np.diag(np.arange(d_loc, dtype=float))
    sp = np.array([[0.0, 0.0], [1.0, 0.0]])  # sigma^+; level 1 is excited
    sm = sp.T

    iq1, iq2 = n2, n2 + 1
    site_c1 = lambda j: n2 + 1 + j  # noqa: E731  (chain-1 site j, 1-indexed)
    site_c2 = lambda j: n2 - j  # noqa: E731  (chain-2 site j, 1-indexed)

    terms_h0 = []
    for j in range(1, chain.n_chain1 + 1):
        terms_h0.append({site_c1(j): (chain.alpha1[j - 1] - omega_qubit) * num})
    for j in range(1, n2 + 1):
        terms_h0.append({site_c2(j): (chain.alpha2[j - 1] + omega_qubit) * num})
    for j in range(1, chain.n_chain1):
        c = chain.beta1[j]
        terms_h0.append({site_c1(j): c * ad, site_c1(j + 1): a})
        terms_h0.append({site_c1(j): c * a, site_c1(j + 1): ad})
    for j in range(1, n2):
        c = chain.beta2[j]
        terms_h0.append({site_c2(j): c * ad, site_c2(j + 1): a})
        terms_h0.append({site_c2(j): c * a, site_c2(j + 1): ad})

    def coupling_terms(iq):
        terms = []
        b1 = chain.beta1[0] if chain.n_chain1 else 0.0
        if chain.n_chain1:
            terms.append({iq: b1 * sp, site_c1(1): a})
            terms.append({iq: b1 * sm, site_c1(1): ad})
        if n2:
            b2 = chain.beta2[0]
            terms.append({iq: b2 * sp, site_c2(1): ad})
            terms.append({iq: b2 * sm, site_c2(1): a})
        return terms

    dim = int(np.prod(dims))
    zero = scipy.sparse.csr_matrix((dim, dim))
    h0 = sum((_embed(t, dims) for t in terms_h0), zero)
    vp = sum((_embed(t, dims) for t in coupling_terms(iq1)), zero)
    vs = sum((_embed(t, dims) for t in coupling_terms(iq2)), zero)
    return h0.tocsr(), vp.tocsr(), vs.tocsr()


def dense_lattice_run(
    pump: Pulse,
    stokes: Pulse,
    chain: ChainBath,
    d_loc: int,
    omega_qubit: float = 1.0,
    t_max: float | None = None,
    n_samples: int = 81,
    rtol: float = 1e-10,
    atol: float = 1e-12,
):
    """Integrate the full lattice state vector; returns (times, f1, f2)."""
    if t_max is None:
        t_max = _default_t_max(pump, stokes)
    dims = lattice_dims(chain, d_loc)
    h0, vp, vs = lattice_operators(chain, d_loc, omega_qubit)

    n2 = chain.n_chain2
    num_q1 = _embed({n2: np.diag([0.0, 1.0])}, dims).diagonal().real
    num_q2 = _embed({n2 + 1: np.diag([0.0, 1.0])}, dims).diagonal().real

    def rhs(t, y):
        out = h0 @ y
        out += pump.value(t) * (vp @ y)
        out += stokes.value(t) * (vs @ y)
        return -1j * out

    dim = int(np.prod(dims))
    y0 = np.zeros(dim, dtype=complex)
    # product state: everything in its ground/vacuum level except q1 excited
    idx = 0
    for i, d in enumerate(dims):
        idx = idx * d + (1 if i == n2 else 0)
    y0[idx] = 1.0
    times = np.linspace(-t_max, t_max, n_samples)
    sol = scipy.integrate.solve_ivp(
        rhs, (-t_max, t_max), y0, method="DOP853", t_eval=times, rtol=rtol, atol=atol
    )
    if not sol.success:
        raise RuntimeError(f"dense lattice solver failed: {sol.message}")
    prob = np.abs(sol.y) ** 2
    f1 = prob.T @ num_q1
    f2 = prob.T @ num_q2
    return times, f1, f2
