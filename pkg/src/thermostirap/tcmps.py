"""Chain-MPS evolution of two qubits coupled to a thermal continuum.

The bath pipeline (``bath``) turns the continuum into two tight-binding
chains; here they are laid out as one open lattice

    [c2_N .. c2_1, q1, q2, c1_1 .. c1_N]

and evolved by a Trotter gate train.  Everything runs in the rotating
frame of the qubit frequency (chain 1 on-site energies shifted down by
omega_q, chain 2 shifted up), which leaves every coupling invariant and
centers both chain bands around zero.

One second-order step applies a left-to-right half-train followed by its
exact mirror, every gate with exposure dt/2 and all pulse amplitudes
frozen at the step midpoint.  The qubits couple to both chain heads;
since q2 sits between q1 and chain 1 (and vice versa), a swap gate
shuttles the qubits past each other inside the train.  A fourth-order
variant composes three such steps with Yoshida weights, each substep's
amplitudes frozen at its own midpoint.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bath import ChainBath, SpectralDensity, build_chain
from .liouville import RunResult
from .mps import MpsState, TruncationError, swap_gate
from .pulses import Pulse, continuum_pump, continuum_stokes

_YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))


@dataclass(frozen=True)
class ContinuumModelParams:
    """Two resonant qubits exchanging an excitation through a thermal band."""

    pump: Pulse = field(default_factory=continuum_pump)
    stokes: Pulse = field(default_factory=continuum_stokes)
    temperature: float = 0.0
    delta: float = 0.05
    n_chain: int = 20
    d_loc: int = 4
    omega_qubit: float = 1.0
    spectral: SpectralDensity = field(default_factory=SpectralDensity)

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.d_loc < 2:
            raise ValueError(f"d_loc must be >= 2, got {self.d_loc}")
        if self.n_chain < 1:
            raise ValueError(f"n_chain must be >= 1, got {self.n_chain}")
        if self.pump.sign != "P" or self.stokes.sign != "S":
            raise ValueError("pump must be a P pulse and stokes an S pulse")

    def build_bath(self) -> ChainBath:
        return build_chain(self.spectral, self.delta, self.temperature, self.n_chain)


@dataclass(frozen=True)
class TcmpsConfig:
    """Knobs of the gate-train integrator."""

    dt: float = 0.02
    t_max: float | None = None
    chi_max: int | None = 64
    svd_tol: float = 1e-10
    step_weight_ceiling: float = 1e-3
    order: int = 2
    sample_stride: int = 10
    checkpoint_path: str | None = None
    checkpoint_every: int = 200

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.order not in (2, 4):
            raise ValueError(f"order must be 2 or 4, got {self.order}")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")

    def resolve_t_max(self, params: ContinuumModelParams) -> float:
        width = max(params.pump.width, params.stokes.width)
        delay = max(abs(params.pump.delay), abs(params.stokes.delay))
        auto = delay / 2 + 5.0 * width
        if self.t_max is None:
            return auto
        if self.t_max < auto / 2:
            raise ValueError(
                f"t_max={self.t_max} cuts the pulses off (need at least {auto / 2:.3g})"
            )
        return self.t_max


def config_fingerprint(params: ContinuumModelParams, config: TcmpsConfig) -> str:
    """Stable hash of everything that determines the trajectory."""
    payload = {
        "params": dataclasses.asdict(params),
        "config": {
            k: v
            for k, v in dataclasses.asdict(config).items()
            if k not in ("checkpoint_path", "checkpoint_every")
        },
    }
    text = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _sym_gate_factory(k: np.ndarray, d1: int, d2: int):
    """Eigendecompose a real-symmetric two-site generator once.

    Returns gate(c) = exp(-1j * c * k) reshaped to (d1, d2, d1, d2).
    """
    lam, vec = np.linalg.eigh(k)

    def gate(c: float) -> np.ndarray:
        g = (vec * np.exp(-1j * c * lam)) @ vec.T
        return g.reshape(d1, d2, d1, d2)

    return gate


class TcmpsEngine:
    """Holds the lattice layout, the gate cache, and the evolving state."""

    def __init__(self, params: ContinuumModelParams, config: TcmpsConfig,
                 chain: ChainBath | None = None):
        self.params = params
        self.config = config
        self.chain = params.build_bath() if chain is None else chain
        n1, n2 = self.chain.n_chain1, self.chain.n_chain2
        self.n1, self.n2 = n1, n2
        self.iq1, self.iq2 = n2, n2 + 1
        d = params.d_loc
        self.dims = [d] * n2 + [2, 2] + [d] * n1
        self.n_sites = len(self.dims)

        a = np.diag(np.sqrt(np.arange(1, d)), 1)
        ad = a.T
        sp = np.array([[0.0, 0.0], [1.0, 0.0]])  # level 1 = excited
        sm = sp.T
        self.num_qubit = np.diag([0.0, 1.0])
        self.num_boson = np.diag(np.arange(d, dtype=float))

        # structure generators; scaled per call by (coupling * exposure)
        self._hop = _sym_gate_factory(np.kron(ad, a) + np.kron(a, ad), d, d)
        # q on the left, chain-1 head on the right: excitation-conserving
        self._jc = _sym_gate_factory(np.kron(sp, a) + np.kron(sm, ad), 2, d)
        # chain-2 head on the left, q on the right: pair creation/annihilation
        self._pair = _sym_gate_factory(np.kron(ad, sp) + np.kron(a, sm), d, 2)
        self._swap = swap_gate(2, 2)

        # rotating-frame on-site energies per site
        wq = params.omega_qubit
        alphas = np.zeros(self.n_sites)
        for j in range(n2):
            alphas[n2 - 1 - j] = self.chain.alpha2[j] + wq
        for j in range(n1):
            alphas[n2 + 2 + j] = self.chain.alpha1[j] - wq
        self._alphas = alphas

        # static-gate cache keyed by exposure
        self._phase_cache: dict[float, list[np.ndarray]] = {}
        self._hop_cache: dict[float, dict[int, np.ndarray]] = {}

        self.state = MpsState.product_state(
            self.dims, [1 if i == self.iq1 else 0 for i in range(self.n_sites)]
        )
        self.step_index = 0
        self.max_chi_seen = 1
        self.max_bond_discard = 0.0
        self.max_step_discard = 0.0
        self._step_discard = 0.0
        self.samples: list[tuple] = []

    # ------------------------------------------------------------------
    # gate caches

    def _phases(self, expo: float) -> list[np.ndarray]:
        if expo not in self._phase_cache:
            self._phase_cache[expo] = [
                np.exp(-1j * expo * self._alphas[i] * np.arange(self.dims[i]))
                for i in range(self.n_sites)
            ]
        return self._phase_cache[expo]

    def _hops(self, expo: float) -> dict[int, np.ndarray]:
        """Intra-chain hop gates keyed by left bond index."""
        if expo not in self._hop_cache:
            gates = {}
            for j in range(1, self.n2):  # link c2_{j+1} -- c2_j at bond n2-1-j
                gates[self.n2 - 1 - j] = self._hop(expo * self.chain.beta2[j])
            for j in range(1, self.n1):  # link c1_j -- c1_{j+1} at bond n2+1+j
                gates[self.n2 + 1 + j] = self._hop(expo * self.chain.beta1[j])
            self._hop_cache[expo] = gates
        return self._hop_cache[expo]

    # ------------------------------------------------------------------
    # one symmetric step

    def _apply(self, bond: int, gate: np.ndarray, go_right: bool):
        d = self.state.apply_two_site(
            bond, gate, self.config.chi_max, self.config.svd_tol, go_right=go_right
        )
        self._step_discard += d
        if d > self.max_bond_discard:
            self.max_bond_discard = d

    def _half_train(self, hp: float, hs: float, expo: float, forward: bool):
        """One half of the palindromic train; every gate exposure `expo`."""
        st = self.state
        n2, iq1, iq2 = self.n2, self.iq1, self.iq2
        hops = self._hops(expo)
        phases = self._phases(expo)
        b11 = self.chain.beta1[0] if self.n1 else 0.0
        b21 = self.chain.beta2[0] if self.n2 else 0.0

        def phase_all():
            for i in range(self.n_sites):
                st.apply_phase(i, phases[i])

        def coupling_block(forward: bool):
            # standard order on entry/exit: [.., c2_1, q1, q2, c1_1, ..]
            seq = [
                ("pair", n2 - 1, hp * b21),  # q1 -- c2 head
                ("swap", n2, None),
                ("pair", n2 - 1, hs * b21),  # q2 -- c2 head
                ("jc", iq2, hp * b11),       # q1 -- c1 head (q1 now at iq2)
                ("swap", n2, None),
                ("jc", iq2, hs * b11),       # q2 -- c1 head
            ]
            if not forward:
                seq = seq[::-1]
            for kind, bond, c in seq:
                if kind == "swap":
                    self._apply(bond, self._swap, go_right=forward)
                elif kind == "pair":
                    if self.n2:
                        self._apply(bond, self._pair(c * expo), go_right=forward)
                elif self.n1:
                    self._apply(bond, self._jc(c * expo), go_right=forward)

        if forward:
            phase_all()
            for bond in range(0, n2 - 1):
                self._apply(bond, hops[bond], go_right=True)
            coupling_block(True)
            for bond in range(n2 + 2, self.n_sites - 1):
                self._apply(bond, hops[bond], go_right=True)
        else:
            for bond in range(self.n_sites - 2, n2 + 1, -1):
                self._apply(bond, hops[bond], go_right=False)
            coupling_block(False)
            for bond in range(n2 - 2, -1, -1):
                self._apply(bond, hops[bond], go_right=False)
            phase_all()

    def _step2(self, t_mid: float, h: float):
        hp = self.params.pump.value(t_mid)
        hs = self.params.stokes.value(t_mid)
        self._half_train(hp, hs, h / 2, forward=True)
        self._half_train(hp, hs, h / 2, forward=False)

    def step(self, t: float):
        """Advance one full dt from time t."""
        dt = self.config.dt
        self._step_discard = 0.0
        if self.config.order == 2:
            self._step2(t + dt / 2, dt)
        else:
            w1 = _YOSHIDA_W1
            w2 = 1.0 - 2.0 * w1
            self._step2(t + dt * w1 / 2, dt * w1)
            self._step2(t + dt * (w1 + w2 / 2), dt * w2)
            self._step2(t + dt * (w1 + w2 + w1 / 2), dt * w1)
        self.step_index += 1
        chi = max(self.state.bond_dims(), default=1)
        if chi > self.max_chi_seen:
            self.max_chi_seen = chi
        if self._step_discard > self.max_step_discard:
            self.max_step_discard = self._step_discard
        if self._step_discard > self.config.step_weight_ceiling:
            raise TruncationError(
                f"step {self.step_index}: discarded weight {self._step_discard:.3e} "
                f"exceeds ceiling {self.config.step_weight_ceiling:.3e}"
            )

    # ------------------------------------------------------------------
    # observables

    def occupations(self) -> np.ndarray:
        occ = np.empty(self.n_sites)
        for i in range(self.n_sites):
            op = self.num_qubit if i in (self.iq1, self.iq2) else self.num_boson
            occ[i] = self.state.expectation(i, op)
        return occ

    def sample(self, t: float):
        occ = self.occupations()
        f1, f2 = occ[self.iq1], occ[self.iq2]
        # conserved charge of the rotating frame: qubits + chain1 - chain2
        charge = occ[self.iq1] + occ[self.iq2] + occ[self.iq2 + 1:].sum() - occ[:self.n2].sum()
        self.samples.append(
            (t, f1, f2, max(self.state.bond_dims(), default=1), self._step_discard, charge)
        )
        self.state.move_center(0)

    # ------------------------------------------------------------------
    # checkpointing

    def save_checkpoint(self, path: str, fingerprint: str):
        meta = {
            "center": self.state.center,
            "cum_discarded": self.state.cum_discarded,
            "config_hash": fingerprint,
            "n_sites": self.n_sites,
            "step_index": self.step_index,
            "max_chi_seen": self.max_chi_seen,
            "max_bond_discard": self.max_bond_discard,
            "max_step_discard": self.max_step_discard,
        }
        arrays = {
            f"site_{k:05d}": np.ascontiguousarray(t) for k, t in enumerate(self.state.tensors)
        }
        arrays["samples"] = np.array(self.samples, dtype=float).reshape(len(self.samples), 6)
        arrays["meta_json"] = np.frombuffer(
            json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8
        )
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        tmp = f"{path}.tmp"
        with open(tmp, "wb") as fh:
            np.savez(fh, **arrays)
        os.replace(tmp, path)

    def load_checkpoint(self, path: str, fingerprint: str):
        with np.load(path) as data:
            meta = json.loads(bytes(data["meta_json"]).decode())
            if meta["config_hash"] != fingerprint:
                raise ValueError(
                    f"checkpoint fingerprint {meta['config_hash']!r} does not "
                    f"match the requested run {fingerprint!r}"
                )
            tensors = [
                np.ascontiguousarray(data[f"site_{k:05d}"]) for k in range(meta["n_sites"])
            ]
            self.state = MpsState(tensors, meta["center"], meta["cum_discarded"])
            self.samples = [tuple(row) for row in data["samples"]]
        self.step_index = meta["step_index"]
        self.max_chi_seen = meta["max_chi_seen"]
        self.max_bond_discard = meta["max_bond_discard"]
        self.max_step_discard = meta["max_step_discard"]


def evolve_tcmps(
    params: ContinuumModelParams,
    config: TcmpsConfig | None = None,
    chain: ChainBath | None = None,
    resume: bool = False,
) -> RunResult:
    """Evolve the lattice from -t_max to t_max; returns fidelity traces.

    With ``config.checkpoint_path`` set, the state is written every
    ``checkpoint_every`` steps; ``resume=True`` picks up an interrupted
    run (the fingerprint guards against config mismatches).
    """
    config = config or TcmpsConfig()
    engine = TcmpsEngine(params, config, chain=chain)
    t_max = config.resolve_t_max(params)
    nsteps = max(1, math.ceil(2.0 * t_max / config.dt - 1e-12))
    dt = 2.0 * t_max / nsteps
    if abs(dt - config.dt) > 1e-12 * max(1.0, config.dt):
        config = dataclasses.replace(config, dt=dt)
        engine.config = config
    fp = config_fingerprint(params, config)

    ckpt = config.checkpoint_path
    if resume and ckpt and os.path.exists(ckpt):
        engine.load_checkpoint(ckpt, fp)
    if engine.step_index == 0 and not engine.samples:
        engine.sample(-t_max)

    while engine.step_index < nsteps:
        t = -t_max + engine.step_index * dt
        engine.step(t)
        if engine.step_index % config.sample_stride == 0 or engine.step_index == nsteps:
            engine.sample(-t_max + engine.step_index * dt)
        if ckpt and engine.step_index % max(1, config.checkpoint_every) == 0:
            engine.save_checkpoint(ckpt, fp)
    if ckpt:
        engine.save_checkpoint(ckpt, fp)

    arr = np.array(engine.samples, dtype=float)
    charge_drift = float(np.max(np.abs(arr[:, 5] - arr[0, 5])))
    norm = engine.state.norm_sq()
    diagnostics = {
        "max_chi": engine.max_chi_seen,
        "max_bond_discard": engine.max_bond_discard,
        "max_step_discard": engine.max_step_discard,
        "cum_discarded": engine.state.cum_discarded,
        "norm_final": norm,
        "norm_defect": 1.0 - norm,
        "charge_drift": charge_drift,
    }
    meta = {
        "method": f"tcmps-order{config.order}",
        "dt": dt,
        "t_max": t_max,
        "nsteps": nsteps,
        "fingerprint": fp,
        "temperature": params.temperature,
        "n_chain1": engine.n1,
        "n_chain2": engine.n2,
    }
    return RunResult(
        times=arr[:, 0],
        f1=arr[:, 1],
        f2=arr[:, 2],
        final_fidelity=float(arr[-1, 2]),
        diagnostics=diagnostics,
        meta=meta,
        final_state=engine.state,
    )
