"""Bosonic continuum preprocessing: discretize, thermally double, chain-map.

The pipeline turns a continuous thermal bath into two zero-temperature
nearest-neighbor chains that an MPS can handle:

1. :func:`discretize` — linear discretization of the spectral density
   into N = omega_c/delta star modes with couplings J_j = sqrt(J(w_j) d).
2. :func:`thermofield` — double each mode into a (co, tilde) pair whose
   joint vacuum reproduces every thermal expectation of the original
   mode; couplings split as g1 = J*cosh(theta), g2 = J*sinh(theta) with
   sinh^2(theta) = n(w), the Bose-Einstein occupation.
3. :func:`chain_map` — Lanczos tridiagonalization (full
   reorthogonalization) of each doubled family, yielding tight-binding
   chains whose head couples to the system with the norm of the original
   coupling vector.

The first family tridiagonalizes diag(+w) seeded with g1, the second
diag(-w) seeded with g2; at T=0 the second family decouples entirely
(empty chain).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpectralDensity:
    """Bath spectral density with a hard cutoff; only sqrt(w) is built in."""

    kind: str = "sqrt"
    cutoff: float = 2.0

    def __post_init__(self):
        if self.kind != "sqrt":
            raise ValueError(f"unknown spectral density kind {self.kind!r}")
        if self.cutoff <= 0:
            raise ValueError(f"cutoff must be > 0, got {self.cutoff}")

    def value(self, omega):
        omega = np.asarray(omega, dtype=float)
        out = np.where((omega > 0) & (omega <= self.cutoff), np.sqrt(np.abs(omega)), 0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class StarBath:
    """Discretized bath: mode j at frequency j*delta with coupling J_j."""

    frequencies: np.ndarray
    couplings: np.ndarray
    delta: float

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)


@dataclass(frozen=True)
class DoubledBath:
    """Thermofield-doubled star bath (family 1 at +w, family 2 at -w)."""

    frequencies: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    temperature: float
    delta: float


@dataclass(frozen=True)
class ChainBath:
    """Two tight-binding chains equivalent to the doubled star bath.

    ``beta1[0]``/``beta2[0]`` are the system–chain-head couplings (the
    Euclidean norms of the corresponding star coupling vectors); the
    hop between chain sites j and j+1 (1-based) is beta[j].  A family
    whose couplings vanish identically (family 2 at T=0) is stored as
    an empty chain.
    """

    alpha1: np.ndarray
    beta1: np.ndarray
    alpha2: np.ndarray
    beta2: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_chain1(self) -> int:
        return len(self.alpha1)

    @property
    def n_chain2(self) -> int:
        return len(self.alpha2)

    def to_json(self) -> str:
        doc = {
            "alpha1": self.alpha1.tolist(),
            "beta1": self.beta1.tolist(),
            "alpha2": self.alpha2.tolist(),
            "beta2": self.beta2.tolist(),
            "meta": self.meta,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ChainBath":
        doc = json.loads(text)
        return cls(
            alpha1=np.array(doc["alpha1"], dtype=float),
            beta1=np.array(doc["beta1"], dtype=float),
            alpha2=np.array(doc["alpha2"], dtype=float),
            beta2=np.array(doc["beta2"], dtype=float),
            meta=doc.get("meta", {}),
        )


def discretize(sd: SpectralDensity, delta: float) -> StarBath:
    """Linear discretization: omega_j = j*delta, J_j = sqrt(J(omega_j)*delta)."""
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    n_float = sd.cutoff / delta
    n = round(n_float)
    if n < 1 or abs(n_float - n) > 1e-9 * n_float:
        raise ValueError(f"delta={delta} does not divide the cutoff {sd.cutoff}")
    freqs = delta * np.arange(1, n + 1)
    couplings = np.sqrt(sd.value(freqs) * delta)
    return StarBath(frequencies=freqs, couplings=couplings, delta=delta)


def bose_occupation(omega, temperature: float):
    """Mean thermal occupation n(w) = 1/(e^{w/T} - 1); exactly 0 at T=0."""
    omega = np.asarray(omega, dtype=float)
    if temperature == 0:
        out = np.zeros_like(omega)
    else:
        # w/T may overflow to inf for tiny T; 1/expm1(inf) -> 0 is exact
        with np.errstate(over="ignore"):
            out = 1.0 / np.expm1(omega / temperature)
    return out if out.ndim else float(out)


def thermofield(star: StarBath, temperature: float) -> DoubledBath:
    """Split each coupling into cosh/sinh parts set by the thermal occupation."""
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    n = bose_occupation(star.frequencies, temperature)
    g1 = star.couplings * np.sqrt(1.0 + n)
    g2 = star.couplings * np.sqrt(n)
    return DoubledBath(
        frequencies=star.frequencies.copy(),
        g1=g1,
        g2=g2,
        temperature=temperature,
        delta=star.delta,
    )


def lanczos_tridiagonalize(
    diagonal: np.ndarray, v0: np.ndarray, m: int, breakdown_tol: float = 1e-13
) -> tuple[np.ndarray, np.ndarray]:
    """Lanczos recursion for a diagonal matrix, fully reorthogonalized.

    Returns (alphas[0..k-1], betas[0..k-1]) where betas[0] = ||v0|| and
    betas[j>=1] are the subdiagonal entries.  Stops early (k < m) on
    breakdown, i.e. when the residual norm falls below ``breakdown_tol``.
    """
    norm0 = float(np.linalg.norm(v0))
    if norm0 < breakdown_tol:
        return np.zeros(0), np.zeros(0)
    alphas = []
    betas = [norm0]
    basis = np.empty((m, len(v0)))
    q = v0 / norm0
    basis[0] = q
    q_prev = np.zeros_like(q)
    beta_prev = 0.0
    for j in range(m):
        w = diagonal * q
        a = float(q @ w)
        alphas.append(a)
        if j == m - 1:
            break
        w = w - a * q - beta_prev * q_prev
        # Full re-Gram-Schmidt against all previous vectors (twice is enough).
        for _ in range(2):
            w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
        b = float(np.linalg.norm(w))
        if b < breakdown_tol:
            break
        betas.append(b)
        q_prev = q
        beta_prev = b
        q = w / b
        basis[j + 1] = q
    return np.array(alphas), np.array(betas)


def chain_map(doubled: DoubledBath, n_chain: int) -> ChainBath:
    """Map both doubled families onto tight-binding chains of length n_chain."""
    n_modes = len(doubled.frequencies)
    if not (1 <= n_chain <= n_modes):
        raise ValueError(f"n_chain must be in [1, {n_modes}], got {n_chain}")
    a1, b1 = lanczos_tridiagonalize(doubled.frequencies, doubled.g1, n_chain)
    a2, b2 = lanczos_tridiagonalize(-doubled.frequencies, doubled.g2, n_chain)
    meta = {
        "delta": doubled.delta,
        "omega_c": float(doubled.frequencies[-1]),
        "temperature": doubled.temperature,
        "n_chain": n_chain,
        "n_modes": n_modes,
    }
    return ChainBath(alpha1=a1, beta1=b1, alpha2=a2, beta2=b2, meta=meta)


def build_chain(
    sd: SpectralDensity, delta: float, temperature: float, n_chain: int
) -> ChainBath:
    """Convenience composition of the three preprocessing steps."""
    return chain_map(thermofield(discretize(sd, delta), temperature), n_chain)
