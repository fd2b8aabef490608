"""Minimal matrix-product-state machinery for real-time evolution.

Tensors are (chi_left, d, chi_right) ndarrays with a mixed-canonical
gauge: every tensor left of ``center`` is left-isometric, every tensor
right of it right-isometric.  Truncations never rescale the state; the
norm decays by exactly the discarded weight, which is accumulated in
``cum_discarded`` so expectation values can be normalized honestly and
the norm drift can be checked against the truncation budget.

Gates are passed as 4-index tensors (out_i, out_i1, in_i, in_i1);
physical dimensions may change across a gate, which is how swap gates
reorder sites.
"""

from __future__ import annotations

import json

import numpy as np
import scipy.linalg


class TruncationError(RuntimeError):
    """Per-step discarded weight exceeded the configured ceiling."""


def _svd(mat: np.ndarray):
    try:
        return scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        return scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd")


def split_matrix(mat: np.ndarray, chi_max: int | None, tol: float):
    """Truncated SVD split of a matrix.

    Keeps the smallest rank whose relative discarded weight (dropped
    squared singular values over the total) stays below ``tol``, capped
    at ``chi_max``.  Returns (u, s, vh, discarded); the caller's norm
    shrinks by exactly the discarded weight since nothing is rescaled.
    """
    u, s, vh = _svd(mat)
    s2 = s * s
    total = float(s2.sum())
    if total == 0.0:
        return u[:, :1], s[:1], vh[:1], 0.0
    # tail[k] = weight discarded if exactly k values are kept
    tail = np.concatenate([np.cumsum(s2[::-1])[::-1], [0.0]])
    k = len(s)
    if tol > 0:
        k = max(1, int(np.searchsorted(tail <= tol * total, True)))
    if chi_max is not None:
        k = min(k, chi_max)
    discarded = float(tail[k]) / total
    return u[:, :k], s[:k], vh[:k], discarded


def swap_gate(d1: int, d2: int) -> np.ndarray:
    """Gate tensor exchanging two neighboring sites: |ab> -> |ba>."""
    g = np.zeros((d2, d1, d1, d2))
    for a in range(d1):
        for b in range(d2):
            g[b, a, a, b] = 1.0
    return g


class MpsState:
    """Mixed-canonical MPS over an arbitrary list of physical dimensions."""

    def __init__(self, tensors: list[np.ndarray], center: int = 0, cum_discarded: float = 0.0):
        self.tensors = tensors
        self.center = center
        self.cum_discarded = cum_discarded

    @classmethod
    def product_state(cls, dims: list[int], occupations: list[int]) -> "MpsState":
        if len(dims) != len(occupations):
            raise ValueError("dims and occupations must have equal length")
        tensors = []
        for d, n in zip(dims, occupations):
            t = np.zeros((1, d, 1), dtype=complex)
            t[0, n, 0] = 1.0
            tensors.append(t)
        return cls(tensors, center=0)

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def phys_dims(self) -> list[int]:
        return [t.shape[1] for t in self.tensors]

    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def norm_sq(self) -> float:
        c = self.tensors[self.center]
        return float(np.real(np.vdot(c, c)))

    def _shift_right(self):
        c = self.center
        t = self.tensors[c]
        l, d, r = t.shape
        q, rm = np.linalg.qr(t.reshape(l * d, r))
        self.tensors[c] = q.reshape(l, d, -1)
        self.tensors[c + 1] = np.tensordot(rm, self.tensors[c + 1], axes=(1, 0))
        self.center = c + 1

    def _shift_left(self):
        c = self.center
        t = self.tensors[c]
        l, d, r = t.shape
        q, rm = np.linalg.qr(t.reshape(l, d * r).conj().T)
        self.tensors[c] = q.conj().T.reshape(-1, d, r)
        self.tensors[c - 1] = np.tensordot(self.tensors[c - 1], rm.conj().T, axes=(2, 0))
        self.center = c - 1

    def move_center(self, target: int):
        while self.center < target:
            self._shift_right()
        while self.center > target:
            self._shift_left()

    def apply_phase(self, site: int, phases: np.ndarray):
        """Multiply a diagonal unitary onto a site; the gauge is unaffected."""
        self.tensors[site] = self.tensors[site] * phases[None, :, None]

    def apply_two_site(
        self,
        i: int,
        gate: np.ndarray,
        chi_max: int | None,
        tol: float,
        go_right: bool = True,
    ) -> float:
        """Apply a two-site gate on (i, i+1); center ends at i+1 or i.

        Returns the relative discarded weight of the truncation.
        """
        if self.center < i:
            self.move_center(i)
        elif self.center > i + 1:
            self.move_center(i + 1)
        a, b = self.tensors[i], self.tensors[i + 1]
        l, r = a.shape[0], b.shape[2]
        theta = np.tensordot(a, b, axes=(2, 0))  # l, d1, d2, r
        theta = np.tensordot(gate, theta, axes=([2, 3], [1, 2]))  # o1, o2, l, r
        o1, o2 = theta.shape[0], theta.shape[1]
        theta = theta.transpose(2, 0, 1, 3).reshape(l * o1, o2 * r)
        u, s, vh, discarded = split_matrix(theta, chi_max, tol)
        self.cum_discarded += discarded
        k = len(s)
        if go_right:
            self.tensors[i] = u.reshape(l, o1, k)
            self.tensors[i + 1] = (s[:, None] * vh).reshape(k, o2, r)
            self.center = i + 1
        else:
            self.tensors[i] = (u * s).reshape(l, o1, k)
            self.tensors[i + 1] = vh.reshape(k, o2, r)
            self.center = i
        return discarded

    def expectation(self, site: int, op: np.ndarray) -> float:
        """Normalized <O> at a site (real part; for Hermitian observables)."""
        self.move_center(site)
        t = self.tensors[site]
        val = np.einsum("ldr,de,ler->", t.conj(), op, t)
        return float(np.real(val)) / self.norm_sq()

    def copy(self) -> "MpsState":
        return MpsState([t.copy() for t in self.tensors], self.center, self.cum_discarded)

    # ------------------------------------------------------------------
    # checkpointing

    def save(self, path, config_hash: str = ""):
        meta = {
            "center": self.center,
            "cum_discarded": self.cum_discarded,
            "config_hash": config_hash,
            "n_sites": self.n_sites,
        }
        arrays = {f"site_{k:05d}": np.ascontiguousarray(t) for k, t in enumerate(self.tensors)}
        arrays["meta_json"] = np.frombuffer(
            json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8
        )
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)

    @classmethod
    def load(cls, path, expect_hash: str | None = None) -> "MpsState":
        with np.load(path) as data:
            meta = json.loads(bytes(data["meta_json"]).decode())
            if expect_hash is not None and meta["config_hash"] != expect_hash:
                raise ValueError(
                    f"checkpoint hash {meta['config_hash']!r} does not match {expect_hash!r}"
                )
            tensors = [np.ascontiguousarray(data[f"site_{k:05d}"]) for k in range(meta["n_sites"])]
        return cls(tensors, center=meta["center"], cum_discarded=meta["cum_discarded"])
