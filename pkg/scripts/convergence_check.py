#!/usr/bin/env python3
"""Numerical-convergence probe for both engines.

Discrete: final fidelity vs the dt divisor (the oracle engine at caption
defaults), so you can see where the time step stops mattering.
Continuum: final fidelity vs dt (orders 2 and 4) and vs the bond cap chi
on a small instance with an exact dense reference.

Run before trusting new parameter regimes; every number here should sit
on a visible plateau.
"""

import argparse

import numpy as np

from thermostirap.discrete import DiscreteModelParams
from thermostirap.liouville import IntegratorConfig, mixture_oracle
from thermostirap.pulses import Pulse
from thermostirap.reference import dense_lattice_run
from thermostirap.tcmps import ContinuumModelParams, TcmpsConfig, evolve_tcmps


def discrete_table(temperature: float):
    print(f"discrete oracle, caption defaults, T={temperature:g}")
    print(f"{'dt_divisor':>10}  {'F2(final)':>12}")
    params = DiscreteModelParams(temperature=temperature)
    for divisor in (10, 20, 30, 50, 80):
        cfg = IntegratorConfig(
            sample_stride=10**9, dt_divisor=divisor, conservation_tol=1e-2
        )
        res = mixture_oracle(params, cfg)
        print(f"{divisor:>10}  {res.final_fidelity:>12.9f}")
    print()


def continuum_tables(temperature: float):
    params = ContinuumModelParams(
        pump=Pulse(1.0, 1.0, 1.0, "P"),
        stokes=Pulse(1.0, 1.0, 1.0, "S"),
        temperature=temperature,
        delta=0.5,
        n_chain=4,
        d_loc=3,
    )
    _, _, f2 = dense_lattice_run(
        params.pump, params.stokes, params.build_bath(), d_loc=3,
        t_max=3.0, n_samples=2,
    )
    exact = float(f2[-1])
    print(f"continuum small instance, T={temperature:g}, dense reference F2={exact:.9f}")
    print(f"{'order':>5} {'dt':>6}  {'F2(final)':>12}  {'|err|':>9}")
    for order in (2, 4):
        for dt in (0.1, 0.05, 0.02):
            cfg = TcmpsConfig(
                dt=dt, t_max=3.0, order=order, chi_max=None, svd_tol=1e-15,
                sample_stride=10**9,
            )
            res = evolve_tcmps(params, cfg)
            err = abs(res.final_fidelity - exact)
            print(f"{order:>5} {dt:>6}  {res.final_fidelity:>12.9f}  {err:>9.2e}")
    print()
    print(f"{'chi_max':>7}  {'F2(final)':>12}  {'|err|':>9}  {'max step discard':>16}")
    for chi in (4, 8, 16, 32, None):
        cfg = TcmpsConfig(
            dt=0.02, t_max=3.0, order=4, chi_max=chi, svd_tol=1e-15,
            step_weight_ceiling=1.0, sample_stride=10**9,
        )
        res = evolve_tcmps(params, cfg)
        err = abs(res.final_fidelity - exact)
        disc = res.diagnostics["max_step_discard"]
        print(f"{str(chi):>7}  {res.final_fidelity:>12.9f}  {err:>9.2e}  {disc:>16.2e}")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--temperature", type=float, default=0.8)
    args = ap.parse_args()
    np.set_printoptions(precision=6)
    discrete_table(args.temperature)
    continuum_tables(args.temperature)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
