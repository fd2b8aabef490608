"""Command-line front end: single runs, sweeps, plots, self-checks.

Subcommands
-----------
discrete    one density-matrix run; writes trace.csv, summary.json, plots
continuum   one chain-MPS run; same outputs
sweep       parameter grid (built-in preset or config-defined axes)
plot        re-render SVGs from an existing output directory
validate    fast numerical self-checks with pass/fail lines

Config file
-----------
A single JSON object; every key mirrors a CLI flag, and flags win over
file values.  Keys:

  command     optional; must match the subcommand when present
  preset      fig2a | fig2b | fig2c | fig2d | fig3          (sweep)
  scale       "ci" (default) | "paper"; --ci-scale forces "ci"
  sweep       custom grid: {name, kind, engine, axes: [{name, values}]}
  model       overrides for the model parameters (nested dataclass fields)
  integrator  overrides for the stepper (IntegratorConfig / TcmpsConfig)
  out, jobs, resume   execution knobs; never part of the manifest

A manifest.json written by a previous run is itself a valid --config:
its embedded config snapshot is used, so reruns reproduce every output
byte for byte (execution knobs like jobs do not enter the manifest).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bath import SpectralDensity, bose_occupation, build_chain
from .discrete import DiscreteModelParams
from .liouville import IntegratorConfig, RunResult, evolve, mixture_oracle
from .pulses import Pulse
from .sweeps import (
    PRESET_NAMES,
    SweepAxis,
    SweepGrid,
    SweepSpec,
    fmt,
    preset,
    read_grid_csv,
    run_sweep,
    write_csv,
)
from .svgplot import emit_plots, run_result_svg, timeseries_svg
from .tcmps import ContinuumModelParams, TcmpsConfig, evolve_tcmps


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------------
# config plumbing


def _merge(obj, data: dict, path: str):
    """Apply a nested dict of overrides onto a dataclass instance."""
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(obj)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {unknown}; valid keys: {sorted(names)}")
    updates = {}
    for key, value in data.items():
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current) and isinstance(value, dict):
            updates[key] = _merge(current, value, f"{path}.{key}")
        else:
            updates[key] = value
    try:
        return replace(obj, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    if "outputs" in data and "config" in data:  # a manifest fed back in
        data = data["config"]
    return data


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _canonical(payload: dict) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


def write_manifest(out_dir: Path, resolved: dict) -> Path:
    """Hash every artifact under out_dir and write manifest.json.

    Scratch state (dot-directories, checkpoints) is excluded so the
    manifest depends only on the run's declared outputs.
    """
    outputs = {}
    for p in sorted(out_dir.rglob("*")):
        rel = p.relative_to(out_dir)
        if not p.is_file() or p.name == "manifest.json":
            continue
        if any(part.startswith(".") for part in rel.parts) or p.suffix == ".npz":
            continue
        outputs[rel.as_posix()] = hashlib.sha256(p.read_bytes()).hexdigest()
    manifest = {
        "code_version": __version__,
        "config": resolved,
        "determinism_hash": hashlib.sha256(_canonical(resolved).encode()).hexdigest()[:16],
        "outputs": outputs,
    }
    path = out_dir / "manifest.json"
    path.write_text(_canonical(manifest))
    return path


def _check_command(cfg: dict, command: str):
    stated = cfg.get("command")
    if stated is not None and stated != command:
        raise ConfigError(
            f"command: config is for {stated!r} but the {command!r} subcommand was invoked"
        )


def _resolve_scale(cfg: dict, args) -> str:
    scale = cfg.get("scale", "ci")
    if getattr(args, "ci_scale", False):
        scale = "ci"
    if scale not in ("ci", "paper"):
        raise ConfigError(f"scale: must be 'ci' or 'paper', got {scale!r}")
    return scale


# ----------------------------------------------------------------------
# single runs


def _single_outputs(out_dir: Path, result: RunResult, resolved: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(
        out_dir / "trace.csv", ["t", "F1", "F2"],
        zip(result.times, result.f1, result.f2),
    )
    summary = {
        "final_fidelity": float(result.final_fidelity),
        "final_f1": float(result.f1[-1]),
        "diagnostics": result.diagnostics,
        "meta": result.meta,
    }
    (out_dir / "summary.json").write_text(_canonical(summary))
    plots = out_dir / "plots"
    plots.mkdir(exist_ok=True)
    (plots / "traces.svg").write_text(run_result_svg(result))
    manifest = write_manifest(out_dir, resolved)
    print(f"F2(final) = {result.final_fidelity:.6f}  -> {manifest.parent}")


def cmd_discrete(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    _check_command(cfg, "discrete")
    params = _merge(DiscreteModelParams(), cfg.get("model", {}), "model")
    integ = _merge(IntegratorConfig(), cfg.get("integrator", {}), "integrator")
    engine = cfg.get("engine", "liouville")
    if engine not in ("liouville", "oracle"):
        raise ConfigError(f"engine: must be 'liouville' or 'oracle', got {engine!r}")
    resolved = {
        "command": "discrete",
        "engine": engine,
        "model": dataclasses.asdict(params),
        "integrator": dataclasses.asdict(integ),
    }
    runner = mixture_oracle if engine == "oracle" else evolve
    result = runner(params, integ)
    _single_outputs(Path(args.out), result, resolved)
    return 0


def cmd_continuum(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    _check_command(cfg, "continuum")
    params = _merge(ContinuumModelParams(), cfg.get("model", {}), "model")
    integ = _merge(TcmpsConfig(), cfg.get("integrator", {}), "integrator")
    resolved = {
        "command": "continuum",
        "model": dataclasses.asdict(params),
        "integrator": dataclasses.asdict(integ),
    }
    resume = bool(args.resume or cfg.get("resume", False))
    if resume and integ.checkpoint_path is None:
        integ = replace(integ, checkpoint_path=str(Path(args.out) / ".checkpoint.npz"))
    result = evolve_tcmps(params, integ, resume=resume)
    # checkpoint location is execution plumbing, not physics; keep it out
    # of the manifest so moved output dirs still reproduce
    resolved["integrator"]["checkpoint_path"] = None
    _single_outputs(Path(args.out), result, resolved)
    return 0


# ----------------------------------------------------------------------
# sweeps


def _spec_from_config(cfg: dict, scale: str) -> tuple[SweepSpec, dict]:
    # a resolved manifest carries both the preset name and its expanded
    # sweep block; the preset wins and the block is redundant by design
    if cfg.get("preset"):
        name = cfg["preset"]
        if name not in PRESET_NAMES:
            raise ConfigError(f"preset: unknown {name!r}; choose from {PRESET_NAMES}")
        spec = preset(name, scale)
    elif cfg.get("sweep"):
        sw = cfg["sweep"]
        unknown = sorted(set(sw) - {"name", "kind", "engine", "axes"})
        if unknown:
            raise ConfigError(f"sweep: unknown key(s) {unknown}")
        kind = sw.get("kind", "discrete")
        if kind == "discrete":
            base, integ = DiscreteModelParams(), IntegratorConfig(sample_stride=10**9)
        elif kind == "continuum":
            base, integ = ContinuumModelParams(), TcmpsConfig()
        else:
            raise ConfigError(f"sweep.kind: must be discrete/continuum, got {kind!r}")
        try:
            axes = tuple(
                SweepAxis(a["name"], tuple(float(v) for v in a["values"]))
                for a in sw.get("axes", [])
            )
            spec = SweepSpec(
                name=sw.get("name", "custom"),
                kind=kind,
                axes=axes,
                base=base,
                integrator=integ,
                engine=sw.get("engine", "oracle" if kind == "discrete" else "tcmps"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"sweep: {exc}") from exc
    else:
        raise ConfigError("sweep command needs 'preset' (or --preset) or a 'sweep' block")
    if cfg.get("model"):
        spec = replace(spec, base=_merge(spec.base, cfg["model"], "model"))
    if cfg.get("integrator"):
        spec = replace(spec, integrator=_merge(spec.integrator, cfg["integrator"], "integrator"))
    resolved = {
        "command": "sweep",
        "preset": cfg.get("preset"),
        "scale": scale,
        "sweep": {
            "name": spec.name,
            "kind": spec.kind,
            "engine": spec.engine,
            "axes": [{"name": ax.name, "values": list(ax.values)} for ax in spec.axes],
        },
        "model": dataclasses.asdict(spec.base),
        "integrator": dataclasses.asdict(spec.integrator),
    }
    return spec, resolved


def _sweep_plots(spec: SweepSpec, grid: SweepGrid, out_dir: Path) -> list:
    paths = emit_plots(grid, out_dir)
    if spec.kind != "continuum":
        return paths
    runs = []
    for idx in range(spec.n_points):
        label = "_".join(f"{k}{fmt(v)}" for k, v in spec.point_values(idx).items())
        trace = out_dir / "traces" / f"{label}.csv"
        if not trace.exists():
            continue
        _, arr = read_grid_csv(trace)
        runs.append((label, arr[:, 0], arr[:, 1], arr[:, 2]))
    if runs:
        path = out_dir / "plots" / f"{spec.name}_traces.svg"
        path.write_text(timeseries_svg(runs, title=f"{spec.name}: transfer traces"))
        paths.append(path)
    return paths


def cmd_sweep(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    _check_command(cfg, "sweep")
    if args.preset:
        cfg = {**cfg, "preset": args.preset, "sweep": None}
    scale = _resolve_scale(cfg, args)
    spec, resolved = _spec_from_config(cfg, scale)
    out_dir = Path(args.out)
    jobs = args.jobs if args.jobs is not None else int(cfg.get("jobs", 1))
    resume = bool(args.resume or cfg.get("resume", False))

    done = []

    def progress(idx, rec):
        done.append(idx)
        tail = f"F={rec['F']:.4f}" if "F" in rec else f"failed: {rec['error']}"
        print(f"[{len(done)}/{spec.n_points}] point {idx}  {tail}", flush=True)

    grid = run_sweep(spec, out_dir, jobs=jobs, resume=resume, progress=progress)
    _sweep_plots(spec, grid, out_dir)
    manifest = write_manifest(out_dir, resolved)
    n_fail = len(grid.failures)
    print(f"sweep {spec.name}: {spec.n_points - n_fail}/{spec.n_points} points ok -> {manifest}")
    for idx, err in sorted(grid.failures.items()):
        print(f"  quarantined point {idx} ({spec.point_values(idx)}): {err}")
    return 0 if n_fail == 0 else 1


# ----------------------------------------------------------------------
# plot (re-render from an existing output directory)


def cmd_plot(args) -> int:
    out_dir = Path(args.out)
    manifest_path = Path(args.config) if args.config else out_dir / "manifest.json"
    if not manifest_path.exists():
        raise ConfigError(f"plot: no manifest at {manifest_path}; run a command first")
    cfg = load_config(manifest_path)
    command = cfg.get("command")
    if command == "sweep":
        spec, _ = _spec_from_config(cfg, cfg.get("scale", "ci"))
        _, arr = read_grid_csv(out_dir / "grid.csv")
        fid = arr[:, -2].reshape(spec.shape)
        fid1 = arr[:, -1].reshape(spec.shape)
        grid = SweepGrid(spec=spec, fidelity=fid, fidelity1=fid1, failures={})
        paths = _sweep_plots(spec, grid, out_dir)
    elif command in ("discrete", "continuum"):
        _, arr = read_grid_csv(out_dir / "trace.csv")
        path = out_dir / "plots" / "traces.svg"
        path.parent.mkdir(exist_ok=True)
        path.write_text(
            timeseries_svg([("", arr[:, 0], arr[:, 1], arr[:, 2])])
        )
        paths = [path]
    else:
        raise ConfigError(f"plot: manifest has unknown command {command!r}")
    for p in paths:
        print(f"wrote {p}")
    return 0


# ----------------------------------------------------------------------
# validate


def _validate_checks():
    yield "pulse envelope frozen value", _check_pulse
    yield "thermal spin weights", _check_thermal
    yield "chain-map identities", _check_chain
    yield "oracle vs density-matrix point", _check_oracle
    yield "csv cell format", _check_csv


def _check_pulse():
    from .pulses import default_pump

    got = default_pump().value(0.0)
    want = 2.0 * np.exp(-1.0 / 16.0)
    assert abs(got - want) < 1e-14, f"pump(0)={got!r}, expected {want!r}"


def _check_thermal():
    from .discrete import thermal_spin_state

    rho = thermal_spin_state(1.0, 1.0 / np.log(2.0))
    assert abs(rho[0, 0] - 2.0 / 3.0) < 1e-12 and abs(rho[1, 1] - 1.0 / 3.0) < 1e-12, (
        f"diag={np.diag(rho)}, expected (2/3, 1/3)"
    )


def _check_chain():
    sd = SpectralDensity()
    chain = build_chain(sd, delta=0.25, temperature=0.7, n_chain=8)
    star = np.arange(1, 9) * 0.25
    n = bose_occupation(star, 0.7)
    couplings = np.sqrt(sd.value(star) * 0.25)
    g1 = np.linalg.norm(couplings * np.sqrt(1 + n))
    g2 = np.linalg.norm(couplings * np.sqrt(n))
    assert abs(chain.beta1[0] - g1) < 1e-10, "chain-1 head coupling mismatch"
    assert abs(chain.beta2[0] - g2) < 1e-10, "chain-2 head coupling mismatch"


def _check_oracle():
    params = DiscreteModelParams(temperature=0.5)
    cfg = IntegratorConfig(sample_stride=10**9, dt_divisor=30.0, conservation_tol=1e-5)
    a = evolve(params, cfg).final_fidelity
    b = mixture_oracle(params, cfg).final_fidelity
    assert abs(a - b) < 1e-6, f"|{a!r} - {b!r}| = {abs(a - b):.2e}"


def _check_csv():
    assert fmt(1 / 3) == "0.333333333333", fmt(1 / 3)
    assert fmt(1e-9) == "1e-09", fmt(1e-9)


def cmd_validate(args) -> int:
    failed = 0
    for name, check in _validate_checks():
        try:
            check()
        except AssertionError as exc:
            failed += 1
            print(f"FAIL  {name}: {exc}")
        else:
            print(f"ok    {name}")
    print("validate:", "all checks passed" if failed == 0 else f"{failed} check(s) failed")
    return 0 if failed == 0 else 1


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermostirap",
        description="Population transfer through a thermal intermediary: "
        "density-matrix and chain-MPS simulators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_sweep_flags=False):
        p.add_argument("--config", help="JSON config (a manifest.json also works)")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--resume", action="store_true", help="continue from checkpoints")
        if with_sweep_flags:
            p.add_argument("--preset", choices=PRESET_NAMES, help="built-in grid")
            p.add_argument("--jobs", type=int, default=None, help="parallel workers")
            p.add_argument(
                "--ci-scale", action="store_true",
                help="force the coarse grid scale even if the config says 'paper'",
            )

    common(sub.add_parser("discrete", help="single density-matrix run"))
    common(sub.add_parser("continuum", help="single chain-MPS run"))
    common(sub.add_parser("sweep", help="parameter-grid sweep"), with_sweep_flags=True)
    p_plot = sub.add_parser("plot", help="re-render SVGs from an output directory")
    p_plot.add_argument("--config", help="manifest to read (default: <out>/manifest.json)")
    p_plot.add_argument("--out", default="out", help="output directory to plot from")
    sub.add_parser("validate", help="fast numerical self-checks")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "discrete": cmd_discrete,
        "continuum": cmd_continuum,
        "sweep": cmd_sweep,
        "plot": cmd_plot,
        "validate": cmd_validate,
    }[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
