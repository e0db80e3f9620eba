"""Command-line entry point.

Subcommands:
  simulate     energy series, Fock-probability snapshots, real-space densities
  cycles       Monte Carlo engine-cycle batch with ledger CSV + summary JSON
  elements     dump interaction matrix elements (optionally with the 2D oracle)
  figure-data  emit exactly the file set the figure renderer consumes

Configuration is a single flat JSON document; an empty document is the
canonical parallel run.  OSC_ENGINE_CACHE_DIR overrides the matrix cache
location; --no-cache bypasses it entirely.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import EngineConfig, load_config, validate_config
from .coupling import assemble_or_load, element_oracle_2d, InteractionMatrix
from .dynamics import (
    SpectralHamiltonian,
    assemble_hamiltonian,
    energy_series,
    ground_state,
    min_p00_tau,
    propagate,
    spectral_decompose,
    truncation_diagnostic,
    write_energy_series_csv,
)
from .measurement import (
    realspace_density,
    run_cycles,
    summarize_cycles,
    write_cycle_summary,
    write_cycles_csv,
)


@dataclass
class RunManifest:
    """Record of one CLI run: inputs, outputs, timings, provenance."""

    command: str
    config: dict
    version: str = __version__
    cache: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def add_output(self, name: str, path: Path):
        self.outputs[name] = str(path)

    def verify_outputs(self):
        for name, path in self.outputs.items():
            p = Path(path)
            if not p.exists() or p.stat().st_size == 0:
                raise RuntimeError(f"output {name!r} missing or empty: {path}")

    def write(self, path: Path):
        payload = {
            "command": self.command,
            "version": self.version,
            "config": self.config,
            "cache": self.cache,
            "outputs": self.outputs,
            "timings": self.timings,
            **self.extra,
        }
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


class _StageTimer:
    def __init__(self, manifest: RunManifest):
        self.manifest = manifest

    def run(self, stage: str, fn):
        t0 = time.perf_counter()
        result = fn()
        self.manifest.timings[stage] = time.perf_counter() - t0
        return result


def _load_cli_config(args) -> EngineConfig:
    if args.config:
        config = load_config(args.config)
    else:
        config = validate_config({})
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    return config


def _prepare(config: EngineConfig, manifest: RunManifest, timer: _StageTimer, use_cache: bool):
    phi, cache_info = timer.run(
        "assemble_matrix", lambda: assemble_or_load(config, use_cache=use_cache)
    )
    manifest.cache = cache_info
    spec = timer.run(
        "eigendecompose", lambda: spectral_decompose(assemble_hamiltonian(config, phi))
    )
    return phi, spec


def _write_matrix_csv(path: Path, matrix: np.ndarray):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in matrix:
            fh.write(",".join(f"{x:.15g}" for x in row) + "\n")


def _simulate_products(
    config: EngineConfig,
    phi: InteractionMatrix,
    spec: SpectralHamiltonian,
    out_dir: Path,
    manifest: RunManifest,
    timer: _StageTimer,
) -> list[dict]:
    """Write the energy series, Fock snapshots and density grids; returns snapshot info."""
    tracked = config.tracked_or_default()
    records = timer.run("energy_series", lambda: energy_series(config, phi, spec, tracked=tracked))
    series_path = out_dir / "energy_series.csv"
    write_energy_series_csv(series_path, records, tracked)
    manifest.add_output("energy_series", series_path)
    manifest.extra["tracked_states"] = [list(jk) for jk in tracked]
    manifest.extra["min_p00_tau"] = min_p00_tau(records)
    manifest.extra["min_p00"] = min(rec.p00 for rec in records)

    x_axis = np.linspace(-config.density_extent, config.density_extent, config.density_points)
    axes_path = out_dir / "density_axes.csv"
    with open(axes_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x1,x2\n")
        for x in x_axis:
            fh.write(f"{x:.15g},{x:.15g}\n")
    manifest.add_output("density_axes", axes_path)

    dim = config.truncation.dim
    snapshots = []

    def make_snapshots():
        for i, tau in enumerate(config.snapshot_taus_or_default()):
            psi = propagate(spec, ground_state(config), tau)
            probs = (np.abs(psi) ** 2).reshape(dim, dim)
            fock_path = out_dir / f"fock_snapshot_{i}.csv"
            _write_matrix_csv(fock_path, probs)
            manifest.add_output(f"fock_snapshot_{i}", fock_path)
            rho = realspace_density(psi, x_axis, x_axis, config.lam, config.truncation)
            density_path = out_dir / f"density_{i}.csv"
            _write_matrix_csv(density_path, rho)
            manifest.add_output(f"density_{i}", density_path)
            snapshots.append(
                {"tau": tau, "fock": fock_path.name, "density": density_path.name}
            )

    timer.run("snapshots", make_snapshots)
    manifest.extra["snapshots"] = snapshots
    return snapshots


def run_simulate(
    config: EngineConfig,
    out_dir: Path,
    use_cache: bool = True,
    convergence_check: bool = False,
    command: str = "simulate",
) -> RunManifest:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(command=command, config=config.to_dict())
    timer = _StageTimer(manifest)
    phi, spec = _prepare(config, manifest, timer, use_cache)
    snapshots = _simulate_products(config, phi, spec, out_dir, manifest, timer)

    if convergence_check:
        manifest.extra["truncation_check"] = timer.run(
            "truncation_check", lambda: truncation_diagnostic(config)
        )

    if command == "figure-data":
        bundle = {
            "geometry": config.coupling.geometry,
            "energy_series": "energy_series.csv",
            "density_axes": "density_axes.csv",
            "snapshots": snapshots,
            "tracked_states": manifest.extra["tracked_states"],
        }
        bundle_path = out_dir / "bundle.json"
        with open(bundle_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(bundle, fh, indent=2)
            fh.write("\n")
        manifest.add_output("bundle", bundle_path)

    manifest.verify_outputs()
    manifest.write(out_dir / "manifest.json")
    return manifest


def run_cycle_batch(
    config: EngineConfig,
    out_dir: Path,
    n_cycles: int,
    tau_measure: float | None = None,
    use_cache: bool = True,
) -> RunManifest:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(command="cycles", config=config.to_dict())
    timer = _StageTimer(manifest)
    phi, spec = _prepare(config, manifest, timer, use_cache)

    if tau_measure is None:
        records = timer.run(
            "energy_series", lambda: energy_series(config, phi, spec, tracked=())
        )
        tau_measure = min_p00_tau(records)
        manifest.extra["tau_measure_auto"] = True
        manifest.extra["min_p00"] = min(rec.p00 for rec in records)
    else:
        manifest.extra["tau_measure_auto"] = False
    manifest.extra["tau_measure"] = tau_measure

    ledgers = timer.run(
        "cycles", lambda: run_cycles(config, phi, spec, tau_measure, n_cycles, config.seed)
    )
    cycles_path = out_dir / "cycles.csv"
    write_cycles_csv(cycles_path, ledgers)
    manifest.add_output("cycles", cycles_path)

    summary = summarize_cycles(ledgers)
    summary_path = out_dir / "cycles_summary.json"
    write_cycle_summary(summary_path, summary)
    manifest.add_output("summary", summary_path)
    manifest.extra["excited_fraction"] = summary["excited_fraction"]["mean"]

    manifest.verify_outputs()
    manifest.write(out_dir / "manifest.json")
    return manifest


def run_elements(config: EngineConfig, max_level: int, with_oracle: bool, out):
    """Dump elements u,v,j,k <= max_level as CSV for debugging."""
    from .coupling import element_parallel, element_perpendicular

    spec = config.coupling
    header = "u,v,j,k,value" + (",oracle" if with_oracle else "")
    print(header, file=out)
    for u in range(max_level + 1):
        for v in range(max_level + 1):
            for j in range(max_level + 1):
                for k in range(max_level + 1):
                    if spec.geometry == "parallel":
                        val = element_parallel(u, v, j, k, spec, config.lam)
                    else:
                        val = element_perpendicular(u, v, j, k, spec, config.lam)
                    row = f"{u},{v},{j},{k},{val:.15g}"
                    if with_oracle:
                        row += f",{element_oracle_2d(u, v, j, k, spec, config.lam):.15g}"
                    print(row, file=out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osc-engine",
        description="Measurement-fueled two-oscillator quantum engine simulator",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", type=Path, help="JSON config file (default: canonical parallel)")
        p.add_argument("--seed", type=int, help="override the config RNG seed")
        p.add_argument("--no-cache", action="store_true", help="bypass the matrix disk cache")
        if needs_out:
            p.add_argument("--out", type=Path, required=True, help="output directory")

    p_sim = sub.add_parser("simulate", help="run the unitary evolution data products")
    common(p_sim)
    p_sim.add_argument(
        "--convergence-check",
        action="store_true",
        help="rerun at n_max-10 and report max |dp00| over the grid",
    )

    p_cyc = sub.add_parser("cycles", help="run a Monte Carlo engine-cycle batch")
    common(p_cyc)
    p_cyc.add_argument("--cycles", type=int, required=True, help="number of cycles")
    p_cyc.add_argument(
        "--tau-measure",
        type=float,
        help="measurement time on the grid (default: the p00-minimizing point)",
    )

    p_el = sub.add_parser("elements", help="dump matrix elements for debugging")
    common(p_el, needs_out=False)
    p_el.add_argument("--max-level", type=int, default=4, help="dump all levels up to this")
    p_el.add_argument("--oracle", action="store_true", help="add the 2D-quadrature oracle column")
    p_el.add_argument("--out", type=Path, help="CSV file (default: stdout)")

    p_fig = sub.add_parser("figure-data", help="emit the file set the figure renderer consumes")
    common(p_fig)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = _load_cli_config(args)
    use_cache = not args.no_cache

    if args.command == "simulate":
        manifest = run_simulate(
            config, args.out, use_cache=use_cache, convergence_check=args.convergence_check
        )
        print(f"simulate: wrote {len(manifest.outputs)} files to {args.out}")
    elif args.command == "cycles":
        if args.cycles < 1:
            print("error: --cycles must be >= 1", file=sys.stderr)
            return 2
        manifest = run_cycle_batch(
            config, args.out, args.cycles, tau_measure=args.tau_measure, use_cache=use_cache
        )
        print(
            f"cycles: {args.cycles} cycles at tau={manifest.extra['tau_measure']:.3f}, "
            f"excited fraction {manifest.extra['excited_fraction']:.4f}"
        )
    elif args.command == "elements":
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                run_elements(config, args.max_level, args.oracle, fh)
        else:
            run_elements(config, args.max_level, args.oracle, sys.stdout)
    elif args.command == "figure-data":
        manifest = run_simulate(config, args.out, use_cache=use_cache, command="figure-data")
        print(f"figure-data: bundle at {Path(args.out) / 'bundle.json'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
