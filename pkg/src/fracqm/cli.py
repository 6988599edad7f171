"""Batch command-line front end.

Subcommands: evolve, eigen, hydrogen, check. Each run validates its JSON
config against the schema below, writes a manifest before any results, and
finishes by marking the manifest completed or aborted. Exit codes: 0 success,
1 check failure, 2 config error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import contextlib
import datetime
import json
import sys
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from . import __version__
from .dynamics import (
    PropagatorConfig,
    coefficient_dynamics,
    evolve_split_step,
    gaussian_packet,
    picture_equivalence_residual,
    plane_wave,
    standard_observables,
)
from .grid import (
    LeakageError,
    PositionWavefunction,
    forward_transform,
    make_grid,
    normalize,
)
from .hydrogen import AnomalousAtomSpec, emit_spectrum_table, fit_exponent
from .operators import (
    CoefficientVector,
    HamiltonianSpec,
    OperatorMatrix,
    PRINCIPAL,
    Potential,
    RIESZ,
    hamiltonian_apply,
    hermiticity_residual,
    kinetic_apply,
    apply_p_power,
)
from .spectral import fourier_basis, stationary_states, virial_check


class ConfigError(ValueError):
    pass


class CheckFailure(RuntimeError):
    pass


_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_TRANSITION = {
    "type": "array",
    "items": {"type": "integer", "minimum": 1},
    "minItems": 2,
    "maxItems": 2,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n", "x_min", "x_max"],
            "properties": {"n": {"type": "integer", "minimum": 8}, "x_min": _NUMBER, "x_max": _NUMBER},
        },
        "hamiltonian": {
            "type": "object",
            "additionalProperties": False,
            "required": ["alpha", "potential"],
            "properties": {
                "alpha": _POSITIVE,
                "mass": _POSITIVE,
                "branch": {"enum": ["riesz", "principal"]},
                "potential": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["form"],
                    "properties": {
                        "form": {"enum": ["power_law", "harmonic", "soft_coulomb", "sampled", "zero"]},
                        "beta": _POSITIVE,
                        "coefficient": _NUMBER,
                        "softening": _POSITIVE,
                        "samples": {"type": "array", "items": _NUMBER},
                    },
                },
            },
        },
        "initial_state": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["plane_wave", "gaussian"]},
                "k": {"type": "integer"},
                "x0": _NUMBER,
                "p0": _NUMBER,
                "sigma": _POSITIVE,
            },
        },
        "evolution": {
            "type": "object",
            "additionalProperties": False,
            "required": ["dt", "steps"],
            "properties": {
                "dt": _POSITIVE,
                "steps": {"type": "integer", "minimum": 1},
                "observables": {"type": "array", "items": {"type": "string"}},
                "record_every": {"type": "integer", "minimum": 1},
                "leakage_tol": _POSITIVE,
            },
        },
        "eigen": {
            "type": "object",
            "additionalProperties": False,
            "required": ["basis_size", "k"],
            "properties": {
                "basis_size": {"type": "integer", "minimum": 2},
                "k": {"type": "integer", "minimum": 1},
                "virial": {"type": "boolean"},
                "residual_tol": _POSITIVE,
            },
        },
        "hydrogen": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alpha": _POSITIVE,
                "beta": _POSITIVE,
                "mode": {"enum": ["paper", "precise"]},
                "transitions": {"type": "array", "items": _TRANSITION},
                "fit": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["lines_kev"],
                    "properties": {
                        "lines_kev": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "array",
                                "minItems": 3,
                                "maxItems": 3,
                                "items": _NUMBER,
                            },
                        },
                        "initial_beta": _POSITIVE,
                        "bracket": {
                            "type": "array",
                            "minItems": 2,
                            "maxItems": 2,
                            "items": _NUMBER,
                        },
                    },
                },
            },
        },
        "check": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "suites": {
                    "type": "array",
                    "items": {"enum": ["hermiticity", "parseval", "picture", "virial"]},
                },
                "seed": {"type": "integer", "minimum": 0},
                "branch": {"enum": ["riesz", "principal"]},
                "pairs": {"type": "integer", "minimum": 1},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "format": {"enum": ["csv", "json"]},
                "path": {"type": "string"},
                "precision": {"type": "integer", "minimum": 1, "maximum": 17},
            },
        },
    },
}

_VALIDATOR = Draft202012Validator(CONFIG_SCHEMA)


def load_config(path: str) -> dict:
    try:
        with open(path) as f:
            config = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    errors = sorted(_VALIDATOR.iter_errors(config), key=lambda e: list(e.path))
    if errors:
        detail = "; ".join(
            f"{'/'.join(str(p) for p in e.path) or '<root>'}: {e.message}" for e in errors
        )
        raise ConfigError(f"config schema violation: {detail}")
    return config


def _require(config: dict, *blocks: str):
    missing = [b for b in blocks if b not in config]
    if missing:
        raise ConfigError(f"config is missing required blocks: {missing}")


def _build_grid(config: dict):
    g = config["grid"]
    try:
        return make_grid(g["n"], g["x_min"], g["x_max"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_potential(block: dict) -> Potential:
    form = block["form"]
    try:
        if form == "zero":
            return Potential.zero()
        if form == "power_law":
            return Potential.power_law(block.get("beta", 2.0), block.get("coefficient", 1.0))
        if form == "harmonic":
            return Potential(form="harmonic", beta=2.0, coefficient=block.get("coefficient", 0.5))
        if form == "soft_coulomb":
            return Potential.soft_coulomb(
                block.get("coefficient", 1.0), block.get("softening", 1.0)
            )
        return Potential.sampled_values(block["samples"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad potential block: {exc}") from exc


def _build_spec(config: dict) -> HamiltonianSpec:
    h = config["hamiltonian"]
    try:
        return HamiltonianSpec.natural(
            alpha=h["alpha"],
            potential=_build_potential(h["potential"]),
            mass=h.get("mass", 1.0),
            branch=PRINCIPAL if h.get("branch") == "principal" else RIESZ,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_initial_state(config: dict, grid, spec) -> PositionWavefunction:
    block = config["initial_state"]
    if block["kind"] == "plane_wave":
        k = block.get("k", 1)
        p = 2 * np.pi * grid.hbar * k / grid.length
        return plane_wave(grid, p, spec)
    return gaussian_packet(
        grid,
        x0=block.get("x0", 0.0),
        p0=block.get("p0", 0.0),
        sigma=block.get("sigma", 1.0),
    )


class Manifest:
    """Run manifest written before results; rewritten on completion/abort."""

    def __init__(self, outdir: Path, config: dict, derived: dict):
        self.path = outdir / "manifest.json"
        self.body = {
            "tool": "fracqm",
            "version": __version__,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "config": config,
            "derived": derived,
            "outputs": [],
            "status": "started",
        }
        self._write()

    def _write(self):
        with open(self.path, "w") as f:
            json.dump(self.body, f, indent=2, sort_keys=True)
            f.write("\n")

    def finish(self, outputs: list[str], status: str = "completed"):
        self.body["outputs"] = sorted(outputs)
        self.body["status"] = status
        self._write()

    def abort(self, reason: str):
        self.body["status"] = "aborted"
        self.body["abort_reason"] = reason
        self._write()


def _out_stem(config: dict, default: str) -> str:
    return config.get("output", {}).get("path", default)


def _precision(config: dict) -> int:
    return config.get("output", {}).get("precision", 12)


def cmd_evolve(config: dict, outdir: Path) -> int:
    _require(config, "grid", "hamiltonian", "evolution", "initial_state")
    grid = _build_grid(config)
    spec = _build_spec(config)
    evo = config["evolution"]
    cfg = PropagatorConfig(
        dt=evo["dt"],
        n_steps=evo["steps"],
        record_every=evo.get("record_every", 1),
        leakage_tol=evo.get("leakage_tol", 1e-8),
    )
    try:
        observables = standard_observables(spec, evo.get("observables", ["x", "energy"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    psi0 = _build_initial_state(config, grid, spec)

    manifest = Manifest(
        outdir,
        config,
        derived={"dx": grid.dx, "p_max": float(np.abs(grid.momentum).max())},
    )
    stem = _out_stem(config, "record")
    try:
        _, record = evolve_split_step(psi0, spec, cfg, observables=observables)
    except LeakageError as exc:
        manifest.abort(f"step {exc.step}: {exc}")
        raise
    csv_path = outdir / f"{stem}.csv"
    json_path = outdir / f"{stem}.json"
    record.write_csv(csv_path, precision=_precision(config))
    record.write_json(json_path)
    manifest.finish([csv_path.name, json_path.name])
    return 0


def cmd_eigen(config: dict, outdir: Path) -> int:
    _require(config, "grid", "hamiltonian", "eigen")
    grid = _build_grid(config)
    spec = _build_spec(config)
    block = config["eigen"]
    basis = fourier_basis(grid, block["basis_size"])

    manifest = Manifest(
        outdir,
        config,
        derived={"dx": grid.dx, "p_max": float(np.abs(grid.momentum).max())},
    )
    stem = _out_stem(config, "spectrum")
    try:
        result = stationary_states(
            spec, basis, block["k"], residual_tol=block.get("residual_tol", 1e-6)
        )
    except ValueError as exc:
        manifest.abort(str(exc))
        raise LeakageError(str(exc)) from exc  # numerical abort path, exit 3

    outputs = []
    csv_path = outdir / f"{stem}.csv"
    result.write_csv(csv_path, precision=_precision(config))
    result.write_json(outdir / f"{stem}.json")
    outputs += [csv_path.name, f"{stem}.json"]

    if block.get("virial", False):
        fmt = f"%.{_precision(config)}g"
        virial_path = outdir / "virial.csv"
        with open(virial_path, "w") as f:
            f.write("state_label,lhs,rhs,relative_residual\n")
            for i, psi in enumerate(result.states):
                report = virial_check(psi, spec, state_label=f"state_{i}")
                f.write(
                    f"{report.state_label},{fmt % report.lhs},{fmt % report.rhs},"
                    f"{fmt % report.relative_residual}\n"
                )
        outputs.append(virial_path.name)

    manifest.finish(outputs)
    return 0


def cmd_hydrogen(config: dict, outdir: Path, mode_override: str | None = None) -> int:
    _require(config, "hydrogen")
    block = config["hydrogen"]
    if ("alpha" in block) == ("beta" in block):
        raise ConfigError("hydrogen block needs exactly one of alpha or beta")
    mode = mode_override or block.get("mode", "paper")
    beta = block.get("beta", 2 * block.get("alpha", 0.0))
    try:
        spec = AnomalousAtomSpec.from_beta(beta, mode=mode)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    transitions = [tuple(t) for t in block.get("transitions", [[2, 1], [3, 1], [4, 1], [20, 1], [120, 1]])]

    manifest = Manifest(outdir, config, derived={"alpha": spec.alpha, "beta": spec.beta, "mode": mode})
    stem = _out_stem(config, "spectrum_table")
    try:
        table = emit_spectrum_table(spec, transitions)
    except ValueError as exc:
        manifest.abort(str(exc))
        raise ConfigError(str(exc)) from exc
    outputs = [f"{stem}.csv", f"{stem}.json"]
    table.write_csv(outdir / f"{stem}.csv")
    table.write_json(outdir / f"{stem}.json")

    if "fit" in block:
        fit_block = block["fit"]
        kev = spec.constants.joule_per_ev * 1e3
        lines = [(int(k), int(n), e * kev) for k, n, e in fit_block["lines_kev"]]
        bracket = tuple(fit_block.get("bracket", (1.01, 10.0)))
        try:
            fit = fit_exponent(
                lines,
                initial_beta=fit_block.get("initial_beta", 2.0),
                bracket=bracket,
                mode=mode,
            )
        except ValueError as exc:
            manifest.abort(str(exc))
            raise ConfigError(str(exc)) from exc
        with open(outdir / "fit.json", "w") as f:
            json.dump(fit.to_json_dict(), f, indent=2)
            f.write("\n")
        outputs.append("fit.json")

    manifest.finish(outputs)
    return 0


def _random_states(grid, rng, count):
    out = []
    for _ in range(count):
        raw = rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points)
        out.append(normalize(PositionWavefunction(grid=grid, samples=raw)))
    return out


def run_check_suites(config: dict) -> dict:
    """Run the requested invariant suites; returns per-suite reports."""
    block = config.get("check", {})
    suites = block.get("suites", None)
    if suites is None:
        suites = ["hermiticity", "parseval", "picture", "virial"]
    if len(suites) == 0:
        raise ConfigError("empty check list")
    seed = block.get("seed", 0)
    pairs = block.get("pairs", 100)
    branch = PRINCIPAL if block.get("branch") == "principal" else RIESZ
    rng = np.random.default_rng(seed)
    results = {}

    if "hermiticity" in suites:
        grid = make_grid(256, -16.0, 16.0)
        spec = HamiltonianSpec.natural(1.3, Potential.harmonic(), branch=branch)
        operators = {
            "p_power_0.5": lambda s: apply_p_power(s, 0.5, branch=branch),
            "kinetic": lambda s: kinetic_apply(s, spec),
            "hamiltonian": lambda s: hamiltonian_apply(s, spec),
        }
        worst = {}
        for name, op in operators.items():
            residuals = []
            for _ in range(pairs):
                phi, psi = _random_states(grid, rng, 2)
                residuals.append(hermiticity_residual(op, phi, psi))
            worst[name] = max(residuals)
        results["hermiticity"] = {
            "passed": all(v < 1e-10 for v in worst.values()),
            "threshold": 1e-10,
            "worst_residuals": worst,
        }

    if "parseval" in suites:
        grid = make_grid(256, -16.0, 16.0)
        worst = 0.0
        for psi in _random_states(grid, rng, pairs):
            worst = max(worst, abs(forward_transform(psi).norm() - psi.norm()))
        results["parseval"] = {"passed": worst < 1e-10, "threshold": 1e-10, "worst_residual": worst}

    if "picture" in suites:
        dim = 16
        worst = 0.0
        for _ in range(50):
            raw_o = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            raw_h = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            o = OperatorMatrix.from_entries((raw_o + raw_o.conj().T) / 2, "b")
            h = OperatorMatrix.from_entries((raw_h + raw_h.conj().T) / 2, "b")
            a = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            a = CoefficientVector(a / np.linalg.norm(a), "b")
            for t in (0.1, 1.0, 10.0):
                worst = max(worst, picture_equivalence_residual(o, h, a, t))
        results["picture"] = {"passed": worst < 1e-8, "threshold": 1e-8, "worst_residual": worst}

    if "virial" in suites:
        grid = make_grid(512, -16.0, 16.0)
        spec = HamiltonianSpec.natural(1.0, Potential.harmonic())
        basis = fourier_basis(grid, 128)
        spectrum = stationary_states(spec, basis, 4)
        worst = 0.0
        for i, psi in enumerate(spectrum.states):
            report = virial_check(psi, spec, state_label=f"state_{i}")
            worst = max(worst, report.relative_residual)
        results["virial"] = {"passed": worst < 1e-5, "threshold": 1e-5, "worst_residual": worst}

    return results


def cmd_check(config: dict, outdir: Path) -> int:
    results = run_check_suites(config)
    manifest = Manifest(outdir, config, derived={})
    with open(outdir / "checks.json", "w") as f:
        json.dump(results, f, indent=2, sort_keys=True, default=float)
        f.write("\n")
    manifest.finish(["checks.json"])
    all_passed = True
    for name, report in results.items():
        status = "PASS" if report["passed"] else "FAIL"
        print(f"{status} {name}")
        all_passed = all_passed and report["passed"]
    if not all_passed:
        raise CheckFailure("one or more invariant suites failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracqm",
        description="Batch driver for power-law-dispersion quantum simulations",
    )
    parser.add_argument("--version", action="version", version=f"fracqm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("evolve", "split-step time evolution with per-step observables"),
        ("eigen", "stationary states and optional virial report"),
        ("hydrogen", "closed-form atom transition table and exponent fit"),
        ("check", "run the built-in invariant suites"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--output", default=".", help="output directory (default: cwd)")
        p.add_argument(
            "--single-thread",
            action="store_true",
            help="limit BLAS/FFT thread pools to one thread for bit-reproducibility",
        )
        if name == "hydrogen":
            p.add_argument("--mode", choices=["paper", "precise"], default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    limiter = contextlib.nullcontext()
    if args.single_thread:
        from threadpoolctl import threadpool_limits

        limiter = threadpool_limits(limits=1)
    try:
        with limiter:
            config = load_config(args.config)
            outdir = Path(args.output)
            outdir.mkdir(parents=True, exist_ok=True)
            if args.command == "evolve":
                return cmd_evolve(config, outdir)
            if args.command == "eigen":
                return cmd_eigen(config, outdir)
            if args.command == "hydrogen":
                return cmd_hydrogen(config, outdir, mode_override=args.mode)
            return cmd_check(config, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return 1
    except LeakageError as exc:
        step = f" at step {exc.step}" if exc.step is not None else ""
        print(f"numerical abort{step}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
