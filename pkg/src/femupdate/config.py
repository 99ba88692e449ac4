"""Run configuration: a single INI file with named sections.

Schema (version 1)::

    [run]
    schema_version = 1
    benchmark = arch            ; arch | vault | mesh:<path>
    refine = 1                  ; mesh refinement of built-in benchmarks
    modes = 5                   ; number of matched frequencies s
    weight_mode = relative      ; uniform | relative | custom
    custom_weights =            ; s values, custom mode only
    lanczos_tol = 1e-5
    criticality_tol = 1e-4
    seed = 11                   ; Lanczos start-vector seed (per run)
    strategy = RM               ; RM | A | AD  (update command)
    start = midpoint            ; 'midpoint' or free-parameter values
    record_wall_time = false    ; real times in the convergence CSV
    output_dir = out

    [trust_region]              ; optional, defaults shown in the docs
    eta1 = 0.05
    eta2 = 0.9
    gamma1 = 0.25
    gamma2 = 0.5
    growth = 2.0
    delta0 = 0.1
    delta_max = 1.0
    max_outer = 100
    inner_tol = 1e-8

    [targets]
    mode = generate             ; generate | measured
    values = 5000 2200 4800     ; generate: true free-parameter values
                                ; measured: s frequencies in Hz
    noise = 0.0                 ; relative noise on generated targets
    noise_seed = 1

    [noise_study]               ; noise-study command only
    deltas = 1e-4 1e-3 1e-2 1e-1 1
    trials = 5
    seed = 2024

    [material.<name>]           ; override/declare region materials
    region = 2                  ; required for external meshes
    young = 5000                ; MPa
    density = 2200              ; kg/m^3
    poisson = 0.2
    free = young density        ; properties to treat as parameters
    young_bounds = 1000 9000
    density_bounds = 1000 3000

For the built-in benchmarks every material section is optional and
matched by name; unspecified entries keep their benchmark defaults.
External meshes (``benchmark = mesh:<path>``) must declare one section
per region with an explicit ``region`` id.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from . import benchmarks
from .errors import ConfigError
from .fem import Material, Mesh, assemble_parametric
from .objective import UpdatingProblem, evaluate_full
from .trustregion import TrustRegionConfig

SCHEMA_VERSION = 1
STRATEGIES = ("RM", "A", "AD")
UNSUPPORTED_STRATEGIES = ("BB",)


@dataclass
class RunSetup:
    """Everything a command needs, resolved from one config file."""

    problem: UpdatingProblem
    start: np.ndarray  # physical units
    tr_config: TrustRegionConfig
    strategy: str
    output_dir: str
    record_wall_time: bool
    benchmark: str
    mesh: Mesh
    materials: list
    parameter_names: list
    true_values: np.ndarray  # None when targets are measured
    noise_deltas: np.ndarray
    noise_trials: int
    noise_seed: int
    assembly_seconds: float


def _floats(text, section, key, expected=None):
    try:
        vals = np.array([float(v) for v in text.replace(",", " ").split()])
    except ValueError as exc:
        raise ConfigError("not a list of numbers: %r" % text, section, key) from exc
    if expected is not None and vals.size != expected:
        raise ConfigError(
            "expected %d values, got %d" % (expected, vals.size), section, key
        )
    return vals


def _get(parser, section, key, cast, default):
    if not parser.has_option(section, key):
        if default is _REQUIRED:
            raise ConfigError("missing required key", section, key)
        return default
    raw = parser.get(section, key)
    try:
        if cast is bool:
            return parser.getboolean(section, key)
        return cast(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError("cannot parse %r" % raw, section, key) from exc


class _Required:
    pass


_REQUIRED = _Required()


def _apply_material_overrides(parser, materials, need_region):
    by_name = {m.name: m for m in materials}
    out = list(materials)
    for section in parser.sections():
        if not section.startswith("material."):
            continue
        name = section[len("material.") :]
        if need_region:
            rid = _get(parser, section, "region", int, _REQUIRED)
            while len(out) < rid:
                out.append(None)
            mat = Material(name, young=1.0, density=1.0, poisson=0.0)
            out[rid - 1] = mat
        else:
            mat = by_name.get(name)
            if mat is None:
                raise ConfigError(
                    "benchmark has no region named %r (have: %s)"
                    % (name, ", ".join(sorted(by_name))),
                    section,
                )
        mat.young = _get(parser, section, "young", float, mat.young)
        mat.density = _get(parser, section, "density", float, mat.density)
        mat.poisson = _get(parser, section, "poisson", float, mat.poisson)
        if parser.has_option(section, "free"):
            props = parser.get(section, "free").split()
            bad = set(props) - {"young", "density"}
            if bad:
                raise ConfigError(
                    "unknown free properties %s" % sorted(bad), section, "free"
                )
            mat.free_young = "young" in props
            mat.free_density = "density" in props
        if parser.has_option(section, "young_bounds"):
            mat.young_bounds = tuple(
                _floats(parser.get(section, "young_bounds"), section, "young_bounds", 2)
            )
        if parser.has_option(section, "density_bounds"):
            mat.density_bounds = tuple(
                _floats(
                    parser.get(section, "density_bounds"), section, "density_bounds", 2
                )
            )
    if need_region:
        for rid, mat in enumerate(out, start=1):
            if mat is None:
                raise ConfigError(
                    "external mesh: no material section declares region %d" % rid
                )
    return out


def load_config(path):
    """Parse a config file into a ready-to-run RunSetup."""
    import time

    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError("cannot read config file: %s" % exc)
    except configparser.Error as exc:
        raise ConfigError("malformed config: %s" % exc)

    if not parser.has_section("run"):
        raise ConfigError("missing section", "run")
    version = _get(parser, "run", "schema_version", int, SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(
            "unsupported schema_version %d (expected %d)" % (version, SCHEMA_VERSION),
            "run",
            "schema_version",
        )

    bench = _get(parser, "run", "benchmark", str, _REQUIRED)
    refine = _get(parser, "run", "refine", int, 1)
    t0 = time.perf_counter()
    if bench.startswith("mesh:"):
        mesh_path = bench[len("mesh:") :].strip()
        try:
            mesh = Mesh.load(mesh_path)
        except (OSError, ValueError) as exc:
            raise ConfigError("cannot load mesh %r: %s" % (mesh_path, exc), "run", "benchmark")
        materials = _apply_material_overrides(parser, [], need_region=True)
        if len(materials) != mesh.n_regions:
            raise ConfigError(
                "mesh has %d regions, config declares %d"
                % (mesh.n_regions, len(materials))
            )
    elif bench in ("arch", "vault"):
        mesh, materials = benchmarks.benchmark(bench, refine)
        materials = _apply_material_overrides(parser, materials, need_region=False)
    else:
        raise ConfigError(
            "unknown benchmark %r (arch, vault, or mesh:<path>)" % bench,
            "run",
            "benchmark",
        )

    try:
        pencil, box, current = assemble_parametric(mesh, materials)
    except ValueError as exc:
        raise ConfigError("cannot assemble model: %s" % exc)
    assembly_seconds = time.perf_counter() - t0
    if pencil.n_parameters == 0:
        raise ConfigError("no free parameters: mark some properties free")

    s = _get(parser, "run", "modes", int, 5)
    if s < 1:
        raise ConfigError("modes must be positive", "run", "modes")
    weight_mode = _get(parser, "run", "weight_mode", str, "uniform")
    custom = None
    if weight_mode == "custom":
        custom = _floats(
            _get(parser, "run", "custom_weights", str, _REQUIRED),
            "run",
            "custom_weights",
            s,
        )
    elif weight_mode not in ("uniform", "relative"):
        raise ConfigError("unknown weight_mode %r" % weight_mode, "run", "weight_mode")
    tau = _get(parser, "run", "lanczos_tol", float, 1e-5)
    eps = _get(parser, "run", "criticality_tol", float, 1e-4)
    seed = _get(parser, "run", "seed", int, 0)
    strategy = _get(parser, "run", "strategy", str, "RM")
    if strategy in UNSUPPORTED_STRATEGIES:
        raise ConfigError(
            "strategy %s is not supported by this tool" % strategy, "run", "strategy"
        )
    if strategy not in STRATEGIES:
        raise ConfigError(
            "unknown strategy %r (have: %s)" % (strategy, ", ".join(STRATEGIES)),
            "run",
            "strategy",
        )

    start_text = _get(parser, "run", "start", str, "midpoint")
    if start_text == "midpoint":
        start = box.midpoint()
    else:
        start = _floats(start_text, "run", "start", pencil.n_parameters)
        if not box.contains(start):
            raise ConfigError("start lies outside the feasible box", "run", "start")

    # targets
    if not parser.has_section("targets"):
        raise ConfigError("missing section", "targets")
    mode = _get(parser, "targets", "mode", str, _REQUIRED)
    true_values = None
    if mode == "generate":
        true_values = _floats(
            _get(parser, "targets", "values", str, _REQUIRED),
            "targets",
            "values",
            pencil.n_parameters,
        )
        if not box.contains(true_values):
            raise ConfigError("values lie outside the feasible box", "targets", "values")
        gen_problem = UpdatingProblem(
            pencil, box, measured=np.arange(1.0, s + 1.0), weights="uniform",
            lanczos_tol=tau, criticality_tol=eps, seed=seed,
        )
        measured = evaluate_full(gen_problem, true_values).frequencies
        noise = _get(parser, "targets", "noise", float, 0.0)
        if noise > 0.0:
            rng = np.random.default_rng(
                [_get(parser, "targets", "noise_seed", int, 1), 0]
            )
            measured = np.sort(
                measured * (1.0 + noise * rng.uniform(-1.0, 1.0, measured.size))
            )
    elif mode == "measured":
        measured = _floats(
            _get(parser, "targets", "values", str, _REQUIRED), "targets", "values", s
        )
    else:
        raise ConfigError("mode must be 'generate' or 'measured'", "targets", "mode")

    try:
        problem = UpdatingProblem(
            pencil,
            box,
            measured=measured,
            weights=weight_mode if custom is None else custom,
            lanczos_tol=tau,
            criticality_tol=eps,
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError("invalid problem: %s" % exc)

    tr_kwargs = {}
    if parser.has_section("trust_region"):
        for key, cast in (
            ("eta1", float), ("eta2", float), ("gamma1", float), ("gamma2", float),
            ("growth", float), ("delta0", float), ("delta_max", float),
            ("max_outer", int), ("inner_tol", float),
        ):
            if parser.has_option("trust_region", key):
                tr_kwargs[key] = _get(parser, "trust_region", key, cast, _REQUIRED)
    tr_config = TrustRegionConfig(**tr_kwargs)

    deltas = _floats(
        parser.get("noise_study", "deltas")
        if parser.has_option("noise_study", "deltas")
        else "1e-4 1e-3 1e-2 1e-1 1",
        "noise_study",
        "deltas",
    )
    trials = (
        _get(parser, "noise_study", "trials", int, 5)
        if parser.has_section("noise_study")
        else 5
    )
    noise_seed = (
        _get(parser, "noise_study", "seed", int, 2024)
        if parser.has_section("noise_study")
        else 2024
    )

    return RunSetup(
        problem=problem,
        start=start,
        tr_config=tr_config,
        strategy=strategy,
        output_dir=_get(parser, "run", "output_dir", str, "out"),
        record_wall_time=_get(parser, "run", "record_wall_time", bool, False),
        benchmark=bench,
        mesh=mesh,
        materials=materials,
        parameter_names=list(pencil.names),
        true_values=true_values,
        noise_deltas=deltas,
        noise_trials=trials,
        noise_seed=noise_seed,
        assembly_seconds=assembly_seconds,
    )
