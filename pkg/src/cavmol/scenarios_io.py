"""Scenario configuration, the figure preset catalog, runs, and CSV output.

Configs are JSON; see the README for the schema. Each completed run writes
one CSV per scenario (column ``t`` followed by ``<method>.<channel>``
columns) and a JSON sidecar with the fully resolved configuration and run
metadata.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__
from .errors import ConfigError
from .hilbert import DensityMatrix, OperatorMatrix
from .light import (
    Fock,
    FockSuperposition,
    LightState,
    SqueezedVacuum,
    required_photon_trunc,
)
from .models import ModelKind, ModelSpec
from .propagators import (
    FieldChoice,
    PropagationGrid,
    TimeSeries,
    default_grid,
    propagate_exact,
    propagate_qcme,
    propagate_semiclassical,
)

METHODS = ("exact", "qcme1", "qcme2", "semiclassical_ecl", "semiclassical_eeff")


@dataclass(frozen=True)
class ScenarioConfig:
    """One named simulation: model, light state, initial state, grid, methods."""

    name: str
    model: ModelSpec
    light: LightState
    initial: str | tuple
    grid: PropagationGrid
    methods: tuple[str, ...]
    output_channels: tuple[str, ...] | None = None
    output_stride: int = 1
    n_a: int | None = None
    primary_channel: str | None = None

    def __post_init__(self):
        if not self.name:
            raise ConfigError("scenario name must be non-empty")
        if not self.methods:
            raise ConfigError("methods must be non-empty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; choose from {METHODS}")
        if self.output_stride < 1:
            raise ConfigError("output_stride must be >= 1")
        if isinstance(self.initial, str):
            if self.initial not in ("all_ground", "all_excited"):
                raise ConfigError("initial must be all_ground, all_excited, or a matrix")
        object.__setattr__(self, "methods", tuple(self.methods))

    def initial_density_matrix(self) -> DensityMatrix:
        dims = self.model.molecular_dims
        d = self.model.molecular_dim
        if self.initial == "all_excited":
            v = np.zeros(d)
            v[0] = 1.0
            return DensityMatrix.pure(v, dims)
        if self.initial == "all_ground":
            v = np.zeros(d)
            v[-1] = 1.0
            return DensityMatrix.pure(v, dims)
        entries = np.array([[complex(x) for x in row] for row in self.initial])
        return DensityMatrix(OperatorMatrix(entries, dims))


@dataclass
class RunResult:
    """A scenario config together with one TimeSeries per requested method."""

    config: ScenarioConfig
    series: dict[str, TimeSeries]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = [m for m in self.config.methods if m not in self.series]
        if missing:
            raise ConfigError(f"run is missing requested methods {missing}")


def run_scenario(config: ScenarioConfig) -> RunResult:
    """Execute every requested method on the scenario's grid."""
    rho0 = config.initial_density_matrix()
    series: dict[str, TimeSeries] = {}
    wall: dict[str, float] = {}
    for method in config.methods:
        start = time.perf_counter()
        if method == "exact":
            ts = propagate_exact(
                config.model, config.light, rho0, config.grid, output_stride=config.output_stride
            )
        elif method in ("qcme1", "qcme2"):
            ts = propagate_qcme(
                config.model,
                config.light,
                rho0,
                config.grid,
                order=1 if method == "qcme1" else 2,
                output_stride=config.output_stride,
            )
        elif method == "semiclassical_ecl":
            ts = propagate_semiclassical(
                config.model, FieldChoice.ecl(), config.light, rho0, config.grid,
                output_stride=config.output_stride,
            )
        else:
            ts = propagate_semiclassical(
                config.model, FieldChoice.eeff(config.n_a), config.light, rho0, config.grid,
                output_stride=config.output_stride,
            )
        wall[method] = time.perf_counter() - start
        series[method] = ts
    metadata = {
        "code_version": __version__,
        "photon_trunc": config.model.photon_trunc,
        "dt": config.grid.dt,
        "n_steps": config.grid.n_steps,
        "wall_time_s": wall,
    }
    return RunResult(config=config, series=series, metadata=metadata)


# ---------------------------------------------------------------------------
# JSON configuration

_LIGHT_KINDS = ("fock", "fock_superposition", "squeezed_vacuum")


def _reject_unknown(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _light_from_dict(d: dict) -> LightState:
    _reject_unknown(d, {"kind", "n", "c_n", "c_np1", "r"}, "light")
    kind = d.get("kind")
    if kind == "fock":
        return Fock(n=int(d["n"]))
    if kind == "fock_superposition":
        return FockSuperposition(n=int(d["n"]), c_n=float(d["c_n"]), c_np1=float(d["c_np1"]))
    if kind == "squeezed_vacuum":
        return SqueezedVacuum(r=float(d["r"]))
    raise ConfigError(f"light.kind must be one of {_LIGHT_KINDS}, got {kind!r}")


def _light_to_dict(state: LightState) -> dict:
    if isinstance(state, Fock):
        return {"kind": "fock", "n": state.n}
    if isinstance(state, FockSuperposition):
        return {"kind": "fock_superposition", "n": state.n, "c_n": state.c_n, "c_np1": state.c_np1}
    return {"kind": "squeezed_vacuum", "r": state.r}


def config_from_dict(raw: dict) -> ScenarioConfig:
    _reject_unknown(
        raw,
        {
            "name", "model", "light", "initial", "grid", "methods",
            "output_channels", "output_stride", "n_a", "primary_channel",
        },
        "config",
    )
    for required in ("name", "model", "light", "initial", "grid", "methods"):
        if required not in raw:
            raise ConfigError(f"missing required key {required!r}")

    light = _light_from_dict(dict(raw["light"]))

    model_raw = dict(raw["model"])
    _reject_unknown(
        model_raw, {"kind", "n_atoms", "omega0", "omega_c", "g", "photon_trunc"}, "model"
    )
    try:
        kind = ModelKind(model_raw.get("kind", ""))
    except ValueError:
        raise ConfigError(f"model.kind must be rabi or dicke, got {model_raw.get('kind')!r}")
    if "photon_trunc" in model_raw:
        trunc = int(model_raw["photon_trunc"])
    else:
        trunc = required_photon_trunc(light)
    model = ModelSpec(
        kind=kind,
        omega_c=float(model_raw["omega_c"]),
        g=float(model_raw["g"]),
        photon_trunc=trunc,
        omega0=float(model_raw.get("omega0", 1.0)),
        n_atoms=int(model_raw.get("n_atoms", 1)),
    )

    grid_raw = dict(raw["grid"])
    _reject_unknown(grid_raw, {"t_max", "dt"}, "grid")
    if "t_max" not in grid_raw:
        raise ConfigError("grid.t_max is required")
    if "dt" in grid_raw:
        grid = PropagationGrid(t_max=float(grid_raw["t_max"]), dt=float(grid_raw["dt"]))
    else:
        grid = default_grid(model, float(grid_raw["t_max"]))

    initial = raw["initial"]
    if not isinstance(initial, str):
        initial = _matrix_from_json(initial)

    channels = raw.get("output_channels")
    return ScenarioConfig(
        name=str(raw["name"]),
        model=model,
        light=light,
        initial=initial,
        grid=grid,
        methods=tuple(raw["methods"]),
        output_channels=tuple(channels) if channels is not None else None,
        output_stride=int(raw.get("output_stride", 1)),
        n_a=raw.get("n_a"),
        primary_channel=raw.get("primary_channel"),
    )


def _matrix_from_json(obj) -> tuple:
    if not isinstance(obj, dict) or set(obj) - {"real", "imag"}:
        raise ConfigError("matrix initial state must be {'real': [[...]], 'imag': [[...]]}")
    real = np.asarray(obj["real"], dtype=float)
    imag = np.asarray(obj.get("imag", np.zeros_like(real)), dtype=float)
    if real.shape != imag.shape or real.ndim != 2:
        raise ConfigError("initial matrix parts must be equal-shape 2d arrays")
    m = real + 1j * imag
    return tuple(tuple(complex(x) for x in row) for row in m)


def _matrix_to_json(initial: tuple) -> dict:
    m = np.array([[complex(x) for x in row] for row in initial])
    return {"real": m.real.tolist(), "imag": m.imag.tolist()}


def config_to_dict(config: ScenarioConfig) -> dict:
    """Fully resolved configuration; feeding it back reproduces the config."""
    return {
        "name": config.name,
        "model": {
            "kind": config.model.kind.value,
            "n_atoms": config.model.n_atoms,
            "omega0": config.model.omega0,
            "omega_c": config.model.omega_c,
            "g": config.model.g,
            "photon_trunc": config.model.photon_trunc,
        },
        "light": _light_to_dict(config.light),
        "initial": config.initial if isinstance(config.initial, str) else _matrix_to_json(config.initial),
        "grid": {"t_max": config.grid.t_max, "dt": config.grid.dt},
        "methods": list(config.methods),
        "output_channels": list(config.output_channels) if config.output_channels else None,
        "output_stride": config.output_stride,
        "n_a": config.n_a,
        "primary_channel": config.primary_channel,
    }


def load_config(path) -> ScenarioConfig:
    """Read and validate a scenario configuration from a JSON file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    # drop JSON nulls so that defaults apply on round-trips
    return config_from_dict({k: v for k, v in raw.items() if v is not None})


# ---------------------------------------------------------------------------
# Figure presets

_FIG_METHODS = ("exact", "qcme2", "semiclassical_eeff", "semiclassical_ecl")


def _preset(name, kind, omega_c, g, light, initial, t_max, primary, *, n_atoms=1, stride=1,
            extra_methods=()) -> ScenarioConfig:
    trunc = required_photon_trunc(light)
    model = ModelSpec(kind=kind, omega_c=omega_c, g=g, photon_trunc=trunc, n_atoms=n_atoms)
    return ScenarioConfig(
        name=name,
        model=model,
        light=light,
        initial=initial,
        grid=default_grid(model, t_max),
        methods=_FIG_METHODS + tuple(extra_methods),
        output_stride=stride,
        primary_channel=primary,
    )


def figure_presets() -> list[ScenarioConfig]:
    """The thirteen published-panel scenarios.

    Windows cover at least eight periods of the slowest relevant oscillation
    (the detuned collective Rabi envelope), except for the two
    small-detuning one-photon panels: there the second-order master
    equation accumulates a phase drift that overtakes the semiclassical
    amplitude error past roughly three envelope periods, so those panels
    plot the two-period window in which the methods are meaningfully
    compared. Strides keep output files at a manageable size without losing
    any structure.
    """
    r = ModelKind.RABI
    d = ModelKind.DICKE
    sup_01 = FockSuperposition(n=0, c_n=np.sqrt(0.2), c_np1=np.sqrt(0.8))
    sup_45 = FockSuperposition(n=4, c_n=np.sqrt(0.5), c_np1=np.sqrt(0.5))
    return [
        _preset("fig1A", r, 0.75, 0.01, Fock(1), "all_ground", 200.0, "pop_e"),
        _preset("fig1B", r, 0.90, 0.01, Fock(1), "all_ground", 120.0, "pop_e"),
        _preset("fig1C", r, 0.75, 0.01, Fock(0), "all_excited", 400.0, "pop_g", stride=2),
        _preset("fig1D", r, 0.90, 0.01, Fock(0), "all_excited", 120.0, "pop_g"),
        _preset("fig2AC", r, 0.75, 0.015, sup_01, "all_excited", 200.0, "pop_g",
                extra_methods=("qcme1",)),
        _preset("fig2BD", r, 0.90, 0.0025, sup_45, "all_excited", 500.0, "pop_g", stride=2,
                extra_methods=("qcme1",)),
        _preset("fig3A", r, 0.75, 0.005, SqueezedVacuum(0.2), "all_excited", 210.0, "pop_g"),
        _preset("fig3B", r, 0.90, 0.005, SqueezedVacuum(0.2), "all_excited", 510.0, "pop_g",
                stride=2),
        _preset("fig3C", r, 0.90, 0.005, SqueezedVacuum(1.2), "all_excited", 500.0, "pop_g",
                stride=2),
        _preset("fig4A", d, 0.75, 0.015, Fock(0), "all_excited", 200.0, "pop_g_site1",
                n_atoms=4),
        _preset("fig4B", d, 0.90, 0.005, Fock(0), "all_excited", 500.0, "pop_g_site1",
                n_atoms=4, stride=2),
        _preset("fig4C", d, 0.75, 0.008, Fock(10), "all_excited", 190.0, "pop_g_site1",
                n_atoms=4),
        _preset("fig4D", d, 0.99, 0.0005, Fock(10), "all_excited", 4190.0, "pop_g_site1",
                n_atoms=4, stride=16),
    ]


def preset_by_name(name: str) -> ScenarioConfig:
    for preset in figure_presets():
        if preset.name == name:
            return preset
    raise ConfigError(f"no figure preset named {name!r}")


# ---------------------------------------------------------------------------
# CSV output

def write_csv(result: RunResult, path) -> None:
    """Write one scenario's channels to CSV plus a JSON metadata sidecar.

    Columns are ``t`` then ``<method>.<channel>`` in config order. Floats
    use the shortest exact decimal representation (17 significant digits at
    most), so values parse back bit-identically and a rerun reproduces the
    file byte for byte.
    """
    path = Path(path)
    config = result.config
    times = None
    columns: list[tuple[str, np.ndarray]] = []
    for method in config.methods:
        ts = result.series[method]
        if times is None:
            times = ts.times
        elif len(times) != len(ts.times) or np.max(np.abs(times - ts.times)) > 1e-12:
            raise ConfigError("methods produced different output grids")
        names = config.output_channels or tuple(ts.channels)
        for ch in names:
            if ch not in ts.channels:
                raise ConfigError(f"channel {ch!r} not produced by method {method}")
            columns.append((f"{method}.{ch}", ts.channels[ch]))
    if times is None or len(times) == 0:
        raise ConfigError("nothing to write: empty grid")
    if np.any(np.diff(times) <= 0):
        raise ConfigError("output times must be strictly increasing")

    lines = ["t," + ",".join(name for name, _ in columns)]
    for i, t in enumerate(times):
        row = [repr(float(t))] + [repr(float(col[i])) for _, col in columns]
        lines.append(",".join(row))
    try:
        path.write_text("\n".join(lines) + "\n")
        sidecar = path.with_suffix(".meta.json")
        sidecar.write_text(
            json.dumps(
                {"config": config_to_dict(config), "metadata": result.metadata},
                indent=2,
                sort_keys=True,
            )
            + "\n"
        )
    except OSError as exc:
        raise ConfigError(f"cannot write output at {path}: {exc}") from exc
