"""Scenario configuration: schema, strict TOML parsing and documentation.

A scenario file has a required ``[scenario]`` table naming the kind, a
``[parameters]`` table whose keys depend on the kind, and optional
``[output]``, ``[ring]`` and ``[constants]`` tables.  Unknown tables or keys
are errors, reported with their line numbers.
"""

from __future__ import annotations

import hashlib
import json
import re
import sys
from importlib import resources
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from chiral_qubit.dirac_sea import DEFAULT_EPSILONS, DEFAULT_RESIDUAL_THRESHOLD
from chiral_qubit.errors import ConfigError
from chiral_qubit.flux import LinearRamp
from chiral_qubit.units import DEFAULT_FERMI_VELOCITY, DEFAULT_RADIUS, CODATA


@dataclass(frozen=True)
class Param:
    type: str  # float | int | bool | str | floats
    default: object = None
    unit: str = "-"
    doc: str = ""
    required: bool = False
    choices: tuple = ()


KINDS = {
    "SpectrumSweep": {
        "phi_min": Param("float", 0.0, "Phi_0", "first flux ratio of the sweep"),
        "phi_max": Param("float", 1.0, "Phi_0", "last flux ratio of the sweep"),
        "points": Param("int", 11, "-", "number of evenly spaced flux values"),
        "random_points": Param("int", 0, "-", "extra flux values drawn uniformly from [phi_min, phi_max) with the seed"),
        "e_min": Param("float", -3.0, "hbar*omega", "lower edge of the energy window"),
        "e_max": Param("float", 3.0, "hbar*omega", "upper edge of the energy window"),
    },
    "Washboard": {
        "phi_min": Param("float", -1.5, "Phi_0", "first flux ratio of the grid"),
        "phi_max": Param("float", 2.5, "Phi_0", "last flux ratio of the grid"),
        "points": Param("int", 1001, "-", "number of grid points"),
        "u0": Param("float", 1.0, "hbar*omega", "overall scale of the SQUID-like potential"),
        "beta": Param("float", 0.0, "-", "relative weight of the tunneling cosine"),
        "cosine_argument": Param("str", "literal", "-", "cos(phi) ('literal') or cos(2 pi phi) ('two_pi')",
                                 choices=("literal", "two_pi")),
    },
    "HeatKernel": {
        "phis": Param("floats", [0.1, 0.25, 0.4, 0.6, 0.75, 0.9], "Phi_0", "flux ratios in (0, 1)"),
        "epsilons": Param("floats", list(DEFAULT_EPSILONS), "1/(hbar*omega)", "regulator values, strictly decreasing"),
        "residual_threshold": Param("float", DEFAULT_RESIDUAL_THRESHOLD, "hbar*omega",
                                    "largest RMS fit residual accepted as converged"),
        "sharp_cutoff": Param("int", 50, "hbar*omega", "start of the averaged sharp-cutoff window"),
    },
    "SpectralFlow": {
        "delta_phi": Param("float", None, "Phi_0", "total flux change of the linear ramp", required=True),
        "phi_start": Param("float", 0.0, "Phi_0", "flux ratio at t = 0"),
        "duration": Param("float", 1.0, "1/omega", "ramp duration"),
        "steps": Param("int", 101, "-", "number of time samples"),
        "e_min": Param("float", -10.0, "hbar*omega", "lower edge of the tracking window"),
        "e_max": Param("float", 10.0, "hbar*omega", "upper edge of the tracking window"),
        "e_fermi": Param("float", 0.0, "hbar*omega", "Fermi energy of the initial filling"),
    },
    "Rabi": {
        "omega_rabi": Param("float", None, "omega", "angular Rabi rate of the drive", required=True),
        "detuning": Param("float", None, "omega", "drive angular frequency minus qubit splitting", required=True),
        "duration": Param("float", None, "1/omega", "length of the simulated trace", required=True),
        "delta": Param("float", 0.5, "hbar*omega", "tunneling amplitude (splitting is 2*delta at eps = 0)"),
        "epsilon": Param("float", 0.0, "hbar*omega", "static detuning eps of the qubit"),
        "samples": Param("int", 2001, "-", "number of output samples"),
        "tolerance": Param("float", 1e-8, "-", "integration tolerance per unit time"),
        "rwa": Param("bool", False, "-", "use the rotating-wave fast path instead of full integration"),
    },
    "LandauZener": {
        "delta": Param("float", 1.0, "hbar*omega", "half the minimum gap"),
        "adiabaticity": Param("floats", [0.05, 0.1, 0.3, 1.0, 2.0, 3.0], "-", "values of 2 pi delta^2 / rate"),
        "span_factor": Param("float", 100.0, "-", "sweep eps from -span_factor*delta to +span_factor*delta"),
        "tolerance": Param("float", 1e-9, "-", "integration tolerance per unit time"),
    },
    "Decoherence": {
        "gamma_flip_hz": Param("float", 1e9, "1/s", "chirality-flip rate"),
        "gate_frequency_hz": Param("float", 1e13, "Hz", "gate (coherent oscillation) frequency"),
        "samples_per_period": Param("int", 32, "-", "time samples per gate period"),
    },
    "CmeSweep": {
        "n_max": Param("int", 20, "-", "sweep n_right and n_left over [-n_max, n_max]"),
        "phi": Param("float", 0.0, "Phi_0", "flux ratio"),
        "cutoff": Param("int", 10_000, "hbar*omega", "energy cutoff of the occupation sum"),
        "field": Param("float", 1.0, "natural", "magnetic field for the 3+1D current density"),
    },
}

SECTIONS = {
    "scenario": {
        "name": Param("str", None, "-", "run name", required=True),
        "kind": Param("str", None, "-", "scenario kind", required=True, choices=tuple(KINDS)),
        "seed": Param("int", 0, "-", "seed for any random draws"),
    },
    "output": {
        "dir": Param("str", None, "-", "output directory (default: ./<name>)"),
        "formats": Param("strs", ["csv", "json"], "-", "any of 'csv' and 'json'"),
    },
    "ring": {
        "radius": Param("float", DEFAULT_RADIUS, "m", "ring radius R"),
        "fermi_velocity": Param("float", DEFAULT_FERMI_VELOCITY, "m/s", "Fermi velocity v_F"),
    },
    "constants": {
        "elementary_charge": Param("float", CODATA.elementary_charge, "C", "elementary charge e"),
        "planck": Param("float", CODATA.planck, "J*s", "Planck constant h"),
    },
}


@dataclass
class Scenario:
    name: str
    kind: str
    parameters: dict
    output: dict
    ring: dict
    constants: dict
    seed: int = 0
    flux_program: object = field(default=None, compare=False)

    def resolved(self) -> dict:
        """Complete configuration, defaults filled in, as plain data."""
        return {
            "scenario": {"name": self.name, "kind": self.kind, "seed": self.seed},
            "parameters": dict(self.parameters),
            "output": dict(self.output),
            "ring": dict(self.ring),
            "constants": dict(self.constants),
        }

    def digest(self) -> str:
        data = self.resolved()
        data["output"] = {k: v for k, v in data["output"].items() if k != "dir"}
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


_HEADER = re.compile(r"^\s*\[\s*([A-Za-z0-9_.\-]+)\s*\]")
_KEY = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*=")


def _locate(text: str) -> dict:
    """Map (table, key) and (table, None) to 1-based line numbers."""
    where = {}
    table = ""
    for i, line in enumerate(text.splitlines(), start=1):
        m = _HEADER.match(line)
        if m:
            table = m.group(1)
            where.setdefault((table, None), i)
            continue
        m = _KEY.match(line)
        if m:
            where.setdefault((table, m.group(1)), i)
    return where


def _coerce(name, param: Param, value, line, problems):
    t = param.type
    ok = True
    if t == "float":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    elif t == "int":
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif t == "bool":
        ok = isinstance(value, bool)
    elif t == "str":
        ok = isinstance(value, str)
    elif t == "floats":
        ok = isinstance(value, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
        value = [float(v) for v in value] if ok else value
    elif t == "strs":
        ok = isinstance(value, list) and all(isinstance(v, str) for v in value)
    if not ok:
        problems.append((line, f"'{name}' should be of type {t}, got {type(value).__name__} {value!r}"))
        return None
    if param.choices and value not in param.choices:
        problems.append((line, f"'{name}' must be one of {', '.join(param.choices)}; got {value!r}"))
        return None
    return value


def _read_table(table_name, data, schema, where, problems):
    out = {}
    for key, value in data.items():
        line = where.get((table_name, key))
        if key not in schema:
            problems.append((line, f"unknown key '{key}' in [{table_name}]"))
            continue
        coerced = _coerce(key, schema[key], value, line, problems)
        if coerced is not None:
            out[key] = coerced
    for key, param in schema.items():
        if key in out:
            continue
        if param.required and key not in data:
            problems.append((where.get((table_name, None)), f"missing required key '{key}' in [{table_name}]"))
        elif key not in data:
            out[key] = list(param.default) if isinstance(param.default, list) else param.default
    return out


def parse_config(text: str) -> Scenario:
    """Parse and validate scenario text; raises ConfigError listing every problem."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError([(int(m.group(1)) if m else None, f"syntax error: {exc}")]) from None

    where = _locate(text)
    problems = []
    allowed = set(SECTIONS) | {"parameters"}
    for table, value in data.items():
        if table not in allowed:
            problems.append((where.get((table, None), where.get(("", table))), f"unknown table '{table}'"))
        elif not isinstance(value, dict):
            problems.append((where.get(("", table)), f"'{table}' must be a table"))
    if "scenario" not in data:
        problems.append((None, "missing required table [scenario]"))
        raise ConfigError(problems)

    tables = {}
    for name, schema in SECTIONS.items():
        raw = data.get(name, {})
        tables[name] = _read_table(name, raw if isinstance(raw, dict) else {}, schema, where, problems)

    kind = tables["scenario"].get("kind")
    params = {}
    if kind in KINDS:
        raw = data.get("parameters", {})
        params = _read_table("parameters", raw if isinstance(raw, dict) else {}, KINDS[kind], where, problems)
        _check_parameters(kind, params, where, problems)
    for fmt in tables["output"].get("formats") or []:
        if fmt not in ("csv", "json"):
            problems.append((where.get(("output", "formats")), f"unknown output format {fmt!r}"))
    if problems:
        raise ConfigError(problems)

    scenario = Scenario(
        name=tables["scenario"]["name"],
        kind=kind,
        parameters=params,
        output=tables["output"],
        ring=tables["ring"],
        constants=tables["constants"],
        seed=tables["scenario"]["seed"],
    )
    if kind == "SpectralFlow":
        scenario.flux_program = LinearRamp(
            params["phi_start"], params["phi_start"] + params["delta_phi"], params["duration"]
        )
    return scenario


def _check_parameters(kind, p, where, problems):
    def bad(key, msg):
        problems.append((where.get(("parameters", key)), msg))

    if kind in ("Washboard", "SpectrumSweep"):
        if p.get("points") is not None and p["points"] < 1:
            bad("points", "'points' must be at least 1")
        if p.get("phi_min") is not None and p.get("phi_max") is not None and p["phi_max"] < p["phi_min"]:
            bad("phi_max", "'phi_max' must not be below 'phi_min'")
    if kind == "Washboard" and p.get("u0") is not None and p["u0"] <= 0:
        bad("u0", "'u0' must be positive")
    if kind == "HeatKernel":
        for v in p.get("phis") or []:
            if not 0 < v < 1:
                bad("phis", f"flux ratio {v} outside (0, 1)")
    if kind == "SpectralFlow" and p.get("steps") is not None and p["steps"] < 2:
        bad("steps", "'steps' must be at least 2")
    if kind == "SpectralFlow" and p.get("duration") is not None and p["duration"] <= 0:
        bad("duration", "'duration' must be positive")
    if kind == "Rabi":
        if p.get("duration") is not None and p["duration"] <= 0:
            bad("duration", "'duration' must be positive")
        if p.get("samples") is not None and p["samples"] < 2:
            bad("samples", "'samples' must be at least 2")
    if kind == "Decoherence":
        for key in ("gamma_flip_hz", "gate_frequency_hz"):
            if p.get(key) is not None and p[key] <= 0:
                bad(key, f"'{key}' must be positive")


def load_config(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def bundled_scenarios() -> list:
    """Paths of the example scenario files shipped with the package, sorted by name."""
    root = resources.files("chiral_qubit") / "scenarios"
    return sorted((p for p in root.iterdir() if p.name.endswith(".toml")), key=lambda p: p.name)


def list_scenarios() -> list:
    return list(KINDS)


def _format_param(name, param: Param) -> str:
    if param.required:
        default = "required"
    else:
        default = f"default {param.default!r}"
    extra = f"; one of {', '.join(param.choices)}" if param.choices and name != "kind" else ""
    return f"  {name:<20} {param.type:<7} [{param.unit}] {default}. {param.doc}{extra}"


def describe(kind: str) -> str:
    """Human-readable schema for one scenario kind, including common tables."""
    if kind not in KINDS:
        raise ConfigError([(None, f"unknown scenario kind {kind!r}; choose from {', '.join(KINDS)}")])
    lines = [f"{kind}", "", "[parameters]"]
    lines += [_format_param(n, s) for n, s in KINDS[kind].items()]
    for table, schema in SECTIONS.items():
        lines += ["", f"[{table}]"]
        lines += [_format_param(n, s) for n, s in schema.items()]
    return "\n".join(lines)
