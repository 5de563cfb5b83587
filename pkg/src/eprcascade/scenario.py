"""Scenario files: parsing, validation, and parameter-object construction.

A scenario is a YAML mapping with named blocks mirroring the domain types
(rates / effective / physical parameter blocks, a uniform time grid, output
options, optional per-curve variants and an optional sweep block).  Parsing
normalises every field (defaults filled in, schedules in explicit form), so
``Scenario.to_dict`` round-trips: parsing the serialised form yields an
identical structure.

Validation errors name the offending field with a dotted path.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ConfigurationError
from .params import (
    Constant,
    EffectiveParams,
    PhysicalParams,
    ReducedRates,
    SineRamp,
    SubsystemParams,
    Tabulated,
)

__all__ = ["Scenario", "SweepSpec", "load", "parse", "from_dict"]

ENGINES = ("analytic", "adiabatic", "full", "fock")
SWEEP_PARAMETERS = ("lambda", "epsilon", "omega", "tau")
REDUCTIONS = ("min_variance", "t_min", "n1_at_threshold")

_SUBSYSTEM_FIELDS = (
    "lamb_dicke",
    "atom_cavity_coupling",
    "laser_amplitude",
    "atom_laser_detuning",
    "trap_frequency",
    "atomic_linewidth",
    "cavity_decay",
)


def _fail(path, message):
    raise ConfigurationError(f"scenario field '{path}': {message}")


def _as_mapping(value, path):
    if value is None:
        return {}
    if not isinstance(value, dict):
        _fail(path, "expected a mapping")
    return value

def _num(mapping, key, path, *, default=None, required=False, positive=False,
         nonnegative=False):
    if key not in mapping or mapping[key] is None:
        if required:
            _fail(f"{path}.{key}", "required")
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{path}.{key}", f"expected a number, got {value!r}")
    value = float(value)
    if positive and value <= 0:
        _fail(f"{path}.{key}", "must be positive")
    if nonnegative and value < 0:
        _fail(f"{path}.{key}", "must be >= 0")
    return value


def _check_keys(mapping, allowed, path):
    extra = sorted(set(mapping) - set(allowed))
    if extra:
        _fail(path, f"unknown keys {extra}")


def _normalise_schedule(value, path):
    if isinstance(value, bool):
        _fail(path, "expected a number or schedule mapping")
    if isinstance(value, (int, float)):
        return {"type": "constant", "omega": float(value)}
    if not isinstance(value, dict):
        _fail(path, "expected a number or schedule mapping")
    kind = value.get("type")
    if kind == "constant":
        _check_keys(value, ("type", "omega"), path)
        return {"type": "constant",
                "omega": _num(value, "omega", path, required=True)}
    if kind == "sine_ramp":
        _check_keys(value, ("type", "omega_max", "tau"), path)
        return {
            "type": "sine_ramp",
            "omega_max": _num(value, "omega_max", path, required=True),
            "tau": _num(value, "tau", path, required=True, positive=True),
        }
    if kind == "tabulated":
        _check_keys(value, ("type", "times", "values"), path)
        times = value.get("times")
        values = value.get("values")
        if not isinstance(times, (list, tuple)) or not isinstance(values, (list, tuple)):
            _fail(path, "tabulated schedule needs 'times' and 'values' lists")
        return {
            "type": "tabulated",
            "times": [float(t) for t in times],
            "values": [float(v) for v in values],
        }
    _fail(path, f"unknown schedule type {kind!r}")


def build_schedule(spec):
    """Schedule object from its normalised dict form."""
    kind = spec["type"]
    if kind == "constant":
        return Constant(spec["omega"])
    if kind == "sine_ramp":
        return SineRamp(spec["omega_max"], spec["tau"])
    return Tabulated(tuple(spec["times"]), tuple(spec["values"]))


def _normalise_rates(block, path):
    block = _as_mapping(block, path)
    _check_keys(block, ("gamma1", "gamma2", "epsilon", "delta_phi"), path)
    return {
        "gamma1": _num(block, "gamma1", path, required=True, nonnegative=True),
        "gamma2": _num(block, "gamma2", path, required=True, nonnegative=True),
        "epsilon": _num(block, "epsilon", path, default=1.0),
        "delta_phi": _num(block, "delta_phi", path, default=0.0),
    }


def _normalise_effective(block, path):
    block = _as_mapping(block, path)
    _check_keys(
        block,
        ("kappa1", "kappa2", "epsilon", "phi1", "phi2", "omega1", "omega2"),
        path,
    )
    out = {
        "kappa1": _num(block, "kappa1", path, required=True, positive=True),
        "kappa2": _num(block, "kappa2", path, required=True, positive=True),
        "epsilon": _num(block, "epsilon", path, default=1.0),
        "phi1": _num(block, "phi1", path, default=0.0),
        "phi2": _num(block, "phi2", path, default=0.0),
    }
    for key in ("omega1", "omega2"):
        if key not in block:
            _fail(f"{path}.{key}", "required")
        out[key] = _normalise_schedule(block[key], f"{path}.{key}")
    return out


def _normalise_subsystem(block, path):
    block = _as_mapping(block, path)
    _check_keys(block, _SUBSYSTEM_FIELDS, path)
    return {
        key: _num(block, key, path, required=True) for key in _SUBSYSTEM_FIELDS
    }


def _normalise_physical(block, path):
    block = _as_mapping(block, path)
    _check_keys(block, ("epsilon", "nbar_max", "subsystem1", "subsystem2"), path)
    return {
        "epsilon": _num(block, "epsilon", path, default=1.0),
        "nbar_max": _num(block, "nbar_max", path, default=0.0, nonnegative=True),
        "subsystem1": _normalise_subsystem(
            block.get("subsystem1"), f"{path}.subsystem1"),
        "subsystem2": _normalise_subsystem(
            block.get("subsystem2"), f"{path}.subsystem2"),
    }


def _normalise_grid(block, path):
    block = _as_mapping(block, path)
    _check_keys(block, ("t_start", "t_end", "step"), path)
    start = _num(block, "t_start", path, default=0.0)
    end = _num(block, "t_end", path, required=True)
    step = _num(block, "step", path, required=True, positive=True)
    if end <= start:
        _fail(f"{path}.t_end", "must exceed t_start")
    count = (end - start) / step
    if abs(count - round(count)) > 1e-9 * max(1.0, count):
        _fail(f"{path}.step", "must divide t_end - t_start evenly")
    return {"t_start": start, "t_end": end, "step": step}


def _normalise_sweep(block, path):
    block = _as_mapping(block, path)
    _check_keys(block, ("parameter", "values", "start", "stop", "step",
                        "reductions", "threshold"), path)
    parameter = block.get("parameter")
    if parameter not in SWEEP_PARAMETERS:
        _fail(f"{path}.parameter", f"must be one of {SWEEP_PARAMETERS}")
    if "values" in block:
        raw = block["values"]
        if not isinstance(raw, (list, tuple)) or not raw:
            _fail(f"{path}.values", "must be a non-empty list")
        values = [float(v) for v in raw]
    else:
        start = _num(block, "start", path, required=True)
        stop = _num(block, "stop", path, required=True)
        step = _num(block, "step", path, required=True, positive=True)
        if stop < start:
            _fail(f"{path}.stop", "must be >= start")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        values = [start + i * step for i in range(n)]
    values = sorted(values)
    reductions = block.get("reductions")
    if not isinstance(reductions, (list, tuple)) or not reductions:
        _fail(f"{path}.reductions", "must be a non-empty list")
    for red in reductions:
        if red not in REDUCTIONS:
            _fail(f"{path}.reductions", f"{red!r} not one of {REDUCTIONS}")
    threshold = _num(block, "threshold", path, default=None)
    if "n1_at_threshold" in reductions and threshold is None:
        _fail(f"{path}.threshold", "required for the n1_at_threshold reduction")
    return {
        "parameter": parameter,
        "values": values,
        "reductions": list(reductions),
        "threshold": threshold,
    }


def _normalise_output(block, path):
    block = _as_mapping(block, path)
    _check_keys(block, ("columns", "downsample"), path)
    columns = block.get("columns")
    if columns is not None:
        if not isinstance(columns, (list, tuple)) or not columns:
            _fail(f"{path}.columns", "must be a non-empty list")
        columns = [str(c) for c in columns]
    down = block.get("downsample", 1)
    if isinstance(down, bool) or not isinstance(down, int) or down < 1:
        _fail(f"{path}.downsample", "must be an integer >= 1")
    return {"columns": columns, "downsample": down}


def _normalise_fock(block, path):
    block = _as_mapping(block, path)
    _check_keys(block, ("cutoffs",), path)
    cutoffs = block.get("cutoffs", [5, 5, 7, 7])
    if not isinstance(cutoffs, (list, tuple)) or len(cutoffs) != 4:
        _fail(f"{path}.cutoffs", "must be a list of four integers")
    out = []
    for c in cutoffs:
        if isinstance(c, bool) or not isinstance(c, int) or c < 2:
            _fail(f"{path}.cutoffs", "entries must be integers >= 2")
        out.append(c)
    return {"cutoffs": out}


def _normalise_initial(block, path):
    block = _as_mapping(block, path)
    _check_keys(block, ("nbar1", "nbar2"), path)
    return {
        "nbar1": _num(block, "nbar1", path, default=0.0, nonnegative=True),
        "nbar2": _num(block, "nbar2", path, default=0.0, nonnegative=True),
    }


def _deep_merge(base, overrides, path):
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value, f"{path}.{key}")
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _normalise(raw):
    raw = _as_mapping(raw, "scenario")
    _check_keys(
        raw,
        ("name", "engine", "rates", "effective", "physical", "initial",
         "grid", "fock", "output", "variants", "sweep"),
        "scenario",
    )
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        _fail("name", "required non-empty string")
    engine = raw.get("engine")
    if engine not in ENGINES:
        _fail("engine", f"must be one of {ENGINES}")

    data = {"name": name, "engine": engine}
    data["rates"] = (
        _normalise_rates(raw["rates"], "rates") if raw.get("rates") else None
    )
    data["effective"] = (
        _normalise_effective(raw["effective"], "effective")
        if raw.get("effective")
        else None
    )
    data["physical"] = (
        _normalise_physical(raw["physical"], "physical")
        if raw.get("physical")
        else None
    )
    data["initial"] = _normalise_initial(raw.get("initial"), "initial")
    data["grid"] = _normalise_grid(raw.get("grid"), "grid")
    data["fock"] = _normalise_fock(raw.get("fock"), "fock") if engine == "fock" \
        or raw.get("fock") else None
    data["output"] = _normalise_output(raw.get("output"), "output")
    data["sweep"] = (
        _normalise_sweep(raw["sweep"], "sweep") if raw.get("sweep") else None
    )

    variants = raw.get("variants")
    if variants is not None:
        if not isinstance(variants, (list, tuple)) or not variants:
            _fail("variants", "must be a non-empty list")
        seen = set()
        norm_variants = []
        for i, entry in enumerate(variants):
            entry = _as_mapping(entry, f"variants[{i}]")
            _check_keys(entry, ("label", "overrides"), f"variants[{i}]")
            label = entry.get("label")
            if not isinstance(label, str) or not label:
                _fail(f"variants[{i}].label", "required non-empty string")
            if label in seen:
                _fail(f"variants[{i}].label", f"duplicate label {label!r}")
            seen.add(label)
            overrides = _as_mapping(entry.get("overrides"), f"variants[{i}].overrides")
            norm_variants.append({"label": label,
                                  "overrides": copy.deepcopy(overrides)})
        data["variants"] = norm_variants
    else:
        data["variants"] = None

    # engine/block consistency
    if engine in ("analytic", "adiabatic"):
        if data["rates"] is None and data["effective"] is None:
            _fail("rates", f"engine {engine!r} needs a rates or effective block")
    if engine in ("full", "fock") and data["effective"] is None:
        _fail("effective", f"engine {engine!r} needs an effective block")
    return data


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    reductions: tuple
    threshold: float | None

    def __post_init__(self):
        if not self.values:
            raise ConfigurationError("sweep needs at least one value")


@dataclass(frozen=True)
class Scenario:
    """A validated scenario; ``data`` is the normalised mapping."""

    data: dict

    @property
    def name(self):
        return self.data["name"]

    @property
    def engine(self):
        return self.data["engine"]

    def to_dict(self):
        return copy.deepcopy(self.data)

    # ------------------------------------------------------------------
    # parameter-object construction

    def grid_array(self):
        g = self.data["grid"]
        n = int(round((g["t_end"] - g["t_start"]) / g["step"]))
        return g["t_start"] + g["step"] * np.arange(n + 1)

    def reduced(self):
        """(ReducedRates, epsilon, delta_phi) from the rates block.

        Falls back to constant effective parameters when no rates block is
        present.
        """
        block = self.data["rates"]
        if block is not None:
            rates = ReducedRates(block["gamma1"], block["gamma2"])
            return rates, block["epsilon"], block["delta_phi"]
        eff = self.data["effective"]
        if eff is None:
            raise ConfigurationError(
                "scenario has neither a rates nor an effective block")
        p = self.effective()
        if not (p.schedule1.is_constant() and p.schedule2.is_constant()):
            raise ConfigurationError(
                "reduced rates from an effective block need constant schedules")
        rates = ReducedRates(
            float(p.schedule1(0.0)) ** 2 / p.kappa1,
            float(p.schedule2(0.0)) ** 2 / p.kappa2,
        )
        return rates, p.epsilon, p.phi1 - p.phi2

    def effective(self):
        block = self.data["effective"]
        if block is None:
            raise ConfigurationError("scenario has no effective block")
        return EffectiveParams(
            kappa1=block["kappa1"],
            kappa2=block["kappa2"],
            schedule1=build_schedule(block["omega1"]),
            schedule2=build_schedule(block["omega2"]),
            epsilon=block["epsilon"],
            phi1=block["phi1"],
            phi2=block["phi2"],
        )

    def physical(self):
        block = self.data["physical"]
        if block is None:
            raise ConfigurationError("scenario has no physical block")

        def sub(b):
            return SubsystemParams(**b)

        params = PhysicalParams(
            subsystem1=sub(block["subsystem1"]),
            subsystem2=sub(block["subsystem2"]),
            epsilon=block["epsilon"],
        )
        return params, block["nbar_max"]

    def fock_cutoffs(self):
        block = self.data["fock"]
        if block is None:
            return (5, 5, 7, 7)
        return tuple(block["cutoffs"])

    def initial_nbars(self):
        block = self.data["initial"]
        return block["nbar1"], block["nbar2"]

    def columns(self):
        return self.data["output"]["columns"]

    def downsample(self):
        return self.data["output"]["downsample"]

    @property
    def sweep(self):
        block = self.data["sweep"]
        if block is None:
            return None
        return SweepSpec(
            parameter=block["parameter"],
            values=tuple(block["values"]),
            reductions=tuple(block["reductions"]),
            threshold=block["threshold"],
        )

    def variant_scenarios(self):
        """[(label, Scenario)] after applying variant overrides; label None
        for a scenario without variants."""
        variants = self.data["variants"]
        if not variants:
            return [(None, self)]
        out = []
        base = {k: v for k, v in self.data.items() if k != "variants"}
        for entry in variants:
            merged = _deep_merge(base, entry["overrides"], "variants")
            merged["variants"] = None
            out.append((entry["label"], from_dict(merged)))
        return out


def from_dict(mapping):
    return Scenario(data=_normalise(mapping))


def parse(text):
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigurationError(f"scenario parse error{where}: {exc}") from exc
    return from_dict(raw)


def load(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario file {path}: {exc}") from exc
    return parse(text)
