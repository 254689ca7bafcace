"""Validated run configuration read from a YAML document."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import ConfigurationError

__all__ = [
    "ALPHA_CRITICAL",
    "RegimeWarning",
    "NucleusConfig",
    "InitialStateConfig",
    "IntegratorConfig",
    "OutputConfig",
    "ConstantsConfig",
    "SimConfig",
    "parse_config",
    "load_config",
]

ALPHA_CRITICAL = 4.0 / math.pi


class RegimeWarning(UserWarning):
    """Coupling outside the range where global existence is known."""


@dataclass(frozen=True)
class NucleusConfig:
    z: float
    m: float
    sigma: float
    x0: tuple[float, float, float]
    v0: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class InitialStateConfig:
    kind: str = "vacuum"
    q: int = 0
    epsilon: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class IntegratorConfig:
    retraction: bool = False
    retraction_period: int = 10
    divergence_bound: float = 1e3


@dataclass(frozen=True)
class OutputConfig:
    path: str = "."
    sample_every: int = 10


@dataclass(frozen=True)
class ConstantsConfig:
    c_e: float = 2.0
    samples: int = 8
    seed: int = 0


@dataclass(frozen=True)
class SimConfig:
    alpha: float
    lambda_cutoff: float
    n_per_axis: int
    dt: float
    t_final: float
    nuclei: tuple[NucleusConfig, ...] = ()
    initial_state: InitialStateConfig = InitialStateConfig()
    integrator: IntegratorConfig = IntegratorConfig()
    output: OutputConfig = OutputConfig()
    constants: ConstantsConfig = ConstantsConfig()
    warnings: tuple[str, ...] = field(default=(), compare=False)


def _fail(path: str, msg: str):
    raise ConfigurationError(f"{path}: {msg}")


def _real(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        _fail(path, "must be finite")
    return float(value)


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {type(value).__name__}")
    return int(value)


def _bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        _fail(path, f"expected true or false, got {type(value).__name__}")
    return value


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        _fail(path, f"expected a string, got {type(value).__name__}")
    return value


def _vec3(value: Any, path: str) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        _fail(path, "expected a list of three numbers")
    return tuple(_real(v, f"{path}[{i}]") for i, v in enumerate(value))


def _mapping(value: Any, path: str, allowed: set[str]) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        _fail(path, f"expected a mapping, got {type(value).__name__}")
    for key in value:
        if key not in allowed:
            where = f"{path}.{key}" if path else str(key)
            _fail(where, "unknown key")
    return value


def _required(doc: dict, key: str, path: str):
    if key not in doc:
        _fail(f"{path}.{key}" if path else key, "missing required key")
    return doc[key]


def _positive(x, path):
    if not x > 0:
        _fail(path, f"must be positive, got {x}")
    return x


_TOP = {
    "alpha",
    "lambda_cutoff",
    "n_per_axis",
    "dt",
    "t_final",
    "nuclei",
    "initial_state",
    "integrator",
    "output",
    "constants",
}


def _nucleus(doc, path) -> NucleusConfig:
    doc = _mapping(doc, path, {"z", "m", "sigma", "x0", "v0"})
    return NucleusConfig(
        z=_positive(_real(_required(doc, "z", path), f"{path}.z"), f"{path}.z"),
        m=_positive(_real(_required(doc, "m", path), f"{path}.m"), f"{path}.m"),
        sigma=_positive(_real(_required(doc, "sigma", path), f"{path}.sigma"), f"{path}.sigma"),
        x0=_vec3(_required(doc, "x0", path), f"{path}.x0"),
        v0=_vec3(doc.get("v0", [0.0, 0.0, 0.0]), f"{path}.v0"),
    )


def _initial(doc) -> InitialStateConfig:
    p = "initial_state"
    doc = _mapping(doc, p, {"kind", "q", "epsilon", "seed"})
    kind = _str(doc.get("kind", "vacuum"), f"{p}.kind")
    if kind not in ("vacuum", "charged", "perturbed"):
        _fail(f"{p}.kind", f"must be vacuum, charged or perturbed, got {kind!r}")
    q = _int(doc.get("q", 0), f"{p}.q")
    if q < 0:
        _fail(f"{p}.q", "must be nonnegative")
    if kind == "charged" and "q" not in doc:
        _fail(f"{p}.q", "missing required key for kind 'charged'")
    eps = _real(doc.get("epsilon", 0.0), f"{p}.epsilon")
    if eps < 0:
        _fail(f"{p}.epsilon", "must be nonnegative")
    if kind == "perturbed" and "epsilon" not in doc:
        _fail(f"{p}.epsilon", "missing required key for kind 'perturbed'")
    return InitialStateConfig(kind=kind, q=q, epsilon=eps, seed=_int(doc.get("seed", 0), f"{p}.seed"))


def _integrator(doc) -> IntegratorConfig:
    p = "integrator"
    doc = _mapping(doc, p, {"retraction", "retraction_period", "divergence_bound"})
    period = _int(doc.get("retraction_period", 10), f"{p}.retraction_period")
    if period < 1:
        _fail(f"{p}.retraction_period", "must be at least 1")
    bound = _positive(_real(doc.get("divergence_bound", 1e3), f"{p}.divergence_bound"), f"{p}.divergence_bound")
    return IntegratorConfig(_bool(doc.get("retraction", False), f"{p}.retraction"), period, bound)


def _output(doc) -> OutputConfig:
    p = "output"
    doc = _mapping(doc, p, {"path", "sample_every"})
    every = _int(doc.get("sample_every", 10), f"{p}.sample_every")
    if every < 1:
        _fail(f"{p}.sample_every", "must be at least 1")
    return OutputConfig(_str(doc.get("path", "."), f"{p}.path"), every)


def _constants(doc) -> ConstantsConfig:
    p = "constants"
    doc = _mapping(doc, p, {"c_e", "samples", "seed"})
    c_e = _real(doc.get("c_e", 2.0), f"{p}.c_e")
    if not c_e > 1:
        _fail(f"{p}.c_e", f"must be greater than 1, got {c_e}")
    samples = _int(doc.get("samples", 8), f"{p}.samples")
    if samples < 1:
        _fail(f"{p}.samples", "must be at least 1")
    return ConstantsConfig(c_e, samples, _int(doc.get("seed", 0), f"{p}.seed"))


def parse_config(text: str) -> SimConfig:
    """Parse and validate a YAML configuration document.

    Emits a :class:`RegimeWarning` (and records it in ``SimConfig.warnings``)
    when ``alpha >= 4/pi``; such runs are allowed.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"invalid YAML: {exc}") from exc
    if doc is None:
        doc = {}
    doc = _mapping(doc, "", _TOP)

    alpha = _real(_required(doc, "alpha", ""), "alpha")
    if alpha < 0:
        _fail("alpha", f"must be nonnegative, got {alpha}")
    cutoff = _positive(_real(_required(doc, "lambda_cutoff", ""), "lambda_cutoff"), "lambda_cutoff")
    n = _int(_required(doc, "n_per_axis", ""), "n_per_axis")
    if n < 2:
        _fail("n_per_axis", f"must be at least 2, got {n}")
    dt = _positive(_real(_required(doc, "dt", ""), "dt"), "dt")
    t_final = _positive(_real(_required(doc, "t_final", ""), "t_final"), "t_final")

    raw_nuclei = doc.get("nuclei", []) or []
    if not isinstance(raw_nuclei, list):
        _fail("nuclei", "expected a list")
    nuclei = tuple(_nucleus(d, f"nuclei[{i}]") for i, d in enumerate(raw_nuclei))

    notes = []
    if alpha >= ALPHA_CRITICAL:
        msg = f"alpha = {alpha} >= 4/pi: outside proven global-existence regime"
        notes.append(msg)
        warnings.warn(msg, RegimeWarning, stacklevel=2)

    return SimConfig(
        alpha=alpha,
        lambda_cutoff=cutoff,
        n_per_axis=n,
        dt=dt,
        t_final=t_final,
        nuclei=nuclei,
        initial_state=_initial(doc.get("initial_state")),
        integrator=_integrator(doc.get("integrator")),
        output=_output(doc.get("output")),
        constants=_constants(doc.get("constants")),
        warnings=tuple(notes),
    )


def load_config(path) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
