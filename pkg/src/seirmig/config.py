"""Run configuration: INI-style sections, strict keys, environment overrides.

Every key of every section is listed in :data:`SCHEMA`; anything else is an
error. ``[model]`` with all eight rates (``p`` included) is mandatory, the
other sections fall back to defaults.

Environment variables ``SEIRMIG__<SECTION>__<KEY>=value`` override (or add)
single entries before validation, e.g. ``SEIRMIG__MODEL__BETA=0.1``.
"""
from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field

from .errors import ConfigError, DomainError
from .integrator import IntegrationSpec, RK4Fixed, RK45Adaptive
from .model import COMPARTMENTS, PARAMETER_NAMES, IncidenceMode, ModelParameters, StateVector
from .reproduction import DfeWeights

ENV_PREFIX = "SEIRMIG__"

SCHEMA = {
    "model": PARAMETER_NAMES,
    "incidence": ("mode", "n"),
    "integration": ("t0", "t_end", "method", "step", "abs_tol", "rel_tol", "max_step", "record_every"),
    "initial": COMPARTMENTS,
    "output": ("directory",),
    "run": ("seed", "threads"),
    "weights": ("convention", "p1", "p2"),
    "r0": ("efficacies",),
    "sensitivity": ("parameter", "lo", "hi", "step", "values", "peak_threshold", "tail_threshold"),
    "heatmap": ("x", "x_lo", "x_hi", "x_count", "y", "y_lo", "y_hi", "y_count"),
    "effectiveness": ("combos_file", "apply_to_dynamics"),
    "discrepancies": ("points",),
    "selfcheck": ("draws",),
}


@dataclass(frozen=True)
class SensitivityBlock:
    parameter: str = "k"
    lo: float = 0.0
    hi: float = 0.05
    step: float = 0.01
    values: tuple | None = None
    peak_threshold: float = 0.01
    tail_threshold: float = 1e-4


@dataclass(frozen=True)
class HeatmapBlock:
    x: str = "mu_c"
    x_lo: float = 0.1
    x_hi: float = 1.0
    x_count: int = 101
    y: str = "k"
    y_lo: float = 0.0
    y_hi: float = 2.0
    y_count: int = 101


@dataclass(frozen=True)
class EffectivenessBlock:
    combos_file: str | None = None
    apply_to_dynamics: bool = False


@dataclass(frozen=True)
class RunConfig:
    params: ModelParameters
    mode: IncidenceMode = field(default_factory=IncidenceMode.dynamic)
    integration: IntegrationSpec = field(default_factory=IntegrationSpec)
    init: StateVector = field(default_factory=lambda: StateVector(100, 85, 50, 20, 10, 100, 85, 50, 20))
    output_dir: str = "out"
    seed: int = 42
    threads: int | None = None
    #: ``None`` means disease-free fractions
    weights: DfeWeights | None = None
    efficacies: tuple | None = None
    sensitivity: SensitivityBlock = field(default_factory=SensitivityBlock)
    heatmap: HeatmapBlock = field(default_factory=HeatmapBlock)
    effectiveness: EffectivenessBlock = field(default_factory=EffectivenessBlock)
    discrepancy_points: int = 11
    selfcheck_draws: int = 50


def _float(section, key, raw) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: not a number: {raw!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"[{section}] {key}: must be finite, got {raw!r}")
    return v


def _int(section, key, raw) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: not an integer: {raw!r}") from None


def _bool(section, key, raw) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: not a boolean: {raw!r}")


def _float_list(section, key, raw) -> tuple:
    return tuple(_float(section, key, x) for x in raw.split(",") if x.strip())


def _read(text: str, env=None) -> dict:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case-sensitive (mu_c vs. S_u)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    data = {s: dict(parser.items(s)) for s in parser.sections()}
    for name, value in sorted((env or {}).items()):
        if not name.startswith(ENV_PREFIX):
            continue
        parts = name[len(ENV_PREFIX):].split("__")
        if len(parts) != 2:
            raise ConfigError(f"environment override {name} must look like {ENV_PREFIX}SECTION__KEY")
        section, key = parts[0].lower(), parts[1].lower()
        data.setdefault(section, {})[key] = value
    for section, entries in data.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in entries:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    return data


def _parse_params(data) -> ModelParameters:
    model = data.get("model")
    if model is None:
        raise ConfigError("missing [model] section")
    missing = [k for k in PARAMETER_NAMES if k not in model]
    if missing:
        raise ConfigError(f"[model] is missing {', '.join(missing)}")
    values = {k: _float("model", k, model[k]) for k in PARAMETER_NAMES}
    try:
        return ModelParameters(**values)
    except DomainError as exc:
        raise ConfigError(f"[model] {exc}") from None


def _parse_mode(data) -> IncidenceMode:
    sec = data.get("incidence", {})
    kind = sec.get("mode", "dynamic_n").strip()
    if kind == "dynamic_n":
        if "n" in sec:
            raise ConfigError("[incidence] n is only valid with mode = fixed_n")
        return IncidenceMode.dynamic()
    if kind == "fixed_n":
        if "n" not in sec:
            raise ConfigError("[incidence] fixed_n requires n")
        try:
            return IncidenceMode.fixed(_float("incidence", "n", sec["n"]))
        except DomainError as exc:
            raise ConfigError(f"[incidence] {exc}") from None
    raise ConfigError(f"[incidence] unknown mode {kind!r}")


def _parse_integration(data) -> IntegrationSpec:
    sec = data.get("integration", {})
    get = lambda key, default: _float("integration", key, sec[key]) if key in sec else default
    method_name = sec.get("method", "rk45").strip()
    try:
        if method_name == "rk45":
            if "step" in sec:
                raise ConfigError("[integration] step is only valid with method = rk4")
            method = RK45Adaptive(get("abs_tol", 1e-9), get("rel_tol", 1e-9), get("max_step", 1.0))
        elif method_name == "rk4":
            extra = [k for k in ("abs_tol", "rel_tol", "max_step") if k in sec]
            if extra:
                raise ConfigError(f"[integration] {', '.join(extra)} only valid with method = rk45")
            if "step" not in sec:
                raise ConfigError("[integration] rk4 requires step")
            method = RK4Fixed(get("step", None))
        else:
            raise ConfigError(f"[integration] unknown method {method_name!r}")
        return IntegrationSpec(get("t0", 0.0), get("t_end", 500.0), method, get("record_every", 1.0))
    except DomainError as exc:
        raise ConfigError(f"[integration] {exc}") from None


def _parse_init(data) -> StateVector:
    sec = data.get("initial")
    if sec is None:
        return RunConfig.__dataclass_fields__["init"].default_factory()
    missing = [k for k in COMPARTMENTS if k not in sec]
    if missing:
        raise ConfigError(f"[initial] is missing {', '.join(missing)}")
    values = [_float("initial", k, sec[k]) for k in COMPARTMENTS]
    if min(values) < 0:
        raise ConfigError("[initial] compartments must be non-negative")
    return StateVector(*values)


def _parse_weights(data):
    sec = data.get("weights", {})
    convention = sec.get("convention", "dfe").strip()
    if convention == "dfe":
        if "p1" in sec or "p2" in sec:
            raise ConfigError("[weights] p1/p2 are only valid with convention = explicit")
        return None
    if convention == "explicit":
        if "p1" not in sec or "p2" not in sec:
            raise ConfigError("[weights] explicit convention needs p1 and p2")
        try:
            return DfeWeights(_float("weights", "p1", sec["p1"]), _float("weights", "p2", sec["p2"]))
        except DomainError as exc:
            raise ConfigError(f"[weights] {exc}") from None
    raise ConfigError(f"[weights] unknown convention {convention!r}")


def _parse_efficacies(data):
    sec = data.get("r0", {})
    if "efficacies" not in sec or not sec["efficacies"].strip():
        return None
    values = _float_list("r0", "efficacies", sec["efficacies"])
    if len(values) != 6:
        raise ConfigError("[r0] efficacies needs six comma-separated values")
    if not all(0 <= v < 1 for v in values):
        raise ConfigError("[r0] efficacies must lie in [0, 1)")
    return values


def _parse_sensitivity(data) -> SensitivityBlock:
    sec = data.get("sensitivity", {})
    d = SensitivityBlock()
    f = lambda key, default: _float("sensitivity", key, sec[key]) if key in sec else default
    parameter = sec.get("parameter", d.parameter).strip()
    if parameter not in PARAMETER_NAMES:
        raise ConfigError(f"[sensitivity] unknown parameter {parameter!r}")
    values = None
    if "values" in sec and sec["values"].strip():
        values = _float_list("sensitivity", "values", sec["values"])
        if len(values) < 2:
            raise ConfigError("[sensitivity] values needs at least 2 entries")
    block = SensitivityBlock(
        parameter, f("lo", d.lo), f("hi", d.hi), f("step", d.step), values,
        f("peak_threshold", d.peak_threshold), f("tail_threshold", d.tail_threshold),
    )
    if values is None and not (block.lo < block.hi and block.step > 0):
        raise ConfigError("[sensitivity] needs lo < hi and step > 0")
    if block.peak_threshold < 0 or block.tail_threshold < 0:
        raise ConfigError("[sensitivity] thresholds must be non-negative")
    return block


def _parse_heatmap(data) -> HeatmapBlock:
    sec = data.get("heatmap", {})
    d = HeatmapBlock()
    f = lambda key, default: _float("heatmap", key, sec[key]) if key in sec else default
    i = lambda key, default: _int("heatmap", key, sec[key]) if key in sec else default
    block = HeatmapBlock(
        sec.get("x", d.x).strip(), f("x_lo", d.x_lo), f("x_hi", d.x_hi), i("x_count", d.x_count),
        sec.get("y", d.y).strip(), f("y_lo", d.y_lo), f("y_hi", d.y_hi), i("y_count", d.y_count),
    )
    for axis in ("x", "y"):
        name = getattr(block, axis)
        if name not in PARAMETER_NAMES:
            raise ConfigError(f"[heatmap] unknown parameter {name!r}")
        if not getattr(block, f"{axis}_lo") < getattr(block, f"{axis}_hi"):
            raise ConfigError(f"[heatmap] {axis}_lo must be below {axis}_hi")
        if getattr(block, f"{axis}_count") < 2:
            raise ConfigError(f"[heatmap] {axis}_count must be at least 2")
    if block.x == block.y:
        raise ConfigError("[heatmap] x and y must differ")
    return block


def _parse_effectiveness(data) -> EffectivenessBlock:
    sec = data.get("effectiveness", {})
    path = sec.get("combos_file", "").strip() or None
    apply = _bool("effectiveness", "apply_to_dynamics", sec["apply_to_dynamics"]) if "apply_to_dynamics" in sec else False
    return EffectivenessBlock(path, apply)


def parse_config(text: str, env=None) -> RunConfig:
    """Parse and validate configuration text; ``env`` supplies overrides."""
    data = _read(text, env)
    run = data.get("run", {})
    seed = _int("run", "seed", run["seed"]) if "seed" in run else 42
    threads = _int("run", "threads", run["threads"]) if "threads" in run else None
    if threads is not None and threads < 1:
        raise ConfigError("[run] threads must be >= 1")
    points = _int("discrepancies", "points", data["discrepancies"]["points"]) if "points" in data.get("discrepancies", {}) else 11
    if points < 2:
        raise ConfigError("[discrepancies] points must be >= 2")
    draws = _int("selfcheck", "draws", data["selfcheck"]["draws"]) if "draws" in data.get("selfcheck", {}) else 50
    if draws < 1:
        raise ConfigError("[selfcheck] draws must be >= 1")
    return RunConfig(
        params=_parse_params(data),
        mode=_parse_mode(data),
        integration=_parse_integration(data),
        init=_parse_init(data),
        output_dir=data.get("output", {}).get("directory", "out").strip(),
        seed=seed,
        threads=threads,
        weights=_parse_weights(data),
        efficacies=_parse_efficacies(data),
        sensitivity=_parse_sensitivity(data),
        heatmap=_parse_heatmap(data),
        effectiveness=_parse_effectiveness(data),
        discrepancy_points=points,
        selfcheck_draws=draws,
    )


def load_config(path: str, env=None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, os.environ if env is None else env)


def serialize_config(cfg: RunConfig) -> str:
    """Render ``cfg`` so that :func:`parse_config` gives it back unchanged."""
    r = repr
    out = ["[model]"]
    out += [f"{k} = {r(v)}" for k, v in cfg.params.as_dict().items()]
    out += ["", "[incidence]", f"mode = {cfg.mode.kind}"]
    if cfg.mode.is_fixed:
        out.append(f"n = {r(cfg.mode.value)}")
    spec = cfg.integration
    out += ["", "[integration]", f"t0 = {r(spec.t0)}", f"t_end = {r(spec.t_end)}"]
    if isinstance(spec.method, RK4Fixed):
        out += ["method = rk4", f"step = {r(spec.method.step)}"]
    else:
        m = spec.method
        out += ["method = rk45", f"abs_tol = {r(m.abs_tol)}", f"rel_tol = {r(m.rel_tol)}", f"max_step = {r(m.max_step)}"]
    out.append(f"record_every = {r(spec.record_every)}")
    out += ["", "[initial]"] + [f"{k} = {r(v)}" for k, v in zip(COMPARTMENTS, cfg.init)]
    out += ["", "[output]", f"directory = {cfg.output_dir}"]
    out += ["", "[run]", f"seed = {cfg.seed}"]
    if cfg.threads is not None:
        out.append(f"threads = {cfg.threads}")
    out += ["", "[weights]"]
    if cfg.weights is None:
        out.append("convention = dfe")
    else:
        out += ["convention = explicit", f"p1 = {r(cfg.weights.p1)}", f"p2 = {r(cfg.weights.p2)}"]
    out += ["", "[r0]"]
    if cfg.efficacies is not None:
        out.append("efficacies = " + ", ".join(r(v) for v in cfg.efficacies))
    s = cfg.sensitivity
    out += ["", "[sensitivity]", f"parameter = {s.parameter}", f"lo = {r(s.lo)}", f"hi = {r(s.hi)}", f"step = {r(s.step)}"]
    if s.values is not None:
        out.append("values = " + ", ".join(r(v) for v in s.values))
    out += [f"peak_threshold = {r(s.peak_threshold)}", f"tail_threshold = {r(s.tail_threshold)}"]
    h = cfg.heatmap
    out += ["", "[heatmap]"]
    out += [f"{k} = {r(getattr(h, k)) if not isinstance(getattr(h, k), str) else getattr(h, k)}"
            for k in SCHEMA["heatmap"]]
    e = cfg.effectiveness
    out += ["", "[effectiveness]"]
    if e.combos_file is not None:
        out.append(f"combos_file = {e.combos_file}")
    out.append(f"apply_to_dynamics = {'true' if e.apply_to_dynamics else 'false'}")
    out += ["", "[discrepancies]", f"points = {cfg.discrepancy_points}"]
    out += ["", "[selfcheck]", f"draws = {cfg.selfcheck_draws}"]
    return "\n".join(out) + "\n"
