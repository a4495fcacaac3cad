"""Run configuration: a sectioned ``key = value`` text format.

Grammar (``#`` or ``;`` start comments, keys are case-insensitive)::

    [domain]      n, length
    [physics]     beta, s, alpha
    [solver]      cfl, T, outputs (comma list), formulation (transport | velocity)
    [experiment]  kind (simulate | nonuniform | holder | dichotomy | inequalities)
                  plus options of that experiment; for simulate:
                  initial (taylor_green | random | bump), amplitude, kmax
    [output]      directory, seed

Every section is optional; missing keys take the defaults below.  Lists are
comma separated.  Parsing problems raise :class:`ParseError` with the line
number; out-of-range values raise :class:`ValidationError` naming the key.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field

from .errors import ParseError, ValidationError
from .experiments import (DichotomyConfig, HolderConfig, InequalityConfig, NonuniformConfig)

KINDS = ("simulate", "nonuniform", "holder", "dichotomy", "inequalities")
FORMULATIONS = ("transport", "velocity")
INITIALS = ("taylor_green", "random", "bump")


@dataclass
class DomainConfig:
    n: int = 128
    length: float = 2 * math.pi


@dataclass
class PhysicsConfig:
    beta: float = 0.0
    s: float = 2.5
    alpha: float = 0.5


@dataclass
class SolverConfig:
    cfl: float = 0.5
    T: float = 1.0
    outputs: tuple = ()
    formulation: str = "transport"


@dataclass
class SimulateOptions:
    initial: str = "taylor_green"
    amplitude: float = 1.0
    kmax: int = 4


@dataclass
class OutputConfig:
    directory: str = "gsqg_out"
    seed: int = 0


@dataclass
class RunConfig:
    domain: DomainConfig = field(default_factory=DomainConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    kind: str = "simulate"
    options: dict = field(default_factory=dict)
    output: OutputConfig = field(default_factory=OutputConfig)


_SECTIONS = {"domain": DomainConfig, "physics": PhysicsConfig, "solver": SolverConfig,
             "output": OutputConfig}
_EXPERIMENT_TYPES = {"simulate": SimulateOptions, "nonuniform": NonuniformConfig,
                     "holder": HolderConfig, "dichotomy": DichotomyConfig,
                     "inequalities": InequalityConfig}
# experiment fields filled from the shared sections rather than [experiment]
_SHARED = {"s", "beta", "alpha", "T", "length"}


def _option_fields(kind: str) -> dict:
    """Scalar/list fields of an experiment config that may be set in the file."""
    out = {}
    for f in dataclasses.fields(_EXPERIMENT_TYPES[kind]()):
        default = getattr(_EXPERIMENT_TYPES[kind](), f.name)
        if f.name in _SHARED or isinstance(default, dict) or dataclasses.is_dataclass(default):
            continue
        if f.name in ("kappa_star", "L_lip", "star_amplitude", "w_norm", "horizon", "calibration"):
            continue
        out[f.name] = default
    return out


def _convert(key: str, text: str, default):
    try:
        if isinstance(default, bool):
            low = text.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            v = float(text)
            if v != int(v):
                raise ValueError
            return int(v)
        if isinstance(default, float) or default is None:
            return float(text)
        if isinstance(default, tuple):
            items = [t.strip() for t in text.split(",") if t.strip()]
            elem = default[0] if default else 0.0
            if isinstance(elem, int) and not isinstance(elem, bool):
                return tuple(int(float(t)) for t in items)
            return tuple(float(t) for t in items)
        return text.strip()
    except ValueError:
        raise ValidationError(key, f"cannot interpret {text!r} as {type(default).__name__}") from None


def _line_of(text: str, section: str, key: str | None = None) -> int:
    cur = None
    for i, line in enumerate(text.splitlines(), 1):
        st = line.strip()
        if st.startswith("[") and st.endswith("]"):
            cur = st[1:-1].strip().lower()
            if key is None and cur == section:
                return i
        elif key is not None and cur == section and "=" in st:
            if st.split("=", 1)[0].strip().lower() == key:
                return i
    return 0


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, strict=True, comment_prefixes=("#", ";"),
                                   inline_comment_prefixes=("#", ";"), delimiters=("=",))
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ParseError(e.lineno, "key outside of a [section]") from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        raise ParseError(e.lineno, str(e).split(":")[-1].strip()) from None
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] if e.errors else 0
        raise ParseError(lineno, "expected 'key = value'") from None

    cfg = RunConfig()
    for name in cp.sections():
        if name not in _SECTIONS and name != "experiment":
            raise ParseError(_line_of(text, name), f"unknown section [{name}]")
    for name, cls in _SECTIONS.items():
        if not cp.has_section(name):
            continue
        obj = getattr(cfg, name)
        names = {f.name.lower(): f.name for f in dataclasses.fields(cls)}
        for key, raw in cp.items(name):
            if key not in names:
                raise ValidationError(key, f"unknown key in [{name}]")
            attr = names[key]
            setattr(obj, attr, _convert(key, raw, getattr(cls(), attr)))
    if cp.has_section("experiment"):
        items = dict(cp.items("experiment"))
        cfg.kind = items.pop("kind", "simulate").strip()
        if cfg.kind not in KINDS:
            raise ValidationError("kind", f"must be one of {', '.join(KINDS)}")
        fields_ = _option_fields(cfg.kind)
        lower = {k.lower(): k for k in fields_}
        for key, raw in items.items():
            if key not in lower:
                raise ValidationError(key, f"unknown option for experiment {cfg.kind}")
            cfg.options[lower[key]] = _convert(key, raw, fields_[lower[key]])
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    d, p, s = cfg.domain, cfg.physics, cfg.solver
    if d.n < 16 or d.n % 2:
        raise ValidationError("n", "must be even and >= 16")
    if not d.length > 0:
        raise ValidationError("length", "must be > 0")
    if not 0 < p.alpha < 1:
        raise ValidationError("alpha", "must be in (0,1)")
    if p.beta < 0:
        raise ValidationError("beta", "must be >= 0")
    if cfg.kind in ("nonuniform", "dichotomy") and not p.s > 2:
        raise ValidationError("s", "must be > 2")
    if not 0 < s.cfl <= 2:
        raise ValidationError("cfl", "must be in (0,2]")
    if not s.T > 0:
        raise ValidationError("T", "must be > 0")
    if any(not 0 <= t <= s.T for t in s.outputs):
        raise ValidationError("outputs", "must lie in [0, T]")
    if s.formulation not in FORMULATIONS:
        raise ValidationError("formulation", "must be transport or velocity")
    if cfg.kind not in KINDS:
        raise ValidationError("kind", f"must be one of {', '.join(KINDS)}")
    # cross-field checks owned by the experiment configs themselves
    build_experiment(cfg)


def build_experiment(cfg: RunConfig):
    """The experiment's own config object, with the shared sections filled in."""
    cls = _EXPERIMENT_TYPES[cfg.kind]
    kw = dict(cfg.options)
    names = {f.name for f in dataclasses.fields(cls)}
    shared = {"s": cfg.physics.s, "beta": cfg.physics.beta, "alpha": cfg.physics.alpha,
              "T": cfg.solver.T, "length": cfg.domain.length}
    for k, v in shared.items():
        if k in names:
            kw[k] = v
    if cfg.kind in ("nonuniform", "dichotomy") and "grid_n" not in kw:
        kw["grid_n"] = cfg.domain.n
    if cfg.kind == "simulate":
        if kw.get("initial", "taylor_green") not in INITIALS:
            raise ValidationError("initial", f"must be one of {', '.join(INITIALS)}")
    try:
        return cls(**kw)
    except ValidationError:
        raise
    except (TypeError, ValueError) as e:
        raise ValidationError(cfg.kind, str(e)) from None


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def serialize(cfg: RunConfig) -> str:
    lines = []
    for name in ("domain", "physics", "solver"):
        lines.append(f"[{name}]")
        for f in dataclasses.fields(getattr(cfg, name)):
            lines.append(f"{f.name} = {_fmt(getattr(getattr(cfg, name), f.name))}".rstrip())
        lines.append("")
    lines.append("[experiment]")
    lines.append(f"kind = {cfg.kind}")
    for k in sorted(cfg.options):
        lines.append(f"{k} = {_fmt(cfg.options[k])}".rstrip())
    lines.append("")
    lines.append("[output]")
    for f in dataclasses.fields(cfg.output):
        lines.append(f"{f.name} = {_fmt(getattr(cfg.output, f.name))}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
