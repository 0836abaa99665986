"""TOML run configuration: schema validation with key paths, defaults and
a fully resolved echo for the run sidecar."""

from dataclasses import dataclass, field as dc_field
import math
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from .errors import ConfigError
from .lyapunov import SYSTEMS, coefficients_from_dict, coefficients_to_dict
from .systems import SystemCoefficients

COMMANDS = ("simulate", "sweep", "heteroclinic", "classify", "reduce", "map", "henon")

_COEFF_COMPLEX = ("a0", "a1", "a2", "a3", "b0")
_COEFF_REAL = ("b1", "b2")


def _number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _real(path, v):
    if not _number(v):
        raise ConfigError(f"{path}: expected a number, got {v!r}")
    return float(v)


def _int(path, v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}: expected an integer, got {v!r}")
    return v


def _str(path, v):
    if not isinstance(v, str):
        raise ConfigError(f"{path}: expected a string, got {v!r}")
    return v


def _bool(path, v):
    if not isinstance(v, bool):
        raise ConfigError(f"{path}: expected true or false, got {v!r}")
    return v


def _pair(path, v):
    if not (isinstance(v, list) and len(v) == 2 and all(_number(e) for e in v)):
        raise ConfigError(f"{path}: expected [lo, hi], got {v!r}")
    return [float(e) for e in v]


def _vec(n):
    def check(path, v):
        if not (isinstance(v, list) and len(v) == n and all(_number(e) for e in v)):
            raise ConfigError(f"{path}: expected a list of {n} numbers, got {v!r}")
        return [float(e) for e in v]
    return check


def _reals(path, v):
    if not (isinstance(v, list) and v and all(_number(e) for e in v)):
        raise ConfigError(f"{path}: expected a non-empty list of numbers, got {v!r}")
    return [float(e) for e in v]


def _complex(path, v):
    if _number(v):
        return [float(v), 0.0]
    if isinstance(v, list) and len(v) == 2 and all(_number(e) for e in v):
        return [float(v[0]), float(v[1])]
    raise ConfigError(f"{path}: expected [re, im] or a number, got {v!r}")


# section -> key -> (checker, default); None means "no default"
SCHEMA = {
    "integrator": {"rel_tol": (_real, 1e-10), "abs_tol": (_real, 1e-12),
                   "max_step": (_real, math.inf), "max_steps": (_int, 10_000_000)},
    "lyapunov": {"t_transient": (_real, 200.0), "t_total": (_real, 2000.0),
                 "renorm_dt": (_real, 1.0), "n_exponents": (_int, 3),
                 "escape_radius": (_real, 1e3), "threshold": (_real, 5e-3),
                 "rel_tol": (_real, 1e-9), "abs_tol": (_real, 1e-11)},
    "params": {"gamma": (_real, None), "beta": (_real, None), "mu": (_real, None),
               "rho": (_real, None), "omega": (_real, None),
               "alpha": (_real, None), "lambda": (_real, None)},
    "simulate": {"t_end": (_real, 100.0), "initial": (_vec(3), None),
                 "offset": (_real, 1e-3)},
    "sweep": {"checkpoint": (_str, None), "heatmap": (_str, None), "resume": (_bool, False)},
    "heteroclinic": {"omegas": (_reals, None), "mus": (_reals, None),
                     "r_cyl": (_real, 0.2), "h": (_real, 1e-6), "tol": (_real, 1e-10),
                     "bracket": (_pair, [0.3, 0.7]), "levels": (_int, 2),
                     "angles": (_bool, False)},
    "classify": {"t_total": (_real, 2e4), "t_lyap_transient": (_real, 2e3),
                 "transient_frac": (_real, 0.2), "radius": (_real, 0.4),
                 "d_sym": (_real, 0.2), "cell": (_real, 0.05), "sample_dt": (_real, 0.25),
                 "threshold": (_real, 5e-3), "source": (_str, "O-"), "batch": (_str, None)},
    "reduce": {"mode": (_str, "sm"), "K1": (_real, 10.0), "K2": (_real, 0.1), "K3": (_real, 10.0),
               "residual_radius": (_real, 1.0)},
    "map": {"mode": (_str, "iterate"), "nu": (_real, 0.8), "c": (_real, 1.5), "c_hat": (_real, 0.0),
            "sigma": (_int, 1), "delta": (_real, 0.0), "s_exp": (_real, 0.5),
            "perturbation": (_str, "none"), "amplitude": (_real, 0.0),
            "nu_tilde": (_real, None), "start": (_vec(2), [0.0, 0.25]),
            "n": (_int, 20), "y_min": (_real, 1e-3), "n_y": (_int, 200), "n_x": (_int, 21),
            "slope_ss": (_real, None), "slope_u": (_real, None)},
    "region": {"k": (_int, 1), "Omega": (_real, math.pi / 2), "nu": (_real, 0.8),
               "nu_hat": (_real, None), "K1": (_real, 0.5), "K2": (_real, 2.0),
               "kind": (_str, "-"), "theta": (_real, None), "delta": (_real, None)},
    "henon": {"M1": (_real, 1.75), "M2": (_real, -1.0), "B": (_real, -1.0)},
}

_TOP = {"command": _str, "system": _str, "seed": _int, "threads": _int, "out": _str}
_AXIS = {"name": _str, "range": _pair, "count": _int}


def _section(name, raw):
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected a table")
    schema = SCHEMA[name]
    out = {}
    for k, v in raw.items():
        if k not in schema:
            raise ConfigError(f"{name}.{k}: unknown key")
        out[k] = schema[k][0](f"{name}.{k}", v)
    for k, (_, default) in schema.items():
        out.setdefault(k, default)
    return out


def _axis(path, raw):
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a table with name, range, count")
    out = {}
    for k, v in raw.items():
        if k not in _AXIS:
            raise ConfigError(f"{path}.{k}: unknown key")
        out[k] = _AXIS[k](f"{path}.{k}", v)
    missing = set(_AXIS) - set(out)
    if missing:
        raise ConfigError(f"{path}: missing {', '.join(sorted(missing))}")
    if out["count"] < 1:
        raise ConfigError(f"{path}.count: must be at least 1")
    return out


@dataclass
class RunConfig:
    command: str = None
    system: str = "normal_form"
    coefficients: SystemCoefficients = dc_field(default_factory=SystemCoefficients.concrete)
    seed: int = 0
    threads: int = None
    out: str = None
    x_axis: dict = None
    y_axis: dict = None
    sections: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        for name in SCHEMA:
            self.sections.setdefault(name, _section(name, {}))

    def __getitem__(self, name):
        return self.sections[name]

    def resolved(self):
        """Plain dict of every setting, defaults included (unset values are
        left out because TOML has no null)."""
        d = {"command": self.command, "system": self.system, "seed": self.seed,
             "threads": self.threads, "out": self.out}
        d = {k: v for k, v in d.items() if v is not None}
        d["coefficients"] = coefficients_to_dict(self.coefficients)
        for name, sec in self.sections.items():
            d[name] = {k: v for k, v in sec.items() if v is not None}
        for k in ("x_axis", "y_axis"):
            if getattr(self, k):
                d["sweep"][k[0]] = dict(getattr(self, k))
        return d

    def to_toml(self):
        return tomli_w.dumps(self.resolved())


def parse_config(text):
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from None
    cfg = RunConfig()
    for k, v in raw.items():
        if k in _TOP:
            setattr(cfg, k, _TOP[k](k, v))
        elif k == "coefficients":
            cfg.coefficients = _coefficients(v)
        elif k in SCHEMA and k != "sweep":
            cfg.sections[k] = _section(k, v)
        elif k == "sweep":
            sweep = dict(v) if isinstance(v, dict) else v
            if not isinstance(sweep, dict):
                raise ConfigError("sweep: expected a table")
            if "x" in sweep:
                cfg.x_axis = _axis("sweep.x", sweep.pop("x"))
            if "y" in sweep:
                cfg.y_axis = _axis("sweep.y", sweep.pop("y"))
            cfg.sections["sweep"] = _section("sweep", sweep)
        else:
            raise ConfigError(f"{k}: unknown key")
    if cfg.command is not None and cfg.command not in COMMANDS:
        raise ConfigError(f"command: unknown command {cfg.command!r}")
    if cfg.system not in SYSTEMS:
        raise ConfigError(f"system: expected one of {', '.join(SYSTEMS)}, got {cfg.system!r}")
    if cfg.threads is not None and cfg.threads < 1:
        raise ConfigError("threads: must be at least 1")
    return cfg


def _coefficients(raw):
    if not isinstance(raw, dict):
        raise ConfigError("coefficients: expected a table")
    d = {}
    for k, v in raw.items():
        path = f"coefficients.{k}"
        if k in _COEFF_COMPLEX:
            d[k] = _complex(path, v)
        elif k in _COEFF_REAL:
            d[k] = _real(path, v)
        else:
            raise ConfigError(f"{path}: unknown key")
    return coefficients_from_dict(d)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def parse_axis(text):
    """NAME=LO:HI:N from the command line."""
    try:
        name, rest = text.split("=", 1)
        lo, hi, n = rest.split(":")
        return {"name": name.strip(), "range": [float(lo), float(hi)], "count": int(n)}
    except ValueError:
        raise ConfigError(f"axis must look like NAME=LO:HI:N, got {text!r}") from None


def lyapunov_settings(cfg):
    from .integrator import IntegratorConfig
    from .lyapunov import LyapunovConfig
    ly = dict(cfg["lyapunov"])
    icfg = IntegratorConfig(rel_tol=ly.pop("rel_tol"), abs_tol=ly.pop("abs_tol"),
                            max_step=cfg["integrator"]["max_step"],
                            max_steps=cfg["integrator"]["max_steps"])
    return LyapunovConfig(seed=cfg.seed, **ly), icfg
