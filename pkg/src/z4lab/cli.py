"""z4lab command line. Exit status 0 on success, 1 on a domain error, 2 on a
usage or configuration error."""

import argparse
import csv
import io
import math
import os
import sys

import numpy as np

from . import heteroclinic as het
from . import model_map as mm
from . import normal_form as nf
from .classify import ClassifyConfig, classify as classify_point
from .config import COMMANDS, RunConfig, load_config, lyapunov_settings, parse_axis
from .errors import ConfigError, Z4Error
from .formats import fmt, format_kv
from .integrator import IntegratorConfig, integrate
from .lyapunov import SweepGrid, launch_point, resolve_workers, run_sweep, sweep_csv_text
from .systems import (PhysParams, RescaledParams, SMParams, general_field, rescaled_field,
                      sm_field)

_PARAM_FLAGS = ("gamma", "beta", "mu", "rho", "omega", "alpha", "lambda")
_SYSTEM_PARAMS = {"normal_form": ("gamma", "beta", "mu"),
                  "rescaled": ("rho", "omega", "mu"),
                  "sm": ("alpha", "lambda")}


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _global_flags(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="TOML run configuration")
    p.add_argument("--threads", type=int, default=d, help="worker processes (env Z4LAB_THREADS)")
    p.add_argument("--seed", type=int, default=d)
    p.add_argument("--out", default=d, help="output file (default: stdout)")


def _param_flags(p):
    p.add_argument("--system", choices=("normal_form", "rescaled", "sm"))
    for name in _PARAM_FLAGS:
        p.add_argument(f"--{name}", type=float)


def build_parser():
    ap = argparse.ArgumentParser(prog="z4lab", description=__doc__.split(".")[0])
    _global_flags(ap, False)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one trajectory, write t,x,y,z CSV")
    _param_flags(p)
    p.add_argument("--t-end", type=float)
    p.add_argument("--initial", type=_floats, help="x,y,z (default: off O+ along W^u)")

    p = sub.add_parser("sweep", help="Lyapunov sweep over a 2D parameter grid")
    _param_flags(p)
    p.add_argument("--x", help="NAME=LO:HI:N")
    p.add_argument("--y", help="NAME=LO:HI:N")
    p.add_argument("--checkpoint")
    p.add_argument("--resume", action="store_true", default=None)
    p.add_argument("--heatmap")
    p.add_argument("--t-total", type=float)
    p.add_argument("--t-transient", type=float)

    p = sub.add_parser("heteroclinic", help="rho on the four-winged heteroclinic surface")
    _param_flags(p)
    p.add_argument("--omegas", type=_floats)
    p.add_argument("--mus", type=_floats)
    p.add_argument("--angles", action="store_true", default=None)

    p = sub.add_parser("classify", help="label the attractor at a parameter point")
    _param_flags(p)
    p.add_argument("--batch", help="sweep CSV to label row by row")
    p.add_argument("--source", choices=("O-", "O+"))
    p.add_argument("--t-total", type=float)

    p = sub.add_parser("reduce", help="Shimizu-Morioka reduction and its inverse")
    p.add_argument("mode", choices=("sm", "inverse"))
    _param_flags(p)

    p = sub.add_parser("map", help="model Poincare map tools")
    p.add_argument("mode", choices=("iterate", "cones", "regions", "henon"))
    for name, typ in (("nu", float), ("c", float), ("c-hat", float), ("sigma", int),
                      ("delta", float), ("s-exp", float), ("amplitude", float),
                      ("nu-tilde", float), ("n", int), ("y-min", float),
                      ("k", int), ("Omega", float), ("nu-hat", float), ("K1", float),
                      ("K2", float), ("theta", float), ("M1", float), ("M2", float),
                      ("B", float)):
        p.add_argument(f"--{name}", type=typ)
    p.add_argument("--perturbation", choices=mm.PERTURBATIONS)
    p.add_argument("--start", type=_floats, help="X,Y")
    p.add_argument("--kind", choices=("-", "+"))

    p = sub.add_parser("henon", help="fixed points and multipliers of the 3D Henon map")
    for name in ("M1", "M2", "B"):
        p.add_argument(f"--{name}", type=float)

    for p in sub.choices.values():
        _global_flags(p, True)
    return ap


def _set(sec, key, value):
    if value is not None:
        sec[key] = value


def config_from_args(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    cfg.command = args.command
    if getattr(args, "threads", None) is not None:
        cfg.threads = args.threads
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None) is not None:
        cfg.out = args.out
    a = vars(args)
    if a.get("system"):
        cfg.system = a["system"]
    for name in _PARAM_FLAGS:
        _set(cfg["params"], name, a.get(name))
    cmd = args.command
    if cmd == "simulate":
        _set(cfg["simulate"], "t_end", a.get("t_end"))
        _set(cfg["simulate"], "initial", a.get("initial"))
    elif cmd == "sweep":
        if a.get("x"):
            cfg.x_axis = parse_axis(a["x"])
        if a.get("y"):
            cfg.y_axis = parse_axis(a["y"])
        for k in ("checkpoint", "heatmap", "resume"):
            _set(cfg["sweep"], k, a.get(k))
        _set(cfg["lyapunov"], "t_total", a.get("t_total"))
        _set(cfg["lyapunov"], "t_transient", a.get("t_transient"))
    elif cmd == "heteroclinic":
        for k in ("omegas", "mus", "angles"):
            _set(cfg["heteroclinic"], k, a.get(k))
    elif cmd == "classify":
        for k in ("batch", "source", "t_total"):
            _set(cfg["classify"], k, a.get(k))
    elif cmd == "reduce":
        cfg["reduce"]["mode"] = a["mode"]
    elif cmd == "map":
        cfg["map"]["mode"] = a["mode"]
        for k in ("nu", "c", "c_hat", "sigma", "s_exp", "amplitude", "nu_tilde", "n",
                  "y_min", "perturbation", "start"):
            _set(cfg["map"], k, a.get(k))
        if a["mode"] == "regions":
            for k in ("k", "Omega", "nu", "nu_hat", "K1", "K2", "theta", "delta", "kind"):
                _set(cfg["region"], k, a.get(k))
        else:
            _set(cfg["map"], "delta", a.get("delta"))
        for k in ("M1", "M2", "B"):
            _set(cfg["henon"], k, a.get(k))
    elif cmd == "henon":
        for k in ("M1", "M2", "B"):
            _set(cfg["henon"], k, a.get(k))
    return cfg


# commands

def _need(cfg, names):
    prm = cfg["params"]
    missing = [n for n in names if prm.get(n) is None]
    if missing:
        raise ConfigError("missing parameters: " + ", ".join(f"params.{n}" for n in missing))
    return [prm[n] for n in names]


def _phys(cfg):
    return PhysParams(*_need(cfg, ("gamma", "beta", "mu")))


def _rescaled(cfg):
    """Rescaled parameters from either rescaled or physical settings."""
    if cfg.system == "rescaled":
        return RescaledParams(*_need(cfg, ("rho", "omega", "mu")))
    return nf.phys_to_rescaled(cfg.coefficients, _phys(cfg))


def _field_for(cfg):
    c = cfg.coefficients
    if cfg.system == "sm":
        a, lam = _need(cfg, ("alpha", "lambda"))
        return sm_field(SMParams(a, lam)), np.zeros(3)
    if cfg.system == "rescaled":
        return rescaled_field(c, _rescaled(cfg)), np.array([0.0, 0.0, 1.0])
    p = _phys(cfg)
    eq = np.zeros(3)
    if p.mu > 0 and c.b1 < 0:
        eq = np.array([0.0, 0.0, math.sqrt(p.mu / abs(c.b1))])
    return general_field(c, p), eq


def _integrator(cfg):
    return IntegratorConfig(**cfg["integrator"])


def cmd_simulate(cfg):
    field, eq = _field_for(cfg)
    sim = cfg["simulate"]
    s0 = sim["initial"] if sim["initial"] is not None else launch_point(field, eq, sim["offset"])
    traj = integrate(field, s0, (0.0, sim["t_end"]), _integrator(cfg))
    buf = io.StringIO()
    buf.write("t,x,y,z\n")
    for t, s in zip(traj.t, traj.states):
        buf.write(f"{fmt(t)},{fmt(s[0])},{fmt(s[1])},{fmt(s[2])}\n")
    return buf.getvalue()


def sweep_grid(cfg):
    if not (cfg.x_axis and cfg.y_axis):
        raise ConfigError("sweep needs both axes (sweep.x and sweep.y, or --x and --y)")
    names = _SYSTEM_PARAMS[cfg.system]
    axes = (cfg.x_axis["name"], cfg.y_axis["name"])
    fixed = {}
    for n in names:
        if n in axes:
            continue
        v = cfg["params"].get(n)
        if v is None:
            raise ConfigError(f"params.{n}: required as a fixed sweep parameter")
        fixed[n] = v
    try:
        return SweepGrid(cfg.x_axis["name"], tuple(cfg.x_axis["range"]), cfg.x_axis["count"],
                         cfg.y_axis["name"], tuple(cfg.y_axis["range"]), cfg.y_axis["count"],
                         fixed, cfg.system, cfg.coefficients)
    except ValueError as exc:
        raise ConfigError(f"sweep: {exc}") from None


def cmd_sweep(cfg):
    grid = sweep_grid(cfg)
    sw = cfg["sweep"]
    ckpt = sw["checkpoint"]
    if sw["resume"] and not ckpt:
        if not cfg.out:
            raise ConfigError("--resume needs --checkpoint or --out")
        ckpt = cfg.out + ".ckpt"
        sw["checkpoint"] = ckpt
    if ckpt and not sw["resume"] and os.path.exists(ckpt):
        # a fresh run starts a fresh checkpoint
        open(ckpt, "w").close()
    lcfg, icfg = lyapunov_settings(cfg)
    res = run_sweep(grid, lcfg, ckpt, resolve_workers(cfg.threads), icfg)
    if sw["heatmap"]:
        res.to_heatmap(sw["heatmap"])
    return sweep_csv_text(res)


def _het_kwargs(cfg):
    h = cfg["heteroclinic"]
    return dict(bracket=tuple(h["bracket"]), tol=h["tol"], r_cyl=h["r_cyl"], h=h["h"],
                levels=h["levels"])


def _het_point(task):
    c, omega, mu, kw = task
    return het.find_het_rho(c, omega, mu, **kw)


def cmd_heteroclinic(cfg):
    c = cfg.coefficients
    h = cfg["heteroclinic"]
    kw = _het_kwargs(cfg)
    if h["omegas"] is not None or h["mus"] is not None:
        omegas = h["omegas"] or [cfg["params"].get("omega") or 0.0]
        mus = h["mus"] or _need(cfg, ("mu",))
        tasks = [(c, w, m, kw) for m in mus for w in omegas]
        workers = resolve_workers(cfg.threads)
        if workers > 1:
            from .lyapunov import _pool_context
            with _pool_context().Pool(workers) as pool:
                rows = pool.map(_het_point, tasks)
        else:
            rows = [_het_point(t) for t in tasks]
        out = ["omega,mu,rho_star"]
        out += [f"{fmt(r.omega)},{fmt(r.mu)},{fmt(r.rho_star)}" for r in rows]
        return "\n".join(out) + "\n"
    omega = cfg["params"].get("omega")
    omega = 0.0 if omega is None else omega
    (mu,) = _need(cfg, ("mu",))
    r = het.find_het_rho(c, omega, mu, **kw)
    k = nf.het_curve_coeffs(c)
    items = [("omega", omega), ("mu", mu), ("rho_star", r.rho_star), ("bracket_width", r.width),
             ("k1_formula", k.k1), ("k2_formula", k.k2),
             ("rho_formula", 0.5 + k.k1 * math.sqrt(mu) + k.k2 * omega)]
    if h["angles"]:
        if omega != 0:
            raise ConfigError("arrival angles are defined at omega = 0")
        items += [("omega_plus", het.arrival_angle(c, mu, "+", r.rho_star)),
                  ("omega_minus", het.arrival_angle(c, mu, "-", r.rho_star)),
                  ("omega_plus_formula", nf.omega_plus_coefficient(c) * math.sqrt(mu))]
    return format_kv(items)


def _classify_cfg(cfg):
    d = dict(cfg["classify"])
    d.pop("source")
    d.pop("batch")
    return ClassifyConfig(**d)


def cmd_classify(cfg):
    c = cfg.coefficients
    ccfg = _classify_cfg(cfg)
    src = cfg["classify"]["source"]
    if src not in ("O-", "O+"):
        raise ConfigError("classify.source: expected O- or O+")
    batch = cfg["classify"]["batch"]
    if batch is None:
        label, ev = classify_point(c, _phys(cfg), ccfg, src)
        return format_kv([("label", label.value), ("top_exponent", ev.top_exponent),
                          ("visits_plus", ev.visits.count("+")),
                          ("visits_minus", ev.visits.count("-")),
                          ("symmetry_distance", ev.symmetry_distance),
                          ("n_samples", ev.n_samples), ("min_dist_plus", ev.min_dist_plus),
                          ("min_dist_minus", ev.min_dist_minus), ("radius", ev.radius),
                          ("d_sym", ev.d_sym), ("reason", ev.reason)])
    if cfg.system != "normal_form":
        raise ConfigError("batch classification needs system = normal_form")
    try:
        with open(batch, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {batch}: {exc}") from None
    if not rows or len(rows[0]) < 4:
        raise ConfigError(f"{batch}: not a sweep CSV")
    header = rows[0]
    xn, yn = header[2], header[3]
    out = [",".join(header + ["class_label"])]
    for row in rows[1:]:
        prm = {n: cfg["params"].get(n) for n in ("gamma", "beta", "mu")}
        prm[xn], prm[yn] = float(row[2]), float(row[3])
        if any(v is None for v in prm.values()):
            raise ConfigError("batch rows need the remaining parameters in params")
        label, _ = classify_point(c, PhysParams(prm["gamma"], prm["beta"], prm["mu"]), ccfg, src)
        out.append(",".join(row + [label.value]))
    return "\n".join(out) + "\n"


def cmd_reduce(cfg):
    c = cfg.coefficients
    rd = cfg["reduce"]
    if rd["mode"] == "sm":
        r = _rescaled(cfg)
        red = nf.sm_reduction(c, r)
        return format_kv([
            ("rho", r.rho), ("omega", r.omega), ("mu", r.mu),
            ("mu1", red.mu1), ("mu2", red.mu2), ("alpha", red.alpha), ("lambda", red.lam),
            ("in_window", nf.in_window(c, r, rd["K1"], rd["K2"], rd["K3"])),
            ("residual", nf.sm_residual(c, r, rd["residual_radius"]))])
    if rd["mode"] == "inverse":
        a, lam, mu = _need(cfg, ("alpha", "lambda", "mu"))
        r = nf.sm_point_to_rescaled(c, SMParams(a, lam), mu)
        p = nf.rescaled_to_phys(c, r)
        return format_kv([("alpha", a), ("lambda", lam), ("mu", mu), ("rho", r.rho),
                          ("omega", r.omega), ("gamma", p.gamma), ("beta", p.beta)])
    raise ConfigError(f"reduce.mode: expected sm or inverse, got {rd['mode']!r}")


def _map_params(cfg):
    m = cfg["map"]
    return mm.ModelMapParams(m["nu"], m["c"], m["c_hat"], m["sigma"], m["delta"], m["s_exp"],
                             m["perturbation"], m["amplitude"], m["nu_tilde"])


def cmd_henon(cfg):
    h = cfg["henon"]
    items = []
    for i, fp in enumerate(mm.henon_analysis(h["M1"], h["M2"], h["B"])):
        items.append((f"fixed_point_{i}", fp.point))
        items.append((f"multipliers_{i}", fp.multipliers))
    return format_kv(items)


def cmd_map(cfg):
    mode = cfg["map"]["mode"]
    if mode == "henon":
        return cmd_henon(cfg)
    if mode == "regions":
        rg = cfg["region"]
        rs = mm.RegionSpec(rg["k"], rg["Omega"], rg["nu"],
                           math.nan if rg["nu_hat"] is None else rg["nu_hat"],
                           rg["K1"], rg["K2"], rg["kind"])
        if rg["theta"] is None:
            raise ConfigError("region.theta: required")
        lo, hi = mm.region_bounds(rs, rg["theta"])
        items = [("k", rs.k), ("theta", rg["theta"]), ("lower", lo), ("upper", hi)]
        if rg["delta"] is not None:
            inside, why = mm.region_predicate(rs, rg["theta"], rg["delta"])
            items += [("delta", rg["delta"]), ("inside", inside), ("reason", why)]
        return format_kv(items)
    p = _map_params(cfg)
    m = cfg["map"]
    if mode == "iterate":
        X, Y = m["start"]
        lines = ["n,X,Y"]
        for n in range(m["n"] + 1):
            lines.append(f"{n},{fmt(X)},{fmt(Y)}")
            if n == m["n"] or Y == 0:
                break
            X, Y = mm.map_T(p, X, Y)
        return "\n".join(lines) + "\n"
    if mode == "cones":
        cert = mm.verify_cones(p, m["y_min"], 1.0, m["n_y"], m["n_x"], m["slope_ss"],
                               m["slope_u"])
        return format_kv([("valid", cert.valid), ("min_expansion", cert.min_expansion),
                          ("max_contraction", cert.max_contraction),
                          ("u_invariant", cert.u_invariant), ("ss_invariant", cert.ss_invariant),
                          ("slope_u", cert.slope_u), ("slope_ss", cert.slope_ss),
                          ("worst_point", cert.worst_point)])
    raise ConfigError(f"map.mode: unknown mode {mode!r}")


_DISPATCH = {"simulate": cmd_simulate, "sweep": cmd_sweep, "heteroclinic": cmd_heteroclinic,
             "classify": cmd_classify, "reduce": cmd_reduce, "map": cmd_map,
             "henon": cmd_henon}


def sidecar_path(cfg):
    if cfg.out:
        return cfg.out + ".run.toml"
    return f"z4lab-{cfg.command}.run.toml"


def run_command(cfg):
    """Run ``cfg.command``, write its output and the resolved-config sidecar.
    Returns the exit status."""
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    text = _DISPATCH[cfg.command](cfg)
    with open(sidecar_path(cfg), "w", encoding="utf-8") as fh:
        fh.write(cfg.to_toml())
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run_command(cfg)
    except ConfigError as exc:
        print(f"z4lab: usage error: {exc}", file=sys.stderr)
        return 2
    except Z4Error as exc:
        print(f"z4lab: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"z4lab: invalid value: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"z4lab: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
