"""Command line front end: config resolution, runs, file output.

Subcommands: classify, solve, selfsim, asym, field, validate.  Parameters
come from an optional config file (flat key=value lines or a JSON object)
with command-line flags taking precedence.  Every summary JSON embeds the
fully resolved configuration, so a run is reproducible from its own output.

Exit codes: 0 success, 2 configuration or regime error, 3 integration or
validation failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import multiprocessing
import os
import sys
from dataclasses import dataclass

import numpy as np

from .asymptotics import classify_tail, fit_approach_to_pole, fit_decay_to_center
from .errors import ConfigError, DomainError, HyperwaveError, IntegrationError, RegimeError
from .field import (CROSS, LOG_SINGULAR, FieldSampler, GridSpec,
                    compatibility_report, boost_probe, scaling_probe,
                    time_translation_probe)
from .odeint import IntegrationConfig
from .profile import FULL, REDUCED, energy, solve_profile
from .regimes import WaveParameters, classify, vertical_params
from .seed import ProfileState, SeedSpec
from .selfsimilar import selfsim_summary, solve_selfsimilar
from .surface import SurfaceProfile, capH

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_USAGE = 64

TOLERANCE_SCALE_ENV = "HYPERWAVE_TOLERANCE_SCALE"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract reserves 2 for config errors
    def error(self, message):
        raise _UsageError(message)


@dataclass
class RunConfig:
    target: str = "s2"
    mu: float = 1.0
    k: float = 1.0
    c: float = 1.0
    b: float = -3.0
    q0: float = 0.01
    a_seed: float = 1e-6
    a_max: float = 500.0
    r_max: float = 100.0
    rtol: float = 1e-10
    atol: float = 1e-12
    xmin: float = -10.0
    xmax: float = 10.0
    ymin: float = -10.0
    ymax: float = 10.0
    nx: int = 512
    ny: int = 512
    t: float = 1.0

    _GRID_KEYS = ("xmin", "xmax", "ymin", "ymax", "nx", "ny", "t")

    def validated(self) -> "RunConfig":
        if self.target not in ("s2", "h2"):
            raise ConfigError(f"target must be s2 or h2, got {self.target!r}")
        for name in ("mu", "k", "c", "b", "q0", "a_seed", "a_max", "r_max",
                     "rtol", "atol", "xmin", "xmax", "ymin", "ymax", "t"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v!r}")
        if self.nx < 2 or self.ny < 2:
            raise ConfigError("grid counts nx, ny must be at least 2")
        if self.a_seed <= 0 or self.a_max <= self.a_seed:
            raise ConfigError("need 0 < a_seed < a_max")
        if self.rtol <= 0 or self.atol <= 0:
            raise ConfigError("tolerances must be positive")
        return self

    def echo(self, mode: str) -> dict:
        out = {"mode": mode}
        for f in dataclasses.fields(self):
            if f.name not in self._GRID_KEYS:
                out[f.name] = getattr(self, f.name)
        out["grid"] = {k: getattr(self, k) for k in self._GRID_KEYS}
        return out

    # -- derived objects

    def surface(self) -> SurfaceProfile:
        return (SurfaceProfile.sphere() if self.target == "s2"
                else SurfaceProfile.pseudosphere())

    def params(self) -> WaveParameters:
        return WaveParameters(mu=self.mu, k=self.k, c=self.c, b=self.b)

    def seed(self) -> SeedSpec:
        return SeedSpec(q0=self.q0, a_seed=self.a_seed)

    def integration(self) -> IntegrationConfig:
        cfg = IntegrationConfig(rtol=self.rtol, atol=self.atol)
        scale = os.environ.get(TOLERANCE_SCALE_ENV)
        if scale is not None:
            try:
                factor = float(scale)
            except ValueError:
                raise ConfigError(f"{TOLERANCE_SCALE_ENV} must be a number")
            cfg = cfg.scaled(factor)
        return cfg


_CONFIG_KEYS = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key, value):
    if key == "target":
        return str(value)
    if key in ("nx", "ny"):
        iv = int(value)
        if iv != float(value):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return iv
    return float(value)


def load_config(path: str) -> dict:
    """Config file as a dict: JSON object or flat key=value lines."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        raw = json.loads(text)
        if not isinstance(raw, dict):
            raise ConfigError("JSON config must be an object")
        grid = raw.pop("grid", {})
        if not isinstance(grid, dict):
            raise ConfigError("grid must be an object")
        raw.update(grid)
    else:
        raw = {}
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected key=value")
            key, _, val = line.partition("=")
            raw[key.strip()] = val.strip()
    out = {}
    for key, value in raw.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            out[key] = _coerce(key, value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
    return out


def resolve_config(args) -> RunConfig:
    """Defaults, then config file, then explicit flags."""
    values = {}
    if getattr(args, "summary_in", None):
        with open(args.summary_in) as fh:
            summary = json.load(fh)
        emb = summary.get("config", {})
        emb = dict(emb, **emb.pop("grid", {}))
        values.update({k: v for k, v in emb.items() if k in _CONFIG_KEYS})
    if getattr(args, "config", None):
        values.update(load_config(args.config))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return RunConfig(**values).validated()


# -- serialization helpers

def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    return obj


def dump_json(payload: dict, path: str | None):
    text = json.dumps(_jsonify(payload), indent=1, sort_keys=True)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


# -- subcommands

def _cmd_classify(args) -> int:
    cfg = resolve_config(args)
    report = classify(cfg.params())
    payload = {"config": cfg.echo("classify")}
    payload.update(dataclasses.asdict(report))
    dump_json(payload, args.out)
    return EXIT_OK


def _solve_payload(cfg: RunConfig, formulation: str) -> tuple[str, str]:
    """(trajectory CSV, summary JSON) for one profile run."""
    surface = cfg.surface()
    params = cfg.params()
    traj = solve_profile(surface, params, cfg.seed(), a_max=cfg.a_max,
                         cfg=cfg.integration(), formulation=formulation)
    buf = io.StringIO()
    traj.to_csv(buf)
    summary = {
        "config": cfg.echo("solve"),
        "formulation": formulation,
        "reason": traj.reason,
        "n_steps": int(traj.a.size - 1),
        "a_end": traj.a_end,
        "sigma_identity_residual": traj.sigma_identity_residual(),
        "kappa": classify(params).kappa,
    }
    if surface.compact:
        summary["min_pole_distance"] = traj.min_pole_distance()
    return buf.getvalue(), json.dumps(_jsonify(summary), indent=1,
                                      sort_keys=True) + "\n"


def _sweep_values(spec: str):
    key, _, body = spec.partition("=")
    key = key.strip()
    if key not in _CONFIG_KEYS or key == "target":
        raise ConfigError(f"cannot sweep over {key!r}")
    vals = [v.strip() for v in body.split(",") if v.strip()]
    if not vals:
        raise ConfigError("empty sweep list")
    return key, [_coerce(key, v) for v in vals]


def _sweep_worker(task):
    cfg_values, formulation = task
    return _solve_payload(RunConfig(**cfg_values), formulation)


def _cmd_solve(args) -> int:
    cfg = resolve_config(args)
    formulation = args.formulation
    if args.sweep:
        if not args.out_dir:
            raise ConfigError("--sweep needs --out-dir")
        key, vals = _sweep_values(args.sweep)
        os.makedirs(args.out_dir, exist_ok=True)
        tasks = [(dataclasses.asdict(dataclasses.replace(cfg, **{key: v})),
                  formulation) for v in vals]
        if args.jobs > 1:
            with multiprocessing.Pool(args.jobs) as pool:
                results = pool.map(_sweep_worker, tasks)
        else:
            results = [_sweep_worker(t) for t in tasks]
        # parent writes in task order, so worker count cannot reorder output
        for i, (csv_text, sum_text) in enumerate(results):
            base = os.path.join(args.out_dir, f"solve_{i:03d}")
            with open(base + ".csv", "w") as fh:
                fh.write(csv_text)
            with open(base + ".json", "w") as fh:
                fh.write(sum_text)
        return EXIT_OK
    csv_text, sum_text = _solve_payload(cfg, formulation)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(sum_text)
    if not args.out and not args.summary:
        sys.stdout.write(sum_text)
    return EXIT_OK


def _cmd_selfsim(args) -> int:
    cfg = resolve_config(args)
    surface = cfg.surface()
    params = vertical_params(cfg.params()) if args.vertical else cfg.params()
    traj = solve_selfsimilar(surface, params, cfg.seed(), r_max=cfg.r_max,
                             cfg=cfg.integration(), vertical=args.vertical)
    summary = {"config": cfg.echo("selfsim"), "vertical": bool(args.vertical),
               "reason": traj.reason, "r_end": traj.r_end,
               "h_invariant_residual": traj.h_invariant_residual()}
    summary.update(selfsim_summary(traj))
    if args.out:
        with open(args.out, "w") as fh:
            traj.to_csv(fh)
    dump_json(summary, args.summary)
    return EXIT_OK


def _cmd_asym(args) -> int:
    cfg = resolve_config(args)
    surface = cfg.surface()
    params = cfg.params()
    traj = solve_profile(surface, params, cfg.seed(), a_max=cfg.a_max,
                         cfg=cfg.integration(),
                         exploratory=bool(args.exploratory))
    window = None
    if args.window_lo is not None or args.window_hi is not None:
        lo = args.window_lo if args.window_lo is not None else 0.2 * cfg.a_max
        hi = args.window_hi if args.window_hi is not None else cfg.a_max
        window = (lo, hi)
    payload = {"config": cfg.echo("asym")}
    if params.mu < 0:
        fit = fit_decay_to_center(traj, params, surface, window=window)
        payload.update(fit.report())
    elif params.mu > 0 and surface.compact:
        fit = fit_approach_to_pole(traj, params, surface, window=window)
        payload.update(fit.report())
    else:
        payload["scenario"] = classify_tail(traj, params, surface)
    dump_json(payload, args.out)
    return EXIT_OK


def _trivial_cone(surface: SurfaceProfile, params: WaveParameters) -> bool:
    # non-compact targets admit only s = 0 when mu > 0
    return (not surface.compact) and params.mu > 0


def _cmd_field(args) -> int:
    cfg = resolve_config(args)
    surface = cfg.surface()
    params = cfg.params()
    selfsim = bool(args.selfsimilar)
    if selfsim and cfg.t <= 0:
        raise ConfigError("similarity fields need t > 0")
    reach = max(abs(cfg.xmin), abs(cfg.xmax), abs(cfg.ymin), abs(cfg.ymax))
    reach *= 1.0 if not selfsim else 1.0 / math.sqrt(cfg.t)
    reach = max(1.0, reach) * 1.001  # profiles must cover the whole grid

    def cone_traj(cone_params):
        if _trivial_cone(surface, cone_params):
            return None
        if selfsim:
            return solve_selfsimilar(surface, cone_params, cfg.seed(),
                                     r_max=reach, cfg=cfg.integration(),
                                     vertical=(cone_params is not params))
        return solve_profile(surface, cone_params, cfg.seed(), a_max=reach,
                             cfg=cfg.integration())

    horizontal = cone_traj(params)
    vertical = cone_traj(vertical_params(params))
    sampler = FieldSampler(surface, params, horizontal, vertical,
                           selfsimilar=selfsim, seed=cfg.seed())
    spec = GridSpec(xmin=cfg.xmin, xmax=cfg.xmax, ymin=cfg.ymin,
                    ymax=cfg.ymax, nx=cfg.nx, ny=cfg.ny,
                    bands=bool(args.bands))
    grid = sampler.grid(cfg.t, spec)
    if args.out:
        with open(args.out, "w") as fh:
            grid.to_csv(fh)
    summary = {"config": cfg.echo("field"), "selfsimilar": selfsim,
               "n_nodes": int(grid.x.size)}
    kappa = classify(params).kappa
    if kappa is not None:
        summary["compatibility"] = compatibility_report(sampler, cfg.t).report()
        probes = {"boost": boost_probe(sampler, t=cfg.t)}
        if selfsim:
            probes["scaling"] = scaling_probe(sampler, t=cfg.t)
        else:
            probes["time_translation"] = time_translation_probe(sampler, t=cfg.t)
        summary["equivariance"] = probes
    dump_json(summary, args.summary)
    return EXIT_OK


# -- validate: re-check invariants of a written CSV

def _read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip()
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    return header, rows


def _fail(invariant: str, row: int, detail: str) -> int:
    sys.stderr.write(f"validate: {invariant} violated at data row {row}: "
                     f"{detail}\n")
    return EXIT_INTEGRATION


def _validate_profile(cfg, rows, tol) -> tuple[int, dict]:
    surface, params = cfg.surface(), cfg.params()
    prev_a = -math.inf
    worst = {"sigma-identity": 0.0, "energy-consistency": 0.0}
    for i, row in enumerate(rows):
        a, s, s_a, sigma, e = map(float, row)
        if a <= prev_a:
            return _fail("radius-monotonicity", i, f"a = {a!r}"), {}
        prev_a = a
        gam = surface.gamma(s)
        res = abs(a * gam * sigma + params.c * surface.capF(s))
        res /= 1.0 + abs(params.c * surface.capF(s))
        if res > tol:
            return _fail("sigma-identity", i, f"residual {res:.3e}"), {}
        e2 = energy(surface, params, ProfileState(a, s, s_a, sigma))
        de = abs(e2 - e) / (1.0 + abs(e2))
        if de > tol:
            return _fail("energy-consistency", i, f"defect {de:.3e}"), {}
        worst["sigma-identity"] = max(worst["sigma-identity"], res)
        worst["energy-consistency"] = max(worst["energy-consistency"], de)
    return EXIT_OK, worst


def _validate_selfsim(cfg, rows, tol) -> tuple[int, dict]:
    surface = cfg.surface()
    params = cfg.params()
    worst = 0.0
    prev_r = -math.inf
    for i, row in enumerate(rows):
        r, s, s_r, sigma, stored = map(float, row)
        if r <= prev_r:
            return _fail("radius-monotonicity", i, f"r = {r!r}"), {}
        prev_r = r
        shifted = sigma - 2.0 * params.mu * surface.gamma(s) / r
        lhs = r * r * (s_r * s_r + shifted * shifted)
        h = capH(surface, params, s)
        res = abs(lhs - h) / (1.0 + abs(h))
        if abs(res - stored) > tol or res > tol:
            return _fail("H-invariant", i, f"residual {res:.3e}"), {}
        worst = max(worst, res)
    return EXIT_OK, {"H-invariant": worst}


def _validate_field(cfg, rows, tol) -> tuple[int, dict]:
    sphere = cfg.target == "s2"
    worst = 0.0
    for i, row in enumerate(rows):
        t, x, y, u0, u1, u2 = map(float, row[:6])
        phi_txt, cone = row[6], row[7]
        on_cross = abs(abs(x) - abs(y)) == 0.0
        if on_cross != (cone == CROSS):
            return _fail("cone-tags", i, f"({x!r}, {y!r}) tagged {cone}"), {}
        if on_cross:
            if (u0, u1, u2) != (1.0, 0.0, 0.0) or phi_txt != LOG_SINGULAR:
                return _fail("cross-values", i, f"u = {(u0, u1, u2)!r}"), {}
            continue
        q = u0 * u0 + u1 * u1 + u2 * u2 if sphere else u0 * u0 - u1 * u1 - u2 * u2
        res = abs(q - 1.0)
        if res > tol or (not sphere and u0 < 1.0):
            return _fail("target-normalization", i, f"|q-1| = {res:.3e}"), {}
        worst = max(worst, res)
    return EXIT_OK, {"target-normalization": worst}


_VALIDATORS = {
    "a,s,s_a,sigma,energy": ("profile", _validate_profile),
    "r,s,s_r,sigma,H_residual": ("selfsim", _validate_selfsim),
    "t,x,y,u0,u1,u2,phi,cone": ("field", _validate_field),
}


def _cmd_validate(args) -> int:
    cfg = resolve_config(args)
    header, rows = _read_csv(args.infile)
    if header not in _VALIDATORS:
        raise ConfigError(f"unrecognized CSV header {header!r}")
    kind, checker = _VALIDATORS[header]
    code, worst = checker(cfg, rows, args.tol)
    if code == EXIT_OK:
        dump_json({"config": cfg.echo("validate"), "kind": kind,
                   "rows": len(rows), "status": "ok",
                   "worst_residuals": worst}, args.out)
    return code


# -- parser assembly

def _add_param_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="key=value or JSON config")
    p.add_argument("--target", choices=("s2", "h2"))
    for name in ("mu", "k", "c", "b", "q0", "a-seed", "a-max", "r-max",
                 "rtol", "atol"):
        p.add_argument(f"--{name}", dest=name.replace("-", "_"), type=float)


def _add_grid_flags(p: argparse.ArgumentParser):
    for name in ("xmin", "xmax", "ymin", "ymax", "t"):
        p.add_argument(f"--{name}", type=float)
    for name in ("nx", "ny"):
        p.add_argument(f"--{name}", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperwave",
                     description="standing-wave profiles of the "
                                 "hyperbolic-hyperbolic spin field")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[], help="regime classification")
    _add_param_flags(p)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("solve", help="hyperbolic-cone profile run")
    _add_param_flags(p)
    p.add_argument("--formulation", choices=(REDUCED, FULL), default=REDUCED)
    p.add_argument("--out", metavar="PATH", help="trajectory CSV")
    p.add_argument("--summary", metavar="PATH", help="summary JSON")
    p.add_argument("--sweep", metavar="KEY=V1,V2,...",
                   help="run once per value of one config key")
    p.add_argument("--out-dir", metavar="DIR", help="sweep output directory")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel sweep workers (outputs are byte-identical)")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("selfsim", help="self-similar profile run")
    _add_param_flags(p)
    p.add_argument("--vertical", action="store_true",
                   help="solve the vertical-cone similarity system")
    p.add_argument("--out", metavar="PATH", help="trajectory CSV")
    p.add_argument("--summary", metavar="PATH", help="summary JSON")
    p.set_defaults(func=_cmd_selfsim)

    p = sub.add_parser("asym", help="tail classification and fit")
    _add_param_flags(p)
    p.add_argument("--window-lo", type=float)
    p.add_argument("--window-hi", type=float)
    p.add_argument("--exploratory", action="store_true",
                   help="tolerate blow-up (non-compact target, mu > 0)")
    p.add_argument("--out", metavar="PATH", help="fit JSON")
    p.set_defaults(func=_cmd_asym)

    p = sub.add_parser("field", help="assemble (u, phi) on a grid")
    _add_param_flags(p)
    _add_grid_flags(p)
    p.add_argument("--selfsimilar", action="store_true")
    p.add_argument("--bands", action="store_true",
                   help="add dyadic refinement bands near the cross")
    p.add_argument("--out", metavar="PATH", help="field CSV")
    p.add_argument("--summary", metavar="PATH", help="summary JSON")
    p.set_defaults(func=_cmd_field)

    p = sub.add_parser("validate", help="re-check invariants of a CSV")
    _add_param_flags(p)
    p.add_argument("--in", dest="infile", required=True, metavar="PATH")
    p.add_argument("--summary-in", metavar="PATH",
                   help="summary JSON of the producing run (config source)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", metavar="PATH", help="status JSON")
    p.set_defaults(func=_cmd_validate)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"{parser.prog}: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except IntegrationError as exc:
        sys.stderr.write(f"{parser.prog}: integration failed: {exc}\n")
        return EXIT_INTEGRATION
    except (ConfigError, RegimeError, DomainError, OSError,
            json.JSONDecodeError, ValueError) as exc:
        sys.stderr.write(f"{parser.prog}: {exc}\n")
        return EXIT_CONFIG
    except HyperwaveError as exc:
        sys.stderr.write(f"{parser.prog}: {exc}\n")
        return EXIT_CONFIG


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
