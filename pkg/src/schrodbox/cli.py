"""Config parsing, experiment drivers, and CSV output.

Configs are plain text, one `section.key = value` per line, with '#'
comments.  Unknown keys are hard errors (reported with their line number),
as are malformed values.  All floats are written back with their shortest
round-trip decimal representation, so identical configs produce
byte-identical CSV files.

Exit codes: 0 ok, 2 config error, 3 solver failure, 4 unsupported mode.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .control import (ControlProblem, CostFunctionalSpec, UnsupportedModeError,
                      directional_derivative, fourier_control_search)
from .fields import (ControlFunction, MagneticPotential, PotentialSpec,
                     control_add, control_h10_sq, make_scalar)
from .grid import build_grid
from .linalg import DENSE_ORACLE_LIMIT, DensePropagator, SolverError, export_triplets
from .splitting import Propagator, SplittingConfig, evolve, restrict


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


# -- schema -------------------------------------------------------------------

def _parse_bool(s):
    if s.lower() in ("true", "yes", "1", "on"):
        return True
    if s.lower() in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_floats(s):
    return tuple(float(part) for part in s.split(",") if part.strip())


def _parse_knots(s):
    pairs = []
    for part in s.split(","):
        part = part.strip()
        if not part:
            continue
        t, _, v = part.partition(":")
        pairs.append((float(t), float(v)))
    return tuple(pairs)


_FORM_PARAMS = ("scale", "amplitude", "width", "center")


def _form_keys(prefix):
    keys = {prefix: str}
    keys.update({f"{prefix}.scale": float, f"{prefix}.amplitude": float,
                 f"{prefix}.width": float, f"{prefix}.center": _parse_floats})
    return keys


SCHEMA = {
    "grid.R": float, "grid.h": float, "grid.d": int,
    "time.T": float, "time.steps": int,
    **_form_keys("potential.w_reg"),
    **_form_keys("potential.w_sing"),
    **_form_keys("potential.v_con"),
    "magnetic.kind": str, "magnetic.b0": float, "magnetic.scale": float,
    "hartree.enabled": _parse_bool, "hartree.epsilon": float,
    "control.knots": _parse_knots,
    **_form_keys("initial"),
    "output.directory": str, "output.snapshot_times": _parse_floats,
    "output.cadence": int,
    "solver.tolerance": float, "solver.strategy": str, "solver.stencil": str,
    "cost.s": str, "cost.kappa": float,
    **_form_keys("cost.target"),
    **_form_keys("cost.u_pot"),
    "cost.b0": float,
    "search.modes": int, "search.levels": int,
    "gradcheck.pairs": int, "gradcheck.delta": float, "gradcheck.seed": int,
}

_REQUIRED = ("grid.R", "grid.h", "grid.d", "time.T", "time.steps", "initial")

_CHOICES = {
    "magnetic.kind": ("constant", "bounded", "zero"),
    "solver.strategy": ("auto", "direct", "krylov"),
    "solver.stencil": ("paper", "compact"),
    "cost.s": ("identity", "target", "schrodinger"),
}


@dataclass
class RunConfig:
    """Parsed key-value configuration; `entries` preserves schema order."""

    entries: dict

    def get(self, key, default=None):
        return self.entries.get(key, default)


def parse_config(text: str) -> RunConfig:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key = key.strip()
        value = value.strip()
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            parsed = SCHEMA[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno) from None
        if key in _CHOICES and parsed not in _CHOICES[key]:
            raise ConfigError(f"{key} must be one of {_CHOICES[key]}", lineno)
        entries[key] = parsed
    for key in _REQUIRED:
        if key not in entries:
            raise ConfigError(f"missing required key {key!r}")
    return RunConfig(entries=entries)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def emit_config(cfg: RunConfig) -> str:
    """Canonical re-emission: schema order, shortest round-trip floats."""
    lines = []
    for key in SCHEMA:
        if key not in cfg.entries:
            continue
        val = cfg.entries[key]
        if isinstance(val, bool):
            text = "true" if val else "false"
        elif isinstance(val, float):
            text = repr(val)
        elif isinstance(val, tuple) and val and isinstance(val[0], tuple):
            text = ", ".join(f"{repr(t)}:{repr(v)}" for t, v in val)
        elif isinstance(val, tuple):
            text = ", ".join(repr(float(v)) for v in val)
        else:
            text = str(val)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


# -- config -> objects --------------------------------------------------------

def _build_form(cfg: RunConfig, prefix: str, d: int):
    name = cfg.get(prefix)
    if name is None:
        return None
    kwargs = {}
    for param in _FORM_PARAMS:
        val = cfg.get(f"{prefix}.{param}")
        if val is not None:
            kwargs[param] = val
    if "center" in kwargs and len(kwargs["center"]) != d:
        raise ConfigError(f"{prefix}.center must have {d} components")
    try:
        return make_scalar(name, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{prefix}: {exc}") from None


def _build_magnetic(cfg: RunConfig) -> MagneticPotential:
    kind = cfg.get("magnetic.kind", "zero")
    if kind == "zero":
        return MagneticPotential.zero()
    if kind == "constant":
        return MagneticPotential.constant(cfg.get("magnetic.b0", 0.0))
    # bounded: the tanh gauge c * (tanh x2, tanh x1), |components| <= |c|
    c = cfg.get("magnetic.scale", 1.0)
    if cfg.get("grid.d") != 2:
        raise ConfigError("magnetic.kind = bounded is the 2-d tanh gauge; need grid.d = 2")
    comps = (lambda p: c * np.tanh(p[..., 1]), lambda p: c * np.tanh(p[..., 0]))
    return MagneticPotential.bounded(comps, abs(c))


def _build_control(cfg: RunConfig):
    knots = cfg.get("control.knots")
    if knots is None:
        return None
    return ControlFunction.from_knots(knots)


def splitting_config(cfg: RunConfig, stencil: str | None = None) -> SplittingConfig:
    d = cfg.get("grid.d")
    initial = _build_form(cfg, "initial", d)
    pot = PotentialSpec(
        w_reg=_build_form(cfg, "potential.w_reg", d),
        w_sing=_build_form(cfg, "potential.w_sing", d),
        v_con=_build_form(cfg, "potential.v_con", d),
    )
    strategy = cfg.get("solver.strategy", "auto")
    try:
        return SplittingConfig(
            R=cfg.get("grid.R"), h=cfg.get("grid.h"), d=d,
            T=cfg.get("time.T"), steps=cfg.get("time.steps"),
            initial=initial, potential=pot,
            magnetic=_build_magnetic(cfg),
            hartree=cfg.get("hartree.enabled", False),
            kernel_eps=cfg.get("hartree.epsilon"),
            control=_build_control(cfg),
            cadence=cfg.get("output.cadence", 1),
            stencil=stencil or cfg.get("solver.stencil", "paper"),
            solver_tol=cfg.get("solver.tolerance", 1e-10),
            solve_strategy=None if strategy == "auto" else strategy,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cost_spec(cfg: RunConfig, scfg_cfg: SplittingConfig) -> CostFunctionalSpec:
    kind = cfg.get("cost.s", "identity")
    kappa = cfg.get("cost.kappa", 1.0)
    if kind == "identity":
        return CostFunctionalSpec(kind="identity", kappa=kappa)
    if kind == "target":
        form = _build_form(cfg, "cost.target", scfg_cfg.d)
        if form is None:
            raise ConfigError("cost.s = target needs a cost.target form")
        grid = build_grid(scfg_cfg.R, scfg_cfg.h, scfg_cfg.d)
        vals = grid.sample(form).astype(complex)
        nrm = grid.norm(vals)
        if nrm == 0.0:
            raise ConfigError("cost.target is identically zero")
        return CostFunctionalSpec(kind="target", kappa=kappa, target=vals / nrm)
    spot = PotentialSpec(w_reg=_build_form(cfg, "cost.u_pot", scfg_cfg.d))
    smag = (MagneticPotential.constant(cfg.get("cost.b0", 0.0))
            if cfg.get("cost.b0") is not None else MagneticPotential.zero())
    return CostFunctionalSpec(kind="schrodinger", kappa=kappa,
                              s_potential=spot, s_magnetic=smag)


# -- CSV output ---------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def _write_lines(path: Path, lines) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def write_timeseries(path: Path, result) -> None:
    d = result.grid.d
    header = "t,mass,h1,w1,w2,energy," + ",".join("cx cy cz".split()[:d])
    lines = [header]
    for i, t in enumerate(result.times):
        row = [t, result.series["mass"][i], result.series["h1"][i],
               result.series["w1"][i], result.series["w2"][i],
               result.series["energy"][i]]
        row.extend(result.series["centroid"][i])
        lines.append(",".join(_fmt(x) for x in row))
    _write_lines(path, lines)


def write_snapshot(path: Path, grid, values) -> None:
    header = ",".join(f"x{i + 1}" for i in range(grid.d)) + ",re,im,abs2"
    pts = grid.points.reshape(-1, grid.d)
    flat = values.reshape(-1)
    lines = [header]
    for p, v in zip(pts, flat):
        cells = [_fmt(c) for c in p]
        cells += [_fmt(v.real), _fmt(v.imag), _fmt(abs(v) ** 2)]
        lines.append(",".join(cells))
    _write_lines(path, lines)


def write_sweep(path: Path, param, values, errors) -> None:
    lines = ["param,value,error,rate"]
    for i, (v, e) in enumerate(zip(values, errors)):
        if i == 0:
            rate = ""
        else:
            rate = _fmt(np.log(errors[i] / errors[i - 1]) / np.log(values[i] / values[i - 1]))
        lines.append(f"{param},{_fmt(v)},{_fmt(e)},{rate}")
    _write_lines(path, lines)


# -- drivers ------------------------------------------------------------------

def run_evolve(config_path, stencil=None, export_matrix=None, outdir=None):
    cfg = load_config(config_path)
    scfg = splitting_config(cfg, stencil=stencil)
    out = Path(outdir or cfg.get("output.directory", "out"))
    prop = Propagator(scfg)
    if export_matrix:
        export_triplets(prop.folded_operator(), export_matrix)
    result = evolve(scfg, snapshot_times=cfg.get("output.snapshot_times", ()),
                    prop=prop)
    write_timeseries(out / "timeseries.csv", result)
    for t, values in sorted(result.snapshots.items()):
        write_snapshot(out / f"snapshot_{_fmt(t)}.csv", result.grid, values)
    return out


def _final_state(scfg: SplittingConfig):
    res = evolve(replace(scfg, cadence=scfg.steps))
    return res


def _is_linear_uncontrolled(scfg: SplittingConfig) -> bool:
    if scfg.hartree:
        return False
    u = scfg.control
    return u is None or all(v == 0.0 for v in u.values)


def _sweep_error(scfg_value, reference):
    """L2 difference of final states on the value-run's node set."""
    res = _final_state(scfg_value)
    ref_grid, ref_values = reference
    common = restrict(ref_values, ref_grid, res.grid)
    return res.grid.norm(res.psi.values - common)


def run_sweep(config_path, param, values, ref=None, stencil=None, outdir=None):
    cfg = load_config(config_path)
    base = splitting_config(cfg, stencil=stencil)
    out = Path(outdir or cfg.get("output.directory", "out"))
    values = [float(v) for v in values]
    if any(v <= 0 for v in values):
        raise ConfigError("sweep values must be positive")
    diffs = np.diff(values)
    if len(values) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ConfigError("sweep values must be monotone")

    def cfg_for(value):
        if param == "tau":
            steps = int(round(base.T / value))
            if steps < 1 or abs(base.T / steps - value) > 1e-9 * value:
                raise ConfigError(f"tau={value} does not divide T={base.T}")
            return replace(base, steps=steps)
        if param == "h":
            return replace(base, h=value)
        if param == "R":
            return replace(base, R=value)
        if param == "epsilon":
            if not base.hartree:
                raise ConfigError("epsilon sweep needs hartree.enabled = true")
            return replace(base, kernel_eps=value)
        raise ConfigError(f"unknown sweep parameter {param!r}")

    # Reference rule: dense exact propagator for linear uncontrolled tau
    # sweeps on small grids, otherwise a halved-parameter (or explicitly
    # given) reference run.
    if param == "tau":
        probe = Propagator(cfg_for(values[0]))
        if _is_linear_uncontrolled(base) and probe.grid.size <= DENSE_ORACLE_LIMIT:
            dense = DensePropagator(probe.folded_operator())
            ref_values = dense.apply(base.T, probe.initial_state())
            reference = (probe.grid, ref_values)
        else:
            reference = None  # per-value Richardson below
    elif param == "R":
        ref_R = float(ref) if ref is not None else 16.0
        res = _final_state(replace(base, R=ref_R))
        reference = (res.grid, res.psi.values)
    elif param == "h":
        ref_h = float(ref) if ref is not None else min(values) / 2.0
        res = _final_state(replace(base, h=ref_h))
        reference = (res.grid, res.psi.values)
    else:
        ref_eps = float(ref) if ref is not None else min(values) / 2.0
        res = _final_state(cfg_for(ref_eps))
        reference = (res.grid, res.psi.values)

    def one_error(value):
        scfg_v = cfg_for(value)
        if reference is not None:
            return _sweep_error(scfg_v, reference)
        fine = _final_state(replace(scfg_v, steps=2 * scfg_v.steps))
        res = _final_state(scfg_v)
        return res.grid.norm(res.psi.values - fine.psi.values)

    with ThreadPoolExecutor(max_workers=min(4, len(values))) as pool:
        errors = list(pool.map(one_error, values))
    write_sweep(out / "sweep.csv", param, values, errors)
    return out


def _random_control(T, n_interior, rng):
    t = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 0.9, n_interior)) * T, [T]])
    v = np.concatenate([[0.0], rng.standard_normal(n_interior), [0.0]])
    return ControlFunction(tuple(t), tuple(v))


def run_control(config_path, mode, modes=None, levels=None, stencil=None, outdir=None):
    cfg = load_config(config_path)
    base = splitting_config(cfg, stencil=stencil)
    if base.hartree:
        raise UnsupportedModeError(
            "control functionals require the linear equation; set hartree.enabled = false")
    out = Path(outdir or cfg.get("output.directory", "out"))
    scost = cost_spec(cfg, base)
    u = _build_control(cfg) or ControlFunction.zero(base.T)
    problem = ControlProblem(base, scost)

    if mode == "eval":
        psi_T = problem.forward(u).states[-1]
        state_term = problem.state_term(psi_T)
        penalty = scost.kappa * control_h10_sq(u)
        value = state_term + penalty
        print(f"I(u) = {value!r} (state term {state_term!r}, penalty {penalty!r})")
        _write_lines(out / "control_eval.csv", [
            "value,state_term,penalty,kappa",
            ",".join(_fmt(x) for x in (value, state_term, penalty, scost.kappa)),
        ])
    elif mode == "gradcheck":
        rng = np.random.default_rng(cfg.get("gradcheck.seed", 0))
        pairs = cfg.get("gradcheck.pairs", 5)
        delta = cfg.get("gradcheck.delta", 1e-4)
        lines = ["index,adjoint,fd,rel_error"]
        worst = 0.0
        for i in range(pairs):
            u_i = _random_control(base.T, 4, rng)
            h_i = _random_control(base.T, 3, rng)
            dd = directional_derivative(u_i, h_i, scost, base, problem=problem)
            fd = (problem.value(control_add(u_i, h_i, delta))
                  - problem.value(control_add(u_i, h_i, -delta))) / (2.0 * delta)
            rel = abs(dd - fd) / max(abs(fd), 1e-300)
            worst = max(worst, rel)
            lines.append(f"{i},{_fmt(dd)},{_fmt(fd)},{_fmt(rel)}")
        _write_lines(out / "gradcheck.csv", lines)
        print(f"gradcheck: {pairs} pairs, max relative error {worst!r}")
    elif mode == "search":
        K = modes if modes is not None else cfg.get("search.modes", 1)
        L = levels if levels is not None else cfg.get("search.levels", 4)
        result = fourier_control_search(scost, base, K, grid_levels=L)
        lines = ["k,a_k"]
        for k, a in enumerate(result.coefficients, start=1):
            lines.append(f"{k},{_fmt(a)}")
        lines.append(f"# baseline={_fmt(result.baseline)} best={_fmt(result.best_value)} "
                     f"evaluations={result.evaluations}")
        _write_lines(out / "search.csv", lines)
        print(f"search: baseline {result.baseline!r}, best {result.best_value!r}, "
              f"{result.evaluations} evaluations")
    else:
        raise ConfigError(f"unknown control mode {mode!r}")
    return out


# -- entry point --------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(prog="solver",
                                     description="Truncated-cube Schrodinger/Hartree solver")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="path to a key-value config file")
    common.add_argument("--stencil", choices=("paper", "compact"), default=None)
    common.add_argument("--outdir", default=None, help="override output.directory")

    p_ev = sub.add_parser("evolve", parents=[common], help="run one evolution")
    p_ev.add_argument("--export-matrix", default=None, metavar="PATH",
                      help="write the folded operator as 'row col re im' lines")

    p_sw = sub.add_parser("sweep", parents=[common], help="convergence sweep")
    p_sw.add_argument("--param", required=True, choices=("tau", "h", "R", "epsilon"))
    p_sw.add_argument("--values", required=True,
                      help="comma-separated positive monotone values")
    p_sw.add_argument("--ref", default=None, type=float,
                      help="reference value (default: R->16, h/epsilon->min/2)")

    p_ct = sub.add_parser("control", parents=[common], help="control functional tools")
    p_ct.add_argument("--mode", required=True, choices=("eval", "gradcheck", "search"))
    p_ct.add_argument("--modes", type=int, default=None, help="sine mode count (search)")
    p_ct.add_argument("--levels", type=int, default=None, help="dyadic levels (search)")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "evolve":
            run_evolve(args.config, stencil=args.stencil,
                       export_matrix=args.export_matrix, outdir=args.outdir)
        elif args.command == "sweep":
            values = [float(v) for v in args.values.split(",") if v.strip()]
            run_sweep(args.config, args.param, values, ref=args.ref,
                      stencil=args.stencil, outdir=args.outdir)
        elif args.command == "control":
            run_control(args.config, args.mode, modes=args.modes,
                        levels=args.levels, stencil=args.stencil, outdir=args.outdir)
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except UnsupportedModeError as exc:
        print(f"unsupported mode: {exc}", file=sys.stderr)
        return 4
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
