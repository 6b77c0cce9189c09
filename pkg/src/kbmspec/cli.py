"""Batch command-line front end.

Every subcommand produces one table.  CSV has a header row and values
formatted with 17 significant digits; JSON wraps the same rows as
``{"command": ..., "parameters": ..., "rows": [...]}``.

Exit status: 0 success, 2 invalid input, 3 hypothesis violation,
4 numerical failure (including a ``--verify`` bound violation).  Failures
print one line ``ERROR <CODE>: <detail>`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import perturbation, semigroup, spectral, surface
from .errors import InvalidInputError, KBMError, NumericalError
from .rep_core import coupling, default_window, parse_representation

COMMANDS = ("rep-info", "spectrum", "trajectory", "perturb", "resolvent",
            "semigroup", "decompose", "equilibrium")


class BoundViolation(NumericalError):
    code = "BOUND_VIOLATION"


def _floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InvalidInputError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _complexes(text) -> list[complex]:
    if isinstance(text, list):
        items = [str(v) for v in text]
    else:
        items = [v for v in str(text).split(",") if v.strip()]
    try:
        return [complex(v.replace(" ", "").replace("i", "j")) for v in items]
    except ValueError:
        raise InvalidInputError(f"expected complex numbers like 0.5+2j, got {text!r}") from None


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(f"{float(v):.17g}")
        return v if math.isfinite(v) else str(v)
    return v


# --------------------------------------------------------------------------
# subcommands: each returns (columns, rows, checks)
# checks: list of (description, ok)
# --------------------------------------------------------------------------


def cmd_rep_info(a):
    rep = parse_representation(a.rep)
    rows = [["casimir", "", rep.casimir]]
    if not rep.is_trivial:
        rows.append(["convergence_radius", "", perturbation.convergence_radius(rep)])
        win = default_window(rep, 2 * a.kmax + 1) if rep.is_continuous else default_window(rep, a.kmax)
        for k in range(win.kmin, win.kmax):
            rows.append(["coupling", k, coupling(rep, k)])
    return ["quantity", "k", "value"], rows, []


def _window(rep, size):
    return default_window(rep, size) if size else None


def cmd_spectrum(a):
    rep = parse_representation(a.rep)
    g = spectral.generator(rep, a.x, default_window(rep, a.size))
    res = spectral.eigen_spectrum(g)
    rows = [[i, v.real, v.imag] for i, v in enumerate(res.eigenvalues)]
    return ["index", "re", "im"], rows, [("residual_bound < 1e-8", res.residual_bound < 1e-8)]


def cmd_trajectory(a):
    if a.eta is not None:
        target = float(a.eta)
    elif a.rep:
        target = parse_representation(a.rep)
    else:
        raise InvalidInputError("trajectory needs --eta or --rep")
    curve = perturbation.trajectory(target, _floats(a.gamma), tol=a.tol)
    rows = [[g, v, b, d] for g, v, b, d in zip(curve.gamma_grid, curve.values, curve.bound, curve.deviation)]
    checks = [(f"|lambda - eta| <= bound at gamma={g:.6g}", d <= b) for g, _, b, d in rows]
    return ["gamma", "lambda", "bound", "deviation"], rows, checks


def cmd_perturb(a):
    rep = parse_representation(a.rep)
    win = default_window(rep, a.size)
    series = perturbation.taylor_coefficients(rep, a.order, win)
    rows = [["coefficient", n, "", c, ""] for n, c in enumerate(series.coefficients)]
    checks = []
    for x in _floats(a.x) if a.x is not None else []:
        mu = spectral.low_eigenvalue(rep, x, win)
        dev = abs(mu - series(x))
        bound = perturbation.taylor_error_bound(series, x, series.order)
        rows.append(["envelope", series.order, x, dev, bound])
        checks.append((f"taylor remainder within bound at x={x:.6g}", dev <= bound))
    return ["kind", "n", "x", "value", "bound"], rows, checks


def _resolvent_bound(rep, zeta, x):
    """A priori resolvent bound, or nan outside its hypothesis range."""
    if zeta.real > 0.5:
        return math.nan
    if rep.is_continuous:
        r = perturbation.convergence_radius(rep)
        if abs(zeta) < 0.5 or abs(x) >= r:
            return math.nan
        return 1.0 / abs(zeta) / (1.0 - abs(x) / r)
    if rep.is_discrete:
        n = rep.kind.n
        if abs(x) >= perturbation.DISCRETE_RADIUS:
            return math.nan
        return 1.0 / abs(zeta - n * n) / (1.0 - abs(x) * math.sqrt(32.0))
    return math.nan


def cmd_resolvent(a):
    rep = parse_representation(a.rep)
    win = default_window(rep, a.size)
    spec = spectral.eigen_spectrum(spectral.generator(rep, a.x, win))
    rows, checks = [], []
    for z in _complexes(a.zeta):
        norm = spectral.resolvent_norm(rep, z, a.x, win, spectrum=spec)
        bound = _resolvent_bound(rep, z, a.x)
        rows.append([z.real, z.imag, a.x, norm, bound])
        if math.isfinite(bound):
            checks.append((f"resolvent bound at zeta={z}", norm <= bound * (1 + 1e-12)))
    return ["zeta_re", "zeta_im", "x", "norm", "bound"], rows, checks


def cmd_semigroup(a):
    rep = parse_representation(a.rep)
    win = default_window(rep, a.size)
    rng = np.random.default_rng(a.seed)
    u = rng.normal(size=(win.size, a.samples)) + 1j * rng.normal(size=(win.size, a.samples))
    u /= np.linalg.norm(u, axis=0)
    rows, checks = [], []
    for t in _floats(a.t):
        defect, bound = semigroup.decay_defect(rep, a.x, t, u, win)
        worst = float(np.max(defect))
        rows.append([t, worst, float(np.max(bound))])
        checks.append((f"decay defect within bound at t={t:.6g}", bool(np.all(defect <= bound))))
    return ["t", "defect", "bound"], rows, checks


def _surface(a):
    return surface.SurfaceData.load(a.surface) if a.surface else surface.sample_surface()


def _short_name(rep) -> str:
    """``pi+2n`` / ``pi-2n`` for discrete series, otherwise the series name."""
    if rep.is_discrete:
        sign = "+" if rep.kind.n == rep.kmin else "-"
        return f"pi{sign}{2 * rep.kind.n}"
    return rep.label.split("(")[0]


def cmd_decompose(a):
    surf = _surface(a)
    reg = surface.build_registry(surf, a.eta_max, a.n_max)
    rows = []
    for i, e in enumerate(reg.entries):
        kind = type(e.rep.kind).__name__
        param = getattr(e.rep.kind, "s", getattr(e.rep.kind, "n", ""))
        rows.append([i, _short_name(e.rep), kind, param, e.rep.casimir,
                     "" if e.eta is None else e.eta, e.multiplicity])
    return ["entry", "name", "kind", "param", "casimir", "eta", "multiplicity"], rows, []


def cmd_equilibrium(a):
    surf = _surface(a)
    reg = surface.build_registry(surf, a.eta_max, a.n_max)
    if not a.section:
        raise InvalidInputError("equilibrium needs --section")
    f = surface.SectionCoefficients.load(a.section)
    rows, checks = [], []
    for t in _floats(a.t):
        res = surface.equilibrium_expansion(reg, f, a.gamma, t, a.epsilon, a.C)
        rows.append([t, res.actual_residual, res.residual_bound])
        checks.append((f"residual within bound at t={t:.6g}", res.actual_residual <= res.residual_bound))
    return ["t", "actual_residual", "residual_bound"], rows, checks


HANDLERS = {
    "rep-info": cmd_rep_info, "spectrum": cmd_spectrum, "trajectory": cmd_trajectory,
    "perturb": cmd_perturb, "resolvent": cmd_resolvent, "semigroup": cmd_semigroup,
    "decompose": cmd_decompose, "equilibrium": cmd_equilibrium,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kbmspec", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option values; command-line flags win")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("-o", "--output", help="write here instead of stdout")
    common.add_argument("--verify", action="store_true", default=None,
                        help="exit with status 4 if any value exceeds its bound")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_, argument_default=argparse.SUPPRESS)

    p = add("rep-info", "Casimir, radius and ladder coefficients")
    p.add_argument("--rep")
    p.add_argument("--kmax", type=int)

    p = add("spectrum", "eigenvalues of the truncated generator")
    p.add_argument("--rep")
    p.add_argument("--x", type=float)
    p.add_argument("--size", type=int)

    p = add("trajectory", "eigenvalue branch against gamma with its envelope")
    p.add_argument("--eta", type=float)
    p.add_argument("--rep")
    p.add_argument("--gamma")
    p.add_argument("--tol", type=float)

    p = add("perturb", "Taylor coefficients and remainder envelopes")
    p.add_argument("--rep")
    p.add_argument("--order", type=int)
    p.add_argument("--x")
    p.add_argument("--size", type=int)

    p = add("resolvent", "resolvent norms and their bounds")
    p.add_argument("--rep")
    p.add_argument("--x", type=float)
    p.add_argument("--zeta")
    p.add_argument("--size", type=int)

    p = add("semigroup", "decay defect against the decay bound")
    p.add_argument("--rep")
    p.add_argument("--x", type=float)
    p.add_argument("--t")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--size", type=int)

    p = add("decompose", "representation registry of a surface")
    p.add_argument("--surface", help="surface JSON; default: bundled synthetic genus-2 sample")
    p.add_argument("--eta-max", type=float, dest="eta_max")
    p.add_argument("--n-max", type=int, dest="n_max")

    p = add("equilibrium", "equilibrium expansion residuals")
    p.add_argument("--surface")
    p.add_argument("--section")
    p.add_argument("--eta-max", type=float, dest="eta_max")
    p.add_argument("--n-max", type=int, dest="n_max")
    p.add_argument("--gamma", type=float)
    p.add_argument("--t")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--C", type=float)
    return parser


DEFAULTS = {
    "format": "csv", "output": None, "verify": False, "rep": None, "kmax": 4, "x": 0.0,
    "size": 65, "eta": None, "gamma": None, "tol": 1e-12, "order": 4, "zeta": None,
    "t": "1,2,4,8,16", "samples": 100, "seed": 0, "surface": None, "section": None,
    "eta_max": 10.0, "n_max": surface.DISCRETE_N_MAX, "epsilon": None, "C": None,
}
REQUIRED = {
    "rep-info": ("rep",), "spectrum": ("rep",), "trajectory": ("gamma",),
    "perturb": ("rep",), "resolvent": ("rep", "zeta"), "semigroup": ("rep",),
    "decompose": (), "equilibrium": ("gamma", "epsilon", "C", "section"),
}


def resolve_config(argv=None) -> argparse.Namespace:
    """Defaults < config file < command line."""
    ns = build_parser().parse_args(argv)
    values = dict(DEFAULTS)
    config = getattr(ns, "config", None)
    if config:
        try:
            loaded = json.loads(Path(config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read config {config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise InvalidInputError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    values.update({k: v for k, v in vars(ns).items() if v is not None})
    values["command"] = ns.command
    for key in REQUIRED[ns.command]:
        if values.get(key) is None:
            raise InvalidInputError(f"{ns.command} requires --{key.replace('_', '-')}")
    return argparse.Namespace(**values)


def render(command, params, columns, rows, fmt_name) -> str:
    if fmt_name == "json":
        payload = {
            "command": command,
            "parameters": {k: _jsonable(v) for k, v in sorted(params.items())},
            "columns": columns,
            "rows": [{c: _jsonable(v) for c, v in zip(columns, row)} for row in rows],
        }
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = resolve_config(argv)
        columns, rows, checks = HANDLERS[cfg.command](cfg)
        params = {k: v for k, v in vars(cfg).items()
                  if k not in ("command", "output", "format", "verify", "config")}
        text = render(cfg.command, params, columns, rows, cfg.format)
        if cfg.output:
            Path(cfg.output).write_text(text)
        else:
            stdout.write(text)
        if cfg.verify:
            failed = [d for d, ok in checks if not ok]
            if failed:
                raise BoundViolation(f"{len(failed)} bound violation(s): {failed[0]}")
    except KBMError as exc:
        stderr.write(f"ERROR {exc.code}: {exc}\n")
        return exc.exit_status
    except SystemExit as exc:  # argparse usage errors
        return 2 if exc.code else 0
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
