"""Command line front end.

    shadowkit <command> --config <file> [--key=value ...]

The config file is flat ``key=value`` lines ('#' comments and blank lines
allowed); later ``--key=value`` arguments override it.  Output locations
resolve as: $SHADOWKIT_OUT if set, else the ``out_dir`` key, else the
current directory.  All emitted files are byte-deterministic for a fixed
configuration.

Exit codes: 0 success, 1 configuration problems, 2 violated model
preconditions, 3 solver failures.
"""
from __future__ import annotations

import argparse
import math
import os
import re
import sys

import numpy as np

from . import analytic, continuation, layer as layer_mod
from .discretize import State, make_grid
from .eigen import stability_spectrum
from .exceptions import MODEL_ERRORS, SOLVER_ERRORS, ConfigError, RequiresB1Zero
from .model import Params, admissible, constant_state
from .serialize import write_csv, write_json

__all__ = ["main", "run"]

_PARAM_KEYS = ("a1", "b1", "c1", "a2", "b2", "c2", "L")


def _parse_config_file(path: str) -> dict[str, str]:
    try:
        with open(path) as f:
            lines = f.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out: dict[str, str] = {}
    for i, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"{path}:{i}: empty key")
        out[key] = value
    return out


class _Cfg:
    """Typed access to the merged config; records everything consumed so the
    resolved values (defaults included) can be embedded in output files."""

    def __init__(self, raw: dict[str, str]):
        self.raw = dict(raw)
        self.resolved: dict = {}

    def _take(self, key, conv, default, required):
        if key in self.raw:
            text = self.raw.pop(key)
            try:
                val = conv(text)
            except ValueError as exc:
                raise ConfigError(f"key {key}: cannot parse {text!r}") from exc
        elif required:
            raise ConfigError(f"missing required key {key}")
        else:
            val = default
        self.resolved[key] = val
        return val

    def f(self, key, default=None, required=False) -> float:
        return self._take(key, float, default, required)

    def i(self, key, default=None, required=False) -> int:
        return self._take(key, int, default, required)

    def s(self, key, default=None, required=False) -> str:
        return self._take(key, str, default, required)

    def reject_unknown(self):
        if self.raw:
            names = ", ".join(sorted(self.raw))
            raise ConfigError(f"unknown config keys: {names}")


def _params(cfg: _Cfg) -> Params:
    vals = {k: cfg.f(k, required=(k != "L"), default=1.0) for k in _PARAM_KEYS}
    try:
        return Params(**vals)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _out_dir(cfg: _Cfg) -> str:
    d = cfg.s("out_dir", default=".")
    env = os.environ.get("SHADOWKIT_OUT")
    if env:
        d = env
    # the destination is run plumbing, not experiment configuration: keep it
    # out of the provenance header so identical configs give identical bytes
    cfg.resolved.pop("out_dir", None)
    os.makedirs(d, exist_ok=True)
    return d


# --- commands ------------------------------------------------------------------


def _cmd_analyze(cfg: _Cfg) -> list[str]:
    P = _params(cfg)
    x0 = cfg.f("x0", default=None)
    out = _out_dir(cfg)
    cfg.reject_unknown()

    adm = admissible(P)
    report: dict = {
        "admissibility": {
            "ordering_4": adm.ordering_4,
            "positivity_13": adm.positivity_13,
            "lambda_window": list(adm.lambda_window),
        }
    }
    cs = constant_state(P)  # raises OrderingViolated -> exit 2
    report["constant_state"] = {"v_bar": cs.v_bar, "lambda_bar": cs.lambda_bar}
    report["bifurcation_eps"] = [analytic.bifurcation_eps(k, P) for k in range(1, 9)]
    report["mu_dot"] = [analytic.mu_dot(k, P) for k in range(1, 9)]

    try:
        pc = analytic.pitchfork_coeffs(1, P)
        chart = analytic.sign_chart(P)
        pitchfork = {
            "K1": pc.K1,
            "K2": pc.K2,
            "lambda2_bar": pc.lambda2_bar,
            "int_phi2": pc.int_phi2,
            "int_phi2_cos2k": pc.int_phi2_cos2k,
            "t": pc.t,
            "K2_projection": analytic.pitchfork_k2_projection(1, P),
            "chart": {
                "alpha": chart.alpha,
                "beta": chart.beta,
                "gamma": chart.gamma,
                "regime": chart.regime,
                "roots_in_window": list(chart.roots_in_window),
            },
        }
    except RequiresB1Zero:
        pitchfork = None
    report["pitchfork"] = pitchfork

    targets = None
    if x0 is not None:
        tg = analytic.layer_targets(x0, P)
        targets = {
            "x1": tg.x1,
            "x2": tg.x2,
            "v2_limit": tg.v2_limit,
            "lambda0_bar": tg.lambda0_bar,
        }
    report["layer_targets"] = targets

    if P.b1 == 0.0:
        lam_star = analytic.maxwell_lambda(P)
        report["maxwell"] = {
            "lambda_star": lam_star,
            "gap_at_lambda_star": analytic.maxwell_gap(lam_star, P),
        }
    else:
        report["maxwell"] = None

    path = os.path.join(out, "analysis.json")
    write_json(path, report, cfg.resolved)
    return [path]


def _cmd_detect(cfg: _Cfg) -> list[str]:
    P = _params(cfg)
    eps_lo = cfg.f("eps_lo", required=True)
    eps_hi = cfg.f("eps_hi", required=True)
    k_max = cfg.i("k_max", default=3)
    n = cfg.i("n", default=800)
    out = _out_dir(cfg)
    cfg.reject_unknown()

    found = continuation.detect_bifurcations(P, (eps_lo, eps_hi), k_max, n=n)
    path = os.path.join(out, "bifurcations.csv")
    write_csv(path, ["k", "eps"], [[k, e] for k, e in found], cfg.resolved)
    return [path]


def _cmd_branch(cfg: _Cfg) -> list[str]:
    P = _params(cfg)
    k = cfg.i("k", required=True)
    n = cfg.i("n", default=400)
    s_max = cfg.f("s_max", default=0.05)
    step = cfg.f("step", default=5e-3)
    eps_grid_tol = cfg.f("eps_grid_tol", default=1e-3)
    write_profiles = cfg.i("write_profiles", default=0)
    out = _out_dir(cfg)
    cfg.reject_unknown()

    plus, minus = continuation.branch_from_bifurcation(
        k, P, eps_grid_tol=eps_grid_tol, s_max=s_max, step=step, n=n
    )
    merged = continuation.merge_halves(plus, minus)
    cols, rows = continuation.branch_table(merged)
    path = os.path.join(out, "branch.csv")
    write_csv(path, cols, rows, cfg.resolved)
    written = [path]
    if write_profiles > 0:
        # every write_profiles-th branch row, file name keyed by the row index
        for i in range(0, len(merged.points), write_profiles):
            pt = merged.points[i]
            ppath = os.path.join(out, f"profile_{i:04d}.csv")
            write_csv(
                ppath,
                ["x", "v"],
                np.column_stack([merged.grid.nodes, pt.state.v]).tolist(),
                cfg.resolved,
            )
            written.append(ppath)
    return written


def _cmd_stability(cfg: _Cfg) -> list[str]:
    P = _params(cfg)
    eps = cfg.f("eps", required=True)
    n = cfg.i("n", default=200)
    out = _out_dir(cfg)
    cfg.reject_unknown()

    cs = constant_state(P)
    grid = make_grid(n, P.L)
    S = State(v=np.full(n + 1, cs.v_bar), lam=cs.lambda_bar, grid=grid)
    vals = stability_spectrum(S, eps, P)
    path = os.path.join(out, "spectrum.csv")
    write_csv(path, ["re", "im"], [[v.real, v.imag] for v in vals], cfg.resolved)
    return [path]


def _cmd_maxwell(cfg: _Cfg) -> list[str]:
    P = _params(cfg)
    lo_default = P.a2 / P.b2
    hi_default = (P.a2 + P.c2) ** 2 / (4.0 * P.b2 * P.c2)
    lam_lo = cfg.f("lambda_lo", default=lo_default)
    lam_hi = cfg.f("lambda_hi", default=hi_default)
    m = cfg.i("m_lambda", default=41)
    out = _out_dir(cfg)
    cfg.reject_unknown()

    lams = np.linspace(lam_lo, lam_hi, m)
    rows = [[lam, analytic.maxwell_gap(lam, P)] for lam in lams]
    csv_path = os.path.join(out, "maxwell.csv")
    write_csv(csv_path, ["lambda", "gap"], rows, cfg.resolved)
    lam_star = analytic.maxwell_lambda(P)
    json_path = os.path.join(out, "maxwell.json")
    write_json(
        json_path,
        {
            "lambda_star": lam_star,
            "gap_at_lambda_star": analytic.maxwell_gap(lam_star, P),
            "lambda_window": [lo_default, hi_default],
        },
        cfg.resolved,
    )
    return [csv_path, json_path]


def _cmd_layer(cfg: _Cfg) -> list[str]:
    P = _params(cfg)
    x0 = cfg.f("x0", required=True)
    eps = cfg.f("eps", required=True)
    n = cfg.i("n", default=None)
    out = _out_dir(cfg)
    cfg.reject_unknown()

    rep = layer_mod.layer_solve(x0, eps, P, n=n)
    grid = rep.state.grid
    report = {
        "lambda_eps": rep.lambda_eps,
        "layer_x": rep.layer_x,
        "sup_dev": rep.sup_dev,
        "maxwell_gap": rep.maxwell_gap_at_lambda0,
        "eps": rep.eps,
        "x0": rep.x0,
        "n": grid.n,
        "targets": {
            "x1": rep.targets.x1,
            "x2": rep.targets.x2,
            "v2_limit": rep.targets.v2_limit,
            "lambda0_bar": rep.targets.lambda0_bar,
        },
    }
    json_path = os.path.join(out, "layer_report.json")
    write_json(json_path, report, cfg.resolved)

    if rep.recomposed is not None:
        V = rep.recomposed.V_eps
        G = layer_mod.residual_G(rep.recomposed, rep.recomposed.lam, P).profile
    else:
        V = np.full(grid.n + 1, math.nan)
        G = np.full(grid.n + 1, math.nan)
    csv_path = os.path.join(out, "layer_profile.csv")
    write_csv(
        csv_path,
        ["x", "v", "V_eps", "G_eps"],
        np.column_stack([grid.nodes, rep.state.v, V, G]).tolist(),
        cfg.resolved,
    )
    return [json_path, csv_path]


_COMMANDS = {
    "analyze": _cmd_analyze,
    "detect": _cmd_detect,
    "branch": _cmd_branch,
    "stability": _cmd_stability,
    "maxwell": _cmd_maxwell,
    "layer": _cmd_layer,
}

_OVERRIDE_RE = re.compile(r"^--([A-Za-z0-9_]+)=(.*)$")


def run(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="shadowkit", add_help=True)
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True)
    args, extra = parser.parse_known_args(argv)

    try:
        raw = _parse_config_file(args.config)
        for item in extra:
            m = _OVERRIDE_RE.match(item)
            if not m:
                raise ConfigError(f"override {item!r} is not --key=value")
            raw[m.group(1)] = m.group(2)
        cfg = _Cfg(raw)
        written = _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except MODEL_ERRORS as exc:
        print(f"model precondition violated: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"model precondition violated: {exc}", file=sys.stderr)
        return 2
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(f"wrote {path}")
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
