"""Command-line front end: run configs, summarize stores, replicate figures.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 a CounterexampleFound verdict was recorded.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigInvalid, ModuleError, NumericalFailure, StoreCorrupt
from .records import ExperimentRecord, Status
from .store import ResultStore, decimal, report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_COUNTEREXAMPLE = 4
DEFAULT_STORE = "polylab-results"
CURVE_POINTS = 401

FIGURES = {
    "fig1a": {"module": "snake", "mu": "semicircle", "n": 8, "k": 1},
    "fig1b": {"module": "snake", "mu": "parabola", "n": 4, "k": 1},
    "fig1c": {"module": "snake", "mu": "sqrt2x2x1", "n": 8, "k": 1},
    "fig1d": {"module": "snake", "mu": "absoneminus2x2", "n": 8, "k": 1},
    "fig2": {"module": "shadow", "experiment": "figure", "nmax": 30},
}


# -- config parsing helpers ------------------------------------------------
def parse_complex(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    raise ValueError(f"cannot read {v!r} as a complex number")


def parse_grid(v) -> list[float]:
    """'start:stop:step' (inclusive of stop), a number, or a list of numbers."""
    if isinstance(v, (int, float)):
        return [float(v)]
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    if isinstance(v, str) and ":" in v:
        start, stop, step = (float(t) for t in v.split(":"))
        if step <= 0 or stop < start:
            raise ValueError(f"bad grid {v!r}")
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [float(v)]


def parse_degrees(v) -> list[int]:
    """'a..b' (step 4) or 'a..b:step', an integer, or a list of integers."""
    if isinstance(v, int):
        return [v]
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    m = re.fullmatch(r"(\d+)\.\.(\d+)(?::(\d+))?", str(v))
    if not m:
        return [int(v)]
    a, b, step = int(m[1]), int(m[2]), int(m[3] or 4)
    return list(range(a, b + 1, step))


# -- schemas ---------------------------------------------------------------
NUM = (int, float)
ANY = object

SCHEMAS = {
    "karp": {"experiment": str, "family": str, "n": int, "r": int, "seed": int, "which": str, "values": list,
             "n_max": int, "families": list, "seeds": int, "d": int, "m_max": int, "bits": int},
    "snake": {"mu": str, "n": int, "k": int, "report": str, "grid_size": int},
    "shadow": {"experiment": str, "roots": list, "coeffs": list, "nmax": int, "raster": int,
               "alpha_samples": int},
    "charges": {"experiment": str, "positions": list, "charges": list, "s": NUM, "box": list, "seeds": int,
                "certify": bool, "n": int, "configs": int, "seed": int, "d": int, "positive": bool},
    "planarortho": {"field": str, "c": NUM, "a": ANY, "n": ANY, "digits": int, "bits": int},
    "riesz": {"d": int, "s": NUM, "annulus": list, "method": str, "shells": int, "N": int, "restarts": int,
              "iterations": int, "seed": int},
    "twop": {"op": str, "s": ANY, "nodes": int, "n": ANY, "degree": int},
}


def validate(config: dict) -> dict:
    """Check module name and key types; returns a copy without the module key.

    Raises
    ------
    ConfigInvalid
        On an unknown module, an unknown key or a value of the wrong type.
    """
    if not isinstance(config, dict):
        raise ConfigInvalid("config must be a JSON object")
    module = config.get("module")
    if module not in SCHEMAS:
        raise ConfigInvalid(f"unknown module {module!r}; choose from {sorted(SCHEMAS)}")
    schema = SCHEMAS[module]
    body = {k: v for k, v in config.items() if k != "module"}
    for key, value in body.items():
        if key not in schema:
            raise ConfigInvalid(f"{module}: unknown key {key!r}")
        kind = schema[key]
        if kind is ANY:
            continue
        if isinstance(value, bool) and kind is not bool:
            raise ConfigInvalid(f"{module}.{key}: expected {kind}, got a boolean")
        if not isinstance(value, kind):
            raise ConfigInvalid(f"{module}.{key}: expected {kind}, got {type(value).__name__}")
    return body


# -- runners ---------------------------------------------------------------
@dataclass
class Outcome:
    """Module record plus a callback that writes side files for the stored id."""

    record: ExperimentRecord
    write: Callable[[ResultStore, str], list] | None = None


def _verdict_rows(rec: ExperimentRecord):
    for v in rec.verdicts:
        yield v.conjecture_tag, v.status.value, json.dumps(v.to_dict()["detail"], sort_keys=True)


def _verdict_writer(rec: ExperimentRecord):
    def write(store, rid):
        return [store.write_csv(rid, "verdicts.csv", ["conjecture_tag", "status", "detail"], _verdict_rows(rec))]
    return write


def prepare_karp(cfg: dict):
    from . import karp
    experiment = cfg.get("experiment", "single")
    bits = cfg.get("bits")
    which = cfg.get("which", "C1")
    r = cfg.get("r", 2)
    if experiment == "single":
        seq = karp.family_sequence(cfg.get("family", "binomial"), cfg.get("n", 6), cfg.get("seed", 0),
                                   cfg.get("values"), bits)
        run = lambda: karp.conjecture_verdict(seq, r, which)  # noqa: E731
    elif experiment == "sweep":
        n_max = cfg.get("n_max", 12)
        run = lambda: karp.conjecture_sweep(which, range(2, n_max + 1), r,  # noqa: E731
                                            tuple(cfg.get("families", ["binomial", "random_pf"])),
                                            range(cfg.get("seeds", 3)), bits)
    elif experiment == "narayana":
        run = lambda: karp.narayana_scan(cfg.get("d", 2), cfg.get("m_max", 6), bits)  # noqa: E731
    else:
        raise ConfigInvalid(f"karp: unknown experiment {experiment!r}")

    def execute():
        rec = run()
        return Outcome(rec, _verdict_writer(rec))
    return execute


def prepare_snake(cfg: dict):
    from .snake import Majorant, equality_probe, solve_snake
    mu = Majorant.builtin(cfg.get("mu", "semicircle"))
    n, k = cfg.get("n", 8), cfg.get("k", 1)
    if cfg.get("report", "equality") != "equality":
        raise ConfigInvalid("snake: only report=equality is available")
    grid_size = cfg.get("grid_size", 128)

    def execute():
        rec = equality_probe(mu, n, k, grid_size)
        sr = solve_snake(mu, n)

        def write(store, rid):
            x = np.linspace(-1, 1, CURVE_POINTS)
            omega = np.polynomial.chebyshev.chebval(x, sr.cheb)
            m = mu(x)
            files = [store.write_csv(rid, "snake.csv", ["x", "omega", "mu", "minus_mu"], zip(x, omega, m, -m))]
            pts = [(p.x, np.polynomial.chebyshev.chebval(p.x, sr.cheb)) for p in sr.points]
            files.append(store.write_csv(rid, "alternation.csv", ["x", "omega"], pts))
            files.append(store.write_plot_script(rid, "snake.plot.json", f"snake polynomial, {mu.name}, n={n}", [
                {"kind": "line", "csv": "snake.csv", "x": "x", "y": "omega", "label": "omega"},
                {"kind": "line", "csv": "snake.csv", "x": "x", "y": "mu", "label": "mu", "style": "dashed"},
                {"kind": "line", "csv": "snake.csv", "x": "x", "y": "minus_mu", "label": "-mu", "style": "dashed"},
                {"kind": "scatter", "csv": "alternation.csv", "x": "x", "y": "omega", "label": "alternation"},
            ]))
            return files + _verdict_writer(rec)(store, rid)
        return Outcome(rec, write)
    return execute


def _shadow_layers(store, rid, prefix, cloud, curves, roots):
    files = [
        store.write_csv(rid, f"{prefix}cloud.csv", ["n", "m", "re", "im"],
                        ((int(n), int(m), z.real, z.imag) for (n, m), z in zip(cloud.labels, cloud.points))),
        store.write_bytes(rid, f"{prefix}raster.pgm", cloud.raster.to_pgm()),
        store.write_csv(rid, f"{prefix}zeros.csv", ["re", "im"], ((z.real, z.imag) for z in roots)),
        store.write_csv(rid, f"{prefix}critical_points.csv", ["re", "im"],
                        ((z.real, z.imag) for z in cloud.critical_points)),
        store.write_csv(rid, f"{prefix}critical_values.csv", ["alpha", "point_re", "point_im", "value_re",
                                                               "value_im"],
                        ((a, z.real, z.imag, v.real, v.imag) for a, z, v in curves.rows())),
    ]
    files.append(store.write_plot_script(rid, f"{prefix}shadow.plot.json", f"shadow {prefix.rstrip('_')}", [
        {"kind": "scatter", "csv": f"{prefix}cloud.csv", "x": "re", "y": "im", "label": "shadow", "style": "red"},
        {"kind": "scatter", "csv": f"{prefix}zeros.csv", "x": "re", "y": "im", "label": "zeros", "style": "black"},
        {"kind": "scatter", "csv": f"{prefix}critical_points.csv", "x": "re", "y": "im",
         "label": "critical points", "style": "green-square"},
    ]))
    return files


def prepare_shadow(cfg: dict):
    from . import shadow
    from .polycore import Polynomial
    experiment = cfg.get("experiment", "single")
    nmax = cfg.get("nmax", 30)
    raster = cfg.get("raster", shadow.DEFAULT_RASTER)
    samples = cfg.get("alpha_samples", shadow.ALPHA_SAMPLES)
    if experiment == "figure":
        def execute():
            panels = shadow.replicate_figure(nmax, raster, alpha_samples=samples)
            rec = ExperimentRecord("shadow", {"figure": "fig2", "nmax": nmax, "raster": raster})
            for name, panel in panels.items():
                sub = panel["record"]
                rec.results[name] = sub.results
                rec.verdicts.extend(sub.verdicts)

            def write(store, rid):
                files = []
                for name, panel in panels.items():
                    files += _shadow_layers(store, rid, f"{name}_", panel["cloud"], panel["curves"],
                                            panel["roots"])
                return files + _verdict_writer(rec)(store, rid)
            return Outcome(rec.finish(), write)
        return execute
    if experiment != "single":
        raise ConfigInvalid(f"shadow: unknown experiment {experiment!r}")
    if ("roots" in cfg) == ("coeffs" in cfg):
        raise ConfigInvalid("shadow: give exactly one of roots or coeffs")
    if "roots" in cfg:
        roots = [parse_complex(z) for z in cfg["roots"]]
        p = Polynomial.from_roots(roots)
    else:
        p = Polynomial.from_coeffs([parse_complex(c) for c in cfg["coeffs"]])

    def execute():
        cloud = shadow.build_shadow(p, nmax, raster)
        curves = shadow.f_alpha_critical_values(p, shadow.default_alpha_grid(p, samples))
        rec = shadow.conjecture1_checks(cloud, curves)

        def write(store, rid):
            return _shadow_layers(store, rid, "", cloud, curves, cloud.base_roots) + _verdict_writer(rec)(store, rid)
        return Outcome(rec, write)
    return execute


def prepare_charges(cfg: dict):
    from . import charges
    experiment = cfg.get("experiment", "sweep" if "n" in cfg else "equilibria")
    if experiment == "sweep":
        def execute():
            rec = charges.maxwell_sweep(cfg.get("n", 4), cfg.get("configs", 100), cfg.get("seed", 0),
                                        cfg.get("d", 3), cfg.get("positive", True))
            return Outcome(rec, _verdict_writer(rec))
        return execute
    if experiment != "equilibria":
        raise ConfigInvalid(f"charges: unknown experiment {experiment!r}")
    if "positions" not in cfg or "charges" not in cfg:
        raise ConfigInvalid("charges: positions and charges are required")
    conf = charges.ChargeConfiguration(cfg["positions"], cfg["charges"], cfg.get("s"))
    box = cfg.get("box")
    if box is not None:
        box = (tuple(box[0]), tuple(box[1]))

    def execute():
        rep = charges.find_equilibria(conf, box, cfg.get("seeds", 8), certify=cfg.get("certify", False))
        rec = ExperimentRecord("charges", {"config": conf.to_dict(), "box": box})
        rec.results = {"report": rep.to_dict()}
        tols = {"newton_tol": charges.NEWTON_TOL}
        if conf.d == 3:
            bound = rep.maxwell_bound
            status = Status.COUNTEREXAMPLE if rep.count > bound else Status.SUPPORTED
            rec.add_verdict("charges.maxwell", status, tols, count=rep.count, bound=bound,
                            complete=bool(rep.certification.get("certified", False)))
        else:
            rec.add_verdict("charges.maxwell", Status.NOT_APPLICABLE, tols, reason="bound is stated for R^3")
        if rep.suspicious_continuum:
            rec.add_verdict("charges.finiteness", Status.HEURISTIC, {"continuum_tol": charges.CONTINUUM_TOL})

        def write(store, rid):
            cols = [f"x{i}" for i in range(conf.d)]
            rows = [list(p.location) + [p.gradient_norm, "/".join(map(str, p.signature))] for p in rep.points]
            return [store.write_csv(rid, "equilibria.csv", cols + ["gradient_norm", "signature"], rows),
                    store.write_csv(rid, "charges.csv", cols + ["charge"],
                                    (list(x) + [q] for x, q in zip(conf.positions, conf.charges)))]
        return Outcome(rec.finish(), write)
    return execute


def prepare_planarortho(cfg: dict):
    from . import planarortho as po
    field = cfg.get("field", "gauss_log")
    if field == "gauss_log":
        v = po.ExternalField.gauss_log(float(cfg.get("c", 1.0)), parse_complex(cfg.get("a", 1.0)))
    elif field == "gaussian":
        v = po.ExternalField.gaussian()
    else:
        raise ConfigInvalid(f"planarortho: unknown field {field!r}")
    ns = parse_degrees(cfg.get("n", list(po.DEFAULT_SWEEP)))
    digits = cfg.get("digits", po.DEFAULT_DIGITS)
    bits = cfg.get("bits", po.DEFAULT_BITS)

    def execute():
        rec = po.zero_measure_sequence(v, ns, digits, bits=bits)

        def write(store, rid):
            clouds = rec.results["clouds"]
            rows = ((n, z.real, z.imag) for n in ns for z in np.asarray(clouds[str(n)], complex))
            disc = rec.results["discrepancy"]
            files = [store.write_csv(rid, "zeros.csv", ["n", "re", "im"], rows),
                     store.write_csv(rid, "discrepancy.csv", ["n_from", "n_to", "transport_distance"],
                                     ((a, b, d) for a, b, d in zip(ns, ns[1:], disc)))]
            files.append(store.write_plot_script(rid, "zeros.plot.json", f"zeros of P_n, {v.name}", [
                {"kind": "scatter", "csv": "zeros.csv", "x": "re", "y": "im", "label": "zeros", "group": "n"}]))
            return files + _verdict_writer(rec)(store, rid)
        return Outcome(rec, write)
    return execute


def prepare_riesz(cfg: dict):
    from . import riesz
    spec = riesz.RieszKernelSpec(float(cfg.get("s", 2.0)), cfg.get("d", 3))
    inner, outer = (float(t) for t in cfg.get("annulus", [0.0, 1.0]))
    if not 0 <= inner < outer:
        raise ConfigInvalid("riesz: annulus must satisfy 0 <= r < R")
    method = cfg.get("method", "qp")
    shells = cfg.get("shells", 200)

    if method == "qp":
        def execute():
            if inner > 0:
                rec = riesz.annulus_experiment(spec, inner, outer, shells)
                sol = riesz.minimize_radial_qp(spec, inner, outer, 2 * shells)
            else:
                sol = riesz.minimize_radial_qp(spec, inner, outer, shells)
                rec = ExperimentRecord("riesz", {"spec": spec.to_dict(), "radius": outer, "n_shells": shells})
                l1 = riesz.l1_to_ball(sol, outer)
                rec.results = {"solution": sol.to_dict(), "l1_to_closed_form": l1}
                rec.add_verdict("riesz.ball_closed_form", Status.SUPPORTED if l1 <= 0.02 else Status.HEURISTIC,
                                {"l1": 0.02}, l1=l1)
                rec.finish()

            def write(store, rid):
                edges = sol.cell_edges()
                rows = [(a, b, m) for a, b, m in zip(edges[:-1], edges[1:], sol.weights)]
                files = [store.write_csv(rid, "density.csv", ["r_lo", "r_hi", "mass"], rows),
                         store.write_csv(rid, "energy.csv", ["energy", "point_mass_inner", "point_mass_outer"],
                                         [(sol.energy, sol.point_mass_inner, sol.point_mass_outer)])]
                return files + _verdict_writer(rec)(store, rid)
            return Outcome(rec, write)
        return execute
    if method == "particles":
        n = cfg.get("N", 400)

        def execute():
            res = riesz.minimize_particles(spec, n, inner, outer, cfg.get("iterations", 300),
                                           cfg.get("restarts", 8), cfg.get("seed", 0))
            rec = ExperimentRecord("riesz", {"spec": spec.to_dict(), "method": "particles", "N": n,
                                             "annulus": [inner, outer]})
            near = res.fraction_near_outer(0.02 * outer)
            rec.results = {"particles": res.to_dict(), "fraction_near_outer": near}
            if spec.surface_case and inner == 0:
                rec.add_verdict("riesz.surface_measure", Status.SUPPORTED if near >= 0.99 else Status.HEURISTIC,
                                {"fraction": 0.99, "width": 0.02}, fraction=near)

            def write(store, rid):
                hist = zip(res.bin_edges[:-1], res.bin_edges[1:], res.histogram)
                return [store.write_csv(rid, "radii_histogram.csv", ["r_lo", "r_hi", "count"], hist),
                        store.write_csv(rid, "energy.csv", ["energy", "gradient_norm"],
                                        [(res.energy, res.gradient_norm)])] + _verdict_writer(rec)(store, rid)
            return Outcome(rec.finish(), write)
        return execute
    raise ConfigInvalid(f"riesz: unknown method {method!r}")


def prepare_twop(cfg: dict):
    from . import twop
    op = cfg.get("op", "f2")
    nodes = cfg.get("nodes", 120)
    if op == "f2":
        s_values = parse_grid(cfg.get("s", "-6:2:0.1"))

        def execute():
            rec = twop.f2_record(s_values, nodes)

            def write(store, rid):
                return [store.write_csv(rid, "f2.csv", f2_header(), f2_rows(rec))] + _verdict_writer(rec)(store, rid)
            return Outcome(rec, write)
        return execute
    if op == "question2":
        ns = parse_degrees(cfg.get("n", 128))
        s = parse_grid(cfg.get("s", 0.0))[0]
        degree = cfg.get("degree", 2)

        def execute():
            rec = twop.question2_record(ns, s, degree, nodes)
            return Outcome(rec, _verdict_writer(rec))
        return execute
    if op == "edge":
        ns = parse_degrees(cfg.get("n", list(twop.gue.EDGE_SWEEP)))
        s = parse_grid(cfg.get("s", -2.0))[0]

        def execute():
            rec = twop.edge_scaling_sweep(ns, s)
            return Outcome(rec, _verdict_writer(rec))
        return execute
    raise ConfigInvalid(f"twop: unknown op {op!r}")


def f2_header():
    return ["s", "f2_direct", "f2_lidskii"] + [f"lambda_{k}" for k in range(1, 9)]


def f2_rows(rec: ExperimentRecord):
    for row in rec.results["rows"]:
        yield [row.s, row.direct, row.lidskii] + list(row.top_eigenvalues)


PREPARE = {"karp": prepare_karp, "snake": prepare_snake, "shadow": prepare_shadow, "charges": prepare_charges,
           "planarortho": prepare_planarortho, "riesz": prepare_riesz, "twop": prepare_twop}


# -- run -----------------------------------------------------------------
@dataclass
class RunResult:
    record: ExperimentRecord
    cached: bool
    files: list
    module_record: ExperimentRecord | None = None


def run_config(config: dict, store_path=DEFAULT_STORE) -> RunResult:
    """Validate, execute and persist one experiment; identical configs return the stored record.

    Raises
    ------
    ConfigInvalid
        If the config fails validation or its parameters are rejected.
    ModuleError
        If the module raised a numerical failure, wrapped with the module name.
    """
    body = validate(config)
    module = config["module"]
    store = ResultStore(store_path)
    rec = ExperimentRecord(module, body)
    cached = store.get(rec.id) if store.exists() else None
    if cached is not None:
        return RunResult(cached, True, [])
    try:
        execute = PREPARE[module](body)
    except ConfigInvalid:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigInvalid(f"{module}: {exc}") from exc
    except NumericalFailure as exc:
        raise ModuleError(module, exc) from exc
    try:
        outcome = execute()
    except ModuleError:
        raise
    except NumericalFailure as exc:
        raise ModuleError(module, exc) from exc
    inner = outcome.record
    rec.results = dict(inner.results)
    rec.results["module_config"] = inner.config
    rec.verdicts = list(inner.verdicts)
    rec.started = inner.started
    rec.finish()
    stored = store.append(rec)
    files = outcome.write(store, stored.id) if outcome.write else []
    return RunResult(stored, False, [str(f) for f in files], inner)


def run(config_path, store_path=DEFAULT_STORE) -> RunResult:
    """Run the JSON config at ``config_path``."""
    try:
        config = json.loads(Path(config_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {config_path}: {exc}") from exc
    return run_config(config, store_path)


def exit_code(result: RunResult) -> int:
    return EXIT_COUNTEREXAMPLE if result.record.has_counterexample else EXIT_OK


def _print_run(result: RunResult, out=sys.stdout):
    rec = result.record
    out.write(f"record {rec.id} ({rec.module}){' [cached]' if result.cached else ''}\n")
    for v in rec.verdicts:
        out.write(f"  {v.conjecture_tag}: {v.status.value}\n")
    for f in result.files:
        out.write(f"  wrote {f}\n")


# -- argument parsing ------------------------------------------------------
def _join_negative_values(argv):
    """Glue '--opt -6:2' into '--opt=-6:2' so argparse does not read the value as a flag."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and re.match(r"^-\d", argv[i + 1]) and tok not in ("--annulus",)):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polylab", description="Numerical experiments on polynomial zeros, "
                                "extremal polynomials, equilibrium measures and Airy-kernel operators.")
    sub = p.add_subparsers(dest="command", required=True)

    def store_arg(sp):
        sp.add_argument("--store", default=DEFAULT_STORE, help="results directory (default: %(default)s)")

    sp = sub.add_parser("run", help="run a JSON experiment config")
    sp.add_argument("config")
    store_arg(sp)

    sp = sub.add_parser("report", help="per-conjecture summary of a store")
    sp.add_argument("store", nargs="?", default=DEFAULT_STORE)
    sp.add_argument("--module", help="only records of this module")
    sp.add_argument("--csv", help="also write the table as CSV to this path")

    sp = sub.add_parser("replicate-figure", help="reproduce a figure's data layers")
    sp.add_argument("figure", choices=sorted(FIGURES))
    sp.add_argument("--n", type=int, help="degree (fig1) or n_max (fig2)")
    store_arg(sp)

    sp = sub.add_parser("karp", help="Toeplitz-Pochhammer conjectures")
    sp.add_argument("--experiment", choices=["single", "sweep", "narayana"], default="single")
    sp.add_argument("--family", default="binomial")
    sp.add_argument("--n", type=int)
    sp.add_argument("--r", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--which", choices=["C1", "C2", "C3"])
    sp.add_argument("--n-max", dest="n_max", type=int)
    sp.add_argument("--d", type=int)
    sp.add_argument("--m-max", dest="m_max", type=int)
    store_arg(sp)

    sp = sub.add_parser("snake", help="snake polynomial and extremal quantities")
    sp.add_argument("--mu", default="semicircle")
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--report", default="equality", choices=["equality"])
    store_arg(sp)

    sp = sub.add_parser("shadow", help="shadow of a polynomial")
    sp.add_argument("--poly", required=True, help="JSON file: a coefficient list or {roots|coeffs: [...]}")
    sp.add_argument("--nmax", type=int, default=30)
    sp.add_argument("--raster", type=int)
    store_arg(sp)

    sp = sub.add_parser("charges", help="equilibria of point charges")
    sp.add_argument("--config", help="JSON file with positions, charges and optional box/seeds")
    sp.add_argument("--sweep", type=int, metavar="N", help="random sweep with N charges")
    sp.add_argument("--configs", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    store_arg(sp)

    sp = sub.add_parser("planarortho", help="planar orthogonal polynomials")
    sp.add_argument("--field", default="gauss_log", choices=["gauss_log", "gaussian"])
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--a", default="1+0i")
    sp.add_argument("--n", default="8..24")
    store_arg(sp)

    sp = sub.add_parser("riesz", help="Riesz equilibrium measures")
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--s", type=float, default=2.0)
    sp.add_argument("--annulus", type=float, nargs=2, metavar=("r", "R"), default=[0.0, 1.0])
    sp.add_argument("--method", choices=["qp", "particles"], default="qp")
    sp.add_argument("--shells", type=int, default=200)
    sp.add_argument("--N", type=int, default=400)
    sp.add_argument("--restarts", type=int, default=8)
    store_arg(sp)

    sp = sub.add_parser("twop", help="Tracy-Widom and GUE kernel experiments")
    mode = sp.add_mutually_exclusive_group(required=True)
    mode.add_argument("--f2", action="store_true", help="F_2 on an s grid, CSV to stdout")
    mode.add_argument("--question2", action="store_true", help="commuting-operator search for K_n")
    mode.add_argument("--edge", action="store_true", help="edge-scaling sweep")
    sp.add_argument("--s", default=None, help="grid start:stop:step or a value")
    sp.add_argument("--nodes", type=int, default=120)
    sp.add_argument("--n", default=None)
    sp.add_argument("--degree", type=int, default=2)
    store_arg(sp)
    return p


def _read_poly(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read polynomial {path}: {exc}") from exc
    if isinstance(data, list):
        return {"coeffs": data}
    if isinstance(data, dict) and set(data) <= {"roots", "coeffs"}:
        return data
    raise ConfigInvalid(f"{path}: expected a coefficient list or an object with roots or coeffs")


def config_from_args(args) -> dict:
    """Translate a module subcommand into a run config."""
    def put(cfg, **kw):
        cfg.update({k: v for k, v in kw.items() if v is not None})
        return cfg

    cmd = args.command
    if cmd == "karp":
        return put({"module": "karp", "experiment": args.experiment}, family=args.family, n=args.n, r=args.r,
                   seed=args.seed, which=args.which, n_max=args.n_max, d=args.d, m_max=args.m_max)
    if cmd == "snake":
        return {"module": "snake", "mu": args.mu, "n": args.n, "k": args.k, "report": args.report}
    if cmd == "shadow":
        return put({"module": "shadow", "nmax": args.nmax, **_read_poly(args.poly)}, raster=args.raster)
    if cmd == "charges":
        if args.sweep is not None:
            return {"module": "charges", "experiment": "sweep", "n": args.sweep, "configs": args.configs,
                    "seed": args.seed}
        if args.config is None:
            raise ConfigInvalid("charges: give --config or --sweep")
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read {args.config}: {exc}") from exc
        return {"module": "charges", "experiment": "equilibria", **data}
    if cmd == "planarortho":
        cfg = {"module": "planarortho", "field": args.field, "n": args.n}
        if args.field == "gauss_log":
            cfg.update(c=args.c, a=args.a)
        return cfg
    if cmd == "riesz":
        cfg = {"module": "riesz", "d": args.d, "s": args.s, "annulus": list(args.annulus), "method": args.method}
        cfg.update({"shells": args.shells} if args.method == "qp" else {"N": args.N, "restarts": args.restarts})
        return cfg
    if cmd == "twop":
        if args.f2:
            return put({"module": "twop", "op": "f2", "nodes": args.nodes}, s=args.s or "-6:2:0.1")
        if args.question2:
            return put({"module": "twop", "op": "question2", "nodes": args.nodes, "degree": args.degree},
                       n=args.n or "128", s=args.s)
        return put({"module": "twop", "op": "edge"}, n=args.n, s=args.s)
    raise ConfigInvalid(f"unknown command {cmd}")


def figure_config(name: str, n: int | None = None) -> dict:
    cfg = dict(FIGURES[name])
    if n is not None:
        cfg["nmax" if cfg["module"] == "shadow" else "n"] = n
    return cfg


def main(argv=None) -> int:
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    try:
        if args.command == "report":
            _, csv_text, text = report(args.store, args.module)
            if args.csv:
                Path(args.csv).write_text(csv_text)
            sys.stdout.write(text)
            return EXIT_OK
        if args.command == "run":
            result = run(args.config, args.store)
        elif args.command == "replicate-figure":
            result = run_config(figure_config(args.figure, args.n), args.store)
        else:
            config = config_from_args(args)
            result = run_config(config, args.store)
            if args.command == "twop" and config["op"] == "f2":
                sys.stdout.write(",".join(f2_header()) + "\n")
                rows = result.record.results["rows"]
                for row in rows:
                    vals = [row["s"], row["direct"], row["lidskii"]] + list(row["top_eigenvalues"]) \
                        if isinstance(row, dict) else [row.s, row.direct, row.lidskii] + list(row.top_eigenvalues)
                    sys.stdout.write(",".join(decimal(v) for v in vals) + "\n")
                return exit_code(result)
        _print_run(result)
        return exit_code(result)
    except (ConfigInvalid, StoreCorrupt) as exc:
        sys.stderr.write(f"polylab: {exc}\n")
        return EXIT_CONFIG
    except (ModuleError, NumericalFailure) as exc:
        sys.stderr.write(f"polylab: numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
