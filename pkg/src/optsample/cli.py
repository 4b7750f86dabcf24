"""Command line harness: designs, recovery runs, rate tables, benchmarks and
the Lipschitz oracle.

Every subcommand builds a JSON config (from ``--config`` and/or flags),
validates it against a versioned schema and runs it. Reports are
pretty-printed JSON and contain no wall time unless ``--timing`` is given,
so equal configs and seeds give byte-identical output.

Exit codes: 0 success, 2 method failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import jsonschema
import numpy as np

from . import leastsq, lipschitz_oracle, multilevel, random_designs, scattered, sparse, subsample, targets
from .model import Domain, Measure, SampledDesign, TrigBasis, make_basis

SCHEMA_VERSION = 1

DESIGN_METHODS = ["greedy", "unweighted", "iid", "christoffel", "conditional", "algorithm3"]
RECOVER_METHODS = DESIGN_METHODS + ["mlmc", "cubes", "sqrtlasso", "central"]

_num_or_inf = {"anyOf": [{"type": "number"}, {"enum": ["inf"]}]}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["version"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "basis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "family": {"enum": ["trig", "legendre", "haar", "custom-tabulated"]},
                "table": {"type": "string"},
                "sigma_decay": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "measure": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"kind": {"enum": ["uniform"]}},
        },
        "method": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": RECOVER_METHODS + ["lipschitz"]},
                "m": {"type": "integer", "minimum": 1},
                "n": {"type": "integer", "minimum": 1},
                "N": {"type": "integer", "minimum": 1},
                "r": {"type": "integer", "minimum": 1},
                "level": {"type": "integer", "minimum": 0},
                "alpha0": {"type": "number"},
                "t": {"type": "number"},
                "theta": {"type": "number"},
                "weight_mode": {"enum": ["min", "max"]},
                "oracle": {"enum": ["christoffel", "grid"]},
                "grid_size": {"type": "integer", "minimum": 1},
                "density": {"enum": ["christoffel", "flat", "optimal"]},
                "smoothness": {"type": "integer", "minimum": 0},
                "ell": {"type": "integer", "minimum": 1},
                "d": {"type": "integer", "minimum": 1, "maximum": 3},
                "oversampling": {"type": "number", "exclusiveMinimum": 0},
                "points": {"enum": ["iid", "equispaced"]},
            },
        },
        "methods": {"type": "array", "items": {"enum": RECOVER_METHODS}},
        "target": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": sorted(targets.TARGET_FAMILIES)},
                "alpha": {"type": "number"},
                "K": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 1},
                "N": {"type": "integer", "minimum": 1},
                "eps": {"type": "number"},
                "sigma_decay": {"type": "number"},
                "seed": {"type": "integer"},
            },
        },
        "seed": {"type": "integer"},
        "p": {"type": "array", "items": _num_or_inf, "minItems": 1},
        "n_grid": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "budgets": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mc": {"type": "integer", "minimum": 1},
                "max_suggestions": {"type": "integer", "minimum": 1},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "csv": {"type": "string"},
                "certificate": {"type": "string"},
                "report": {"type": "string"},
                "plot_data": {"type": "string"},
            },
        },
    },
}


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


METHOD_FAILURES = (
    subsample.OracleExhausted,
    random_designs.RedrawCapExceeded,
    random_designs.RejectionBudgetExceeded,
    sparse.NonConvergence,
    leastsq.IllPosedDesign,
)


# ---------------------------------------------------------------------------
# config assembly


def _p_value(p):
    return math.inf if p == "inf" else float(p)


def _p_key(p):
    return "inf" if math.isinf(p) else repr(float(p))


def load_config(args) -> dict:
    cfg = {"version": SCHEMA_VERSION}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
    method = dict(cfg.get("method", {}))
    if getattr(args, "method", None):
        method["name"] = args.method
    for key in ("m", "n", "N", "r", "level", "alpha0", "t", "theta", "weight_mode", "oracle", "grid_size",
                "density", "smoothness", "ell", "d", "oversampling", "points"):
        val = getattr(args, key, None)
        if val is not None:
            method[key] = val
    if method and "name" not in method and cfg.get("methods") is None and getattr(args, "methods", None):
        method["name"] = args.methods.split(",")[0]
    if method:
        cfg["method"] = method
    if getattr(args, "basis", None) or getattr(args, "table", None) or getattr(args, "sigma_decay", None):
        basis = dict(cfg.get("basis", {}))
        if args.basis:
            basis["family"] = args.basis
        if args.table:
            basis["table"] = args.table
        if args.sigma_decay is not None:
            basis["sigma_decay"] = args.sigma_decay
        cfg["basis"] = basis
    if getattr(args, "target", None):
        cfg["target"] = json.loads(args.target) if args.target.startswith("{") else {"name": args.target}
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "p", None):
        cfg["p"] = [p if p == "inf" else float(p) for p in args.p.split(",")]
    if getattr(args, "n_grid", None):
        cfg["n_grid"] = [int(v) for v in args.n_grid.split(",")]
    if getattr(args, "methods", None) is not None:
        cfg["methods"] = [v for v in args.methods.split(",") if v]
    if getattr(args, "mc_budget", None):
        cfg.setdefault("budgets", {})["mc"] = args.mc_budget
    output = dict(cfg.get("output", {}))
    for key, attr in (("csv", "out"), ("certificate", "cert"), ("report", "report"), ("plot_data", "plot_data")):
        val = getattr(args, attr, None)
        if val:
            output[key] = val
    if output:
        cfg["output"] = output
    env_seed = os.environ.get("OPTSAMPLE_SEED")
    if env_seed not in (None, ""):
        try:
            cfg["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"OPTSAMPLE_SEED must be an integer, got {env_seed!r}") from None
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config: {exc.message}") from None
    return cfg


def _basis(cfg):
    b = cfg.get("basis", {})
    try:
        return make_basis(b.get("family", "trig"), b.get("sigma_decay"), b.get("table"))
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _seed(cfg):
    return cfg.get("seed", 0)


def _mc(cfg):
    return cfg.get("budgets", {}).get("mc", 100_000)


def _require(method, *keys):
    missing = [k for k in keys if k not in method]
    if missing:
        raise ConfigError(f"method {method['name']!r} needs {', '.join(missing)}")


# ---------------------------------------------------------------------------
# designs


def build_design(cfg, basis=None):
    """Return ``(design, certificate_dict, checks)`` for a design method."""
    method = cfg.get("method")
    if not method:
        raise ConfigError("no method given")
    name = method["name"]
    basis = basis or _basis(cfg)
    measure = Measure.uniform(basis.domain)
    seed = _seed(cfg)
    budget = cfg.get("budgets", {}).get("max_suggestions", 1_000_000)
    checks = []
    if name in ("greedy", "unweighted"):
        _require(method, "m", "n")
        m, n = method["m"], method["n"]
        if n < m or (name == "unweighted" and n <= m):
            raise ConfigError(f"need n >= m (got n={n}, m={m})")
        oracle = None
        if method.get("oracle") == "grid":
            size = method.get("grid_size", 10 * m)
            oracle = subsample.CandidateOracle(measure.sample(size, np.random.default_rng([seed, 1])))
        if name == "unweighted":
            design, cert, _ = subsample.unweighted_subsample(m, n, basis, measure, oracle, seed, budget)
            bound = (1 - math.sqrt(m / n)) ** 2
            checks.append(_check("equal-weight-lower-discretization", "one-sided equal-weight bound",
                                 cert.lambda_min, bound, ">="))
            return design, cert.as_dict(), checks
        try:
            cfg_g = subsample.rkhs_tail_config(
                basis, m, n, method.get("alpha0", 1.5), method.get("t", 1.0), method.get("theta", 0.5),
                measure=measure, oracle=oracle, weight_mode=method.get("weight_mode", "min"),
                max_suggestions=budget)
        except subsample.DimensionOverflow:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        res = subsample.bss_subsample(cfg_g, measure, seed)
        cert = res.as_dict()
        checks += greedy_checks(res, cfg_g)
        return res.design, cert, checks
    if name in ("iid", "christoffel"):
        _require(method, "m", "n")
        m, n = method["m"], method["n"]
        kind = "christoffel" if name == "christoffel" else method.get("density", "christoffel")
        if kind == "flat":
            dens = random_designs.flat_density()
        elif kind == "optimal":
            sig = basis.sigma(np.arange(max(4 * m, 64)))
            dens = random_designs.optimal_rkhs_density(basis, m, sig)
        else:
            dens = random_designs.christoffel_density(basis, m)
        design = random_designs.iid_design(dens, n, measure, seed)
        cert = leastsq.stability_constant(design, basis, m)
        return design, cert.as_dict(), checks
    if name == "conditional":
        _require(method, "m")
        res = random_designs.conditional_christoffel_design(basis, method["m"], seed, measure)
        cert = res.certificate.as_dict()
        cert["redraw_count"] = res.redraw_count
        checks.append(_check("conditional-stability", "conditional Christoffel acceptance",
                             res.certificate.lambda_min, 0.5, ">="))
        return res.design, cert, checks
    if name == "algorithm3":
        _require(method, "m", "n")
        m, n = method["m"], method["n"]
        if m < 2 or n < m:
            raise ConfigError("randomized barrier design needs m >= 2 and n >= m")
        design = random_designs.dolbeault_chkifa_design(basis, m, n, measure, seed)
        cert = leastsq.stability_constant(design, basis, m).as_dict()
        cert["error_factor"] = random_designs.dolbeault_chkifa_factor(m, n)
        return design, cert, checks
    raise ConfigError(f"{name!r} is not a design method")


def greedy_checks(res, cfg_g):
    return [
        _check("greedy-lower-barrier", "greedy construction output, lower side (accumulated state)",
               res.state_lambda_min, res.lower_target, ">="),
        _check("greedy-upper-barrier", "greedy construction output, upper side",
               res.b_lambda_max, res.upper_target, "<="),
        _check("greedy-stability", "greedy stability constant K <= 1/(1 - sqrt(m/(n+1)))",
               res.certificate.stability_K, res.stability_bound, "<="),
    ]


def _check(name, statement, value, bound, op):
    ok = value >= bound * (1 - 1e-9) if op == ">=" else value <= bound * (1 + 1e-9)
    margin = value - bound if op == ">=" else bound - value
    return {"name": name, "statement": statement, "ok": bool(ok), "value": _num(value),
            "bound": _num(bound), "margin": _num(margin)}


def _num(v):
    v = float(v)
    return None if not math.isfinite(v) else v


# ---------------------------------------------------------------------------
# recovery


def _target(cfg, basis, default):
    spec = dict(cfg.get("target", default))
    name = spec.pop("name")
    if name in ("prescribed-tail", "rkhs-random", "sparse") and not isinstance(basis, TrigBasis):
        spec.setdefault("basis", basis)
    if name == "rkhs-random":
        decay = spec.pop("sigma_decay", 1.0)
        K = spec.pop("K", 1024)
        k = np.arange(K, dtype=float)
        return targets.rkhs_random(np.maximum(k, 1.0) ** -decay, seed=spec.pop("seed", _seed(cfg)), **spec)
    if name in ("prescribed-tail", "trig-decay", "sparse", "dyadic-w2inf"):
        spec.setdefault("seed", _seed(cfg))
    try:
        return targets.TARGET_FAMILIES[name](**spec)
    except TypeError as exc:
        raise ConfigError(f"target {name!r}: {exc}") from None


def _errors(cfg, f, approx, measure):
    out = {}
    for p in cfg.get("p", [2, "inf"]):
        pv = _p_value(p)
        out[_p_key(pv)] = leastsq.lp_error(f, approx, pv, measure, _mc(cfg), _seed(cfg) + 7919)
    return out


def run_recover(cfg) -> dict:
    method = cfg.get("method")
    if not method:
        raise ConfigError("no method given")
    name = method["name"]
    seed = _seed(cfg)
    report = {"method": name, "parameters": method, "seed": seed, "checks": []}
    if name == "central":
        n = method.get("n", 16)
        f = _target(cfg, None, {"name": "lipschitz-hat"})
        if method.get("points", "equispaced") == "equispaced":
            pts = (np.arange(n) + 0.5) / n
        else:
            pts = np.random.default_rng(seed).random(n)
        design = lipschitz_oracle.CircleDesign(pts)
        rec = lipschitz_oracle.central_reconstruct(design, f(design.points))
        measure = Measure.uniform(Domain.circle())
        report["errors"] = _errors(cfg, f, rec, measure)
        rad = lipschitz_oracle.exact_radius(design, math.inf)
        report["radius"] = {"inf": rad, "1": lipschitz_oracle.exact_radius(design, 1)}
        report["checks"].append(_check("central-sup-bound", "central reconstruction error <= radius",
                                       report["errors"].get("inf", 0.0), rad + 1e-12, "<="))
        return report
    if name == "cubes":
        _require(method, "n")
        d = method.get("d", 1)
        s = method.get("smoothness", 2)
        ell = method.get("ell", s + 1)
        f = _target(cfg, None, {"name": "dyadic-w2inf"})
        pts = np.random.default_rng(seed).random((method["n"], d))
        approx = scattered.piecewise_recover(f(pts), pts, s, ell, d)
        dec = approx.decomposition
        measure = Measure.uniform(Domain.cube(d) if d > 1 else Domain.interval())
        report["errors"] = _errors(cfg, f, approx, measure)
        inv = scattered.check_decomposition(dec)
        report["decomposition"] = {"cubes": len(dec.cubes), "tested": dec.tested, "root_only": dec.is_root,
                                   "fallbacks": approx.fallbacks, "invariants": inv}
        report["checks"] += [{"name": f"decomposition-{k}", "statement": "cube splitting structure", "ok": bool(v)}
                             for k, v in inv.items()]
        return report
    basis = _basis(cfg)
    measure = Measure.uniform(basis.domain)
    if name == "mlmc":
        r, k = method.get("r", 2), method.get("level", 4)
        f = _target(cfg, basis, {"name": "prescribed-tail", "alpha": 1.0})
        res = multilevel.ml_recover(f, multilevel.MLConfig(r, k, basis, measure), seed)
        report["errors"] = _errors(cfg, f, res.approximant, measure)
        report["evaluations"] = res.evaluations
        if f.coefficients is not None:
            report["errors"]["l2_exact"] = leastsq.coefficient_l2_error(f, res.approximant)
            report["bound_mean_sq"] = multilevel.ml_bound(f.tail_norm_sq, r, k)
        report["checks"].append(_check("mlmc-sample-budget", "evaluations <= r 2^(k+1)",
                                       res.evaluations, r * 2 ** (k + 1), "<="))
        return report
    if name == "sqrtlasso":
        _require(method, "N", "m", "n")
        N, m, n = method["N"], method["m"], method["n"]
        f = _target(cfg, basis, {"name": "sparse", "m": m, "N": N})
        x = Measure.uniform(basis.domain).sample(n, np.random.default_rng(seed))
        design = SampledDesign.equal_weights(x)
        prob = sparse.SparseProblem(basis, N, design, m=m)
        res = sparse.sqrt_lasso(f(x), prob)
        coef = np.zeros(N, dtype=np.complex128)
        if f.coefficients is not None:
            sel = f.indices < N
            coef[f.indices[sel]] = f.coefficients[sel]
            report["coefficient_rel_error"] = float(np.linalg.norm(res.coefficients - coef)
                                                    / max(np.linalg.norm(coef), 1e-300))
        approx = leastsq.FittedApproximant(res.coefficients, basis, design)
        report["errors"] = _errors(cfg, f, approx, measure)
        report["solver"] = {"objective": res.objective, "gap": res.gap, "iterations": res.iterations}
        if math.comb(N, min(2 * m, N)) <= 1_000_000:
            rip = sparse.rip_check(design, basis, N, min(2 * m, N))
            report["rip"] = "verified" if rip else "failed"
        else:
            report["rip"] = "unverified, probabilistic"
        return report
    # least squares on a constructed design
    design, cert, checks = build_design(cfg, basis)
    m = method["m"]
    f = _target(cfg, basis, {"name": "trig-decay", "alpha": 1.0})
    approx = leastsq.fit(f(design.points), design, basis, m)
    report["certificate"] = cert
    report["checks"] = checks
    report["errors"] = _errors(cfg, f, approx, measure)
    if f.coefficients is not None:
        report["errors"]["l2_exact"] = leastsq.coefficient_l2_error(f, approx)
    report["points"] = len(design)
    return report


# ---------------------------------------------------------------------------
# rates and benchmark


def fit_rate(ns, errors):
    """Least-squares slope of ``log error`` against ``log n`` with R^2."""
    ns = np.asarray(ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.all(errors < 1e-12):
        return {"slope": "exact", "intercept": None, "r2": None}
    X = np.log(ns)
    Y = np.log(np.maximum(errors, 1e-300))
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    ss = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def _rate_point(cfg, n):
    method = dict(cfg["method"])
    name = method["name"]
    if name == "lipschitz":
        design = lipschitz_oracle.CircleDesign.equispaced(n)
        p = _p_value(cfg.get("p", ["inf"])[0])
        return lipschitz_oracle.exact_radius(design, p)
    sub = dict(cfg)
    if name == "mlmc":
        r = method.get("r", 2)
        method["level"] = max(0, int(math.floor(math.log2(n / (2 * r)))))
    elif name == "cubes" or name == "sqrtlasso" or name == "central":
        method["n"] = n
    else:
        ratio = method.get("oversampling", 2.0)
        method["n"] = n
        method["m"] = max(1, int(n // ratio))
        if name == "conditional":
            method.pop("n")
    sub["method"] = method
    sub["p"] = cfg.get("p", [2])[:1]
    report = run_recover(sub)
    errs = report["errors"]
    return errs.get("l2_exact", next(iter(errs.values())))


def run_rates(cfg, threads=1) -> dict:
    grid = cfg.get("n_grid")
    if not grid or len(grid) < 4:
        raise ConfigError("rates need an n_grid with at least 4 values")
    if "method" not in cfg:
        raise ConfigError("no method given")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        errors = list(pool.map(lambda n: _rate_point(cfg, n), grid))
    return {"method": cfg["method"]["name"], "parameters": cfg["method"], "seed": _seed(cfg),
            "table": [{"n": n, "error": e} for n, e in zip(grid, errors)], "rate_fit": fit_rate(grid, errors)}


def run_benchmark(cfg, threads=1) -> dict:
    methods = cfg.get("methods")
    if not methods:
        raise ConfigError("benchmark needs a non-empty method list")
    base = cfg.get("method", {"name": methods[0]})

    def one(name):
        sub = dict(cfg)
        sub["method"] = {**base, "name": name}
        return run_recover(sub)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        reports = list(pool.map(one, methods))
    table = [{"method": name, "errors": rep.get("errors", {}),
              "checks_ok": all(c.get("ok", True) for c in rep.get("checks", []))}
             for name, rep in zip(methods, reports)]
    return {"seed": _seed(cfg), "table": table, "reports": reports}


# ---------------------------------------------------------------------------
# entry point


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(p):
    p.add_argument("--config", help="JSON config file (flags override its entries)")
    p.add_argument("--seed", type=int)
    p.add_argument("--basis", choices=["trig", "legendre", "haar", "custom-tabulated"])
    p.add_argument("--table", help="CSV table for the custom-tabulated basis")
    p.add_argument("--sigma-decay", dest="sigma_decay", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--level", type=int)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--weight-mode", dest="weight_mode", choices=["min", "max"])
    p.add_argument("--oracle", choices=["christoffel", "grid"])
    p.add_argument("--grid-size", dest="grid_size", type=int)
    p.add_argument("--density", choices=["christoffel", "flat", "optimal"])
    p.add_argument("--smoothness", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--oversampling", type=float)
    p.add_argument("--points", choices=["iid", "equispaced"])
    p.add_argument("--target", help="target family name or a JSON object")
    p.add_argument("--p", help="comma separated error exponents, e.g. 1,2,inf")
    p.add_argument("--mc-budget", dest="mc_budget", type=int)
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.add_argument("--timing", action="store_true", help="include wall time in reports")
    p.add_argument("--threads", type=int, default=1, help="maximum worker threads")


def build_parser():
    parser = argparse.ArgumentParser(prog="optsample", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="construct points and weights")
    _add_common(p)
    p.add_argument("--method", choices=DESIGN_METHODS)
    p.add_argument("--out", help="write the CSV here (default stdout)")
    p.add_argument("--cert", help="write the certificate JSON here")

    p = sub.add_parser("recover", help="recover a target and report errors")
    _add_common(p)
    p.add_argument("--method", choices=RECOVER_METHODS)

    p = sub.add_parser("rates", help="error table over an n grid with a fitted slope")
    _add_common(p)
    p.add_argument("--method", choices=RECOVER_METHODS + ["lipschitz"])
    p.add_argument("--n-grid", dest="n_grid", help="comma separated sample sizes")
    p.add_argument("--plot-data", dest="plot_data", help="write tidy CSV (n,error,method) here")

    p = sub.add_parser("benchmark", help="compare recovery methods on one target")
    _add_common(p)
    p.add_argument("--method", choices=RECOVER_METHODS, help="method whose parameters are shared")
    p.add_argument("--methods", help="comma separated method names")

    p = sub.add_parser("oracle", help="closed-form Lipschitz quantities")
    p.add_argument("which", choices=["lip"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", required=True, help="exponent or inf")
    p.add_argument("--expected", action="store_true", help="expected radius for i.i.d. uniform points")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "oracle":
            return _oracle(args)
        cfg = load_config(args)
        start = time.perf_counter()
        if args.command == "design":
            design, cert, checks = build_design(cfg)
            cert = {**cert, "checks": checks, "method": cfg["method"], "seed": _seed(cfg)}
            if args.timing:
                cert["wall_time"] = time.perf_counter() - start
            out = cfg.get("output", {})
            _emit(design.to_csv(), out.get("csv"))
            if out.get("certificate"):
                _emit(_dump(cert), out["certificate"])
            elif out.get("csv"):
                sys.stdout.write(_dump(cert))
            return 0
        if args.command == "recover":
            report = run_recover(cfg)
        elif args.command == "rates":
            report = run_rates(cfg, args.threads)
            plot = cfg.get("output", {}).get("plot_data")
            if plot:
                lines = ["n,error,method"] + [f"{row['n']},{row['error']!r},{report['method']}"
                                              for row in report["table"]]
                _emit("\n".join(lines) + "\n", plot)
        else:
            report = run_benchmark(cfg, args.threads)
        if args.timing:
            report["wall_time"] = time.perf_counter() - start
        _emit(_dump(report), cfg.get("output", {}).get("report"))
        return 0
    except METHOD_FAILURES as exc:
        print(f"optsample: method failure: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, subsample.DimensionOverflow) as exc:
        print(f"optsample: config error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"optsample: config error: {exc}", file=sys.stderr)
        return 3


def _oracle(args) -> int:
    try:
        p = _p_value(args.p)
    except ValueError:
        print(f"optsample: config error: bad exponent {args.p!r}", file=sys.stderr)
        return 3
    if args.n < 1 or p < 1:
        print("optsample: config error: need n >= 1 and p >= 1", file=sys.stderr)
        return 3
    out = {"n": args.n, "p": _p_key(p), "optimal_error": lipschitz_oracle.optimal_error(args.n, p)}
    if args.expected:
        out["expected_radius"] = lipschitz_oracle.expected_radius(args.n, p)
    sys.stdout.write(_dump(out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
