"""Command line entry point: ``gbergomi <subcommand> [--config FILE] [flags]``.

Configuration is a TOML file with the sections ``model``, ``mc``, ``task``
and ``io``; ``--set section.key=value`` and the named flags override file
values. Every CSV output starts with a ``# config: {...}`` line and every
JSON output has a ``config`` entry, both holding the resolved configuration.

Exit codes: 0 success, 1 numerical failure, 2 input or configuration error.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("gbergomi")

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2


class ConfigError(ValueError):
    """Invalid configuration or input data."""


# ---------------------------------------------------------------------------
# schema
# ---------------------------------------------------------------------------

_NUM = (int, float)
_LIST = (list,)

MODEL_KEYS = {
    "H": _NUM, "beta": _NUM, "eta": _NUM, "rho": _NUM,
    "scenario": (int,), "vix_spot": _NUM, "level": _NUM,
}
MC_KEYS = {
    "n_paths": (int,), "seed": (int,), "antithetic": (bool,), "truncation_l": (int, str),
    "workers": (int,), "n_steps": (int,), "n_points": (int,), "engine": (str,), "N": (int,),
}
IO_KEYS = {"out_dir": (str,), "prefix": (str,), "dump_paths": (bool,)}
TASK_KEYS = {
    "specfun": {"function": (str,), "beta": _NUM, "x": _LIST + _NUM, "kappa": _LIST + _NUM,
                "a": _NUM, "b": _NUM, "c": _NUM},
    "simulate": {"kind": (str,), "T": _NUM, "record": _LIST},
    "price": {"kind": (str,), "T": _NUM, "moneyness": _LIST},
    "bounds": {"maturities": _LIST, "lower_draws": (int,)},
    "asymptotics": {"sweep": (str,), "values": _LIST, "start": _NUM, "stop": _NUM, "num": (int,),
                    "Delta": _NUM, "T_mkt": _NUM},
    "calibrate": {"vix_smile": (str,), "spx_smile": (str,), "vix_spot": _NUM, "spx_spot": _NUM,
                  "vix_futures": _NUM, "atm": (str,), "weights": _LIST, "rho_bounds": _LIST,
                  "n_grid": (int,), "n_polish": (int,)},
}

DEFAULTS = {
    "model": {"H": 0.07, "beta": 0.9, "eta": 1.23, "rho": -0.9, "scenario": 1},
    "mc": {"n_paths": 100_000, "seed": 0, "antithetic": False, "truncation_l": 8,
           "n_steps": 312, "n_points": 100, "engine": "cholesky", "N": 20},
    "io": {"out_dir": ".", "prefix": "", "dump_paths": False},
}
TASK_DEFAULTS = {
    "specfun": {"function": "mittag_leffler", "beta": 0.5, "x": [0.0, 0.5, 1.0, 2.0]},
    "simulate": {"kind": "vix", "T": 0.25},
    "price": {"kind": "vix", "T": 0.25},
    "bounds": {"maturities": [1 / 12, 0.25, 0.5, 0.75, 1.0], "lower_draws": 100_000},
    "asymptotics": {"sweep": "beta", "start": 0.1, "stop": 1.0, "num": 10, "Delta": 1 / 12},
    "calibrate": {"atm": "futures", "spx_spot": 1.0, "weights": [1.0, 1.0, 1.0],
                  "rho_bounds": [-1.0, 0.0], "n_grid": 20, "n_polish": 5},
}


def _check_section(name, section, allowed):
    if not isinstance(section, dict):
        raise ConfigError(f"[{name}] must be a table")
    for key, val in section.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {name}.{key}")
        types = allowed[key]
        if isinstance(val, bool) and bool not in types:
            raise ConfigError(f"{name}.{key} has the wrong type")
        if not isinstance(val, types):
            raise ConfigError(f"{name}.{key} has the wrong type ({type(val).__name__})")


def resolve_config(command, file_cfg=None, overrides=None):
    """Merge defaults, file values and overrides, then validate.

    Raises
    ------
    ConfigError
        On unknown sections or keys, wrong types or inconsistent values.
    """
    file_cfg = dict(file_cfg or {})
    allowed = {"model": MODEL_KEYS, "mc": MC_KEYS, "io": IO_KEYS, "task": TASK_KEYS[command]}
    for sec in file_cfg:
        if sec not in allowed:
            raise ConfigError(f"unknown section [{sec}]")
    cfg = {
        "model": dict(DEFAULTS["model"]),
        "mc": dict(DEFAULTS["mc"]),
        "io": dict(DEFAULTS["io"]),
        "task": dict(TASK_DEFAULTS[command]),
    }
    for source in (file_cfg, overrides or {}):
        for sec, vals in source.items():
            if sec not in allowed:
                raise ConfigError(f"unknown section [{sec}]")
            _check_section(sec, vals, allowed[sec])
            cfg[sec].update(vals)
    m = cfg["model"]
    if m.get("scenario") not in (1, 2, 3):
        raise ConfigError("model.scenario must be 1, 2 or 3")
    mc = cfg["mc"]
    if mc["engine"] not in ("cholesky", "markovian"):
        raise ConfigError("mc.engine must be 'cholesky' or 'markovian'")
    if isinstance(mc["truncation_l"], str) and mc["truncation_l"] != "full":
        raise ConfigError("mc.truncation_l must be an integer or 'full'")
    if "workers" not in mc:
        from .montecarlo import default_workers

        mc["workers"] = default_workers()
    cfg["command"] = command
    return cfg


def load_config_file(path):
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None


def _parse_value(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _overrides(args):
    ov = {}

    def put(sec, key, val):
        if val is not None:
            ov.setdefault(sec, {})[key] = val

    for item in args.set or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        lhs, rhs = item.split("=", 1)
        sec, key = lhs.split(".", 1)
        put(sec.strip(), key.strip(), _parse_value(rhs.strip()))
    for key in ("H", "beta", "eta", "rho", "scenario", "vix_spot"):
        put("model", key, getattr(args, key))
    put("mc", "n_paths", args.n_paths)
    put("mc", "seed", args.seed)
    put("mc", "workers", args.workers)
    put("mc", "engine", args.engine)
    put("mc", "N", args.nodes)
    put("io", "out_dir", args.out_dir)
    return ov


# ---------------------------------------------------------------------------
# builders and writers
# ---------------------------------------------------------------------------

def _params(cfg):
    from .model import ForwardCurve, ModelParams

    m = cfg["model"]
    if "vix_spot" in m:
        curve = ForwardCurve.from_vix(m["vix_spot"])
    elif "level" in m:
        curve = ForwardCurve.scenario(m["scenario"], level=m["level"])
    else:
        curve = ForwardCurve.scenario(m["scenario"])
    return ModelParams(float(m["H"]), float(m["beta"]), float(m["eta"]), float(m["rho"]), curve)


def _mc(cfg):
    from .montecarlo import McConfig

    mc = cfg["mc"]
    trunc = None if mc["truncation_l"] == "full" else mc["truncation_l"]
    return McConfig(mc["n_paths"], mc["seed"], mc["antithetic"], trunc, mc["workers"])


def _tags(p):
    return ["rBergomi-equivalent"] if p.rbergomi_equivalent else []


def _path(cfg, name):
    io = cfg["io"]
    os.makedirs(io["out_dir"], exist_ok=True)
    stem = f"{io['prefix']}_{name}" if io["prefix"] else name
    return os.path.join(io["out_dir"], stem)


def _config_json(cfg):
    return json.dumps(cfg, sort_keys=True, default=float)


def write_csv(cfg, name, header, rows):
    path = _path(cfg, name + ".csv")
    with open(path, "w", newline="") as fh:
        fh.write(f"# config: {_config_json(cfg)}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return path


def write_json(cfg, name, payload):
    path = _path(cfg, name + ".json")
    out = dict(payload)
    out["config"] = cfg
    out["seed"] = cfg["mc"]["seed"]
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_specfun(cfg, stream=None):
    """Print a table of special-function values as CSV on ``stream`` (default stdout)."""
    from .specfun import GreyLaw, gauss_2f1, m_wright_density, m_wright_moment, mittag_leffler

    stream = sys.stdout if stream is None else stream
    t = cfg["task"]
    fn = t["function"]
    beta = float(t["beta"])
    w = csv.writer(stream)
    stream.write(f"# config: {_config_json(cfg)}\n")
    if fn == "mittag_leffler":
        w.writerow(["beta", "z", "E_beta(z)"])
        for z in np.atleast_1d(t["x"]):
            w.writerow([beta, float(z), repr(float(mittag_leffler(beta, float(z))))])
    elif fn == "m_wright":
        w.writerow(["beta", "x", "M_beta(x)"])
        for x in np.atleast_1d(t["x"]):
            w.writerow([beta, float(x), repr(float(m_wright_density(beta, float(x))))])
    elif fn == "moment":
        law = GreyLaw(beta)
        w.writerow(["beta", "kappa", "E[Y^kappa]"])
        for k in np.atleast_1d(t.get("kappa", [0.5, 1.0, 2.0])):
            w.writerow([beta, float(k), repr(float(m_wright_moment(law, float(k))))])
    elif fn == "hyp2f1":
        for key in ("a", "b", "c"):
            if key not in t:
                raise ConfigError(f"task.{key} is required for hyp2f1")
        w.writerow(["a", "b", "c", "u", "2F1"])
        for u in np.atleast_1d(t["x"]):
            w.writerow([t["a"], t["b"], t["c"], float(u), repr(float(gauss_2f1(t["a"], t["b"], t["c"], float(u))))])
    else:
        raise ConfigError(f"unknown task.function {fn!r}")
    return []


def _spot_samples(p, cfg, T, record=None):
    from .montecarlo import simulate_spot, simulate_spot_markovian

    n = cfg["mc"]["n_steps"]
    grid = np.linspace(0.0, T, n + 1)
    mc = _mc(cfg)
    if cfg["mc"]["engine"] == "markovian":
        return simulate_spot_markovian(p, grid, mc, N=cfg["mc"]["N"], record_times=record), grid
    return simulate_spot(p, grid, mc, record_times=record), grid


def cmd_simulate(cfg):
    """Simulate VIX samples at ``task.T`` or spot paths up to ``task.T``."""
    from .montecarlo import price_from_samples, simulate_vix
    from .pricing import implied_vol

    p = _params(cfg)
    t = cfg["task"]
    T = float(t["T"])
    files = []
    meta = {"params": p.to_dict(), "tags": _tags(p), "martingale_regime": p.martingale_regime}
    if t["kind"] == "vix":
        s = simulate_vix(p, T, _mc(cfg), n_points=cfg["mc"]["n_points"])
        files.append(write_csv(cfg, "vix_samples", ["log_vix"], ((v,) for v in s.log_vix)))
        meta["futures"] = s.futures().to_dict()
        meta["log_futures"] = s.log_futures()
    elif t["kind"] == "spot":
        if T <= 0:
            raise ConfigError("task.T must be positive for spot simulation")
        n = cfg["mc"]["n_steps"]
        grid = np.linspace(0.0, T, n + 1)
        record = grid if cfg["io"]["dump_paths"] else t.get("record")
        s, grid = _spot_samples(p, cfg, T, record)
        ST = s.terminal()
        files.append(write_csv(cfg, "spot_terminal", ["S_T"], ((v,) for v in ST)))
        if cfg["io"]["dump_paths"]:
            files.append(write_csv(cfg, "spot_paths", [repr(float(g)) for g in s.times], np.exp(s.log_s)))
        anti = cfg["mc"]["antithetic"]
        mart = s.martingale_check()
        call = price_from_samples(ST, ("call", 1.0), antithetic=anti, engine=s.engine, seed=cfg["mc"]["seed"],
                                  regime=p.martingale_regime)
        meta["engine"] = s.engine
        meta["mean_S_T"] = mart.to_dict()
        meta["atm_call"] = call.to_dict()
        try:
            meta["atm_implied_vol"] = implied_vol(call.estimate, 0.0, 0.0, 0.0, T)
        except ValueError as exc:
            meta["atm_implied_vol"] = None
            meta["atm_implied_vol_error"] = str(exc)
    else:
        raise ConfigError("task.kind must be 'vix' or 'spot'")
    files.append(write_json(cfg, "result", meta))
    return files


def cmd_price(cfg):
    """Price calls on VIX or SPX at ``task.T`` for strikes ``moneyness * forward``."""
    from .montecarlo import price_from_samples, simulate_vix
    from .pricing import atm_metrics, fit_arctan_smile, implied_vol

    p = _params(cfg)
    t = cfg["task"]
    T = float(t["T"])
    if T <= 0:
        raise ConfigError("task.T must be positive")
    anti = cfg["mc"]["antithetic"]
    if t["kind"] == "vix":
        s = simulate_vix(p, T, _mc(cfg), n_points=cfg["mc"]["n_points"])
        fut = s.futures()
        rel = s.relative()
        forward = math.exp(s.log_futures())
        mny = np.asarray(t.get("moneyness", np.linspace(0.8, 1.6, 17)), dtype=float)
        fwd_info = fut.to_dict()
    elif t["kind"] == "spx":
        s, _ = _spot_samples(p, cfg, T)
        rel = s.terminal()
        m = price_from_samples(rel, antithetic=anti)
        rel = rel / m.estimate
        forward = 1.0
        mny = np.asarray(t.get("moneyness", np.linspace(0.8, 1.2, 17)), dtype=float)
        fwd_info = m.to_dict()
    else:
        raise ConfigError("task.kind must be 'vix' or 'spx'")
    rows, pts = [], []
    for q in mny:
        # calls on X / E[X] with strike q; scale back by the forward
        r = price_from_samples(rel, ("call", q), antithetic=anti)
        try:
            iv = implied_vol(r.estimate, 0.0, 0.0, math.log(q), T)
            pts.append((q, iv))
        except ValueError:
            iv = math.nan
        rows.append((q * forward, q, T, r.estimate * forward, r.stderr * forward, iv))
    files = [write_csv(cfg, "prices", ["strike", "moneyness", "maturity", "price", "stderr", "implied_vol"], rows)]
    meta = {"params": p.to_dict(), "tags": _tags(p), "forward": fwd_info, "forward_value": forward}
    if len(pts) >= 4:
        fit = fit_arctan_smile(np.array(pts))
        lvl, sk, cv = atm_metrics(fit, 1.0, log_strike=True)
        meta["arctan_fit"] = {"a": fit.a, "b": fit.b, "c": fit.c, "d": fit.d, "residual": fit.residual,
                              "coordinate": "moneyness"}
        meta["atm"] = {"level": lvl, "skew": sk, "curvature": cv, "convention": "log-strike"}
    files.append(write_json(cfg, "result", meta))
    return files


def cmd_bounds(cfg):
    """Lower and upper VIX futures bounds with the Monte Carlo estimate per maturity."""
    from .model import vix_futures_lower_bound, vix_futures_upper_bound
    from .montecarlo import McConfig, simulate_vix

    p = _params(cfg)
    mc = _mc(cfg)
    lower_mc = McConfig(cfg["task"]["lower_draws"], mc.seed, workers=mc.workers)
    rows = []
    for T in cfg["task"]["maturities"]:
        T = float(T)
        lo = vix_futures_lower_bound(T, p, mc=lower_mc)
        up = vix_futures_upper_bound(T, p)
        est = simulate_vix(p, T, mc, n_points=cfg["mc"]["n_points"]).futures()
        rows.append((T, lo.estimate, lo.stderr, up, est.estimate, est.stderr))
    return [write_csv(cfg, "bounds", ["T", "lower", "lower_stderr", "upper", "mc_estimate", "stderr"], rows)]


def cmd_asymptotics(cfg):
    """Sweep of the short-time ATM limits over one parameter."""
    from .asymptotics import AsymptoticInputs, sweep

    p = _params(cfg)
    t = cfg["task"]
    name = t["sweep"]
    if name not in ("beta", "H", "eta"):
        raise ConfigError("task.sweep must be 'beta', 'H' or 'eta'")
    values = t.get("values")
    if values is None:
        values = np.linspace(t["start"], t["stop"], t["num"])
    if not p.xi0.is_flat:
        raise ConfigError("asymptotics need a flat forward curve (scenario 1 or vix_spot)")
    base = AsymptoticInputs(p.xi0.level, p.H, p.beta, p.eta, float(t["Delta"]), t.get("T_mkt"))
    rows = sweep(base, name, values, rho=p.rho)
    header = [name, "level", "skew", "curvature_scaled", "spx_level", "spx_skew_scaled", "ssr_limit"]
    return [write_csv(cfg, "asymptotics", header, ([r[h] for h in header] for r in rows))]


def read_smile_csv(path):
    """Read a single-maturity smile file.

    The header is ``strike,maturity,mid_price`` or ``strike,maturity,implied_vol``;
    lines starting with ``#`` are ignored.

    Returns
    -------
    strikes : ndarray
    maturity : float
    values : ndarray
    column : str
        ``"mid_price"`` or ``"implied_vol"``.
    """
    try:
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except FileNotFoundError:
        raise ConfigError(f"market file not found: {path}") from None
    rd = csv.reader(lines)
    try:
        header = [h.strip() for h in next(rd)]
    except StopIteration:
        raise ConfigError(f"{path} is empty") from None
    if header not in (["strike", "maturity", "mid_price"], ["strike", "maturity", "implied_vol"]):
        raise ConfigError(f"{path}: header must be strike,maturity,mid_price or strike,maturity,implied_vol")
    try:
        data = np.array([[float(v) for v in row] for row in rd], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[0] < 4 or data.shape[1] != 3:
        raise ConfigError(f"{path}: need at least 4 rows of 3 columns")
    if not np.all(np.isfinite(data)):
        raise ConfigError(f"{path}: non-finite values")
    mats = np.unique(data[:, 1])
    if mats.size != 1:
        raise ConfigError(f"{path}: expected a single maturity, found {mats.size}")
    return data[:, 0], float(mats[0]), data[:, 2], header[2]


def _market_vols(path, forward):
    from .pricing import implied_vol

    K, T, vals, col = read_smile_csv(path)
    if T <= 0:
        raise ConfigError(f"{path}: maturity must be positive")
    if col == "implied_vol":
        return K, T, vals
    vols = np.array([implied_vol(c, 0.0, math.log(forward), math.log(k), T) for c, k in zip(vals, K)])
    return K, T, vols


def cmd_calibrate(cfg):
    """Two-stage calibration from a VIX smile and an SPX smile."""
    from .calibration import GreyBergomiCalibrator, MarketTargets
    from .pricing import atm_metrics, fit_arctan_smile

    t = cfg["task"]
    if "vix_spot" not in t and "vix_spot" in cfg["model"]:
        t["vix_spot"] = cfg["model"]["vix_spot"]
    for key in ("vix_smile", "spx_smile", "vix_spot"):
        if key not in t:
            raise ConfigError(f"task.{key} is required")
    atm = t["atm"]
    if atm not in ("futures", "spot"):
        raise ConfigError("task.atm must be 'futures' or 'spot'")
    if atm == "futures" and "vix_futures" not in t:
        raise ConfigError("task.vix_futures is required when task.atm = 'futures'")
    vix_atm = float(t["vix_futures"] if atm == "futures" else t["vix_spot"])
    Kv, Tv, vv = _market_vols(t["vix_smile"], vix_atm)
    Ks, Ts, vs = _market_vols(t["spx_smile"], float(t["spx_spot"]))
    if abs(Tv - Ts) > 1e-12:
        log.info("VIX maturity %g and SPX maturity %g differ; T_mkt is the VIX maturity", Tv, Ts)
    fv = fit_arctan_smile(np.column_stack([Kv, vv]))
    fs = fit_arctan_smile(np.column_stack([Ks, vs]))
    Iv, Sv, Cv = atm_metrics(fv, vix_atm, log_strike=True)
    _, Ss, _ = atm_metrics(fs, float(t["spx_spot"]), log_strike=True)
    targets = MarketTargets(Iv, Sv, Cv, Ss, Tv, float(t["vix_spot"]))
    est = GreyBergomiCalibrator(n_grid=t["n_grid"], n_polish=t["n_polish"],
                                rho_bounds=tuple(t["rho_bounds"]), weights=tuple(t["weights"]))
    est.fit(targets)
    res = est.result_
    payload = {
        "result": res.to_dict(),
        "targets": targets.to_dict(),
        "atm_reference": atm,
        "vix_fit": {"a": fv.a, "b": fv.b, "c": fv.c, "d": fv.d, "residual": fv.residual},
        "spx_fit": {"a": fs.a, "b": fs.b, "c": fs.c, "d": fs.d, "residual": fs.residual},
        "weights": list(t["weights"]),
    }
    rows = [("vix", k, Tv, m, fv(k)) for k, m in zip(Kv, vv)]
    rows += [("spx", k, Ts, m, fs(k)) for k, m in zip(Ks, vs)]
    files = [write_json(cfg, "calibration", payload),
             write_csv(cfg, "smile_overlay", ["instrument", "strike", "maturity", "market_vol", "fitted_vol"], rows)]
    return files


COMMANDS = {
    "specfun": cmd_specfun,
    "simulate": cmd_simulate,
    "price": cmd_price,
    "bounds": cmd_bounds,
    "asymptotics": cmd_asymptotics,
    "calibrate": cmd_calibrate,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="gbergomi", description="Grey Bergomi model toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=(fn.__doc__ or "").splitlines()[0])
        sp.add_argument("--config", help="TOML configuration file")
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override a configuration value (repeatable)")
        sp.add_argument("--out-dir", dest="out_dir")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--n-paths", dest="n_paths", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--engine", choices=["cholesky", "markovian"])
        sp.add_argument("--nodes", type=int, help="number of Markovian factors")
        sp.add_argument("--H", type=float)
        sp.add_argument("--beta", type=float)
        sp.add_argument("--eta", type=float)
        sp.add_argument("--rho", type=float)
        sp.add_argument("--scenario", type=int)
        sp.add_argument("--vix-spot", dest="vix_spot", type=float)
    return ap


def main(argv=None):
    """Run the CLI and return the exit code."""
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args.command, load_config_file(args.config), _overrides(args))
        files = COMMANDS[args.command](cfg)
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, TypeError, KeyError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
