"""Command line interface: ``nes <command> ...``.

Curves and grids are written as CSV, parameters and results as JSON, all
floats with 17 significant digits.  With ``--out-dir`` every output goes to
a file and ``manifest.json`` is written last.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, InputError
from .market import MarketEnv, OptionQuote
from .potential import NesParams

EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 2, 3, 4


def fmt(x) -> str:
    return "%.17g" % float(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(fmt(obj))
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------


def _load_json(arg: str) -> dict:
    """A JSON file path or an inline JSON object."""
    text = arg
    if not arg.lstrip().startswith("{"):
        try:
            text = Path(arg).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {arg}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {arg!r}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("expected a JSON object")
    return data


def params_from_dict(d: dict) -> NesParams:
    d = dict(d.get("params", d))
    try:
        if "mu" in d:
            return NesParams.from_mu(d["mu"], d["sigma1"], d["sigma2"], d["a"], d["h"], d.get("T", 1.0))
        return NesParams(d["mu1"], d["mu2"], d["sigma1"], d["sigma2"], d["a"], d["h"], d.get("T", 1.0))
    except KeyError as exc:
        raise InputError(f"parameter {exc.args[0]!r} missing") from None
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None


def market_from_dict(d: dict) -> tuple[MarketEnv, float | None]:
    try:
        env = MarketEnv(d["spot"], d["r_f"], d.get("q_div", 0.0))
    except KeyError as exc:
        raise InputError(f"market field {exc.args[0]!r} missing") from None
    y0 = d.get("y0")
    return env, (None if y0 is None else float(y0))


def parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise InputError(f"grid must look like lo:hi:n, got {text!r}") from None
    if n < 2 or not hi > lo:
        raise InputError("grid needs hi > lo and n >= 2")
    return np.linspace(lo, hi, n)


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def read_quotes(path: str) -> list[OptionQuote]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    quotes = []
    for i, r in enumerate(rows):
        try:
            iv = r.get("implied_vol") or None
            quotes.append(OptionQuote(float(r["strike"]), float(r["expiry_T"]), r["kind"].strip(), float(r["mid"]),
                                      None if iv is None else float(iv)))
        except (KeyError, ValueError) as exc:
            raise InputError(f"quote row {i + 1}: {exc}") from None
    return quotes


def _seed(default: int) -> int:
    env = os.environ.get("NES_SEED")
    if env is None:
        return int(default)
    try:
        return int(env)
    except ValueError:
        raise InputError(f"NES_SEED must be an integer, got {env!r}") from None


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


class Output:
    """Collects named outputs; prints the primary one when no directory is given."""

    def __init__(self, args, command: str):
        self.dir = Path(args.out_dir) if getattr(args, "out_dir", None) else None
        self.command = command
        self.files: list[str] = []
        self.inputs: dict = {}
        self.seed = None

    def emit(self, name: str, text: str, primary: bool = False):
        if self.dir is None:
            if primary:
                sys.stdout.write(text)
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / name
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(text)
        tmp.replace(path)
        self.files.append(str(path))

    def finish(self):
        if self.dir is None:
            return
        manifest = {
            "command": self.command,
            "inputs": self.inputs,
            "tool_version": __version__,
            "seed": self.seed,
            "outputs": self.files,
        }
        self.emit("manifest.json", dumps(manifest))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_potential(args, out: Output):
    from .potential import PotentialFn

    p = params_from_dict(_load_json(args.params))
    out.inputs = {"params": p.as_dict(), "grid": args.grid}
    pot = PotentialFn(p)
    y = parse_grid(args.grid)
    lp = pot.ground.log_psi(y)
    out.emit("potential.csv", csv_text(["y", "psi0", "psi0_sq", "V"],
                                       zip(y, np.exp(lp), np.exp(2 * lp), pot.value(y))), primary=True)
    crit = [{"location": c.location, "kind": c.kind, "V": float(pot.value(c.location))} for c in pot.critical_points]
    out.emit("critical_points.json", dumps({"shape": pot.shape(), "global_min_side": pot.global_min_side(),
                                            "critical_points": crit}))


def cmd_kramers(args, out: Output):
    from .passage import escape_rate

    p = params_from_dict(_load_json(args.params))
    out.inputs = {"params": p.as_dict(), "y0_grid": args.y0_grid, "y_star": args.y_star}
    rows = []
    for y0 in parse_grid(args.y0_grid):
        lam = escape_rate(p, y0, args.y_star)
        rows.append((y0, lam / p.h ** 2))
    out.emit("kramers.csv", csv_text(["y0", "lambda_over_h2"], rows), primary=True)


def cmd_susy(args, out: Output):
    from .susy import first_excited_state, lpt_first_order, partner_ground_state

    p = params_from_dict(_load_json(args.params))
    out.inputs = {"params": p.as_dict(), "grid": args.grid}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pg = partner_ground_state(p)
        lpt = lpt_first_order(pg)
        ex = first_excited_state(pg, lpt)
    if args.grid:
        y = parse_grid(args.grid)
    else:
        lo, hi = pg.ground.density.mixture.support(6.0)
        y = np.linspace(lo, hi, 401)
    rows = zip(y, pg.ground.psi(y), pg.psi(y), ex(y), lpt.G1(y))
    out.emit("susy.csv", csv_text(["y", "psi0", "psi_plus", "psi1_minus", "G1"], rows), primary=True)
    summary = {
        "I_plus": pg.I_plus, "I_minus": pg.I_minus, "alpha": pg.alpha, "alpha_printed": pg.alpha_printed,
        "E1_bar": lpt.E1_bar, "E1": lpt.E1, "rate": lpt.rate, "C1": lpt.C1,
        "E1_bar_gaussian": lpt.gaussian_E1_bar(),
        "warnings": [str(w.message) for w in caught],
    }
    out.emit("susy_summary.json", dumps(summary))


def cmd_density(args, out: Output):
    from .nesdist import real_density, risk_neutral_density

    p = params_from_dict(_load_json(args.params))
    y = parse_grid(args.grid)
    out.inputs = {"params": p.as_dict(), "measure": args.measure, "y0": args.y0, "grid": args.grid}
    if args.measure == "real":
        if args.y0 is None:
            raise InputError("--y0 is required for the real measure")
        dens = real_density(p, args.y0, y_star=args.y_star, rate=args.rate)
    else:
        if not args.market:
            raise InputError("--market is required for the risk-neutral measure")
        env, _ = market_from_dict(_load_json(args.market))
        out.inputs["market"] = env.__dict__
        dens = risk_neutral_density(p, env)
    out.emit("density.csv", csv_text(["y", "pdf"], zip(y, dens.pdf(y))), primary=True)
    mix = dens.mixture
    out.emit("density.json", dumps({"kind": dens.kind, "tilt": dens.tilt, "weights": mix.weights,
                                    "means": mix.means, "stdevs": mix.stdevs}))


def cmd_price(args, out: Output):
    from .calibrate import strike_for_delta
    from .pricing import implied_vol, nes_option_price

    p = params_from_dict(_load_json(args.params))
    env, _ = market_from_dict(_load_json(args.market))
    T = float(args.T)
    if not T > 0:
        raise InputError("--T must be positive")
    p = p.replace(T=T)
    if args.strikes:
        strikes = parse_floats(args.strikes)
    elif args.deltas:
        strikes = sorted(strike_for_delta(p, env, T, args.kind, d) for d in parse_floats(args.deltas))
    else:
        raise InputError("give --strikes or --deltas")
    out.inputs = {"params": p.as_dict(), "market": env.__dict__, "strikes": strikes, "T": T, "kind": args.kind}
    rows = []
    for K in strikes:
        price = float(nes_option_price(p, env, K, T, args.kind))
        try:
            iv = implied_vol(price, env.spot, K, T, env.r_f, env.q_div, args.kind)
        except InputError:
            iv = float("nan")
        rows.append((K, price, iv))
    if args.as_quotes:
        text = csv_text(["expiry_T", "strike", "kind", "mid", "implied_vol"],
                        [(T, K, args.kind, pr, "" if np.isnan(iv) else fmt(iv)) for K, pr, iv in rows])
        out.emit("quotes.csv", text, primary=True)
    else:
        out.emit("prices.csv", csv_text(["K", "price", "implied_vol"], rows), primary=True)


def cmd_calibrate(args, out: Output):
    from .calibrate import CalibConfig, calibrate, implied_potential_report

    quotes = [q for q in read_quotes(args.quotes) if q.kind == args.kind]
    if not quotes:
        raise InputError(f"no {args.kind} quotes in {args.quotes}")
    env, y0 = market_from_dict(_load_json(args.market))
    conf = _load_json(args.config) if args.config else {}
    if "bounds" in conf:
        conf["bounds"] = {k: tuple(v) for k, v in conf["bounds"].items()}
    conf["seed"] = _seed(conf.get("seed", 0))
    conf.setdefault("threads", args.threads)
    try:
        cfg = CalibConfig(**conf)
    except TypeError as exc:
        raise InputError(f"bad calibration config: {exc}") from None
    out.seed = cfg.seed
    out.inputs = {"quotes": str(Path(args.quotes).resolve()), "market": env.__dict__, "y0": y0,
                  "kind": args.kind, "config": {k: v for k, v in conf.items()}}
    res = calibrate(quotes, env, cfg)
    payload = res.as_dict()
    if y0 is not None:
        rep = implied_potential_report(res, env, y0)
        payload["implied_potential"] = {
            "shape": rep.shape, "state": rep.state, "y0": rep.y0, "global_min": rep.global_min,
            "local_min": rep.local_min, "barrier": rep.barrier,
            "critical_points": [{"location": c.location, "kind": c.kind} for c in rep.critical_points],
        }
        out.emit("implied_potential.csv", csv_text(["y", "V"], zip(rep.y, rep.V)))
    out.emit("calibration.json", dumps(payload), primary=True)
    if not res.converged:
        raise ConvergenceError(res.message or "calibration did not converge")


def cmd_simulate(args, out: Output):
    from .dynsim import SimConfig, simulate_paths

    p = params_from_dict(_load_json(args.params))
    sim = _load_json(args.sim)
    sim["seed"] = _seed(sim.get("seed", 0))
    try:
        cfg = SimConfig(**sim)
    except TypeError as exc:
        raise InputError(f"bad simulation config: {exc}") from None
    out.seed = cfg.seed
    out.inputs = {"params": p.as_dict(), "sim": sim}
    res = simulate_paths(p, cfg, threads=args.threads)
    y = res.terminal
    out.emit("terminal.csv", csv_text(["y"], ((v,) for v in y)), primary=True)
    out.emit("summary.json", dumps({"n_paths": cfg.n_paths, "mean": y.mean(), "variance": y.var(ddof=1),
                                    "min": y.min(), "max": y.max()}))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nes", description="Non-equilibrium skew model tools")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--threads", type=int, default=1, help="worker threads for parallel sections")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out-dir", help="write outputs and manifest.json here instead of stdout")
        sp.set_defaults(func=fn)
        return sp

    sp = add("potential", cmd_potential, "ground state, stationary density and potential on a grid")
    sp.add_argument("--params", required=True)
    sp.add_argument("--grid", required=True, help="lo:hi:n")

    sp = add("kramers", cmd_kramers, "escape rate over a grid of starting points")
    sp.add_argument("--params", required=True)
    sp.add_argument("--y0-grid", required=True, help="lo:hi:n")
    sp.add_argument("--y-star", type=float, default=None, help="absorbing point (default: global minimum)")

    sp = add("susy", cmd_susy, "partner ground state, first excited state and G1")
    sp.add_argument("--params", required=True)
    sp.add_argument("--grid", default=None, help="lo:hi:n")

    sp = add("density", cmd_density, "real-measure or risk-neutral density of y_T")
    sp.add_argument("--params", required=True)
    sp.add_argument("--measure", choices=("real", "rn"), required=True)
    sp.add_argument("--y0", type=float, default=None)
    sp.add_argument("--y-star", type=float, default=None)
    sp.add_argument("--rate", type=float, default=None, help="escape rate override")
    sp.add_argument("--market", default=None)
    sp.add_argument("--grid", required=True, help="lo:hi:n")

    sp = add("price", cmd_price, "closed-form option prices")
    sp.add_argument("--params", required=True)
    sp.add_argument("--market", required=True)
    sp.add_argument("--strikes", default=None, help="k1,k2,...")
    sp.add_argument("--deltas", default=None, help="target |delta| values instead of strikes")
    sp.add_argument("--T", required=True, type=float)
    sp.add_argument("--kind", choices=("call", "put"), required=True)
    sp.add_argument("--as-quotes", action="store_true", help="emit a quote file usable by calibrate")

    sp = add("calibrate", cmd_calibrate, "fit model parameters to option quotes")
    sp.add_argument("--quotes", required=True)
    sp.add_argument("--market", required=True)
    sp.add_argument("--kind", choices=("call", "put"), required=True)
    sp.add_argument("--config", default=None)

    sp = add("simulate", cmd_simulate, "Euler-Maruyama terminal sample")
    sp.add_argument("--params", required=True)
    sp.add_argument("--sim", required=True)
    return parser


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


_VALUE_OPTS = ("--grid", "--y0-grid", "--y0", "--y-star", "--strikes", "--deltas", "--rate")


def _join_values(argv):
    """Bind option values that start with '-' (negative grids) so argparse keeps them."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2].isdigit():
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_join_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else EXIT_USAGE
    out = Output(args, args.command)
    try:
        args.func(args, out)
        out.finish()
    except ConvergenceError as exc:
        out.finish()
        return _fail(EXIT_NUMERIC, exc)
    except (InputError, ValueError) as exc:
        return _fail(EXIT_INPUT, exc)
    except ArithmeticError as exc:
        return _fail(EXIT_NUMERIC, exc)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
