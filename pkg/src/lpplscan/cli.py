"""Command-line interface: ``lpplscan <command> [options]``.

Every command writes its outputs plus ``<command>.manifest.json`` into
``--out-dir``.  The manifest records the resolved configuration, the seed
and SHA-256 digests of inputs and outputs; each output names its manifest
(a ``manifest`` key in JSON, a leading ``# manifest:`` line in CSV).

Exit codes: 0 success, 2 input error, 3 method failure, 4 undefined
significance test.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .calibrate import FitConfig, fit_window
from .errors import InputError, LpplError, MethodError, UndefinedTestError
from .models import KINDS, SimpleParams, evaluate, params_from_dict
from .scanner import ScanConfig, scan
from .significance import (
    DEFAULT_FREQS,
    BootstrapConfig,
    Noise,
    bootstrap_tc_distribution,
    logperiodicity_test,
    lomb_periodogram,
    synth_generate,
)
from .supply_demand import (
    Quarter,
    agency_discrepancy,
    fixture_path,
    gap_series,
    load_flows,
    regime_flag,
)
from .timeseries import (
    CsvSchema,
    TimeWindow,
    convert_currency,
    load_csv,
    slice_window,
    to_log_price,
    trading_days,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_INPUT, EXIT_METHOD, EXIT_UNDEFINED = 0, 2, 3, 4


class Run:
    """Output directory plus the manifest being accumulated for one command."""

    def __init__(self, command: str, args: argparse.Namespace, config: dict):
        self.command = command
        self.out_dir = Path(args.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.manifest_name = f"{command}.manifest.json"
        self.manifest = {
            "command": command,
            "tool_version": __version__,
            "seed": args.seed,
            "config": config,
            "inputs": {},
            "outputs": {},
        }

    def add_input(self, path) -> None:
        path = Path(path)
        self.manifest["inputs"][str(path)] = hashlib.sha256(path.read_bytes()).hexdigest()

    def _record(self, name: str, text: str) -> None:
        path = self.out_dir / name
        path.write_text(text, encoding="utf-8", newline="")
        self.manifest["outputs"][name] = hashlib.sha256(text.encode("utf-8")).hexdigest()

    def write_json(self, name: str, payload: dict) -> None:
        self._record(name, json.dumps({"manifest": self.manifest_name, **payload}, indent=2, sort_keys=True) + "\n")

    def write_csv(self, name: str, text: str) -> None:
        self._record(name, f"# manifest: {self.manifest_name}\n{text}")

    def close(self) -> None:
        text = json.dumps(self.manifest, indent=2, sort_keys=True) + "\n"
        (self.out_dir / self.manifest_name).write_text(text, encoding="utf-8")


# -- argument helpers -----------------------------------------------------


def _date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text!r}") from None


def _pair(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}") from None
    return lo, hi


def _load_config_file(path) -> dict:
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise InputError(f"config file not found: {path}")
    raw = path.read_bytes()
    if path.suffix.lower() == ".toml":
        return tomllib.loads(raw.decode("utf-8"))
    return json.loads(raw)


def _fit_config(args, file_cfg: dict) -> FitConfig:
    cfg = FitConfig.from_dict(file_cfg.get("fit", {}))
    bounds = {}
    for flag, name in (("m_bounds", "m"), ("omega_bounds", "omega")):
        if getattr(args, flag, None) is not None:
            bounds[name] = getattr(args, flag)
    if getattr(args, "tc_horizon", None) is not None:
        bounds["tc"] = (0.0, args.tc_horizon)
    if bounds:
        cfg = replace(cfg, bounds=replace(cfg.bounds, **bounds))
    simple = {}
    for name in ("top_k", "max_iter", "tol", "min_points", "harmonics"):
        if getattr(args, name, None) is not None:
            simple[name] = getattr(args, name)
    return replace(cfg, **simple)


def _load_prices(args, run: Run):
    schema = CsvSchema(args.date_col, args.value_col, args.date_format)
    series = load_csv(args.input, schema)
    run.add_input(args.input)
    return series


def _window(args, series) -> TimeWindow:
    return TimeWindow(args.t_start or series.first_date, args.t_last or series.last_date)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- commands -------------------------------------------------------------


def cmd_fit(args, file_cfg) -> int:
    fitcfg = _fit_config(args, file_cfg)
    run = Run("fit", args, {"model": args.model, "fit": fitcfg.to_dict(), **_io_config(args)})
    series = _load_prices(args, run)
    window = _window(args, series)
    result = fit_window(series, window, fitcfg, args.model)
    run.write_json("fit.json", result.to_dict())
    run.write_csv("fit.csv", result.to_csv())
    sub = slice_window(series, window, fitcfg.min_points)
    t, y = to_log_price(sub)
    model = np.asarray(evaluate(result.params, t))
    rows = [(d.isoformat(), repr(a), repr(b), repr(c)) for d, a, b, c in zip(sub.dates.tolist(), t.tolist(), y.tolist(), model.tolist())]
    run.write_csv("fit_curve.csv", _rows_csv(("date", "t", "log_price", "model_log_price"), rows))
    run.close()
    _say(f"{args.model}: tc = {result.tc_year:.4f} ({result.tc_datetime:%Y-%m-%d}), "
         f"m = {result.params.m:.3f}, omega = {result.params.omega:.3f}, rmse = {result.rmse:.5f}, "
         f"qualified = {result.qualified}")
    return EXIT_OK


def cmd_scan(args, file_cfg) -> int:
    fitcfg = _fit_config(args, file_cfg)
    scan_file = file_cfg.get("scan", {})
    run = Run("scan", args, {})
    series = _load_prices(args, run)
    models = tuple(m.strip() for m in (args.models or ",".join(scan_file.get("variants", ["simple"]))).split(","))
    t_last = args.t_last or series.last_date
    config = ScanConfig(
        t_start_min=args.t_start_min or series.first_date,
        t_start_max=args.t_start_max,
        t_last=t_last,
        step=args.step if args.step is not None else scan_file.get("step", 5),
        variants=models,
        fit=fitcfg,
    )
    run.manifest["config"] = {"scan": config.to_dict(), **_io_config(args)}
    result = scan(series, config, workers=args.workers)
    run.write_csv("scan.csv", result.to_csv())
    run.write_json("scan.json", result.to_dict())
    run.close()
    for k, s in result.summary.items():
        med = "n/a" if s.median is None else f"{s.median:.4f} (IQR {s.iqr:.4f})"
        _say(f"{k}: median tc {med}, qualified {s.n_qualified}/{s.n_fits}")
    return EXIT_OK


def cmd_bootstrap(args, file_cfg) -> int:
    fitcfg = _fit_config(args, file_cfg)
    boot_file = file_cfg.get("bootstrap", {})
    bcfg = BootstrapConfig(
        block_len=args.block_len or boot_file.get("block_len", 21),
        n_replicas=args.replicas or boot_file.get("n_replicas", 200),
        seed=args.seed,
    )
    run = Run("bootstrap", args, {"model": args.model, "fit": fitcfg.to_dict(), "bootstrap": vars(bcfg), **_io_config(args)})
    series = _load_prices(args, run)
    fit = fit_window(series, _window(args, series), fitcfg, args.model)
    if not fit.converged:
        raise MethodError("initial fit did not converge")
    res = bootstrap_tc_distribution(fit, series, bcfg, fitcfg, workers=args.workers)
    rows = [(i, repr(float(tc)), repr(res.to_year(tc)), int(q)) for i, (tc, q) in enumerate(zip(res.tcs, res.qualified))]
    run.write_csv("bootstrap_replicas.csv", _rows_csv(("replica", "tc", "tc_year", "qualified"), rows))
    run.write_json("bootstrap.json", {"fit": fit.to_dict(), **res.summary()})
    run.close()
    q = res.summary()["quantiles_year"]
    _say(f"tc quantiles (5/50/95%): {q['q05']:.4f} {q['q50']:.4f} {q['q95']:.4f}; "
         f"{res.n_qualified}/{res.tcs.size} replicas qualified")
    return EXIT_OK


def cmd_lomb(args, file_cfg) -> int:
    freqs = DEFAULT_FREQS
    if args.freqs:
        lo, hi, step = (float(v) for v in args.freqs.split(","))
        freqs = np.round(np.arange(lo, hi + step / 2, step), 10)
    run = Run("lomb", args, {"freqs": [float(freqs[0]), float(freqs[-1]), len(freqs)], **_io_config(args)})
    payload = {}
    if args.samples:
        path = Path(args.samples)
        if not path.is_file():
            raise InputError(f"input file not found: {path}")
        run.add_input(path)
        x, y = _read_xy(path, args.x_col, args.y_col)
        spectrum = lomb_periodogram(x, y, freqs)
        if spectrum.degenerate:
            status = "undefined"
        else:
            status = "significant" if spectrum.false_alarm < args.alpha else "not significant"
        payload = {"status": status, "false_alarm": spectrum.false_alarm}
    else:
        if not args.input:
            raise InputError("lomb needs --samples or --input")
        fitcfg = _fit_config(args, file_cfg)
        run.manifest["config"].update(model=args.model, fit=fitcfg.to_dict())
        series = _load_prices(args, run)
        window = _window(args, series)
        fit = fit_window(series, window, fitcfg, args.model)
        t, y = to_log_price(slice_window(series, window, fitcfg.min_points))
        test = logperiodicity_test(fit, t, y, freqs, alpha=args.alpha)
        spectrum = test.spectrum
        payload = {
            "status": test.status,
            "p_value": None if test.status == "undefined" else test.p_value,
            "fitted_omega": test.fitted_omega,
            "noise_rho": test.noise_rho,
            "fit": fit.to_dict(),
        }
        status = test.status
    payload.update(peak_omega=spectrum.peak_omega, peak_power=spectrum.peak_power, n_independent=spectrum.n_independent, degenerate=spectrum.degenerate)
    rows = [(repr(float(w)), repr(float(p))) for w, p in zip(spectrum.freqs, spectrum.power)]
    run.write_csv("spectrum.csv", _rows_csv(("omega", "power"), rows))
    run.write_json("lomb.json", payload)
    run.close()
    _say(f"peak omega = {spectrum.peak_omega:.2f}, power = {spectrum.peak_power:.2f}, status = {status}")
    return EXIT_UNDEFINED if status == "undefined" else EXIT_OK


def _read_xy(path: Path, x_col: str, y_col: str):
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(ln for ln in fh if not ln.startswith("#")))
    try:
        x = np.array([float(r[x_col]) for r in rows])
        y = np.array([float(r[y_col]) for r in rows])
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: bad sample row: {exc}") from None
    return x, y


def cmd_supply(args, file_cfg) -> int:
    path = Path(args.input) if args.input else fixture_path()
    run = Run("supply", args, {"agency_a": args.agency_a, "agency_b": args.agency_b, "cutoff": args.cutoff})
    flows = load_flows(path)
    run.add_input(path)
    cutoff = Quarter.parse(args.cutoff)
    gap_rows = []
    regimes = {}
    for agency in (args.agency_a, args.agency_b):
        gap_rows += [(str(q), agency, repr(round(g, 10))) for q, g in gap_series(flows, agency)]
        pre, post = regime_flag(flows, agency, cutoff)
        regimes[agency] = {"pre_fraction_supply_exceeds": pre, "post_fraction_supply_exceeds": post}
    disc = agency_discrepancy(flows, args.agency_a, args.agency_b)
    run.write_csv("supply_gaps.csv", _rows_csv(("quarter", "agency", "gap_mbd"), gap_rows))
    run.write_csv(
        "supply_discrepancy.csv",
        _rows_csv(
            ("quarter", "supply_diff_mbd", "demand_diff_mbd"),
            [(str(q), repr(round(s, 10)), repr(round(d, 10))) for q, s, d in disc],
        ),
    )
    post = [s for q, s, _ in disc if q >= cutoff]
    summary = {
        "cutoff": str(cutoff),
        "agencies": [args.agency_a, args.agency_b],
        "regime": regimes,
        "mean_supply_diff_post_cutoff": float(np.mean(post)) if post else None,
    }
    run.write_json("supply.json", summary)
    run.close()
    for agency, r in regimes.items():
        _say(f"{agency}: supply > demand in {r['pre_fraction_supply_exceeds']:.0%} of quarters before {cutoff}, "
             f"{r['post_fraction_supply_exceeds']:.0%} from {cutoff}")
    if post:
        _say(f"mean {args.agency_a} - {args.agency_b} supply from {cutoff}: {np.mean(post):+.2f} Mb/d")
    return EXIT_OK


def cmd_convert(args, file_cfg) -> int:
    run = Run("convert", args, {"currency": args.currency, **_io_config(args)})
    prices = _load_prices(args, run)
    fx = load_csv(args.fx, CsvSchema(args.fx_date_col, args.fx_value_col, args.date_format))
    run.add_input(args.fx)
    out = convert_currency(prices, fx, args.currency)
    name = args.output or f"{Path(args.input).stem}_{args.currency.lower()}.csv"
    text = _rows_csv(("date", "value"), [(d.isoformat(), repr(v)) for d, v in zip(out.dates.tolist(), out.values.tolist())])
    run.write_csv(name, text)
    run.close()
    _say(f"wrote {len(out)} {args.currency} prices to {run.out_dir / name}")
    return EXIT_OK


def cmd_synth(args, file_cfg) -> int:
    if args.params:
        path = Path(args.params)
        if not path.is_file():
            raise InputError(f"input file not found: {path}")
        params = params_from_dict(json.loads(path.read_text(encoding="utf-8")))
    else:
        dates = trading_days(args.start, args.end)
        t_end = float((dates[-1] - dates[0]).astype(float)) / 365.25
        params = SimpleParams(t_end + args.tc_offset, args.m, args.omega, args.phi, args.A, args.B, args.C)
    run = Run("synth", args, {"params": params.to_dict(), "start": args.start.isoformat(), "end": args.end.isoformat(),
                              "noise": args.noise, "sigma": args.sigma, "rho": args.rho})
    if args.params:
        run.add_input(args.params)
    series = synth_generate(params, trading_days(args.start, args.end), Noise(args.noise, args.sigma, args.rho), args.seed)
    text = _rows_csv(("date", "value"), [(d.isoformat(), repr(v)) for d, v in zip(series.dates.tolist(), series.values.tolist())])
    run.write_csv(args.output, text)
    run.close()
    _say(f"wrote {len(series)} synthetic prices to {run.out_dir / args.output}")
    return EXIT_OK


def _io_config(args) -> dict:
    keys = ("t_start", "t_last", "date_col", "value_col", "date_format")
    return {k: (v.isoformat() if isinstance(v, dt.date) else v) for k in keys if (v := getattr(args, k, None)) is not None}


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or TOML file with 'fit', 'scan' and 'bootstrap' sections")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1, help="parallel processes; never changes results")
    common.add_argument("--out-dir", default=".")

    prices = argparse.ArgumentParser(add_help=False)
    prices.add_argument("--input", required=True, help="price CSV with a header row")
    prices.add_argument("--date-col", default="date")
    prices.add_argument("--value-col", default="value")
    prices.add_argument("--date-format", default=None, help="strptime format; ISO-8601 when omitted")

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("--harmonics", type=int, help="Weierstrass harmonic count (default 3)")
    fitting.add_argument("--m-bounds", type=_pair)
    fitting.add_argument("--omega-bounds", type=_pair)
    fitting.add_argument("--tc-horizon", type=float, help="years after t_last a qualified tc may lie")
    fitting.add_argument("--top-k", type=int)
    fitting.add_argument("--max-iter", type=int)
    fitting.add_argument("--tol", type=float)
    fitting.add_argument("--min-points", type=int)

    window = argparse.ArgumentParser(add_help=False)
    window.add_argument("--t-start", type=_date)
    window.add_argument("--t-last", type=_date)
    window.add_argument("--model", choices=KINDS, default="simple")

    parser = argparse.ArgumentParser(prog="lpplscan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common, prices, fitting, window], help="calibrate one window")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("scan", parents=[common, prices, fitting], help="shrinking-window tc scan")
    p.add_argument("--t-start-min", type=_date)
    p.add_argument("--t-start-max", type=_date, required=True)
    p.add_argument("--t-last", type=_date)
    p.add_argument("--step", type=int, help="calendar days between window starts (default 5)")
    p.add_argument("--models", help="comma list of simple,weierstrass,landau")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("bootstrap", parents=[common, prices, fitting, window], help="block-bootstrap tc distribution")
    p.add_argument("--replicas", type=int)
    p.add_argument("--block-len", type=int)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("lomb", parents=[common, fitting, window], help="Lomb spectrum / log-periodicity test")
    p.add_argument("--samples", help="CSV of (x, y) samples to analyse directly")
    p.add_argument("--x-col", default="x")
    p.add_argument("--y-col", default="y")
    p.add_argument("--input", help="price CSV: fit a window and test its log-periodicity")
    p.add_argument("--date-col", default="date")
    p.add_argument("--value-col", default="value")
    p.add_argument("--date-format", default=None)
    p.add_argument("--freqs", help="LO,HI,STEP angular-frequency grid (default 2,20,0.05)")
    p.add_argument("--alpha", type=float, default=0.01)
    p.set_defaults(func=cmd_lomb)

    p = sub.add_parser("supply", parents=[common], help="agency supply/demand analytics")
    p.add_argument("--input", help="CSV of year,quarter,agency,demand_mbd,supply_mbd (default: bundled fixture)")
    p.add_argument("--agency-a", default="IEA")
    p.add_argument("--agency-b", default="EIA")
    p.add_argument("--cutoff", default="2006Q1")
    p.set_defaults(func=cmd_supply)

    p = sub.add_parser("convert", parents=[common, prices], help="re-express prices in another currency")
    p.add_argument("--fx", required=True, help="CSV of the X-per-Y exchange rate")
    p.add_argument("--fx-date-col", default="date")
    p.add_argument("--fx-value-col", default="value")
    p.add_argument("--currency", default="EUR")
    p.add_argument("--output", help="output file name inside --out-dir")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("synth", parents=[common], help="synthetic LPPL price series")
    p.add_argument("--params", help="JSON parameter set (any variant; t in years from --start)")
    p.add_argument("--start", type=_date, default=dt.date(2006, 5, 29))
    p.add_argument("--end", type=_date, default=dt.date(2008, 5, 27))
    p.add_argument("--tc-offset", type=float, default=0.1, help="years from the last date to tc")
    p.add_argument("--m", type=float, default=0.5)
    p.add_argument("--omega", type=float, default=7.0)
    p.add_argument("--phi", type=float, default=1.0)
    p.add_argument("--A", type=float, default=math.log(130.0))
    p.add_argument("--B", type=float, default=-1.0)
    p.add_argument("--C", type=float, default=0.05)
    p.add_argument("--noise", choices=("iid-normal", "ar1"), default="iid-normal")
    p.add_argument("--sigma", type=float, default=0.005)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--output", default="synthetic.csv")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_cfg = _load_config_file(args.config)
        return args.func(args, file_cfg)
    except UndefinedTestError as exc:
        _say(f"error: {exc}")
        return EXIT_UNDEFINED
    except MethodError as exc:
        _say(f"error: {exc}")
        return EXIT_METHOD
    except (LpplError, ValueError, OSError) as exc:
        _say(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
