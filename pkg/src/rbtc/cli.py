"""Command-line interface: ``rbtc {fit,compare,sample,simulate,gof,table}``.

Exit status is 0 on success, 1 for usage or data errors and 2 when a fit did
not converge (the result is still printed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import replace
from importlib import resources

import numpy as np

from . import distribution as dist
from . import simulation
from .competitors import MODEL_NAMES, fit_model, get_model, model_cdf, model_log_likelihood
from .data import DataSample
from .datasets import DATASETS, load
from .distribution import RbtcParams
from .estimation import EstimatorKind, fit
from .gof import gof_report
from .sampling import SAMPLERS, RngStream, sample

__all__ = ["main", "ingest", "IngestError", "load_data"]

EXIT_OK, EXIT_ERROR, EXIT_NONCONVERGED = 0, 1, 2
FORMATS = ("markdown", "csv", "json")
_SEP = re.compile(r"[,\s]+")


class IngestError(ValueError):
    pass


class _UsageError(Exception):
    pass


def ingest(path) -> DataSample:
    """Read positive decimals separated by whitespace or commas; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc.strerror or exc}") from exc
    values = []
    for lineno, line in enumerate(lines, 1):
        for tok in _SEP.split(line.split("#", 1)[0].strip()):
            if not tok:
                continue
            try:
                v = float(tok)
            except ValueError:
                raise IngestError(f"{path}:{lineno}: not a number: {tok!r}") from None
            if not (v > 0 and math.isfinite(v)):
                raise IngestError(f"{path}:{lineno}: observations must be positive and finite, got {tok}")
            values.append(v)
    if not values:
        raise IngestError(f"{path}: no observations")
    return DataSample(values)


def load_data(source: str) -> DataSample:
    if source.startswith("builtin:"):
        return load(source.split(":", 1)[1])
    return ingest(source)


def _parse_floats(text: str, count: int | None = None) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in _SEP.split(text.strip()) if t)
    except ValueError:
        raise _UsageError(f"cannot parse numbers from {text!r}") from None
    if count is not None and len(vals) != count:
        raise _UsageError(f"expected {count} comma-separated values, got {len(vals)}")
    return vals


# ---------------------------------------------------------------- rendering

def _fmt(v, full: bool) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "-"
    if isinstance(v, (tuple, list)):
        return ";".join(_fmt(x, full) for x in v) if full else "(" + ", ".join(_fmt(x, full) for x in v) + ")"
    if isinstance(v, float):
        return repr(v) if full else f"{v:.4f}"
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    return v


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{k: _jsonable(v) for k, v in r.items()} for r in rows], indent=2) + "\n"
    cols = list(rows[0]) if rows else []
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c], True) for c in cols])
        return buf.getvalue()
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    lines += ["| " + " | ".join(_fmt(r[c], False) for c in cols) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def _row(model, estimator, params, neg2ll, report, ses, converged) -> dict:
    return {
        "model": model, "estimator": estimator, "neg2_loglik": neg2ll,
        "ks": report.ks if report else None, "ad": report.ad if report else None,
        "cvm": report.cvm if report else None, "p_ks": report.p_ks if report else None,
        "p_ad": report.p_ad if report else None, "p_cvm": report.p_cvm if report else None,
        "params": params, "std_errors": ses, "converged": converged,
    }


def _fit_one(model: str, estimator: EstimatorKind, data: DataSample) -> dict:
    spec = get_model(model)
    if spec.name == "RBTC" and estimator is not EstimatorKind.MLE:
        res = fit(estimator, data)
        params, neg2ll, ses, conv = res.params.as_tuple(), res.neg2_loglik, None, res.converged
    elif estimator is not EstimatorKind.MLE:
        raise _UsageError(f"estimator {estimator.value!r} is only available for RBTC; use mle for {spec.name}")
    else:
        res = fit_model(spec, data)
        params, neg2ll, ses, conv = res.params, res.neg2_loglik, res.std_errors, res.converged
    report = gof_report(lambda x: model_cdf(spec, params, x), data, neg2ll)
    return _row(spec.name, estimator.value, params, neg2ll, report, ses, conv)


def cmd_fit(args) -> int:
    data = load_data(args.data)
    row = _fit_one(args.model, EstimatorKind.parse(args.estimator), data)
    _emit(render([row], args.format), args.out)
    return EXIT_OK if row["converged"] else EXIT_NONCONVERGED


def cmd_compare(args) -> int:
    data = load_data(args.data)
    estimator = EstimatorKind.parse(args.estimator)
    models = [get_model(m).name for m in args.models] if args.models else list(MODEL_NAMES)
    rows = []
    for name in models:
        try:
            rows.append(_fit_one(name, estimator, data))
        except _UsageError:
            raise
        except Exception as exc:  # keep the table going
            print(f"warning: {name} fit failed: {exc}", file=sys.stderr)
            rows.append(_row(name, estimator.value, None, None, None, None, False))
    rows.sort(key=lambda r: (r["ks"] is None, r["ks"] if r["ks"] is not None else 0.0))
    _emit(render(rows, args.format), args.out)
    return EXIT_OK if all(r["converged"] for r in rows) else EXIT_NONCONVERGED


def cmd_gof(args) -> int:
    data = load_data(args.data)
    spec = get_model(args.model)
    params = spec.check(_parse_floats(args.params, spec.param_count))
    neg2ll = -2.0 * model_log_likelihood(spec, params, data)
    report = gof_report(lambda x: model_cdf(spec, params, x), data, neg2ll)
    _emit(render([_row(spec.name, "-", params, neg2ll, report, None, True)], args.format), args.out)
    return EXIT_OK


def _rbtc_params(text: str) -> RbtcParams:
    return RbtcParams(*_parse_floats(text, 3))


def cmd_sample(args) -> int:
    params = _rbtc_params(args.params)
    if args.n < 1:
        raise _UsageError("n must be >= 1")
    x = sample(params, RngStream(args.seed), args.n, args.sampler)
    _emit("".join(f"{v:.17g}\n" for v in x), args.out)
    return EXIT_OK


def cmd_table(args) -> int:
    params = _rbtc_params(args.params)
    if args.points < 2:
        raise _UsageError("points must be >= 2")
    u = np.linspace(0.05, 0.95, args.points)
    x = np.asarray(dist.quantile(params, u))
    rows = [{"u": float(a), "quantile": float(b), "cdf": float(c), "pdf": float(d), "hazard": float(e)}
            for a, b, c, d, e in zip(u, x, dist.cdf(params, x), dist.pdf(params, x), dist.hazard(params, x))]
    _emit(render(rows, args.format), args.out)
    return EXIT_OK


def _load_sim_config(source: str) -> simulation.SimConfig:
    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        ref = resources.files("rbtc") / "configs" / name
        if not ref.is_file():
            raise _UsageError(f"no bundled config named {name!r}")
        return simulation.parse_config(ref.read_text(encoding="utf-8"))
    try:
        return simulation.load_config(source)
    except OSError as exc:
        raise _UsageError(f"cannot read {source}: {exc.strerror or exc}") from exc


def cmd_simulate(args) -> int:
    config = _load_sim_config(args.config)
    overrides = {}
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.sampler is not None:
        overrides["sampler"] = args.sampler
    if args.replications is not None:
        overrides["replications"] = args.replications
    if overrides:
        config = replace(config, **overrides)
    result = simulation.run_study(config)
    text = simulation.write_results_csv(result) if args.format == "csv" else simulation.emit_table(result, args.format)
    _emit(text, args.out)
    if result.flagged:
        print(f"flagged cells (failure fraction above {simulation.FAILURE_FLAG_FRACTION}):", file=sys.stderr)
        for cell in result.flagged:
            print(f"  {cell}", file=sys.stderr)
    else:
        print("no flagged cells", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _default_workers():
    env = os.environ.get("RBTC_WORKERS")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise _UsageError(f"RBTC_WORKERS must be an integer, got {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rbtc", description="Record-based transmuted Chen distribution tools.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, data=True, fmt=True):
        if data:
            sp.add_argument("--data", required=True,
                            help=f"data file, or builtin:NAME with NAME in {{{', '.join(DATASETS)}}}")
        if fmt:
            sp.add_argument("--format", choices=FORMATS, default="markdown")
        sp.add_argument("--out", help="output file (default: stdout)")

    sp = sub.add_parser("fit", help="fit one model")
    sp.add_argument("--model", default="RBTC", help=f"one of {', '.join(MODEL_NAMES)}")
    sp.add_argument("--estimator", default="mle", help="estimator (non-MLE estimators apply to RBTC only)")
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("compare", help="fit every model and rank by KS")
    sp.add_argument("--estimator", default="mle")
    sp.add_argument("--model", dest="models", action="append", help="restrict to this model (repeatable)")
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("gof", help="goodness of fit at given parameters")
    sp.add_argument("--model", default="RBTC")
    sp.add_argument("--params", required=True, help="comma-separated parameter values")
    common(sp)
    sp.set_defaults(func=cmd_gof)

    sp = sub.add_parser("sample", help="draw RBTC variates, one per line")
    sp.add_argument("--params", required=True, help="omega,kappa,p")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sampler", choices=SAMPLERS, default="mixture")
    common(sp, data=False, fmt=False)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("simulate", help="run a Monte Carlo study from a config file")
    sp.add_argument("--config", required=True, help="config file, or builtin:NAME for a bundled one")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--sampler", choices=SAMPLERS, default=None)
    sp.add_argument("--replications", type=int, default=None, help="override the config's replication count")
    sp.add_argument("--format", choices=FORMATS, default="csv",
                    help="csv: long format, one row per cell and parameter; markdown/json: table layout")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("table", help="cdf, pdf, hazard and quantile on a probability grid")
    sp.add_argument("--params", required=True, help="omega,kappa,p")
    sp.add_argument("--points", type=int, default=10)
    common(sp, data=False)
    sp.set_defaults(func=cmd_table)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "workers", None) is None and args.command == "simulate":
            args.workers = _default_workers()
        return args.func(args)
    except (_UsageError, ValueError) as exc:
        print(f"rbtc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
