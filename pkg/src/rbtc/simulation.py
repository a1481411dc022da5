"""Monte Carlo comparison of the nine estimators (bias, MSE, MRE)."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .distribution import RbtcParams
from .estimation import EstimatorKind, fit
from .optimize import OptimizerOptions
from .sampling import SAMPLERS, RngStream, sample, tune_proposal

logger = logging.getLogger(__name__)

__all__ = [
    "SimCase",
    "SimConfig",
    "CellStats",
    "SimStudyResult",
    "STANDARD_CASES",
    "run_study",
    "aggregate",
    "emit_table",
    "write_results_csv",
    "read_results_csv",
    "parse_config",
    "load_config",
]

PARAM_NAMES = ("omega", "kappa", "p")
FAILURE_FLAG_FRACTION = 0.2


@dataclass(frozen=True)
class SimCase:
    truth: RbtcParams
    label: str

    def __post_init__(self):
        if not self.truth.is_interior:
            raise ValueError("simulation truth must have 0 < p < 1")


STANDARD_CASES = (
    SimCase(RbtcParams(2.0, 1.0, 0.5), "I"),
    SimCase(RbtcParams(0.9, 0.9, 0.9), "II"),
    SimCase(RbtcParams(1.5, 0.5, 0.3), "III"),
    SimCase(RbtcParams(2.2, 0.7, 0.2), "IV"),
)

# One full Nelder-Mead start per replication keeps desk-scale studies tractable.
SIM_OPTIMIZER = OptimizerOptions(n_starts=1)


@dataclass(frozen=True)
class SimConfig:
    cases: tuple[SimCase, ...] = STANDARD_CASES
    sample_sizes: tuple[int, ...] = (25, 100, 1000)
    replications: int = 1000
    estimators: tuple[EstimatorKind, ...] = tuple(EstimatorKind)
    seed: int = 20250101
    sampler: str = "mixture"
    workers: int = 1
    optimizer: OptimizerOptions = SIM_OPTIMIZER

    def __post_init__(self):
        if not self.cases:
            raise ValueError("at least one case is required")
        if not self.estimators:
            raise ValueError("at least one estimator is required")
        if self.replications < 2:
            raise ValueError("replications must be >= 2")
        if any(n < 10 for n in self.sample_sizes) or not self.sample_sizes:
            raise ValueError("sample sizes must be >= 10")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if len({c.label for c in self.cases}) != len(self.cases):
            raise ValueError("case labels must be unique")


@dataclass(frozen=True)
class CellStats:
    case: str
    n: int
    estimator: str
    param: str
    bias: float
    mse: float
    mre: float
    failures: int


@dataclass
class SimStudyResult:
    cells: list[CellStats]
    replications: int = 0
    flagged: list[tuple[str, int, str]] = field(default_factory=list)

    def get(self, case: str, n: int, estimator, param: str) -> CellStats:
        est = EstimatorKind.parse(estimator).value
        for c in self.cells:
            if c.case == case and c.n == n and c.estimator == est and c.param == param:
                return c
        raise KeyError((case, n, est, param))

    def cases(self) -> list[str]:
        return list(dict.fromkeys(c.case for c in self.cells))

    def sample_sizes(self) -> list[int]:
        return list(dict.fromkeys(c.n for c in self.cells))

    def estimators(self) -> list[str]:
        return list(dict.fromkeys(c.estimator for c in self.cells))


def aggregate(estimates: np.ndarray, truth: tuple[float, float, float]):
    """Bias, MSE and MRE per parameter over the finite rows of ``estimates``.

    Rows containing NaN are failed replications; they are dropped and counted.
    Sums run in row order so the result is bit-reproducible.
    """
    estimates = np.asarray(estimates, dtype=float)
    ok = np.all(np.isfinite(estimates), axis=1)
    good = estimates[ok]
    failures = int((~ok).sum())
    out = []
    for j, true in enumerate(truth):
        if good.shape[0] == 0:
            out.append((math.nan, math.nan, math.nan))
            continue
        err = good[:, j] - true
        m = good.shape[0]
        bias = math.fsum(err) / m
        mse = math.fsum(err * err) / m
        mre = math.fsum(np.abs(err) / true) / m
        out.append((bias, mse, mre))
    return out, failures


def _replicate(task):
    """One work unit: a block of replications for one (case, n) cell."""
    case_idx, truth, n, reps, estimators, seed, sampler, proposal, optimizer = task
    params = RbtcParams(*truth)
    rows = np.full((len(reps), len(estimators), 3), np.nan)
    for r_i, rep in enumerate(reps):
        rng = RngStream(seed, stream_id=rep, key=(case_idx, n))
        x = sample(params, rng, n, sampler=sampler, proposal=proposal)
        for e_i, kind in enumerate(estimators):
            try:
                res = fit(kind, x, optimizer)
            except (ValueError, ArithmeticError) as exc:
                logger.debug("fit failed case=%s n=%s rep=%s: %s", case_idx, n, rep, exc)
                continue
            if res.converged:
                rows[r_i, e_i] = res.params.as_tuple()
    return rows


def _chunks(reps: int, size: int):
    return [list(range(a, min(reps, a + size))) for a in range(0, reps, size)]


def run_study(config: SimConfig) -> SimStudyResult:
    """Run every (case, n) cell and aggregate per estimator and parameter.

    Replication ``r`` of a cell always draws from stream ``r`` of that cell,
    and results are assembled by replication index, so the outcome does not
    depend on ``config.workers``.
    """
    tasks = []
    layout = []
    for c_i, case in enumerate(config.cases):
        proposal = tune_proposal(case.truth) if config.sampler == "ar" else None
        for n in config.sample_sizes:
            for block in _chunks(config.replications, 25):
                tasks.append((c_i, case.truth.as_tuple(), n, block, config.estimators,
                              config.seed, config.sampler, proposal, config.optimizer))
                layout.append((c_i, n))

    if config.workers == 1:
        blocks = [_replicate(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            blocks = list(pool.map(_replicate, tasks))

    cells = []
    flagged = []
    for c_i, case in enumerate(config.cases):
        for n in config.sample_sizes:
            rows = np.concatenate([b for b, key in zip(blocks, layout) if key == (c_i, n)])
            for e_i, kind in enumerate(config.estimators):
                stats, failures = aggregate(rows[:, e_i, :], case.truth.as_tuple())
                if failures > FAILURE_FLAG_FRACTION * config.replications:
                    flagged.append((case.label, n, kind.value))
                for name, (bias, mse, mre) in zip(PARAM_NAMES, stats):
                    cells.append(CellStats(case.label, n, kind.value, name, bias, mse, mre, failures))
    return SimStudyResult(cells=cells, replications=config.replications, flagged=flagged)


_RESULT_COLUMNS = ("case", "n", "estimator", "param", "bias", "mse", "mre", "failures")


def write_results_csv(result: SimStudyResult) -> str:
    """Long-format CSV, one row per (case, n, estimator, parameter), full precision."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_RESULT_COLUMNS)
    for c in result.cells:
        w.writerow([c.case, c.n, c.estimator, c.param, repr(c.bias), repr(c.mse), repr(c.mre), c.failures])
    return buf.getvalue()


def read_results_csv(text: str) -> SimStudyResult:
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and tuple(rows[0].keys()) != _RESULT_COLUMNS:
        raise ValueError(f"unexpected columns {tuple(rows[0].keys())}")
    cells = [CellStats(r["case"], int(r["n"]), r["estimator"], r["param"], float(r["bias"]),
                       float(r["mse"]), float(r["mre"]), int(r["failures"])) for r in rows]
    return SimStudyResult(cells=cells)


_TABLE_STATS = ("bias", "mse", "mre")
_HAT = {"omega": "omega_hat", "kappa": "kappa_hat", "p": "p_hat"}


def _wide_rows(result: SimStudyResult, case: str):
    for est in result.estimators():
        for n in result.sample_sizes():
            vals = []
            for stat in _TABLE_STATS:
                for param in PARAM_NAMES:
                    vals.append(getattr(result.get(case, n, est, param), stat))
            yield est, n, vals


def emit_table(result: SimStudyResult, format: str = "markdown") -> str:
    """Render the study in the layout Bias/MSE/MRE x (omega, kappa, p) per (estimator, n).

    ``format`` is ``"markdown"`` (one block per estimator), ``"csv"`` or ``"json"``.
    """
    labels = [f"{stat}_{_HAT[p]}" for stat in _TABLE_STATS for p in PARAM_NAMES]
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["case", "estimator", "n", *labels])
        for case in result.cases():
            for est, n, vals in _wide_rows(result, case):
                w.writerow([case, est.upper(), n, *(repr(v) for v in vals)])
        return buf.getvalue()
    if format == "markdown":
        lines = []
        for case in result.cases():
            lines.append(f"## Case {case}")
            lines.append("")
            current = None
            for est, n, vals in _wide_rows(result, case):
                if est != current:
                    if current is not None:
                        lines.append("")
                    lines.append(f"### {est.upper()}")
                    lines.append("")
                    lines.append("| n | " + " | ".join(labels) + " |")
                    lines.append("|---" * (len(labels) + 1) + "|")
                    current = est
                lines.append(f"| {n} | " + " | ".join(f"{v:.5f}" for v in vals) + " |")
            lines.append("")
        return "\n".join(lines)
    if format == "json":
        rows = [{"case": case, "estimator": est, "n": n, **{k: v if math.isfinite(v) else None for k, v in zip(labels, vals)}}
                for case in result.cases() for est, n, vals in _wide_rows(result, case)]
        return json.dumps(rows, indent=2) + "\n"
    raise ValueError(f"unknown table format {format!r}")


def _parse_case(text: str, label: str) -> SimCase:
    parts = [float(v) for v in text.replace(",", " ").split()]
    if len(parts) != 3:
        raise ValueError(f"case needs three numbers omega,kappa,p: {text!r}")
    return SimCase(RbtcParams(*parts), label)


def parse_config(text: str) -> SimConfig:
    """Read a study config from JSON or from ``key = value`` lines.

    Recognised keys: cases (``omega,kappa,p`` triples separated by ``;``, or
    ``standard``), labels, sample_sizes, replications, estimators, seed,
    sampler, workers, n_starts.
    """
    stripped = text.strip()
    if stripped.startswith("{"):
        raw = json.loads(stripped)
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            raw[key] = value

    known = {"cases", "labels", "sample_sizes", "replications", "estimators", "seed", "sampler",
             "workers", "n_starts"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    def as_list(v):
        if isinstance(v, list):
            return v
        return [s for s in str(v).replace(";", ",").split(",") if s.strip()]

    kwargs = {}
    cases = raw.get("cases", "standard")
    if cases == "standard":
        kwargs["cases"] = STANDARD_CASES
    else:
        if isinstance(cases, str):
            items = [c for c in cases.split(";") if c.strip()]
        else:
            items = [",".join(map(str, c)) if isinstance(c, list) else str(c) for c in cases]
        labels = as_list(raw["labels"]) if "labels" in raw else [str(i + 1) for i in range(len(items))]
        if len(labels) != len(items):
            raise ValueError("labels and cases differ in length")
        kwargs["cases"] = tuple(_parse_case(c, str(lab).strip()) for c, lab in zip(items, labels))
    if "sample_sizes" in raw:
        kwargs["sample_sizes"] = tuple(int(v) for v in as_list(raw["sample_sizes"]))
    if "replications" in raw:
        kwargs["replications"] = int(raw["replications"])
    if "estimators" in raw:
        kwargs["estimators"] = tuple(EstimatorKind.parse(str(v).strip()) for v in as_list(raw["estimators"]))
    if "seed" in raw:
        kwargs["seed"] = int(raw["seed"])
    if "sampler" in raw:
        kwargs["sampler"] = str(raw["sampler"]).strip()
    if "workers" in raw:
        kwargs["workers"] = int(raw["workers"])
    if "n_starts" in raw:
        kwargs["optimizer"] = replace(SIM_OPTIMIZER, n_starts=int(raw["n_starts"]))
    return SimConfig(**kwargs)


def load_config(path) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
