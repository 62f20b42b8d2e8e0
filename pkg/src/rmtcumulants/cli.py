"""Command-line front end: experiment configs in, reports and data files out.

Exit codes: 0 on success, 2 when a bound check or lemma suite fails,
1 on any error.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import sys
import time
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import jsonschema
import numpy as np

from . import __version__, lemmas
from .errors import ConfigError, CumulantError, ModeError, SelfAdjointConditionError, SizeError
from .expansion import (
    DEFAULT_CONTRACTION_BUDGET,
    DEFAULT_MAX_M,
    GOE_MAX_M,
    EntryCumulantModel,
    corollary_bound,
    exact_cumulant,
    exact_cumulant_gaussian,
)
from .montecarlo import (
    clt_diagnostics,
    concentration_alpha,
    estimate_cumulants,
    fit_scaling_exponent,
    mean_variance,
    normalize_statistic,
    sample_traces,
    thread_count,
    THREADS_ENV,
)
from .polynomial import DeterministicSet, PolynomialSpec
from .randmat import BUILTINS, DISTRIBUTIONS, ENSEMBLES, EntryDistribution, builtin_deterministic, sample_batch

log = logging.getLogger("rmtcumulants")

MODES = {
    "exact": "cumulants by the exact partition expansion, with the corollary bound",
    "mc": "Monte Carlo cumulant estimates with bootstrap standard errors",
    "verify-lemmas": "exhaustive and randomised checks of the graph inequalities",
    "scaling": "fit the N-exponent of |K_r| from exact or Monte Carlo values",
    "clt": "Kolmogorov distance and tail profile of the normalized trace",
}
CSV_COLUMNS = ("N", "r", "mode", "value_re", "value_im", "stderr", "bound", "verdict")

_TOKEN = {
    "type": "array",
    "minItems": 2,
    "maxItems": 3,
    "prefixItems": [{"enum": ["X", "D"]}, {"type": ["integer", "string"]}, {"enum": ["T", "⊤"]}],
}
_NUMBER = {"type": "number"}
_COEF = {"oneOf": [_NUMBER, {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}]}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "polynomial", "mode"],
    "properties": {
        "model": {"enum": list(ENSEMBLES)},
        "distribution": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": sorted(DISTRIBUTIONS)},
                "scale": {"type": "number", "exclusiveMinimum": 0},
                "cumulants": {"type": "array", "items": _NUMBER, "minItems": 2},
                "order": {"type": "integer", "minimum": 2},
            },
        },
        "polynomial": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["word"],
                "properties": {"coef": _COEF, "word": {"type": "array", "minItems": 1, "items": _TOKEN}},
            },
        },
        "deterministic": {"type": "object", "additionalProperties": {"type": "string"}},
        "N": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "r": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "mode": {"enum": list(MODES)},
        "source": {"enum": ["exact", "mc"]},
        "exact_normalization": {"type": "boolean"},
        "abs_norms": {"type": "boolean"},
        "target": {"enum": ["gaussian", "wigner"]},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "slack": {"type": "number", "exclusiveMinimum": 0},
        "budgets": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_m": {"type": "integer", "minimum": 1},
                "contraction": {"type": "number", "exclusiveMinimum": 0},
                "bootstrap": {"type": "integer", "minimum": 200},
                "max_r": {"type": "integer", "minimum": 1},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "report": {"type": "string"},
                "csv": {"type": "string"},
                "gnuplot": {"type": "boolean"},
            },
        },
    },
}

_DEFAULTS = {
    "deterministic": {},
    "N": [4],
    "r": [2],
    "samples": 10000,
    "seed": 0,
    "source": "exact",
    "exact_normalization": False,
    "abs_norms": False,
    "target": None,
    "tolerance": 0.1,
    "slack": 1.5,
}
_MODE_NEEDS = {"mc": ("samples",), "clt": ("samples",), "scaling": ("N", "r")}


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    polynomial: tuple
    mode: str
    distribution: tuple | None = None
    deterministic: tuple = ()
    N: tuple = (4,)
    r: tuple = (2,)
    samples: int = 10000
    seed: int = 0
    source: str = "exact"
    exact_normalization: bool = False
    abs_norms: bool = False
    target: str | None = None
    tolerance: float = 0.1
    slack: float = 1.5
    budgets: tuple = ()
    output: tuple = ()

    @property
    def budget(self) -> dict:
        return dict(self.budgets)

    @property
    def outputs(self) -> dict:
        out = {"dir": "rmtcumulants-out", "report": "report.json", "csv": "rows.csv", "gnuplot": False}
        out.update(dict(self.output))
        return out

    def spec(self) -> PolynomialSpec:
        items = [{"coef": list(c), "word": [list(t) for t in w]} for c, w in self.polynomial]
        return PolynomialSpec.from_words(items)

    def entry_distribution(self) -> EntryDistribution | None:
        if self.distribution is None:
            return None
        d = dict(self.distribution)
        cums = d.get("cumulants")
        return EntryDistribution(d["name"], d.get("scale"), tuple(cums) if cums else None)

    def cumulant_model(self) -> EntryCumulantModel:
        order = dict(self.distribution or ()).get("order", 12)
        return EntryCumulantModel.for_tag(self.model, self.entry_distribution(), order)

    def detset(self, N: int) -> DeterministicSet:
        return DeterministicSet(N, {name: builtin_deterministic(b, N) for name, b in self.deterministic})


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def _freeze(v):
    if isinstance(v, dict):
        return tuple(sorted((k, _freeze(x)) for k, x in v.items()))
    if isinstance(v, list):
        return tuple(_freeze(x) for x in v)
    return v


def _thaw(v):
    if isinstance(v, tuple):
        if v and all(isinstance(x, tuple) and len(x) == 2 and isinstance(x[0], str) for x in v):
            return {k: _thaw(x) for k, x in v}
        return [_thaw(x) for x in v]
    return v


def parse_config(text: str) -> ExperimentConfig:
    """Validate a JSON experiment description and fill in defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ConfigError(f"config error at {_pointer(err.absolute_path)}: {err.message}")
    for need in _MODE_NEEDS.get(doc["mode"], ()):
        if need not in doc:
            raise ConfigError(f"config error at /{need}: required for mode {doc['mode']!r}")
    for k, v in _DEFAULTS.items():
        doc.setdefault(k, v)
    if doc["model"] == "wigner" and "distribution" not in doc:
        raise ConfigError("config error at /distribution: required for the wigner model")
    if doc["mode"] == "scaling" and len(set(doc["N"])) < 3:
        raise ConfigError("config error at /N: scaling needs at least three distinct N")

    poly = []
    for k, item in enumerate(doc["polynomial"]):
        c = item.get("coef", 1)
        c = (float(c[0]), float(c[1])) if isinstance(c, list) else (float(c), 0.0)
        word = tuple(tuple(t) for t in item["word"])
        for j, tok in enumerate(word):
            if tok[0] == "X" and (not isinstance(tok[1], int) or isinstance(tok[1], bool)):
                raise ConfigError(f"config error at /polynomial/{k}/word/{j}: random symbols are integers")
            if tok[0] == "D" and len(tok) == 3:
                raise ConfigError(f"config error at /polynomial/{k}/word/{j}: only X letters take a transpose")
        poly.append((c, tuple(tuple(str(x) if i == 1 and tok[0] == "D" else x for i, x in enumerate(tok))
                               for tok in word)))
    dist = doc.get("distribution")
    cfg = ExperimentConfig(
        model=doc["model"],
        polynomial=tuple(poly),
        mode=doc["mode"],
        distribution=_freeze(dist) if dist else None,
        deterministic=tuple(sorted(doc["deterministic"].items())),
        N=tuple(doc["N"]),
        r=tuple(doc["r"]),
        samples=doc["samples"],
        seed=doc["seed"],
        source=doc["source"],
        exact_normalization=doc["exact_normalization"],
        abs_norms=doc["abs_norms"],
        target=doc["target"],
        tolerance=float(doc["tolerance"]),
        slack=float(doc["slack"]),
        budgets=_freeze(doc.get("budgets", {})),
        output=_freeze(doc.get("output", {})),
    )
    _check_semantics(cfg)
    return cfg


def _check_semantics(cfg: ExperimentConfig) -> None:
    spec = cfg.spec()
    bound = {name for name, _ in cfg.deterministic}
    missing = spec.det_symbols - bound
    if missing:
        raise ConfigError(f"config error at /deterministic: no binding for symbols {sorted(missing)}")
    for name, b in cfg.deterministic:
        if b.split(":", 1)[0] not in {k.split("[")[0].split(":")[0] for k in BUILTINS}:
            raise ConfigError(f"config error at /deterministic/{name}: unknown builder {b!r}")
    if cfg.distribution is not None:
        try:
            cfg.entry_distribution()
        except ConfigError as exc:
            raise ConfigError(f"config error at /distribution: {exc}") from None
    if cfg.mode in ("mc", "clt", "scaling"):
        need = 10 * 2 ** max(cfg.r) if cfg.mode != "clt" else 10_000
        if cfg.mode != "scaling" or cfg.source == "mc":
            if cfg.samples < need:
                raise SizeError(f"config error at /samples: {cfg.samples} samples is below the floor {need}")
    if cfg.mode == "clt" and not _probe_real(cfg, spec):
        raise SelfAdjointConditionError(
            "clt mode needs a self-adjoint polynomial; its sampled traces have nonzero imaginary parts")


def _probe_real(cfg: ExperimentConfig, spec: PolynomialSpec) -> bool:
    """Trace of a few random draws at the smallest N is real for a self-adjoint polynomial."""
    from .randmat import trace_poly

    N = min(cfg.N)
    batch = sample_batch(N, 4, cfg.model, cfg.entry_distribution(), sorted(spec.random_symbols) or [1],
                         seed=12345, substream=0)
    vals = trace_poly(spec, batch, cfg.detset(N))
    return bool(np.all(np.abs(vals.imag) <= 1e-9 * np.maximum(1.0, np.abs(vals.real))))


def serialize_config(cfg: ExperimentConfig) -> str:
    doc = {
        "model": cfg.model,
        "mode": cfg.mode,
        "polynomial": [{"coef": list(c), "word": [list(t) for t in w]} for c, w in cfg.polynomial],
        "deterministic": dict(cfg.deterministic),
        "N": list(cfg.N),
        "r": list(cfg.r),
        "samples": cfg.samples,
        "seed": cfg.seed,
        "source": cfg.source,
        "exact_normalization": cfg.exact_normalization,
        "abs_norms": cfg.abs_norms,
        "tolerance": cfg.tolerance,
        "slack": cfg.slack,
        "budgets": _thaw(cfg.budgets) if cfg.budgets else {},
        "output": _thaw(cfg.output) if cfg.output else {},
    }
    if cfg.target is not None:
        doc["target"] = cfg.target
    if cfg.distribution is not None:
        doc["distribution"] = _thaw(cfg.distribution)
    return json.dumps(doc, indent=2, ensure_ascii=False)


# -- running ----------------------------------------------------------------


@dataclass
class Row:
    N: int | None
    r: int | None
    mode: str
    value_re: float
    value_im: float = 0.0
    stderr: float = 0.0
    bound: float | None = None
    verdict: str = ""


@dataclass
class RunReport:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    wall_time: float = 0.0
    version: str = __version__
    exit_code: int = 0
    files: list = field(default_factory=list)

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "config": json.loads(serialize_config(self.config)),
            "rows": [asdict(r) for r in self.rows],
            "diagnostics": self.diagnostics,
            "wall_time": self.wall_time,
            "exit_code": self.exit_code,
        }
        return json.dumps(doc, indent=2, default=_jsonable, allow_nan=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow([_cell(getattr(row, c)) for c in CSV_COLUMNS])
        return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return str(v)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def polynomial_bound(cfg: ExperimentConfig, spec: PolynomialSpec, r: int, N: int,
                     model: EntryCumulantModel, det: DeterministicSet) -> float | None:
    """Corollary bound on |K_r(Tr P)| obtained term by term; None where no bound applies."""
    if cfg.model == "wigner" and r < 2:
        return None
    monos = spec.monomials
    total = 0.0
    for combo in itertools.combinations_with_replacement(range(len(monos)), r):
        words = [monos[i] for i in combo]
        if any(not w.letters for w in words):
            if r == 1:
                total += abs(words[0].coef * np.trace(det.matrix(words[0].dets)))
            continue
        mult = math.factorial(r)
        for c in Counter(combo).values():
            mult //= math.factorial(c)
        coef = mult * math.prod(abs(w.coef) for w in words)
        power, b = corollary_bound(cfg.model, words, det, model)
        total += coef * b * N ** (-power)
    return total


def _exact_value(cfg: ExperimentConfig, spec, model, det, r: int, N: int) -> complex:
    b = cfg.budget
    budget = b.get("contraction", DEFAULT_CONTRACTION_BUDGET)
    if cfg.model in ("gue", "goe"):
        return exact_cumulant_gaussian(r, spec, det, N, cfg.model, b.get("max_m", GOE_MAX_M), budget).value
    return exact_cumulant(r, spec, model, det, N, max_m=b.get("max_m", DEFAULT_MAX_M), budget=budget).value


def _run_exact(cfg, spec, report: RunReport) -> None:
    model = cfg.cumulant_model()
    for N in cfg.N:
        det = cfg.detset(N)
        for r in cfg.r:
            val = _exact_value(cfg, spec, model, det, r, N)
            bound = polynomial_bound(cfg, spec, r, N, model, det)
            if bound is None:
                verdict = "n/a"
            else:
                verdict = "pass" if abs(val) <= bound * (1 + 1e-9) else "fail"
            report.rows.append(Row(N, r, "exact", val.real, val.imag, 0.0, bound, verdict))
            log.info("exact N=%d r=%d value=%s %s", N, r, val, verdict)


def _samples(cfg, spec, N: int, threads: int):
    return sample_traces(spec, N, cfg.samples, cfg.model, cfg.entry_distribution(), cfg.detset(N),
                         seed=cfg.seed, threads=threads, spec_id=str(spec))


def _run_mc(cfg, spec, report: RunReport, threads: int) -> None:
    model = cfg.cumulant_model()
    n_boot = cfg.budget.get("bootstrap", 200)
    for N in cfg.N:
        s = _samples(cfg, spec, N, threads)
        if not s.is_real:
            if max(cfg.r) > 2:
                raise ModeError("complex traces support only r = 1 (mean) and r = 2 (variance)")
            mu, var = mean_variance(s)
            v = s.values
            stats = {1: (mu, float(np.std(v) / math.sqrt(len(v)))),
                     2: (complex(var), float(np.std(np.abs(v - mu) ** 2) / math.sqrt(len(v))))}
            for r in cfg.r:
                val, se = stats[r]
                report.rows.append(Row(N, r, "mc", val.real, val.imag, se, None, "n/a"))
            continue
        ests = {e.order: e for e in estimate_cumulants(s, max(cfg.r), n_boot=n_boot, threads=threads)}
        det = cfg.detset(N)
        for r in cfg.r:
            e = ests[r]
            bound = polynomial_bound(cfg, spec, r, N, model, det)
            if bound is None:
                verdict = "n/a"
            else:
                # a bound is contradicted only when the estimate clears it by 4 standard errors
                verdict = "pass" if abs(e.estimate) - 4 * e.stderr <= bound else "fail"
            report.rows.append(Row(N, r, "mc", e.estimate, 0.0, e.stderr, bound, verdict))


def _run_lemmas(report: RunReport, max_m: int | None, max_r: int | None) -> None:
    table = []
    for res in lemmas.all_suites(max_m, max_r):
        verdict = "pass" if res.passed else "fail"
        report.rows.append(Row(None, None, f"lemma:{res.name}", float(len(res.violations)), 0.0, 0.0, 0.0, verdict))
        table.append({"suite": res.name, "checked": res.checked, "violations": len(res.violations),
                      "examples": [str(v) for v in res.violations[:5]], "seconds": round(res.seconds, 3)})
    report.diagnostics["lemmas"] = table


def _write_plot(path: Path, header: str, rows) -> None:
    lines = [f"# {header}"] + [" ".join(repr(float(v)) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _run_scaling(cfg, spec, report: RunReport, threads: int, outdir: Path) -> None:
    model = cfg.cumulant_model()
    values: dict[int, dict] = {r: {} for r in cfg.r}
    for N in cfg.N:
        if cfg.source == "exact":
            det = cfg.detset(N)
            for r in cfg.r:
                v = _exact_value(cfg, spec, model, det, r, N)
                values[r][N] = v
                report.rows.append(Row(N, r, "exact", v.real, v.imag, 0.0, None, ""))
        else:
            ests = {e.order: e for e in estimate_cumulants(_samples(cfg, spec, N, threads), max(cfg.r),
                                                          n_boot=cfg.budget.get("bootstrap", 200), threads=threads)}
            for r in cfg.r:
                values[r][N] = ests[r]
                report.rows.append(Row(N, r, "mc", ests[r].estimate, 0.0, ests[r].stderr, None, ""))
    fits = {}
    for r in cfg.r:
        fit = fit_scaling_exponent(values[r], r, tolerance=cfg.tolerance)
        target = None if cfg.target is None else (fit.gaussian_target if cfg.target == "gaussian"
                                                  else fit.wigner_target)
        verdict = fit.verdict
        if target is not None and fit.verdict != "inconclusive":
            verdict = "pass" if cfg.target in fit.verdict else "fail"
        half = (fit.band[1] - fit.band[0]) / 2
        report.rows.append(Row(None, r, "scaling-fit", fit.slope, 0.0, half, target, verdict))
        fits[r] = {"slope": fit.slope, "band": list(fit.band), "gaussian_target": fit.gaussian_target,
                   "wigner_target": fit.wigner_target, "verdict": fit.verdict}
        pts = [(math.log(N), math.log(v)) for N, v in fit.points if v > 0]
        path = outdir / f"scaling_r{r}.dat"
        _write_plot(path, "log N, log |K_r|", pts)
        report.files.append(str(path))
    report.diagnostics["scaling"] = fits
    if cfg.outputs["gnuplot"]:
        script = outdir / "scaling.gp"
        plots = ", ".join(f"'scaling_r{r}.dat' using 1:2 with linespoints title 'r={r}'" for r in cfg.r)
        script.write_text("set xlabel 'log N'\nset ylabel 'log |K_r|'\nplot " + plots + "\n")
        report.files.append(str(script))


def _run_clt(cfg, spec, report: RunReport, threads: int, outdir: Path) -> None:
    alpha = concentration_alpha(cfg.model, spec.degree, cfg.abs_norms)
    model = cfg.cumulant_model() if cfg.exact_normalization else None
    diag = {}
    for N in cfg.N:
        s = _samples(cfg, spec, N, threads)
        if cfg.exact_normalization:
            det = cfg.detset(N)
            mu = _exact_value(cfg, spec, model, det, 1, N)
            var = _exact_value(cfg, spec, model, det, 2, N).real
            z = normalize_statistic(s, mu.real, var)
        else:
            z = normalize_statistic(s)
        d = clt_diagnostics(z, alpha, slack=cfg.slack)
        verdict = "ok" if d.passed else "tail-violation"
        report.rows.append(Row(N, None, "clt-ks", d.ks, 0.0, 0.0, None, verdict))
        extra = [r for r in cfg.r if r >= 3]
        if extra:
            ests = {e.order: e for e in estimate_cumulants(z, max(extra), threads=threads)}
            for r in extra:
                report.rows.append(Row(N, r, "mc-normalized", ests[r].estimate, 0.0, ests[r].stderr, None, ""))
        diag[N] = {"ks": d.ks, "skewness": d.skewness, "excess_kurtosis": d.kurtosis, "alpha": alpha,
                   "H": d.H, "delta": d.delta, "violations": d.violations}
        path = outdir / f"clt_N{N}.dat"
        _write_plot(path, "x, exceedance, bound", d.rows())
        report.files.append(str(path))
    report.diagnostics["clt"] = diag


def run(cfg: ExperimentConfig, threads: int = 1, write: bool = True,
        lemma_limits: tuple[int | None, int | None] = (None, None)) -> RunReport:
    """Carry out the experiment and write its files; the report carries the exit code."""
    start = time.perf_counter()
    report = RunReport(cfg)
    outdir = Path(cfg.outputs["dir"])
    if write:
        outdir.mkdir(parents=True, exist_ok=True)
    spec = cfg.spec()
    if cfg.mode == "exact":
        _run_exact(cfg, spec, report)
    elif cfg.mode == "mc":
        _run_mc(cfg, spec, report, threads)
    elif cfg.mode == "verify-lemmas":
        b = cfg.budget
        _run_lemmas(report, lemma_limits[0] or b.get("max_m"), lemma_limits[1] or b.get("max_r"))
    elif cfg.mode == "scaling":
        _run_scaling(cfg, spec, report, threads, outdir)
    elif cfg.mode == "clt":
        _run_clt(cfg, spec, report, threads, outdir)
    report.wall_time = time.perf_counter() - start
    if any(r.verdict == "fail" for r in report.rows):
        report.exit_code = 2
    if write:
        csv_path = outdir / cfg.outputs["csv"]
        json_path = outdir / cfg.outputs["report"]
        csv_path.write_text(report.to_csv())
        json_path.write_text(report.to_json())
        report.files += [str(csv_path), str(json_path)]
    return report


def list_builtins() -> str:
    lines = ["ensembles:"] + [f"  {e}" for e in ENSEMBLES]
    lines += ["entry distributions:"] + [f"  {k}: {v}" for k, v in DISTRIBUTIONS.items()]
    lines += ["deterministic builders:"] + [f"  {k}: {v}" for k, v in BUILTINS.items()]
    lines += ["modes:"] + [f"  {k}: {v}" for k, v in MODES.items()]
    return "\n".join(lines)


def _lemma_config(args) -> ExperimentConfig:
    doc = {"model": "gue", "mode": "verify-lemmas", "polynomial": [{"word": [["X", 1]]}],
           "output": {"dir": args.out}}
    return parse_config(json.dumps(doc))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmtcumulants", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--single-thread", action="store_true",
                   help=f"ignore {THREADS_ENV} and run on one thread (bit-exact reproducibility)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config", type=Path)
    v = sub.add_parser("verify-lemmas", help="run the graph inequality suites")
    v.add_argument("--max-m", type=int)
    v.add_argument("--max-r", type=int)
    v.add_argument("--out", default="rmtcumulants-out")
    sub.add_parser("list-builtins", help="print ensembles, distributions, builders and modes")
    return p


def _print_rows(report: RunReport) -> None:
    sys.stdout.write(report.to_csv())


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s %(levelname)s %(message)s")
    try:
        if args.command == "list-builtins":
            print(list_builtins())
            return 0
        threads = thread_count(args.single_thread)
        if args.command == "verify-lemmas":
            report = run(_lemma_config(args), threads, lemma_limits=(args.max_m, args.max_r))
        else:
            try:
                text = args.config.read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read {args.config}: {exc}") from None
            cfg = parse_config(text)
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            report = run(cfg, threads)
        _print_rows(report)
        return report.exit_code
    except (CumulantError, jsonschema.SchemaError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
