"""Sampling traces of polynomials and estimating their cumulants.

Samples are generated in chunks, each from its own counter-based substream,
so the output is identical whatever the number of worker threads.
"""
from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import optimize, special

from .errors import ConfigError, ModeError, SizeError, VarianceConditionError
from .polynomial import DeterministicSet, PolynomialSpec
from .randmat import EntryDistribution, sample_batch, substream_rng

THREADS_ENV = "RMTCUMULANTS_THREADS"
MIN_BOOTSTRAP = 200
MIN_CLT_SAMPLES = 10_000
REAL_TOL = 1e-9
_MAGIC = b"RMTCTRC1"
# substream key reserved for bootstrap resampling (sampling uses the chunk index)
_BOOT_KEY = 2 ** 31


def thread_count(single_thread: bool = False) -> int:
    """Worker threads from the environment, 1 when ``single_thread`` is set."""
    if single_thread:
        return 1
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def _map(fn, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class TraceSampleSet:
    N: int
    spec_id: str
    values: np.ndarray
    seed: int = 0

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 1:
            raise ConfigError("trace samples must be a one-dimensional array")
        object.__setattr__(self, "values", vals)

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def is_real(self) -> bool:
        if not np.iscomplexobj(self.values):
            return True
        scale = max(1.0, float(np.max(np.abs(self.values.real), initial=0.0)))
        return float(np.max(np.abs(self.values.imag), initial=0.0)) <= REAL_TOL * scale

    def real(self) -> np.ndarray:
        """Real parts, after checking the imaginary parts are rounding noise."""
        if not self.is_real:
            raise ModeError(
                f"samples of {self.spec_id!r} are complex; higher cumulants need a self-adjoint polynomial")
        return np.ascontiguousarray(np.real(self.values), dtype=np.float64)

    def save(self, path) -> None:
        """Little-endian binary: magic, N, count, seed, spec id, then (re, im) float64 pairs."""
        sid = self.spec_id.encode()
        head = _MAGIC + struct.pack("<qqqq", self.N, self.count, self.seed, len(sid)) + sid
        body = np.empty((self.count, 2), dtype="<f8")
        body[:, 0] = np.real(self.values)
        body[:, 1] = np.imag(self.values)
        Path(path).write_bytes(head + body.tobytes())

    @classmethod
    def load(cls, path) -> "TraceSampleSet":
        raw = Path(path).read_bytes()
        if not raw.startswith(_MAGIC):
            raise ConfigError(f"{path}: not a trace sample file")
        off = len(_MAGIC)
        N, count, seed, slen = struct.unpack_from("<qqqq", raw, off)
        off += 32
        sid = raw[off:off + slen].decode()
        off += slen
        body = np.frombuffer(raw, dtype="<f8", offset=off).reshape(count, 2)
        vals = body[:, 0] + 1j * body[:, 1]
        if not np.any(body[:, 1]):
            vals = body[:, 0].astype(np.float64)
        return cls(N, sid, vals, seed)


def chunk_size(N: int) -> int:
    return max(1, min(4096, 2 ** 21 // (N * N)))


def sample_traces(spec: PolynomialSpec, N: int, count: int, tag: str, dist: EntryDistribution | None,
                  detset: DeterministicSet, seed: int = 0, threads: int = 1,
                  spec_id: str | None = None) -> TraceSampleSet:
    """``count`` independent draws of Tr P(X, D)."""
    from .randmat import trace_poly

    if count < 1:
        raise SizeError("sample count must be positive")
    detset.require(spec)
    size = chunk_size(N)
    starts = list(range(0, count, size))
    symbols = sorted(spec.random_symbols) or [1]

    def one(k):
        start = starts[k]
        batch = sample_batch(N, min(size, count - start), tag, dist, symbols, seed, substream=k)
        return trace_poly(spec, batch, detset)

    vals = np.concatenate(_map(one, list(range(len(starts))), threads))
    out = TraceSampleSet(N, spec_id or str(spec), vals, seed)
    if out.is_real:
        out = TraceSampleSet(N, out.spec_id, np.real(vals).astype(np.float64), seed)
    return out


# -- cumulant estimation ----------------------------------------------------


@dataclass(frozen=True)
class CumulantEstimate:
    order: int
    estimate: float
    stderr: float
    kind: str


def _central_moments(x: np.ndarray, r_max: int) -> np.ndarray:
    """Rows of [mean, m2, ..., m_rmax] for each row of ``x``."""
    x = np.atleast_2d(x)
    mean = x.mean(axis=1)
    d = x - mean[:, None]
    out = np.empty((x.shape[0], r_max + 1))
    out[:, 0] = mean
    out[:, 1] = 0.0
    p = d.copy()
    for j in range(2, r_max + 1):
        p *= d
        out[:, j] = p.mean(axis=1)
    return out


def _cumulants_from_central(cm: np.ndarray, n: int, r_max: int) -> np.ndarray:
    """k-statistics through order 4, plug-in cumulants above."""
    out = np.empty((cm.shape[0], r_max + 1))
    out[:, 0] = np.nan
    out[:, 1] = cm[:, 0]
    if r_max >= 2:
        out[:, 2] = n / (n - 1) * cm[:, 2]
    if r_max >= 3:
        out[:, 3] = n * n / ((n - 1) * (n - 2)) * cm[:, 3]
    if r_max >= 4:
        out[:, 4] = (n * n * ((n + 1) * cm[:, 4] - 3 * (n - 1) * cm[:, 2] ** 2)
                     / ((n - 1) * (n - 2) * (n - 3)))
    if r_max >= 5:
        # kappa_n = mu_n - sum_k C(n-1, k-1) kappa_k mu_{n-k}, with mu_1 = 0 for central moments
        kap = np.zeros_like(cm)
        kap[:, 2] = cm[:, 2]
        for j in range(3, r_max + 1):
            acc = cm[:, j].copy()
            for k in range(2, j - 1):
                acc -= math.comb(j - 1, k - 1) * kap[:, k] * cm[:, j - k]
            kap[:, j] = acc
        out[:, 5:] = kap[:, 5:]
    return out


def estimate_cumulants(samples: TraceSampleSet, r_max: int, n_boot: int = MIN_BOOTSTRAP,
                       seed: int | None = None, threads: int = 1) -> list[CumulantEstimate]:
    """Cumulant estimates of orders 1..r_max with bootstrap standard errors."""
    if r_max < 1:
        raise ConfigError("r_max must be at least 1")
    if n_boot < MIN_BOOTSTRAP:
        raise ConfigError(f"at least {MIN_BOOTSTRAP} bootstrap resamples are required")
    x = samples.real()
    n = x.shape[0]
    need = 10 * 2 ** r_max
    if n < need:
        raise SizeError(f"{n} samples is too few for cumulants up to order {r_max}; need {need}")
    point = _cumulants_from_central(_central_moments(x, r_max), n, r_max)[0]

    per = max(1, min(n_boot, 2 ** 22 // n))
    chunks = [(s, min(per, n_boot - s)) for s in range(0, n_boot, per)]
    base = samples.seed if seed is None else seed

    def one(job):
        start, size = job
        rng = substream_rng(base, _BOOT_KEY, start)
        idx = rng.integers(0, n, size=(size, n))
        return _cumulants_from_central(_central_moments(x[idx], r_max), n, r_max)

    boot = np.concatenate(_map(one, chunks, threads))
    se = boot.std(axis=0, ddof=1)
    out = []
    for j in range(1, r_max + 1):
        if not math.isfinite(point[j]):
            raise ModeError(f"non-finite estimate for order {j}")
        kind = "k-statistic" if j <= 4 else "plug-in"
        out.append(CumulantEstimate(j, float(point[j]), float(se[j]), kind))
    return out


def mean_variance(samples: TraceSampleSet) -> tuple[complex, float]:
    """Mean and E|z - Ez|^2; valid for complex traces too."""
    v = samples.values
    mu = v.mean()
    return complex(mu), float(np.mean(np.abs(v - mu) ** 2))


def normalize_statistic(samples: TraceSampleSet, mean: complex | None = None,
                        variance: float | None = None) -> TraceSampleSet:
    """(Tr P - E Tr P) / sqrt(Var Tr P), with sample values unless exact ones are supplied."""
    mu, var = mean_variance(samples)
    if mean is not None:
        mu = mean
    if variance is not None:
        var = variance
    scale = float(np.max(np.abs(samples.values), initial=0.0))
    if not var > (1e-12 * max(1.0, scale)) ** 2:
        raise VarianceConditionError(
            f"variance of {samples.spec_id!r} is {var:g}; the normalized statistic is undefined")
    z = (samples.values - mu) / math.sqrt(var)
    if samples.is_real:
        z = np.real(z).astype(np.float64)
    return TraceSampleSet(samples.N, samples.spec_id + ":normalized", z, samples.seed)


# -- scaling fits -----------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    r: int
    slope: float
    band: tuple[float, float]
    gaussian_target: float
    wigner_target: float
    verdict: str
    points: tuple = ()


def fit_scaling_exponent(estimates: Mapping[int, object], r: int, tolerance: float = 0.1,
                         n_boot: int = MIN_BOOTSTRAP, seed: int = 0) -> ScalingFit:
    """Slope of log|K_r| against log N.

    ``estimates`` maps N to a :class:`CumulantEstimate` or to an exact number.
    The verdict names each target (2 - r Gaussian, 1 - r/2 Wigner) lying within
    ``tolerance`` of the slope or inside the bootstrap band, and is
    ``"inconclusive"`` when some estimate is within 3 standard errors of zero.
    """
    Ns = sorted(estimates)
    if len(set(Ns)) < 3:
        raise SizeError("a scaling fit needs at least three distinct N")
    vals, ses = [], []
    for N in Ns:
        e = estimates[N]
        if isinstance(e, CumulantEstimate):
            vals.append(e.estimate)
            ses.append(e.stderr)
        else:
            vals.append(abs(complex(e)))
            ses.append(0.0)
    vals, ses = np.abs(np.array(vals, dtype=float)), np.array(ses)
    targets = (2.0 - r, 1.0 - r / 2)
    if np.any(vals == 0) or np.any(vals <= 3 * ses) or not np.all(np.isfinite(vals)):
        return ScalingFit(r, math.nan, (math.nan, math.nan), *targets, "inconclusive")

    x = np.log(np.array(Ns, dtype=float))
    x = x - x.mean()

    def slope_of(v):
        # ratios to the first value make the slope immune to a common rescaling
        y = np.log(v / v[0])
        return float(np.dot(x, y - y.mean()) / np.dot(x, x))

    slope = slope_of(vals)
    if np.any(ses > 0):
        rng = substream_rng(seed, _BOOT_KEY, 7)
        sims = np.abs(vals + ses * rng.normal(size=(n_boot, len(vals))))
        sims = np.where(sims > 0, sims, np.finfo(float).tiny)
        boots = np.array([slope_of(s) for s in sims])
        band = (float(np.quantile(boots, 0.025)), float(np.quantile(boots, 0.975)))
    else:
        y = np.log(vals / vals[0])
        resid = y - y.mean() - slope * x
        dof = max(1, len(Ns) - 2)
        half = 2.0 * math.sqrt(float(np.dot(resid, resid)) / dof / np.dot(x, x))
        band = (slope - half, slope + half)

    def hit(t):
        return abs(slope - t) <= tolerance or band[0] <= t <= band[1]

    names = [name for name, t in zip(("gaussian", "wigner"), targets) if hit(t)]
    verdict = "matches-" + "+".join(names) if names else "neither"
    return ScalingFit(r, slope, band, *targets, verdict, tuple(zip(Ns, vals.tolist())))


# -- CLT diagnostics --------------------------------------------------------


def concentration_alpha(ensemble: str, degree: int, abs_norms: bool = False) -> float:
    """Tail exponent parameter used in the concentration fit."""
    if degree < 1:
        raise ConfigError("degree must be positive")
    if ensemble in ("gue", "goe"):
        return 2.0 / degree
    if ensemble == "wigner":
        return 1.0 / degree if abs_norms else 1.0 / (3 * degree)
    raise ConfigError(f"unknown ensemble {ensemble!r}")


def normal_cdf(x):
    return special.ndtr(x)


def ks_statistic(x: np.ndarray) -> float:
    """Exact sup-distance between the empirical distribution of ``x`` and the standard normal."""
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.shape[0]
    f = normal_cdf(xs)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def concentration_curve(x, H: float, delta: float, alpha: float):
    x = np.asarray(x, dtype=float)
    return np.exp(-x ** 2 / (2 * (H + x ** (2 - alpha) / delta ** alpha)))


@dataclass
class CltDiagnostics:
    count: int
    ks: float
    skewness: float
    kurtosis: float
    grid: np.ndarray
    exceedance: np.ndarray
    alpha: float
    H: float
    delta: float
    fitted: np.ndarray
    slack: float
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def rows(self):
        """(x, exceedance, bound) triples for plot files."""
        return [(float(a), float(b), float(c)) for a, b, c in
                zip(self.grid, self.exceedance, self.slack * self.fitted)]


def clt_diagnostics(samples: TraceSampleSet, alpha: float, grid: Sequence[float] | None = None,
                    slack: float = 1.5) -> CltDiagnostics:
    """Normality and tail diagnostics for already normalized samples."""
    z = samples.real()
    n = z.shape[0]
    if n < MIN_CLT_SAMPLES:
        raise SizeError(f"CLT diagnostics need at least {MIN_CLT_SAMPLES} samples, got {n}")
    grid = np.arange(0.0, 5.01, 0.5) if grid is None else np.asarray(grid, dtype=float)
    zs = np.sort(z)
    counts = n - np.searchsorted(zs, grid, side="left")
    exceed = counts / n

    d = z - z.mean()
    m2 = np.mean(d ** 2)
    skew = float(np.mean(d ** 3) / m2 ** 1.5)
    kurt = float(np.mean(d ** 4) / m2 ** 2 - 3.0)

    # weighted least squares on log-exceedance; zero counts carry no information
    use = counts > 0
    xs, logp, w = grid[use], np.log(exceed[use]), np.sqrt(counts[use])

    def resid(params):
        H, delta = np.exp(params)
        return w * (np.log(concentration_curve(xs, H, delta, alpha)) - logp)

    fit = optimize.least_squares(resid, x0=np.zeros(2), method="lm" if use.sum() > 2 else "trf")
    H, delta = (float(v) for v in np.exp(fit.x))
    fitted = concentration_curve(grid, H, delta, alpha)
    viol = [float(g) for g, p, f in zip(grid, exceed, fitted) if p > slack * f]
    return CltDiagnostics(n, ks_statistic(z), skew, kurt, grid, exceed, alpha, H, delta, fitted, slack, viol)
