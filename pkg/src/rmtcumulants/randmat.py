"""Random matrix samplers, deterministic matrix builders and trace evaluation.

Normalisations: GUE has off-diagonal entries CN(0, 1/N) and diagonal
N(0, 1/N); GOE has off-diagonal N(0, 1/N) and diagonal N(0, 2/N).  A Wigner
matrix has iid off-diagonal entries x_o/sqrt(N) above the diagonal and iid
diagonal entries x_d/sqrt(N), both drawn from an :class:`EntryDistribution`.
Entry laws need not have unit variance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, NumericError, ShapeError, UnboundSymbolError
from .partitions import MomentCumulantTable, cumulants_from_moments, double_factorial
from .polynomial import DeterministicSet, PolynomialSpec

ENSEMBLES = ("gue", "goe", "wigner")
DISTRIBUTIONS = {
    "gaussian-real": "N(0, s^2), default s = 1",
    "gaussian-complex": "complex normal with E|z|^2 = s^2 off the diagonal, N(0, s^2) on it; default s = 1",
    "uniform": "uniform on (-s, s), default s = 1/2",
    "rademacher": "+s or -s with probability 1/2, default s = 1",
    "symmetrized-exponential": "Laplace with scale s (variance 2 s^2), default s = 1",
    "custom": "user-supplied even cumulants; exact evaluation only",
}
BUILTINS = {
    "identity": "the identity matrix",
    "upper-bidiagonal-ones": "ones on the diagonal and first superdiagonal (norm <= 2)",
    "diag-alternating-signs": "diag(1, -1, 1, ...)",
    "random-unit-norm[:seed]": "complex Gaussian matrix scaled to operator norm 1",
    "file:<path>": "matrix read from a CSV file",
}


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class EntryDistribution:
    """Law of a single matrix entry, symmetric about 0."""

    name: str
    scale: float | Fraction | None = None
    cumulants: tuple | None = None

    def __post_init__(self):
        if self.name not in DISTRIBUTIONS:
            raise ConfigError(f"unknown entry distribution {self.name!r}; choose from {sorted(DISTRIBUTIONS)}")
        if self.name == "custom":
            if not self.cumulants:
                raise ConfigError("custom distribution needs a cumulant list K_1, K_2, ...")
            if any(c != 0 for c in self.cumulants[0::2]):
                raise ConfigError("custom cumulants of odd order must vanish")
        if self.scale is not None and not self.scale > 0:
            raise ConfigError("scale must be positive")

    @property
    def symmetric(self) -> bool:
        return True

    @property
    def is_complex(self) -> bool:
        return self.name == "gaussian-complex"

    @property
    def s(self):
        if self.scale is not None:
            return self.scale
        return Fraction(1, 2) if self.name == "uniform" else 1

    def real_moment(self, n: int):
        """E x^n of the real law (the diagonal law for gaussian-complex)."""
        if n % 2:
            return Fraction(0)
        s = _exact(self.s)
        if self.name in ("gaussian-real", "gaussian-complex"):
            return double_factorial(n - 1) * s ** n
        if self.name == "uniform":
            return s ** n / (n + 1)
        if self.name == "rademacher":
            return s ** n
        if self.name == "symmetrized-exponential":
            return math.factorial(n) * s ** n
        raise ConfigError("custom distributions are given by cumulants, not moments")

    def cumulant_table(self, order: int, diagonal: bool = False) -> MomentCumulantTable:
        """Cumulants up to ``order``; complex mode for the complex off-diagonal law."""
        if self.name == "custom":
            if order > len(self.cumulants):
                order = len(self.cumulants)
            return MomentCumulantTable.real(list(self.cumulants[:order]))
        if self.is_complex and not diagonal:
            s2 = _exact(self.s) ** 2
            vals = {}
            for n in range(1, order + 1):
                for c in range(n + 1):
                    vals[(n, c)] = math.factorial(c) * s2 ** c if 2 * c == n else Fraction(0)
            return cumulants_from_moments(MomentCumulantTable(order, vals, True, "moment"))
        moments = [self.real_moment(n) for n in range(1, order + 1)]
        return cumulants_from_moments(MomentCumulantTable.real(moments, "moment"))

    def sample(self, rng: np.random.Generator, size, diagonal: bool = False) -> np.ndarray:
        s = float(self.s)
        if self.name == "gaussian-real" or (self.is_complex and diagonal):
            return rng.normal(0.0, s, size)
        if self.is_complex:
            re = rng.normal(0.0, 1.0, size)
            im = rng.normal(0.0, 1.0, size)
            return (re + 1j * im) * (s / math.sqrt(2))
        if self.name == "uniform":
            return rng.uniform(-s, s, size)
        if self.name == "rademacher":
            return s * (2.0 * rng.integers(0, 2, size) - 1.0)
        if self.name == "symmetrized-exponential":
            return rng.laplace(0.0, s, size)
        raise ConfigError("custom distributions cannot be sampled")


def substream_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent counter-based generator for a (seed, key...) address."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def sample_ensemble(N: int, tag: str, dist: EntryDistribution | None, rng: np.random.Generator,
                    count: int | None = None) -> np.ndarray:
    """One self-adjoint matrix, or a stack of ``count`` of them."""
    if N < 1:
        raise ShapeError("dimension must be positive")
    k = 1 if count is None else count
    n_off = N * (N - 1) // 2
    if tag == "gue":
        off = (rng.normal(size=(k, n_off)) + 1j * rng.normal(size=(k, n_off))) / math.sqrt(2)
        diag = rng.normal(size=(k, N))
    elif tag == "goe":
        off = rng.normal(size=(k, n_off))
        diag = math.sqrt(2) * rng.normal(size=(k, N))
    elif tag == "wigner":
        if dist is None:
            raise ConfigError("wigner ensemble needs an entry distribution")
        off = dist.sample(rng, (k, n_off))
        diag = dist.sample(rng, (k, N), diagonal=True)
    else:
        raise ConfigError(f"unknown ensemble {tag!r}; choose from {ENSEMBLES}")
    dtype = complex if np.iscomplexobj(off) else float
    flat = np.zeros((k, N * N), dtype=dtype)
    iu, ju = np.triu_indices(N, 1)
    flat[:, iu * N + ju] = off
    out = flat.reshape(k, N, N)
    # the strictly upper part plus its adjoint; cheaper than a second scatter
    out += np.conj(np.swapaxes(out, 1, 2))
    out[:, np.arange(N), np.arange(N)] = diag
    out /= math.sqrt(N)
    return out[0] if count is None else out


@dataclass(frozen=True)
class SampleBatch:
    """Stacks of sampled matrices, one stack per random symbol."""

    matrices: Mapping[int, np.ndarray]
    seed: int
    substream: int

    @property
    def count(self) -> int:
        return next(iter(self.matrices.values())).shape[0]


def sample_batch(N: int, count: int, tag: str, dist: EntryDistribution | None, symbols: Sequence[int],
                 seed: int, substream: int = 0) -> SampleBatch:
    mats = {}
    for sym in sorted(symbols):
        rng = substream_rng(seed, substream, sym)
        mats[sym] = sample_ensemble(N, tag, dist, rng, count)
    return SampleBatch(mats, seed, substream)


def _start_vector(n: int) -> np.ndarray:
    golden = (1 + math.sqrt(5)) / 2
    v = np.cos(golden * np.arange(1, n + 1)) + 1.5
    return v / np.linalg.norm(v)


def operator_norm(a: np.ndarray, tol: float = 1e-10, max_iter: int = 200_000) -> float:
    """Largest singular value by power iteration on A*A."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"operator_norm needs a square matrix, got shape {a.shape}")
    if not np.any(a):
        return 0.0
    ah = a.conj().T
    v = _start_vector(a.shape[0]).astype(a.dtype if np.iscomplexobj(a) else float)
    for _ in range(max_iter):
        w = ah @ (a @ v)
        mu = float(np.real(np.vdot(v, w)))
        resid = np.linalg.norm(w - mu * v)
        if resid <= tol * mu:
            return math.sqrt(mu)
        nw = np.linalg.norm(w)
        if nw == 0:
            # start vector fell in the kernel; restart on a basis vector
            v = np.zeros_like(v)
            v[np.argmax(np.abs(a).sum(axis=0))] = 1
            continue
        v = w / nw
    raise NumericError(f"power iteration did not converge in {max_iter} steps")


def read_matrix_csv(path) -> np.ndarray:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        n = int(lines[0])
    except (IndexError, ValueError):
        raise ConfigError(f"{path}: first line must be the dimension N") from None
    rows = [ln.split(",") for ln in lines[1:]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ConfigError(f"{path}: expected a square {n}x{n} matrix")
    try:
        return np.array([[complex(x.strip().replace("i", "j")) for x in r] for r in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: bad entry ({exc})") from None


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def write_matrix_csv(path, a: np.ndarray) -> None:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError("only square matrices can be written")
    rows = [str(a.shape[0])] + [",".join(_fmt_complex(z) for z in row) for row in a]
    Path(path).write_text("\n".join(rows) + "\n")


def builtin_deterministic(name: str, N: int) -> np.ndarray:
    if name == "identity":
        return np.eye(N, dtype=complex)
    if name == "upper-bidiagonal-ones":
        return (np.eye(N) + np.eye(N, k=1)).astype(complex)
    if name == "diag-alternating-signs":
        return np.diag([(-1.0) ** k for k in range(N)]).astype(complex)
    if name == "random-unit-norm" or name.startswith("random-unit-norm:"):
        seed = int(name.split(":", 1)[1]) if ":" in name else 0
        rng = substream_rng(seed, N)
        a = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
        return a / operator_norm(a)
    if name.startswith("file:"):
        a = read_matrix_csv(name[5:])
        if a.shape[0] != N:
            raise ConfigError(f"{name}: matrix is {a.shape[0]}x{a.shape[0]}, run needs N={N}")
        return a
    raise ConfigError(f"unknown deterministic builder {name!r}; choose from {sorted(BUILTINS)}")


def _letter_factors(letters, batch: SampleBatch, detset: DeterministicSet) -> list:
    out = []
    for l in letters:
        if l.symbol not in batch.matrices:
            raise UnboundSymbolError(f"no sampled matrix for X{l.symbol}")
        x = batch.matrices[l.symbol]
        out.append(np.swapaxes(x, -1, -2) if l.transposed else x)
        if l.dets:
            out.append(detset.matrix(l.dets))
    return out


def _chain(factors: list):
    prod = factors[0]
    for f in factors[1:]:
        prod = prod @ f
    return prod


def trace_poly(spec: PolynomialSpec, batch: SampleBatch, detset: DeterministicSet) -> np.ndarray:
    """Tr P on every sample of the batch (complex array of length ``batch.count``)."""
    detset.require(spec)
    total = np.zeros(batch.count, dtype=complex)
    for mono in spec.monomials:
        if not mono.letters:
            total += mono.coef * np.trace(detset.matrix(mono.dets))
            continue
        factors = _letter_factors(mono.letters, batch, detset)
        if len(factors) == 1:
            tr = np.einsum("kii->k", factors[0])
        else:
            # Tr(AB) = sum_ij A_ij B_ji saves the last product
            half = len(factors) // 2
            left, right = _chain(factors[:half]), _chain(factors[half:])
            left = np.broadcast_to(left, (batch.count,) + left.shape[-2:])
            right = np.broadcast_to(right, (batch.count,) + right.shape[-2:])
            tr = np.einsum("kij,kji->k", left, right)
        total += mono.coef * tr
    return total
