"""Exact mixed cumulants of traces of words in random and deterministic matrices.

For words Y_1..Y_r of total length m the cumulant expands as

    K_r(Tr Y_1, ..., Tr Y_r)
        = N^(-m/2) sum_{pi in P(±[m])} S0_pi(N) sum_{tau ∨ gamma = 1} K_tau(x(pi))

where S0_pi sums the deterministic factor over index maps psi with
ker(psi) = pi and K_tau is the product over blocks of tau of joint entry
cumulants.  Only partitions pi that can make some K_tau nonzero are
generated: for every block V of tau the unordered index pairs
{psi(l), psi(-l)}, l in V, must coincide.

Index sums over a quotient graph are tensor contractions: each edge of the
graph carries a matrix, each vertex an index in 1..N.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CompletenessError, ContractError, ShapeError, SizeError
from .graphs import build_word_graphs, quotient, t_exponent
from .partitions import (
    Gamma,
    MomentCumulantTable,
    SetPartition,
    _rgs_blocks,
    bell_number,
    double_factorial,
    enumerate_even_partitions,
    enumerate_pairings,
    gamma_partition,
    integer_partition_count,
    join,
    joint_cumulant,
    lift_pairing_eps,
    mobius_weight,
    moments_from_cumulants,
    signed_range,
)
from .polynomial import DeterministicSet, Letter, Monomial, PolynomialSpec
from .randmat import EntryDistribution

DEFAULT_MAX_M = 6
DEFAULT_CONTRACTION_BUDGET = 10 ** 12
DEFAULT_ORACLE_BUDGET = 4 * 10 ** 6
GOE_MAX_M = 10


# -- entry model ------------------------------------------------------------


def _num(x) -> complex:
    return complex(x) if not isinstance(x, Fraction) else complex(float(x))


@dataclass(frozen=True)
class EntryCumulantModel:
    """Joint cumulants of matrix entries.

    ``offdiag(n, c)`` is the cumulant of n copies of an off-diagonal entry of
    which c are conjugated; ``diagonal(n)`` the cumulant of a diagonal entry.
    When ``gaussian`` is set every cumulant above order 2 is zero.
    """

    tag: str
    off_table: MomentCumulantTable
    diag_table: MomentCumulantTable
    gaussian: bool = False
    distribution: EntryDistribution | None = None

    def __post_init__(self):
        for table in (self.off_table, self.diag_table):
            for (n, c), v in table.values.items():
                if n % 2 and v != 0:
                    raise ContractError(f"odd cumulant of order {n} must vanish")
        if self.off_table.complex_mode:
            for (n, c), v in self.off_table.values.items():
                w = self.off_table.values.get((n, n - c))
                if w is not None and abs(_num(v) - _num(w)) > 1e-12 * (1 + abs(_num(v))):
                    raise ContractError("entry law must be invariant under conjugation")

    @classmethod
    def gue(cls) -> "EntryCumulantModel":
        off = MomentCumulantTable(2, {(1, 0): 0, (1, 1): 0, (2, 0): 0, (2, 1): 1, (2, 2): 0}, True)
        return cls("gue", off, MomentCumulantTable.real([0, 1]), True)

    @classmethod
    def goe(cls) -> "EntryCumulantModel":
        return cls("goe", MomentCumulantTable.real([0, 1]), MomentCumulantTable.real([0, 2]), True)

    @classmethod
    def wigner(cls, dist: EntryDistribution, order: int = 12) -> "EntryCumulantModel":
        gaussian = dist.name in ("gaussian-real", "gaussian-complex")
        if gaussian:
            order = 2
        return cls("wigner", dist.cumulant_table(order), dist.cumulant_table(order, diagonal=True),
                   gaussian, dist)

    @classmethod
    def for_tag(cls, tag: str, dist: EntryDistribution | None = None, order: int = 12):
        if tag == "gue":
            return cls.gue()
        if tag == "goe":
            return cls.goe()
        if dist is None:
            raise ContractError("wigner model needs an entry distribution")
        return cls.wigner(dist, order)

    @property
    def complex_entries(self) -> bool:
        return self.off_table.complex_mode

    def _lookup(self, table: MomentCumulantTable, n: int, c: int) -> complex:
        if n % 2:
            return 0j
        if self.gaussian and n != 2:
            return 0j
        if n > table.order:
            raise CompletenessError(
                f"entry cumulant of order {n} needed but the model declares orders up to {table.order}"
            )
        return _num(table(n, c))

    def offdiag(self, n: int, c: int = 0) -> complex:
        return self._lookup(self.off_table, n, c)

    def diagonal(self, n: int) -> complex:
        return self._lookup(self.diag_table, n, 0)

    def max_order(self) -> int | None:
        return None if self.gaussian else min(self.off_table.order, self.diag_table.order)

    @property
    def C(self) -> float:
        """Smallest C with |K_n| <= C n! over the declared orders."""
        best = 0.0
        for table in (self.off_table, self.diag_table):
            for (n, _), v in table.values.items():
                best = max(best, abs(_num(v)) / math.factorial(n))
        return best

    def moment_tables(self, order: int) -> tuple[MomentCumulantTable, MomentCumulantTable]:
        """Off-diagonal and diagonal moments up to ``order``."""
        out = []
        for table in (self.off_table, self.diag_table):
            if table.order < order:
                if not self.gaussian:
                    raise CompletenessError(f"moments of order {order} need cumulants up to {order}")
                vals = dict(table.values)
                for n in range(table.order + 1, order + 1):
                    for c in range(n + 1) if table.complex_mode else (0,):
                        vals[(n, c)] = 0
                table = MomentCumulantTable(order, vals, table.complex_mode)
            out.append(moments_from_cumulants(table))
        return out[0], out[1]


# -- deterministic sums -----------------------------------------------------


@dataclass(frozen=True)
class DAssignment:
    """Matrix carried by each edge of the word graph D.

    Letter l contributes the factor ``matrices[l-1][psi(-l), psi(gamma(l))]``.
    """

    gamma: Gamma
    matrices: tuple

    @classmethod
    def from_letters(cls, m_vec: Sequence[int], letters: Sequence[Letter], detset: DeterministicSet):
        gam = gamma_partition(m_vec)
        if len(letters) != gam.m:
            raise ShapeError("letter count does not match the monomial lengths")
        return cls(gam, tuple(detset.matrix(l.dets) for l in letters))

    @property
    def N(self) -> int:
        return self.matrices[0].shape[0]


def _check_pi(pi: SetPartition, asg: DAssignment) -> None:
    if pi.domain != signed_range(asg.gamma.m):
        raise ShapeError("partition must live on ±[m] of the word graph")


class _SumCache:
    """Memoised S_pi(N) for one assignment; keys are canonical block tuples."""

    def __init__(self, N: int, asg: DAssignment, budget: float = DEFAULT_CONTRACTION_BUDGET):
        if asg.N != N:
            raise ShapeError(f"deterministic matrices are {asg.N}x{asg.N}, expected N={N}")
        self.N = N
        self.asg = asg
        self.budget = budget
        self.geq: dict = {}

    def s_geq(self, blocks: tuple) -> complex:
        val = self.geq.get(blocks)
        if val is None:
            val = self._contract(blocks)
            self.geq[blocks] = val
        return val

    def _contract(self, blocks: tuple) -> complex:
        if float(self.N) ** len(blocks) > self.budget:
            raise SizeError(
                f"summing N^{len(blocks)} = {float(self.N) ** len(blocks):.3g} labelings exceeds the "
                f"budget {self.budget:.3g}; use a smaller N or a partition with fewer blocks"
            )
        idx = {x: k for k, b in enumerate(blocks) for x in b}
        gam = self.asg.gamma
        ops: list = []
        for l in range(1, gam.m + 1):
            p, q = idx[-l], idx[gam.succ(l)]
            mat = self.asg.matrices[l - 1]
            if p == q:
                ops += [np.diagonal(mat), [p]]
            else:
                ops += [mat, [p, q]]
        return complex(np.einsum(*ops, [], optimize="greedy"))

    def s_eq(self, blocks: tuple) -> complex:
        k = len(blocks)
        if k > self.N:
            return 0j  # no injective labelling of k blocks by N values
        re, im = [], []
        for groups in _rgs_blocks(tuple(range(k))):
            coef = 1
            merged = []
            for g in groups:
                coef *= mobius_weight(len(g))
                merged.append(tuple(sorted(x for i in g for x in blocks[i])))
            val = coef * self.s_geq(tuple(merged))
            re.append(val.real)
            im.append(val.imag)
        return complex(math.fsum(re), math.fsum(im))


def s_pi_geq(N: int, pi: SetPartition, asg: DAssignment,
             budget: float = DEFAULT_CONTRACTION_BUDGET) -> complex:
    """Sum of the deterministic factor over all psi with ker(psi) >= pi."""
    _check_pi(pi, asg)
    return _SumCache(N, asg, budget).s_geq(pi.blocks)


def s_pi_eq(N: int, pi: SetPartition, asg: DAssignment,
            budget: float = DEFAULT_CONTRACTION_BUDGET) -> complex:
    """Sum of the deterministic factor over all psi with ker(psi) = pi (Möbius over coarsenings)."""
    _check_pi(pi, asg)
    return _SumCache(N, asg, budget).s_eq(pi.blocks)


def s_pi_eq_direct(N: int, pi: SetPartition, asg: DAssignment, budget: float = 10 ** 6) -> complex:
    """Same as :func:`s_pi_eq` by explicit enumeration of injective labelings."""
    _check_pi(pi, asg)
    k = len(pi)
    if float(N) ** k > budget:
        raise SizeError(f"N^{k} labelings exceed the direct-enumeration budget {budget:.3g}")
    idx = pi.index()
    gam = asg.gamma
    total = 0j
    for labels in itertools.permutations(range(N), k):
        term = 1 + 0j
        for l in range(1, gam.m + 1):
            term *= asg.matrices[l - 1][labels[idx[-l]], labels[idx[gam.succ(l)]]]
        total += term
    return total


# -- entry cumulants --------------------------------------------------------


def _block_cumulant(idx: Mapping, block: Sequence[int], letters: Sequence[Letter],
                    model: EntryCumulantModel) -> complex:
    sym = letters[block[0] - 1].symbol
    entries = []
    for l in block:
        let = letters[l - 1]
        if let.symbol != sym:
            return 0j
        a, b = idx[l], idx[-l]
        entries.append((b, a) if let.transposed else (a, b))
    a0, b0 = entries[0]
    n = len(block)
    if a0 == b0:
        if all(e == (a0, a0) for e in entries):
            return model.diagonal(n)
        return 0j
    conj = 0
    for e in entries:
        if e == (b0, a0):
            conj += 1
        elif e != (a0, b0):
            return 0j
    return model.offdiag(n, conj)


def entry_cumulant_for(pi: SetPartition, tau_block: Iterable[int], spec, model: EntryCumulantModel) -> complex:
    """Joint cumulant of the entries read by the letters in ``tau_block`` under ker(psi) = pi.

    ``spec`` is a :class:`PolynomialSpec` whose monomials are laid out one
    after another on [m], or a plain sequence of letters.
    """
    letters = _letters_of(spec)
    block = tuple(sorted(tau_block))
    if not block or block[0] < 1 or block[-1] > len(letters):
        raise ShapeError("tau block must lie inside [m]")
    return _block_cumulant(pi.index(), block, letters, model)


def _letters_of(spec) -> tuple[Letter, ...]:
    if isinstance(spec, PolynomialSpec):
        return tuple(l for mono in spec.monomials for l in mono.letters)
    return tuple(spec)


# -- exact expansion --------------------------------------------------------


@dataclass(frozen=True)
class AuditRow:
    pi: str
    tau: str
    s0: complex
    k_tau: complex
    contribution: complex


@dataclass
class ExactCumulantResult:
    value: complex
    n_partitions: int = 0
    ledger: list = field(default_factory=list)
    audit_violations: list = field(default_factory=list)

    def write_audit_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["pi", "tau", "s0_re", "s0_im", "k_tau_re", "k_tau_im",
                        "contribution_re", "contribution_im"])
            for row in self.ledger:
                w.writerow([row.pi, row.tau, repr(row.s0.real), repr(row.s0.imag), repr(row.k_tau.real),
                            repr(row.k_tau.imag), repr(row.contribution.real), repr(row.contribution.imag)])


def _fmt_blocks(blocks) -> str:
    return "".join("{" + ",".join(str(x) for x in b) + "}" for b in blocks)


def _admissible(letters: Sequence[Letter], gam: Gamma, model: EntryCumulantModel) -> dict:
    """pi (canonical blocks) -> set of tau (canonical blocks) with K_tau(pi) possibly nonzero."""
    m = gam.m
    out: dict = {}
    limit = model.max_order()
    for tau in enumerate_even_partitions(m):
        blocks = tau.blocks
        if any(len({letters[l - 1].symbol for l in b}) > 1 for b in blocks):
            continue
        if model.gaussian and any(len(b) != 2 for b in blocks):
            continue
        if len(join(tau, gam.partition)) != 1:
            continue
        if limit is not None and max(len(b) for b in blocks) > limit:
            raise CompletenessError(
                f"a block of size {max(len(b) for b in blocks)} needs an entry cumulant beyond order {limit}"
            )
        flips = [itertools.product((1, -1), repeat=len(b) - 1) for b in blocks]
        for choice in itertools.product(*flips):
            base = []
            for b, signs in zip(blocks, choice):
                side = (b[0],) + tuple(s * v for s, v in zip(signs, b[1:]))
                base.append(side)
                base.append(tuple(-x for x in side))
            for groups in _rgs_blocks(tuple(range(len(base)))):
                merged = [tuple(x for i in g for x in base[i]) for g in groups]
                key = tuple(sorted((tuple(sorted(b)) for b in merged), key=lambda b: b[0]))
                out.setdefault(key, set()).add(blocks)
    return out


def _flatten(words: Sequence[Monomial]) -> tuple[tuple[int, ...], tuple[Letter, ...]]:
    m_vec = tuple(w.length for w in words)
    letters = tuple(l for w in words for l in w.letters)
    return m_vec, letters


def _mixed_general(words: Sequence[Monomial], model, detset: DeterministicSet, N: int, audit: bool,
                   budget: float) -> ExactCumulantResult:
    m_vec, letters = _flatten(words)
    m = sum(m_vec)
    if m % 2:
        return ExactCumulantResult(0j)
    asg = DAssignment.from_letters(m_vec, letters, detset)
    cache = _SumCache(N, asg, budget)
    re, im = [], []
    ledger = []
    count = 0
    for pi_blocks, taus in _admissible(letters, asg.gamma, model).items():
        idx = {x: k for k, b in enumerate(pi_blocks) for x in b}
        per_tau = []
        for tau in sorted(taus):
            kt = 1 + 0j
            for b in tau:
                kt *= _block_cumulant(idx, b, letters, model)
                if kt == 0:
                    break
            if kt != 0:
                per_tau.append((tau, kt))
        if not per_tau:
            continue
        s0 = cache.s_eq(pi_blocks)
        count += 1
        for tau, kt in per_tau:
            val = s0 * kt
            re.append(val.real)
            im.append(val.imag)
            if audit:
                ledger.append(AuditRow(_fmt_blocks(pi_blocks), _fmt_blocks(tau), s0, kt, val * N ** (-m / 2)))
    value = complex(math.fsum(re), math.fsum(im)) * N ** (-m / 2)
    violations = _audit_bounds(cache, m_vec, letters, detset) if audit else []
    return ExactCumulantResult(value, count, ledger, violations)


def _audit_bounds(cache: _SumCache, m_vec, letters, detset) -> list:
    """Every computed S_pi against N^t(D^pi) times the product of norms."""
    dgraph = build_word_graphs(m_vec).D
    norms = math.prod(detset.norm(l.dets) for l in letters)
    bad = []
    for blocks, val in cache.geq.items():
        t = t_exponent(quotient(dgraph, SetPartition._trusted(blocks, dgraph.vertices)))
        bound = cache.N ** float(t) * norms
        if abs(val) > bound * (1 + 1e-9) + 1e-12:
            bad.append((_fmt_blocks(blocks), abs(val), bound))
    return bad


def _mixed_gaussian(words: Sequence[Monomial], ensemble: str, detset: DeterministicSet, N: int,
                    budget: float) -> ExactCumulantResult:
    m_vec, letters = _flatten(words)
    m = sum(m_vec)
    if m % 2:
        return ExactCumulantResult(0j)
    if ensemble == "goe" and m > GOE_MAX_M:
        raise SizeError(f"the GOE expansion sums 2^m terms; m = {m} exceeds {GOE_MAX_M}")
    asg = DAssignment.from_letters(m_vec, letters, detset)
    cache = _SumCache(N, asg, budget)
    gam = asg.gamma
    taus = []
    for tau in enumerate_pairings(m):
        if any(letters[u - 1].symbol != letters[v - 1].symbol for u, v in tau.blocks):
            continue
        if len(join(tau, gam.partition)) == 1:
            taus.append(tau)
    re, im = [], []
    if ensemble == "gue":
        marks = [l.transposed for l in letters]
        for tau in taus:
            val = cache.s_geq(lift_pairing_eps(tau, marks).blocks)
            re.append(val.real)
            im.append(val.imag)
        scale = 1.0
    elif ensemble == "goe":
        # X = (Z + Z^T)/sqrt(2) with Z a GUE matrix: sum over all transpose patterns
        for marks in itertools.product((False, True), repeat=m):
            for tau in taus:
                val = cache.s_geq(lift_pairing_eps(tau, marks).blocks)
                re.append(val.real)
                im.append(val.imag)
        scale = 2.0 ** (-m / 2)
    else:
        raise ContractError(f"Gaussian path needs gue or goe, got {ensemble!r}")
    value = complex(math.fsum(re), math.fsum(im)) * scale * N ** (-m / 2)
    return ExactCumulantResult(value, len(taus))


def _multilinear(r: int, spec: PolynomialSpec, detset: DeterministicSet, N: int, core) -> ExactCumulantResult:
    """Expand K_r(Tr P, ..., Tr P) over multisets of monomials."""
    if r < 1:
        raise ContractError("cumulant order must be at least 1")
    if detset.N != N:
        raise ShapeError(f"deterministic set has dimension {detset.N}, expected {N}")
    detset.require(spec)
    monos = spec.monomials
    re, im = [], []
    count = 0
    ledger, violations = [], []
    for combo in itertools.combinations_with_replacement(range(len(monos)), r):
        mult = math.factorial(r)
        for c in Counter(combo).values():
            mult //= math.factorial(c)
        coef = mult * math.prod((monos[i].coef for i in combo), start=1 + 0j)
        if coef == 0:
            continue
        words = [monos[i] for i in combo]
        if any(not w.letters for w in words):
            # a deterministic trace is a constant: only its first cumulant survives
            res = ExactCumulantResult(complex(np.trace(detset.matrix(words[0].dets))) if r == 1 else 0j)
        else:
            res = core(words)
        val = coef * res.value
        re.append(val.real)
        im.append(val.imag)
        count += res.n_partitions
        ledger += res.ledger
        violations += res.audit_violations
    return ExactCumulantResult(complex(math.fsum(re), math.fsum(im)), count, ledger, violations)


def _check_m(spec: PolynomialSpec, r: int, max_m: int) -> None:
    m = r * spec.degree
    if m > max_m:
        raise SizeError(f"total word length up to {m} exceeds the enumeration budget max_m={max_m} "
                        f"(Bell(2m) = {bell_number(2 * m)} partitions)")


def exact_cumulant(r: int, spec: PolynomialSpec, model: EntryCumulantModel, detset: DeterministicSet, N: int,
                   audit: bool = False, max_m: int = DEFAULT_MAX_M,
                   budget: float = DEFAULT_CONTRACTION_BUDGET) -> ExactCumulantResult:
    """K_r(Tr P, ..., Tr P) by the full partition expansion."""
    _check_m(spec, r, max_m)
    return _multilinear(r, spec, detset, N,
                        lambda words: _mixed_general(words, model, detset, N, audit, budget))


def exact_cumulant_gaussian(r: int, spec: PolynomialSpec, detset: DeterministicSet, N: int, ensemble: str,
                            max_m: int = GOE_MAX_M, budget: float = DEFAULT_CONTRACTION_BUDGET
                            ) -> ExactCumulantResult:
    """K_r(Tr P, ..., Tr P) for GUE or GOE by summing over pairings only."""
    _check_m(spec, r, max_m)
    return _multilinear(r, spec, detset, N, lambda words: _mixed_gaussian(words, ensemble, detset, N, budget))


def mixed_cumulant(words: Sequence[Monomial], model: EntryCumulantModel, detset: DeterministicSet, N: int,
                   gaussian_path: bool | None = None) -> complex:
    """K_r(Tr Y_1, ..., Tr Y_r) for explicit words, coefficients ignored."""
    if detset.N != N:
        raise ShapeError(f"deterministic set has dimension {detset.N}, expected {N}")
    if any(not w.letters for w in words):
        return complex(np.trace(detset.matrix(words[0].dets))) if len(words) == 1 else 0j
    if gaussian_path is None:
        gaussian_path = model.tag in ("gue", "goe")
    if gaussian_path:
        return _mixed_gaussian(words, model.tag, detset, N, DEFAULT_CONTRACTION_BUDGET).value
    return _mixed_general(words, model, detset, N, False, DEFAULT_CONTRACTION_BUDGET).value


# -- brute-force oracle -----------------------------------------------------


def _oracle_moment(words: Sequence[Monomial], model: EntryCumulantModel, detset: DeterministicSet, N: int,
                   budget: float) -> complex:
    """E prod_k Tr Y_k by summing over every index map psi: ±[m] -> [N]."""
    m_vec, letters = _flatten(words)
    m = sum(m_vec)
    if float(N) ** (2 * m) > budget:
        raise SizeError(f"oracle would enumerate N^(2m) = {N}^{2 * m} index maps; budget is {budget:.3g}")
    gam = gamma_partition(m_vec)
    off_mom, diag_mom = model.moment_tables(m)
    grid = np.indices((N,) * (2 * m), dtype=np.int64).reshape(2 * m, -1)
    pos = {l: grid[l - 1] for l in range(1, m + 1)}
    neg = {l: grid[m + l - 1] for l in range(1, m + 1)}
    dval = np.ones(grid.shape[1], dtype=complex)
    for l in range(1, m + 1):
        mat = detset.matrix(letters[l - 1].dets)
        dval *= mat[neg[l], pos[gam.succ(l)]]
    keep = np.nonzero(dval)[0]
    dval = dval[keep]
    symbols = sorted({l.symbol for l in letters})
    eid, conj, diag = [], [], []
    for l in range(1, m + 1):
        row, col = pos[l][keep], neg[l][keep]
        if letters[l - 1].transposed:
            row, col = col, row
        s = symbols.index(letters[l - 1].symbol)
        eid.append((s * N + np.minimum(row, col)) * N + np.maximum(row, col))
        conj.append(row > col)
        diag.append(row == col)
    code = np.zeros(len(keep), dtype=np.int64)
    base = 4 * m
    for l in range(m):
        first = np.full(len(keep), l, dtype=np.int64)
        for k in range(l - 1, -1, -1):
            first = np.where(eid[k] == eid[l], k, first)
        code = code * base + first * 4 + conj[l] * 2 + diag[l]
    uniq, inv = np.unique(code, return_inverse=True)
    moments = np.empty(len(uniq), dtype=complex)
    for u, c in enumerate(uniq):
        digits = []
        c = int(c)
        for _ in range(m):
            digits.append(c % base)
            c //= base
        digits.reverse()
        groups: dict = {}
        for dgt in digits:
            first, flags = divmod(dgt, 4)
            groups.setdefault(first, []).append(flags)
        val = 1 + 0j
        for flags in groups.values():
            n = len(flags)
            if flags[0] & 1:
                val *= _num(diag_mom(n))
            else:
                val *= _num(off_mom(n, sum(f >> 1 for f in flags)))
        moments[u] = val
    total = np.sum(dval * moments[inv.ravel()])
    return complex(total) * N ** (-m / 2)


def _oracle_mixed(words, model, detset, N, budget) -> ExactCumulantResult:
    r = len(words)
    cache: dict = {}

    def moment(blk):
        key = tuple(blk)
        if key not in cache:
            cache[key] = _oracle_moment([words[k - 1] for k in key], model, detset, N, budget)
        return cache[key]

    return ExactCumulantResult(joint_cumulant(r, moment))


def bruteforce_cumulant_oracle(r: int, spec: PolynomialSpec, model: EntryCumulantModel,
                               detset: DeterministicSet, N: int,
                               budget: float = DEFAULT_ORACLE_BUDGET) -> complex:
    """K_r(Tr P, ...) from trace moments computed by enumerating every index map."""
    return _multilinear(r, spec, detset, N, lambda words: _oracle_mixed(words, model, detset, N, budget)).value


# -- bounds -----------------------------------------------------------------


@dataclass(frozen=True)
class BoundVerdict:
    kind: str
    label: str
    N: int
    r: int
    m: int
    value: float
    bound: float
    passed: bool


def corollary_bound(tag: str, words: Sequence[Monomial], detset: DeterministicSet,
                    model: EntryCumulantModel | None = None) -> tuple[float, float]:
    """(power of N multiplying |K_r|, bound on the product) for the ensemble ``tag``."""
    m_vec, letters = _flatten(words)
    m, r = sum(m_vec), len(words)
    norms = math.prod(detset.norm(l.dets) for l in letters)
    if tag == "gue":
        return r - 2, double_factorial(m) * norms
    if tag == "goe":
        return r - 2, 2 ** (m / 2) * double_factorial(m) * norms
    if tag == "wigner":
        # the counting bound assumes |K_n| <= n!; a larger law constant scales each block
        c = max(1.0, model.C) if model is not None else 1.0
        count = (bell_number(m) * 2 ** (m - 1) * math.factorial(m) ** 2
                 * integer_partition_count(m) * integer_partition_count(m // 2))
        return r / 2 - 1, float(count) * c ** (m / 2) * norms
    raise ContractError(f"unknown ensemble {tag!r}")


def verify_bounds(spec: PolynomialSpec, model: EntryCumulantModel, detsets: Mapping[int, DeterministicSet],
                  r_values: Iterable[int], N_values: Iterable[int], label: str | None = None) -> list[BoundVerdict]:
    """Check every mixed cumulant of the polynomial's monomials against the corollary bound."""
    label = label or str(spec)
    out = []
    monos = spec.monomials
    for N in N_values:
        det = detsets[N]
        for r in r_values:
            if model.tag == "wigner" and r < 2:
                continue
            for combo in itertools.combinations_with_replacement(range(len(monos)), r):
                words = [monos[i] for i in combo]
                if any(not w.letters for w in words):
                    continue
                m = sum(w.length for w in words)
                power, bound = corollary_bound(model.tag, words, det, model)
                value = abs(mixed_cumulant(words, model, det, N)) * N ** power
                out.append(BoundVerdict(model.tag, label, N, r, m, value, bound, value <= bound * (1 + 1e-9)))
    return out


def fit_theorem_constant(normalized: Mapping[tuple[int, int], float], degree: int, ensemble: str,
                         abs_norms: bool = False) -> tuple[float, bool]:
    """Largest theta with |K_r(normalized)| <= r!^a / (theta * N^b)^(r-2) on the grid.

    ``normalized[(r, N)]`` holds the cumulants of the standardized trace for
    r >= 3.  Gaussian ensembles use a = M/2 and b = 1; Wigner uses b = 1/2 and
    a = 3M, or a = M when the absolute-value norms are bounded.
    """
    if ensemble in ("gue", "goe"):
        a, b = degree / 2, 1.0
    else:
        a, b = (degree if abs_norms else 3 * degree), 0.5
    thetas = []
    for (r, N), k in normalized.items():
        if r < 3 or k == 0:
            continue
        log_theta = (a * math.lgamma(r + 1) - math.log(abs(k))) / (r - 2) - b * math.log(N)
        thetas.append(log_theta)
    if not thetas:
        return math.inf, True
    theta = math.exp(min(thetas))
    return theta, theta > 0 and math.isfinite(theta)
