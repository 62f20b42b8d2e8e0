"""Set partitions of finite label sets and the lattice operations on them.

A partition is stored in canonical form: elements sorted inside each block
and blocks sorted by their minimum.  Ground sets are either ``[n] = 1..n``
or the signed set ``±[m] = -m..-1, 1..m``.

Besides enumeration, join and refinement this module holds the special
partitions used by the trace expansion (the cycle partition of the
monomials, lifted pairings, the crossing pairing) and the conversion
between moments and cumulants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import (
    CompletenessError,
    ContractError,
    DomainError,
    ParityError,
    ShapeError,
    SizeError,
)

MAX_ENUMERATION = 14

Block = tuple


def unsigned_range(n: int) -> tuple[int, ...]:
    return tuple(range(1, n + 1))


def signed_range(m: int) -> tuple[int, ...]:
    return tuple(range(-m, 0)) + tuple(range(1, m + 1))


def _canonical(blocks: Iterable[Iterable]) -> tuple[Block, ...]:
    return tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))


class SetPartition:
    """Immutable partition of a finite set of sortable labels."""

    __slots__ = ("blocks", "domain", "_index", "_hash")

    def __init__(self, blocks: Iterable[Iterable], domain: Iterable | None = None):
        canon = _canonical(blocks)
        labels = [x for b in canon for x in b]
        if any(len(b) == 0 for b in canon):
            raise DomainError("partition blocks must be nonempty")
        if len(set(labels)) != len(labels):
            raise DomainError("partition blocks overlap")
        dom = tuple(sorted(labels))
        if domain is not None and tuple(sorted(domain)) != dom:
            raise DomainError("blocks do not cover the given domain exactly")
        self._set(canon, dom)

    def _set(self, canon, dom):
        self.blocks = canon
        self.domain = dom
        self._index = None
        self._hash = None

    @classmethod
    def _trusted(cls, canon: tuple[Block, ...], domain: tuple | None = None) -> "SetPartition":
        obj = cls.__new__(cls)
        if domain is None:
            domain = tuple(sorted(x for b in canon for x in b))
        obj._set(canon, domain)
        return obj

    @classmethod
    def one(cls, domain: Iterable) -> "SetPartition":
        dom = tuple(sorted(domain))
        return cls._trusted((dom,), dom)

    @classmethod
    def zero(cls, domain: Iterable) -> "SetPartition":
        dom = tuple(sorted(domain))
        return cls._trusted(tuple((x,) for x in dom), dom)

    def index(self) -> dict:
        """Map from label to the position of its block."""
        if self._index is None:
            self._index = {x: k for k, b in enumerate(self.blocks) for x in b}
        return self._index

    def block_of(self, x) -> Block:
        return self.blocks[self.index()[x]]

    def same_block(self, x, y) -> bool:
        idx = self.index()
        return idx[x] == idx[y]

    def is_pairing(self) -> bool:
        return all(len(b) == 2 for b in self.blocks)

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SetPartition):
            return NotImplemented
        return self.blocks == other.blocks

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.blocks)
        return self._hash

    def __str__(self) -> str:
        return "".join("{" + ",".join(str(x) for x in b) + "}" for b in self.blocks)

    def __repr__(self) -> str:
        return f"SetPartition({self})"


def _rgs_blocks(items: Sequence) -> Iterator[tuple[Block, ...]]:
    """Partitions of ``items`` in restricted-growth-string order.

    With sorted input the yielded blocks are already canonical.
    """
    n = len(items)
    if n == 0:
        yield ()
        return
    blocks: list[list] = []

    def rec(k):
        if k == n:
            yield tuple(tuple(b) for b in blocks)
            return
        x = items[k]
        for b in blocks:
            b.append(x)
            yield from rec(k + 1)
            b.pop()
        blocks.append([x])
        yield from rec(k + 1)
        blocks.pop()

    yield from rec(0)


def _as_domain(n_or_domain) -> tuple:
    if isinstance(n_or_domain, int):
        if n_or_domain < 1:
            raise ContractError("ground set size must be at least 1")
        return unsigned_range(n_or_domain)
    dom = tuple(sorted(n_or_domain))
    if len(set(dom)) != len(dom):
        raise DomainError("ground set labels must be distinct")
    return dom


def enumerate_partitions(n_or_domain, max_size: int = MAX_ENUMERATION) -> Iterator[SetPartition]:
    """Every partition of ``[n]`` (or of an explicit label set), in RGS order."""
    dom = _as_domain(n_or_domain)
    if len(dom) > max_size:
        raise SizeError(
            f"refusing to enumerate Bell({len(dom)}) = {bell_number(len(dom))} partitions; "
            f"raise max_size to override"
        )
    for canon in _rgs_blocks(dom):
        yield SetPartition._trusted(canon, dom)


def _pairings_of(items: tuple) -> Iterator[tuple[Block, ...]]:
    if not items:
        yield ()
        return
    first = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1:]
        for tail in _pairings_of(rest):
            yield ((first, items[k]),) + tail


def enumerate_pairings(n_or_domain) -> Iterator[SetPartition]:
    dom = _as_domain(n_or_domain)
    if len(dom) % 2:
        raise ParityError(f"a set of {len(dom)} elements has no pairings")
    for blocks in _pairings_of(dom):
        yield SetPartition._trusted(blocks, dom)


def _even_blocks_of(items: tuple) -> Iterator[tuple[Block, ...]]:
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for size in range(1, len(rest) + 1, 2):
        for mates in combinations(range(len(rest)), size):
            chosen = set(mates)
            block = (first,) + tuple(rest[i] for i in mates)
            remaining = tuple(x for i, x in enumerate(rest) if i not in chosen)
            for tail in _even_blocks_of(remaining):
                yield (block,) + tail


def enumerate_even_partitions(n_or_domain) -> Iterator[SetPartition]:
    """Partitions all of whose blocks have even size."""
    dom = _as_domain(n_or_domain)
    if len(dom) % 2:
        raise ParityError(f"a set of {len(dom)} elements has no even-block partitions")
    for blocks in _even_blocks_of(dom):
        yield SetPartition._trusted(blocks, dom)


def _check_same_domain(a: SetPartition, b: SetPartition) -> None:
    if a.domain != b.domain:
        raise DomainError("partitions live on different ground sets")


def join(a: SetPartition, b: SetPartition) -> SetPartition:
    _check_same_domain(a, b)
    parent = {x: x for x in a.domain}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for part in (a, b):
        for blk in part.blocks:
            root = find(blk[0])
            for x in blk[1:]:
                rx = find(x)
                if rx != root:
                    parent[rx] = root
    groups: dict = {}
    for x in a.domain:
        groups.setdefault(find(x), []).append(x)
    return SetPartition._trusted(_canonical(groups.values()), a.domain)


def join_count(a: SetPartition, b: SetPartition) -> int:
    """Number of blocks of ``a ∨ b``."""
    return len(join(a, b))


def is_refinement(a: SetPartition, b: SetPartition) -> bool:
    """True iff every block of ``a`` lies inside a block of ``b``."""
    _check_same_domain(a, b)
    idx = b.index()
    return all(len({idx[x] for x in blk}) == 1 for blk in a.blocks)


def kernel(values: Sequence[Hashable], domain: Sequence | None = None) -> SetPartition:
    """Partition of positions by equal value; positions default to ``1..len(values)``."""
    if len(values) == 0:
        raise ContractError("kernel of an empty list")
    labels = tuple(domain) if domain is not None else unsigned_range(len(values))
    if len(labels) != len(values):
        raise ShapeError("values and domain differ in length")
    groups: dict = {}
    for lab, val in zip(labels, values):
        groups.setdefault(val, []).append(lab)
    return SetPartition(groups.values())


@dataclass(frozen=True)
class Gamma:
    """Cycle structure of r monomials of lengths ``m_vec`` laid out on ``[m]``."""

    m_vec: tuple[int, ...]
    partition: SetPartition
    _succ: tuple[int, ...]
    _pred: tuple[int, ...]

    @property
    def m(self) -> int:
        return sum(self.m_vec)

    @property
    def r(self) -> int:
        return len(self.m_vec)

    def succ(self, l: int) -> int:
        return self._succ[l - 1]

    def pred(self, l: int) -> int:
        return self._pred[l - 1]

    def block_index(self, l: int) -> int:
        return self.partition.index()[l]


def gamma_partition(m_vec: Sequence[int]) -> Gamma:
    m_vec = tuple(int(x) for x in m_vec)
    if not m_vec or any(x < 1 for x in m_vec):
        raise ContractError("monomial lengths must be a nonempty list of positive integers")
    blocks, succ, pred = [], [], []
    start = 1
    for mk in m_vec:
        blk = tuple(range(start, start + mk))
        blocks.append(blk)
        succ.extend(blk[1:] + blk[:1])
        pred.extend(blk[-1:] + blk[:-1])
        start += mk
    dom = unsigned_range(start - 1)
    return Gamma(m_vec, SetPartition._trusted(tuple(blocks), dom), tuple(succ), tuple(pred))


def lift_pairing(tau: SetPartition) -> SetPartition:
    """Pairing of ``±[m]`` with blocks ``{u,-v}`` and ``{v,-u}`` for each ``{u,v}`` in tau."""
    if not tau.is_pairing():
        raise ShapeError("lift_pairing needs a pairing")
    out = []
    for u, v in tau.blocks:
        out.append((u, -v))
        out.append((v, -u))
    return SetPartition(out)


def _transposed(mark) -> bool:
    if isinstance(mark, bool):
        return mark
    if mark in (1, "1", None):
        return False
    if mark in ("T", "⊤", "t", True):
        return True
    raise ShapeError(f"unrecognised transpose mark {mark!r}")


def lift_pairing_eps(tau: SetPartition, eps: Sequence) -> SetPartition:
    """Lift of tau where a pair with mixed transpose marks is matched sign-to-sign."""
    if not tau.is_pairing():
        raise ShapeError("lift_pairing_eps needs a pairing")
    m = len(tau.domain)
    if len(eps) != m or tau.domain != unsigned_range(m):
        raise ShapeError(f"expected {m} transpose marks over [1..{m}], got {len(eps)}")
    marks = [_transposed(e) for e in eps]
    out = []
    for u, v in tau.blocks:
        if marks[u - 1] == marks[v - 1]:
            out += [(u, -v), (v, -u)]
        else:
            out += [(u, v), (-u, -v)]
    return SetPartition(out)


# -- crossing pairing -------------------------------------------------------


def _pair_up(block: Block) -> list[Block]:
    return [block[i:i + 2] for i in range(0, len(block), 2)]


def _components(tau_blocks: list[Block], gamma_blocks: list[Block]) -> list[set]:
    dom = [x for b in gamma_blocks for x in b]
    parent = {x: x for x in dom}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for blk in list(tau_blocks) + list(gamma_blocks):
        for x in blk[1:]:
            parent[find(x)] = find(blk[0])
    groups: dict = {}
    for x in dom:
        groups.setdefault(find(x), set()).add(x)
    return list(groups.values())


def _repair(sigma: list[Block], uv: Block, pool: set) -> list[Block]:
    """Swap the pair ``uv`` and the smallest sigma pair inside ``pool`` for {u,a},{v,b}."""
    ab = min(p for p in sigma if p != uv and set(p) <= pool)
    u, v = uv
    a, b = ab
    rest = [p for p in sigma if p != uv and p != ab]
    return rest + [tuple(sorted((u, a))), tuple(sorted((v, b)))]


def _crossing(tau_blocks: list[Block], gamma_blocks: list[Block]) -> list[Block]:
    tau_blocks = sorted(tuple(sorted(b)) for b in tau_blocks)
    if all(len(b) == 2 for b in tau_blocks):
        return tau_blocks
    r = len(gamma_blocks)
    if r == 1:
        return [p for b in tau_blocks for p in _pair_up(b)]
    if r == 2:
        g0 = set(gamma_blocks[0])
        for blk in tau_blocks:
            left = [x for x in blk if x in g0]
            right = [x for x in blk if x not in g0]
            if left and right:
                u, v = left[0], right[0]
                rest = tuple(x for x in blk if x not in (u, v))
                out = [(u, v)] + _pair_up(rest)
                out += [p for b in tau_blocks if b != blk for p in _pair_up(b)]
                return out
        raise ContractError("no block of tau meets both cycles")

    current = list(tau_blocks)
    while True:
        big = [b for b in sorted(current) if len(b) >= 4]
        if not big:
            return current
        blk = big[0]
        uv, rest = blk[:2], blk[2:]
        trial = [b for b in current if b != blk] + [uv, rest]
        comps = _components(trial, gamma_blocks)
        if len(comps) == 1:
            current = trial
            continue
        # splitting the block disconnected the join into the two sides C ∋ uv and D ∋ rest
        side_c = next(c for c in comps if uv[0] in c)
        side_d = next(c for c in comps if rest[0] in c)
        tau_c = [b for b in trial if b[0] in side_c]
        tau_d = [b for b in trial if b[0] in side_d]
        gam_c = [g for g in gamma_blocks if g[0] in side_c]
        gam_d = [g for g in gamma_blocks if g[0] in side_d]
        sig_c = _crossing(tau_c, gam_c)
        sig_d = _crossing(tau_d, gam_d)
        return _repair(sig_c + sig_d, uv, set(rest))


def find_crossing_pairing(tau: SetPartition, gamma) -> SetPartition:
    """A pairing sigma <= tau whose join with gamma has at most r/2 blocks.

    ``gamma`` may be a :class:`Gamma` or its partition.  The construction
    peels two elements off an oversized block of tau while the join stays
    connected; when it splits, both sides are solved recursively and glued
    back by re-pairing across the split.
    """
    gpart = gamma.partition if isinstance(gamma, Gamma) else gamma
    if tau.domain != gpart.domain:
        raise ContractError("tau and gamma live on different ground sets")
    if any(len(b) % 2 for b in tau.blocks):
        raise ContractError("tau must have blocks of even size")
    if len(gpart) < 2:
        raise ContractError("need at least two cycles")
    if len(join(tau, gpart)) != 1:
        raise ContractError("tau ∨ gamma must be the one-block partition")
    sigma = _crossing(list(tau.blocks), list(gpart.blocks))
    return SetPartition(sigma, tau.domain)


# -- moments and cumulants --------------------------------------------------


@dataclass(frozen=True)
class MomentCumulantTable:
    """Moments or cumulants of one variable up to a given order.

    ``values[(n, c)]`` is the joint moment or cumulant of ``n`` arguments of
    which ``c`` are complex conjugates.  In real mode only ``c = 0`` is
    stored and the conjugation count is ignored on lookup.
    """

    order: int
    values: Mapping[tuple[int, int], object]
    complex_mode: bool = False
    kind: str = "cumulant"

    @classmethod
    def real(cls, seq: Sequence, kind: str = "cumulant") -> "MomentCumulantTable":
        """Real table from ``seq[n-1]`` = value at order n."""
        return cls(len(seq), {(n, 0): v for n, v in enumerate(seq, 1)}, False, kind)

    def __call__(self, n: int, c: int = 0):
        if not self.complex_mode:
            c = 0
        try:
            return self.values[(n, c)]
        except KeyError:
            raise CompletenessError(f"no {self.kind} of order {n} (conjugates {c}) in table") from None

    def as_list(self, c: int = 0) -> list:
        return [self(n, c) for n in range(1, self.order + 1)]

    def check_complete(self) -> None:
        for n in range(1, self.order + 1):
            for c in range(n + 1) if self.complex_mode else (0,):
                if (n, c) not in self.values:
                    raise CompletenessError(f"missing {self.kind} of order {n} (conjugates {c})")


class _GaussQ:
    """Exact complex rational; floats convert to it without rounding."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re, self.im = Fraction(re), Fraction(im)

    @classmethod
    def of(cls, x) -> "_GaussQ":
        if isinstance(x, _GaussQ):
            return x
        z = complex(x) if not isinstance(x, (int, Fraction)) else None
        return cls(x) if z is None else cls(z.real, z.imag)

    def __add__(self, o):
        o = _GaussQ.of(o)
        return _GaussQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = _GaussQ.of(o)
        return _GaussQ(self.re - o.re, self.im - o.im)

    def __mul__(self, o):
        o = _GaussQ.of(o)
        return _GaussQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__


def _convert(table: MomentCumulantTable, to_cumulants: bool) -> MomentCumulantTable:
    # mu(p, q) = sum_{i<p, j<=q} C(p-1, i) C(q, j) kappa(i+1, j) mu(p-1-i, q-j)
    # grouping partitions by the block holding one fixed argument
    table.check_complete()
    if any(isinstance(v, (float, complex)) for v in table.values.values()):
        # run the recursion exactly on the binary values and round once at the end,
        # so a round trip is accurate to the last bit instead of accumulating cancellation
        as_complex = any(isinstance(v, complex) for v in table.values.values())
        exact = MomentCumulantTable(table.order, {k: _GaussQ.of(v) for k, v in table.values.items()},
                                    table.complex_mode, table.kind)
        out = _convert(exact, to_cumulants)
        back = {}
        for k, v in out.values.items():
            v = _GaussQ.of(v)
            back[k] = complex(float(v.re), float(v.im)) if as_complex else float(v.re)
        return MomentCumulantTable(out.order, back, out.complex_mode, out.kind)
    n_max = table.order
    mu: dict = {(0, 0): 1}
    ka: dict = {}
    src = mu if to_cumulants else ka
    dst = ka if to_cumulants else mu
    for n in range(1, n_max + 1):
        for q in range(n + 1) if table.complex_mode else (0,):
            p = n - q
            src[(p, q)] = table.values[(n, q)]
            if p >= 1:
                terms = [
                    (math.comb(p - 1, i) * math.comb(q, j), (i + 1, j), (p - 1 - i, q - j))
                    for i in range(p) for j in range(q + 1)
                ]
            else:
                terms = [(math.comb(q - 1, j), (0, j + 1), (0, q - 1 - j)) for j in range(q)]
            lead = (p, q)
            acc = 0
            for coef, kk, mm in terms:
                if kk == lead:
                    continue
                acc = acc + coef * ka[kk] * mu[mm]
            if to_cumulants:
                ka[lead] = mu[lead] - acc
            else:
                mu[lead] = ka[lead] + acc
    values = {(p + q, q): v for (p, q), v in dst.items() if p + q >= 1}
    kind = "cumulant" if to_cumulants else "moment"
    return MomentCumulantTable(n_max, values, table.complex_mode, kind)


def cumulants_from_moments(moments: MomentCumulantTable) -> MomentCumulantTable:
    return _convert(moments, True)


def moments_from_cumulants(cumulants: MomentCumulantTable) -> MomentCumulantTable:
    return _convert(cumulants, False)


def mobius_weight(size: int) -> int:
    """(-1)^(size-1) (size-1)!, the lattice Möbius factor for a merged block."""
    return (-1) ** (size - 1) * math.factorial(size - 1)


def joint_cumulant(r: int, moment: Callable[[tuple[int, ...]], object]):
    """K_r from joint moments, ``moment(S)`` giving E of the product over the index tuple S."""
    total = 0
    for pi in enumerate_partitions(r):
        term = mobius_weight(len(pi))
        for blk in pi.blocks:
            term = term * moment(blk)
        total = total + term
    return total


# -- exact counts -----------------------------------------------------------


@lru_cache(maxsize=None)
def bell_number(n: int) -> int:
    if n < 0:
        raise ContractError("bell_number needs n >= 0")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


@lru_cache(maxsize=None)
def integer_partition_count(n: int) -> int:
    if n < 0:
        raise ContractError("integer_partition_count needs n >= 0")
    ways = [1] + [0] * n
    for part in range(1, n + 1):
        for total in range(part, n + 1):
            ways[total] += ways[total - part]
    return ways[n]


def double_factorial(n: int) -> int:
    if n < -1:
        raise ContractError("double_factorial needs n >= -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out
