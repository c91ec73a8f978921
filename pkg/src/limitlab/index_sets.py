"""Integer index sets: membership predicates with exact prefix counting.

An :class:`IndexSet` is a subset of the integers described by a vectorized
membership predicate together with an exact counting capability.  Counting is
always integer-exact: closed forms are used where the construction allows
(residue classes, ranges, block unions, complements), and a chunked
enumeration fallback covers everything else up to a documented practicality
ceiling of 10**8 consecutive integers.

Provided constructions:

* explicit finite sets and integer ranges,
* residue classes ``{k1 + k2*j : j >= 0}``,
* the sparse block union around powers of four (``power_block_set``) and its
  band-restricted variant (``power_block_band``),
* reproducible pseudo-random sets of a given density (seeded, counter-based
  generator, so realizations are identical across platforms and runs),
* boolean algebra (union, intersection, difference, complement) and shifts,
* a small textual expression grammar (see :func:`parse_set`).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationLimitError

ENUMERATION_CEILING = 10**8
_CHUNK = 1 << 20


def _as_int64(ks) -> np.ndarray:
    return np.asarray(ks, dtype=np.int64)


class IndexSet:
    """A subset of the integers with exact counting.

    Parameters
    ----------
    descriptor : str
        Human-readable construction string; round-trips through
        :func:`parse_set` for the built-in constructions.
    bounds : tuple[int, int] or None
        Inclusive interval guaranteed to contain every element, or ``None``
        when the set is (potentially) unbounded.  Finite bounds are what make
        a set usable with infinite-mass measures.
    """

    def __init__(self, descriptor: str, bounds: tuple[int, int] | None = None):
        self.descriptor = descriptor
        self.bounds = bounds

    # -- membership -----------------------------------------------------------
    def indicator(self, ks) -> np.ndarray:
        """Vectorized membership test for an int64 array."""
        raise NotImplementedError

    def contains(self, k: int) -> bool:
        return bool(self.indicator(np.array([k], dtype=np.int64))[0])

    # -- counting -------------------------------------------------------------
    def count_range(self, lo: int, hi: int) -> int:
        """Exact ``#(A ∩ [lo, hi])`` as a Python integer."""
        if hi < lo:
            return 0
        if self.bounds is not None:
            lo = max(lo, self.bounds[0])
            hi = min(hi, self.bounds[1])
            if hi < lo:
                return 0
        return self._count_range(lo, hi)

    def count_prefix(self, n: int) -> int:
        """Exact ``#{0 <= k <= n : k in A}``."""
        if n < 0:
            return 0
        return self.count_range(0, n)

    def _count_range(self, lo: int, hi: int) -> int:
        # Enumeration fallback; subclasses override with closed forms.
        if hi - lo + 1 > ENUMERATION_CEILING:
            raise EnumerationLimitError(
                f"counting {self.descriptor} on [{lo}, {hi}] exceeds the "
                f"enumeration ceiling of {ENUMERATION_CEILING}"
            )
        total = 0
        for start in range(lo, hi + 1, _CHUNK):
            ks = np.arange(start, min(start + _CHUNK - 1, hi) + 1, dtype=np.int64)
            total += int(np.count_nonzero(self.indicator(ks)))
        return total

    # -- materialization ------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.bounds is not None

    def elements(self) -> np.ndarray:
        """Materialize a finite set as a sorted int64 array."""
        if self.bounds is None:
            raise EnumerationLimitError(
                f"cannot materialize {self.descriptor}: no finite bounds"
            )
        lo, hi = self.bounds
        if hi - lo + 1 > ENUMERATION_CEILING:
            raise EnumerationLimitError(
                f"materializing {self.descriptor} exceeds the enumeration ceiling"
            )
        parts = []
        for start in range(lo, hi + 1, _CHUNK):
            ks = np.arange(start, min(start + _CHUNK - 1, hi) + 1, dtype=np.int64)
            parts.append(ks[self.indicator(ks)])
        return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)

    def size(self) -> int:
        """Exact number of elements of a finite set."""
        if self.bounds is None:
            raise EnumerationLimitError(f"{self.descriptor} is not finite")
        return self.count_range(*self.bounds)

    # -- algebra --------------------------------------------------------------
    def __or__(self, other: "IndexSet") -> "IndexSet":
        return union(self, other)

    def __and__(self, other: "IndexSet") -> "IndexSet":
        return intersection(self, other)

    def __sub__(self, other: "IndexSet") -> "IndexSet":
        return difference(self, other)

    def __invert__(self) -> "IndexSet":
        return complement(self)

    def __repr__(self) -> str:
        return f"IndexSet({self.descriptor})"


# ------------------------------------------------------------------------------
# Primitive sets
# ------------------------------------------------------------------------------
class _Integers(IndexSet):
    def __init__(self):
        super().__init__("integers", None)

    def indicator(self, ks):
        return np.ones(len(_as_int64(ks)), dtype=bool)

    def _count_range(self, lo, hi):
        return hi - lo + 1


class _Empty(IndexSet):
    def __init__(self):
        super().__init__("empty", (0, -1))

    def indicator(self, ks):
        return np.zeros(len(_as_int64(ks)), dtype=bool)

    def _count_range(self, lo, hi):
        return 0


class _Range(IndexSet):
    def __init__(self, lo: int, hi: int):
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        super().__init__(f"range({lo},{hi})", (lo, hi))
        self.lo, self.hi = int(lo), int(hi)

    def indicator(self, ks):
        ks = _as_int64(ks)
        return (ks >= self.lo) & (ks <= self.hi)

    def _count_range(self, lo, hi):
        return max(0, min(hi, self.hi) - max(lo, self.lo) + 1)

    def elements(self):
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)


class _Points(IndexSet):
    def __init__(self, points):
        pts = np.unique(_as_int64(list(points)))
        if pts.size == 0:
            raise ValueError("empty point set")
        desc = "points(" + ",".join(str(int(p)) for p in pts) + ")"
        super().__init__(desc, (int(pts[0]), int(pts[-1])))
        self.points = pts

    def indicator(self, ks):
        ks = _as_int64(ks)
        idx = np.searchsorted(self.points, ks)
        idx_c = np.minimum(idx, self.points.size - 1)
        return (idx < self.points.size) & (self.points[idx_c] == ks)

    def _count_range(self, lo, hi):
        return int(
            np.searchsorted(self.points, hi, side="right")
            - np.searchsorted(self.points, lo, side="left")
        )

    def elements(self):
        return self.points


class _Residue(IndexSet):
    """``{k1 + k2*j : j >= 0}`` for 0 <= k1 < k2 (a subset of the naturals)."""

    def __init__(self, k1: int, k2: int):
        if k2 <= 0:
            raise ValueError("residue modulus must be >= 1")
        k1 = int(k1) % int(k2)
        super().__init__(f"residue({k1},{k2})", None)
        self.k1, self.k2 = k1, int(k2)

    def indicator(self, ks):
        ks = _as_int64(ks)
        return (ks >= 0) & (ks % self.k2 == self.k1)

    def _count_range(self, lo, hi):
        def upto(n: int) -> int:
            if n < self.k1:
                return 0
            return (n - self.k1) // self.k2 + 1

        return upto(hi) - upto(max(lo, 0) - 1)


class _Blocks(IndexSet):
    """A union of pairwise disjoint integer intervals, lazily extensible.

    ``block_fn(k)`` returns the k-th interval ``(lo, hi)`` (possibly empty,
    signalled by ``lo > hi``).  Intervals must be non-overlapping and ordered
    by ``lo``; this is asserted as blocks are generated.
    """

    def __init__(self, descriptor: str, block_fn):
        super().__init__(descriptor, None)
        self._block_fn = block_fn
        self._blocks: list[tuple[int, int]] = []
        self._next_k = 0
        self._boundaries = np.empty(0, dtype=np.int64)

    def _extend_to(self, cover: int) -> None:
        changed = False
        while True:
            lo, hi = self._block_fn(self._next_k)
            if lo > cover and lo > hi:
                # empty block beyond the cover: later blocks only move right
                break
            if lo <= hi:
                if self._blocks and lo <= self._blocks[-1][1]:
                    raise ValueError(f"{self.descriptor}: overlapping blocks")
                self._blocks.append((lo, hi))
                changed = True
            self._next_k += 1
            if lo > cover:
                break
        if changed:
            flat = [b for blk in self._blocks for b in (blk[0], blk[1] + 1)]
            self._boundaries = np.array(flat, dtype=np.int64)

    def indicator(self, ks):
        ks = _as_int64(ks)
        if ks.size == 0:
            return np.zeros(0, dtype=bool)
        self._extend_to(int(ks.max()))
        if self._boundaries.size == 0:
            return np.zeros(ks.shape, dtype=bool)
        pos = np.searchsorted(self._boundaries, ks, side="right")
        return (pos % 2) == 1

    def _count_range(self, lo, hi):
        self._extend_to(hi)
        total = 0
        for blo, bhi in self._blocks:
            if blo > hi:
                break
            total += max(0, min(bhi, hi) - max(blo, lo) + 1)
        return total


def power_block_set() -> IndexSet:
    """Union over k >= 0 of the integer intervals ``[4^k - k*2^k, 4^k + k*2^k]``.

    Each block is centered at ``4^k`` with half-width ``k`` in units of
    ``2^k = sqrt(4^k)``, so the blocks capture a growing number of
    standard-deviation-sized neighbourhoods of the points ``4^k`` while their
    total length stays negligible relative to ``4^k``: the set has natural
    density zero.
    """

    def block(k: int) -> tuple[int, int]:
        c = 4**k
        w = k * 2**k
        return c - w, c + w

    return _Blocks("blocks()", block)


def power_block_band(a: float, b: float) -> IndexSet:
    """Blocks ``[4^k + max(-k, a)*2^k, 4^k + min(k, b)*2^k]`` for k >= 0.

    Like :func:`power_block_set` but each block is cut to the band ``[a, b]``
    measured in units of ``2^k`` around the center ``4^k``.  Non-integer
    endpoints are rounded toward the interval interior, so the result is a
    subset of the real-interval version.  Requires ``a < b``.
    """
    if not a < b:
        raise ValueError("band requires a < b")
    a, b = float(a), float(b)

    def block(k: int) -> tuple[int, int]:
        c = 4**k
        lo = c + math.ceil((2**k) * max(-float(k), a))
        hi = c + math.floor((2**k) * min(float(k), b))
        return lo, hi

    return _Blocks(f"band({a:g},{b:g})", block)


# ------------------------------------------------------------------------------
# Seeded pseudo-random sets
# ------------------------------------------------------------------------------
@dataclass(frozen=True)
class BernoulliSchemeSpec:
    """Parameters of a reproducible random subset of the naturals.

    Index ``k`` belongs to the set iff the k-th draw of a Philox-keyed
    uniform stream falls below ``p``.  Philox is counter-based, so the
    realization depends only on ``(p, seed)`` and is bit-for-bit identical
    across platforms and query orders.
    """

    p: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")


class _BernoulliSet(IndexSet):
    CEILING = 1 << 25  # materialized-bits practicality limit

    def __init__(self, spec: BernoulliSchemeSpec):
        super().__init__(f"bernoulli({spec.p:g},{spec.seed})", None)
        self.spec = spec
        self._bits = np.zeros(0, dtype=bool)

    def _ensure(self, n: int) -> None:
        """Materialize membership bits for indices < n."""
        if n <= self._bits.size:
            return
        if n > self.CEILING:
            raise EnumerationLimitError(
                f"{self.descriptor}: materializing {n} bits exceeds the ceiling"
            )
        cap = 1 << max(10, (n - 1).bit_length())
        gen = np.random.Generator(np.random.Philox(key=self.spec.seed))
        # stream draws are prefix-stable, so regenerating extends consistently
        self._bits = gen.random(cap) < self.spec.p

    def indicator(self, ks):
        ks = _as_int64(ks)
        out = np.zeros(ks.shape, dtype=bool)
        valid = ks >= 0
        if np.any(valid):
            self._ensure(int(ks[valid].max()) + 1)
            out[valid] = self._bits[ks[valid]]
        return out

    def _count_range(self, lo, hi):
        lo = max(lo, 0)
        if hi < lo:
            return 0
        self._ensure(hi + 1)
        return int(np.count_nonzero(self._bits[lo : hi + 1]))


def bernoulli_scheme_set(spec: BernoulliSchemeSpec | None = None, *, p: float | None = None, seed: int | None = None) -> IndexSet:
    """Deterministic random set of density ``p`` from a seeded scheme."""
    if spec is None:
        spec = BernoulliSchemeSpec(float(p), int(seed))
    return _BernoulliSet(spec)


# ------------------------------------------------------------------------------
# Algebra
# ------------------------------------------------------------------------------
class _Shift(IndexSet):
    """``{a + k : a in A}``."""

    def __init__(self, base: IndexSet, k: int):
        bounds = None
        if base.bounds is not None:
            bounds = (base.bounds[0] + k, base.bounds[1] + k)
        super().__init__(f"shift({base.descriptor},{k})", bounds)
        self.base, self.k = base, int(k)

    def indicator(self, ks):
        return self.base.indicator(_as_int64(ks) - self.k)

    def _count_range(self, lo, hi):
        return self.base.count_range(lo - self.k, hi - self.k)


class _Complement(IndexSet):
    def __init__(self, base: IndexSet):
        super().__init__(f"~{_wrap(base)}", None)
        self.base = base

    def indicator(self, ks):
        return ~self.base.indicator(ks)

    def _count_range(self, lo, hi):
        return (hi - lo + 1) - self.base.count_range(lo, hi)


class _Union(IndexSet):
    def __init__(self, a: IndexSet, b: IndexSet):
        bounds = None
        if a.bounds is not None and b.bounds is not None:
            bounds = (min(a.bounds[0], b.bounds[0]), max(a.bounds[1], b.bounds[1]))
        super().__init__(f"{_wrap(a)} | {_wrap(b)}", bounds)
        self.a, self.b = a, b

    def indicator(self, ks):
        return self.a.indicator(ks) | self.b.indicator(ks)

    def _count_range(self, lo, hi):
        both = intersection(self.a, self.b).count_range(lo, hi)
        return self.a.count_range(lo, hi) + self.b.count_range(lo, hi) - both


class _Intersection(IndexSet):
    def __init__(self, a: IndexSet, b: IndexSet):
        bounds = a.bounds
        if b.bounds is not None:
            bounds = b.bounds if bounds is None else (
                max(bounds[0], b.bounds[0]),
                min(bounds[1], b.bounds[1]),
            )
        super().__init__(f"{_wrap(a)} & {_wrap(b)}", bounds)
        self.a, self.b = a, b

    def indicator(self, ks):
        return self.a.indicator(ks) & self.b.indicator(ks)


class _Difference(IndexSet):
    def __init__(self, a: IndexSet, b: IndexSet):
        super().__init__(f"{_wrap(a)} - {_wrap(b)}", a.bounds)
        self.a, self.b = a, b

    def indicator(self, ks):
        return self.a.indicator(ks) & ~self.b.indicator(ks)

    def _count_range(self, lo, hi):
        both = intersection(self.a, self.b).count_range(lo, hi)
        return self.a.count_range(lo, hi) - both


def _wrap(s: IndexSet) -> str:
    d = s.descriptor
    return f"({d})" if (" " in d and not d.startswith("(")) else d


# -- public constructors ------------------------------------------------------
def integers() -> IndexSet:
    return _Integers()


def naturals() -> IndexSet:
    return _Residue(0, 1)


def empty_set() -> IndexSet:
    return _Empty()


def from_points(points) -> IndexSet:
    return _Points(points)


def range_set(lo: int, hi: int) -> IndexSet:
    return _Range(lo, hi)


def residue_class(k1: int, k2: int) -> IndexSet:
    """Arithmetic progression ``{k1 + k2*j : j >= 0}`` (k1 normalized mod k2)."""
    return _Residue(k1, k2)


def evens() -> IndexSet:
    return _Residue(0, 2)


def odds() -> IndexSet:
    return _Residue(1, 2)


def shift_set(a: IndexSet, k: int) -> IndexSet:
    return a if k == 0 else _Shift(a, k)


def union(a: IndexSet, b: IndexSet) -> IndexSet:
    return _Union(a, b)


def intersection(a: IndexSet, b: IndexSet) -> IndexSet:
    return _Intersection(a, b)


def difference(a: IndexSet, b: IndexSet) -> IndexSet:
    return _Difference(a, b)


def complement(a: IndexSet) -> IndexSet:
    if isinstance(a, _Complement):
        return a.base
    return _Complement(a)


# ------------------------------------------------------------------------------
# Descriptor grammar
# ------------------------------------------------------------------------------
# expr   := term {("|" | "-") term}
# term   := factor {"&" factor}
# factor := "~" factor | atom
# atom   := NAME "(" [args] ")" | NAME | "(" expr ")"
# args   := arg {"," arg};  arg := NUMBER | expr
_TOKEN = re.compile(
    r"\s*(?:(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<number>[+-]?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<op>[()|&~,\-]))"
)

_BARE_NAMES = {
    "evens": evens,
    "odds": odds,
    "naturals": naturals,
    "integers": integers,
    "empty": empty_set,
}


class _Parser:
    def __init__(self, text: str):
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text: str):
        tokens, i = [], 0
        while i < len(text):
            m = _TOKEN.match(text, i)
            if not m or m.end() == i:
                raise ValueError(f"bad set descriptor near {text[i:i+12]!r}")
            if m.lastgroup == "name":
                tokens.append(("name", m.group("name")))
            elif m.lastgroup == "number":
                tokens.append(("number", m.group("number")))
            else:
                tokens.append(("op", m.group("op")))
            i = m.end()
        return tokens

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def _next(self):
        tok = self._peek()
        self.pos += 1
        return tok

    def _expect(self, value: str):
        kind, val = self._next()
        if kind != "op" or val != value:
            raise ValueError(f"expected {value!r} in set descriptor, got {val!r}")

    def parse(self) -> IndexSet:
        result = self._expr()
        if self.pos != len(self.tokens):
            raise ValueError("trailing tokens in set descriptor")
        return result

    def _expr(self) -> IndexSet:
        node = self._term()
        while True:
            kind, val = self._peek()
            if kind == "op" and val == "|":
                self._next()
                node = union(node, self._term())
            elif kind == "op" and val == "-":
                self._next()
                node = difference(node, self._term())
            else:
                return node

    def _term(self) -> IndexSet:
        node = self._factor()
        while True:
            kind, val = self._peek()
            if kind == "op" and val == "&":
                self._next()
                node = intersection(node, self._factor())
            else:
                return node

    def _factor(self) -> IndexSet:
        kind, val = self._peek()
        if kind == "op" and val == "~":
            self._next()
            return complement(self._factor())
        return self._atom()

    def _atom(self) -> IndexSet:
        kind, val = self._next()
        if kind == "op" and val == "(":
            node = self._expr()
            self._expect(")")
            return node
        if kind != "name":
            raise ValueError(f"unexpected token {val!r} in set descriptor")
        nkind, nval = self._peek()
        if not (nkind == "op" and nval == "("):
            if val in _BARE_NAMES:
                return _BARE_NAMES[val]()
            raise ValueError(f"unknown set name {val!r}")
        self._next()
        args = []
        if self._peek() != ("op", ")"):
            while True:
                args.append(self._arg())
                kind2, val2 = self._next()
                if kind2 == "op" and val2 == ")":
                    break
                if not (kind2 == "op" and val2 == ","):
                    raise ValueError("malformed argument list in set descriptor")
        else:
            self._next()
        return self._build(val, args)

    def _arg(self):
        kind, val = self._peek()
        if kind == "number":
            self._next()
            return float(val) if ("." in val or "e" in val or "E" in val) else int(val)
        return self._expr()

    @staticmethod
    def _build(name: str, args: list) -> IndexSet:
        def nums(n):
            if len(args) != n or not all(isinstance(a, (int, float)) for a in args):
                raise ValueError(f"{name} expects {n} numeric argument(s)")
            return args

        if name == "residue":
            k1, k2 = nums(2)
            return residue_class(int(k1), int(k2))
        if name == "range":
            lo, hi = nums(2)
            return range_set(int(lo), int(hi))
        if name == "points":
            if not args or not all(isinstance(a, int) for a in args):
                raise ValueError("points expects integer arguments")
            return from_points(args)
        if name in ("blocks", "B"):
            if args:
                raise ValueError(f"{name} takes no arguments")
            return power_block_set()
        if name == "band":
            a, b = nums(2)
            return power_block_band(float(a), float(b))
        if name == "bernoulli":
            p, seed = nums(2)
            return bernoulli_scheme_set(p=float(p), seed=int(seed))
        if name == "shift":
            if len(args) != 2 or not isinstance(args[0], IndexSet) or not isinstance(args[1], int):
                raise ValueError("shift expects (set, integer)")
            return shift_set(args[0], args[1])
        raise ValueError(f"unknown set constructor {name!r}")


def parse_set(text: str) -> IndexSet:
    """Parse a set descriptor expression, e.g. ``"residue(3,5) | blocks()"``."""
    return _Parser(text).parse()
