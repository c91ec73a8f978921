"""Discrete and interval measures with certified mass evaluation.

Discrete measures are nonnegative weight functions on the integers carrying a
mass-class tag:

* ``PROBABILITY`` — weights sum to 1; every mass query comes with a certified
  bound on the mass that may live outside the evaluation window,
* ``FINITE`` — finite total mass, not normalized,
* ``INFINITE`` — improper: finite mass on every finite set, infinite total
  mass.  Mass queries are legal only on finite sets (or with an explicit
  truncation window) and total-mass queries raise :class:`InfiniteMassError`.

Weight evaluation happens in log space (log-gamma based probability mass
functions) and is exponentiated only when summing a window, so extreme
parameters (e.g. a Poisson mean of 16384) stay representable.  Families whose
masses are pure counts (finite uniform, Dirac, flat) answer queries through
the exact integer counting of :mod:`limitlab.index_sets`, which keeps ratios
of counts correctly rounded.

Improper measures are meaningful only up to a positive scalar factor; use
:func:`proportional_on` to compare measures projectively on a finite window.

Interval measures on (0, 1) cover the Beta family (with a continued-fraction
regularized incomplete beta for the distribution function) and the improper
density ``1/(x(1-x))`` whose one-sided boundary masses diverge.
"""

from __future__ import annotations

import enum
import math
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import gammaln, logsumexp

from . import index_sets as isets
from .errors import EnumerationLimitError, InfiniteMassError, ZeroMassRestrictionError

_CHUNK = 1 << 20
NEG_INF = float("-inf")


class MassClass(enum.Enum):
    PROBABILITY = "probability"
    FINITE = "finite"
    INFINITE = "infinite"


class Domain(enum.Enum):
    NATURALS = "naturals"
    INTEGERS = "integers"
    UNIT_INTERVAL = "unit_interval"


class Certified(NamedTuple):
    """A mass value together with a certified bound on the unevaluated tail."""

    value: float
    error_bound: float

    def __float__(self) -> float:
        return self.value


def _iter_chunks(lo: int, hi: int):
    if hi - lo + 1 > isets.ENUMERATION_CEILING:
        raise EnumerationLimitError(
            f"mass evaluation window [{lo}, {hi}] exceeds the enumeration ceiling"
        )
    for start in range(lo, hi + 1, _CHUNK):
        yield np.arange(start, min(start + _CHUNK - 1, hi) + 1, dtype=np.int64)


# ------------------------------------------------------------------------------
# Discrete measures
# ------------------------------------------------------------------------------
class DiscreteMeasure:
    """Base class: a nonnegative weight function on the integers.

    Subclasses implement ``log_weights`` (vectorized) and may override
    ``mass``/``log_mass`` with exact counting shortcuts.  Instances are
    immutable after construction and safe to evaluate concurrently.
    """

    def __init__(
        self,
        mass_class: MassClass,
        support_hint: tuple[int, int] | None,
        family_tag: str,
        tail_bound: float = 0.0,
        params: dict | None = None,
    ):
        self.mass_class = mass_class
        self.support_hint = support_hint
        self.family_tag = family_tag
        self.tail_bound = float(tail_bound)
        self.params = dict(params or {})

    # -- pointwise ------------------------------------------------------------
    def log_weights(self, ks) -> np.ndarray:
        raise NotImplementedError

    def log_weight(self, k: int) -> float:
        return float(self.log_weights(np.array([k], dtype=np.int64))[0])

    def weight(self, k: int) -> float:
        return math.exp(self.log_weight(k))

    def weights(self, ks) -> np.ndarray:
        return np.exp(self.log_weights(ks))

    # -- set masses -------------------------------------------------------------
    def _resolve_window(
        self, a: isets.IndexSet, trunc: tuple[int, int] | None
    ) -> tuple[int, int] | None:
        """Finite evaluation window for the mass of ``a``, or None if empty."""
        lo, hi = None, None
        if self.support_hint is not None:
            lo, hi = self.support_hint
        for cut in (a.bounds, trunc):
            if cut is not None:
                lo = cut[0] if lo is None else max(lo, cut[0])
                hi = cut[1] if hi is None else min(hi, cut[1])
        if lo is None or hi is None:
            raise InfiniteMassError(
                f"mass of {a.descriptor} under {self.family_tag}: no finite "
                "evaluation window (pass a finite set or an explicit truncation)"
            )
        if hi < lo:
            return None
        return lo, hi

    def mass(self, a: isets.IndexSet, trunc: tuple[int, int] | None = None) -> Certified:
        """Mass of the set ``a``, with a certified tail bound.

        ``trunc=(lo, hi)`` restricts evaluation to ``a ∩ [lo, hi]``; it is
        required when an infinite-mass measure meets an infinite set.
        """
        window = self._resolve_window(a, trunc)
        if window is None:
            return Certified(0.0, 0.0)
        total = 0.0
        for ks in _iter_chunks(*window):
            sel = ks[a.indicator(ks)]
            if sel.size:
                total += float(np.exp(self.log_weights(sel)).sum())
        return Certified(total, self.tail_bound)

    def log_mass(self, a: isets.IndexSet, trunc: tuple[int, int] | None = None) -> float:
        """log of ``mass(a)``, computed by log-sum-exp (stable for tiny masses)."""
        window = self._resolve_window(a, trunc)
        if window is None:
            return NEG_INF
        pieces = []
        for ks in _iter_chunks(*window):
            sel = ks[a.indicator(ks)]
            if sel.size:
                pieces.append(logsumexp(self.log_weights(sel)))
        return float(logsumexp(pieces)) if pieces else NEG_INF

    def total_mass(self) -> Certified:
        if self.mass_class is MassClass.INFINITE:
            raise InfiniteMassError(f"{self.family_tag}: total mass is not a number")
        return self.mass(isets.integers())

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.family_tag} ({self.mass_class.value})>"


class LogWeightMeasure(DiscreteMeasure):
    """Measure given by a vectorized log-weight function on a support window."""

    def __init__(self, log_weight_fn: Callable[[np.ndarray], np.ndarray], **kw):
        super().__init__(**kw)
        self._log_weight_fn = log_weight_fn

    def log_weights(self, ks):
        return self._log_weight_fn(np.asarray(ks, dtype=np.int64))


class UniformRangeMeasure(DiscreteMeasure):
    """Equal mass ``1/(hi-lo+1)`` on the integer range ``[lo, hi]``.

    Set masses are exact count ratios, so e.g. the mass of a residue class is
    the correctly rounded rational ``count/size``.
    """

    def __init__(self, lo: int, hi: int):
        if hi < lo:
            raise ValueError("empty range")
        super().__init__(
            mass_class=MassClass.PROBABILITY,
            support_hint=(lo, hi),
            family_tag=f"uniform[{lo}..{hi}]",
            params={"lo": lo, "hi": hi},
        )
        self.lo, self.hi = int(lo), int(hi)
        self.n_points = self.hi - self.lo + 1

    def log_weights(self, ks):
        ks = np.asarray(ks, dtype=np.int64)
        out = np.full(ks.shape, NEG_INF)
        out[(ks >= self.lo) & (ks <= self.hi)] = -math.log(self.n_points)
        return out

    def _count(self, a, trunc):
        lo, hi = self.lo, self.hi
        if trunc is not None:
            lo, hi = max(lo, trunc[0]), min(hi, trunc[1])
        if hi < lo:
            return 0
        return a.count_range(lo, hi)

    def mass(self, a, trunc=None):
        return Certified(self._count(a, trunc) / self.n_points, 0.0)

    def log_mass(self, a, trunc=None):
        c = self._count(a, trunc)
        return NEG_INF if c == 0 else math.log(c) - math.log(self.n_points)


class FinitePointsMeasure(DiscreteMeasure):
    """Measure supported on an explicit finite point array.

    With ``point_weights=None`` all points carry equal mass (finite uniform /
    Dirac); masses are then exact count ratios.  Otherwise ``point_weights``
    holds the per-point probabilities.
    """

    def __init__(self, points, point_weights=None, family_tag=None, assume_unique=False):
        pts = np.asarray(points, dtype=np.int64)
        if pts.size == 0:
            raise ValueError("empty support")
        if point_weights is None:
            if not assume_unique:
                pts = np.unique(pts)
        else:
            point_weights = np.asarray(point_weights, dtype=float)
            if point_weights.shape != pts.shape:
                raise ValueError("weights shape mismatch")
            order = np.argsort(pts, kind="stable")
            pts, point_weights = pts[order], point_weights[order]
        tag = family_tag or (f"dirac({pts[0]})" if pts.size == 1 and point_weights is None
                             else f"finite-support[{pts.size}]")
        super().__init__(
            mass_class=MassClass.PROBABILITY,
            support_hint=(int(pts.min()), int(pts.max())),
            family_tag=tag,
        )
        self.points = pts
        self.point_weights = point_weights
        self._sorted = point_weights is not None or assume_unique is False

    def log_weights(self, ks):
        ks = np.asarray(ks, dtype=np.int64)
        pts = np.sort(self.points) if not self._sorted else self.points
        idx = np.searchsorted(pts, ks)
        idx_c = np.minimum(idx, pts.size - 1)
        hit = (idx < pts.size) & (pts[idx_c] == ks)
        out = np.full(ks.shape, NEG_INF)
        if self.point_weights is None:
            out[hit] = -math.log(self.points.size)
        else:
            w = self.point_weights[idx_c]
            with np.errstate(divide="ignore"):
                out[hit] = np.log(w[hit])
        return out

    def _select(self, a, trunc):
        mask = a.indicator(self.points)
        if trunc is not None:
            mask &= (self.points >= trunc[0]) & (self.points <= trunc[1])
        return mask

    def mass(self, a, trunc=None):
        mask = self._select(a, trunc)
        if self.point_weights is None:
            return Certified(int(mask.sum()) / self.points.size, 0.0)
        return Certified(float(self.point_weights[mask].sum()), 0.0)

    def log_mass(self, a, trunc=None):
        v = self.mass(a, trunc).value
        return math.log(v) if v > 0 else NEG_INF


class FlatMeasure(DiscreteMeasure):
    """Improper measure with weight 1 on every integer at or above ``lower``.

    ``lower=None`` means all of the integers.  Masses of finite sets are exact
    counts; any query without a finite window raises.
    """

    def __init__(self, lower: int | None):
        domain = "integers" if lower is None else f"naturals+{lower}" if lower else "naturals"
        super().__init__(
            mass_class=MassClass.INFINITE,
            support_hint=None,
            family_tag=f"flat({domain})",
            params={"lower": lower},
        )
        self.lower = lower

    def log_weights(self, ks):
        ks = np.asarray(ks, dtype=np.int64)
        out = np.zeros(ks.shape, dtype=float)
        if self.lower is not None:
            out[ks < self.lower] = NEG_INF
        return out

    def mass(self, a, trunc=None):
        window = self._resolve_window(a, trunc)
        if window is None:
            return Certified(0.0, 0.0)
        lo, hi = window
        if self.lower is not None:
            lo = max(lo, self.lower)
        return Certified(float(a.count_range(lo, hi)), 0.0)

    def log_mass(self, a, trunc=None):
        v = self.mass(a, trunc).value
        return math.log(v) if v > 0 else NEG_INF


class ShiftedMeasure(DiscreteMeasure):
    """``m'(A) = m(A + k)``: the base measure viewed through a shifted lens."""

    def __init__(self, base: DiscreteMeasure, k: int):
        hint = None
        if base.support_hint is not None:
            hint = (base.support_hint[0] - k, base.support_hint[1] - k)
        super().__init__(
            mass_class=base.mass_class,
            support_hint=hint,
            family_tag=f"shift({base.family_tag},{k})",
            tail_bound=base.tail_bound,
            params=base.params,
        )
        self.base, self.k = base, int(k)

    def log_weights(self, ks):
        return self.base.log_weights(np.asarray(ks, dtype=np.int64) + self.k)

    def _shift_trunc(self, trunc):
        return None if trunc is None else (trunc[0] + self.k, trunc[1] + self.k)

    def mass(self, a, trunc=None):
        return self.base.mass(isets.shift_set(a, self.k), self._shift_trunc(trunc))

    def log_mass(self, a, trunc=None):
        return self.base.log_mass(isets.shift_set(a, self.k), self._shift_trunc(trunc))


class RestrictedMeasure(DiscreteMeasure):
    """Base measure restricted to a region and renormalized."""

    def __init__(self, base: DiscreteMeasure, region: isets.IndexSet, log_norm: float):
        if not np.isfinite(log_norm):
            raise ZeroMassRestrictionError(
                f"restriction of {base.family_tag} to {region.descriptor} has no mass"
            )
        hint = base.support_hint
        if region.bounds is not None:
            hint = region.bounds if hint is None else (
                max(hint[0], region.bounds[0]),
                min(hint[1], region.bounds[1]),
            )
        norm = math.exp(log_norm)
        super().__init__(
            mass_class=MassClass.PROBABILITY,
            support_hint=hint,
            family_tag=f"{base.family_tag}|{region.descriptor}",
            tail_bound=base.tail_bound / norm if norm > 0 else 0.0,
        )
        self.base, self.region = base, region
        self.log_norm, self.norm = log_norm, norm

    def log_weights(self, ks):
        ks = np.asarray(ks, dtype=np.int64)
        out = self.base.log_weights(ks) - self.log_norm
        out[~self.region.indicator(ks)] = NEG_INF
        return out

    def mass(self, a, trunc=None):
        inner = self.base.mass(isets.intersection(a, self.region), trunc)
        return Certified(inner.value / self.norm, inner.error_bound / self.norm)

    def log_mass(self, a, trunc=None):
        return self.base.log_mass(isets.intersection(a, self.region), trunc) - self.log_norm


class MixtureMeasure(DiscreteMeasure):
    """Convex combination of component measures.

    Masses combine component by component, so exact-counting components keep
    their precision inside the mixture.
    """

    def __init__(self, components: list[tuple[float, DiscreteMeasure]], family_tag=None):
        comps = [(float(c), m) for c, m in components if c > 0.0]
        if not comps:
            raise ValueError("mixture needs at least one positive coefficient")
        lo = min((m.support_hint[0] for _, m in comps if m.support_hint), default=None)
        hi = max((m.support_hint[1] for _, m in comps if m.support_hint), default=None)
        hint = None if lo is None or hi is None else (lo, hi)
        if any(m.support_hint is None for _, m in comps):
            hint = None
        super().__init__(
            mass_class=MassClass.PROBABILITY,
            support_hint=hint,
            family_tag=family_tag or "mixture(" + ", ".join(
                f"{c:g}*{m.family_tag}" for c, m in comps) + ")",
            tail_bound=sum(c * m.tail_bound for c, m in comps),
        )
        self.components = comps

    def log_weights(self, ks):
        ks = np.asarray(ks, dtype=np.int64)
        stack = np.stack([math.log(c) + m.log_weights(ks) for c, m in self.components])
        return logsumexp(stack, axis=0)

    def mass(self, a, trunc=None):
        parts = [(c, m.mass(a, trunc)) for c, m in self.components]
        return Certified(
            sum(c * r.value for c, r in parts),
            sum(c * r.error_bound for c, r in parts),
        )

    def log_mass(self, a, trunc=None):
        parts = [math.log(c) + m.log_mass(a, trunc) for c, m in self.components]
        return float(logsumexp(parts))


# ------------------------------------------------------------------------------
# Constructors
# ------------------------------------------------------------------------------
def _poisson_upper_tail_bound(mean: float, x: float) -> float:
    """Chernoff bound on P(X >= x) for X ~ Poisson(mean), x > mean."""
    u = x / mean
    return math.exp(-mean * (u * math.log(u) - u + 1.0))


def poisson_measure(mean: float) -> DiscreteMeasure:
    """Poisson distribution; log-space pmf, window ``[0, mean + 12*sqrt(mean) + 50]``.

    The Chernoff certificate for the mass outside the window is attached as
    the measure's tail bound (always below 1e-12 for this window choice).
    """
    if not mean > 0:
        raise ValueError("poisson mean must be positive")
    mean = float(mean)
    hi = int(math.ceil(mean + 12.0 * math.sqrt(mean) + 50.0))
    tail = _poisson_upper_tail_bound(mean, hi + 1)
    log_mean = math.log(mean)

    def logw(ks: np.ndarray) -> np.ndarray:
        out = np.full(ks.shape, NEG_INF)
        ok = ks >= 0
        kk = ks[ok].astype(float)
        out[ok] = -mean + kk * log_mean - gammaln(kk + 1.0)
        return out

    return LogWeightMeasure(
        logw,
        mass_class=MassClass.PROBABILITY,
        support_hint=(0, hi),
        family_tag="poisson",
        tail_bound=tail,
        params={"mean": mean},
    )


def geometric_measure(p: float) -> DiscreteMeasure:
    """Geometric distribution ``(1-p)^k p`` on the naturals, 0 < p <= 1."""
    if not 0 < p <= 1:
        raise ValueError("geometric parameter must lie in (0, 1]")
    if p == 1.0:
        return dirac(0)
    hi = max(1, int(math.ceil(math.log(1e-12) / math.log1p(-p))))
    tail = (1.0 - p) ** (hi + 1)
    log_q, log_p = math.log1p(-p), math.log(p)

    def logw(ks: np.ndarray) -> np.ndarray:
        out = np.full(ks.shape, NEG_INF)
        ok = ks >= 0
        out[ok] = ks[ok] * log_q + log_p
        return out

    return LogWeightMeasure(
        logw,
        mass_class=MassClass.PROBABILITY,
        support_hint=(0, hi),
        family_tag="geometric",
        tail_bound=tail,
        params={"p": p},
    )


def uniform_on(points) -> DiscreteMeasure:
    """Equal mass on a non-empty finite collection of integers."""
    if isinstance(points, range):
        if points.step == 1 and len(points) > 0:
            return UniformRangeMeasure(points.start, points.stop - 1)
        points = list(points)
    if isinstance(points, isets.IndexSet):
        if points.bounds is None:
            raise InfiniteMassError(f"uniform_on needs a finite set, got {points.descriptor}")
        lo, hi = points.bounds
        if points.size() == hi - lo + 1:
            return UniformRangeMeasure(lo, hi)
        return FinitePointsMeasure(points.elements(), assume_unique=True)
    return FinitePointsMeasure(points)


def uniform_range(lo: int, hi: int) -> DiscreteMeasure:
    return UniformRangeMeasure(lo, hi)


def dirac(point: int) -> DiscreteMeasure:
    """Unit mass at a single integer."""
    return FinitePointsMeasure([point])


def flat_improper(domain: Domain | str = Domain.NATURALS) -> DiscreteMeasure:
    """Improper measure with weight 1 everywhere on the chosen domain."""
    if isinstance(domain, str):
        domain = Domain(domain)
    if domain is Domain.NATURALS:
        return FlatMeasure(0)
    if domain is Domain.INTEGERS:
        return FlatMeasure(None)
    raise ValueError("flat measure domain must be naturals or integers")


def set_mass(m: DiscreteMeasure, a: isets.IndexSet, trunc=None) -> Certified:
    """Mass of an index set with a certified tail bound (see ``mass``)."""
    return m.mass(a, trunc)


def set_log_mass(m: DiscreteMeasure, a: isets.IndexSet, trunc=None) -> float:
    return m.log_mass(a, trunc)


def shift_measure(m: DiscreteMeasure, k: int) -> DiscreteMeasure:
    """The measure ``A -> m(A + k)``."""
    if k == 0:
        return m
    if isinstance(m, UniformRangeMeasure):
        return UniformRangeMeasure(m.lo - k, m.hi - k)
    if isinstance(m, FinitePointsMeasure):
        return FinitePointsMeasure(m.points - k, m.point_weights, assume_unique=True)
    if isinstance(m, FlatMeasure):
        return FlatMeasure(None if m.lower is None else m.lower - k)
    if isinstance(m, ShiftedMeasure):
        return shift_measure(m.base, m.k + k)
    return ShiftedMeasure(m, k)


def tv_distance(m1: DiscreteMeasure, m2: DiscreteMeasure, trunc=None) -> Certified:
    """Total variation distance: half the summed absolute weight differences."""
    for m in (m1, m2):
        if m.mass_class is not MassClass.PROBABILITY:
            raise ValueError("tv_distance requires probability-class measures")
    los = [m.support_hint[0] for m in (m1, m2) if m.support_hint]
    his = [m.support_hint[1] for m in (m1, m2) if m.support_hint]
    lo, hi = min(los), max(his)
    if trunc is not None:
        lo, hi = max(lo, trunc[0]), min(hi, trunc[1])
    total = 0.0
    for ks in _iter_chunks(lo, hi):
        total += float(np.abs(np.exp(m1.log_weights(ks)) - np.exp(m2.log_weights(ks))).sum())
    return Certified(0.5 * total, 0.5 * (m1.tail_bound + m2.tail_bound))


def restrict_normalize(m: DiscreteMeasure, a: isets.IndexSet) -> DiscreteMeasure:
    """Probability measure proportional to the restriction of ``m`` to ``a``.

    Requires ``0 < m(a) < infinity``; for infinite-mass measures ``a`` must be
    finite.  Exact-counting families restrict to exact-counting families.
    """
    if isinstance(m, FlatMeasure):
        if a.bounds is None:
            raise InfiniteMassError(
                f"cannot normalize {m.family_tag} on unbounded {a.descriptor}"
            )
        lo = a.bounds[0] if m.lower is None else max(a.bounds[0], m.lower)
        pts = a.elements()
        pts = pts[pts >= lo] if m.lower is not None else pts
        if pts.size == 0:
            raise ZeroMassRestrictionError(f"{a.descriptor} carries no mass under {m.family_tag}")
        if pts.size == pts[-1] - pts[0] + 1:
            return UniformRangeMeasure(int(pts[0]), int(pts[-1]))
        return FinitePointsMeasure(pts, assume_unique=True)
    if isinstance(m, UniformRangeMeasure):
        pts = np.arange(m.lo, m.hi + 1, dtype=np.int64)
        pts = pts[a.indicator(pts)]
        if pts.size == 0:
            raise ZeroMassRestrictionError(f"{a.descriptor} carries no mass under {m.family_tag}")
        return FinitePointsMeasure(pts, assume_unique=True)
    if isinstance(m, FinitePointsMeasure):
        mask = a.indicator(m.points)
        if not mask.any():
            raise ZeroMassRestrictionError(f"{a.descriptor} carries no mass under {m.family_tag}")
        if m.point_weights is None:
            return FinitePointsMeasure(m.points[mask], assume_unique=True)
        w = m.point_weights[mask]
        return FinitePointsMeasure(m.points[mask], w / w.sum(), assume_unique=True)
    log_norm = m.log_mass(a)
    if log_norm == NEG_INF:
        raise ZeroMassRestrictionError(f"{a.descriptor} carries no mass under {m.family_tag}")
    return RestrictedMeasure(m, a, log_norm)


def proportional_on(m1: DiscreteMeasure, m2: DiscreteMeasure, ks) -> float:
    """Max deviation between window-normalized weights (projective comparison).

    Measures that agree up to a positive scalar factor return 0 (up to
    rounding) regardless of their absolute scales.
    """
    ks = np.asarray(ks, dtype=np.int64)
    w1, w2 = np.exp(m1.log_weights(ks)), np.exp(m2.log_weights(ks))
    s1, s2 = w1.sum(), w2.sum()
    if s1 <= 0 or s2 <= 0:
        raise ValueError("window carries no mass under one of the measures")
    return float(np.abs(w1 / s1 - w2 / s2).max())


# ------------------------------------------------------------------------------
# Interval measures on (0, 1)
# ------------------------------------------------------------------------------
class ContinuousMeasure:
    """A measure on the open unit interval given by a density.

    Probability-class instances carry a distribution function accurate to
    about 1e-10; interval masses come from differences of it.  Infinite-mass
    instances answer only interior intervals ``[u, v]`` with ``0 < u <= v < 1``
    and raise on boundary-touching queries.
    """

    def __init__(self, density_fn, cdf_fn, mass_class: MassClass, family_tag: str,
                 params: dict | None = None, cdf_error: float = 1e-10):
        self._density_fn = density_fn
        self._cdf_fn = cdf_fn
        self.mass_class = mass_class
        self.family_tag = family_tag
        self.params = dict(params or {})
        self.cdf_error = cdf_error

    def density(self, x):
        return self._density_fn(np.asarray(x, dtype=float))

    def cdf(self, x: float) -> float:
        if self._cdf_fn is None:
            raise InfiniteMassError(f"{self.family_tag}: no distribution function")
        return self._cdf_fn(float(x))

    def interval_mass(self, u: float, v: float) -> Certified:
        if not u <= v:
            raise ValueError("interval endpoints out of order")
        if self.mass_class is MassClass.INFINITE:
            if u <= 0.0 or v >= 1.0:
                raise InfiniteMassError(
                    f"{self.family_tag}: boundary-touching intervals have infinite mass"
                )
            return self._interior_mass(u, v)
        return Certified(self.cdf(v) - self.cdf(u), 2.0 * self.cdf_error)

    def _interior_mass(self, u: float, v: float) -> Certified:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<ContinuousMeasure {self.family_tag} ({self.mass_class.value})>"


def _beta_cf(a: float, b: float, x: float, max_iter: int = 500, eps: float = 1e-16) -> float:
    """Continued fraction for the incomplete beta (modified Lentz iteration)."""
    fpmin = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction stalled (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) by continued fraction.

    Uses the symmetry split at ``x = (a+1)/(a+b+2)`` so the continued fraction
    always runs on its rapidly converging side; stable down to parameters of
    order 1e-6 and below.
    """
    if not (a > 0 and b > 0):
        raise ValueError("parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        gammaln(a + b) - gammaln(a) - gammaln(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def beta_measure(a: float, b: float) -> ContinuousMeasure:
    """Beta(a, b) on (0, 1), density ``x^(a-1) (1-x)^(b-1) / B(a, b)``."""
    if not (a > 0 and b > 0):
        raise ValueError("beta parameters must be positive")
    a, b = float(a), float(b)
    ln_beta = gammaln(a) + gammaln(b) - gammaln(a + b)

    def density(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.exp((a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x) - ln_beta)
        return out

    return ContinuousMeasure(
        density,
        lambda x: regularized_incomplete_beta(a, b, x),
        MassClass.PROBABILITY,
        family_tag=f"beta({a:g},{b:g})",
        params={"a": a, "b": b},
    )


class _HaldaneMeasure(ContinuousMeasure):
    def __init__(self):
        super().__init__(
            lambda x: 1.0 / (np.asarray(x, dtype=float) * (1.0 - np.asarray(x, dtype=float))),
            None,
            MassClass.INFINITE,
            family_tag="boundary-improper",
        )

    def _interior_mass(self, u, v):
        # antiderivative of 1/(x(1-x)) is log(x/(1-x))
        val = math.log(v / (1.0 - v)) - math.log(u / (1.0 - u))
        return Certified(val, 0.0)


def haldane_measure() -> ContinuousMeasure:
    """Improper density ``1/(x(1-x))`` on (0, 1); boundary masses diverge."""
    return _HaldaneMeasure()


# ------------------------------------------------------------------------------
# Sequences
# ------------------------------------------------------------------------------
class MeasureSequence:
    """A lazily evaluated family ``n -> measure`` of proper distributions.

    ``derivation`` records how a sequence was built from another one (kind,
    base sequence, and the per-index mixing weight), which lets diagnostics
    attach quantitative comparison bounds.  Evaluated measures are cached
    under single-assignment semantics.
    """

    def __init__(self, generator, domain_tag: Domain, family_tag: str,
                 descriptor: str | None = None, derivation: "Derivation | None" = None):
        self._generator = generator
        self.domain_tag = domain_tag
        self.family_tag = family_tag
        self.descriptor = descriptor or family_tag
        self.derivation = derivation
        self._cache: dict[int, object] = {}

    def at(self, n: int):
        got = self._cache.get(n)
        if got is None:
            got = self._generator(n)
            self._cache.setdefault(n, got)
        return got

    def __repr__(self) -> str:
        return f"<MeasureSequence {self.descriptor}>"


class Derivation(NamedTuple):
    kind: str
    base: MeasureSequence
    gamma: Callable[[int], float]
