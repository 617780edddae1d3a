"""Finite Gibbs structures, local kernels, pinning and exact distributions.

A :class:`GibbsStructure` is a finite vertex set with one finite alphabet per
vertex and a finite list of local energy terms.  Energies are in nats of
negative log-weight: a configuration ``x`` has weight ``exp(-U(x))`` with
``U(x)`` the sum of all term tables.

Configurations are plain dicts mapping a vertex to a symbol *index* into that
vertex's alphabet.  Probability tables (:class:`ProbTable`) hold exact
distributions over products of alphabets, with the domain in canonical
(sorted) vertex order and row-major mixed-radix layout.

All weights are handled in log space with log-sum-exp normalization, so
energy magnitudes up to about 700 per configuration are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateWeightError, SizeBudgetError

DEFAULT_BUDGET = 2**24
NORMALIZATION_TOL = 1e-12

Vertex = Hashable
Configuration = Mapping[Vertex, int]


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite symbol set; symbols must be distinct."""

    symbols: tuple

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise ValueError("alphabet must have at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        return self.symbols.index(symbol)


SPIN = Alphabet((-1, 1))


class EnergyTerm:
    """A local energy: support vertices (sorted) plus a table over their alphabets.

    The table axis order follows the sorted support.  Tables are made
    read-only on construction so terms can be shared freely.
    """

    __slots__ = ("support", "table")

    def __init__(self, support: Sequence[Vertex], table: np.ndarray):
        sup = tuple(sorted(support))
        if len(set(sup)) != len(sup):
            raise ValueError("term support contains repeated vertices")
        arr = np.asarray(table, dtype=float)
        if arr.ndim != len(sup):
            raise ValueError(
                f"table has {arr.ndim} axes for a support of {len(sup)} vertices"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("energy table entries must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        self.support = sup
        self.table = arr

    @property
    def arity(self) -> int:
        return len(self.support)

    def value(self, config: Configuration) -> float:
        return float(self.table[tuple(config[v] for v in self.support)])

    def shifted(self, c: float) -> "EnergyTerm":
        return EnergyTerm(self.support, self.table + c)

    def __repr__(self) -> str:
        return f"EnergyTerm(support={self.support})"


class GibbsStructure:
    """Finite vertex set, per-vertex alphabets, local energy terms."""

    def __init__(
        self,
        alphabets: Mapping[Vertex, Alphabet],
        terms: Iterable[EnergyTerm] = (),
    ):
        self.vertices: tuple = tuple(sorted(alphabets.keys()))
        self.alphabets: dict = dict(alphabets)
        self.terms: tuple = tuple(terms)
        vset = set(self.vertices)
        for t in self.terms:
            missing = [v for v in t.support if v not in vset]
            if missing:
                raise ValueError(f"term support {t.support} not within vertex set")
            shape = tuple(self.alphabets[v].size for v in t.support)
            if t.table.shape != shape:
                raise ValueError(
                    f"term on {t.support}: table shape {t.table.shape} != {shape}"
                )

    def size(self, v: Vertex) -> int:
        return self.alphabets[v].size

    def shape(self, region: Sequence[Vertex]) -> tuple[int, ...]:
        return tuple(self.alphabets[v].size for v in region)

    def config_count(self) -> int:
        n = 1
        for v in self.vertices:
            n *= self.alphabets[v].size
        return n

    def terms_meeting(self, region: Iterable[Vertex]) -> list[EnergyTerm]:
        rset = set(region)
        return [t for t in self.terms if rset.intersection(t.support)]

    def boundary(self, region: Iterable[Vertex]) -> tuple:
        """Vertices outside the region touched by a term meeting it."""
        rset = set(region)
        out: set = set()
        for t in self.terms_meeting(rset):
            out.update(v for v in t.support if v not in rset)
        return tuple(sorted(out))

    def pin(self, region: Iterable[Vertex], config: Configuration) -> "GibbsStructure":
        """Restrict the alphabets on ``region`` to the single symbol of ``config``.

        Term tables are sliced to the restricted alphabets (the energy values
        on the surviving configurations are unchanged), so the pinned sites
        keep length-1 axes and symbol index 0.
        """
        rset = set(region)
        alphabets = dict(self.alphabets)
        for v in rset:
            a = self.alphabets[v]
            alphabets[v] = Alphabet((a.symbols[config[v]],))
        new_terms = []
        for t in self.terms:
            if not rset.intersection(t.support):
                new_terms.append(t)
                continue
            table = t.table
            for ax, v in enumerate(t.support):
                if v in rset:
                    table = np.take(table, [config[v]], axis=ax)
            new_terms.append(EnergyTerm(t.support, table))
        return GibbsStructure(alphabets, new_terms)

    def __repr__(self) -> str:
        return (
            f"GibbsStructure(|V|={len(self.vertices)}, "
            f"|terms|={len(self.terms)})"
        )


def product_structure(n: int, alphabet: Alphabet = SPIN) -> GibbsStructure:
    """Structure on vertices 0..n-1 with no energy terms."""
    return GibbsStructure({v: alphabet for v in range(n)})


class ProbTable:
    """Exact distribution over a product of finite alphabets.

    ``domain`` is in canonical (sorted) vertex order and the array axes follow
    it; flattening in C order gives the row-major mixed-radix layout.
    """

    __slots__ = ("domain", "array")

    def __init__(self, domain: Sequence[Vertex], array: np.ndarray, *, normalized=True):
        dom = tuple(domain)
        if list(dom) != sorted(dom):
            order = sorted(range(len(dom)), key=lambda i: dom[i])
            array = np.transpose(array, order)
            dom = tuple(sorted(dom))
        arr = np.asarray(array, dtype=float)
        if arr.ndim != len(dom):
            raise ValueError("array rank does not match domain size")
        if normalized:
            total = float(arr.sum())
            if not math.isfinite(total) or abs(total - 1.0) > NORMALIZATION_TOL:
                raise ValueError(f"table sums to {total!r}, not 1")
        if np.any(arr < -NORMALIZATION_TOL):
            raise ValueError("negative probability entry")
        arr = arr.copy()
        arr.flags.writeable = False
        self.domain = dom
        self.array = arr

    @property
    def shape(self) -> tuple[int, ...]:
        return self.array.shape

    def axis(self, v: Vertex) -> int:
        return self.domain.index(v)

    def marginal(self, sub: Sequence[Vertex]) -> "ProbTable":
        """Sum out every vertex not in ``sub`` (sums are preserved exactly)."""
        keep = set(sub)
        missing = keep.difference(self.domain)
        if missing:
            raise ValueError(f"vertices {missing} not in table domain")
        drop = tuple(i for i, v in enumerate(self.domain) if v not in keep)
        arr = self.array.sum(axis=drop) if drop else self.array
        dom = tuple(v for v in self.domain if v in keep)
        return ProbTable(dom, arr, normalized=False)

    def condition(self, assignment: Configuration) -> "ProbTable":
        """Conditional distribution given exact values on part of the domain."""
        idx = []
        dom = []
        for v in self.domain:
            if v in assignment:
                idx.append(assignment[v])
            else:
                idx.append(slice(None))
                dom.append(v)
        arr = self.array[tuple(idx)]
        total = arr.sum()
        if total <= 0:
            raise ZeroDivisionError("conditioning event has probability zero")
        return ProbTable(dom, arr / total, normalized=False)

    def tv_distance(self, other: "ProbTable") -> float:
        """Total variation distance, i.e. half the l1 difference."""
        if self.domain != other.domain:
            raise ValueError("domains differ")
        return 0.5 * float(np.abs(self.array - other.array).sum())

    def prob(self, config: Configuration) -> float:
        return float(self.array[tuple(config[v] for v in self.domain)])

    def allclose(self, other: "ProbTable", tol: float = 1e-12) -> bool:
        return self.domain == other.domain and bool(
            np.all(np.abs(self.array - other.array) <= tol)
        )

    def __repr__(self) -> str:
        return f"ProbTable(domain={self.domain})"


def point_mass(domain_alphabets: Mapping[Vertex, Alphabet], config: Configuration) -> ProbTable:
    dom = tuple(sorted(domain_alphabets))
    shape = tuple(domain_alphabets[v].size for v in dom)
    arr = np.zeros(shape)
    arr[tuple(config[v] for v in dom)] = 1.0
    return ProbTable(dom, arr)


def uniform_table(domain_alphabets: Mapping[Vertex, Alphabet]) -> ProbTable:
    dom = tuple(sorted(domain_alphabets))
    shape = tuple(domain_alphabets[v].size for v in dom)
    n = int(np.prod(shape))
    return ProbTable(dom, np.full(shape, 1.0 / n))


def energy(structure: GibbsStructure, config: Configuration) -> float:
    """Total energy: the sum of every term table at the configuration."""
    return sum(t.value(config) for t in structure.terms)


def _broadcast_term(
    term_axes_in_region: list[int | None],
    table: np.ndarray,
    region: tuple,
    config: Configuration,
    support: tuple,
) -> np.ndarray:
    """Slice off-region axes at the frozen configuration and place the rest
    on their region axes, ready for broadcast addition."""
    idx = []
    kept_axes = []
    for ax, v in enumerate(support):
        pos = term_axes_in_region[ax]
        if pos is None:
            idx.append(config[v])
        else:
            idx.append(slice(None))
            kept_axes.append(pos)
    sub = table[tuple(idx)]
    # sub axes follow the support order of the kept vertices; region axes are
    # sorted, and sorted support preserves relative order, so kept_axes is
    # increasing and sub can be expanded directly.
    shape = [1] * len(region)
    for k, pos in enumerate(kept_axes):
        shape[pos] = sub.shape[k]
    return sub.reshape(shape)


def _region_energy(
    structure: GibbsStructure, region: tuple, config: Configuration
) -> np.ndarray:
    """Energy array over the region configurations, off-region frozen to config."""
    E = np.zeros(structure.shape(region))
    rpos = {v: i for i, v in enumerate(region)}
    for t in structure.terms_meeting(region):
        positions = [rpos.get(v) for v in t.support]
        E = E + _broadcast_term(positions, t.table, region, config, t.support)
    return E


def local_kernel(
    structure: GibbsStructure,
    region: Iterable[Vertex],
    config: Configuration,
    budget: int = DEFAULT_BUDGET,
) -> ProbTable:
    """Local conditional distribution on ``region`` given ``config`` outside.

    Weights are proportional to ``exp(-sum of terms meeting the region)`` with
    off-region coordinates frozen; the result depends on ``config`` only
    through the region's boundary.
    """
    reg = tuple(sorted(set(region)))
    count = 1
    for v in reg:
        count *= structure.size(v)
    if count > budget:
        raise SizeBudgetError(count, budget)
    if not reg:
        return ProbTable((), np.asarray(1.0))
    E = _region_energy(structure, reg, config)
    if not np.all(np.isfinite(E)):
        raise DegenerateWeightError("non-finite energies in local kernel")
    logZ = logsumexp(-E)
    if not np.isfinite(logZ):
        raise DegenerateWeightError(
            "all kernel weights underflowed; rescale the energy tables"
        )
    return ProbTable(reg, np.exp(-E - logZ))


def exact_gibbs(structure: GibbsStructure, budget: int = DEFAULT_BUDGET) -> ProbTable:
    """The unique Gibbs distribution of a finite structure, by enumeration."""
    count = structure.config_count()
    if count > budget:
        raise SizeBudgetError(count, budget)
    V = structure.vertices
    E = np.zeros(structure.shape(V))
    rpos = {v: i for i, v in enumerate(V)}
    for t in structure.terms:
        positions = [rpos[v] for v in t.support]
        E = E + _broadcast_term(positions, t.table, V, {}, t.support)
    logZ = logsumexp(-E)
    if not np.isfinite(logZ):
        raise DegenerateWeightError("partition function underflowed")
    return ProbTable(V, np.exp(-E - logZ))


def log_partition(structure: GibbsStructure, budget: int = DEFAULT_BUDGET) -> float:
    """log Z by the same enumeration as :func:`exact_gibbs`."""
    count = structure.config_count()
    if count > budget:
        raise SizeBudgetError(count, budget)
    V = structure.vertices
    E = np.zeros(structure.shape(V))
    rpos = {v: i for i, v in enumerate(V)}
    for t in structure.terms:
        positions = [rpos[v] for v in t.support]
        E = E + _broadcast_term(positions, t.table, V, {}, t.support)
    return float(logsumexp(-E))


def apply_kernel(
    structure: GibbsStructure,
    region: Iterable[Vertex],
    table: ProbTable,
    budget: int = DEFAULT_BUDGET,
) -> ProbTable:
    """Resample the region from its local kernel under the mixture ``table``.

    The table domain must contain the region and its boundary.  Off-region
    coordinates keep their joint law; the region is replaced by the kernel
    given those coordinates.
    """
    reg = tuple(sorted(set(region)))
    W = table.domain
    wset = set(W)
    if not set(reg).issubset(wset):
        raise ValueError("table domain does not contain the region")
    bnd = structure.boundary(reg)
    if not set(bnd).issubset(wset):
        raise ValueError("table domain does not contain the region boundary")
    if not reg:
        return table
    rest = tuple(v for v in W if v not in set(reg))
    rest_t = table.marginal(rest)
    out = np.zeros(tuple(structure.size(v) for v in rest) + structure.shape(reg))
    bnd_pos = [rest.index(v) for v in bnd]
    kernel_cache: dict[tuple, np.ndarray] = {}
    for ridx in np.ndindex(*rest_t.shape) if rest else [()]:
        p = rest_t.array[ridx] if rest else 1.0
        if p == 0.0:
            continue
        key = tuple(ridx[i] for i in bnd_pos)
        k = kernel_cache.get(key)
        if k is None:
            cfg = dict(zip(rest, ridx))
            k = local_kernel(structure, reg, cfg, budget).array
            kernel_cache[key] = k
        out[ridx] = p * k
    full = rest + reg
    result = ProbTable(full, out, normalized=False)
    # ProbTable sorts the domain into canonical order itself.
    return result


def is_admissible(
    structure: GibbsStructure,
    region: Iterable[Vertex],
    table: ProbTable,
    tol: float = 1e-10,
) -> bool:
    """True iff the table is a fixed point of the region's kernel within tol (TV)."""
    return table.tv_distance(apply_kernel(structure, region, table)) <= tol


def glauber_step(
    structure: GibbsStructure,
    v: Vertex,
    config: Configuration,
    rng: np.random.Generator,
) -> dict:
    """Resample the single coordinate ``v`` from its local kernel."""
    k = local_kernel(structure, (v,), config)
    u = rng.random()
    c = np.cumsum(k.array)
    new = dict(config)
    new[v] = int(np.searchsorted(c, u * c[-1], side="right").clip(0, len(c) - 1))
    return new


def glauber_sweep(
    structure: GibbsStructure,
    config: Configuration,
    rng: np.random.Generator,
) -> dict:
    """One systematic sweep of single-site resampling over all vertices."""
    cfg = dict(config)
    for v in structure.vertices:
        if structure.size(v) == 1:
            continue
        k = local_kernel(structure, (v,), cfg)
        u = rng.random()
        c = np.cumsum(k.array)
        cfg[v] = int(np.searchsorted(c, u * c[-1], side="right").clip(0, len(c) - 1))
    return cfg


def random_configuration(
    structure: GibbsStructure, rng: np.random.Generator
) -> dict:
    return {
        v: int(rng.integers(structure.size(v))) for v in structure.vertices
    }
