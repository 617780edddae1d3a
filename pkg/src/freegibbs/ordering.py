"""Partial orders, stochastic dominance, attractiveness, Dobrushin
coefficients and boundary-condition tree recursions.

Dominance between distributions sharing a finite domain is decided exactly:
a monotone coupling exists iff a bipartite flow of value one is feasible with
arcs only between comparable points, so the check is a max-flow computation
with a small tolerance on the achieved value.

Total variation here always means the distance ``sup_B |mu(B) - nu(B)|``,
i.e. half the l1 difference of the tables; the Dobrushin condition is
``max_v sum_u b_{v,u} < 1`` in these units.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import NotAttractiveError, SizeBudgetError
from .gibbs import (
    Alphabet,
    DEFAULT_BUDGET,
    GibbsStructure,
    ProbTable,
    local_kernel,
)
from .shift import ShiftPotential
from .words import IDENTITY, window

FLOW_TOL = 1e-12


@dataclass(frozen=True)
class SiteOrder:
    """A partial order on an alphabet, as a boolean relation matrix.

    ``relation[a, b]`` means ``a`` is below or equal to ``b``.  Reflexivity,
    antisymmetry and transitivity are verified on construction; the unique
    maximal/minimal elements (when they exist) are exposed for boundary
    recursions.
    """

    alphabet: Alphabet
    relation: np.ndarray

    def __post_init__(self):
        k = self.alphabet.size
        rel = np.asarray(self.relation, dtype=bool)
        if rel.shape != (k, k):
            raise ValueError("relation shape does not match alphabet")
        if not np.all(np.diag(rel)):
            raise ValueError("order must be reflexive")
        if np.any(rel & rel.T & ~np.eye(k, dtype=bool)):
            raise ValueError("order must be antisymmetric")
        closure = rel @ rel
        if np.any(closure & ~rel):
            raise ValueError("order must be transitive")
        rel = rel.copy()
        rel.flags.writeable = False
        object.__setattr__(self, "relation", rel)

    @classmethod
    def chain(cls, alphabet: Alphabet) -> "SiteOrder":
        """Total order following the alphabet's symbol order."""
        k = alphabet.size
        rel = np.triu(np.ones((k, k), dtype=bool))
        return cls(alphabet, rel)

    def leq(self, a: int, b: int) -> bool:
        return bool(self.relation[a, b])

    @property
    def maximum(self) -> int | None:
        tops = np.flatnonzero(self.relation.all(axis=0))
        return int(tops[0]) if len(tops) == 1 else None

    @property
    def minimum(self) -> int | None:
        bottoms = np.flatnonzero(self.relation.all(axis=1))
        return int(bottoms[0]) if len(bottoms) == 1 else None

    @property
    def is_total(self) -> bool:
        return bool(np.all(self.relation | self.relation.T))


SPIN_ORDER = SiteOrder.chain(Alphabet((-1, 1)))


def _site_orders(orders, domain) -> list[SiteOrder]:
    if isinstance(orders, SiteOrder):
        return [orders] * len(domain)
    return [orders[v] for v in domain]


def dominates(orders, lower: ProbTable, upper: ProbTable, tol: float = FLOW_TOL) -> bool:
    """True iff ``upper`` stochastically dominates ``lower``.

    ``orders`` is a single :class:`SiteOrder` (applied to every site) or a
    mapping vertex -> order; the product order compares configurations
    coordinatewise.  Existence of a coupling supported on the order is decided
    by max-flow feasibility.
    """
    if lower.domain != upper.domain:
        raise ValueError("tables must share a domain")
    site = _site_orders(orders, lower.domain)
    p = lower.array.ravel()
    q = upper.array.ravel()
    shape = lower.shape
    configs = list(np.ndindex(*shape)) if shape else [()]
    g = nx.DiGraph()
    g.add_node("s")
    g.add_node("t")
    for i, c in enumerate(configs):
        if p[i] > 0:
            g.add_edge("s", ("a", i), capacity=float(p[i]))
        if q[i] > 0:
            g.add_edge(("b", i), "t", capacity=float(q[i]))
    for i, ci in enumerate(configs):
        if p[i] <= 0:
            continue
        for j, cj in enumerate(configs):
            if q[j] <= 0:
                continue
            if all(site[k].leq(ci[k], cj[k]) for k in range(len(ci))):
                g.add_edge(("a", i), ("b", j), capacity=2.0)
    value, _ = nx.maximum_flow(g, "s", "t")
    return value >= 1.0 - tol


def is_attractive(
    structure: GibbsStructure,
    orders,
    budget: int = DEFAULT_BUDGET,
):
    """Monotonicity of every single-site kernel in its boundary condition.

    Returns ``(True, None)`` or ``(False, (vertex, low_config, high_config))``
    with a witnessing comparable pair of boundary configurations whose kernels
    fail dominance.
    """
    for v in structure.vertices:
        bnd = structure.boundary((v,))
        count = 1
        for u in bnd:
            count *= structure.size(u)
        if count * count > budget:
            raise SizeBudgetError(count * count, budget, "boundary pairs")
        vord = orders if isinstance(orders, SiteOrder) else orders[v]
        bord = _site_orders(orders, bnd)
        shape = tuple(structure.size(u) for u in bnd)
        kernels = {}
        for cfg in np.ndindex(*shape) if bnd else [()]:
            kernels[cfg] = local_kernel(structure, (v,), dict(zip(bnd, cfg)))
        for c1, c2 in itertools.product(kernels, repeat=2):
            if c1 == c2:
                continue
            if all(bord[k].leq(c1[k], c2[k]) for k in range(len(bnd))):
                if not dominates(vord, kernels[c1], kernels[c2]):
                    return False, (v, dict(zip(bnd, c1)), dict(zip(bnd, c2)))
    return True, None


@dataclass(frozen=True)
class DobrushinReport:
    """Single-site sensitivity coefficients in total-variation units.

    ``matrix[i, j]`` is the worst-case TV change of the kernel at
    ``row_vertices[i]`` when the boundary spin at ``col_vertices[j]`` flips;
    entries for vertices outside the row's boundary are zero.
    """

    row_vertices: tuple
    col_vertices: tuple
    matrix: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def max_row_sum(self) -> float:
        return float(self.row_sums.max())

    @property
    def satisfied(self) -> bool:
        """The uniqueness-implying condition: max row sum below one."""
        return self.max_row_sum < 1.0


def _row_coefficients(
    structure: GibbsStructure, v, budget: int
) -> dict:
    bnd = structure.boundary((v,))
    shape = tuple(structure.size(u) for u in bnd)
    count = 1
    for s in shape:
        count *= s
    pairs = sum(s * (s - 1) // 2 for s in shape) * max(count, 1)
    if pairs > budget:
        raise SizeBudgetError(pairs, budget, "boundary configuration pairs")
    kernels = {}
    for cfg in np.ndindex(*shape) if bnd else [()]:
        kernels[cfg] = local_kernel(structure, (v,), dict(zip(bnd, cfg))).array
    out = {}
    for j, u in enumerate(bnd):
        worst = 0.0
        for cfg in kernels:
            for b in range(cfg[j] + 1, shape[j]):
                other = cfg[:j] + (b,) + cfg[j + 1 :]
                tv = 0.5 * float(np.abs(kernels[cfg] - kernels[other]).sum())
                worst = max(worst, tv)
        out[u] = worst
    return out


def dobrushin(structure: GibbsStructure, budget: int = DEFAULT_BUDGET) -> DobrushinReport:
    """Exact interdependence coefficients of a finite structure."""
    V = structure.vertices
    mat = np.zeros((len(V), len(V)))
    for i, v in enumerate(V):
        row = _row_coefficients(structure, v, budget)
        for j, u in enumerate(V):
            if u in row:
                mat[i, j] = row[u]
    return DobrushinReport(V, V, mat)


def dobrushin_shift(
    potential: ShiftPotential, budget: int = DEFAULT_BUDGET
) -> DobrushinReport:
    """Coefficients of the shift structure, computed at the identity.

    Shift invariance makes every row equal, so the maximal row sum is the row
    sum at the identity; columns are the identity's boundary words.
    """
    core = window(IDENTITY)
    patch = potential.patch(core)
    row = _row_coefficients(patch, IDENTITY, budget)
    cols = tuple(sorted(row))
    mat = np.array([[row[u] for u in cols]])
    return DobrushinReport((IDENTITY,), cols, mat)


# --- boundary recursions on the regular tree ------------------------------


def _edge_weights(potential: ShiftPotential):
    """exp(-energy) weights per directed edge label, plus the site weight.

    Label ``+i`` points from a vertex to its child ``s_{i+1} *`` it; the
    returned weight array is indexed ``[parent_symbol, child_symbol]``.
    """
    edge, site = potential.nearest_neighbor_tables()
    weights = {}
    for i, tab in enumerate(edge):
        weights[i + 1] = np.exp(-tab)
        weights[-(i + 1)] = np.exp(-tab.T)
    return weights, np.exp(-site)


def _root_marginals(potential: ShiftPotential, pin: int):
    """Yield the pinned-sphere root marginal for depth 1, 2, ...

    The message entering a vertex at distance d from the pinned sphere obeys
    one recursion step per unit of depth, so consecutive depths differ by a
    single update of the per-label messages.
    """
    weights, site = _edge_weights(potential)
    m = potential.rank
    labels = [i for i in range(1, m + 1)] + [-i for i in range(1, m + 1)]
    msg = {t: weights[t][:, pin].copy() for t in labels}
    for t in labels:
        msg[t] /= msg[t].sum()
    while True:
        root = site.copy()
        for t in labels:
            root = root * msg[t]
        yield ProbTable((IDENTITY,), root / root.sum())
        new = {}
        for t in labels:
            belief = site.copy()
            for t2 in labels:
                if t2 == -t:
                    continue
                belief = belief * msg[t2]
            vec = weights[t] @ belief
            new[t] = vec / vec.sum()
        msg = new


def _pin_symbol(orders, boundary: str) -> int:
    order = orders if isinstance(orders, SiteOrder) else orders[IDENTITY]
    pin = order.maximum if boundary == "max" else order.minimum
    if pin is None:
        raise ValueError("site order lacks a unique extreme element")
    return pin


def tree_boundary_recursion(
    potential: ShiftPotential,
    orders,
    depth: int,
    boundary: str = "max",
) -> ProbTable:
    """Root marginal of the ball Gibbs measure with a pinned sphere.

    The free region is the ball of radius ``depth - 1``; every vertex at
    distance ``depth`` is pinned to the order's unique maximal (``"max"``) or
    minimal (``"min"``) symbol.  Exact leaf-to-root message passing; only
    nearest-neighbor potentials are supported.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if boundary not in ("max", "min"):
        raise ValueError("boundary must be 'max' or 'min'")
    pin = _pin_symbol(orders, boundary)
    gen = _root_marginals(potential, pin)
    for _ in range(depth - 1):
        next(gen)
    return next(gen)


@dataclass(frozen=True)
class UniquenessResult:
    verdict: str  # "unique" | "non_unique" | "undecided"
    gap: float
    depth: int


def uniqueness_verdict(
    potential: ShiftPotential,
    orders,
    tol: float = 1e-6,
    r_max: int = 200,
) -> UniquenessResult:
    """Decide uniqueness for an attractive structure by the max/min sandwich.

    ``unique`` when the extreme root marginals meet within ``tol`` before
    ``r_max``; ``non_unique`` when, at the deepest radius, the gap has
    stabilized (successive change below ``tol``) above ``10 * tol``;
    ``undecided`` otherwise.  Stabilization is judged at ``r_max`` rather than
    at its first occurrence: a slowly contracting subcritical gap passes
    through a band where single steps move less than ``tol`` while it is still
    draining to zero, and stopping there would misclassify it.  Raises
    :class:`NotAttractiveError` when the single-site kernel is not monotone,
    since the sandwich argument is invalid there.
    """
    patch = potential.patch(window(IDENTITY))
    ok, witness = is_attractive(
        patch,
        orders if isinstance(orders, SiteOrder) else orders,
    )
    if not ok:
        raise NotAttractiveError(f"single-site kernel not monotone: {witness}")
    tops = _root_marginals(potential, _pin_symbol(orders, "max"))
    bots = _root_marginals(potential, _pin_symbol(orders, "min"))
    prev_gap = None
    gap = float("nan")
    for depth in range(1, r_max + 1):
        gap = next(tops).tv_distance(next(bots))
        if gap <= tol:
            return UniquenessResult("unique", gap, depth)
        if depth == r_max and prev_gap is not None:
            if abs(prev_gap - gap) <= tol and gap >= 10 * tol:
                return UniquenessResult("non_unique", gap, depth)
        prev_gap = gap
    return UniquenessResult("undecided", gap, r_max)
