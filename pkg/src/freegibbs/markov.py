"""Invariant tree-indexed Markov measures on the free-group Cayley tree.

A :class:`MarkovTreeSpec` is a root law plus one transition matrix per
generator.  The measure puts the root law at the identity and propagates
outward along tree edges ``{g, s_i*g}`` with the generator's matrix.  The
construction is shift-invariant exactly when the root law is stationary for
every matrix and the edge pair law is symmetric, which is enforced at
construction; symmetry also makes the propagation direction along an edge
immaterial.

The tree is rooted at the identity for all computations; a word's parent is
the word with its first letter removed, so the spanning set of any window is
its suffix closure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeBudgetError
from .gibbs import (
    Alphabet,
    DEFAULT_BUDGET,
    ProbTable,
    SPIN,
    local_kernel,
)
from .shift import ShiftPotential, WindowTerm, ising_potential, neighbor_boundary
from .words import IDENTITY, FiniteWindow, GroupWord, ball, gen, window

SPEC_TOL = 1e-12


@dataclass(frozen=True)
class MarkovTreeSpec:
    """Alphabet, root law and per-generator transition matrices."""

    alphabet: Alphabet
    root_law: np.ndarray
    transitions: tuple[np.ndarray, ...]

    def __post_init__(self):
        rho = np.asarray(self.root_law, dtype=float)
        if rho.shape != (self.alphabet.size,):
            raise ValueError("root law shape does not match alphabet")
        if abs(rho.sum() - 1.0) > SPEC_TOL or np.any(rho < 0):
            raise ValueError("root law is not a probability vector")
        mats = tuple(np.asarray(P, dtype=float) for P in self.transitions)
        k = self.alphabet.size
        for P in mats:
            if P.shape != (k, k):
                raise ValueError("transition matrix shape mismatch")
            if np.any(P < 0) or np.max(np.abs(P.sum(axis=1) - 1.0)) > SPEC_TOL:
                raise ValueError("transition matrix rows must sum to 1")
            if np.max(np.abs(rho @ P - rho)) > SPEC_TOL:
                raise ValueError("root law is not stationary for a transition")
            pair = rho[:, None] * P
            if np.max(np.abs(pair - pair.T)) > SPEC_TOL:
                raise ValueError(
                    "edge law must be symmetric (rho(a)P(a,b) = rho(b)P(b,a))"
                )
        rho = rho.copy()
        rho.flags.writeable = False
        mats = tuple(_frozen(P) for P in mats)
        object.__setattr__(self, "root_law", rho)
        object.__setattr__(self, "transitions", mats)

    @property
    def rank(self) -> int:
        return len(self.transitions)

    def pair_law(self, i: int) -> np.ndarray:
        """Joint law of the two endpoints of an ``s_{i+1}``-labelled edge."""
        return self.root_law[:, None] * self.transitions[i]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    a.flags.writeable = False
    return a


def ising_spec(beta: float, m: int) -> MarkovTreeSpec:
    """Uniform root law and the two-state matrix with stay weight e^{2 beta}."""
    if m < 1:
        raise ValueError("rank must be >= 1")
    stay = np.exp(2.0 * beta) / (1.0 + np.exp(2.0 * beta))
    P = np.array([[stay, 1.0 - stay], [1.0 - stay, stay]])
    return MarkovTreeSpec(SPIN, np.array([0.5, 0.5]), (P,) * m)


def bernoulli_spec(law, m: int, alphabet: Alphabet | None = None) -> MarkovTreeSpec:
    """Product measure: every transition row equals the site law."""
    law = np.asarray(law, dtype=float)
    if alphabet is None:
        alphabet = Alphabet(tuple(range(law.size)))
    P = np.tile(law, (law.size, 1))
    return MarkovTreeSpec(alphabet, law, (P,) * m)


def parent(w: GroupWord) -> GroupWord:
    """Drop the first letter; the edge to the parent carries that generator."""
    return GroupWord(w.letters[1:])


def span(W: FiniteWindow) -> tuple[GroupWord, ...]:
    """Suffix closure of W together with the identity, in canonical order.

    This is the vertex set of the union of tree paths from the window to the
    root, so parents always precede children in the returned order.
    """
    out = {IDENTITY}
    for w in W:
        letters = w.letters
        for j in range(len(letters)):
            out.add(GroupWord(letters[j:]))
    return tuple(sorted(out))


def marginal(
    spec: MarkovTreeSpec, W: FiniteWindow, budget: int = DEFAULT_BUDGET
) -> ProbTable:
    """Exact joint law on W: build the spanning-tree joint, sum out the rest."""
    sp = span(W)
    k = spec.alphabet.size
    count = k ** len(sp)
    if count > budget:
        raise SizeBudgetError(count, budget, "spanning-tree configurations")
    pos = {w: i for i, w in enumerate(sp)}
    n = len(sp)
    arr = np.ones((k,) * n)
    arr = arr * spec.root_law.reshape((k,) + (1,) * (n - 1))
    for w in sp:
        if w is IDENTITY or w == IDENTITY:
            continue
        i = abs(w.letters[0]) - 1
        P = spec.transitions[i]
        pi, ci = pos[parent(w)], pos[w]
        shape = [1] * n
        shape[pi] = k
        shape[ci] = k
        # reversibility makes the downward kernel P_i in both directions
        arr = arr * P.reshape(shape)
    keep = [pos[w] for w in W]
    drop = tuple(i for i in range(n) if i not in set(keep))
    if drop:
        arr = arr.sum(axis=drop)
    dom = tuple(w for w in sp if w in W)
    return ProbTable(dom, arr, normalized=False)


def window_entropy(
    spec: MarkovTreeSpec, W: FiniteWindow, budget: int = DEFAULT_BUDGET
) -> float:
    """Shannon entropy of :func:`marginal` (natural log)."""
    arr = marginal(spec, W, budget).array
    p = arr[arr > 0]
    return float(-(p * np.log(p)).sum())


def to_potential(spec: MarkovTreeSpec) -> ShiftPotential:
    """Nearest-neighbor potential whose Gibbs measure is the spec's law.

    Edge energy is minus the log pair law; each site carries
    ``(2m-1) log rho`` to cancel the root-law overcounting.  Requires strictly
    positive entries.
    """
    if np.any(spec.root_law <= 0):
        raise ValueError("root law must be strictly positive")
    m = spec.rank
    terms = []
    for i in range(m):
        pair = spec.pair_law(i)
        if np.any(pair <= 0):
            raise ValueError("pair law must be strictly positive")
        terms.append(WindowTerm(window(IDENTITY, gen(i + 1)), -np.log(pair)))
    site = (2 * m - 1) * np.log(spec.root_law)
    terms.append(WindowTerm(window(IDENTITY), site))
    return ShiftPotential(m, spec.alphabet, tuple(terms))


def gibbs_consistency(
    spec: MarkovTreeSpec,
    potential: ShiftPotential,
    tol: float = 1e-10,
    budget: int = DEFAULT_BUDGET,
) -> bool:
    """Check the spec's conditional at the root against the potential's kernel.

    Compares, for every configuration of the root's neighbors, the root
    conditional of the ball-1 marginal with the potential's single-site
    kernel; true iff every pair of tables matches within tol (TV).
    """
    if potential.alphabet.size != spec.alphabet.size:
        raise ValueError("alphabet sizes differ")
    m = spec.rank
    B = ball(m, 1)
    joint = marginal(spec, B, budget)
    neighbors = tuple(w for w in B if w != IDENTITY)
    patch = potential.patch(window(IDENTITY))
    k = spec.alphabet.size
    for cfg in np.ndindex(*(k,) * len(neighbors)):
        assignment = dict(zip(neighbors, (int(c) for c in cfg)))
        cond = joint.condition(assignment)
        kern = local_kernel(patch, (IDENTITY,), assignment)
        if cond.tv_distance(kern) > tol:
            return False
    return True


def sample_window(
    spec: MarkovTreeSpec, W: FiniteWindow, rng: np.random.Generator
) -> dict:
    """One exact sample of the window coordinates (spanning-only sites dropped)."""
    sp = span(W)
    draws = sample_span(spec, sp, 1, rng)[0]
    pos = {w: i for i, w in enumerate(sp)}
    return {w: int(draws[pos[w]]) for w in W}


def sample_span(
    spec: MarkovTreeSpec,
    sp: tuple[GroupWord, ...],
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorized forward sampling: array of shape (count, len(sp))."""
    pos = {w: i for i, w in enumerate(sp)}
    k = spec.alphabet.size
    out = np.empty((count, len(sp)), dtype=np.int64)
    rho_cum = np.cumsum(spec.root_law)
    out[:, 0] = np.searchsorted(rho_cum, rng.random(count) * rho_cum[-1], side="right")
    cums = [np.cumsum(P, axis=1) for P in spec.transitions]
    for w in sp:
        if w == IDENTITY:
            continue
        i = abs(w.letters[0]) - 1
        pvals = cums[i][out[:, pos[parent(w)]]]
        u = rng.random(count) * pvals[:, -1]
        out[:, pos[w]] = (u[:, None] >= pvals[:, :-1]).sum(axis=1)
    np.clip(out, 0, k - 1, out=out)
    return out


def tree_boundary(W: FiniteWindow, m: int) -> FiniteWindow:
    """Boundary of W under the nearest-neighbor tree interactions."""
    return neighbor_boundary(W, m)
