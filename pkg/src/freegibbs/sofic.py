"""Random permutation models of the free group and induced finite structures.

A :class:`SoficMap` assigns one permutation of ``{0..n-1}`` to each generator;
a reduced word acts by composing generator permutations (rightmost letter
first), so inverses and free cancellation are exact by construction and the
word action is a genuine permutation action.  Independent uniform generator
permutations realize a sofic approximation of the free group: the defect is
concentrated in short cycles, and the fraction of window-good vertices tends
to one as n grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gibbs import Alphabet, EnergyTerm, GibbsStructure, ProbTable
from .shift import ShiftPotential, _translate_table
from .words import FiniteWindow, GroupWord, multiply


@dataclass(frozen=True)
class SoficMap:
    """Vertex count plus one permutation array per generator."""

    n: int
    perms: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("vertex count must be >= 1")
        arrs = []
        for p in self.perms:
            a = np.asarray(p, dtype=np.int64)
            if a.shape != (self.n,) or not np.array_equal(
                np.sort(a), np.arange(self.n)
            ):
                raise ValueError("each generator map must be a permutation")
            a = a.copy()
            a.flags.writeable = False
            arrs.append(a)
        object.__setattr__(self, "perms", tuple(arrs))
        inv = []
        for a in arrs:
            b = np.empty(self.n, dtype=np.int64)
            b[a] = np.arange(self.n)
            b.flags.writeable = False
            inv.append(b)
        object.__setattr__(self, "_inverses", tuple(inv))

    @property
    def rank(self) -> int:
        return len(self.perms)

    def vertices(self) -> np.ndarray:
        return np.arange(self.n)


def random_sofic(m: int, n: int, seed) -> SoficMap:
    """m independent uniform permutations from the seeded generator."""
    rng = np.random.default_rng(seed)
    return SoficMap(n, tuple(rng.permutation(n) for _ in range(m)))


def act(sigma: SoficMap, g: GroupWord, v: int) -> int:
    """Apply the word action to a single vertex (left factor applied last)."""
    out = v
    for x in reversed(g.letters):
        if x > 0:
            out = int(sigma.perms[x - 1][out])
        else:
            out = int(sigma._inverses[-x - 1][out])
    return out


def act_all(sigma: SoficMap, g: GroupWord) -> np.ndarray:
    """The permutation of the whole vertex set realizing the word."""
    out = np.arange(sigma.n)
    for x in reversed(g.letters):
        if x > 0:
            out = sigma.perms[x - 1][out]
        else:
            out = sigma._inverses[-x - 1][out]
    return out


def is_good(sigma: SoficMap, S: FiniteWindow, v: int) -> bool:
    """Window-goodness of a vertex: the action replicates the group on S.

    Checks (1) distinct words move v to distinct vertices; (2) compositions
    agree with products on the orbit; (3) inverses cancel on the orbit;
    (4) preimages under word maps are given by the inverse word.
    """
    words = S.words
    orbit = [act(sigma, g, v) for g in words]
    if len(set(orbit)) != len(orbit):
        return False
    orbit_set = sorted(set(orbit))
    for g1 in words:
        for g2 in words:
            prod = multiply(g1, g2)
            for w in orbit_set:
                if act(sigma, g1, act(sigma, g2, w)) != act(sigma, prod, w):
                    return False
    for g in words:
        ginv = g.inverse()
        for w in orbit_set:
            if act(sigma, ginv, act(sigma, g, w)) != w:
                return False
            # preimage condition: t with sigma^g(t) = w must be sigma^{g^-1}(w)
            t = act(sigma, ginv, w)
            if act(sigma, g, t) != w:
                return False
    return True


def good_fraction(sigma: SoficMap, S: FiniteWindow) -> float:
    """Fraction of S-good vertices, vectorized over the whole vertex set."""
    words = S.words
    images = np.stack([act_all(sigma, g) for g in words])
    # condition (1): distinct words give distinct images
    srt = np.sort(images, axis=0)
    ok = np.all(srt[1:] != srt[:-1], axis=0) if len(words) > 1 else np.ones(sigma.n, bool)
    # conditions (2)-(4): vertices w where some composition identity fails
    bad = np.zeros(sigma.n, dtype=bool)
    for g1 in words:
        a1 = act_all(sigma, g1)
        inv1 = act_all(sigma, g1.inverse())
        bad |= inv1[a1] != np.arange(sigma.n)
        for g2 in words:
            a2 = act_all(sigma, g2)
            bad |= a1[a2] != act_all(sigma, multiply(g1, g2))
    if bad.any():
        touched = bad[images].any(axis=0)
        ok &= ~touched
    return float(ok.mean())


def pullback(
    sigma: SoficMap, v: int, F: FiniteWindow, tau: np.ndarray
) -> dict:
    """Window configuration read through the orbit of v: ``g -> tau[sigma^g(v)]``."""
    tau = np.asarray(tau)
    return {g: int(tau[act(sigma, g, v)]) for g in F}


def empirical_pullback(
    sigma: SoficMap, F: FiniteWindow, tau: np.ndarray, alphabet_size: int
) -> ProbTable:
    """Average over vertices of the point masses at their window pullbacks."""
    words = F.words
    tau = np.asarray(tau, dtype=np.int64)
    digits = np.stack([tau[act_all(sigma, g)] for g in words])
    flat = np.zeros(sigma.n, dtype=np.int64)
    for row in digits:
        flat = flat * alphabet_size + row
    counts = np.bincount(flat, minlength=alphabet_size ** len(words))
    arr = counts.astype(float).reshape((alphabet_size,) * len(words)) / sigma.n
    return ProbTable(words, arr)


def induced_structure(sigma: SoficMap, potential: ShiftPotential) -> GibbsStructure:
    """Finite structure with one translated term copy per vertex and window term.

    The copy at vertex v lives on the orbit image of the term window; copies
    whose image sets coincide are merged by addition.  When the image
    collapses (v is not window-good) the term is still emitted on the smaller
    support, read through the action.
    """
    k = potential.alphabet.size
    alphabets = {v: potential.alphabet for v in range(sigma.n)}
    merged: dict[tuple, np.ndarray] = {}
    for t in potential.terms:
        dwords = t.window.words
        images = np.stack([act_all(sigma, g) for g in dwords])
        for v in range(sigma.n):
            image = [int(images[j, v]) for j in range(len(dwords))]
            support = tuple(sorted(set(image)))
            table = _translate_table(t.table, image, support, k)
            if support in merged:
                merged[support] = merged[support] + table
            else:
                merged[support] = table
    terms = [EnergyTerm(sup, tab) for sup, tab in sorted(merged.items())]
    return GibbsStructure(alphabets, terms)


def induced_boundary(structure: GibbsStructure, region) -> tuple:
    """Boundary of a vertex set inside an induced structure (for cross-checks)."""
    return structure.boundary(region)
