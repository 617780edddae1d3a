"""Shift-invariant potentials on the free group and their finite patches.

A :class:`ShiftPotential` is a finite list of window terms: a window (finite
set of words containing the identity) together with an energy table over the
alphabet, one axis per window word in canonical order.  The induced structure
on the group places a translated copy of each term at every right translate of
its window, so a term with window ``{e, s_i}`` contributes the energy
``table[x(g), x(s_i*g)]`` for every ``g``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gibbs import Alphabet, EnergyTerm, GibbsStructure, SPIN
from .words import (
    IDENTITY,
    FiniteWindow,
    GroupWord,
    gen,
    multiply,
    potential_boundary,
    window,
)


@dataclass(frozen=True)
class WindowTerm:
    """One translation-invariant energy term: window plus table.

    Table axes follow the canonical (sorted) order of the window words, and
    the window must contain the identity so translates are anchored.
    """

    window: FiniteWindow
    table: np.ndarray

    def __post_init__(self):
        if IDENTITY not in self.window:
            raise ValueError("term window must contain the identity")
        arr = np.asarray(self.table, dtype=float)
        if arr.ndim != len(self.window):
            raise ValueError("table rank does not match window size")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "table", arr)


@dataclass(frozen=True)
class ShiftPotential:
    """A shift-invariant potential: rank, alphabet and window terms."""

    rank: int
    alphabet: Alphabet
    terms: tuple[WindowTerm, ...]

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        for t in self.terms:
            k = self.alphabet.size
            if t.table.shape != (k,) * len(t.window):
                raise ValueError("term table shape does not match alphabet size")
            for w in t.window:
                for x in w.letters:
                    if abs(x) > self.rank:
                        raise ValueError(f"window word {w} uses a generator beyond rank")

    def boundary(self, F: FiniteWindow) -> FiniteWindow:
        """Union of per-term boundaries of F."""
        out = FiniteWindow(())
        for t in self.terms:
            out = out.union(potential_boundary(F, t.window))
        return out

    def patch(self, core: FiniteWindow) -> GibbsStructure:
        """Finite structure carrying every translated term that meets ``core``.

        Vertices are ``core`` plus its boundary; local kernels inside the core
        agree exactly with the infinite shift structure's kernels.
        """
        bnd = self.boundary(core)
        verts = core.union(bnd)
        alphabets = {w: self.alphabet for w in verts}
        merged: dict[tuple, np.ndarray] = {}
        for t in self.terms:
            dwords = t.window.words
            seen: set[GroupWord] = set()
            for d in t.window:
                dinv = d.inverse()
                for f in core:
                    g = multiply(dinv, f)
                    if g in seen:
                        continue
                    seen.add(g)
                    image = [multiply(dd, g) for dd in dwords]
                    if not any(h in core for h in image):
                        continue
                    support = tuple(sorted(set(image)))
                    table = _translate_table(
                        t.table, image, support, self.alphabet.size
                    )
                    if support in merged:
                        merged[support] = merged[support] + table
                    else:
                        merged[support] = table
        terms = [EnergyTerm(sup, tab) for sup, tab in sorted(merged.items())]
        return GibbsStructure(alphabets, terms)

    def nearest_neighbor_tables(self):
        """Split into per-generator edge tables and a single-site table.

        Only valid when every term window is ``{e}`` or ``{e, s_i}``; returns
        ``(edge, site)`` with ``edge[i]`` the summed table for generator i+1
        (axis 0 the identity coordinate, axis 1 the ``s_i`` coordinate) and
        ``site`` the summed single-site table.  Raises ValueError otherwise.
        """
        k = self.alphabet.size
        edge = [None] * self.rank
        site = np.zeros(k)
        for t in self.terms:
            ws = t.window.words
            if len(ws) == 1:
                site = site + t.table
                continue
            if len(ws) == 2 and ws[0] == IDENTITY and len(ws[1].letters) == 1:
                x = ws[1].letters[0]
                if x > 0:
                    i = x - 1
                    tab = t.table
                else:
                    # window {e, s_i^-1}: translate by s_i to anchor the
                    # edge as (e, s_i); axes swap accordingly.
                    i = -x - 1
                    tab = t.table.T
                edge[i] = tab if edge[i] is None else edge[i] + tab
                continue
            raise ValueError(
                "potential is not nearest-neighbor: window "
                f"{t.window} unsupported"
            )
        edge = [np.zeros((k, k)) if e is None else np.asarray(e) for e in edge]
        return edge, site


def _translate_table(
    table: np.ndarray, image: list, support: tuple, k: int
) -> np.ndarray:
    """Re-index a window table onto the (possibly collapsed) image support.

    ``image[j]`` is the vertex carrying window axis j; several axes may land
    on the same vertex when the translate collapses, in which case the table
    is evaluated on the diagonal.
    """
    pos = {v: i for i, v in enumerate(support)}
    grids = np.indices((k,) * len(support))
    return table[tuple(grids[pos[v]] for v in image)]


def ising_potential(beta: float, m: int) -> ShiftPotential:
    """Spin potential with one ``-beta * x(e) * x(s_i)`` term per generator."""
    sym = np.array(SPIN.symbols, dtype=float)
    tab = -beta * np.outer(sym, sym)
    terms = tuple(
        WindowTerm(window(IDENTITY, gen(i)), tab) for i in range(1, m + 1)
    )
    return ShiftPotential(m, SPIN, terms)


def neighbor_boundary(F: FiniteWindow, m: int) -> FiniteWindow:
    """Boundary of F under nearest-neighbor windows {e, s_i}, i = 1..m."""
    out = FiniteWindow(())
    for i in range(1, m + 1):
        out = out.union(potential_boundary(F, window(IDENTITY, gen(i))))
    return out
