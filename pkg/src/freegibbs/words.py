"""Reduced words in a finitely generated free group, and finite-window calculus.

Words are stored as reduced tuples of signed generator indices: ``+i`` is the
i-th generator, ``-i`` its inverse (``i`` starting at 1).  The empty tuple is
the identity.  All values are immutable, hashable and totally ordered by
``(length, letters)``, which gives windows a canonical element order.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Iterator


def _reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if x == 0:
            raise ValueError("letter 0 is not a valid signed generator index")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@functools.total_ordering
@dataclass(frozen=True, slots=True)
class GroupWord:
    """A reduced word; construct via :meth:`from_letters`, :func:`gen` or products."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        for a, b in zip(self.letters, self.letters[1:]):
            if a == -b:
                raise ValueError(f"word {self.letters} is not reduced")

    @classmethod
    def from_letters(cls, letters: Iterable[int]) -> "GroupWord":
        """Build a word from arbitrary letters, freely reducing them."""
        return cls(_reduce(letters))

    @property
    def length(self) -> int:
        return len(self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple(-x for x in reversed(self.letters)))

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return multiply(self, other)

    def __invert__(self) -> "GroupWord":
        return self.inverse()

    def _key(self):
        return (len(self.letters), self.letters)

    def __lt__(self, other: "GroupWord") -> bool:
        return self._key() < other._key()

    def __repr__(self) -> str:
        if not self.letters:
            return "e"
        parts = []
        for x in self.letters:
            parts.append(f"s{x}" if x > 0 else f"s{-x}~")
        return "*".join(parts)


IDENTITY = GroupWord()


def gen(i: int, power: int = 1) -> GroupWord:
    """The generator ``s_i`` (``power=-1`` for its inverse)."""
    if i < 1:
        raise ValueError("generator index must be >= 1")
    if power == 1:
        return GroupWord((i,))
    if power == -1:
        return GroupWord((-i,))
    raise ValueError("power must be +1 or -1")


def multiply(a: GroupWord, b: GroupWord) -> GroupWord:
    """Reduced product ``a*b``; cancellation happens only at the junction."""
    left = list(a.letters)
    right = b.letters
    k = 0
    while left and k < len(right) and left[-1] == -right[k]:
        left.pop()
        k += 1
    return GroupWord(tuple(left) + right[k:])


class FiniteWindow:
    """An immutable finite set of reduced words with canonical iteration order."""

    __slots__ = ("_set", "_sorted")

    def __init__(self, words: Iterable[GroupWord]):
        self._set = frozenset(words)
        self._sorted = tuple(sorted(self._set))

    @property
    def words(self) -> tuple[GroupWord, ...]:
        return self._sorted

    def __iter__(self) -> Iterator[GroupWord]:
        return iter(self._sorted)

    def __len__(self) -> int:
        return len(self._set)

    def __contains__(self, w: GroupWord) -> bool:
        return w in self._set

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteWindow) and self._set == other._set

    def __hash__(self) -> int:
        return hash(self._set)

    def __repr__(self) -> str:
        inner = ", ".join(repr(w) for w in self._sorted)
        return f"{{{inner}}}"

    def union(self, other: "FiniteWindow") -> "FiniteWindow":
        return FiniteWindow(self._set | other._set)

    def difference(self, other: "FiniteWindow") -> "FiniteWindow":
        return FiniteWindow(self._set - other._set)

    def intersection(self, other: "FiniteWindow") -> "FiniteWindow":
        return FiniteWindow(self._set & other._set)

    def without(self, *ws: GroupWord) -> "FiniteWindow":
        return FiniteWindow(self._set - set(ws))

    def with_words(self, *ws: GroupWord) -> "FiniteWindow":
        return FiniteWindow(self._set | set(ws))


def window(*words: GroupWord) -> FiniteWindow:
    return FiniteWindow(words)


def ball(m: int, r: int) -> FiniteWindow:
    """All reduced words of length <= r in the rank-m free group.

    Breadth-first: a word of length k extends by any letter except the
    inverse of its last one, so |sphere(k)| = 2m*(2m-1)^(k-1) for k >= 1.
    Cost grows like (2m-1)^r; callers budget their own enumeration.
    """
    if m < 1:
        raise ValueError("rank must be >= 1")
    if r < 0:
        raise ValueError("radius must be >= 0")
    letters = [i for i in range(1, m + 1)] + [-i for i in range(1, m + 1)]
    out = [IDENTITY]
    frontier = [IDENTITY]
    for _ in range(r):
        nxt = []
        for w in frontier:
            last = w.letters[-1] if w.letters else 0
            for x in letters:
                if x != -last:
                    nxt.append(GroupWord(w.letters + (x,)))
        out.extend(nxt)
        frontier = nxt
    return FiniteWindow(out)


def ball_size(m: int, r: int) -> int:
    """Closed-form cardinality of :func:`ball`."""
    if r == 0:
        return 1
    if m == 1:
        return 2 * r + 1
    q = 2 * m - 1
    return 1 + 2 * m * (q**r - 1) // (q - 1)


def translate(F: FiniteWindow, g: GroupWord) -> FiniteWindow:
    """Right translate ``{f*g : f in F}``."""
    return FiniteWindow(multiply(f, g) for f in F)


def left_translate(F: FiniteWindow, g: GroupWord) -> FiniteWindow:
    """Left translate ``{g*f : f in F}``."""
    return FiniteWindow(multiply(g, f) for f in F)


def window_inverse(F: FiniteWindow) -> FiniteWindow:
    return FiniteWindow(f.inverse() for f in F)


def potential_boundary(F: FiniteWindow, D: FiniteWindow) -> FiniteWindow:
    """Boundary of F under an interaction of support window D.

    Collects ``D*g \\ F`` over every right translate ``D*g`` meeting F.  The
    search runs over ``g in D^{-1}*F``, which is exactly the set of translates
    with nonempty intersection, so the enumeration is exhaustive.  The result
    is finite and disjoint from F.
    """
    out: set[GroupWord] = set()
    seen: set[GroupWord] = set()
    for d in D:
        dinv = d.inverse()
        for f in F:
            g = multiply(dinv, f)
            if g in seen:
                continue
            seen.add(g)
            hits = [multiply(dd, g) for dd in D]
            if any(h in F for h in hits):
                out.update(h for h in hits if h not in F)
    return FiniteWindow(out)
