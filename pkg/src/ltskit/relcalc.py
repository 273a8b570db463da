"""Lazy binary relations represented by their image function.

A relation is never enumerated as a whole: it is a function from a domain
element to the finite set of elements related to it, evaluated on demand.
Transition relations are the special case whose codomain elements are
``(label, successor)`` pairs, and the operators below (union, sequencing,
synchronised parallel composition, filtering, isomorphic relabelling)
build new relations out of existing ones without ever looking past the
element whose image is requested.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from typing import Any, Callable, Hashable, Iterable

from .errors import DomainError


class Cardinality(enum.Enum):
    """What is known about the size of a relation."""

    FINITE = "finite"                        # finite domain, finite images
    FINITE_BRANCHING = "finite-branching"    # only each image is finite

    def __and__(self, other: Cardinality) -> Cardinality:
        if self is Cardinality.FINITE and other is Cardinality.FINITE:
            return Cardinality.FINITE
        return Cardinality.FINITE_BRANCHING


class Rel:
    """A relation given by ``image(d) -> finite collection``.

    Images are frozen into frozensets and memoised per element, so the
    image function must be pure. ``evaluations`` counts how many times the
    underlying function actually ran, which makes laziness observable.
    """

    def __init__(self, image: Callable[[Any], Iterable[Any]],
                 cardinality: Cardinality = Cardinality.FINITE_BRANCHING,
                 *, memoize: bool = True, name: str | None = None):
        self._image = image
        self.cardinality = cardinality
        self.name = name
        self._cache: dict | None = {} if memoize else None
        self.evaluations = 0

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Hashable, Hashable]]) -> Rel:
        """Finite relation from an explicit collection of pairs."""
        table: dict = defaultdict(set)
        for d, c in pairs:
            table[d].add(c)
        frozen = {d: frozenset(cs) for d, cs in table.items()}
        rel = cls(lambda d: frozen.get(d, ()), Cardinality.FINITE)
        rel.domain = frozenset(frozen)
        return rel

    @classmethod
    def empty(cls) -> Rel:
        rel = cls(lambda d: (), Cardinality.FINITE)
        rel.domain = frozenset()
        return rel

    def image(self, d) -> frozenset:
        cache = self._cache
        if cache is not None:
            try:
                return cache[d]
            except KeyError:
                pass
        self.evaluations += 1
        result = frozenset(self._image(d))
        if cache is not None:
            cache[d] = result
        return result

    __call__ = image

    def __or__(self, other: Rel) -> Rel:
        return rel_union(self, other)

    def __repr__(self):
        label = self.name or "Rel"
        return f"<{label} {self.cardinality.value}>"


# A transition relation is a Rel whose image elements are (label, state).
TransRel = Rel


def never(_l1, _l2) -> bool:
    return False


def rel_union(r1: Rel, r2: Rel, *, memoize: bool = True) -> Rel:
    return Rel(lambda d: r1.image(d) | r2.image(d),
               r1.cardinality & r2.cardinality, memoize=memoize)


def rel_seq(r1: TransRel, r2: TransRel, *, memoize: bool = True) -> TransRel:
    """Relational sequencing over pair states ``(p, q)``.

    ``p`` moves while it can; ``q`` moves only from pairs where the image
    of ``p`` under ``r1`` is empty.
    """
    def image(pq):
        p, q = pq
        left = r1.image(p)
        if left:
            return {(l, (p1, q)) for l, p1 in left}
        return {(l, (p, q1)) for l, q1 in r2.image(q)}

    return Rel(image, r1.cardinality & r2.cardinality, memoize=memoize)


def rel_par(r1: TransRel, r2: TransRel,
            syncp: Callable[[Any, Any], bool] = never,
            sync_label: Callable[[Any], Any] | None = None,
            *, memoize: bool = True) -> TransRel:
    """Parallel composition: both interleavings plus synchronisations.

    A synchronisation of ``l1`` (left) with ``l2`` (right) happens whenever
    ``syncp(l1, l2)`` holds and emits ``sync_label(l1)``.
    """
    def image(pq):
        p, q = pq
        left = r1.image(p)
        right = r2.image(q)
        out = {(l, (p1, q)) for l, p1 in left}
        out.update((l, (p, q1)) for l, q1 in right)
        if syncp is not never:
            for l1, p1 in left:
                for l2, q1 in right:
                    if syncp(l1, l2):
                        out.add((sync_label(l1), (p1, q1)))
        return out

    return Rel(image, r1.cardinality & r2.cardinality, memoize=memoize)


def rel_filter(r: TransRel, keep: Callable[[Any], bool]) -> TransRel:
    return Rel(lambda s: {(l, s1) for l, s1 in r.image(s) if keep(l)},
               r.cardinality)


def rel_map(r: TransRel, to_state: Callable[[Any], Any],
            from_state: Callable[[Any], Any],
            to_label: Callable[[Any], Any] | None = None,
            *, memoize: bool = True) -> TransRel:
    """Rename the states (and optionally labels) of a transition relation.

    ``to_state`` must be a bijection on the states explored and
    ``from_state`` its inverse; images of a renamed state are computed by
    mapping back, taking the original image and mapping forward.
    """
    def image(s):
        try:
            original = from_state(s)
        except (KeyError, ValueError, TypeError) as exc:
            raise DomainError(f"state {s!r} is outside the mapped range") from exc
        if to_label is None:
            return {(l, to_state(s1)) for l, s1 in r.image(original)}
        return {(to_label(l), to_state(s1)) for l, s1 in r.image(original)}

    return Rel(image, r.cardinality, memoize=memoize)
