"""Labelled transition systems and processes.

An :class:`Lts` wraps a lazy transition relation together with the hooks
that give labels meaning: ``classify`` (input/output/internal/plain),
``syncp`` (which label pairs synchronise in parallel) and ``sync_label``
(what a synchronisation emits). A :class:`Proc` is an LTS plus the state
exploration starts from. All composition operators are lazy: composite
states are only built when their image is requested.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, NamedTuple

from .errors import BudgetExhausted, RefusedOperation
from .relcalc import (Cardinality, Rel, TransRel, never, rel_filter, rel_map,
                      rel_par, rel_seq)

DEFAULT_BUDGET = 10_000


class LabelKind(enum.Enum):
    INPUT = "in"
    OUTPUT = "out"
    INTERNAL = "tau"
    PLAIN = "plain"


def plain(_label) -> LabelKind:
    return LabelKind.PLAIN


class AsyncState(NamedTuple):
    """A state of an asynchronous LTS: base state plus FIFO output buffer."""

    base: Any
    buffer: tuple = ()


def show(x) -> str:
    """Canonical printed form of a state or label."""
    if isinstance(x, AsyncState):
        return f"({show(x.base)},[{','.join(show(l) for l in x.buffer)}])"
    if isinstance(x, tuple):
        return "(" + ",".join(show(e) for e in x) + ")"
    return str(x)


def move_key(move) -> tuple[str, str]:
    label, state = move
    return show(label), show(state)


def sorted_moves(moves: Iterable) -> list:
    return sorted(moves, key=move_key)


class Lts:
    """An LTS over generic hashable states and labels."""

    def __init__(self, trans: TransRel, classify: Callable[[Any], LabelKind] = plain,
                 syncp: Callable[[Any, Any], bool] = never,
                 sync_label: Callable[[Any], Any] | None = None,
                 internal_label=None, *, labels: frozenset | None = None,
                 finite_state: Callable[[Any], bool] | None = None,
                 name: str | None = None):
        self.trans = trans
        self.classify = classify
        self.syncp = syncp
        self.sync_label = sync_label
        self.internal_label = internal_label
        # Known finite label alphabet, when there is one (triples LTSs).
        self.labels = labels
        # Optional per-state test: is the part reachable from here finite?
        self.finite_state = finite_state
        self.name = name
        self._async: Lts | None = None

    @property
    def cardinality(self) -> Cardinality:
        return self.trans.cardinality

    @property
    def finite(self) -> bool:
        return self.trans.cardinality is Cardinality.FINITE

    def finite_from(self, state) -> bool:
        """Whether only finitely many states are reachable from ``state``."""
        if self.finite:
            return True
        return self.finite_state is not None and bool(self.finite_state(state))

    def _hooks(self) -> dict:
        return dict(classify=self.classify, syncp=self.syncp,
                    sync_label=self.sync_label,
                    internal_label=self.internal_label)

    def process(self, state) -> Proc:
        return Proc(self, state)

    def image(self, state) -> frozenset:
        return self.trans.image(state)

    def is_internal(self, label) -> bool:
        return self.classify(label) is LabelKind.INTERNAL

    def par(self, other: Lts) -> Lts:
        return lts_par(self, other)

    __or__ = par

    def seq(self, other: Lts) -> Lts:
        return lts_seq(self, other)

    def asynchronous(self) -> Lts:
        if self._async is None:
            self._async = lts_async(self)
        return self._async

    def filter(self, keep: Callable[[Any], bool]) -> Lts:
        return lts_filter(self, keep)

    def __repr__(self):
        return f"<Lts {self.name or hex(id(self))} {self.cardinality.value}>"


def lts_from_triples(triples: Iterable[tuple[Hashable, Hashable, Hashable]],
                     classify: Callable | dict | None = None, **hooks) -> Lts:
    """Finite LTS whose transition relation is exactly ``triples``.

    ``classify`` may be a function or a dict from label to
    :class:`LabelKind`; labels missing from the dict are plain.
    """
    triples = list(triples)
    trans = Rel.from_pairs((s, (l, t)) for s, l, t in triples)
    if isinstance(classify, dict):
        table = dict(classify)
        classify = lambda l: table.get(l, LabelKind.PLAIN)  # noqa: E731
    return Lts(trans, classify or plain,
               labels=frozenset(l for _, l, _ in triples), **hooks)


def lts_par(l1: Lts, l2: Lts) -> Lts:
    """Lazy parallel composition; hooks are inherited from ``l1``."""
    if l1.labels is not None and l2.labels is not None:
        for label in l1.labels & l2.labels:
            if l1.classify(label) is not l2.classify(label):
                raise ValueError(f"label {label!r} is classified differently "
                                 "by the two LTSs")
    trans = rel_par(l1.trans, l2.trans, l1.syncp, l1.sync_label)
    return Lts(trans, **l1._hooks(), labels=_joint_labels(l1, l2),
               finite_state=_pair_finite(l1, l2))


def lts_seq(l1: Lts, l2: Lts) -> Lts:
    return Lts(rel_seq(l1.trans, l2.trans), **l1._hooks(),
               labels=_joint_labels(l1, l2), finite_state=_pair_finite(l1, l2))


def _joint_labels(l1: Lts, l2: Lts):
    if l1.labels is not None and l2.labels is not None:
        return l1.labels | l2.labels
    return None


def _pair_finite(l1: Lts, l2: Lts):
    return lambda st: l1.finite_from(st[0]) and l2.finite_from(st[1])


def lts_filter(l: Lts, keep: Callable[[Any], bool]) -> Lts:
    return Lts(rel_filter(l.trans, keep), **l._hooks(), labels=l.labels,
               finite_state=l.finite_from)


def lts_map(l: Lts, to_state: Callable, from_state: Callable) -> Lts:
    """Isomorphic copy of ``l`` with states renamed by ``to_state``."""
    return Lts(rel_map(l.trans, to_state, from_state), **l._hooks(),
               labels=l.labels, finite_state=lambda s: l.finite_from(from_state(s)))


def lts_async(l: Lts) -> Lts:
    """Pair every state with an unbounded FIFO buffer of outputs.

    From ``(s, buf)``: an output ``s -o-> s1`` becomes an internal step to
    ``(s1, buf + o)``; any other move keeps the buffer; and when the
    buffer is non-empty its head is emitted, leaving ``s`` untouched.
    """
    if l.internal_label is None:
        raise RefusedOperation("asynchronous transformation needs an LTS "
                               "with an internal label")
    tau = l.internal_label
    trans = l.trans
    classify = l.classify

    def image(st: AsyncState):
        base, buf = st
        out = set()
        for label, s1 in trans.image(base):
            if classify(label) is LabelKind.OUTPUT:
                out.add((tau, AsyncState(s1, buf + (label,))))
            else:
                out.add((label, AsyncState(s1, buf)))
        if buf:
            out.add((buf[0], AsyncState(base, buf[1:])))
        return out

    return Lts(Rel(image, Cardinality.FINITE_BRANCHING, name="async"),
               **l._hooks(), labels=l.labels)


@dataclass(frozen=True)
class Proc:
    """A process: an LTS together with one of its states."""

    lts: Lts
    state: Any

    def moves(self) -> frozenset:
        """The ``(label, successor state)`` pairs enabled here."""
        return self.lts.trans.image(self.state)

    @property
    def transitions(self) -> frozenset:
        return frozenset(l for l, _ in self.moves())

    def after(self, label) -> frozenset[Proc]:
        """Continuations of this process after ``label``."""
        return frozenset(Proc(self.lts, s) for l, s in self.moves() if l == label)

    __call__ = after

    def successors(self) -> list[tuple[Any, Proc]]:
        """All moves as ``(label, Proc)``, in deterministic order."""
        return [(l, Proc(self.lts, s)) for l, s in sorted_moves(self.moves())]

    @property
    def stuck(self) -> bool:
        return not self.moves()

    @property
    def finite(self) -> bool:
        """True when this process is known to have finitely many states."""
        return self.lts.finite_from(self.state)

    def par(self, other: Proc) -> Proc:
        return Proc(lts_par(self.lts, other.lts), (self.state, other.state))

    __or__ = par

    def seq(self, other: Proc) -> Proc:
        return Proc(lts_seq(self.lts, other.lts), (self.state, other.state))

    def asynchronous(self) -> Proc:
        return Proc(self.lts.asynchronous(), AsyncState(self.state, ()))

    def filter(self, keep: Callable[[Any], bool]) -> Proc:
        return Proc(lts_filter(self.lts, keep), self.state)

    def weak_reducts(self, budget: int = DEFAULT_BUDGET) -> frozenset[Proc]:
        return weak_reducts(self, budget)

    def wbarbs(self, budget: int = DEFAULT_BUDGET) -> frozenset:
        return wbarbs(self, budget)

    def to_dot(self, max_depth: int | None = None, **kw) -> str:
        return to_dot(self, max_depth, **kw)

    def __repr__(self):
        return f"Proc({show(self.state)})"


def proc_par(p: Proc, q: Proc) -> Proc:
    return p.par(q)


def proc_seq(p: Proc, q: Proc) -> Proc:
    return p.seq(q)


def proc_async(p: Proc) -> Proc:
    return p.asynchronous()


def proc_filter(p: Proc, keep: Callable[[Any], bool]) -> Proc:
    return p.filter(keep)


def weak_reducts(p: Proc, budget: int = DEFAULT_BUDGET) -> frozenset[Proc]:
    """Every process reachable from ``p`` by zero or more internal moves."""
    lts = p.lts
    seen = {p.state}
    queue = deque([p.state])
    while queue:
        s = queue.popleft()
        for label, s1 in lts.trans.image(s):
            if s1 not in seen and lts.is_internal(label):
                seen.add(s1)
                if len(seen) > budget:
                    raise BudgetExhausted(f"internal closure of {p!r}", budget)
                queue.append(s1)
    return frozenset(Proc(lts, s) for s in seen)


def wbarbs(p: Proc, budget: int = DEFAULT_BUDGET) -> frozenset:
    """Non-internal labels enabled after zero or more internal moves."""
    lts = p.lts
    return frozenset(l for r in weak_reducts(p, budget) for l in r.transitions
                     if not lts.is_internal(l))


def explore(p: Proc, max_depth: int | None = None,
            budget: int | None = None) -> tuple[list, list]:
    """Breadth-first exploration from ``p.state``.

    Returns ``(states, edges)`` with states in discovery order and edges as
    ``(src, label, dst)`` triples. With a finite ``max_depth`` only the
    states at distance ``< max_depth`` are expanded, so every returned
    state is at most ``max_depth`` edges from the root.
    """
    if max_depth is not None and max_depth < 0:
        raise ValueError("max_depth must be non-negative")
    trans = p.lts.trans
    depth = {p.state: 0}
    states = [p.state]
    edges = []
    queue = deque([p.state])
    while queue:
        s = queue.popleft()
        d = depth[s]
        if max_depth is not None and d >= max_depth:
            continue
        for label, s1 in sorted_moves(trans.image(s)):
            edges.append((s, label, s1))
            if s1 not in depth:
                depth[s1] = d + 1
                states.append(s1)
                if budget is not None and len(states) > budget:
                    raise BudgetExhausted(f"exploration of {p!r}", budget)
                queue.append(s1)
    return states, edges


def _dot_quote(text: str) -> str:
    text = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{text}"'


def to_dot(p: Proc, max_depth: int | None = None,
           show_state: Callable[[Any], str] = show,
           show_label: Callable[[Any], str] = show) -> str:
    """Graphviz rendering of the diagram reachable from ``p``.

    ``max_depth=None`` means unbounded and is only accepted on processes
    known to be finite-state.
    """
    if max_depth is None and not p.finite:
        raise RefusedOperation("unbounded depth requested on a process that "
                               "is only known to be finite-branching; pass "
                               "a finite max_depth")
    states, edges = explore(p, max_depth)
    names: dict = {}
    taken: set[str] = set()
    for s in states:
        text = show_state(s)
        if text in taken:
            # Distinct states printing alike get a disambiguating suffix.
            k = 1
            while f"{text}#{k}" in taken:
                k += 1
            text = f"{text}#{k}"
        taken.add(text)
        names[s] = _dot_quote(text)
    lines = ["digraph {"]
    lines.append(f"  {names[p.state]} [penwidth=2];")
    for s in states[1:]:
        lines.append(f"  {names[s]};")
    for s, label, s1 in edges:
        lines.append(f"  {names[s]} -> {names[s1]} "
                     f"[label={_dot_quote(show_label(label))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
