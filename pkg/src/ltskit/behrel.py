"""Coinductive behavioural relations: synthesis and independent verification.

Compliance relations are parametrised by a predicate on process pairs.
A set of pairs ``R`` is a compliance relation for ``pred`` when, for every
``(p, q)`` in ``R``:

1. ``pred(p, q)`` holds;
2. ``p -l-> p1``, ``q -l'-> q1`` and ``l``, ``l'`` synchronise imply
   ``(p1, q1)`` in ``R``;
3. ``p => p1`` and ``q => q1`` (zero or more internal moves) imply
   ``(p1, q1)`` in ``R``.

:func:`build` searches for the least such set containing a starting pair
(a semi-algorithm, bounded by a budget), and :func:`check` verifies a
given set against the three clauses without sharing any code with
:func:`build`. Simulation and bisimulation follow the same build/check
discipline.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .errors import BudgetExhausted, RefusedOperation
from .lts import (DEFAULT_BUDGET, LabelKind, Lts, Proc, show, sorted_moves,
                  weak_reducts)


# -- predicates ---------------------------------------------------------------

@dataclass(frozen=True)
class Predicate:
    """A named predicate over process pairs.

    ``fn(p, q, budget)`` returns ``(ok, reason)``; ``reason`` explains a
    failure and is ignored on success.
    """

    name: str
    fn: Callable[[Proc, Proc, int], tuple[bool, str]] = field(compare=False)

    def __call__(self, p: Proc, q: Proc, budget: int = DEFAULT_BUDGET) -> bool:
        return self.fn(p, q, budget)[0]

    def explain(self, p: Proc, q: Proc, budget: int = DEFAULT_BUDGET):
        return self.fn(p, q, budget)


def _unmatched_outputs(p: Proc, q: Proc, budget: int):
    """Outputs of ``p`` that no weak reduct of ``q`` can receive."""
    lts = p.lts
    reducts = None
    missing = []
    for label in sorted(p.transitions, key=show):
        if lts.classify(label) is not LabelKind.OUTPUT:
            continue
        if reducts is None:
            reducts = weak_reducts(q, budget)
        if not any(lts.syncp(label, l2) and q.lts.classify(l2) is LabelKind.INPUT
                   for r in reducts for l2 in r.transitions):
            missing.append(label)
    return missing


def _io_compliance(p: Proc, q: Proc, budget: int):
    for a, b, side in ((p, q, "left"), (q, p, "right")):
        missing = _unmatched_outputs(a, b, budget)
        if missing:
            labels = ", ".join(show(l) for l in missing)
            return False, (f"output {labels} of the {side} process is not "
                           "matched by a weak input of the other")
    return True, ""


def _progress(p: Proc, q: Proc, budget: int):
    pmoves = p.moves()
    if not pmoves:
        return True, ""
    if any(p.lts.is_internal(l) for l, _ in pmoves):
        return True, ""
    qmoves = q.moves()
    if any(q.lts.is_internal(l) for l, _ in qmoves):
        return True, ""
    syncp = p.lts.syncp
    if any(syncp(l1, l2) for l1, _ in pmoves for l2, _ in qmoves):
        return True, ""
    return False, "the left process can still move but the pair is stuck"


IO_COMPLIANCE = Predicate("io-compliance", _io_compliance)
PROGRESS = Predicate("progress", _progress)


def correct_composition(success_label) -> Predicate:
    """Success must remain reachable as a weak barb of ``p | q``."""
    def fn(p: Proc, q: Proc, budget: int):
        if success_label in p.par(q).wbarbs(budget):
            return True, ""
        return False, f"{show(success_label)} is not a weak barb of the composition"

    return Predicate(f"correct-composition({show(success_label)})", fn)


TRUE = Predicate("true", lambda p, q, budget: (True, ""))
FALSE = Predicate("false", lambda p, q, budget: (False, "predicate is false"))


# -- relations and verdicts -----------------------------------------------------

@dataclass(frozen=True)
class Relation:
    """A finite set of state pairs, tagged with what it claims to be.

    ``kind`` is a :class:`Predicate` for compliance relations, or one of
    the strings ``"simulation"``, ``"bisimulation"`` (optionally prefixed
    by ``"weak-"``) for (bi)simulations.
    """

    kind: Any
    lts1: Lts
    lts2: Lts
    pairs: frozenset
    root: tuple | None = None

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def procs(self):
        for s1, s2 in self.sorted_pairs():
            yield self.lts1.process(s1), self.lts2.process(s2)

    def sorted_pairs(self) -> list:
        return sorted(self.pairs, key=lambda st: (show(st[0]), show(st[1])))

    def with_pairs(self, pairs: Iterable) -> Relation:
        return Relation(self.kind, self.lts1, self.lts2, frozenset(pairs), self.root)

    def as_kind(self, kind) -> Relation:
        """The same pairs, reinterpreted as another kind of relation."""
        return Relation(kind, self.lts1, self.lts2, self.pairs, self.root)

    def check(self, budget: int = DEFAULT_BUDGET) -> CheckResult:
        if isinstance(self.kind, Predicate):
            return check(self.kind, self, budget)
        return check_simulation(self, budget)

    def __repr__(self):
        name = getattr(self.kind, "name", self.kind)
        return f"<Relation {name}: {len(self.pairs)} pairs>"


@dataclass(frozen=True)
class Counterexample:
    """A reachable pair violating the relation, with the path reaching it."""

    pair: tuple
    reason: str
    path: tuple = ()
    label: Any = None

    def __str__(self):
        return f"Left(({show(self.pair[0])}, {show(self.pair[1])}))"


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    violation: str | None = None
    pair: tuple | None = None

    def __bool__(self):
        return self.ok


# -- compliance build -----------------------------------------------------------

def _compliance_successors(p: Proc, q: Proc, budget: int) -> list[tuple[Any, Any]]:
    """Pairs demanded by synchronisation and weak internal moves, in order."""
    out = []
    syncp = p.lts.syncp
    qmoves = sorted_moves(q.moves())
    for l1, p1 in sorted_moves(p.moves()):
        for l2, q1 in qmoves:
            if syncp(l1, l2):
                out.append((p1, q1))
    pr = sorted(weak_reducts(p, budget), key=lambda r: show(r.state))
    qr = sorted(weak_reducts(q, budget), key=lambda r: show(r.state))
    for a in pr:
        for b in qr:
            out.append((a.state, b.state))
    return out


def build(pred: Predicate, p: Proc, q: Proc, budget: int = DEFAULT_BUDGET):
    """Breadth-first search for a compliance relation containing ``(p, q)``.

    Returns a :class:`Relation` or the first (shallowest) violating pair
    as a :class:`Counterexample`. Raises :class:`BudgetExhausted` when more
    than ``budget`` pairs would be needed.
    """
    lts1, lts2 = p.lts, q.lts
    root = (p.state, q.state)
    parent: dict = {root: None}
    queue = deque([root])
    while queue:
        pair = queue.popleft()
        pp, qq = lts1.process(pair[0]), lts2.process(pair[1])
        ok, reason = pred.explain(pp, qq, budget)
        if not ok:
            return Counterexample(pair, reason, _path(parent, pair))
        for nxt in _compliance_successors(pp, qq, budget):
            if nxt not in parent:
                parent[nxt] = pair
                if len(parent) > budget:
                    raise BudgetExhausted(f"{pred.name} build", budget)
                queue.append(nxt)
    return Relation(pred, lts1, lts2, frozenset(parent), root)


def build_finite(pred: Predicate, p: Proc, q: Proc, budget: int = DEFAULT_BUDGET):
    """:func:`build`, restricted to finite-state LTSs so it always terminates."""
    if not (p.lts.finite and q.lts.finite):
        raise RefusedOperation("build_finite only accepts processes of finite LTSs")
    return build(pred, p, q, budget)


def _path(parent: dict, pair) -> tuple:
    path = []
    while pair is not None:
        path.append(pair)
        pair = parent[pair]
    return tuple(reversed(path))


# -- compliance check -----------------------------------------------------------

def check(pred: Predicate, rel: Relation, budget: int = DEFAULT_BUDGET) -> CheckResult:
    """Verify that ``rel`` satisfies all three compliance clauses for ``pred``."""
    lts1, lts2 = rel.lts1, rel.lts2
    pairs = rel.pairs
    syncp = lts1.syncp
    for s1, s2 in rel.sorted_pairs():
        p, q = Proc(lts1, s1), Proc(lts2, s2)
        if not pred(p, q, budget):
            return CheckResult(False, f"predicate {pred.name} fails", (s1, s2))
        for l1, t1 in p.moves():
            for l2, t2 in q.moves():
                if syncp(l1, l2) and (t1, t2) not in pairs:
                    return CheckResult(
                        False, f"synchronisation {show(l1)}/{show(l2)} leads "
                        f"to missing pair ({show(t1)}, {show(t2)})", (s1, s2))
        left = weak_reducts(p, budget)
        right = weak_reducts(q, budget)
        for a in left:
            for b in right:
                if (a.state, b.state) not in pairs:
                    return CheckResult(
                        False, f"internal moves lead to missing pair "
                        f"({show(a.state)}, {show(b.state)})", (s1, s2))
    return CheckResult(True)


# -- (bi)simulation -------------------------------------------------------------

def _matches(q: Proc, label, weak: bool, budget: int) -> frozenset:
    """States ``q`` can reach by a move answering ``label``."""
    if not weak:
        return frozenset(s for l, s in q.moves() if l == label)
    lts = q.lts
    before = weak_reducts(q, budget)
    if lts.is_internal(label):
        return frozenset(r.state for r in before)
    mid = {s for r in before for l, s in r.moves() if l == label}
    return frozenset(r.state for s in mid
                     for r in weak_reducts(Proc(lts, s), budget))


def _kind_name(symmetric: bool, weak: bool) -> str:
    return ("weak-" if weak else "") + ("bisimulation" if symmetric else "simulation")


def _build_sim(p: Proc, q: Proc, weak: bool, symmetric: bool, budget: int):
    lts1, lts2 = p.lts, q.lts
    root = (p.state, q.state)
    # Candidate pairs: those reachable from the root through matched moves.
    demands: dict = {}
    seen = {root}
    queue = deque([root])
    while queue:
        pair = queue.popleft()
        s1, s2 = pair
        pp, qq = Proc(lts1, s1), Proc(lts2, s2)
        reqs = []
        for label, t1 in sorted_moves(pp.moves()):
            answers = sorted(((t1, t2) for t2 in _matches(qq, label, weak, budget)),
                             key=lambda st: show(st[1]))
            reqs.append(("left", label, answers))
        if symmetric:
            for label, t2 in sorted_moves(qq.moves()):
                answers = sorted(((t1, t2) for t1 in _matches(pp, label, weak, budget)),
                                 key=lambda st: show(st[0]))
                reqs.append(("right", label, answers))
        demands[pair] = reqs
        for _, _, answers in reqs:
            for nxt in answers:
                if nxt not in seen:
                    seen.add(nxt)
                    if len(seen) > budget:
                        raise BudgetExhausted(f"{_kind_name(symmetric, weak)} build",
                                              budget)
                    queue.append(nxt)

    # Greatest fixpoint: drop pairs with a demand no surviving pair answers.
    alive = set(seen)
    removed: dict = {}   # pair -> (order, side, label, answers)
    changed = True
    while changed:
        changed = False
        for pair in sorted(alive, key=lambda st: (show(st[0]), show(st[1]))):
            for side, label, answers in demands[pair]:
                if not any(a in alive for a in answers):
                    removed[pair] = (len(removed), side, label, answers)
                    alive.discard(pair)
                    changed = True
                    break

    kind = _kind_name(symmetric, weak)
    if root in alive:
        # Keep only what is reachable from the root inside the relation.
        keep = {root}
        queue = deque([root])
        while queue:
            pair = queue.popleft()
            for _, _, answers in demands[pair]:
                for a in answers:
                    if a in alive and a not in keep:
                        keep.add(a)
                        queue.append(a)
        return Relation(kind, lts1, lts2, frozenset(keep), root)

    # Follow the earliest-removed blocker back to a pair failing outright.
    path = [root]
    pair = root
    while True:
        _, side, label, answers = removed[pair]
        if not answers:
            break
        pair = min(answers, key=lambda a: removed[a][0])
        path.append(pair)
    who = "left" if side == "left" else "right"
    reason = (f"{show(label)} of the {who} process is not matched"
              + (" weakly" if weak else ""))
    return Counterexample(pair, reason, tuple(path), label)


def simulation_build(p: Proc, q: Proc, weak: bool = False,
                     budget: int = DEFAULT_BUDGET):
    """Search for a (weak) simulation of ``p`` by ``q`` containing ``(p, q)``."""
    return _build_sim(p, q, weak, False, budget)


def bisimulation_build(p: Proc, q: Proc, weak: bool = False,
                       budget: int = DEFAULT_BUDGET):
    return _build_sim(p, q, weak, True, budget)


def check_simulation(rel: Relation, budget: int = DEFAULT_BUDGET) -> CheckResult:
    """Verify a (bi)simulation relation pair by pair."""
    kind = rel.kind
    if kind not in ("simulation", "bisimulation", "weak-simulation",
                    "weak-bisimulation"):
        raise ValueError(f"not a (bi)simulation kind: {kind!r}")
    weak = kind.startswith("weak-")
    symmetric = kind.endswith("bisimulation")
    pairs = rel.pairs
    for s1, s2 in rel.sorted_pairs():
        p, q = Proc(rel.lts1, s1), Proc(rel.lts2, s2)
        for label, t1 in p.moves():
            if not any((t1, t2) in pairs for t2 in _matches(q, label, weak, budget)):
                return CheckResult(False, f"{show(label)} of the left process "
                                   "is not matched inside the relation", (s1, s2))
        if symmetric:
            for label, t2 in q.moves():
                if not any((t1, t2) in pairs
                           for t1 in _matches(p, label, weak, budget)):
                    return CheckResult(False, f"{show(label)} of the right "
                                       "process is not matched inside the "
                                       "relation", (s1, s2))
    return CheckResult(True)


simulation_check = check_simulation
bisimulation_check = check_simulation


# -- relation files -------------------------------------------------------------

def dump_relation(rel: Relation) -> str:
    lines = [f"# {getattr(rel.kind, 'name', rel.kind)}"]
    lines += [f"{show(a)}\t{show(b)}" for a, b in rel.sorted_pairs()]
    return "\n".join(lines) + "\n"


def parse_relation(text: str, kind, lts1: Lts, lts2: Lts,
                   read_left: Callable[[str], Any] = str,
                   read_right: Callable[[str], Any] = str) -> Relation:
    """Read a hand-written relation: one ``left<TAB>right`` pair per line."""
    pairs = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = raw.rstrip("\r\n").split("\t")
        if len(cols) != 2:
            raise ValueError(f"line {lineno}: expected two tab-separated states")
        pairs.add((read_left(cols[0].strip()), read_right(cols[1].strip())))
    return Relation(kind, lts1, lts2, frozenset(pairs))
