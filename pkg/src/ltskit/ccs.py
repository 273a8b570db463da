"""CCS: syntax, parser, and semantics as a lazy transition relation.

Concrete syntax (loosest to tightest binding)::

    P ::= P "|" P  |  P "+" P  |  P "\\" name  |  pfx "." P
        | "rec" X "." P  |  X  |  "0"  |  "(" P ")"
    pfx ::= "?" name  |  "!" name  |  "tau"

``rec`` extends as far to the right as possible. Recursion must be
guarded: every occurrence of a recursion variable sits under a prefix.

The semantics reuses the generic relational operators: choice is a union
of relations, parallel composition is relational parallel composition
with its pair states rebuilt into ``Par`` terms, and ``Then`` (semantic
sequencing lifted into the syntax) is relational sequencing rebuilt into
``Then`` terms.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .errors import (ClosednessError, CcsSyntaxError, DomainError,
                     UnguardedRecursion)
from .lts import LabelKind, Lts, Proc
from .relcalc import Cardinality, Rel, rel_map, rel_par, rel_seq, rel_union

IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
KEYWORDS = {"rec", "tau"}


# -- labels -----------------------------------------------------------------

class Prefix:
    """A CCS action label."""


@dataclass(frozen=True)
class In(Prefix):
    name: str

    def __str__(self):
        return f"?{self.name}"


@dataclass(frozen=True)
class Out(Prefix):
    name: str

    def __str__(self):
        return f"!{self.name}"


@dataclass(frozen=True)
class Tau(Prefix):
    @property
    def name(self):
        return None

    def __str__(self):
        return "tau"


TAU = Tau()


def classify(label: Prefix) -> LabelKind:
    if isinstance(label, In):
        return LabelKind.INPUT
    if isinstance(label, Out):
        return LabelKind.OUTPUT
    return LabelKind.INTERNAL


def syncp(l1: Prefix, l2: Prefix) -> bool:
    """True when one label is ``?a`` and the other ``!a``."""
    return ((isinstance(l1, In) and isinstance(l2, Out)
             or isinstance(l1, Out) and isinstance(l2, In))
            and l1.name == l2.name)


def sync_label(_label: Prefix) -> Prefix:
    return TAU


def dual(label: Prefix) -> Prefix:
    if isinstance(label, In):
        return Out(label.name)
    if isinstance(label, Out):
        return In(label.name)
    return label


# -- terms ------------------------------------------------------------------

class Term:
    """Base class of CCS terms.

    Equality and hashing are structural up to renaming of ``rec``-bound
    variables (terms are compared on a de Bruijn-indexed key).
    """

    def _key(self, env: tuple) -> tuple:
        raise NotImplementedError

    def key(self) -> tuple:
        try:
            return self.__dict__["_closed_key"]
        except KeyError:
            k = self._key(())
            object.__setattr__(self, "_closed_key", k)
            return k

    def _sub_key(self, env: tuple) -> tuple:
        return self.key() if not self.free_vars else self._key(env)

    @property
    def free_vars(self) -> frozenset:
        try:
            return self.__dict__["_fv"]
        except KeyError:
            fv = self._free_vars()
            object.__setattr__(self, "_fv", fv)
            return fv

    def _free_vars(self) -> frozenset:
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash(self.key())
            object.__setattr__(self, "_hash", h)
            return h

    def __repr__(self):
        return f"<{type(self).__name__} {self}>"


@dataclass(frozen=True, eq=False, repr=False)
class Nil(Term):
    def _key(self, env):
        return ("0",)

    def _free_vars(self):
        return frozenset()

    def __str__(self):
        return "0"


@dataclass(frozen=True, eq=False, repr=False)
class Seq(Term):
    """Prefix-guarded sequence ``pfx.cont``."""

    prefix: Prefix
    cont: Term

    def _key(self, env):
        return ("seq", self.prefix, self.cont._sub_key(env))

    def _free_vars(self):
        return self.cont.free_vars

    def __str__(self):
        return f"{self.prefix}.{self.cont}"


@dataclass(frozen=True, eq=False, repr=False)
class _Binary(Term):
    left: Term
    right: Term
    _tag = ""
    _op = ""

    def _key(self, env):
        return (self._tag, self.left._sub_key(env), self.right._sub_key(env))

    def _free_vars(self):
        return self.left.free_vars | self.right.free_vars

    def __str__(self):
        return f"({self.left} {self._op} {self.right})"


@dataclass(frozen=True, eq=False, repr=False)
class Plus(_Binary):
    _tag = "plus"
    _op = "+"


@dataclass(frozen=True, eq=False, repr=False)
class Par(_Binary):
    _tag = "par"
    _op = "|"


@dataclass(frozen=True, eq=False, repr=False)
class Then(_Binary):
    """Sequential composition: ``left`` runs until stuck, then ``right``.

    Not part of the concrete syntax; built programmatically.
    """

    _tag = "then"
    _op = ";"


@dataclass(frozen=True, eq=False, repr=False)
class Rec(Term):
    var: str
    body: Term

    def _key(self, env):
        return ("rec", self.body._key((self.var,) + env)
                if self.body.free_vars else self.body.key())

    def _free_vars(self):
        return self.body.free_vars - {self.var}

    def __str__(self):
        return f"(rec {self.var}. {self.body})"


@dataclass(frozen=True, eq=False, repr=False)
class Var(Term):
    name: str

    def _key(self, env):
        if self.name in env:
            return ("bv", env.index(self.name))
        return ("fv", self.name)

    def _free_vars(self):
        return frozenset((self.name,))

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=False, repr=False)
class Del(Term):
    """Delimitation (restriction) of channel ``name`` in ``body``."""

    name: str
    body: Term

    def _key(self, env):
        return ("del", self.name, self.body._sub_key(env))

    def _free_vars(self):
        return self.body.free_vars

    def __str__(self):
        return f"({self.body} \\ {self.name})"


NIL = Nil()


# -- substitution, guardedness ------------------------------------------------

_fresh_counter = itertools.count()


def _fresh(avoid: frozenset, base: str) -> str:
    while True:
        name = f"{base}_{next(_fresh_counter)}"
        if name not in avoid:
            return name


def substitute(body: Term, var: str, replacement: Term) -> Term:
    """Capture-avoiding substitution of ``replacement`` for free ``var``."""
    if var not in body.free_vars:
        return body
    if isinstance(body, Var):
        return replacement
    if isinstance(body, Seq):
        return Seq(body.prefix, substitute(body.cont, var, replacement))
    if isinstance(body, _Binary):
        return type(body)(substitute(body.left, var, replacement),
                          substitute(body.right, var, replacement))
    if isinstance(body, Del):
        return Del(body.name, substitute(body.body, var, replacement))
    if isinstance(body, Rec):
        # body.var != var here, otherwise var would not be free.
        inner, bound = body.body, body.var
        if bound in replacement.free_vars:
            new = _fresh(replacement.free_vars | inner.free_vars, bound)
            inner = substitute(inner, bound, Var(new))
            bound = new
        return Rec(bound, substitute(inner, var, replacement))
    raise TypeError(f"not a CCS term: {body!r}")


def _unguarded(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, (Nil, Seq)):
        return frozenset()
    if isinstance(t, _Binary):
        return _unguarded(t.left) | _unguarded(t.right)
    if isinstance(t, Del):
        return _unguarded(t.body)
    if isinstance(t, Rec):
        return _unguarded(t.body) - {t.var}
    raise TypeError(f"not a CCS term: {t!r}")


def subterms(t: Term):
    yield t
    if isinstance(t, Seq):
        yield from subterms(t.cont)
    elif isinstance(t, _Binary):
        yield from subterms(t.left)
        yield from subterms(t.right)
    elif isinstance(t, (Rec, Del)):
        yield from subterms(t.body)


def check_guarded(t: Term) -> None:
    for sub in subterms(t):
        if isinstance(sub, Rec) and sub.var in _unguarded(sub.body):
            raise UnguardedRecursion(
                f"recursion variable {sub.var} is not guarded by a prefix in {sub}")


def finite_state(t: Term) -> bool:
    """Sufficient test for ``t`` having finitely many reachable states.

    Fails when a parallel, sequential or delimitation operator encloses a
    recursion variable bound outside it, since unfolding then nests the
    operator without bound.
    """
    def walk(t: Term, bound: frozenset) -> bool:
        if isinstance(t, (Par, Then, Del)) and t.free_vars & bound:
            return False
        if isinstance(t, Rec):
            return walk(t.body, bound | {t.var})
        if isinstance(t, Seq):
            return walk(t.cont, bound)
        if isinstance(t, _Binary):
            return walk(t.left, bound) and walk(t.right, bound)
        if isinstance(t, Del):
            return walk(t.body, bound)
        return True

    return walk(t, frozenset())


def validate(t: Term) -> Term:
    """Reject open or unguarded terms; returns ``t`` unchanged."""
    if t.free_vars:
        names = ", ".join(sorted(t.free_vars))
        raise ClosednessError(f"unbound recursion variable(s): {names}")
    check_guarded(t)
    return t


# -- parser -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<sym>[?!.+|\\()0]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise CcsSyntaxError(f"unexpected character {text[bad]!r}", text, bad)
        start = m.start(m.lastgroup)
        tokens.append((m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("<end>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def fail(self, expected):
        tok = self.peek()
        what = "end of input" if tok == "<end>" else repr(tok)
        raise CcsSyntaxError(f"unexpected {what}", self.text, self.pos(), expected)

    def expect(self, tok: str):
        if self.peek() != tok:
            self.fail([repr(tok)])
        self.i += 1

    def name(self) -> str:
        tok = self.peek()
        if IDENT.fullmatch(tok) and tok not in KEYWORDS:
            self.i += 1
            return tok
        self.fail(["identifier"])

    def parse(self) -> Term:
        t = self.par()
        if self.peek() != "<end>":
            self.fail(["'|'", "'+'", "'\\'", "end of input"])
        return t

    def par(self) -> Term:
        t = self.plus()
        while self.peek() == "|":
            self.i += 1
            t = Par(t, self.plus())
        return t

    def plus(self) -> Term:
        t = self.restr()
        while self.peek() == "+":
            self.i += 1
            t = Plus(t, self.restr())
        return t

    def restr(self) -> Term:
        t = self.prefixed()
        while self.peek() == "\\":
            self.i += 1
            t = Del(self.name(), t)
        return t

    def prefixed(self) -> Term:
        tok = self.peek()
        if tok in ("?", "!"):
            self.i += 1
            n = self.name()
            pfx = In(n) if tok == "?" else Out(n)
        elif tok == "tau":
            self.i += 1
            pfx = TAU
        elif tok == "rec":
            self.i += 1
            var = self.name()
            self.expect(".")
            return Rec(var, self.par())
        else:
            return self.atom()
        self.expect(".")
        return Seq(pfx, self.prefixed())

    def atom(self) -> Term:
        tok = self.peek()
        if tok == "0":
            self.i += 1
            return NIL
        if tok == "(":
            self.i += 1
            t = self.par()
            self.expect(")")
            return t
        if IDENT.fullmatch(tok) and tok not in KEYWORDS:
            self.i += 1
            return Var(tok)
        self.fail(["'0'", "'('", "'?'", "'!'", "'tau'", "'rec'", "identifier"])


def parse(text: str) -> Term:
    """Parse CCS concrete syntax into a closed, guarded term."""
    return validate(_Parser(text).parse())


# -- semantics --------------------------------------------------------------

def _image(t: Term):
    if isinstance(t, Nil):
        return ()
    if isinstance(t, Seq):
        return ((t.prefix, t.cont),)
    if isinstance(t, Plus):
        return _PLUS.image(t)
    if isinstance(t, Par):
        return _PAR.image(t)
    if isinstance(t, Then):
        return _THEN.image(t)
    if isinstance(t, Rec):
        return TRANS.image(substitute(t.body, t.var, t))
    if isinstance(t, Del):
        return {(l, Del(t.name, b)) for l, b in TRANS.image(t.body)
                if l.name != t.name}
    if isinstance(t, Var):
        raise ClosednessError(f"free recursion variable {t.name} reached the semantics")
    raise TypeError(f"not a CCS term: {t!r}")


def _split(kind):
    def split(t):
        if not isinstance(t, kind):
            raise DomainError(f"{t!r} is not a {kind.__name__} term")
        return t.left, t.right
    return split


TRANS = Rel(_image, Cardinality.FINITE_BRANCHING, name="ccs")

# Each branch of a choice contributes its own moves, discarding the other.
_PLUS = rel_union(Rel(lambda t: TRANS.image(t.left), memoize=False),
                  Rel(lambda t: TRANS.image(t.right), memoize=False),
                  memoize=False)
_PAR = rel_map(rel_par(TRANS, TRANS, syncp, sync_label, memoize=False),
               lambda pq: Par(*pq), _split(Par), memoize=False)
_THEN = rel_map(rel_seq(TRANS, TRANS, memoize=False),
                lambda pq: Then(*pq), _split(Then), memoize=False)

CCS = Lts(TRANS, classify, syncp, sync_label, internal_label=TAU,
          finite_state=finite_state, name="CCS")


def ccs_image(t: Term) -> frozenset:
    """The ``(prefix, continuation)`` pairs of ``t``."""
    return TRANS.image(t)


def ccs_lts() -> Lts:
    return CCS


def process(term: Term | str) -> Proc:
    """CCS process from a term or its concrete syntax."""
    if isinstance(term, str):
        term = parse(term)
    return CCS.process(term)
