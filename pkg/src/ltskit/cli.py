"""Command-line front end.

Sources and operators form a chain evaluated left to right on a stack:

* ``--ccs TERM`` and ``--triples FILE --root STATE`` push a process;
* ``--async`` and ``--filter KIND`` transform the process on top;
* ``--par`` / ``--seq`` combine the two topmost processes, or, when only
  one is available, combine it with the next source as soon as it is read.

So ``--ccs A --par --ccs B`` is ``A ||| B``, while
``--ccs A --async --ccs B --async --par --filter internal`` filters the
parallel composition of the two asynchronous processes.

Exit codes: 0 relation found / success, 1 counterexample or failed check,
2 input error, 3 refused operation, 4 budget exhausted.
"""

from __future__ import annotations

import argparse
import sys
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from . import behrel, ccs
from .errors import BudgetExhausted, LtsError, RefusedOperation
from .lts import DEFAULT_BUDGET, LabelKind, Lts, Proc, explore, lts_from_triples, show

EXIT_OK, EXIT_CEX, EXIT_INPUT, EXIT_REFUSED, EXIT_BUDGET = 0, 1, 2, 3, 4

KINDS = {"in": LabelKind.INPUT, "out": LabelKind.OUTPUT, "tau": LabelKind.INTERNAL}


class InputError(Exception):
    pass


@dataclass
class SourceSpec:
    kind: str                   # "ccs-term" or "triples-file"
    payload: str
    root: str | None = None


# -- triples files ------------------------------------------------------------

def _channel(label: str) -> str:
    return label[1:] if label[:1] in "?!" else label


def load_triples(path) -> Lts:
    """Load a ``src<TAB>label<TAB>dst[<TAB>in|out|tau]`` file.

    Rows tagged ``in``/``out`` synchronise when their labels name the same
    channel once a leading ``?`` or ``!`` is dropped; a synchronisation
    emits the file's internal label (``tau`` if it has none).
    """
    triples = set()
    kinds: dict[str, LabelKind] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        cols = [c.strip() for c in raw.split("\t")]
        if len(cols) not in (3, 4) or not all(cols):
            raise InputError(f"{path}:{lineno}: expected 'src<TAB>label<TAB>dst"
                             "[<TAB>in|out|tau]'")
        src, label, dst = cols[:3]
        if len(cols) == 4:
            if cols[3] not in KINDS:
                raise InputError(f"{path}:{lineno}: unknown label kind {cols[3]!r}")
            kind = KINDS[cols[3]]
            if kinds.get(label, kind) is not kind:
                raise InputError(f"{path}:{lineno}: label {label!r} classified twice")
            kinds[label] = kind
        triples.add((src, label, dst))

    taus = sorted(l for l, k in kinds.items() if k is LabelKind.INTERNAL)
    internal = taus[0] if taus else None
    hooks = {}
    if any(k in (LabelKind.INPUT, LabelKind.OUTPUT) for k in kinds.values()):
        def syncp(l1, l2):
            k1, k2 = kinds.get(l1), kinds.get(l2)
            return ({k1, k2} == {LabelKind.INPUT, LabelKind.OUTPUT}
                    and _channel(l1) == _channel(l2))
        emitted = internal or "tau"
        hooks = dict(syncp=syncp, sync_label=lambda _l: emitted)
    return lts_from_triples(sorted(triples), kinds, internal_label=internal, **hooks)


# -- chain evaluation ---------------------------------------------------------

class _Chain(argparse.Action):
    """Record chain tokens in command-line order."""

    def __call__(self, parser, namespace, values, option_string=None):
        chain = getattr(namespace, "chain", None)
        if chain is None:
            chain = []
            namespace.chain = chain
        chain.append((self.dest, values))


def _add_chain_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("sources and operators (evaluated in order)")
    g.add_argument("--ccs", dest="ccs", action=_Chain, metavar="TERM")
    g.add_argument("--triples", dest="triples", action=_Chain, metavar="FILE")
    g.add_argument("--root", dest="root", action=_Chain, metavar="STATE")
    g.add_argument("--async", dest="async", action=_Chain, nargs=0)
    g.add_argument("--par", dest="par", action=_Chain, nargs=0)
    g.add_argument("--seq", dest="seq", action=_Chain, nargs=0)
    g.add_argument("--filter", dest="filter", action=_Chain,
                   metavar="KIND", help="internal, input, output or label=TEXT")
    p.set_defaults(chain=None)


@dataclass
class _Item:
    proc: Proc | None
    spec: SourceSpec
    plain: bool = True          # untransformed source


def _label_text(label) -> str:
    return show(label)


def _keep(kind: str, lts: Lts):
    if kind == "internal":
        return lambda l: lts.classify(l) is LabelKind.INTERNAL
    if kind == "input":
        return lambda l: lts.classify(l) is LabelKind.INPUT
    if kind == "output":
        return lambda l: lts.classify(l) is LabelKind.OUTPUT
    if kind.startswith("label="):
        text = kind[len("label="):]
        return lambda l: _label_text(l) == text
    raise InputError(f"unknown filter kind {kind!r}")


def _load(spec: SourceSpec) -> Proc:
    if spec.kind == "ccs-term":
        return ccs.process(ccs.parse(spec.payload))
    if spec.root is None:
        raise InputError(f"--triples {spec.payload} needs a --root")
    try:
        lts = load_triples(spec.payload)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    return lts.process(spec.root)


def evaluate_chain(chain) -> list[_Item]:
    stack: list[_Item] = []
    pending: list[str] = []

    def finish_source():
        top = stack[-1]
        if top.proc is None:
            top.proc = _load(top.spec)
            while pending:
                right = stack.pop()
                left = stack.pop()
                stack.append(_combine(pending.pop(), left, right))

    for op, value in chain:
        if op == "root":
            if not stack or stack[-1].spec.kind != "triples-file" \
                    or stack[-1].proc is not None:
                raise InputError("--root must directly follow --triples")
            stack[-1].spec.root = value
            finish_source()
            continue
        if stack and stack[-1].proc is None:
            finish_source()     # reports the missing --root
        if op == "ccs":
            stack.append(_Item(None, SourceSpec("ccs-term", value)))
            finish_source()
        elif op == "triples":
            stack.append(_Item(None, SourceSpec("triples-file", value)))
        elif op in ("par", "seq"):
            if len(stack) >= 2 and not pending:
                right = stack.pop()
                left = stack.pop()
                stack.append(_combine(op, left, right))
            elif len(stack) == 1 and not pending:
                pending.append(op)
            else:
                raise InputError(f"--{op} needs a process on its left")
        elif op == "async":
            top = _top(stack, op)
            stack[-1] = _Item(top.proc.asynchronous(), top.spec, False)
        elif op == "filter":
            top = _top(stack, op)
            keep = _keep(value, top.proc.lts)
            stack[-1] = _Item(top.proc.filter(keep), top.spec, False)
    if stack and stack[-1].proc is None:
        finish_source()
    if pending:
        raise InputError(f"--{pending[0]} is missing its right-hand source")
    return stack


def _top(stack, op) -> _Item:
    if not stack:
        raise InputError(f"--{op} needs a source before it")
    return stack[-1]


def _combine(op: str, left: _Item, right: _Item) -> _Item:
    proc = left.proc.par(right.proc) if op == "par" else left.proc.seq(right.proc)
    return _Item(proc, left.spec, False)


def _single(stack) -> _Item:
    if len(stack) != 1:
        raise InputError(f"expected exactly one process, got {len(stack)}")
    return stack[0]


# -- commands -------------------------------------------------------------------

def _parse_depth(text: str) -> int | None:
    if text.lower() == "unbounded":
        return None
    try:
        n = int(text)
    except ValueError:
        raise InputError(f"invalid depth {text!r}") from None
    if n < 0:
        raise InputError("depth must be non-negative")
    return n


def cmd_dot(args, out, err) -> int:
    item = _single(evaluate_chain(args.chain or []))
    depth = _parse_depth(args.max_depth)
    text = item.proc.to_dot(depth)
    nodes, edges = count_dot(text)
    if args.output and args.output != "-":
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"nodes={nodes} edges={edges}", file=out)
    else:
        out.write(text)
        print(f"nodes={nodes} edges={edges}", file=err)
    return EXIT_OK


def count_dot(text: str) -> tuple[int, int]:
    """Node and edge statement counts of a DOT text written by ``to_dot``."""
    nodes = edges = 0
    for line in text.splitlines():
        line = line.strip()
        if not line.endswith(";"):
            continue
        if _outside_quotes(line, "->"):
            edges += 1
        else:
            nodes += 1
    return nodes, edges


def _outside_quotes(line: str, token: str) -> bool:
    quoted = escaped = False
    for i, ch in enumerate(line):
        if escaped:
            escaped = False
        elif ch == "\\":
            escaped = True
        elif ch == '"':
            quoted = not quoted
        elif not quoted and line.startswith(token, i):
            return True
    return False


def compose_listing(p: Proc, depth: int) -> list[str]:
    """Edges grouped by the BFS level of their source, each level sorted."""
    states, edges = explore(p, depth)
    level = {p.state: 0}
    queue = deque([p.state])
    by_src: dict = {}
    for s, l, t in edges:
        by_src.setdefault(s, []).append((l, t))
    while queue:
        s = queue.popleft()
        for _, t in by_src.get(s, ()):
            if t not in level:
                level[t] = level[s] + 1
                queue.append(t)
    lines = []
    for d in range(depth):
        rows = sorted((show(s), show(l), show(t)) for s, l, t in edges
                      if level[s] == d)
        if not rows:
            break
        lines.append(f"# level {d}")
        lines += [f"{s}  --{l}-->  {t}" for s, l, t in rows]
    return lines


def cmd_compose(args, out, err) -> int:
    item = _single(evaluate_chain(args.chain or []))
    depth = _parse_depth(args.depth)
    if depth is None:
        raise InputError("compose needs a finite --depth")
    for line in compose_listing(item.proc, depth):
        print(line, file=out)
    return EXIT_OK


def _success_label(text: str, p: Proc):
    if p.lts.classify is ccs.classify:
        if text == "tau":
            raise InputError("the success label must not be internal")
        if text[:1] in "?!":
            return ccs.In(text[1:]) if text[0] == "?" else ccs.Out(text[1:])
        return ccs.Out(text)
    return text


def _reader(item: _Item, budget: int):
    """Turn printed states of a relation file back into states of ``item``."""
    if item.plain and item.spec.kind == "ccs-term":
        return ccs.parse
    if item.plain:
        return str
    states, _ = explore(item.proc, None, budget) if item.proc.finite else \
        explore(item.proc, 64, budget)
    table = {show(s): s for s in states}

    def read(text):
        try:
            return table[text]
        except KeyError:
            raise InputError(f"state {text!r} is not reachable from the root") \
                from None
    return read


def cmd_check(args, out, err) -> int:
    stack = evaluate_chain(args.chain or [])
    if len(stack) != 2:
        raise InputError(f"check needs exactly two processes, got {len(stack)}")
    left, right = stack
    p, q = left.proc, right.proc
    budget = args.budget
    relation = args.relation
    if relation in ("sim", "bisim"):
        kind = ("weak-" if args.weak else "") + \
            ("bisimulation" if relation == "bisim" else "simulation")
    elif relation == "io":
        kind = behrel.IO_COMPLIANCE
    elif relation == "progress":
        kind = behrel.PROGRESS
    else:
        kind = behrel.correct_composition(_success_label(args.success, p))

    if args.check_file:
        try:
            text = Path(args.check_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(str(exc)) from exc
        try:
            rel = behrel.parse_relation(text, kind, p.lts, q.lts,
                                        _reader(left, budget), _reader(right, budget))
        except ValueError as exc:
            raise InputError(f"{args.check_file}: {exc}") from exc
        result = rel.check(budget)
        if result:
            print(f"check passed: {len(rel)} pairs", file=out)
            return EXIT_OK
        a, b = result.pair
        print(f"check failed at ({show(a)}, {show(b)}): {result.violation}", file=out)
        return EXIT_CEX

    if relation == "sim":
        verdict = behrel.simulation_build(p, q, args.weak, budget)
    elif relation == "bisim":
        verdict = behrel.bisimulation_build(p, q, args.weak, budget)
    else:
        verdict = behrel.build(kind, p, q, budget)
    if isinstance(verdict, behrel.Relation):
        name = getattr(kind, "name", kind)
        print(f"relation {name}: {len(verdict)} pairs", file=out)
        if args.output:
            Path(args.output).write_text(behrel.dump_relation(verdict), encoding="utf-8")
        return EXIT_OK
    print(f"counterexample: {verdict}", file=out)
    print(f"reason: {verdict.reason}", file=out)
    print("path: " + " ; ".join(f"({show(a)}, {show(b)})" for a, b in verdict.path),
          file=out)
    return EXIT_CEX


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ltskit", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dot", help="export the transition diagram as DOT")
    _add_chain_args(p)
    p.add_argument("--max-depth", default="unbounded",
                   help="number of edges from the root, or 'unbounded'")
    p.add_argument("-o", "--output", help="DOT output file (default: stdout)")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("compose", help="list transitions level by level")
    _add_chain_args(p)
    p.add_argument("--depth", required=True)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("check", help="build or verify a behavioural relation")
    _add_chain_args(p)
    p.add_argument("--relation", required=True,
                   choices=["io", "progress", "correct", "sim", "bisim"])
    p.add_argument("--weak", action="store_true")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--success", default="success")
    p.add_argument("--check-file", metavar="PATH")
    p.add_argument("-o", "--output", help="write the built relation here")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args, out, err)
    except RefusedOperation as exc:
        print(f"refused: {exc}", file=err)
        return EXIT_REFUSED
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=err)
        return EXIT_BUDGET
    except (InputError, LtsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
