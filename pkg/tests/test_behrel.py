import pytest

from ltskit import ccs
from ltskit.behrel import (FALSE, IO_COMPLIANCE, PROGRESS, TRUE, Counterexample,
                           Relation, bisimulation_build, build, build_finite,
                           check, check_simulation, correct_composition,
                           dump_relation, parse_relation, simulation_build)
from ltskit.ccs import TAU, Out, parse
from ltskit.errors import BudgetExhausted, RefusedOperation
from ltskit.lts import explore, lts_from_triples

from oracles import random_term, seeded

P = ccs.process


def tau_closure(t):
    """States reachable from ``t`` by internal moves, by direct search."""
    seen, todo = {t}, [t]
    while todo:
        s = todo.pop()
        for l, u in ccs.ccs_image(s):
            if l == TAU and u not in seen:
                seen.add(u)
                todo.append(u)
    return seen


def demanded(a, b):
    out = {(a1, b1) for l1, a1 in ccs.ccs_image(a) for l2, b1 in ccs.ccs_image(b)
           if ccs.syncp(l1, l2)}
    return out | {(x, y) for x in tau_closure(a) for y in tau_closure(b)}


def sim_oracle(p_term, q_term, symmetric):
    """Naive greatest fixpoint over all pairs of reachable states."""
    s1, _ = explore(P(p_term))
    s2, _ = explore(P(q_term))
    rel = {(a, b) for a in s1 for b in s2}

    def ok(a, b, r):
        for l, a1 in ccs.ccs_image(a):
            if not any(m == l and (a1, b1) in r for m, b1 in ccs.ccs_image(b)):
                return False
        if symmetric:
            for l, b1 in ccs.ccs_image(b):
                if not any(m == l and (a1, b1) in r for m, a1 in ccs.ccs_image(a)):
                    return False
        return True

    while True:
        nxt = {(a, b) for a, b in rel if ok(a, b, rel)}
        if nxt == rel:
            return (p_term, q_term) in rel
        rel = nxt


def finite_term(rng, size=5):
    while True:
        t = random_term(rng, size, par=False)
        if ccs.finite_state(t):
            return t


# -- compliance ------------------------------------------------------------------

def test_true_predicate_gives_relation():
    r = build(TRUE, P("!a.0"), P("?a.0"))
    assert isinstance(r, Relation)
    assert r.root in r
    assert check(TRUE, r)


def test_false_predicate_fails_at_root():
    cex = build(FALSE, P("!a.0"), P("?a.0"))
    assert isinstance(cex, Counterexample)
    assert cex.pair == (parse("!a.0"), parse("?a.0"))
    assert cex.path == (cex.pair,)


def test_io_compliance_counterexample():
    cex = build(IO_COMPLIANCE, P("!a.!pay.0"), P("?a.0"))
    assert isinstance(cex, Counterexample)
    assert cex.pair == (parse("!pay.0"), parse("0"))
    assert str(cex) == "Left((!pay.0, 0))"
    assert cex.path[0] == (parse("!a.!pay.0"), parse("?a.0"))
    assert "!pay" in cex.reason


def test_io_compliance_holds():
    r = build(IO_COMPLIANCE, P("!a.0"), P("?a.0"))
    assert len(r) == 2
    assert check(IO_COMPLIANCE, r)


def test_io_compliance_uses_weak_inputs():
    assert IO_COMPLIANCE(P("!a.0"), P("tau.?a.0"))
    assert not IO_COMPLIANCE(P("!a.0"), P("?b.?a.0"))
    assert not IO_COMPLIANCE(P("0"), P("!a.0"))


def test_progress_predicate():
    assert PROGRESS(P("0"), P("0"))
    assert PROGRESS(P("?a.0"), P("!a.0"))
    assert PROGRESS(P("?a.0"), P("tau.0"))
    assert not PROGRESS(P("?a.0"), P("0"))


def test_correct_composition():
    ok = correct_composition(Out("success"))
    assert ok(P("!success.0"), P("0"))
    assert ok(P("?a.!success.0"), P("!a.0"))
    assert not ok(P("0"), P("0"))
    r = build(ok, P("?a.!success.0"), P("!a.0"))
    assert isinstance(r, Relation)


def test_check_empty_relation_passes():
    empty = Relation(IO_COMPLIANCE, ccs.CCS, ccs.CCS, frozenset())
    assert check(IO_COMPLIANCE, empty)


def test_check_rejects_relation_missing_a_pair():
    r = build(TRUE, P("!a.?b.0"), P("?a.!b.0"))
    assert check(TRUE, r)
    for pair in r.pairs - {r.root}:
        res = check(TRUE, r.with_pairs(r.pairs - {pair}))
        assert not res
        assert res.pair is not None


def test_check_reports_failing_predicate():
    r = build(TRUE, P("!a.!pay.0"), P("?a.0"))
    res = check(IO_COMPLIANCE, r.as_kind(IO_COMPLIANCE))
    assert not res
    assert res.pair == (parse("!pay.0"), parse("0"))
    assert not r.as_kind(IO_COMPLIANCE).check()


def test_relation_as_progress_cross_check():
    r = build(IO_COMPLIANCE, P("!a.?b.0"), P("?a.!b.0"))
    assert check(PROGRESS, r.as_kind(PROGRESS))


@pytest.mark.parametrize("seed", range(25))
def test_build_is_sound_on_random_pairs(seed):
    rng = seeded(seed)
    p, q = random_term(rng, 6), random_term(rng, 6)
    res = build(IO_COMPLIANCE, P(p), P(q))
    if isinstance(res, Relation):
        assert check(IO_COMPLIANCE, res)
        assert (p, q) in res
    else:
        assert not IO_COMPLIANCE(P(res.pair[0]), P(res.pair[1]))
        assert res.path[0] == (p, q) and res.path[-1] == res.pair
        for a, b in zip(res.path, res.path[1:]):
            assert b in demanded(*a)


def test_build_budget_is_monotone():
    p, q = P("(rec X. !a.X)").asynchronous(), P("rec Y. ?a.Y").asynchronous()
    with pytest.raises(BudgetExhausted):
        build(IO_COMPLIANCE, p, q, budget=5)
    with pytest.raises(BudgetExhausted):
        build(IO_COMPLIANCE, p, q, budget=50)


def test_build_finite():
    l = lts_from_triples([(0, "x", 1)])
    r = build_finite(TRUE, l.process(0), l.process(0))
    assert len(r) == 1
    with pytest.raises(RefusedOperation):
        build_finite(TRUE, P("0"), P("0"))


def test_relation_file_roundtrip():
    r = build(IO_COMPLIANCE, P("!a.0"), P("?a.0"))
    text = dump_relation(r)
    assert text.splitlines()[0] == "# io-compliance"
    back = parse_relation(text, IO_COMPLIANCE, ccs.CCS, ccs.CCS, parse, parse)
    assert back.pairs == r.pairs
    assert check(IO_COMPLIANCE, back)


def test_relation_file_errors():
    with pytest.raises(ValueError, match="line 2"):
        parse_relation("# x\na b c\n", TRUE, ccs.CCS, ccs.CCS)


# -- (bi)simulation --------------------------------------------------------------

@pytest.mark.parametrize("text", ["0", "!a.?b.0 + tau.0", "rec X. !a.X",
                                  "(!a.0 | ?a.0) \\ a"])
def test_bisimulation_is_reflexive(text):
    r = bisimulation_build(P(text), P(text))
    assert isinstance(r, Relation) and r.kind == "bisimulation"
    assert r.check()


def test_duplicate_choice_is_bisimilar():
    r = bisimulation_build(P("!a.0 + !a.0"), P("!a.0"))
    assert isinstance(r, Relation)
    assert check_simulation(r)


def test_bisimulation_counterexample_label():
    cex = bisimulation_build(P("!a.!b.0"), P("!a.0"))
    assert isinstance(cex, Counterexample)
    assert cex.label == Out("b")
    assert cex.pair == (parse("!b.0"), parse("0"))


def test_simulation_is_not_symmetric():
    assert isinstance(simulation_build(P("!a.0"), P("!a.0 + ?b.0")), Relation)
    assert isinstance(simulation_build(P("!a.0 + ?b.0"), P("!a.0")), Counterexample)
    assert isinstance(bisimulation_build(P("!a.0"), P("!a.0 + ?b.0")), Counterexample)


def test_classic_non_bisimilar_similar_pair():
    p, q = "!a.(?b.0 + ?c.0)", "!a.?b.0 + !a.?c.0"
    assert isinstance(simulation_build(P(q), P(p)), Relation)
    assert isinstance(bisimulation_build(P(p), P(q)), Counterexample)


def test_weak_simulation_absorbs_internal_moves():
    assert isinstance(bisimulation_build(P("tau.!a.0"), P("!a.0")), Counterexample)
    r = bisimulation_build(P("tau.!a.0"), P("!a.0"), weak=True)
    assert isinstance(r, Relation) and r.kind == "weak-bisimulation"
    assert r.check()


def test_check_simulation_rejects_bad_relation():
    bogus = Relation("bisimulation", ccs.CCS, ccs.CCS,
                     frozenset({(parse("!a.0"), parse("0"))}))
    assert not check_simulation(bogus)
    with pytest.raises(ValueError):
        check_simulation(bogus.as_kind("nonsense"))


@pytest.mark.parametrize("seed", range(25))
def test_bisimulation_matches_oracle_and_is_symmetric(seed):
    rng = seeded(1000 + seed)
    p, q = finite_term(rng), finite_term(rng)
    if rng.random() < 0.3:
        q = p
    fwd = bisimulation_build(P(p), P(q))
    back = bisimulation_build(P(q), P(p))
    assert isinstance(fwd, Relation) == sim_oracle(p, q, True)
    assert isinstance(fwd, Relation) == isinstance(back, Relation)
    if isinstance(fwd, Relation):
        swapped = back.with_pairs({(b, a) for a, b in fwd})
        assert check_simulation(swapped)
    sim = simulation_build(P(p), P(q))
    assert isinstance(sim, Relation) == sim_oracle(p, q, False)
