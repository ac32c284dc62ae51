import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import NONNET_FILES, PROOF_FILES, corpus_structures, load_proof, load_structure
from netgen import random_mll_structure
from ndmall.correctness import is_proof_net
from ndmall.formula import parse_formula as F
from ndmall.sequent import (
    RULES,
    DesequentializationError,
    ProofSyntaxError,
    RemovalError,
    RuleError,
    SearchBudgetExceeded,
    SequentializationFailed,
    SequentProof,
    apply_rule,
    ax,
    check_proof,
    desequentialize,
    desequentialize_with_order,
    ex,
    is_terminal,
    nwith,
    parse_proof,
    print_proof,
    removal,
    sequentialize,
    tensor,
)
from ndmall.structure import Kind, validate
from ndmall.weights import Monomial

NWITH_RIGHT = "(nwith 1 (ax ~x) (ax ~x))"


def test_check_examples():
    assert check_proof(ax(F("a")))
    p = parse_proof(NWITH_RIGHT)
    assert check_proof(p)
    assert [str(f) for f in p.conclusion] == ["~x", "(x ^ x)"]


def test_tensor_with_overlapping_context_rejected():
    a, b = ax(F("a")), ax(F("b"))
    good = tensor(0, 0, a, b)
    # a conclusion that reuses ~a twice does not partition the context
    bad = SequentProof("tensor", (0, 0), (F("(a * b)"), F("~a"), F("~a")), (a, b))
    assert check_proof(good)
    res = check_proof(bad)
    assert not res and res.diagnostics


def test_rule_errors():
    a = ax(F("a"))
    with pytest.raises(RuleError):
        apply_rule("par", (5,), [a.conclusion])
    with pytest.raises(RuleError):
        apply_rule("cut", (F("a"), 0, 0), [a.conclusion, a.conclusion])
    with pytest.raises(RuleError):
        apply_rule("with", (0,), [a.conclusion, ax(F("b")).conclusion])
    with pytest.raises(RuleError):
        apply_rule("ex", ((0, 0),), [a.conclusion])
    with pytest.raises(DesequentializationError):
        desequentialize(SequentProof("ax", (F("a"),), (F("a"), F("a")), ()))


def test_desequentialize_axiom():
    s = desequentialize(ax(F("a")))
    assert [l.kind for l in s.links.values()] == [Kind.ID]


def test_desequentialize_nwith_superposes_context():
    s = desequentialize(parse_proof(NWITH_RIGHT))
    assert validate(s).ok
    (n,) = [l for l in s.links.values() if l.kind is Kind.NWITH]
    ids = [l for l in s.links.values() if l.kind is Kind.ID]
    assert len(ids) == 2
    shared = set(ids[0].conclusions) & set(ids[1].conclusions)
    assert len(shared) == 1 and str(s.occurrences[shared.pop()]) == "~x"
    assert sorted(l.weight for l in ids) == sorted([Monomial.var(n.id), Monomial.var(n.id, False)])


def test_desequentialize_with_plus_net():
    s = desequentialize(parse_proof("(with 0 (plus1 1 b (ax ~a)) (plus2 1 a (ax ~b)))"))
    assert validate(s).ok and is_proof_net(s).is_net
    assert sorted(str(f) for f in s.conclusion_formulas()) == ["(a + b)", "(~a & ~b)"]


def test_removal_examples():
    s = desequentialize(parse_proof("(par 0 (ax a))"))
    (p,) = [l for l in s.links.values() if l.kind is Kind.PAR]
    (part,) = removal(s, p.id).parts
    assert [l.kind for l in part.links.values()] == [Kind.ID]

    s = desequentialize(parse_proof(NWITH_RIGHT))
    (n,) = s.eigenweights
    parts = removal(s, n).parts
    assert len(parts) == 2
    for part in parts:
        assert [l.kind for l in part.links.values()] == [Kind.ID]
        assert all(l.weight.is_one for l in part.links.values())

    loop = load_structure(next(p for p in NONNET_FILES if p.stem == "tensor-loop"))
    with pytest.raises(RemovalError):
        removal(loop, 2)


def test_removal_preconditions():
    s = desequentialize(parse_proof("(par 0 (tensor 0 0 (ax a) (ax b)))"))
    (t,) = [l for l in s.links.values() if l.kind is Kind.TENSOR]
    assert not is_terminal(s, t.id)
    with pytest.raises(RemovalError):
        removal(s, t.id)
    with pytest.raises(RemovalError):
        removal(s, 99)
    (i,) = [l for l in s.links.values() if l.kind is Kind.ID][:1]
    with pytest.raises(RemovalError):
        removal(s, i.id)
    assert removal(desequentialize(ax(F("a"))), 1).is_base

    s = desequentialize(parse_proof(NWITH_RIGHT))
    weighted = [l for l in s.links.values() if not l.weight.is_one][0]
    with pytest.raises(RemovalError):
        removal(s, weighted.id)


def test_sequentialize_examples():
    p = sequentialize(desequentialize(ax(F("a"))))
    assert p.rule == "ax"
    p = sequentialize(desequentialize(parse_proof(NWITH_RIGHT)))
    assert p.rule == "nwith" or (p.rule == "ex" and p.premises[0].rule == "nwith")
    loop = load_structure(next(x for x in NONNET_FILES if x.stem == "tensor-loop"))
    with pytest.raises(SequentializationFailed) as err:
        sequentialize(loop)
    assert err.value.trace


def test_sequentialize_budget():
    s = desequentialize(load_proof(next(p for p in PROOF_FILES if p.stem == "move-relation-m1")))
    with pytest.raises(SearchBudgetExceeded):
        sequentialize(s, budget=1)


def test_proof_syntax_errors():
    with pytest.raises(ProofSyntaxError) as err:
        parse_proof("(par 0\n  (ax a)\n  (bogus))")
    assert err.value.line == 3
    with pytest.raises(ProofSyntaxError):
        parse_proof("(ax a) (ax b)")
    with pytest.raises(ProofSyntaxError):
        parse_proof("(par 3 (ax a))")
    with pytest.raises(ProofSyntaxError):
        parse_proof("(ax ~(a * b))")


def test_corpus_covers_every_rule():
    used = Counter()
    for path in PROOF_FILES:
        p = load_proof(path)
        for r in p.rules_used():
            used[r] += 1
    assert set(used) == set(RULES)
    assert used["nwith"] >= 5
    assert len(PROOF_FILES) >= 30


@pytest.mark.parametrize("path", PROOF_FILES, ids=[p.stem for p in PROOF_FILES])
def test_corpus_round_trip(path):
    p = load_proof(path)
    assert check_proof(p)
    assert parse_proof(print_proof(p)) == p
    assert parse_proof(print_proof(p, annotate=False)) == p
    s, order = desequentialize_with_order(p)
    assert validate(s).ok
    assert is_proof_net(s).is_net
    assert tuple(s.occurrences[o] for o in order) == p.conclusion
    assert sorted(order) == s.conclusions()


@pytest.mark.parametrize("path", PROOF_FILES, ids=[p.stem for p in PROOF_FILES])
def test_sequentialize_recovers_conclusions(path):
    s = desequentialize(load_proof(path))
    q = sequentialize(s)
    assert check_proof(q)
    assert q.conclusion == s.conclusion_formulas()
    assert desequentialize(q).conclusion_formulas() == s.conclusion_formulas()


@pytest.mark.parametrize("path", PROOF_FILES, ids=[p.stem for p in PROOF_FILES])
def test_removal_parts_are_valid(path):
    s = desequentialize(load_proof(path))
    for lid in sorted(s.links):
        if not is_terminal(s, lid):
            continue
        try:
            res = removal(s, lid)
        except RemovalError:
            continue
        for part in res.parts:
            assert validate(part).ok
        link = s.links[lid]
        if link.kind in (Kind.WITH, Kind.NWITH):
            gamma = Counter(s.occurrences[o] for o in s.conclusions() if o != link.conclusions[0])
            for part, prem in zip(res.parts, link.premises):
                assert Counter(part.conclusion_formulas()) == gamma + Counter([s.occurrences[prem]])


SMALL = [(n, s) for n, s in corpus_structures() if validate(s).ok and len(s.links) <= 12]


@pytest.mark.parametrize("name,s", SMALL, ids=[n for n, _ in SMALL])
def test_sequentialize_iff_net(name, s):
    try:
        sequentialize(s)
        seq = True
    except SequentializationFailed:
        seq = False
    assert seq == is_proof_net(s).is_net


@given(st.integers(0, 10 ** 6))
@settings(max_examples=150, deadline=None)
def test_sequentialize_iff_net_random_mll(seed):
    rng = random.Random(seed)
    s = random_mll_structure(rng, rng.randint(1, 4), rng.randint(0, 7))
    assert validate(s).ok
    try:
        sequentialize(s)
        seq = True
    except SequentializationFailed:
        seq = False
    assert seq == is_proof_net(s).is_net


def test_exchange_is_a_permutation():
    p = ex((1, 0), ax(F("a")))
    assert [str(f) for f in p.conclusion] == ["~a", "a"]
    q = nwith(0, ax(F("a")), ax(F("a")))
    assert check_proof(q)


def test_rule_errors_are_distinguished_from_syntax_errors():
    from ndmall.sequent import ProofRuleError
    with pytest.raises(ProofRuleError) as e:
        parse_proof("(par 0\n  (with 0 (ax a) (ax b)))")
    assert e.value.line == 2
    with pytest.raises(ProofSyntaxError) as e:
        parse_proof("(par 0 (ax a)")
    assert not isinstance(e.value, ProofRuleError)
