import itertools

import pytest

from conftest import corpus_structures
from ndmall.formula import parse_formula
from ndmall.sequent import desequentialize, parse_proof
from ndmall.structure import (
    Kind,
    Link,
    ProofStructure,
    StructureError,
    StructureParseError,
    cut_together,
    parse_structure,
    serialize_structure,
    slice_structure,
    validate,
)
from ndmall.weights import ONE, Monomial

AXIOM = "occ 1 a\nocc 2 ~a\nlink 1 ID prem= conc=1,2 w=1\n"


def deseq(text):
    return desequentialize(parse_proof(text))


def test_single_axiom_is_valid():
    s = parse_structure(AXIOM)
    assert validate(s).ok
    assert s.formula_weight(1) == (ONE,)
    assert [str(f) for f in s.conclusion_formulas()] == ["a", "~a"]


def test_with_premise_of_weight_one_violates_f():
    s = parse_structure(
        "occ 1 a\nocc 2 b\nocc 3 (a & b)\n"
        "link 1 GAX prem=- conc=1 w=1\n"
        "link 2 GAX prem=- conc=2 w=!p3\n"
        "link 3 WITH prem=1,2 conc=3 w=1\n"
    )
    report = validate(s)
    assert "f" in report.conditions()
    assert any(v.condition == "f" and 1 in v.ids for v in report.violations)


def test_overlapping_superposition_violates_g():
    s = parse_structure(
        "occ 1 a\nocc 2 b\nocc 3 (a & b)\nocc 4 c\nocc 5 d\nocc 6 (c & d)\n"
        "link 1 WITH prem=1,2 conc=3 w=1\n"
        "link 2 WITH prem=4,5 conc=6 w=1\n"
        "link 3 GAX prem=- conc=1 w=p1\n"
        "link 4 GAX prem=- conc=2 w=!p1\n"
        "link 5 GAX prem=- conc=4 w=p2\n"
        "link 6 GAX prem=- conc=5 w=!p2\n"
        "link 7 GAX prem=- conc=1 w=p1.!p2\n"
    )
    # p1 and p1.!p2 are unequal but overlap; only the disjointness reading rejects this
    report = validate(s)
    assert "g" in report.conditions()
    assert any(v.condition == "g" and set(v.ids) >= {3, 7} for v in report.violations)


def test_other_violations():
    # a conclusion of weight p only
    s = parse_structure("occ 1 a\nocc 2 b\nocc 3 (a & b)\nlink 1 GAX prem=- conc=1 w=p3\nlink 2 GAX prem=- conc=2 w=!p3\n"
                        "link 3 WITH prem=1,2 conc=3 w=1\nlink 4 GAX prem=- conc=1 w=1\n")
    assert {"f", "g"} <= validate(s).conditions()
    # formula mismatch
    s = parse_structure("occ 1 a\nocc 2 b\nlink 1 ID prem=- conc=1,2 w=1\n")
    assert validate(s).conditions() == {"formula"}
    # premise of two links
    s = parse_structure("occ 1 a\nocc 2 ~a\nocc 3 (a * ~a)\nocc 4 (a @ ~a)\nlink 1 ID prem=- conc=1,2 w=1\n"
                        "link 2 TENSOR prem=1,2 conc=3 w=1\nlink 3 PAR prem=1,2 conc=4 w=1\n")
    assert "a" in validate(s).conditions()
    # weight over an eigenweight that is no &/^ link
    s = parse_structure("occ 1 a\nocc 2 ~a\nlink 1 ID prem=- conc=1,2 w=p1\n")
    assert {"c", "d"} <= validate(s).conditions()
    # literal not below the owner's weight
    s = parse_structure(
        "occ 1 a\nocc 2 b\nocc 3 (a & b)\nocc 4 c\n"
        "link 1 GAX prem=- conc=1 w=p3\nlink 2 GAX prem=- conc=2 w=!p3\nlink 3 WITH prem=1,2 conc=3 w=p4\n"
        "link 4 WITH prem=5,6 conc=7 w=1\nlink 5 GAX prem=- conc=4 w=1\n"
        "occ 5 a\nocc 6 a\nocc 7 (a & a)\nlink 6 GAX prem=- conc=5 w=p4\nlink 7 GAX prem=- conc=6 w=!p4\n"
    )
    assert "e" in validate(s).conditions()


def test_formula_weights_of_additive_nets():
    s = deseq("(with 0 (plus1 1 b (ax ~a)) (plus2 1 a (ax ~b)))")  # |- ~a & ~b, a + b
    assert validate(s).ok
    (w,) = [l for l in s.links.values() if l.kind is Kind.WITH]
    left, right = w.premises
    assert s.formula_weight(left) == (Monomial.var(w.id),)
    assert s.formula_weight(right) == (Monomial.var(w.id, False),)
    shared = [o for o in s.conclusions() if str(s.occurrences[o]) == "(a + b)"][0]
    assert sorted(s.formula_weight(shared)) == sorted([Monomial.var(w.id), Monomial.var(w.id, False)])


def test_slice_keeps_one_branch():
    s = deseq("(nwith 1 (ax ~x) (ax ~x))")
    (n,) = s.eigenweights
    left, right = s.links[n].premises
    sl = slice_structure(s, {n: 1})
    assert left in sl.occurrences and right not in sl.occurrences
    assert sl.additive_premise[n] == left
    assert len([l for l in sl.links if s.links[l].kind is Kind.ID]) == 1


def test_slice_without_eigenweights_is_everything():
    s = deseq("(par 1 (tensor 0 0 (ax a) (ax b)))")
    sl = slice_structure(s, {})
    assert sl.links == frozenset(s.links) and sl.occurrences == frozenset(s.occurrences)


def test_slice_of_with_over_axioms():
    s = deseq("(with 0 (ax a) (ax a))")  # |- (a & a), ~a
    (w,) = s.eigenweights
    for bit in (0, 1):
        sl = slice_structure(s, {w: bit})
        kinds = sorted(s.links[l].kind.value for l in sl.links)
        assert kinds == ["ID", "WITH"]


def test_conclusion_examples():
    assert len(parse_structure(AXIOM).conclusions()) == 2
    assert [str(f) for f in deseq("(par 0 (ax a))").conclusion_formulas()] == ["(a @ ~a)"]
    s = deseq("(cut a 0 0 (ax a) (ax ~a))")
    assert sorted(str(f) for f in s.conclusion_formulas()) == ["a", "~a"]


def test_parse_serialize_round_trip():
    s = parse_structure(AXIOM)
    text = serialize_structure(s)
    assert parse_structure(text) == s
    assert serialize_structure(parse_structure(text)) == text
    assert "prem=-" in text


def test_weight_token():
    s = parse_structure(
        "occ 1 a\nlink 3 GAX prem=- conc=1 w=p3.!p5\n"
    )
    assert s.links[3].weight.as_dict() == {3: True, 5: False}


@pytest.mark.parametrize("text,line", [
    ("occ 1 a\nocc x b\n", 2),
    ("occ 1 a\nlink 1 FOO prem=- conc=1 w=1\n", 2),
    ("# comment\n\nocc 1 (a *\n", 3),
    ("occ 1 a\nlink 1 GAX prem=- conc=1\n", 2),
    ("occ 1 a\nlink 1 GAX prem=- conc=1 w=p2.!p2\n", 2),
    ("occ 1 a\nocc 1 b\n", 2),
    ("bogus\n", 1),
])
def test_parse_errors_carry_lines(text, line):
    with pytest.raises(StructureParseError) as err:
        parse_structure(text)
    assert err.value.line == line


def test_dangling_reference_is_structural():
    with pytest.raises(StructureError):
        ProofStructure({1: parse_formula("a")}, {1: Link(1, Kind.ID, (), (1, 2), ONE)})
    with pytest.raises(StructureParseError):
        parse_structure("occ 1 a\nlink 1 ID prem=- conc=1,2 w=1\n")


def test_cut_together_composes():
    a = parse_structure(AXIOM)
    s = cut_together(a, 1, deseq("(ax ~a)"), 1)
    assert validate(s).ok
    assert len(s.links) == 3
    assert sorted(str(f) for f in s.conclusion_formulas()) == ["a", "~a"]


def test_substitute_drops_dead_material():
    s = deseq("(with 0 (ax a) (ax a))")
    (w,) = s.eigenweights
    t = s.substitute({w: 1}, drop=[w])
    assert all(l.weight.is_one for l in t.links.values())
    assert len(t.links) == 1


def _valuations(s):
    ids = s.eigenweights
    for bits in itertools.product((0, 1), repeat=len(ids)):
        yield dict(zip(ids, bits))


VALID = [(n, s) for n, s in corpus_structures() if validate(s).ok and len(s.eigenweights) <= 12]


@pytest.mark.parametrize("name,s", VALID, ids=[n for n, _ in VALID])
def test_slice_invariants(name, s):
    for v in _valuations(s):
        sl = slice_structure(s, v)
        for o in s.occurrences:
            live = [l for l in s.producers[o] if s.links[l].weight.evaluate(v)]
            assert len(live) == (1 if o in sl.occurrences else 0)
        for lid in sl.links:
            link = s.links[lid]
            if link.kind in (Kind.WITH, Kind.NWITH):
                assert sum(o in sl.occurrences for o in link.premises) == 1
        used = {o for l in sl.links for o in (s.links[l].premises if s.links[l].kind not in (Kind.WITH, Kind.NWITH)
                                               else [sl.additive_premise[l]])}
        concl = sorted(o for o in sl.occurrences if o not in used)
        assert concl == s.conclusions()


def test_every_corpus_structure_parses_and_round_trips():
    for name, s in corpus_structures():
        assert parse_structure(serialize_structure(s)) == s, name
