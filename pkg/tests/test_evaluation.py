import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import metrics_by_hand
from semxai.evaluation import (
    AnnotationRecord,
    EmptyEntries,
    MalformedAnnotationFile,
    NoAnnotations,
    average_precision_at_k,
    parse_annotations,
    precision_at_k,
    rde,
    rde_at_k,
    report,
    write_report,
)


def test_precision_examples():
    assert precision_at_k([True, True, True], 3) == 1.0
    assert precision_at_k([True, False, True], 3) == 2 / 3
    assert precision_at_k([False], 1) == 0.0
    assert precision_at_k([True], 3) == 1.0
    assert precision_at_k([], 2) is None


def rec(eid, kind, rank, item, rel):
    return AnnotationRecord(eid, kind, rank, item, rel)


def test_average_precision_examples():
    anns = [rec("x1", "event", 1, "a", True), rec("x2", "event", 1, "b", False)]
    assert average_precision_at_k(anns, "event", 1) == 0.5
    assert average_precision_at_k([rec("x1", "keyword", r, str(r), True) for r in (1, 2, 3)], "keyword", 3) == 1.0
    with pytest.raises(NoAnnotations):
        average_precision_at_k(anns, "keyword", 1)


def test_rde_examples():
    assert rde(["a", "b", "c", "d"]) == 1.0
    assert rde(["a", "b", "a", "c"]) == 0.75
    assert rde(["a", "a", "a"]) == 1 / 3
    with pytest.raises(EmptyEntries):
        rde([])


def test_rde_at_k_examples():
    anns = [rec(e, "event", r, item, True) for e in ("x1", "x2") for r, item in enumerate("xyz", 1)]
    assert rde_at_k(anns, "event", 3) == 0.5
    same_top = [rec(f"e{i}", "event", 1, "top", True) for i in range(4)]
    assert rde_at_k(same_top, "event", 1) == 0.25
    unique = [rec(f"e{i}", "event", r, f"{i}-{r}", True) for i in range(4) for r in (1, 2, 3)]
    assert rde_at_k(unique, "event", 1) == rde_at_k(unique, "event", 3) == 1.0


HAND_CSV = """explanation_id,item_kind,rank,item_id,relevant
x1,event,1,E1,1
x1,event,2,E2,1
x1,event,3,E3,0
x2,event,1,E1,0
x2,event,2,E4,1
x2,event,3,E5,1
x1,keyword,1,car,1
x1,keyword,2,sale,0
x1,keyword,3,gdp,0
x2,keyword,1,car,1
x2,keyword,2,rate,1
x2,keyword,3,sale,1
x1,dataset,1,D1,1
x2,dataset,1,D1,0
"""


def test_two_explanation_hand_report(tmp_path):
    r = report(parse_annotations(HAND_CSV))
    # precision@1: (1 + 0) / 2; precision@3: (2/3 + 2/3) / 2
    assert r.events_avg_precision_at_1 == 0.5
    assert r.events_avg_precision_at_3 == pytest.approx(2 / 3, abs=1e-15)
    assert r.events_rde_at_1 == 0.5  # E1 twice
    assert r.events_rde_at_3 == 5 / 6
    assert r.keywords_avg_precision_at_1 == 1.0
    assert r.keywords_avg_precision_at_3 == pytest.approx((1 / 3 + 1) / 2, abs=1e-15)
    assert r.keywords_rde_at_1 == 0.5
    assert r.keywords_rde_at_3 == 4 / 6
    assert r.datasets_accuracy == 0.5 and r.datasets_rde == 0.5
    assert (r.n_explanations, r.n_entries) == (2, 14)
    write_report(r, tmp_path)
    assert "RDE@3" in (tmp_path / "report.txt").read_text()
    assert len(__import__("json").loads((tmp_path / "report.json").read_text())["table"]) == 10


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("explanation_id,item_kind,rank\n", 1),
    ("explanation_id,item_kind,rank,item_id,relevant\nx,movie,1,a,1\n", 2),
    ("explanation_id,item_kind,rank,item_id,relevant\nx,event,1,a,1\nx,event,4,b,1\n", 3),
    ("explanation_id,item_kind,rank,item_id,relevant\nx,dataset,2,a,1\n", 2),
    ("explanation_id,item_kind,rank,item_id,relevant\nx,event,1,a,yes\n", 2),
    ("explanation_id,item_kind,rank,item_id,relevant\nx,event,1,a,1\nx,event,1,b,0\n", 3),
    ("explanation_id,item_kind,rank,item_id,relevant\n", 1),
])
def test_malformed_files_report_line(text, line):
    with pytest.raises(MalformedAnnotationFile) as err:
        parse_annotations(text)
    assert err.value.line == line


def random_annotations(rng):
    pool = [f"i{j}" for j in range(rng.randint(1, 8))]
    out = []
    for e in range(rng.randint(1, 20)):
        for kind, most in (("event", 3), ("keyword", 3), ("dataset", 1)):
            for r in range(1, rng.randint(1, most) + 1):
                out.append((f"x{e}", kind, r, rng.choice(pool), rng.random() < 0.6))
    rng.shuffle(out)
    return out


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_report_matches_exact_oracle(seed):
    raw = random_annotations(random.Random(seed))
    got = report([AnnotationRecord(*t) for t in raw])
    want = metrics_by_hand(raw)
    for name, value in want.items():
        assert abs(getattr(got, name) - value) <= 1e-12, name
        assert 0 <= value <= 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from("abcdef"), min_size=1), st.randoms())
def test_rde_permutation_invariant(items, rnd):
    shuffled = list(items)
    rnd.shuffle(shuffled)
    assert rde(items) == rde(shuffled)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.booleans(), min_size=5), st.integers(1, 5), st.lists(st.booleans()))
def test_precision_ignores_tail(flags, k, tail):
    head = flags[:k]
    assert precision_at_k(head + tail, k) == precision_at_k(head, k)
