import enum
import io
import math

import numpy as np
import pytest

from invex2d.analysis.boundary import trace_boundary, trace_feasible_boundary
from invex2d.analysis.invexity import Verdict, check_boundary_invex
from invex2d.analysis.kkt import find_kkt_points
from invex2d.analysis.oracle import verify_kt_invex
from invex2d.analysis.problem import load_problem
from invex2d.data_handling.corpus import builtin_corpus, generate_corpus, named_instance
from invex2d.data_handling.export import write_boundary_rows
from invex2d.data_handling.report import RunReport, input_digest, to_plain


class _Colour(enum.Enum):
    RED = "red"


def test_to_plain():
    converted = to_plain({"a": np.float64(1.5), "b": np.array([1, 2]), "c": math.inf, "d": _Colour.RED, "e": np.bool_(True)})
    assert converted == {"a": 1.5, "b": [1, 2], "c": "inf", "d": "red", "e": True}


def test_run_report_text_and_json():
    report = RunReport(command=["check", "x.nlp2"], seed=3, input_digest=input_digest("text"))
    with report.timed("check"):
        report.verdicts["weak"] = "violated"
    report.add_witness("hole", (0.0, 1.0), -0.5)
    text = report.to_text()
    assert "weak: violated" in text
    assert "witness on hole" in text
    plain = report.to_dict()
    assert plain["witnesses"] == [{"constraint": "hole", "point": [0.0, 1.0], "multiplier": -0.5}]
    assert plain["timings"]["check"] >= 0.0


def test_boundary_rows_mark_corners(unit_box):
    stream = io.StringIO()
    rows = write_boundary_rows(unit_box, [trace_boundary(unit_box, (1.0, 0.5), step=0.1)], stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == "t,x1,x2,active,corner"
    assert len(lines) == rows + 1
    assert sum(line.endswith(",1") for line in lines[1:]) == 4


def test_named_instances():
    assert named_instance("crescent").name == "crescent"
    with pytest.raises(KeyError):
        named_instance("moon")
    assert len(builtin_corpus()) == 5


def test_generated_corpus_is_seeded():
    first = generate_corpus(20, seed=0)
    assert len(first) == 20
    assert [c.document for c in first] == [c.document for c in generate_corpus(20, seed=0)]
    assert {c.kind for c in first} == {"convex", "crescent"}
    for instance in first:
        p = instance.load()
        assert p.concavity.is_concave
        assert load_problem(instance.document).constraints


@pytest.mark.slow
def test_boundary_invex_corpus_is_kt_invex():
    for instance in generate_corpus(20, seed=0):
        p = instance.load()
        assert check_boundary_invex(p).verdict is Verdict.BOUNDARY_INVEX, instance.name
        points = find_kkt_points(p, trace_feasible_boundary(p))
        assert verify_kt_invex(p, points).is_kt_invex, instance.name
