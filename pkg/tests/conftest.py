import json
from math import comb
from pathlib import Path

import numpy as np
import pytest

from wuiq.store import ProjectStore
from wuiq.usability import ITEM_COUNT, SurveyResponse

FIXTURES = Path(__file__).parent / "fixtures"


def make_items(odd=3, even=3, extended=3):
    """17 Likert answers with one value per item role."""
    items = []
    for q in range(1, 11):
        items.append(odd if q % 2 == 1 else even)
    items.extend([extended] * 7)
    return tuple(items)


def make_response(rid="r1", odd=3, even=3, extended=3, review="fine overall",
                  duration=6.0):
    return SurveyResponse(
        respondent_id=rid,
        items=make_items(odd, even, extended),
        review_text=review,
        duration_months=duration,
    )


def random_items(rng):
    return tuple(int(v) for v in rng.integers(1, 6, size=ITEM_COUNT))


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected agreement between two labelings, in [-1, 1]."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = a.shape[0]
    classes_a, inv_a = np.unique(a, return_inverse=True)
    classes_b, inv_b = np.unique(b, return_inverse=True)
    table = np.zeros((classes_a.size, classes_b.size), dtype=int)
    for i, j in zip(inv_a, inv_b):
        table[i, j] += 1
    sum_cells = sum(comb(int(v), 2) for v in table.flat)
    sum_rows = sum(comb(int(v), 2) for v in table.sum(axis=1))
    sum_cols = sum(comb(int(v), 2) for v in table.sum(axis=0))
    total = comb(n, 2)
    expected = sum_rows * sum_cols / total
    maximum = (sum_rows + sum_cols) / 2
    if maximum == expected:
        return 1.0
    return (sum_cells - expected) / (maximum - expected)


@pytest.fixture
def project(tmp_path):
    return ProjectStore.init(tmp_path / "proj", "test-project",
                             now="2026-08-22T00:00:00+00:00")


@pytest.fixture
def fixture_experts():
    return (FIXTURES / "experts.json").read_bytes()


@pytest.fixture
def fixture_surveys():
    return (FIXTURES / "surveys.json").read_bytes()


@pytest.fixture
def fixture_surveys_csv():
    return (FIXTURES / "surveys.csv").read_bytes()


@pytest.fixture
def fixture_lighthouse():
    return (FIXTURES / "lighthouse.json").read_bytes()


@pytest.fixture
def populated_project(project, fixture_experts, fixture_surveys, fixture_lighthouse):
    """A project with all three fixture inputs ingested."""
    from wuiq import engine

    engine.ingest_experts(project, fixture_experts, "2026-08-22T00:01:00+00:00")
    engine.ingest_surveys(project, fixture_surveys, "2026-08-22T00:02:00+00:00")
    engine.ingest_audit(project, fixture_lighthouse, "2026-08-22T00:03:00+00:00")
    return project


def load_fixture_json(name):
    return json.loads((FIXTURES / name).read_text())
