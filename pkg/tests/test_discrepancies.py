import pytest

from seirmig.discrepancies import (
    MATCHED, NOT_DERIVABLE, UNMATCHED, OPEN_QUESTIONS, build_report, effectiveness_claims,
    half_unit, matches, sigma_claims,
)
from seirmig.integrator import IntegrationSpec, RK45Adaptive
from seirmig.model import BASELINE_PARAMS


@pytest.fixture(scope="module")
def report():
    spec = IntegrationSpec(0, 500, RK45Adaptive(1e-9, 1e-9, 5.0), 1)
    return build_report(integration=spec, points=3, threads=1)


def test_printed_precision():
    assert half_unit("4.00") == 0.005
    assert half_unit("82") == 0.5
    assert matches(4.004, "4.00") and not matches(4.006, "4.00")


def test_every_claim_has_a_verdict(report):
    verdicts = report.verdicts()
    assert set(verdicts.values()) <= {MATCHED, UNMATCHED, NOT_DERIVABLE}
    assert len(verdicts) == len(report.claims)


def test_expected_verdicts(report):
    v = report.verdicts()
    assert v["reported_r0_high"] == NOT_DERIVABLE
    assert v["reported_pr_01"] == MATCHED
    assert v["reported_pr_02"] == UNMATCHED
    assert v["limsup_bound"] == MATCHED


def test_sigma_entries():
    claims = {c.id: c.verdict for c in sigma_claims(BASELINE_PARAMS)}
    assert claims["sigma_inverse_21"] == UNMATCHED
    assert claims["sigma_inverse_41"] == UNMATCHED
    assert claims["sigma_inverse_31"] == MATCHED


def test_effectiveness_claims_cover_table():
    ids = [c.id for c in effectiveness_claims(BASELINE_PARAMS)]
    assert sum(i.startswith("reported_pr_") for i in ids) == 17


def test_report_text_is_sectioned(report):
    text = report.to_text()
    assert text.count("\n[") + text.startswith("[") >= len(report.claims)
    assert len(OPEN_QUESTIONS) > 0
