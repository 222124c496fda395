import pytest

from polariton_clone import validation as va
from polariton_clone.errors import InvalidArgumentError


@pytest.fixture(scope="module")
def report():
    return va.run_checks()


def test_default_suite_passes(report):
    assert report.passed, [c.name for c in report.failures]
    assert len(report.checks) >= 20
    assert {c.category for c in report.checks} == {"algebra", "truncation", "convergence"}
    assert len({c.name for c in report.checks}) == len(report.checks)


def test_report_serialisation(report):
    d = report.to_dict()
    assert d["n_checks"] == len(report.checks) and d["n_failed"] == 0
    assert d["cutoff"] == 30 and d["seed"] == 0
    comp = next(c for c in d["checks"] if c["name"] == "oracle_vacuum_ensemble")
    entry = comp["details"]["comparison"][0]
    assert set(entry) == {"quantity", "engine_value", "oracle_value", "abs_error", "truncation_mass", "cutoffs"}


def test_finite_n_check_details(report):
    chk = next(c for c in report.checks if c.name == "finite_n_convergence")
    assert chk.value <= va.CONVERGENCE_RATIO
    assert chk.details["c_over_N"] > 0


def test_tight_tolerance_fails_only_truncation_checks():
    tight = va.run_checks(tolerance=1e-15)
    assert not tight.passed
    assert {c.category for c in tight.failures} == {"truncation"}


def test_seeded_runs_repeat():
    a = va.run_checks(seed=3, workers=2).to_dict()
    b = va.run_checks(seed=3).to_dict()
    assert a == b


def test_invalid_arguments():
    with pytest.raises(InvalidArgumentError):
        va.run_checks(cutoff=16)
    with pytest.raises(InvalidArgumentError):
        va.run_checks(tolerance=0.0)
