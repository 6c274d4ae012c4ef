import pytest

from boolfn import Spectrum, wht
from errors import ArgumentError
from verifier import build_corpus, exhaustive_tables, verify_corpus

QUICK = dict(samples_per_n=4, max_random_n=6, closed_form_random=0,
             orthogonality_samples=500, gf2_trials=20, solver_trials=30)


def test_exhaustive_corpus_sizes():
    assert [len(exhaustive_tables(n)) for n in (1, 2, 3)] == [4, 16, 256]
    assert len({t.to_string() for t in exhaustive_tables(3)}) == 256
    assert len(build_corpus(samples_per_n=2, max_random_n=5)) == 4 + 16 + 256 + 4


def test_quick_suite_passes():
    report = verify_corpus(**QUICK)
    assert report.passed, [c.detail for c in report.failed]
    names = {c.name for c in report.checks}
    assert {"parseval", "influence equivalence", "closed-form state", "orthogonality",
            "g-independence", "solver soundness", "gf2 solve"} <= names
    assert all(c.max_deviation <= c.tolerance for c in report.checks)


def test_corrupted_transform_fails_parseval():
    def corrupted(t):
        sp = wht(t)
        return Spectrum(sp.n, sp.coeffs * 1.01)

    report = verify_corpus(transform=corrupted, **QUICK)
    assert not report.passed
    parseval = next(c for c in report.checks if c.name == "parseval")
    assert not parseval.passed
    assert parseval.max_deviation == pytest.approx(1.01 ** 2 - 1, rel=1e-6)
    assert "first failure" in parseval.detail


def test_report_dict():
    data = verify_corpus(**QUICK).to_dict()
    assert data["passed"] is True
    assert {"name", "passed", "max_deviation", "tolerance", "detail"} <= set(data["checks"][0])


def test_rejects_large_random_n():
    with pytest.raises(ArgumentError):
        verify_corpus(max_random_n=12)


@pytest.mark.slow
def test_full_suite_passes():
    report = verify_corpus()
    assert report.passed, [c.detail for c in report.failed]
