import pytest

from driftlap.errors import ConfigInvalid
from driftlap.verify.catalogue import TOL_AD, TOL_FD, entries, run_catalogue


@pytest.fixture(scope="module", params=["heisenberg", "grushin"])
def report(request):
    return run_catalogue(request.param, points=40, seed=1)


def test_catalogue_passes(report):
    assert report.passed
    for e in report.entries:
        if e.printed:
            continue
        assert e.closed_vs_ad <= TOL_AD, e.name
        assert e.ad_vs_fd <= TOL_FD, e.name
        assert e.closed_vs_fd <= TOL_FD, e.name


def test_oracles_agree_before_judging(report):
    # every non-printed entry has both oracles attached
    for e in report.entries:
        if not e.printed:
            assert e.ad_vs_fd is not None and e.closed_vs_fd is not None


def test_printed_forms_disagree():
    rep = run_catalogue("heisenberg", points=20, seed=3)
    printed = [e for e in rep.entries if e.printed]
    assert len(printed) == 4
    # the literal transcriptions are off by O(1), not by rounding
    assert all(e.closed_vs_ad > 1e-2 for e in printed)
    assert rep.passed  # printed entries never count toward the verdict


def test_entry_names():
    names = {e.name for e in entries("heisenberg")}
    assert {"X1u", "X2u", "norm_grad_sq", "X1X1u", "X2X2u", "X1_norm", "X2_norm"} <= names
    gnames = {e.name for e in entries("grushin")}
    assert {"Y1f", "Y2f", "norm_grad_sq", "Y1Y1f", "Y2Y2f", "Y1_norm", "Y2_norm"} <= gnames
    with pytest.raises(ConfigInvalid):
        entries("euclid")


def test_to_dict(report):
    d = report.to_dict()
    assert d["pass"] is True and len(d["entries"]) == len(report.entries)
