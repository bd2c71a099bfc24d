import json
from fractions import Fraction

import pytest

from wigner1n.consistency import (
    CheckReport,
    MCConfig,
    as_fraction,
    contradiction_report,
    corrected_report,
    monte_carlo_checks,
    reports_to_json,
)
from wigner1n.ensembles import make_sign_ensemble


@pytest.mark.parametrize("w", [1, 2, 0.5])
def test_contradiction_reproduced(w):
    reports = {r.check_id: r for r in contradiction_report(w)}
    assert len(reports) == 6
    assert all(r.passed for r in reports.values())
    wf = as_fraction(w)
    assert reports["contradiction.k0.mismatch"].routes["expected_delta"] == Fraction(3, 4)
    assert reports["contradiction.k2.mismatch"].routes["expected_delta"] == 3 * wf ** 2
    assert reports["contradiction.k0.series"].routes["series"] == 0
    assert reports["contradiction.k2.quadrature"].routes["quadrature"] == pytest.approx(-3 * w ** 2, abs=1e-6 * w ** 2)


def test_contradiction_rejects_bad_w():
    with pytest.raises(ValueError):
        contradiction_report(0)


TRIPLES = [
    (1, 0, -2),
    (1, 2, 0),
    (1, 1, Fraction(1, 2)),
    (Fraction(17, 10), Fraction(3, 10), Fraction(-6, 5)),
    (0.5, 0.25, 0.0),
]


@pytest.mark.parametrize("w,v2,k4", TRIPLES)
def test_corrected_routes_agree(w, v2, k4):
    reports = corrected_report(w, v2, k4)
    failed = [r.check_id for r in reports if not r.passed]
    assert not failed
    assert len(reports) == 11


def test_sign_moments_values():
    by_id = {r.check_id: r for r in corrected_report(1, 0, -2)}
    assert by_id["corrected.trace.p4.series"].routes["series"] == -5
    assert by_id["corrected.trace.p6.series"].routes["trace_subleading"] == -20
    assert by_id["corrected.trace.p2.quadrature"].routes["quadrature"] == pytest.approx(-1, rel=1e-12)


def test_goe_second_moment_sign():
    # v2 - w2 = +w2 on every route, no sign flip
    by_id = {r.check_id: r for r in corrected_report(1, 2, 0)}
    assert by_id["corrected.trace.p2.series"].routes["series"] == 1
    assert by_id["corrected.trace.p2.quadrature"].routes["quadrature"] == pytest.approx(1, rel=1e-12)


def test_corrected_rejects_infeasible():
    with pytest.raises(ValueError):
        corrected_report(1, 0, -3)
    with pytest.raises(ValueError):
        corrected_report(1, -1, 0)


def test_report_json_roundtrip():
    text = reports_to_json(contradiction_report(1), w="1")
    payload = json.loads(text)
    assert payload["all_pass"] is True and payload["w"] == "1"
    first = payload["checks"][0]
    assert {"check_id", "routes", "expected", "delta", "pass", "tolerance", "note"} <= set(first)
    mismatch = next(c for c in payload["checks"] if c["check_id"] == "contradiction.k0.mismatch")
    assert mismatch["routes"]["expected_delta"] == "3/4"
    assert mismatch["expected"] == "unequal-by(3/4)"


def test_failed_report_flagged():
    bad = CheckReport("x", {}, "equal", 1.0, False, 0.0)
    assert json.loads(reports_to_json([bad]))["all_pass"] is False


def test_as_fraction():
    assert as_fraction(0.5) == Fraction(1, 2)
    assert as_fraction(0.1) == Fraction(1, 10)
    with pytest.raises(ValueError):
        as_fraction(float("nan"))


def test_small_monte_carlo_p2():
    # p = 2 has no 1/N^2 term, so c0 + c1/N is exact for the sign ensemble:
    # every sample equals (N - 1)/N and the fit is exact
    cfg = MCConfig(Ns=(8, 16, 32), samples=50, powers=(2,), ensemble=make_sign_ensemble(1.0))
    reports = monte_carlo_checks(Fraction(1), Fraction(0), Fraction(-2), cfg)
    assert [r.check_id for r in reports] == ["corrected.monte_carlo.p2.c0", "corrected.monte_carlo.p2.c1"]
    assert reports[0].routes["c0"] == pytest.approx(1, abs=1e-12)
    assert reports[1].routes["c1"] == pytest.approx(-1, abs=1e-12)
