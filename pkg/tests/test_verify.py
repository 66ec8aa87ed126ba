import math

import pytest

from kirchnorm.config import parse_text
from kirchnorm.verify import Check, VerificationReport, _Group, holds, verify


@pytest.mark.parametrize("lhs, rhs, rel, tol, ok", [
    (1.0, 2.0, "<", 0.5, True), (1.0, 1.2, "<", 0.5, False),
    (1.0, 1.0, "<=", 0.0, True), (1.1, 1.0, "<=", 0.05, False),
    (3.0, 1.0, ">", 1.0, True), (1.5, 1.0, ">", 1.0, False),
    (1.0, 1.0 + 1e-9, "==", 1e-8, True), (1.0, 1.1, "==", 1e-8, False),
    (math.nan, 1.0, "<", 0.0, False),
])
def test_relations(lhs, rhs, rel, tol, ok):
    assert holds(lhs, rhs, rel, tol) is ok


def test_unknown_relation():
    with pytest.raises(ValueError):
        holds(1.0, 2.0, "~", 0.0)


def test_report_roundtrip():
    rep = VerificationReport([Check("a", 1.0, 2.0, "<", True, 0.0, "anchor", "g")], ["g"], [])
    back = VerificationReport.from_dict(rep.to_dict())
    assert back.to_dict() == rep.to_dict() and back.passed
    assert rep.to_dict()["checks"][0]["pass"] is True


def test_convergence_gates_checks():
    rep = VerificationReport(groups=["g"])
    rec = _Group(rep, "g")

    class Unconverged:
        converged = False
        level = -1.0

    sol = rec.solve("solver", lambda: Unconverged())
    rec.add("level_negative", lambda: sol.level, 0.0, "<", 0.0, "x", needs=("solver",))
    assert not rep.passed and rep.any_unconverged
    assert "gated" in rep.by_name("level_negative").note


def test_solver_exceptions_become_failures():
    rep = VerificationReport(groups=["g"])
    rec = _Group(rep, "g")
    assert rec.solve("boom", lambda: 1 / 0) is None
    assert rep.failed_names() == ["boom_runs"]


def test_identities_group_passes():
    rep = verify(parse_text("[verify]\ngroups = identities\nsamples = 5"))
    assert rep.passed, rep.failed_names()
    names = {c.name for c in rep.checks}
    assert {"fiber_mass_invariance", "gn_inequality", "pohozaev_fiber_derivative_nonneg",
            "pohozaev_fiber_derivative_nonpos"} <= names


def test_subcritical_group_passes():
    rep = verify(parse_text("[verify]\ngroups = subcritical\n[solver]\nstarts = 3"))
    assert rep.passed, rep.failed_names()
    assert rep.by_name("l_c_below_l_inf_c").lhs < rep.by_name("l_c_below_l_inf_c").rhs < 0


def test_bad_group_override_is_recorded():
    rep = verify(parse_text("[verify]\ngroups = identities\n[verify.identities]\np = 7"))
    assert not rep.passed and rep.checks[0].name == "group_config"


def test_negative_group_reports_threshold_and_keeps_going():
    """The default linking h0 exceeds the linking threshold: that check fails, the rest still run."""
    rep = verify(parse_text("[verify]\ngroups = supercritical-negative"))
    assert not rep.by_name("cond_1_14").passed
    assert rep.by_name("linking_level_below_2m_c").passed
    assert rep.by_name("linking_lambda_positive").passed
    assert rep.failed_names() == ["cond_1_14"]
