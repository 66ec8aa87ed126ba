"""The reference values in oracles.py still come out of their formulas."""

import pytest

from oracles import FROZEN, GAUSS_ENERGY_P4, gn_soliton_quotient, limit_solution_1d


def test_closed_forms():
    assert gn_soliton_quotient() == pytest.approx(FROZEN["gn_1_4"], rel=1e-15)
    assert GAUSS_ENERGY_P4 == pytest.approx(FROZEN["gauss_energy_p4"], rel=1e-15)


@pytest.mark.parametrize("key", [(12.0, 1.0), (3.0, 1.0), (3.0, 0.5)])
def test_limit_solutions(key):
    got = limit_solution_1d(1.0, 1.0, key[1], key[0])
    assert got["lam"] == pytest.approx(FROZEN[key]["lam"], rel=1e-11)
    assert got["level"] == pytest.approx(FROZEN[key]["level"], rel=1e-11)
