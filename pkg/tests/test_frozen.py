from fractions import Fraction

import pytest

import frozen
from oracles import single_selection_closed_form, werner_single_selection


def test_single_selection_oracles_agree():
    exact = werner_single_selection(Fraction(9, 10))
    assert exact == frozen.SINGLE_SELECTION_F09_EXACT
    closed = single_selection_closed_form(0.9)
    assert closed == pytest.approx(frozen.SINGLE_SELECTION_F09, abs=1e-15)
    assert round(frozen.SINGLE_SELECTION_F09[0], 6) == 0.926396
    assert round(frozen.SINGLE_SELECTION_F09[1], 6) == 0.875556


@pytest.mark.parametrize("f", [Fraction(1, 2), Fraction(3, 4), Fraction(99, 100)])
def test_single_selection_closed_form_general(f):
    exact = werner_single_selection(f)
    closed = single_selection_closed_form(float(f))
    assert closed == pytest.approx((float(exact[0]), float(exact[1])), abs=1e-14)
