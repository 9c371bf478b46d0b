from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fiolab.exponents import (
    INF,
    case_slopes_in_inv_r,
    discrepancy_report,
    dual_exponent,
    figure_surface_rows,
    interp_p_lower,
    interp_p_upper,
    l1_threshold,
    l1_threshold_branches,
    m_rho,
    m_rho_cases,
    pointwise_threshold,
    tja_exponent,
    tjb_exponent,
    yangwu_threshold,
)

H = Fraction(1, 2)


def corner_labels(n, rho):
    """Figure corner values in the (1/r, 1/s') plane, as exact rationals."""
    p = Fraction(rho)
    return {
        (Fraction(0), Fraction(1)): -n * (1 - p) / 2 - (n - 1) * p / 2,
        (H, Fraction(1)): Fraction(-n, 2),
        (H, H): -n * (1 - p) / 2 - (n - 1) * p / 4,
        (Fraction(1), Fraction(1)): -n * (1 - p) - (n + 1) * p / 2,
        (Fraction(1), Fraction(0)): -n * (1 - p),  # low-rho panel label
    }


def corner_to_rs(rr, ssd):
    r = INF if rr == 0 else 1 / rr
    ss = 1 - ssd
    s = INF if ss == 0 else 1 / ss
    return r, s


def test_pointwise_threshold_values():
    assert pointwise_threshold(2, 1, 2) == Fraction(-1)
    assert pointwise_threshold(1, 0, 1) == Fraction(-1)
    assert pointwise_threshold(3, 1, 1) == Fraction(-2)


def test_pointwise_threshold_rejects_r_outside():
    with pytest.raises(ValueError):
        pointwise_threshold(2, 1, 3)


def test_m_rho_reference_values():
    assert m_rho(2, 1, 2, 2).value == Fraction(-1, 4)
    assert m_rho(2, 1, 2, INF).value == Fraction(-1)
    assert m_rho(2, Fraction(1, 2), 1, 1).value == Fraction(-1)


def test_m_rho_rejects_bad_inputs():
    with pytest.raises(ValueError):
        m_rho(2, 1, 3, 2)  # r > s
    with pytest.raises(ValueError):
        m_rho(2, 0, 2, 2)  # rho outside (0, 1]
    with pytest.raises(ValueError):
        m_rho(2, 1, 0.5, 2)  # r < 1


@pytest.mark.parametrize("rho", [0.3, 0.5])
def test_figure_corners_low_rho_exact(rho):
    for n in (1, 2, 3):
        labels = corner_labels(n, rho)
        for (rr, ssd), expect in labels.items():
            r, s = corner_to_rs(rr, ssd)
            assert m_rho(n, rho, r, s).value == expect, (n, rho, rr, ssd)


@pytest.mark.parametrize("rho", [0.7, 1.0])
def test_figure_corners_high_rho(rho):
    p = Fraction(rho)
    for n in (1, 2, 3):
        labels = corner_labels(n, rho)
        for (rr, ssd), expect in labels.items():
            if (rr, ssd) == (Fraction(1), Fraction(0)):
                continue
            r, s = corner_to_rs(rr, ssd)
            assert m_rho(n, rho, r, s).value == expect, (n, rho, rr, ssd)
        # the (1, 0) corner takes the case-3 value; the figure label differs
        # by n(rho-1)/2 and agrees exactly at rho = 1
        res = m_rho(n, rho, 1, 1)
        case3 = n * p / 2 + p - n - H
        figure = p - Fraction(n + 1, 2)
        assert res.value == case3
        assert case3 - figure == n * (p - 1) / 2
        rep = discrepancy_report(n, rho)
        assert rep["corner10_case3_value"] == case3
        assert rep["corner10_figure_label"] == figure
        assert rep["corner10_equal_iff_rho_one"] == (p == 1)


@given(
    st.integers(min_value=1, max_value=3),
    st.fractions(min_value=Fraction(1, 100), max_value=1),
    st.fractions(min_value=Fraction(0), max_value=H),
)
def test_continuity_across_r_equals_2(n, rho, ss):
    # both pieces apply on the r = 2 line (with s >= 2) and agree exactly
    s = INF if ss == 0 else 1 / ss
    cases = m_rho_cases(n, rho, 2, s)
    assert "case1" in cases and "case2" in cases
    assert cases["case1"] == cases["case2"]


def test_overlap_min_on_dual_boundary():
    # s = r' with 1 < r < 2 and 1/2 < rho < 1: case2 and case3 both apply,
    # differ by (1/r - 1/2) n (rho - 1), and the minimum is returned.
    n, rho = 2, Fraction(3, 4)
    r, s = Fraction(4, 3), 4
    cases = m_rho_cases(n, rho, r, s)
    assert set(cases) == {"case2", "case3"}
    assert cases["case2"] - cases["case3"] == (Fraction(3, 4) - H) * n * (rho - 1)
    res = m_rho(n, rho, r, s)
    assert res.region == "overlap-min"
    assert res.value == min(cases.values())


def test_region_tag_single_case():
    assert m_rho(2, 1, 4, 8).region == "case1"
    assert m_rho(2, Fraction(1, 4), 1, 1).region == "case2"
    assert m_rho(2, 1, 1, 1).region == "case3"


@given(
    st.integers(min_value=1, max_value=3),
    st.fractions(min_value=Fraction(1, 100), max_value=1),
)
def test_monotone_in_inv_r_per_piece(n, rho):
    for slope in case_slopes_in_inv_r(n, rho).values():
        assert slope <= 0


def test_yangwu_values():
    assert yangwu_threshold(2, 1, 2) == Fraction(-1, 4)
    assert yangwu_threshold(2, 1, INF) == Fraction(-1, 2)
    assert yangwu_threshold(2, 0, 2) == Fraction(-1)
    with pytest.raises(ValueError):
        yangwu_threshold(2, 1, 1.5)


def test_l1_threshold_values():
    assert l1_threshold(2, 1) == Fraction(-1, 2)
    assert l1_threshold(2, 0) == Fraction(-2)
    br = l1_threshold_branches(3, Fraction(1, 2))
    assert br["low"] == br["high"] == Fraction(-3, 2)
    assert l1_threshold(3, Fraction(1, 2)) == Fraction(-3, 2)


@given(st.integers(min_value=1, max_value=3), st.fractions(min_value=Fraction(1, 50), max_value=H))
def test_l1_matches_m_rho_at_one_one(n, rho):
    assert l1_threshold(n, rho) == m_rho(n, rho, 1, 1).value


def test_l1_sign_typo_reported():
    rep = discrepancy_report(2, Fraction(1, 4))
    assert rep["l1_sign_typo_suspected"]
    assert rep["l1_printed_low_branch"] == Fraction(3, 2)  # positive: the typo
    assert rep["l1_implemented_low_branch"] == Fraction(-3, 2)


def test_tjb_examples_and_identity():
    assert tjb_exponent(2, 1, 2, -1.25) == Fraction(-1, 4)
    assert tja_exponent(2, 1, 0, 3) == Fraction(-1)
    for (n, rho, r) in [(2, 1, 2), (3, Fraction(1, 3), Fraction(3, 2)), (1, 1, 1)]:
        thr = pointwise_threshold(n, rho, r)
        assert tjb_exponent(n, rho, r, thr) == 0


@given(
    st.integers(min_value=1, max_value=3),
    st.fractions(min_value=Fraction(1, 100), max_value=1),
    st.fractions(min_value=1, max_value=2),
    st.fractions(min_value=-4, max_value=1),
)
def test_tjb_negative_iff_below_threshold(n, rho, r, m):
    thr = pointwise_threshold(n, rho, r)
    assert tjb_exponent(n, rho, r, m) == m - thr
    assert (tjb_exponent(n, rho, r, m) < 0) == (m < thr)


def test_interp_upper_values_and_collinearity():
    p = interp_p_upper(3, 4)
    assert p == Fraction(10, 3)
    A = (1 / p, 1 - 1 / p)
    B = (H, Fraction(1))
    X = (Fraction(1, 3), Fraction(3, 4))
    cross = (B[0] - A[0]) * (X[1] - A[1]) - (B[1] - A[1]) * (X[0] - A[0])
    assert cross == 0
    assert interp_p_upper(2, 2) == 2


def test_interp_lower_values_and_collinearity():
    p = interp_p_lower(Fraction(4, 3), 4)
    assert p == 1
    A = (Fraction(1), Fraction(1))
    B = (H, H)
    X = (Fraction(3, 4), Fraction(3, 4))
    cross = (B[0] - A[0]) * (X[1] - A[1]) - (B[1] - A[1]) * (X[0] - A[0])
    assert cross == 0
    with pytest.raises(ValueError):
        interp_p_lower(2, 2)


@given(st.fractions(min_value=2, max_value=20), st.fractions(min_value=0, max_value=10))
def test_interp_upper_collinear_random(r, ds):
    s = r + ds
    p = interp_p_upper(r, s)
    if p == INF or p == 0:
        return
    A = (1 / Fraction(p), 1 - 1 / Fraction(p))
    B = (H, Fraction(1))
    X = (1 / Fraction(r), 1 - 1 / Fraction(s) if s != 0 else Fraction(1))
    sd = 1 - 1 / Fraction(s)
    X = (1 / Fraction(r), sd)
    cross = (B[0] - A[0]) * (X[1] - A[1]) - (B[1] - A[1]) * (X[0] - A[0])
    assert cross == 0


@given(st.fractions(min_value=Fraction(101, 100), max_value=2), st.fractions(min_value=0, max_value=20))
def test_interp_lower_collinear_random(r, ds):
    s = r + Fraction(1, 17) + ds  # keep r strictly below s
    if 1 - 1 / Fraction(s) > 1 / Fraction(r):  # require s' <= r
        return
    p = interp_p_lower(r, s)
    A = (1 / Fraction(p), Fraction(1))
    B = (H, H)
    X = (1 / Fraction(r), 1 - 1 / Fraction(s))
    cross = (B[0] - A[0]) * (X[1] - A[1]) - (B[1] - A[1]) * (X[0] - A[0])
    assert cross == 0


def test_dual_exponent():
    assert dual_exponent(1) == INF
    assert dual_exponent(2) == 2
    assert dual_exponent(4) == Fraction(4, 3)
    assert dual_exponent(INF) == 1


def test_figure_surface_rows():
    rows = list(figure_surface_rows(2, 1, grid_points=9))
    assert all(rr + ssd >= 1 for rr, ssd, _, _ in rows)
    assert all(tag in ("case1", "case2", "case3", "overlap-min") for _, _, _, tag in rows)
    # corner (1/2, 1/2) present with the known value
    vals = {(rr, ssd): v for rr, ssd, v, _ in rows}
    assert vals[(H, H)] == Fraction(-1, 4)
