"""Closed-form decay-exponent and threshold calculus.

All arithmetic runs in exact rationals (floats are converted to their exact
binary value), so boundary and corner identities can be asserted with
equality rather than tolerances.  1/infinity is represented as exact zero and
dual exponents use s' = s/(s-1) with s = 1 mapping to infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

__all__ = [
    "ThresholdResult",
    "pointwise_threshold",
    "m_rho",
    "m_rho_cases",
    "case_slopes_in_inv_r",
    "yangwu_threshold",
    "l1_threshold",
    "l1_threshold_branches",
    "tjb_exponent",
    "tja_exponent",
    "interp_p_upper",
    "interp_p_lower",
    "discrepancy_report",
    "figure_surface_rows",
    "dual_exponent",
]

Number = Union[int, float, Fraction]

INF = math.inf


def _exact(x: Number) -> Fraction:
    """Exact rational value of a finite input (floats via their binary value)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            raise ValueError(f"finite number required, got {x}")
        return Fraction(x)
    return Fraction(int(x))


def _recip(x: Number) -> Fraction:
    """Reciprocal of an exponent in [1, inf]; infinity maps to exact zero."""
    if x == INF:
        return Fraction(0)
    f = _exact(x)
    if f < 1:
        raise ValueError(f"exponent must lie in [1, inf], got {x}")
    return 1 / f


def dual_exponent(s: Number):
    """Dual exponent s' with 1/s + 1/s' = 1; s = 1 maps to infinity."""
    ss = _recip(s)
    if ss == 1:
        return INF
    return 1 / (1 - ss)


@dataclass(frozen=True)
class ThresholdResult:
    """Evaluated piecewise threshold with its region tag and inputs."""

    value: Fraction
    region: str  # case1 | case2 | case3 | overlap-min
    inputs: tuple
    cases: dict

    def __float__(self):
        return float(self.value)


def pointwise_threshold(n: int, rho: Number, r: Number) -> Fraction:
    """Order threshold for the pointwise maximal bound:
    -(n-1)rho/2 - rho/r - n(1-rho)/r, valid for r in [1, 2]."""
    rr = _recip(r)
    if rr < Fraction(1, 2):
        raise ValueError(f"r must lie in [1, 2], got {r}")
    p = _exact(rho)
    if not (0 <= p <= 1):
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    return -(n - 1) * p / 2 - p * rr - n * (1 - p) * rr


def m_rho_cases(n: int, rho: Number, r: Number, s: Number) -> dict:
    """Values of every case formula whose side condition holds at (r, s)."""
    p = _exact(rho)
    if not (0 < p <= 1):
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    rr = _recip(r)
    ss = _recip(s)
    if rr < ss:
        raise ValueError(f"need 1 <= r <= s <= inf, got r={r}, s={s}")
    half = Fraction(1, 2)
    base = -n * (1 - p) / 2 - (n - 1) * p / 4
    out = {}
    if rr <= half:  # 2 <= r <= s
        out["case1"] = base - p * (rr - half) + (n + 1) * p / 2 * (ss - half)
    cond_dual = (1 - ss >= rr) and (rr >= half)  # s' <= r <= 2
    cond_band = ss >= 1 - rr  # r <= s <= r'
    if cond_dual or (cond_band and p <= half):
        out["case2"] = base + ((n - 1) * p - n) * (rr - half) + (n + 1) * p / 2 * (ss - half)
    if cond_band and p > half:
        out["case3"] = base - Fraction(n + 1, 2) * (rr - half) + (3 * p - 1 + n * (p - 1)) / 2 * (ss - half)
    return out


def m_rho(n: int, rho: Number, r: Number, s: Number) -> ThresholdResult:
    """Piecewise sparse-form order threshold.

    When several case conditions hold with different values the minimum is
    returned under the tag 'overlap-min' (the conservative reading of a
    sufficiency threshold); coinciding values keep the lowest case tag.
    """
    cases = m_rho_cases(n, rho, r, s)
    if not cases:
        raise AssertionError(f"no case condition applies at r={r}, s={s}")
    value = min(cases.values())
    distinct = set(cases.values())
    if len(distinct) == 1:
        region = sorted(cases)[0]
    else:
        region = "overlap-min"
    return ThresholdResult(value=value, region=region, inputs=(n, rho, r, s), cases=cases)


def case_slopes_in_inv_r(n: int, rho: Number) -> dict:
    """d(m_rho)/d(1/r) for each linear piece; all are <= 0."""
    p = _exact(rho)
    return {
        "case1": -p,
        "case2": (n - 1) * p - n,
        "case3": -Fraction(n + 1, 2),
    }


def yangwu_threshold(n: int, rho: Number, p_exp: Number) -> Fraction:
    """L^p threshold -n(1-rho)/2 - rho(n-1)/2 (1 - 1/p) for p in [2, inf]."""
    pp = _recip(p_exp)
    if pp > Fraction(1, 2):
        raise ValueError(f"p must lie in [2, inf], got {p_exp}")
    p = _exact(rho)
    return -n * (1 - p) / 2 - p * (n - 1) / 2 * (1 - pp)


def l1_threshold_branches(n: int, rho: Number) -> dict:
    """Both branch values of the L^1 threshold.

    The low branch is implemented sign-corrected as -n(1-rho); the source
    prints -n(rho-1), which is positive for rho < 1 and inconsistent with the
    (1, 0) corner label -n(1-rho), so it is reported but not used.
    """
    p = _exact(rho)
    return {
        "low": -n * (1 - p),
        "high": p - Fraction(n + 1, 2),
        "printed_low": -n * (p - 1),
    }


def l1_threshold(n: int, rho: Number) -> Fraction:
    """L^1 threshold: -n(1-rho) for rho <= 1/2, rho - (n+1)/2 for rho >= 1/2."""
    p = _exact(rho)
    if not (0 <= p <= 1):
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    br = l1_threshold_branches(n, rho)
    if p < Fraction(1, 2):
        return br["low"]
    if p > Fraction(1, 2):
        return br["high"]
    assert br["low"] == br["high"]
    return br["low"]


def tjb_exponent(n: int, rho: Number, r: Number, m: Number) -> Fraction:
    """Dyadic growth exponent of the spatially localised pieces:
    m + n(1-rho)/r + (n-1)rho/2 + rho/r.  Negative iff m is below the
    pointwise threshold."""
    rr = _recip(r)
    p = _exact(rho)
    return _exact(m) + n * (1 - p) * rr + (n - 1) * p / 2 + p * rr


def tja_exponent(n: int, rho: Number, m: Number, N: int) -> Fraction:
    """Dyadic growth exponent of the spatially non-localised pieces: m + n - N rho."""
    return _exact(m) + n - N * _exact(rho)


def interp_p_upper(r: Number, s: Number):
    """Interpolation endpoint p = 2s(1/2 + 1/s - 1/r) for 2 <= r <= s."""
    rr = _recip(r)
    ss = _recip(s)
    if rr > Fraction(1, 2) or rr < ss:
        raise ValueError(f"need 2 <= r <= s, got r={r}, s={s}")
    if s == INF:
        return 2 if rr == Fraction(1, 2) else INF
    return 2 * _exact(s) * (Fraction(1, 2) + ss - rr)


def interp_p_lower(r: Number, s: Number):
    """Interpolation endpoint p = 2(1/2 - 1/s)/(1/r - 1/s) for s' <= r <= 2, r != s."""
    rr = _recip(r)
    ss = _recip(s)
    if rr < Fraction(1, 2) or 1 - ss > rr:
        raise ValueError(f"need s' <= r <= 2, got r={r}, s={s}")
    if rr == ss:
        raise ValueError("p is undefined at r = s (zero denominator)")
    return 2 * (Fraction(1, 2) - ss) / (rr - ss)


def discrepancy_report(n: int, rho: Number) -> dict:
    """Documented discrepancies between the piecewise formula and its figure.

    Covers the (1, 0) corner (case-3 value vs the figure label, differing by
    n(rho-1)/2) and the printed low-rho L^1 threshold sign.
    """
    p = _exact(rho)
    case3_corner = n * p / 2 + p - n - Fraction(1, 2)
    figure_corner = p - Fraction(n + 1, 2)
    br = l1_threshold_branches(n, rho)
    return {
        "corner10_case3_value": case3_corner,
        "corner10_figure_label": figure_corner,
        "corner10_difference": case3_corner - figure_corner,
        "corner10_equal_iff_rho_one": case3_corner == figure_corner,
        "l1_printed_low_branch": br["printed_low"],
        "l1_implemented_low_branch": br["low"],
        "l1_sign_typo_suspected": br["printed_low"] != br["low"],
    }


def figure_surface_rows(n: int, rho: Number, grid_points: int = 21):
    """Rows (1/r, 1/s', m_rho, region) over the admissible triangle 1/r + 1/s' >= 1."""
    g = grid_points
    for i in range(g):
        rr = Fraction(i, g - 1)
        for k in range(g):
            ssd = Fraction(k, g - 1)  # 1/s'
            if rr + ssd < 1:
                continue
            r = INF if rr == 0 else 1 / rr
            ss = 1 - ssd  # 1/s
            s = INF if ss == 0 else 1 / ss
            res = m_rho(n, rho, r, s)
            yield (rr, ssd, res.value, res.region)
