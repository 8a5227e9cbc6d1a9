"""Geometric criteria, bigness estimates, Kodaira map ranks, Siegel bound."""

import math

import numpy as np
import pytest

from orbmorse.catalog import build_catalog_orbifold
from orbmorse.cohomology import cohomology_table, weighted_proj_h0
from orbmorse.errors import ConfigurationError
from orbmorse.moishezon import (bigness_check, kodaira_rank, moishezon_check,
                                section_growth_exponent, siegel_bound)

DENT = {"amplitude": 1.2, "center": 0.45 + 0.0j, "width": 0.12}


def bigness_powers(top=4096):
    return sorted({int(round(x)) for x in np.geomspace(2, top, 40)})


# ---------------------------------------------------------------------------
# criterion verdicts


def test_semipositive_weighted_line_is_moishezon_by_i():
    orb, bundle = build_catalog_orbifold("wps", weights=(1, 2))
    v = moishezon_check(orb, bundle, resolution=128)
    assert v.verdict == "Moishezon-by-(i)"
    assert v.semipositive and v.positive_at_point
    assert v.integral_leq1 == pytest.approx(0.5, abs=1e-3)
    # (i) implies (ii): the integral witness is positive
    assert v.integral_leq1 > -v.quadrature_tolerance


def test_flat_trivial_bundle_is_inconclusive():
    orb, bundle = build_catalog_orbifold("torus", d=0, k=1)
    v = moishezon_check(orb, bundle, resolution=64)
    assert v.verdict == "inconclusive"
    assert v.integral_leq1 == 0.0
    assert not v.positive_at_point


def test_mixed_signature_dent_is_moishezon_by_ii():
    orb, bundle = build_catalog_orbifold("wps", weights=(1, 1), dent=DENT)
    v = moishezon_check(orb, bundle, resolution=160)
    assert not v.semipositive
    assert v.min_eigenvalue_seen < -1.0
    assert v.verdict == "Moishezon-by-(ii)"
    assert v.integral_leq1 == pytest.approx(1.0, abs=1e-3)


# ---------------------------------------------------------------------------
# bigness


def test_bigness_examples():
    orb, _ = build_catalog_orbifold("wps", weights=(1, 1))
    est = bigness_check(cohomology_table(orb, bigness_powers()), 1)
    assert est.big and est.limsup_estimate == pytest.approx(1.0, abs=5e-3)
    orb2, _ = build_catalog_orbifold("wps", weights=(1, 2))
    est2 = bigness_check(cohomology_table(orb2, bigness_powers()), 1)
    assert est2.big and est2.limsup_estimate == pytest.approx(0.5, abs=5e-3)
    orb3, _ = build_catalog_orbifold("torus", d=0, k=1)
    est3 = bigness_check(cohomology_table(orb3, bigness_powers()), 1)
    assert not est3.big
    assert est3.limsup_estimate < 0.01


def test_bigness_needs_a_tail():
    orb, _ = build_catalog_orbifold("wps", weights=(1, 1))
    with pytest.raises(ConfigurationError):
        bigness_check(cohomology_table(orb, [2, 4, 8]), 1)


# ---------------------------------------------------------------------------
# Siegel-type bound


def test_siegel_values_and_monotonicity():
    assert siegel_bound(1, 1, 0) == 1
    assert siegel_bound(3, 2, 2) == 18
    for m, n, k in [(1, 1, 1), (2, 3, 4), (5, 2, 7)]:
        assert siegel_bound(m + 1, n, k) >= siegel_bound(m, n, k)
        assert siegel_bound(m, n + 1, k) >= siegel_bound(m, n, k)
        assert siegel_bound(m, n, k + 1) >= siegel_bound(m, n, k)
    with pytest.raises(ValueError):
        siegel_bound(-1, 1, 1)


def test_section_counts_respect_jet_bound():
    """With covering data (m, k_p = p (floor(log C) + 1)), h^0 <= bound."""
    m, logC = 5, 2.0
    for weights in [(1, 1), (1, 2)]:
        for p in range(1, 200):
            k_p = p * (math.floor(logC) + 1)
            assert weighted_proj_h0(weights, p) <= siegel_bound(m, 1, k_p)


# ---------------------------------------------------------------------------
# Kodaira map


def test_kodaira_rank_projective_line():
    orb, bundle = build_catalog_orbifold("wps", weights=(1, 1))
    assert kodaira_rank(orb, bundle, 1) == 1


def test_kodaira_rank_weighted_line_power_steps():
    orb, bundle = build_catalog_orbifold("wps", weights=(1, 2))
    assert kodaira_rank(orb, bundle, 1) == 0      # only the section x
    assert kodaira_rank(orb, bundle, 2) == 1      # x^2 and y


def test_kodaira_rank_trivial_bundle():
    orb, bundle = build_catalog_orbifold("torus", d=0, k=1)
    assert kodaira_rank(orb, bundle, 3) == 0


def test_big_iff_full_rank_across_catalog():
    entries = [("wps", dict(weights=(1, 1))), ("wps", dict(weights=(1, 2))),
               ("wps", dict(weights=(2, 3))), ("torus", dict(d=1, k=1)),
               ("torus", dict(d=1, k=2)), ("torus", dict(d=0, k=1))]
    for cid, params in entries:
        orb, bundle = build_catalog_orbifold(cid, **params)
        table = cohomology_table(orb, list(range(1, 9)) + bigness_powers())
        est = bigness_check(table, 1)
        ranks = [kodaira_rank(orb, bundle, p) for p in range(1, 9)
                 if table.h(p, 0) >= 1]
        assert est.big == (max(ranks) == 1), (cid, params, est, ranks)


def test_kodaira_rank_requires_sections():
    orb, bundle = build_catalog_orbifold("wps", weights=(2, 3))
    with pytest.raises(ConfigurationError):
        kodaira_rank(orb, bundle, 1)


def test_growth_exponent_bounded_by_rank():
    """Tail slope of log h^0 / log p stays within 0.1 of the map rank."""
    for cid, params in [("wps", dict(weights=(1, 2))), ("torus", dict(d=1, k=1)),
                        ("torus", dict(d=0, k=1))]:
        orb, bundle = build_catalog_orbifold(cid, **params)
        table = cohomology_table(orb, bigness_powers())
        growth = section_growth_exponent(table)
        rank = max(kodaira_rank(orb, bundle, p) for p in range(1, 9))
        assert growth <= rank + 0.1


def test_semipositivity_implies_integral_witness():
    """(i) => (ii): flags set forces a nonnegative integral and an essentially
    empty one-negative region (bounded by the degenerate node fraction)."""
    from orbmorse.curvature import morse_integral
    for weights in [(1, 2), (2, 3)]:
        orb, bundle = build_catalog_orbifold("wps", weights=weights)
        v = moishezon_check(orb, bundle, resolution=128)
        assert v.semipositive and v.positive_at_point
        assert v.integral_leq1 >= -v.quadrature_tolerance
        one_neg = morse_integral(orb, bundle, {1}, resolution=128,
                                 with_diagnostics=True)
        assert abs(one_neg.value) <= 1e-12
        assert one_neg.degenerate_fraction < 0.05
