"""Built-in orbifold models with equivariant line bundles.

Three families are constructed, selected by string id:

``local-model``
    C^n / Z_k with the flat metric and a constant-curvature bundle
    diag(a_1, ..., a_n); the cyclic group acts by coordinate rotations
    z_j -> exp(2 pi i w_j / k) z_j.

``wps``
    The weighted projective line P(a, b) for coprime positive weights, with
    two charts around the coordinate points.  The metric is a global
    conformal profile positive in both uniformizing charts; the bundle is the
    degree-1 tautological dual with a weighted Fubini-Study potential,
    normalized so that the curvature endomorphism equals 1 at the center of a
    regular chart and the curvature integral over P(1, 1) equals 1.  Volume
    for P(1, 1) is exactly 1 with the shipped profile.

``torus``
    The square torus C / (Z + iZ) with a constant-curvature bundle of degree
    d, optionally quotiented by the half-turn z -> -z (k = 2).

All charts are one-dimensional except the local models, which support n <= 3.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError
from .geometry import (ChartedOrbifold, EquivariantLineBundle, GroupElement,
                       OrbifoldChart)

CATALOG_IDS = ("local-model", "wps", "torus")

# partition-of-unity radii in the x-chart of a weighted projective line
WPS_BUMP_INNER = 1.0
WPS_BUMP_OUTER = 1.3
WPS_BETA = math.pi          # metric profile scale; gives vol(P(1,1)) = 1


def _smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    lo = t <= 0.0
    hi = t >= 1.0
    mid = ~(lo | hi)
    out = np.zeros_like(t)
    out[hi] = 1.0
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


def radial_bump(r, inner, outer):
    """Smooth cutoff: 1 for r <= inner, 0 for r >= outer."""
    return 1.0 - _smoothstep((np.asarray(r) - inner) / (outer - inner))


def build_catalog_orbifold(catalog_id, **params):
    """Construct a catalog model.

    Returns the pair (ChartedOrbifold, EquivariantLineBundle).  Unknown ids
    and invalid parameters raise ConfigurationError with a description.
    """
    if catalog_id == "local-model":
        return _build_local_model(**params)
    if catalog_id == "wps":
        return _build_weighted_projective(**params)
    if catalog_id == "torus":
        return _build_torus(**params)
    raise ConfigurationError(
        f"unknown catalog id {catalog_id!r}; available: {', '.join(CATALOG_IDS)}")


# ---------------------------------------------------------------------------
# local model C^n / Z_k


def _build_local_model(k=2, a=(1.0,), weights=None, theta=0.0, aux_rank=1):
    a = tuple(float(x) for x in np.atleast_1d(a))
    n = len(a)
    if n > 3:
        raise ConfigurationError("local models are limited to n <= 3")
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ConfigurationError(f"local-model group order k={k} must be an integer >= 1")
    weights = tuple(int(w) for w in (weights if weights is not None else (1,) * n))
    if len(weights) != n:
        raise ConfigurationError("one action weight per coordinate is required")
    if k > 1 and math.gcd(k, *[w % k for w in weights] or [k]) != 1:
        raise ConfigurationError(
            f"action weights {weights} mod k={k} generate a proper subgroup; "
            "the action is not effective")

    group = []
    for m in range(k):
        phases = np.exp(2j * np.pi * np.array(weights) * m / k)
        group.append(GroupElement(matrix=np.diag(phases),
                                  line_phase=(theta * m) % (2 * math.pi),
                                  aux_action=np.eye(aux_rank)))

    def metric_field(Z):
        return np.eye(n)

    def metric_scalar(nodes):
        return np.ones(np.shape(nodes))

    chart = OrbifoldChart(dimension=n, group=tuple(group),
                          metric_field=metric_field, radius=math.inf,
                          box_radius=1.0, center_label="origin",
                          metric_scalar=metric_scalar if n == 1 else None)

    gens = group[1:] if k > 1 else []

    def singular_distance(chart_index, Z):
        if not gens:
            return 10.0
        Z = np.asarray(Z, dtype=complex).reshape(n)
        best = math.inf
        for g in gens:
            normal = np.abs(np.diag(g.matrix) - 1.0) > 1e-12
            best = min(best, float(np.linalg.norm(Z[normal])))
        return best

    orb = ChartedOrbifold(charts=(chart,), singular_locus_fn=singular_distance,
                          catalog_id="local-model",
                          params={"k": k, "a": a, "weights": weights,
                                  "theta": theta, "aux_rank": aux_rank})

    Rmat = np.diag(np.asarray(a, dtype=float)).astype(complex)

    def curvature_field(Z):
        return Rmat

    def curvature_scalar(nodes):
        return np.full(np.shape(nodes), a[0])

    bundle = EquivariantLineBundle(
        curvature_fields=(curvature_field,), aux_rank=aux_rank,
        label=f"flat rank-1 bundle, curvature diag{a}",
        curvature_scalars=(curvature_scalar,) if n == 1 else None)
    return orb, bundle


# ---------------------------------------------------------------------------
# weighted projective line P(a, b)


def _wps_metric_profiles(a, b, beta):
    """Metric densities in the two normalized charts and the chart scales.

    x-chart density:  h_x(r) = (1 + beta r^2)^(-(1 + a/b)),   h_x(0) = 1.
    y-chart (raw w):  h_y(s) = (b/a)^2 (s^(2b/a) + beta)^(-(1 + a/b)),
    then w is rescaled by gamma = sqrt(h_y(0)) so the density is 1 at 0.
    """
    expo = 1.0 + a / b

    def h_x(r2):
        return (1.0 + beta * r2) ** (-expo)

    gamma2 = (b / a) ** 2 * beta ** (-expo)
    gamma = math.sqrt(gamma2)

    def h_y(r2_normalized):
        s2 = r2_normalized / gamma2            # |w|^2 from |w'|^2
        return (b / a) ** 2 * (s2 ** (b / a) + beta) ** (-expo) / gamma2

    return h_x, h_y, gamma


def _build_weighted_projective(weights=(1, 1), dent=None):
    try:
        a, b = (int(w) for w in weights)
    except (TypeError, ValueError):
        raise ConfigurationError(
            "geometric weighted projective models take exactly two weights; "
            "cohomology counting accepts any number of weights separately")
    if a <= 0 or b <= 0:
        raise ConfigurationError(f"weights must be positive, got {(a, b)}")
    if math.gcd(a, b) != 1:
        raise ConfigurationError(f"weights {(a, b)} are not coprime")
    if dent is not None and (a, b) != (1, 1):
        raise ConfigurationError(
            "the tunable-signature dent requires trivial isotropy: weights (1, 1)")

    beta = WPS_BETA
    h_x, h_y, gamma = _wps_metric_profiles(a, b, beta)

    # bundle potential weights: curvature endomorphism 1 at the x-center when
    # that center is regular for the curvature (a = 1), see module docstring
    c_x = 1.0
    c_y = a * b / 2.0 if a == 1 else 1.0

    def curv_x(r2):
        # 2 * del delbar of (1/(ab)) log(c_x + c_y r^(2a)), scalar density
        num = (2.0 / (a * b)) * c_x * c_y * a * a * r2 ** (a - 1)
        return num / (c_x + c_y * r2 ** a) ** 2

    def curv_y_raw(s2):
        num = (2.0 / (a * b)) * c_x * c_y * b * b * s2 ** (b - 1)
        return num / (c_y + c_x * s2 ** b) ** 2

    if dent is not None:
        amp = float(dent.get("amplitude", 0.6))
        z0 = complex(dent.get("center", 0.45 + 0.0j))
        sig = float(dent.get("width", 0.12))

    def curvature_scalar_x(nodes):
        nodes = np.asarray(nodes, dtype=complex)
        r2 = np.abs(nodes) ** 2
        val = curv_x(r2)
        if dent is not None:
            v2 = np.abs(nodes - z0) ** 2
            val = val + 2.0 * amp * np.exp(-v2 / sig**2) * (v2 - sig**2) / sig**4
        return val

    def curvature_scalar_y(nodes):
        nodes = np.atleast_1d(np.asarray(nodes, dtype=complex))
        r2w = np.abs(nodes / gamma) ** 2          # raw |w|^2
        val = curv_y_raw(r2w) / gamma**2
        if dent is not None:
            # exact transport for (1, 1): z = gamma / w', |dz/dw'|^2 = gamma^2/|w'|^4
            extra = np.zeros_like(val)
            safe = np.abs(nodes) > 1e-9           # the dent vanishes at z = inf
            zs = gamma / nodes[safe]
            v2 = np.abs(zs - z0) ** 2
            jac2 = gamma**2 / np.abs(nodes[safe]) ** 4
            extra[safe] = (2.0 * amp * np.exp(-v2 / sig**2)
                           * (v2 - sig**2) / sig**4 * jac2)
            val = val + extra
        return val

    def metric_scalar_x(nodes):
        return h_x(np.abs(np.asarray(nodes, dtype=complex)) ** 2)

    def metric_scalar_y(nodes):
        return h_y(np.abs(np.asarray(nodes, dtype=complex)) ** 2)

    def metric_field_x(Z):
        return np.array([[metric_scalar_x(np.atleast_1d(Z))[0]]], dtype=complex)

    def metric_field_y(Z):
        return np.array([[metric_scalar_y(np.atleast_1d(Z))[0]]], dtype=complex)

    def group_cyclic(order, exponent, theta_unit):
        els = []
        for m in range(order):
            els.append(GroupElement(
                matrix=np.array([[np.exp(2j * np.pi * exponent * m / order)]]),
                line_phase=(theta_unit * m) % (2 * math.pi)))
        return tuple(els)

    # isotropy Z_a at [1:0] acts on z by a primitive root; the bundle fiber
    # character matches invariant-section counting (z^m survives iff
    # b m = p mod a for degree p)
    group_x = group_cyclic(a, b % a if a > 1 else 0, -2 * math.pi / a if a > 1 else 0.0)
    group_y = group_cyclic(b, a % b if b > 1 else 0, -2 * math.pi / b if b > 1 else 0.0)

    def z_abs_from_y(wp_abs):
        """|z| of the downstairs point seen from the normalized y-coordinate."""
        w_abs = np.asarray(wp_abs, dtype=float) / gamma
        with np.errstate(divide="ignore"):
            return np.where(w_abs > 0, w_abs ** (-b / a), np.inf)

    def bump_x(nodes):
        r = np.abs(np.asarray(nodes, dtype=complex))
        return radial_bump(r, WPS_BUMP_INNER, WPS_BUMP_OUTER)

    def bump_y(nodes):
        zabs = z_abs_from_y(np.abs(np.asarray(nodes, dtype=complex)))
        return 1.0 - radial_bump(zabs, WPS_BUMP_INNER, WPS_BUMP_OUTER)

    box_x = WPS_BUMP_OUTER * 1.02
    box_y = gamma * WPS_BUMP_INNER ** (-a / b) * 1.05

    chart_x = OrbifoldChart(dimension=1, group=group_x, metric_field=metric_field_x,
                            radius=math.inf, bump=bump_x, box_radius=box_x,
                            center_label="[1:0]", metric_scalar=metric_scalar_x)
    chart_y = OrbifoldChart(dimension=1, group=group_y, metric_field=metric_field_y,
                            radius=math.inf, bump=bump_y, box_radius=box_y,
                            center_label="[0:1]", metric_scalar=metric_scalar_y)

    singular_orders = (a, b)

    def singular_distance(chart_index, Z):
        z = np.asarray(Z, dtype=complex).reshape(1)[0]
        own = abs(z) if singular_orders[chart_index] > 1 else math.inf
        other_order = singular_orders[1 - chart_index]
        if other_order > 1:
            other = _radial_tail_length(chart_index, abs(z), a, b, beta, gamma)
        else:
            other = math.inf
        d = min(own, other)
        return 10.0 if d == math.inf else d

    def x_abs_to_y_abs(z_abs):
        z_abs = np.asarray(z_abs, dtype=float)
        with np.errstate(divide="ignore"):
            return gamma * np.where(z_abs > 0, z_abs ** (-a / b), np.inf)

    orb = ChartedOrbifold(
        charts=(chart_x, chart_y), singular_locus_fn=singular_distance,
        catalog_id="wps",
        params={"weights": (a, b), "dent": dent, "gamma": gamma, "beta": beta,
                "bundle_weights": (c_x, c_y)},
        transitions={"x_abs_to_y_abs": x_abs_to_y_abs, "y_abs_to_x_abs": z_abs_from_y})

    def curvature_field_x(Z):
        return np.array([[curvature_scalar_x(np.atleast_1d(Z))[0]]], dtype=complex)

    def curvature_field_y(Z):
        return np.array([[curvature_scalar_y(np.atleast_1d(Z))[0]]], dtype=complex)

    bundle = EquivariantLineBundle(
        curvature_fields=(curvature_field_x, curvature_field_y), aux_rank=1,
        label=f"O(1) on P({a},{b})" + (" with signature dent" if dent else ""),
        curvature_scalars=(curvature_scalar_x, curvature_scalar_y))
    return orb, bundle


@lru_cache(maxsize=64)
def _radial_profile_table(chart_index, a, b, beta, gamma):
    """Lookup table of arc length from radius r to the opposite chart center."""
    h_x, h_y, _ = _wps_metric_profiles(a, b, beta)
    dens = h_x if chart_index == 0 else h_y
    r = np.concatenate([np.linspace(0, 5, 400), np.geomspace(5, 2e3, 300)])
    speed = np.sqrt(dens(r**2))
    # arc length from r out to the far cutoff (the opposite center sits at
    # r = infinity in this chart); the integrand decays like r^{-(1 + a/b)}
    seg = 0.5 * (speed[1:] + speed[:-1]) * np.diff(r)
    tail = np.concatenate([[0.0], np.cumsum(seg[::-1])])[::-1]
    return r, tail


def _radial_tail_length(chart_index, r_abs, a, b, beta, gamma):
    grid, tail = _radial_profile_table(chart_index, a, b, beta, gamma)
    return float(np.interp(min(r_abs, grid[-1]), grid, tail))


# ---------------------------------------------------------------------------
# square torus quotient


def _build_torus(d=1, k=1, aux_rank=1):
    # d = 0 is the trivial flat bundle (the inconclusive reference for the
    # Moishezon criteria); negative degrees give the semi-negative reference
    # model and are supported for the unquotiented torus only
    if not isinstance(d, (int, np.integer)):
        raise ConfigurationError(f"torus bundle degree d={d} must be an integer")
    if k not in (1, 2):
        raise ConfigurationError(
            f"torus quotient order k={k} not in the catalog: the square lattice "
            "carries the half-turn (k = 2); other symmetries are not shipped")
    if d < 0 and k != 1:
        raise ConfigurationError("negative degrees ship without the half-turn quotient")
    group = [GroupElement(matrix=np.eye(1))]
    if k == 2:
        group.append(GroupElement(matrix=-np.eye(1)))

    def metric_field(Z):
        return np.eye(1)

    def metric_scalar(nodes):
        return np.ones(np.shape(nodes))

    chart = OrbifoldChart(dimension=1, group=tuple(group), metric_field=metric_field,
                          radius=math.inf, box_radius=0.5, center_label="cell",
                          metric_scalar=metric_scalar)

    half_points = (0.0 + 0.0j, 0.5 + 0.0j, 0.5j, 0.5 + 0.5j)

    def singular_distance(chart_index, Z):
        if k == 1:
            return 10.0
        z = np.asarray(Z, dtype=complex).reshape(1)[0]
        best = math.inf
        for p in half_points:
            for mx in (-1, 0, 1):
                for my in (-1, 0, 1):
                    best = min(best, abs(z - (p + mx + 1j * my)))
        return best

    orb = ChartedOrbifold(charts=(chart,), singular_locus_fn=singular_distance,
                          catalog_id="torus",
                          params={"d": int(d), "k": int(k), "aux_rank": aux_rank})

    a_val = 2.0 * math.pi * d

    def curvature_field(Z):
        return np.array([[a_val]], dtype=complex)

    def curvature_scalar(nodes):
        return np.full(np.shape(nodes), a_val)

    bundle = EquivariantLineBundle(curvature_fields=(curvature_field,),
                                   aux_rank=aux_rank,
                                   label=f"degree-{d} bundle on the square torus",
                                   curvature_scalars=(curvature_scalar,))
    return orb, bundle
