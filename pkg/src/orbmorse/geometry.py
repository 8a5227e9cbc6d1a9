"""Charted orbifolds with linear finite group actions.

A chart is an open ball in C^n on which a finite group acts by unitary
matrices; the metric and every bundle datum are fields on the chart, and all
global quantities are assembled chart by chart with the 1/|G| weight of
orbifold integration.  Only catalog models are constructed (see catalog.py),
so the attachment data between charts stays minimal: each chart carries its
own smooth bump function and quadrature box, fixed by the catalog so that the
bumps form a partition of unity downstairs.

Metric convention: ``metric_field(Z)`` returns the Hermitian matrix H(Z) of
the metric in the fixed chart frame, normalized so H(0) = Id; the Riemannian
volume density against Lebesgue measure is det H, hence the volume-density
ratio kappa(Z) = det H(Z).

All types are immutable after construction and all operations are pure;
quadrature accumulates in a fixed chart/node order, so results are
schedule-independent under concurrent evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, GeometryError, IntegrandError

UNITARY_TOL = 1e-12
INVARIANCE_TOL = 1e-10
INTEGRAND_INVARIANCE_TOL = 1e-8


@dataclass(frozen=True)
class GroupElement:
    """One element of a chart group: linear action plus bundle actions.

    matrix : unitary action on the chart coordinates.
    line_phase : angle theta_g; the element acts on the line bundle fiber
        (along its fixed set) by e^{i theta_g}, so on the p-th power by
        e^{i p theta_g}.
    aux_action : unitary action on the auxiliary bundle fiber.
    """

    matrix: np.ndarray
    line_phase: float = 0.0
    aux_action: np.ndarray = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        aux = self.aux_action if self.aux_action is not None else np.eye(1)
        object.__setattr__(self, "aux_action", np.asarray(aux, dtype=complex))
        for name, mat in (("matrix", self.matrix), ("aux_action", self.aux_action)):
            err = np.max(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0])))
            if err > UNITARY_TOL:
                raise ConfigurationError(
                    f"group element {name} is not unitary (defect {err:.2e})")

    @property
    def is_identity(self):
        n = self.matrix.shape[0]
        return np.max(np.abs(self.matrix - np.eye(n))) <= UNITARY_TOL


# products of tolerance-unitary matrices drift by a few ulps; match loosely
_MATCH_TOL = 1e-10


def _find_element(group, matrix):
    for k, g in enumerate(group):
        if np.max(np.abs(g.matrix - matrix)) <= _MATCH_TOL:
            return k
    return None


def check_group(group):
    """Validate closure, inverses and effectiveness of a chart group.

    Effectiveness: the identity matrix appears exactly once.  Closure and
    inverses are matched numerically to the unitary tolerance.
    """
    if not group:
        raise ConfigurationError("chart group must contain at least the identity")
    ids = [g for g in group if g.is_identity]
    if len(ids) == 0:
        raise ConfigurationError("chart group has no identity element")
    if len(ids) > 1:
        raise ConfigurationError(
            "chart group action is not effective: several elements act as the identity")
    for g in group:
        if _find_element(group, g.matrix.conj().T) is None:
            raise ConfigurationError("chart group is not closed under inverses")
        for h in group:
            if _find_element(group, g.matrix @ h.matrix) is None:
                raise ConfigurationError("chart group is not closed under products")


@dataclass(frozen=True)
class OrbifoldChart:
    """One uniformizing chart: a ball in C^n with a finite unitary group.

    metric_field(Z) -> Hermitian (n, n) matrix, group-invariant, Id at 0.
    bump(Z) -> weight of this chart in the partition of unity (invariant).
    box_radius : half-side of the real quadrature box covering supp(bump).
    metric_scalar : optional vectorized density for 1-d charts; maps an array
        of chart points to the scalar metric values h(z) (= det H for n = 1).
    """

    dimension: int
    group: tuple
    metric_field: object
    radius: float
    bump: object = None
    box_radius: float = 1.0
    center_label: str = ""
    metric_scalar: object = None

    def __post_init__(self):
        check_group(tuple(self.group))
        H0 = np.asarray(self.metric_field(np.zeros(self.dimension, dtype=complex)))
        if np.max(np.abs(H0 - np.eye(self.dimension))) > 1e-9:
            raise GeometryError("metric_field(0) must be the identity (normalized frame)")
        if self.bump is None:
            object.__setattr__(self, "bump", lambda Z: np.ones(np.shape(Z)))

    @property
    def order(self):
        return len(self.group)

    def metric_at(self, Z):
        Z = np.asarray(Z, dtype=complex).reshape(self.dimension)
        H = np.asarray(self.metric_field(Z), dtype=complex)
        herm = np.max(np.abs(H - H.conj().T))
        if herm > 1e-10:
            raise GeometryError(f"metric matrix not Hermitian (defect {herm:.2e})")
        return H

    def check_invariance(self, rng, samples=12):
        """Sampled metric invariance: g^dagger H(gZ) g == H(Z)."""
        n = self.dimension
        r = min(self.radius, self.box_radius)
        for _ in range(samples):
            Z = (rng.uniform(-r, r, n) + 1j * rng.uniform(-r, r, n)) * 0.5
            H = self.metric_at(Z)
            for g in self.group:
                Hg = self.metric_at(g.matrix @ Z)
                err = np.max(np.abs(g.matrix.conj().T @ Hg @ g.matrix - H))
                if err > INVARIANCE_TOL:
                    raise GeometryError(
                        f"metric field is not group invariant (defect {err:.2e})")


def volume_density(chart: OrbifoldChart, Z):
    """Volume-density ratio kappa(Z) = det H(Z) against the frame metric at 0.

    Exactly 1 at the chart center by the normalization H(0) = Id.
    """
    Z = np.asarray(Z, dtype=complex).reshape(chart.dimension)
    if chart.radius != math.inf and np.linalg.norm(Z) >= chart.radius:
        raise GeometryError(
            f"point at |Z| = {np.linalg.norm(Z):.3f} outside chart of radius {chart.radius}")
    H = chart.metric_at(Z)
    det = float(np.linalg.det(H).real)
    if det <= 0:
        raise GeometryError("metric is not positive definite at the requested point")
    return det


@dataclass(frozen=True)
class ChartedOrbifold:
    """A compact complex orbifold presented by catalog charts.

    singular_locus_fn(chart_index, Z) -> distance from the image of Z to the
    singular set, in the chart coordinates.
    """

    charts: tuple
    singular_locus_fn: object
    catalog_id: str
    params: dict = field(default_factory=dict)
    # catalog-supplied maps between charts (used by integration diagnostics only)
    transitions: dict = field(default_factory=dict)

    @property
    def dimension(self):
        return self.charts[0].dimension

    def singular_distance(self, chart_index, Z):
        return float(self.singular_locus_fn(chart_index, np.asarray(Z, dtype=complex)))


@dataclass(frozen=True)
class EquivariantLineBundle:
    """Hermitian line bundle data on each chart, plus an auxiliary bundle.

    curvature_fields[k](Z) -> Hermitian (n, n) matrix of the Chern curvature
    in the frame of chart k (same frame as the metric).  aux_rank is the rank
    of the auxiliary twisting bundle; the per-element fiber actions live on
    the chart group elements.
    """

    curvature_fields: tuple
    aux_rank: int = 1
    label: str = ""
    # optional vectorized scalar curvature densities for 1-d charts
    curvature_scalars: tuple = None

    def curvature_at(self, chart_index, Z):
        R = np.asarray(self.curvature_fields[chart_index](np.asarray(Z, dtype=complex)),
                       dtype=complex)
        herm = np.max(np.abs(R - R.conj().T))
        if herm > UNITARY_TOL * 10:
            raise GeometryError(f"curvature matrix not Hermitian (defect {herm:.2e})")
        return R


# ---------------------------------------------------------------------------
# quadrature

_GL_CACHE = {}


def gauss_legendre_nodes(resolution, radius):
    """Tensor Gauss-Legendre nodes/weights on the square [-radius, radius]^2."""
    key = (int(resolution), float(radius))
    if key not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(int(resolution))
        x = x * radius
        w = w * radius
        X, Y = np.meshgrid(x, x, indexing="ij")
        W = np.outer(w, w)
        _GL_CACHE[key] = (X.ravel() + 1j * Y.ravel(), W.ravel())
    return _GL_CACHE[key]


def _chart_nodes(chart, resolution):
    if chart.dimension != 1:
        raise GeometryError(
            "quadrature is implemented for one-dimensional charts; "
            "higher-dimensional catalog models are flat and need no quadrature")
    return gauss_legendre_nodes(resolution, chart.box_radius)


def orbifold_integrate(fields, orb: ChartedOrbifold, resolution=128, rng=None,
                       check_invariance=True):
    """Group-corrected integral of a scalar field against the orbifold volume.

    Parameters
    ----------
    fields : callable or sequence of callables
        Chart-level representatives of the integrand.  Each callable takes a
        complex array of chart points (vectorized, shape (m,)) and returns
        real or complex values of shape (m,).  A single callable is applied
        with the chart index as first argument: fields(chart_index, Z).
    orb : ChartedOrbifold
    resolution : nodes per real axis of the tensor Gauss-Legendre rule.
    rng : numpy Generator for the invariance spot check (seeded by caller).

    The value is sum over charts of 1/|G| * integral of bump * f * kappa,
    evaluated in a fixed chart/node order so reruns are bit-identical.
    """
    if callable(fields):
        per_chart = [lambda Z, k=k: fields(k, Z) for k in range(len(orb.charts))]
    else:
        per_chart = list(fields)
        if len(per_chart) != len(orb.charts):
            raise IntegrandError("one chart-level representative per chart is required")
    rng = rng if rng is not None else np.random.default_rng(0)
    total = 0.0
    for k, chart in enumerate(orb.charts):
        nodes, weights = _chart_nodes(chart, resolution)
        vals = np.asarray(per_chart[k](nodes))
        if check_invariance and chart.order > 1:
            idx = rng.integers(0, nodes.size, size=min(8, nodes.size))
            pts = nodes[idx]
            ref = np.asarray(per_chart[k](pts))
            for g in chart.group:
                moved = np.asarray(per_chart[k](g.matrix[0, 0] * pts))
                mismatch = np.max(np.abs(moved - ref))
                if mismatch > INTEGRAND_INVARIANCE_TOL:
                    raise IntegrandError(
                        f"integrand not invariant on chart {k} (mismatch {mismatch:.2e})")
        bump = np.asarray(chart.bump(nodes), dtype=float)
        kappa = _kappa_vector(chart, nodes)
        contrib = np.dot(weights, bump * kappa * np.real(vals)) / chart.order
        total += float(contrib)
    return total


def _kappa_vector(chart, nodes):
    """Vectorized volume density on chart nodes (n = 1 fast path)."""
    if chart.metric_scalar is not None:
        return np.real(np.asarray(chart.metric_scalar(nodes)))
    return np.array([volume_density(chart, z) for z in nodes])
