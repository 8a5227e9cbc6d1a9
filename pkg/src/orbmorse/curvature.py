"""Curvature endomorphism, signature classification, and Morse integrals.

All operations are pure; quadrature nodes may be evaluated in parallel with
an ordered reduction, which the vectorized implementation performs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import GeometryError, UnsupportedModelError
from .geometry import ChartedOrbifold, EquivariantLineBundle, gauss_legendre_nodes

DEGENERACY_TOL = 1e-8
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class CurvatureSpectrum:
    """Eigenvalues of the curvature endomorphism at a point, with signature.

    ``signature`` is the number of negative eigenvalues, or the string
    "degenerate" when some eigenvalue sits within the tolerance of zero.
    """

    point: np.ndarray
    eigenvalues: np.ndarray
    signature: object


def curvature_endomorphism(bundle: EquivariantLineBundle, orb: ChartedOrbifold,
                           x, chart_index=0):
    """Curvature endomorphism at a point, as a Hermitian matrix.

    Solves the generalized Hermitian problem R v = lambda H v, i.e. returns
    the matrix of H^{-1} R expressed in an orthonormal frame; its eigenvalues
    do not depend on the frame.
    """
    chart = orb.charts[chart_index]
    H = chart.metric_at(x)
    R = bundle.curvature_at(chart_index, x)
    eigs = np.linalg.eigvalsh(H)
    if eigs.min() <= 0:
        raise GeometryError("metric is not positive definite at the requested point")
    C = np.linalg.cholesky(H)
    Cinv = np.linalg.inv(C)
    M = Cinv @ R @ Cinv.conj().T
    return 0.5 * (M + M.conj().T)


def curvature_spectrum(bundle, orb, x, chart_index=0, tol=DEGENERACY_TOL):
    chart = orb.charts[chart_index]
    H = chart.metric_at(x)
    R = bundle.curvature_at(chart_index, x)
    vals = scipy.linalg.eigh(R, H, eigvals_only=True)
    vals = np.sort(np.real(vals))
    return CurvatureSpectrum(point=np.asarray(x, dtype=complex),
                             eigenvalues=vals, signature=classify_point(vals, tol))


def classify_point(eigenvalues, tol=DEGENERACY_TOL):
    """Signature q = number of negative eigenvalues; "degenerate" near zero.

    Accepts either a CurvatureSpectrum or a plain eigenvalue sequence.
    """
    if tol <= 0:
        raise ValueError("classification tolerance must be positive")
    if isinstance(eigenvalues, CurvatureSpectrum):
        eigenvalues = eigenvalues.eigenvalues
    a = np.asarray(eigenvalues, dtype=float)
    if np.any(np.abs(a) <= tol):
        return DEGENERATE
    return int(np.sum(a < -tol))


@dataclass(frozen=True)
class MorseIntegralResult:
    value: float
    degenerate_fraction: float
    resolution: int


def morse_integral(orb: ChartedOrbifold, bundle: EquivariantLineBundle, q_set,
                   resolution=256, tol=DEGENERACY_TOL, with_diagnostics=False):
    """Integral of det(curvature endomorphism / 2 pi) over the signature region.

    q_set is the set of admissible signatures (e.g. {0}, or range(0, q + 1)
    for the strong-inequality region).  Quadrature nodes whose spectrum is
    degenerate at tolerance ``tol`` contribute zero; their weight fraction is
    returned as a diagnostic.  For one-dimensional charts the density
    det(Rdot) * kappa reduces to the curvature density itself, which the
    implementation uses after classifying each node.
    """
    q_set = set(int(q) for q in q_set)
    if not q_set:
        raise ValueError("q_set must be non-empty")
    n = orb.dimension
    if any(q < 0 or q > n for q in q_set):
        raise ValueError(f"q_set {sorted(q_set)} outside 0..{n}")
    if n != 1:
        raise UnsupportedModelError(
            "Morse integrals are quadrature-based and ship for one-dimensional "
            "models; higher-dimensional local models are flat with constant signature")
    total = 0.0
    degen_weight = 0.0
    all_weight = 0.0
    for k, chart in enumerate(orb.charts):
        nodes, weights = gauss_legendre_nodes(resolution, chart.box_radius)
        bumpw = np.asarray(chart.bump(nodes), dtype=float)
        if bundle.curvature_scalars is not None and chart.metric_scalar is not None:
            c = np.real(np.asarray(bundle.curvature_scalars[k](nodes)))
            h = np.real(np.asarray(chart.metric_scalar(nodes)))
            ratio = c / h
            degen = np.abs(ratio) <= tol
            sig = (ratio < -tol).astype(int)
            density = c / (2.0 * math.pi)      # det(Rdot/2pi) * kappa for n = 1
        else:
            ratio = np.empty(nodes.size)
            density = np.empty(nodes.size)
            degen = np.zeros(nodes.size, dtype=bool)
            sig = np.zeros(nodes.size, dtype=int)
            for i, z in enumerate(nodes):
                spec = curvature_spectrum(bundle, orb, np.atleast_1d(z), k, tol)
                degen[i] = spec.signature == DEGENERATE
                sig[i] = -1 if degen[i] else spec.signature
                H = chart.metric_at(np.atleast_1d(z))
                R = bundle.curvature_at(k, np.atleast_1d(z))
                density[i] = (np.linalg.det(R).real / (2 * math.pi) ** n)
        mask = np.isin(sig, list(q_set)) & ~degen
        total += float(np.dot(weights, bumpw * density * mask) / chart.order)
        degen_weight += float(np.dot(weights, bumpw * degen) / chart.order)
        all_weight += float(np.dot(weights, bumpw) / chart.order)
    result = MorseIntegralResult(value=total,
                                 degenerate_fraction=degen_weight / max(all_weight, 1e-300),
                                 resolution=resolution)
    return result if with_diagnostics else result.value
