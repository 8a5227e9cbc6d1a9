"""Closed-form model heat kernels for constant-curvature flat models.

Everything in this module lives on C^n with the flat metric, a line bundle
of constant curvature with eigenvalues ``a = (a_1, ..., a_n)`` in a unitary
frame, and an optional finite-group element acting by a unitary matrix that
commutes with ``diag(a)``.  The three central objects are

* the diagonal density ``heat_diagonal_limit`` (the large-``p`` limit of the
  rescaled diagonal heat kernel at a regular point),
* the group-twisted Gaussian ``twisted_gaussian`` controlling the extra
  terms near a quotient singularity, and
* the full two-point Mehler kernel ``model_heat_kernel``.

Numerical conventions.  All kernels are densities with respect to Lebesgue
measure on C^n ~ R^{2n}.  The scalar one-variable building block is

    K_a(u; z, z') = g1(ua) / (2 pi u)
                    * exp( -c(ua)/(2u) |z - z'|^2 + i (a/2) Im(z conj(z')) )

with g1(x) = x / (1 - e^{-x}) and c(x) = (x/2) / tanh(x/2); both are smooth
and equal to 1 at x = 0, so the zero-curvature convention
K_0 = (2 pi u)^{-1} exp(-|z-z'|^2 / (2u)) is the continuous limit.

Evaluation is stateless and pure; unrestricted parallel calls are safe.
"""

from __future__ import annotations

import math
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrumError

# Eigenvalues with |a| <= ZERO_EIGENVALUE_TOL take the exact zero-mode branch;
# between that and SERIES_SWITCH_TOL the factor functions use a short Taylor
# series so the 1 - e^{-ua} cancellation never degrades accuracy.
ZERO_EIGENVALUE_TOL = 1e-7
SERIES_SWITCH_TOL = 1e-4

TWO_PI = 2.0 * math.pi


def _factor_series(x):
    """4-term Taylor series of x / (1 - e^{-x})."""
    return 1.0 + x / 2.0 + x * x / 12.0 - x**4 / 720.0


def factor_plus(a, u):
    """u * a / (1 - e^{-ua}), the per-eigenvalue prefactor outside a degree subset.

    Returns the dimensionless factor g1(ua); divide by u to recover
    a / (1 - e^{-ua}).  Zero modes contribute exactly 1 (the 1/u convention).
    """
    if abs(a) <= ZERO_EIGENVALUE_TOL:
        return 1.0
    x = u * a
    if abs(a) <= SERIES_SWITCH_TOL:
        return _factor_series(x)
    return x / -math.expm1(-x)


def factor_minus(a, u):
    """u * a / (e^{ua} - 1) = factor_plus(-a, u), the inside-subset prefactor."""
    if abs(a) <= ZERO_EIGENVALUE_TOL:
        return 1.0
    x = u * a
    if abs(a) <= SERIES_SWITCH_TOL:
        return _factor_series(-x)
    return x / math.expm1(x)


def _stretch_even(x):
    """(x/2) / sinh(x/2); even, 1 at 0."""
    if abs(x) <= 1e-4:
        return 1.0 - x * x / 24.0 + 7.0 * x**4 / 5760.0
    return (x / 2.0) / math.sinh(x / 2.0)


def _coth_even(x):
    """(x/2) / tanh(x/2); even, 1 at 0."""
    if abs(x) <= 1e-4:
        return 1.0 + x * x / 12.0 - x**4 / 720.0
    return (x / 2.0) / math.tanh(x / 2.0)


def exterior_exp_trace(a, u, q):
    """Trace over (0, q)-forms of the exponential of the curvature action.

    This is the q-th elementary symmetric function of {e^{-u a_j}}:
    the sum over q-element index subsets of exp(-u sum of the selected a_j).

    Parameters
    ----------
    a : sequence of float
        Curvature eigenvalues.
    u : float
        Positive time parameter.
    q : int
        Form degree, 0 <= q <= len(a).
    """
    a = np.asarray(a, dtype=float)
    n = a.size
    if not 0 <= q <= n:
        raise ValueError(f"degree q={q} out of range 0..{n}")
    # Vieta recurrence: expand prod_j (1 + t e^{-u a_j}) and read off t^q.
    coeffs = np.zeros(q + 1)
    coeffs[0] = 1.0
    for aj in a:
        w = math.exp(-u * aj)
        for k in range(q, 0, -1):
            coeffs[k] += w * coeffs[k - 1]
    return float(coeffs[q])


@dataclass(frozen=True)
class ModelPoint:
    """Pointwise data of a flat constant-curvature model.

    Attributes
    ----------
    eigenvalues : tuple of float
        Spectrum of the curvature endomorphism at the point (unitary frame).
    u : float
        Positive time parameter.
    aux_rank : int
        Rank of the auxiliary twisting bundle.
    group_phases : tuple of float or None
        Eigenphases (radians) of the group element on the normal coordinates,
        i.e. the element acts by diag(e^{i phi_j}).  None when no element is
        attached.  The element must commute with diag(eigenvalues); supplying
        the phases in the eigenvalue order encodes exactly that.
    """

    eigenvalues: tuple
    u: float
    aux_rank: int = 1
    group_phases: tuple = None

    def __post_init__(self):
        if self.u <= 0:
            raise ValueError("time parameter u must be positive")
        object.__setattr__(self, "eigenvalues", tuple(float(x) for x in self.eigenvalues))
        if self.group_phases is not None:
            phases = tuple(float(x) for x in self.group_phases)
            if len(phases) != len(self.eigenvalues):
                raise ValueError("one group phase per eigenvalue is required")
            object.__setattr__(self, "group_phases", phases)

    @property
    def dim(self):
        return len(self.eigenvalues)


def model_point_from_matrices(eigenvalues, u, group_matrix=None, aux_rank=1,
                              commute_tol=1e-10):
    """Build a ModelPoint from a unitary group matrix, checking commutation.

    The matrix must commute with diag(eigenvalues) to ``commute_tol``; its
    eigenphases are then extracted blockwise on the eigenvalue clusters so the
    phase order matches the eigenvalue order.
    """
    a = np.asarray(eigenvalues, dtype=float)
    if group_matrix is None:
        return ModelPoint(tuple(a), u, aux_rank=aux_rank)
    U = np.asarray(group_matrix, dtype=complex)
    D = np.diag(a)
    comm = U @ D - D @ U
    if np.max(np.abs(comm)) > commute_tol:
        raise ValueError("group element does not commute with the curvature")
    phases = np.empty(a.size)
    visited = np.zeros(a.size, dtype=bool)
    for j in range(a.size):
        if visited[j]:
            continue
        cluster = np.abs(a - a[j]) <= commute_tol
        block = U[np.ix_(cluster, cluster)]
        lam = np.linalg.eigvals(block)
        phases[cluster] = np.sort(np.angle(lam))
        visited |= cluster
    return ModelPoint(tuple(a), u, aux_rank=aux_rank, group_phases=tuple(phases))


@dataclass(frozen=True)
class LimitDensity:
    """Diagonal heat-density limit at a point, per degree-q subspace.

    ``trace`` is the scalar trace over (0,q)-forms tensored with the auxiliary
    bundle; ``subsets``/``diagonal`` give the endomorphism, which is diagonal
    in the eigenframe basis indexed by q-element subsets (each entry still to
    be tensored with the identity of the auxiliary bundle).
    """

    trace: float
    subsets: tuple
    diagonal: np.ndarray
    rank: int = 1


def heat_diagonal_limit(point: ModelPoint, q):
    """Limit of the rescaled diagonal heat kernel on (0, q)-forms.

    Returns a LimitDensity whose trace equals

        (2 pi)^{-n} rank(E) * sum over q-subsets J of
            prod_{j in J} a_j/(e^{u a_j}-1) * prod_{j not in J} a_j/(1-e^{-u a_j})

    with the 1/u convention for zero eigenvalues.  The subset expansion keeps
    every factor bounded, so large negative eigenvalues never overflow.
    """
    a = point.eigenvalues
    u = point.u
    n = len(a)
    if not 0 <= q <= n:
        raise ValueError(f"degree q={q} out of range 0..{n}")
    plus = [factor_plus(aj, u) / u for aj in a]
    minus = [factor_minus(aj, u) / u for aj in a]
    subsets = tuple(itertools.combinations(range(n), q))
    diag = np.empty(len(subsets))
    for i, J in enumerate(subsets):
        val = TWO_PI ** (-n)
        inJ = set(J)
        for j in range(n):
            val *= minus[j] if j in inJ else plus[j]
        diag[i] = val
    return LimitDensity(trace=float(diag.sum() * point.aux_rank),
                        subsets=subsets, diagonal=diag, rank=point.aux_rank)


def twisted_gaussian(point: ModelPoint, Z):
    """Group-twisted Gaussian factor at a normal-direction displacement Z.

    For a group element acting by diag(e^{i phi_j}) on the directions normal
    to its fixed set, the factor is

        exp( sum_j |Z_j|^2 / (2u) * [ g1(u a_j)(e^{-i phi_j} - 1)
                                      + g2(u a_j)(e^{i phi_j} - 1) ] )

    with g1(x) = x/(1-e^{-x}), g2(x) = x/(e^x-1).  Zero eigenvalues reduce to
    exp(-|g^{-1}Z - Z|^2 / (2u)).  The value is complex in general; it is real
    whenever every phase is 0 or pi, and its modulus is at most 1 for
    non-negative curvature, with equality only at Z = 0.
    """
    if point.group_phases is None:
        raise ValueError("ModelPoint carries no group element")
    Z = np.asarray(Z, dtype=complex).reshape(point.dim)
    u = point.u
    expo = 0.0 + 0.0j
    for aj, phij, zj in zip(point.eigenvalues, point.group_phases, Z):
        g1 = factor_plus(aj, u)
        g2 = factor_minus(aj, u)
        w = np.exp(-1j * phij) - 1.0
        expo += (abs(zj) ** 2 / (2.0 * u)) * (g1 * w + g2 * np.conj(w))
    return complex(np.exp(expo))


@dataclass(frozen=True)
class MehlerKernel:
    """Two-point model heat kernel, factored for degree-wise access.

    ``scalar`` is the degree-0 value (a complex density including the
    e^{u tau / 2} twist); multiplying by ``exp(-u sum_{j in J} a_j)`` gives the
    diagonal entry on the form-basis subset J.
    """

    point: ModelPoint
    scalar: complex

    def degree_entry(self, J):
        a = self.point.eigenvalues
        s = sum(a[j] for j in J)
        return self.scalar * math.exp(-self.point.u * s)

    def degree_trace(self, q, form_phases=None):
        """Trace over (0,q)-forms, optionally twisted by a group action.

        ``form_phases`` are the eigenphases of the group element acting on the
        coordinates; the induced action on the antiholomorphic frame dzbar_j
        multiplies subset J by prod_{j in J} e^{i phi_j}.
        """
        a = self.point.eigenvalues
        u = self.point.u
        n = len(a)
        if not 0 <= q <= n:
            raise ValueError(f"degree q={q} out of range 0..{n}")
        weights = np.exp(-u * np.asarray(a))
        if form_phases is not None:
            weights = weights * np.exp(1j * np.asarray(form_phases))
        coeffs = np.zeros(q + 1, dtype=complex)
        coeffs[0] = 1.0
        for w in weights:
            for k in range(q, 0, -1):
                coeffs[k] += w * coeffs[k - 1]
        return complex(self.scalar * coeffs[q])


def model_heat_kernel(point: ModelPoint, Z, Zprime, group_matrix=None):
    """Model heat kernel e^{-u L0}(g^{-1} Z, Z') for the flat model.

    Z and Z' are points of C^n in the eigenframe of the curvature.  When
    ``group_matrix`` is None the identity is used; otherwise the first
    argument is twisted to g^{-1} Z.  Returns a MehlerKernel whose ``scalar``
    is the degree-0 complex value; on the diagonal with g = Id and Z = Z' = 0
    the scalar equals the degree-0 prefactor of heat_diagonal_limit.
    """
    u = point.u
    a = point.eigenvalues
    Z = np.asarray(Z, dtype=complex).reshape(point.dim)
    Zp = np.asarray(Zprime, dtype=complex).reshape(point.dim)
    if group_matrix is not None:
        U = np.asarray(group_matrix, dtype=complex)
        X = np.conj(U.T) @ Z    # unitary inverse
    elif point.group_phases is not None:
        X = np.exp(-1j * np.asarray(point.group_phases)) * Z
    else:
        X = Z
    val = 1.0 + 0.0j
    for aj, xj, zj in zip(a, X, Zp):
        x = u * aj
        pref = _stretch_even(x) / (TWO_PI * u)
        expo = (-_coth_even(x) / (2.0 * u) * abs(xj - zj) ** 2
                + 0.5j * aj * (xj * np.conj(zj)).imag)
        # e^{u a_j / 2} from the tau/2 shift, folded in per coordinate:
        # stretch(x) e^{x/2} = g1(x), kept separate here for clarity.
        val *= pref * np.exp(expo + 0.5 * x)
    return MehlerKernel(point=point, scalar=complex(val))


def signature_limit_density(a, q, tol=ZERO_EIGENVALUE_TOL):
    """Large-time limit of the degree-q diagonal density.

    Equals (-1)^q * prod_j (a_j / 2 pi) when exactly q eigenvalues are
    negative, and 0 otherwise.  Degenerate spectra have no defined limit.
    """
    a = np.asarray(a, dtype=float)
    if np.any(np.abs(a) <= tol):
        raise DegenerateSpectrumError(
            "large-time limit undefined for (near-)zero curvature eigenvalues")
    if not 0 <= q <= a.size:
        raise ValueError(f"degree q={q} out of range 0..{a.size}")
    negatives = int(np.sum(a < 0))
    if negatives != q:
        return 0.0
    return float((-1.0) ** q * np.prod(a / TWO_PI))


# ---------------------------------------------------------------------------
# log-scaled complex accumulation, for image sums whose terms underflow


@dataclass
class ScaledComplex:
    """Complex number stored as mantissa * exp(log_scale).

    Supports magnitudes far below the float underflow threshold; used by the
    method-of-images sums whose non-identity terms decay like exp(-c p).
    """

    mantissa: complex
    log_scale: float

    @classmethod
    def from_log(cls, log_abs, phase):
        return cls(mantissa=np.exp(1j * phase), log_scale=float(log_abs))

    @classmethod
    def from_complex(cls, z):
        z = complex(z)
        if z == 0:
            return cls(0.0j, -math.inf)
        return cls(z / abs(z), math.log(abs(z)))

    def __add__(self, other):
        if self.log_scale == -math.inf:
            return other
        if other.log_scale == -math.inf:
            return self
        hi, lo = (self, other) if self.log_scale >= other.log_scale else (other, self)
        m = hi.mantissa + lo.mantissa * math.exp(lo.log_scale - hi.log_scale)
        out = ScaledComplex(m, hi.log_scale)
        out._renorm()
        return out

    def _renorm(self):
        mag = abs(self.mantissa)
        if mag == 0.0:
            self.log_scale = -math.inf
        else:
            self.log_scale += math.log(mag)
            self.mantissa /= mag

    def scale_by(self, z):
        out = ScaledComplex(self.mantissa * complex(z), self.log_scale)
        out._renorm()
        return out

    @property
    def log_abs(self):
        return self.log_scale

    def to_complex(self):
        if self.log_scale == -math.inf:
            return 0.0j
        return self.mantissa * math.exp(self.log_scale)
