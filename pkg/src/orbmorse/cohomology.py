"""Exact Dolbeault cohomology dimensions for the catalog models.

Weighted projective spaces are handled by lattice-point counting: sections of
the degree-d bundle are the monomials with weighted degree exactly d.  Middle
cohomology vanishes on weighted projective spaces (standard fact, recorded in
the README); top cohomology comes from Serre duality.  Torus quotients are
cross-filled from the spectral kernel counts of the discretized Kodaira
Laplacian, which are exact for the shipped flat models.

Counting functions are pure; table construction may be parallelized over p.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, UnsupportedModelError

BRUTE_FORCE_LIMIT = 10_000   # above this degree only the recurrence is used


def _check_weights(weights):
    ws = tuple(int(w) for w in weights)
    if len(ws) < 2 or any(w <= 0 for w in ws):
        raise ConfigurationError(f"weights must be >= 2 positive integers, got {weights}")
    if math.gcd(*ws) != 1:
        raise ConfigurationError(f"weights {ws} are not coprime")
    return ws


def weighted_proj_h0(weights, d):
    """Number of monomials of weighted degree exactly d (coin-problem count).

    Dynamic programming over the weights; O(len(weights) * d) time.  Negative
    degrees have no sections.
    """
    ws = _check_weights(weights)
    d = int(d)
    if d < 0:
        return 0
    # int64 is ample: the count grows like d^n / (n! prod weights).  The coin
    # recurrence counts[t] += counts[t - w] in increasing t is a cumulative
    # sum along each residue class mod w.
    counts = np.zeros(d + 1, dtype=np.int64)
    counts[0] = 1
    for w in ws:
        for r in range(min(w, d + 1)):
            np.cumsum(counts[r::w], out=counts[r::w])
    return int(counts[d])


def weighted_proj_h0_bruteforce(weights, d):
    """Exhaustive enumeration oracle for the lattice count (small degrees)."""
    ws = _check_weights(weights)
    d = int(d)
    if d < 0:
        return 0
    if d > BRUTE_FORCE_LIMIT:
        raise ValueError("brute-force oracle is reserved for small degrees")

    def count(rem, idx):
        if idx == len(ws) - 1:
            return 1 if rem % ws[idx] == 0 else 0
        return sum(count(rem - m * ws[idx], idx + 1)
                   for m in range(rem // ws[idx] + 1))

    return count(d, 0)


def weighted_proj_hq(weights, d, q):
    """h^q of the degree-d bundle on the weighted projective space.

    Middle cohomology (0 < q < n) vanishes; the top degree is Serre-dual to
    h^0 of degree -d - sum(weights).
    """
    ws = _check_weights(weights)
    n = len(ws) - 1
    if q < 0 or q > n:
        raise ValueError(f"degree q={q} outside 0..{n}")
    if q == 0:
        return weighted_proj_h0(ws, d)
    if q == n:
        return weighted_proj_h0(ws, -int(d) - sum(ws))
    return 0


@dataclass(frozen=True)
class CohomologyTable:
    """Map (p, q) -> h^q(M, L^p otimes E) over a power range."""

    catalog_id: str
    p_range: tuple
    n: int
    entries: dict = field(default_factory=dict)
    aux_rank: int = 1

    def h(self, p, q):
        return self.entries[(int(p), int(q))]

    def euler(self, p):
        return sum((-1) ** q * self.h(p, q) for q in range(self.n + 1))

    def morse_sum(self, p, q, alternating_from_top=True):
        """sum_{j <= q} (-1)^(q - j) h^j; with alternating_from_top=False the
        orientation sum_{j <= q} (-1)^j h^j is returned instead."""
        if alternating_from_top:
            return sum((-1) ** (q - j) * self.h(p, j) for j in range(q + 1))
        return sum((-1) ** j * self.h(p, j) for j in range(q + 1))

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["p", "q", "h"])
        for (p, q) in sorted(self.entries):
            writer.writerow([p, q, self.entries[(p, q)]])
        return buf.getvalue()


def cohomology_table(orb, p_range, spectral_counts=None):
    """Exact cohomology table of a catalog entry over a range of powers.

    For weighted projective models the entries are lattice counts (scaled by
    the auxiliary rank); torus quotients take their kernel dimensions from the
    spectral module (``spectral_counts`` injects the counting function, and
    defaults to the exact closed-form count used by the discretized operator).
    """
    p_values = tuple(int(p) for p in p_range)
    if orb.catalog_id == "wps":
        ws = orb.params["weights"]
        if orb.params.get("dent"):
            raise UnsupportedModelError(
                "cohomology tables require the unperturbed bundle metric")
        entries = {}
        for p in p_values:
            for q in range(len(ws)):
                entries[(p, q)] = weighted_proj_hq(ws, p, q)
        return CohomologyTable(catalog_id="wps", p_range=p_values,
                               n=len(ws) - 1, entries=entries)
    if orb.catalog_id == "torus":
        if spectral_counts is None:
            from .spectral import torus_kernel_dimension
            spectral_counts = torus_kernel_dimension
        d, k = orb.params["d"], orb.params["k"]
        entries = {}
        for p in p_values:
            for q in (0, 1):
                entries[(p, q)] = spectral_counts(d, k, p, q)
        return CohomologyTable(catalog_id="torus", p_range=p_values, n=1,
                               entries=entries)
    raise UnsupportedModelError(
        f"no exact cohomology is available for catalog id {orb.catalog_id!r}")
