"""Coupled potentials H with exact analytic derivatives.

The catalog covers sparse multivariate polynomial terms plus per-component
cosine terms c*cos(k*pi*u_i).  That is enough for the double well, coupled
Allen-Cahn systems and the potential whose layer trace is (2/pi)*arctan(x),
while keeping gradient and Hessian exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Term",
    "NonlinearitySpec",
    "OrientabilityReport",
    "check_orientability",
    "check_H_monotone",
]

ORIENTABILITY_TOL = 1e-12
STRICT_SIGN_TOL = 1e-10


class NonlinearityError(ValueError):
    pass


@dataclass(frozen=True)
class Term:
    """One additive term of H.

    kind "monomial": coeff * prod_i u_i^k_i with k the integer vector.
    kind "cosine":   coeff * cos(k_i * pi * u_i) for the single nonzero k_i.
    """

    coeff: float
    kind: str
    k: tuple

    def __post_init__(self):
        if self.kind not in ("monomial", "cosine"):
            raise NonlinearityError(f"unknown term kind {self.kind!r}")
        if self.kind == "monomial" and any(ki < 0 for ki in self.k):
            raise NonlinearityError("monomial exponents must be nonnegative")
        if self.kind == "cosine":
            nz = [i for i, ki in enumerate(self.k) if ki != 0]
            if len(nz) != 1:
                raise NonlinearityError(
                    "cosine term needs exactly one nonzero frequency"
                )


@dataclass(frozen=True)
class NonlinearitySpec:
    m: int
    terms: tuple
    description: str = ""

    def __post_init__(self):
        for t in self.terms:
            if len(t.k) != self.m:
                raise NonlinearityError(
                    f"term vector length {len(t.k)} != component count {self.m}"
                )

    @staticmethod
    def from_terms(m: int, terms: Sequence[tuple], description: str = ""):
        """Terms given as (coeff, kind, integer vector) triples."""
        return NonlinearitySpec(
            m, tuple(Term(float(c), kind, tuple(k)) for c, kind, k in terms),
            description,
        )

    # -- evaluation ---------------------------------------------------------

    def value(self, u):
        u = self._check_state(u)
        total = np.zeros(u.shape[:-1])
        for t in self.terms:
            total += t.coeff * self._term_value(t, u)
        return total if total.shape else float(total)

    def gradient(self, u):
        u = self._check_state(u)
        g = np.zeros(u.shape)
        for t in self.terms:
            for i in range(self.m):
                g[..., i] += t.coeff * self._term_deriv(t, u, (i,))
        return g

    def hessian(self, u):
        u = self._check_state(u)
        h = np.zeros(u.shape[:-1] + (self.m, self.m))
        for t in self.terms:
            for i in range(self.m):
                for j in range(i, self.m):
                    dij = t.coeff * self._term_deriv(t, u, (i, j))
                    h[..., i, j] += dij
                    if j != i:
                        h[..., j, i] += dij
        return h

    def evaluate(self, u):
        """(value, gradient, hessian) at one state vector."""
        return self.value(u), self.gradient(u), self.hessian(u)

    def _check_state(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.m:
            raise NonlinearityError(
                f"state length {u.shape[-1]} != component count {self.m}"
            )
        return u

    def _term_value(self, t: Term, u):
        if t.kind == "monomial":
            out = np.ones(u.shape[:-1])
            for i, ki in enumerate(t.k):
                if ki:
                    out = out * u[..., i] ** ki
            return out
        i = next(idx for idx, ki in enumerate(t.k) if ki)
        return np.cos(t.k[i] * math.pi * u[..., i])

    def _term_deriv(self, t: Term, u, wrt):
        if t.kind == "monomial":
            exps = list(t.k)
            c = 1.0
            for i in wrt:
                if exps[i] == 0:
                    return np.zeros(u.shape[:-1])
                c *= exps[i]
                exps[i] -= 1
            out = np.full(u.shape[:-1], c)
            for i, ki in enumerate(exps):
                if ki:
                    out = out * u[..., i] ** ki
            return out
        i = next(idx for idx, ki in enumerate(t.k) if ki)
        if any(j != i for j in wrt):
            return np.zeros(u.shape[:-1])
        w = t.k[i] * math.pi
        n = len(wrt)
        # d^n/du^n cos(w u) cycles cos -> -w sin -> -w^2 cos
        if n == 1:
            return -w * np.sin(w * u[..., i])
        return -(w ** 2) * np.cos(w * u[..., i])

    # -- structure ----------------------------------------------------------

    def range_box(self, lo, hi):
        """Hypercube bounds as (lo_vec, hi_vec) arrays."""
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (self.m,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (self.m,))
        return lo, hi


@dataclass(frozen=True)
class OrientabilityReport:
    orientable: bool
    theta: tuple
    worst_violation: float
    samples: int


def _sample_box(H: NonlinearitySpec, lo, hi, per_axis: int):
    axes = [np.linspace(lo[i], hi[i], per_axis) for i in range(H.m)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def check_orientability(
    H: NonlinearitySpec, lo, hi, samples_per_axis: int = 17,
    tol: float = ORIENTABILITY_TOL, theta1: int = +1,
) -> OrientabilityReport:
    """Search sign vectors theta making every mixed H_{u_i u_j} theta_i theta_j >= -tol.

    Enumerates all 2^(m-1) sign vectors with theta_1 fixed; the first
    certifying vector wins, otherwise the least-violating one is reported.
    """
    if H.m > 20:
        raise NonlinearityError("orientability enumeration infeasible for m > 20")
    if samples_per_axis < 2:
        raise NonlinearityError("need at least 2 samples per axis")
    lo, hi = H.range_box(lo, hi)
    if np.any(hi <= lo):
        raise NonlinearityError("degenerate sampling box")
    if H.m == 1:
        return OrientabilityReport(True, (theta1,), 0.0, samples_per_axis)

    u = _sample_box(H, lo, hi, samples_per_axis)
    hess = H.hessian(u)  # (N, m, m)
    pairs = list(itertools.combinations(range(H.m), 2))
    mixed = {p: hess[:, p[0], p[1]] for p in pairs}

    best_theta, best_worst = None, -math.inf
    for signs in itertools.product((1, -1), repeat=H.m - 1):
        theta = (theta1,) + tuple(theta1 * s for s in signs)
        worst = min(
            float(np.min(mixed[(i, j)] * theta[i] * theta[j])) for i, j in pairs
        )
        if worst >= -tol:
            return OrientabilityReport(True, theta, worst, u.shape[0])
        if worst > best_worst:
            best_theta, best_worst = theta, worst
    return OrientabilityReport(False, best_theta, best_worst, u.shape[0])


def check_H_monotone(v, H: NonlinearitySpec, orders) -> dict:
    """Discrete H-monotonicity of a field on a 1-D boundary grid.

    Per component: the trace derivative must keep one strict sign.  The pair
    condition tracks the most negative H_{u_i u_j} dx(v_i) dx(v_j) over the
    boundary and all pairs i < j.
    """
    if v.grid.boundary_dim != 1:
        raise NonlinearityError("H-monotonicity needs a 1-D boundary grid")
    traces = np.stack([v.trace(i) for i in range(v.m)], axis=-1)
    dx = np.gradient(traces, v.grid.x, axis=0)
    monotone = []
    for i in range(v.m):
        di = dx[:, i]
        strict = np.abs(di) > STRICT_SIGN_TOL
        one_signed = strict.all() and (np.all(di > 0) or np.all(di < 0))
        monotone.append(bool(one_signed))
    slack = 0.0
    if v.m > 1:
        hess = H.hessian(traces)
        slack = min(
            float(np.min(hess[:, i, j] * dx[:, i] * dx[:, j]))
            for i, j in itertools.combinations(range(v.m), 2)
        )
    return {"monotone_per_component": monotone, "pair_condition_slack": slack}
