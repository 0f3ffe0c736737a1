"""Rank-penalized least-squares objective, its Fenchel conjugate and convex
envelope in closed form, and the closed-form tilted/augmented minimizers.

The objective on (M, N) matrices is

    sigma0^2 * rank(X) + ||X - F||^2          (Frobenius norm)

whose conjugate and envelope are spectral functions of ``Lambda/2 + F`` and
``X`` respectively.  The quadratic penalty keeps the envelope tight near F,
so no shrinkage applies to singular values above sigma0.  A 1-D toy
objective |x^2 - 1| with the trivial constraint x = 0 is included; it is
the standard example of dual ascent oscillating between primal minimizers.
"""

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .matops import f_alpha, f_hard, frobenius_inner, numerical_rank, singular_values

#: relative half-width around sigma0 inside which a hard-threshold input is
#: flagged as degenerate (the minimizer stops being unique there)
DEGENERATE_RTOL = 1e-8


class DegenerateSingularValueWarning(UserWarning):
    """A singular value of F - Lambda/2 sits at the threshold sigma0, so
    the unaugmented primal update is not unique."""


class PrimalUpdate(NamedTuple):
    """One closed-form primal minimization, plus the by-products that a
    solver iteration needs, all derived from a single SVD."""

    x: np.ndarray          # argmin of the (augmented) tilted objective
    dual_da: float         # -conjugate(-Lambda) at the input Lambda
    envelope_at_x: float   # envelope value at x
    x_norm_sq: float       # ||x||^2
    degenerate: bool       # threshold tie detected (alpha == 0 only)


def _env_terms(svals, sigma0):
    # sum_j sigma0^2 - max(sigma0 - sigma_j, 0)^2; vanishes at sigma_j = 0
    return float(np.sum(sigma0**2 - np.maximum(sigma0 - svals, 0.0) ** 2))


@dataclass(frozen=True)
class RankObjective:
    """Data matrix F and penalty level sigma0 (> 0, same units as the
    singular values)."""

    F: np.ndarray
    sigma0: float

    def __post_init__(self):
        f = np.asarray(self.F)
        if f.ndim != 2:
            raise ValueError("F must be a matrix")
        if not np.all(np.isfinite(f)):
            raise ValueError("F has non-finite entries")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        object.__setattr__(self, "F", f)

    @property
    def shape(self):
        return self.F.shape

    def _check(self, x):
        x = np.asarray(x)
        if x.shape != self.F.shape:
            raise ValueError(f"expected shape {self.F.shape}, got {x.shape}")
        return x

    def data_norm_sq(self) -> float:
        return float(np.real(np.vdot(self.F, self.F)))

    def primal_value(self, x, rel_tol: float = 1e-9) -> float:
        """sigma0^2 * rank(X) + ||X - F||^2 at numerical-rank tolerance
        ``rel_tol``."""
        x = self._check(x)
        return self.sigma0**2 * numerical_rank(x, rel_tol) + float(
            np.linalg.norm(x - self.F) ** 2
        )

    def envelope_value(self, x) -> float:
        """Convex envelope: sum_j (sigma0^2 - max(sigma0 - sigma_j(X), 0)^2)
        + ||X - F||^2."""
        x = self._check(x)
        return _env_terms(singular_values(x), self.sigma0) + float(
            np.linalg.norm(x - self.F) ** 2
        )

    def conjugate_value(self, lam) -> float:
        """Fenchel conjugate: sum_j max(sigma_j^2(Lambda/2 + F) - sigma0^2, 0)
        - ||F||^2."""
        lam = self._check(lam)
        s = singular_values(lam / 2.0 + self.F)
        return float(np.sum(np.maximum(s**2 - self.sigma0**2, 0.0))) - self.data_norm_sq()

    def dual_value_da(self, lam) -> float:
        """Dual function of the plain scheme, -conjugate(-Lambda)."""
        return -self.conjugate_value(-np.asarray(lam))

    def update(self, lam, alpha: float = 0.0) -> PrimalUpdate:
        """Minimize envelope(X) + <X, Lambda> + (alpha/2)||X||^2 in closed
        form via one SVD of F - Lambda/2, returning the minimizer together
        with the quantities solvers track each iteration.

        For ``alpha == 0`` the same matrix also minimizes the non-convex
        tilted objective (hard-threshold rule, ties kept at sigma0)."""
        lam = self._check(lam)
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        g = self.F - lam / 2.0
        u, s, vh = np.linalg.svd(g, full_matrices=False)
        fs = f_alpha(s, self.sigma0, alpha) if alpha > 0 else f_hard(s, self.sigma0)
        nz = fs > 0  # thresholded-away components contribute exact zeros
        x = (u[:, nz] * fs[nz]) @ vh[nz]
        dual_da = self.data_norm_sq() - float(
            np.sum(np.maximum(s**2 - self.sigma0**2, 0.0))
        )
        env = _env_terms(fs, self.sigma0) + float(np.linalg.norm(x - self.F) ** 2)
        degenerate = bool(
            alpha == 0 and np.any(np.abs(s - self.sigma0) <= DEGENERATE_RTOL * self.sigma0)
        )
        return PrimalUpdate(x, dual_da, env, float(np.sum(fs**2)), degenerate)

    def tilted_minimizer(self, lam, alpha: float = 0.0):
        """Closed-form minimizer S_{f_alpha}(F - Lambda/2).

        Unique for ``alpha > 0``; for ``alpha == 0`` a minimizer of both the
        rank objective and its envelope (warns when a singular value ties
        with sigma0 and uniqueness is lost)."""
        upd = self.update(lam, alpha)
        if upd.degenerate:
            warnings.warn(
                "singular value within %.0e of sigma0: minimizer not unique"
                % (DEGENERATE_RTOL * self.sigma0),
                DegenerateSingularValueWarning,
                stacklevel=2,
            )
        return upd.x

    def dual_value_ada(self, lam, alpha: float) -> float:
        """Dual value of the fully augmented problem at Lambda: the
        augmented tilted objective evaluated at its closed-form minimizer.
        """
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        lam = self._check(lam)
        upd = self.update(lam, alpha)
        return upd.envelope_at_x + frobenius_inner(upd.x, lam) + 0.5 * alpha * upd.x_norm_sq

    def feasible_value(self, x, alpha: float = 0.0) -> float:
        """Primal objective reported for a feasible point: the envelope,
        plus (alpha/2)||X||^2 for the augmented variants."""
        x = self._check(x)
        val = self.envelope_value(x)
        if alpha > 0:
            val += 0.5 * alpha * float(np.real(np.vdot(x, x)))
        return val


def toy_conjugate(lam: float) -> float:
    """Conjugate of |x^2 - 1| on the reals: |lam| for |lam| <= 2,
    1 + lam^2 / 4 beyond."""
    a = abs(float(lam))
    return a if a <= 2.0 else 1.0 + a * a / 4.0


def toy_tilted_minimizers(lam: float) -> tuple:
    """Argmin set of x -> |x^2 - 1| + lam * x.

    {+1, -1} at lam = 0, {-sign(lam)} for 0 < |lam| <= 2, {-lam/2} beyond.
    """
    lam = float(lam)
    if lam == 0.0:
        return (1.0, -1.0)
    if abs(lam) <= 2.0:
        return (-np.sign(lam),)
    return (-lam / 2.0,)


class ToyObjective:
    """|x^2 - 1| on the reals, modeled as 1x1 matrices so solvers treat it
    like any other objective; the constraint subspace is {0}."""

    shape = (1, 1)
    sigma0 = None  # no threshold parameter

    @staticmethod
    def _scalar(lam):
        lam = np.asarray(lam)
        if lam.shape != (1, 1):
            raise ValueError("toy objective works on 1x1 matrices")
        return float(np.real(lam[0, 0]))

    def envelope_value(self, x) -> float:
        v = self._scalar(x)
        return max(0.0, v * v - 1.0)

    def dual_value_da(self, lam) -> float:
        return -toy_conjugate(-self._scalar(lam))

    def dual_value_ada(self, lam, alpha: float) -> float:
        upd = self.update(lam, alpha)
        return upd.envelope_at_x + self._scalar(lam) * float(upd.x[0, 0]) + \
            0.5 * alpha * upd.x_norm_sq

    def feasible_value(self, x, alpha: float = 0.0) -> float:
        v = self._scalar(x)
        return max(0.0, v * v - 1.0) + 0.5 * alpha * v * v

    def tilted_minimizer(self, lam, alpha: float = 0.0):
        return self.update(lam, alpha).x

    def update(self, lam, alpha: float = 0.0) -> PrimalUpdate:
        lam_v = self._scalar(lam)
        if alpha == 0:
            # non-convex argmin; ties broken towards +1 for determinism
            x = max(toy_tilted_minimizers(lam_v))
        else:
            # envelope max(0, x^2-1) + lam*x + (alpha/2) x^2: compare the
            # stationary points of both branches and the kinks at +-1
            cands = [-1.0, 1.0]
            if abs(lam_v / alpha) <= 1.0:
                cands.append(-lam_v / alpha)
            flat = -lam_v / (2.0 + alpha)
            if abs(flat) >= 1.0:
                cands.append(flat)
            val = lambda t: max(0.0, t * t - 1.0) + lam_v * t + 0.5 * alpha * t * t
            x = min(sorted(cands, reverse=True), key=val)
        xm = np.array([[x]], dtype=float)
        return PrimalUpdate(
            x=xm,
            dual_da=-toy_conjugate(-lam_v),
            envelope_at_x=max(0.0, x * x - 1.0),
            x_norm_sq=x * x,
            degenerate=False,
        )
