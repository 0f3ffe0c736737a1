"""Dual ascent iterations for subspace-constrained envelope minimization.

Three variants share one loop:

* ``da``      -- hard-threshold primal update, decaying steps alpha_n,
                 best-iterate tracking on the dual values.
* ``ada``     -- augmented primal update with weight alpha, fixed step
                 alpha; the whole sequence converges.
* ``mod_ada`` -- augmented primal update with steps 2/(n+1)^2 + alpha that
                 decay to alpha, taking large steps early on.

The multiplier always stays in the orthogonal complement of the constraint
subspace.  Each iteration costs one SVD of F - Lambda/2 (plus one more per
iteration when feasible primal values are tracked).

Dual values recorded in the trace: for ``da`` and ``mod_ada`` the dual is
the conjugate-based dual function at Lambda^n.  For ``ada`` the recorded
dual is the Lagrangian of the partially augmented objective (quadratic
penalty restricted to the subspace component) evaluated at the pair
(X^n, Lambda^n); by the optimality of X^n for the updated multiplier this
equals the partially augmented dual function, the quantity that increases
by at least ``alpha^-1 * ||step||^2`` per iteration.  Evaluating the fully
augmented conjugate instead would lose that guarantee (its increments are
only bounded below with an extra factor 1/2).
"""

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .matops import frobenius_inner
from .subspace import SubspaceOp

DA = "da"
ADA = "ada"
MOD_ADA = "mod_ada"
VARIANTS = (DA, ADA, MOD_ADA)

#: multiplier must stay in the complement up to this relative tolerance
_LAMBDA_SUBSPACE_TOL = 1e-10


class ScheduleError(ValueError):
    """Step schedule unusable for the requested solver variant."""


class SolverNumericalError(RuntimeError):
    """Numerical failure inside the iteration; carries the trace so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class StepSchedule:
    """Step-size sequence alpha_n, n >= 0 (alpha_n multiplies the n-th
    multiplier update, producing Lambda^{n+1}).

    kinds: ``harmonic`` 1/(n+1); ``fixed`` alpha; ``mod_ada``
    2/(n+1)^2 + alpha; ``sqrt`` min(1, 1/sqrt(n+1)); ``custom`` an explicit
    finite sequence.
    """

    kind: str
    alpha: float = 0.0
    values: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("harmonic", "fixed", "mod_ada", "sqrt", "custom"):
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")
        if self.kind in ("fixed", "mod_ada") and not self.alpha > 0:
            raise ScheduleError(f"{self.kind} schedule needs alpha > 0")
        if self.kind == "custom":
            if not self.values:
                raise ScheduleError("custom schedule needs explicit values")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def harmonic(cls):
        return cls("harmonic")

    @classmethod
    def fixed(cls, alpha):
        return cls("fixed", alpha=alpha)

    @classmethod
    def mod_ada(cls, alpha):
        return cls("mod_ada", alpha=alpha)

    @classmethod
    def sqrt_decay(cls):
        return cls("sqrt")

    @classmethod
    def custom(cls, values):
        return cls("custom", values=tuple(values))

    def step(self, n: int) -> float:
        if n < 0:
            raise ValueError("step index must be non-negative")
        if self.kind == "harmonic":
            return 1.0 / (n + 1)
        if self.kind == "fixed":
            return self.alpha
        if self.kind == "mod_ada":
            return 2.0 / (n + 1) ** 2 + self.alpha
        if self.kind == "sqrt":
            return min(1.0, 1.0 / np.sqrt(n + 1))
        if n >= len(self.values):
            raise ScheduleError(
                f"custom schedule has {len(self.values)} steps, index {n} requested"
            )
        return self.values[n]


@dataclass
class ScheduleDiagnostic:
    """Finite-horizon check of the vanishing step-ratio condition."""

    ratios: np.ndarray  # r_N = sum_{n<=N} alpha_n^2 / sum alpha_n, N = 1..horizon
    ok: bool


def validate_schedule(schedule: StepSchedule, horizon: int) -> ScheduleDiagnostic:
    """Heuristic test of sum(alpha^2)/sum(alpha) -> 0 over a finite horizon.

    The partial-sum ratios start at n = 1, matching the limit condition of
    the decaying-step convergence theorem.  ``ok`` requires the final ratio
    below 0.1 and a non-increasing tail over the last half; a finite check
    cannot certify the asymptotic property.  Raises for steps outside
    (0, 1], which are invalid in decaying-step (da) mode.
    """
    if horizon < 10:
        raise ValueError("horizon must be at least 10")
    steps = np.array([schedule.step(n) for n in range(1, horizon + 1)])
    if np.any(steps <= 0) or np.any(steps > 1):
        raise ScheduleError("da-mode steps must lie in (0, 1]")
    csum = np.cumsum(steps)
    csq = np.cumsum(steps**2)
    ratios = csq / csum
    tail = ratios[horizon // 2 :]
    ok = bool(ratios[-1] < 0.1 and np.all(np.diff(tail) <= 1e-15))
    return ScheduleDiagnostic(ratios=ratios, ok=ok)


@dataclass(frozen=True)
class SolverConfig:
    """Variant, schedule, and stopping parameters for :func:`run`.

    ``ada`` couples the fixed step to the augmentation weight ``alpha_reg``;
    ``mod_ada`` couples the schedule's asymptotic step to it; ``da`` needs
    ``alpha_reg == 0`` and a decaying schedule.
    """

    variant: str
    schedule: StepSchedule
    alpha_reg: float = 0.0
    max_iters: int = 1000
    stop_tol: float = 1e-6
    rank_tol: float = 1e-9
    track_primal: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if not self.stop_tol > 0:
            raise ValueError("stop_tol must be positive")
        if self.variant == ADA:
            if self.schedule.kind != "fixed" or self.schedule.alpha != self.alpha_reg:
                raise ScheduleError("ada requires a fixed schedule with step == alpha_reg")
            if not self.alpha_reg > 0:
                raise ScheduleError("ada requires alpha_reg > 0")
        elif self.variant == MOD_ADA:
            if self.schedule.kind != "mod_ada" or self.schedule.alpha != self.alpha_reg:
                raise ScheduleError(
                    "mod_ada requires a mod_ada schedule with asymptotic step == alpha_reg"
                )
            if not self.alpha_reg > 0:
                raise ScheduleError("mod_ada requires alpha_reg > 0")
        else:
            if self.alpha_reg != 0:
                raise ScheduleError("da requires alpha_reg == 0")
            if self.schedule.kind in ("fixed", "mod_ada"):
                raise ScheduleError(f"{self.schedule.kind} schedule is not valid for da")
            if self.schedule.kind == "custom" and self.max_iters >= 10:
                diag = validate_schedule(
                    self.schedule, min(self.max_iters, len(self.schedule.values))
                )
                if not diag.ok:
                    raise ScheduleError("custom schedule fails the step-ratio condition")

    @classmethod
    def da(cls, schedule=None, **kw):
        return cls(DA, schedule or StepSchedule.harmonic(), alpha_reg=0.0, **kw)

    @classmethod
    def ada(cls, alpha, **kw):
        return cls(ADA, StepSchedule.fixed(alpha), alpha_reg=alpha, **kw)

    @classmethod
    def mod_ada(cls, alpha, **kw):
        return cls(MOD_ADA, StepSchedule.mod_ada(alpha), alpha_reg=alpha, **kw)


_TRACE_COLUMNS = ("n", "primal", "dual", "feas_residual", "lambda_norm", "step_norm", "best_n")


@dataclass
class SolverTrace:
    """Per-iteration record; row n describes the state after n updates."""

    n: np.ndarray
    primal: np.ndarray
    dual: np.ndarray
    feas_residual: np.ndarray
    lambda_norm: np.ndarray
    step_norm: np.ndarray
    best_n: np.ndarray

    def __len__(self):
        return len(self.n)

    def write_csv(self, path_or_file):
        """One row per iteration, header included, >= 12 significant digits."""
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh)
            w.writerow(_TRACE_COLUMNS)
            for i in range(len(self)):
                w.writerow(
                    [int(self.n[i])]
                    + [
                        format(float(getattr(self, c)[i]), ".12e")
                        for c in _TRACE_COLUMNS[1:-1]
                    ]
                    + [int(self.best_n[i])]
                )
        finally:
            if own:
                fh.close()

    @classmethod
    def read_csv(cls, path_or_file):
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, newline="") if own else path_or_file
        try:
            rows = list(csv.reader(fh))
        finally:
            if own:
                fh.close()
        if not rows or tuple(rows[0]) != _TRACE_COLUMNS:
            raise ValueError("not a solver trace CSV (bad header)")
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
        if data.size == 0:
            data = data.reshape(0, len(_TRACE_COLUMNS))
        return cls(
            n=data[:, 0].astype(int),
            primal=data[:, 1],
            dual=data[:, 2],
            feas_residual=data[:, 3],
            lambda_norm=data[:, 4],
            step_norm=data[:, 5],
            best_n=data[:, 6].astype(int),
        )

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def check_invariants(self):
        """best_n must be the first maximizer of the duals seen so far and
        therefore non-decreasing."""
        best = np.maximum.accumulate(self.dual)
        for k in range(len(self)):
            b = int(self.best_n[k])
            if not (0 <= b <= k):
                raise AssertionError(f"best_n[{k}] = {b} out of range")
            if self.dual[b] != best[k]:
                raise AssertionError(f"best_n[{k}] does not maximize the dual")
        if np.any(np.diff(self.best_n) < 0):
            raise AssertionError("best_n decreases")


@dataclass
class SolverResult:
    """Final primal (projected onto the subspace), final multiplier, trace
    and termination status."""

    X_star: np.ndarray
    Lambda_star: np.ndarray
    trace: SolverTrace
    converged: bool
    degenerate: bool
    n_iters: int

    @property
    def status(self) -> str:
        if self.degenerate:
            return "degenerate_warning"
        return "converged" if self.converged else "max_iters"


def run(objective, subspace: SubspaceOp, config: SolverConfig) -> SolverResult:
    """Run one dual ascent variant from Lambda^0 = 0.

    ``objective`` must expose ``update(Lambda, alpha) -> PrimalUpdate``,
    ``dual_value_da``, ``dual_value_ada`` and ``feasible_value`` (see
    :class:`slra.envelope.RankObjective`).  Terminates when the feasibility
    residual ||X^n - P(X^n)|| drops below ``stop_tol`` or after
    ``max_iters`` iterations.
    """
    if objective.shape != subspace.shape:
        raise ValueError(
            f"objective shape {objective.shape} != subspace shape {subspace.shape}"
        )
    alpha = config.alpha_reg
    variant = config.variant
    zeros = np.zeros(subspace.shape)

    n_col = [0]
    primal = [objective.feasible_value(zeros, alpha) if config.track_primal else np.nan]
    dual = [np.nan]  # filled from the first iteration's SVD
    feas = [0.0]
    lam_norm = [0.0]
    step_norm = [0.0]

    lam = zeros
    x_prev = zeros  # X^{n-1} during iteration n; X^0 := 0
    x_last = zeros
    best_val = -np.inf
    best_idx = 0
    best_x = zeros
    degenerate = False
    converged = False
    n_done = 0

    def _partial_trace():
        k = len(n_col)
        d = np.array(dual, dtype=float)
        return SolverTrace(
            n=np.array(n_col),
            primal=np.array(primal, dtype=float),
            dual=d,
            feas_residual=np.array(feas, dtype=float),
            lambda_norm=np.array(lam_norm, dtype=float),
            step_norm=np.array(step_norm, dtype=float),
            best_n=np.zeros(k, dtype=int),
        )

    for it in range(1, config.max_iters + 1):
        try:
            upd = objective.update(lam, alpha)
        except np.linalg.LinAlgError as exc:
            raise SolverNumericalError(f"SVD failed at iteration {it}: {exc}",
                                       trace=_partial_trace()) from exc
        degenerate = degenerate or upd.degenerate

        # the SVD of F - Lambda^{it-1}/2 prices the dual at the previous row
        if variant == DA:
            dual[it - 1] = upd.dual_da
        elif variant == MOD_ADA:
            dual[it - 1] = (
                upd.envelope_at_x
                + frobenius_inner(upd.x, lam)
                + 0.5 * alpha * upd.x_norm_sq
            )
        elif it == 1:
            dual[0] = upd.dual_da  # valid lower bound for the augmented dual
        if variant == DA and dual[it - 1] > best_val:
            best_val = dual[it - 1]
            best_idx = it - 1
            best_x = x_prev

        px = subspace.project(upd.x)
        r = upd.x - px
        resid = float(np.linalg.norm(r))
        step = config.schedule.step(it - 1)
        lam = lam + step * r
        x_prev = x_last = upd.x

        lam_in_m = float(np.linalg.norm(subspace.project(lam)))
        if lam_in_m > _LAMBDA_SUBSPACE_TOL * (1.0 + float(np.linalg.norm(lam))):
            raise SolverNumericalError(
                f"multiplier left the complement subspace at iteration {it}",
                trace=_partial_trace(),
            )

        n_col.append(it)
        feas.append(resid)
        lam_norm.append(float(np.linalg.norm(lam)))
        step_norm.append(step * resid)
        primal.append(
            objective.feasible_value(px, alpha) if config.track_primal else np.nan
        )
        if variant == ADA:
            # Lagrangian at (X^it, Lambda^it): X^it minimizes the partially
            # augmented Lagrangian at the updated multiplier, so this is the
            # exact dual value there.
            dual.append(
                upd.envelope_at_x
                + 0.5 * alpha * float(np.real(np.vdot(px, px)))
                + frobenius_inner(upd.x, lam)
            )
        else:
            dual.append(np.nan)

        n_done = it
        if resid < config.stop_tol:
            converged = True
            break

    # settle the dual of the final row (and of row 0 when no iteration ran)
    if variant == DA:
        dual[n_done] = objective.dual_value_da(lam)
    elif variant == MOD_ADA:
        dual[n_done] = (
            objective.dual_value_ada(lam, alpha) if n_done else objective.dual_value_da(lam)
        )
    elif n_done == 0:
        dual[0] = objective.dual_value_da(lam)
    if variant == DA and dual[n_done] > best_val:
        best_val = dual[n_done]
        best_idx = n_done
        best_x = x_last

    dual_arr = np.array(dual, dtype=float)
    best_n = np.zeros(len(dual_arr), dtype=int)
    bi, bv = 0, dual_arr[0]
    for k in range(len(dual_arr)):
        if dual_arr[k] > bv:
            bi, bv = k, dual_arr[k]
        best_n[k] = bi

    trace = SolverTrace(
        n=np.array(n_col),
        primal=np.array(primal, dtype=float),
        dual=dual_arr,
        feas_residual=np.array(feas, dtype=float),
        lambda_norm=np.array(lam_norm, dtype=float),
        step_norm=np.array(step_norm, dtype=float),
        best_n=best_n,
    )

    if variant == DA:
        assert best_idx == int(best_n[-1])
        x_out = subspace.project(best_x)
    else:
        x_out = subspace.project(x_last)

    return SolverResult(
        X_star=x_out,
        Lambda_star=lam,
        trace=trace,
        converged=converged,
        degenerate=degenerate,
        n_iters=n_done,
    )


@dataclass
class LambdaBoundReport:
    """A-priori multiplier bound check for decaying-step runs.

    With c1 = 3||F|| + 2 sqrt(K) sigma0, c2 = ||F||^2 and p(R) =
    -R^2/2 + c1 R + c2, every update satisfies
    ||Lambda^{n+1}|| <= max(sqrt(R0^2 + alpha_n * p_max), ||Lambda^n||),
    where R0 is the larger root of p and p_max its maximum.
    """

    c1: float
    c2: float
    r0: float
    p_max: float
    margins: np.ndarray  # bound - ||Lambda^{n}||, one per update
    ok: bool


def check_lambda_bound(trace: SolverTrace, F, sigma0: float) -> LambdaBoundReport:
    """Verify the boundedness inequality on a recorded decaying-step trace.

    The step sizes are recovered from the trace itself
    (step_norm = alpha_n * feas_residual); zero-residual updates keep the
    multiplier unchanged and satisfy the bound trivially.
    """
    F = np.asarray(F)
    k_min = min(F.shape)
    c1 = 3.0 * float(np.linalg.norm(F)) + 2.0 * np.sqrt(k_min) * sigma0
    c2 = float(np.linalg.norm(F)) ** 2
    r0 = c1 + np.sqrt(c1 * c1 + 2.0 * c2)
    p_max = 0.5 * c1 * c1 + c2
    margins = []
    ok = True
    for i in range(1, len(trace)):
        if trace.feas_residual[i] > 0:
            alpha_n = trace.step_norm[i] / trace.feas_residual[i]
        else:
            alpha_n = 1.0  # no movement; any step satisfies the bound
        bound = max(np.sqrt(r0 * r0 + alpha_n * p_max), trace.lambda_norm[i - 1])
        margin = bound - trace.lambda_norm[i]
        margins.append(margin)
        if margin < -1e-9 * (1.0 + bound):
            ok = False
    return LambdaBoundReport(
        c1=c1, c2=c2, r0=r0, p_max=p_max, margins=np.array(margins), ok=ok
    )


@dataclass
class AdaRateReport:
    """Diagnostics of the fixed-step dual ascent convergence behaviour."""

    gaps: np.ndarray          # d_n = max observed dual - dual_n
    scaled_gaps: np.ndarray   # n * d_n
    min_increment_slack: float  # min over n of (dual_{n+1}-dual_n) - ||step||^2/alpha
    monotone_ok: bool
    tail_ok: bool


def ada_rate_report(trace: SolverTrace, alpha: float) -> AdaRateReport:
    """Check the per-iteration dual increase inequality and the decay of
    n * (sup - dual_n) over the last quartile of a fixed-step trace."""
    d = trace.dual
    increments = np.diff(d)
    required = trace.step_norm[1:] ** 2 / alpha
    slack = increments - required
    monotone_ok = bool(np.all(slack >= -1e-9))
    gaps = np.max(d) - d
    scaled = trace.n * gaps
    q = max(2, len(scaled) // 4)
    tail = scaled[-q:]
    tol = 1e-9 * (1.0 + float(np.max(scaled, initial=0.0)))
    tail_ok = bool(np.all(np.diff(tail) <= tol))
    return AdaRateReport(
        gaps=gaps,
        scaled_gaps=scaled,
        min_increment_slack=float(np.min(slack, initial=0.0)),
        monotone_ok=monotone_ok,
        tail_ok=tail_ok,
    )
