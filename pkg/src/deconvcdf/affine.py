"""Minimax affine estimation for the discretized deconvolution problem.

The risk certificate is the optimal value of

    maximize   (1/2) g . (y - x)
    over       x, y in a convex class inside the simplex
    subject to n * ln( sum_j sqrt([Ax]_j [Ay]_j) ) + ln(2/eps) >= 0,

whose optimizers and constraint multiplier yield the estimator weights.
The solver runs an outer root search on the multiplier of the affinity
constraint; each inner problem (a concave Lagrangian over the product
polytope) is maximized by pairwise conditional-gradient steps whose
linear subproblems are exact LPs over the class.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .discretize import CHANNEL_FLOOR, ConvexClass, EmpiricalDistribution
from .errors import InfeasibleClassError, SolverError

__all__ = [
    "SolveReport",
    "AffineEstimator",
    "hellinger_affinity",
    "h_constraint",
    "solve_certificate",
    "build_affine_estimator",
    "affine_estimate",
    "certificate_factor",
    "adapt_nested",
    "solve_nested",
]


def hellinger_affinity(p, q):
    """sum_k sqrt(p_k q_k) for nonnegative vectors of equal length."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("affinity needs nonnegative entries")
    return float(np.sqrt(p * q).sum())


def h_constraint(x, y, channel, n, epsilon):
    """Constraint value n*ln(affinity(Ax, Ay)) + ln(2/eps)."""
    u = channel @ np.asarray(x, dtype=float)
    v = channel @ np.asarray(y, dtype=float)
    rho = hellinger_affinity(u, v)
    if rho <= 0:
        raise ValueError("affinity underflowed to zero; channel entries need a positive floor")
    return float(n * np.log(rho) + np.log(2.0 / epsilon))


def certificate_factor(epsilon):
    """Worst-case ratio of the certificate to the minimax risk:
    2*ln(2/eps)/ln(1/(4*eps)); tends to 2 as eps -> 0."""
    if not 0 < epsilon < 0.25:
        raise ValueError("epsilon must lie in (0, 1/4)")
    return 2.0 * np.log(2.0 / epsilon) / np.log(1.0 / (4.0 * epsilon))


@dataclass
class SolveReport:
    x_bar: np.ndarray
    y_bar: np.ndarray
    nu: float
    s_bar: float
    h_residual: float
    iterations: int
    converged: bool
    upper_bound: float
    atom_pool: Optional[list] = None  # vertex pairs, reusable as warm pool


@dataclass(frozen=True)
class AffineEstimator:
    """Affine functional of the binned empirical distribution."""

    weights: np.ndarray
    offset: float
    s_bar: float
    epsilon: float

    def evaluate(self, dist):
        if isinstance(dist, EmpiricalDistribution):
            p = dist.probs
        else:
            p = np.asarray(dist, dtype=float)
        if p.shape != self.weights.shape:
            raise ValueError(f"dimension mismatch: {p.shape} vs {self.weights.shape}")
        return float(self.weights @ p + self.offset)


def affine_estimate(estimator: AffineEstimator, dist):
    return estimator.evaluate(dist)


def _project_simplex(v):
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


class _CorrectiveMaximizer:
    """Fully corrective conditional-gradient ascent for the Lagrangian
    over the product of a polyhedral class with itself.

    Each step adds the vertex pair from an exact LP over the class, then
    re-optimizes all atom weights (projected gradient over the weight
    simplex, using cached channel images of the atoms).  The active set
    persists across multiplier updates, so successive root-search
    evaluations are warm-started.
    """

    def __init__(self, klass: ConvexClass, channel, g, n, epsilon, init=None):
        self.klass = klass
        self.channel = channel
        self.ct = np.ascontiguousarray(channel.T)
        self.g = g
        self.n = n
        self.ln_term = float(np.log(2.0 / epsilon))
        self.ax = []      # atom signal vectors, x block
        self.ay = []      # atom signal vectors, y block
        self.ux = []      # cached channel @ atom for each block
        self.uy = []
        self.cx = []      # cached g @ atom
        self.cy = []
        self._keys = {}
        x0, y0 = init if init is not None else (None, None)
        if x0 is None:
            start = np.full(klass.dim, 1.0 / klass.dim)
            if not klass.contains(start):
                start = klass.max_linear(np.zeros(klass.dim))
            x0, y0 = start, start.copy()
        self.w = np.zeros(0)
        self._register(np.asarray(x0, float), np.asarray(y0, float))
        self.w = np.array([1.0])

    def _register(self, ax, ay):
        key = ax.tobytes() + ay.tobytes()
        if key in self._keys:
            return self._keys[key]
        self.ax.append(ax)
        self.ay.append(ay)
        self.ux.append(self.channel @ ax)
        self.uy.append(self.channel @ ay)
        self.cx.append(float(self.g @ ax))
        self.cy.append(float(self.g @ ay))
        self._keys[key] = len(self.ax) - 1
        if len(self.ax) > self.w.size:
            self.w = np.append(self.w, 0.0)
        return self._keys[key]

    def preload(self, pairs):
        """Register atom pairs (zero weight) so the lazy step can reuse
        vertices discovered by earlier solves."""
        for ax, ay in pairs:
            self._register(np.asarray(ax, float), np.asarray(ay, float))

    def atom_pairs(self):
        return list(zip(self.ax, self.ay))

    def _shrink_pool(self, cap=400):
        if len(self.ax) <= cap:
            return
        active = self.w > 1e-15
        # keep every active atom plus the most recent idle ones
        idle = np.flatnonzero(~active)
        drop = idle[: len(self.ax) - cap]
        keep = np.setdiff1d(np.arange(len(self.ax)), drop)
        self.ax = [self.ax[i] for i in keep]
        self.ay = [self.ay[i] for i in keep]
        self.ux = [self.ux[i] for i in keep]
        self.uy = [self.uy[i] for i in keep]
        self.cx = [self.cx[i] for i in keep]
        self.cy = [self.cy[i] for i in keep]
        self.w = self.w[keep]
        s = self.w.sum()
        self.w = self.w / s if s > 0 else np.full(self.w.size, 1.0 / self.w.size)
        self._keys = {ax.tobytes() + ay.tobytes(): i
                      for i, (ax, ay) in enumerate(zip(self.ax, self.ay))}

    @property
    def x(self):
        return np.stack(self.ax, axis=1) @ self.w

    @property
    def y(self):
        return np.stack(self.ay, axis=1) @ self.w

    def snapshot(self):
        return self.x, self.y

    def objective(self):
        return 0.5 * float(np.dot(self.cy, self.w) - np.dot(self.cx, self.w))

    def _uv(self):
        u_mat = np.stack(self.ux, axis=1)
        v_mat = np.stack(self.uy, axis=1)
        return u_mat, v_mat, u_mat @ self.w, v_mat @ self.w

    def h_value(self):
        _, _, u, v = self._uv()
        return float(self.n * np.log(np.sqrt(u * v).sum()) + self.ln_term)

    def _weight_value_grad(self, w, u_mat, v_mat, c_lin, nu):
        u = np.maximum(u_mat @ w, 1e-300)
        v = np.maximum(v_mat @ w, 1e-300)
        r = np.sqrt(u * v)
        rho = r.sum()
        value = float(c_lin @ w) + nu * (self.n * np.log(rho) + self.ln_term)
        coef = nu * self.n / rho
        grad = c_lin + coef * (0.5 * ((r / u) @ u_mat + (r / v) @ v_mat))
        return value, grad

    def _weight_hessian(self, w, u_mat, v_mat, nu):
        """Hessian of the affinity term of the weight problem."""
        u = np.maximum(u_mat @ w, 1e-300)
        v = np.maximum(v_mat @ w, 1e-300)
        r = np.sqrt(u * v)
        rho = r.sum()
        a_mat = u_mat * (v / (2.0 * r))[:, None] + v_mat * (u / (2.0 * r))[:, None]
        rho_w = a_mat.sum(axis=0)
        s1 = u_mat.T @ (v_mat / (2.0 * r)[:, None])
        scaled = a_mat / np.sqrt(r)[:, None]
        rho_ww = s1 + s1.T - scaled.T @ scaled
        return nu * self.n * (rho_ww / rho - np.outer(rho_w, rho_w) / rho**2)

    @staticmethod
    def _exact_step(w, direction, t_max, u_mat, v_mat, c_lin, nu, n):
        """Exact line search for the weight problem along ``direction``:
        the slope is monotone (concavity), so bisect its sign change."""
        if t_max <= 0:
            return 0.0
        c_dir = float(c_lin @ direction)
        du = u_mat @ direction
        dv = v_mat @ direction
        u0 = u_mat @ w
        v0 = v_mat @ w

        def slope(t):
            ut = np.maximum(u0 + t * du, 1e-300)
            vt = np.maximum(v0 + t * dv, 1e-300)
            r = np.sqrt(ut * vt)
            rho = r.sum()
            rho_p = 0.5 * float(((du * vt + ut * dv) / r).sum())
            return c_dir + nu * n * rho_p / rho

        if slope(0.0) <= 0:
            return 0.0
        if slope(t_max) >= 0:
            return t_max
        lo, hi = 0.0, t_max
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if slope(mid) > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def _newton_direction(self, w, grad, u_mat, v_mat, nu):
        plane = float(grad @ w)
        free = np.flatnonzero((w > 1e-14) | (grad > plane + 1e-12))
        if free.size < 2 or nu <= 0:
            return None
        hess = self._weight_hessian(w, u_mat, v_mat, nu)[np.ix_(free, free)]
        reg = 1e-9 * (1.0 + np.abs(np.diag(hess)).max())
        kkt = np.zeros((free.size + 1, free.size + 1))
        kkt[:-1, :-1] = hess - reg * np.eye(free.size)
        kkt[:-1, -1] = 1.0
        kkt[-1, :-1] = 1.0
        rhs = np.concatenate([-grad[free], [0.0]])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            return None
        direction = np.zeros_like(w)
        direction[free] = sol[:-1]
        if float(grad @ direction) <= 0:
            return None
        return direction

    def _correct(self, nu, obj_weight, gap_tol, max_steps=80):
        """Re-optimize the atom weights over the weight simplex.

        Each step takes the better of a validated projected-Newton move
        and a simplex conditional-gradient move, both with exact line
        search, so progress is monotone and stall-free.
        """
        if self.w.size == 1:
            return
        u_mat, v_mat, _, _ = self._uv()
        c_lin = obj_weight * 0.5 * (np.asarray(self.cy) - np.asarray(self.cx))
        w = self.w.copy()
        value, grad = self._weight_value_grad(w, u_mat, v_mat, c_lin, nu)
        for _ in range(max_steps):
            plane = float(grad @ w)
            if float(grad.max()) - plane <= gap_tol:
                break
            candidates = []

            newton = self._newton_direction(w, grad, u_mat, v_mat, nu)
            if newton is not None:
                negative = newton < 0
                t_cap = 1.0
                if negative.any():
                    t_cap = min(1.0, float(np.min(w[negative] / -newton[negative])))
                t = self._exact_step(w, newton, t_cap, u_mat, v_mat, c_lin, nu, self.n)
                if t > 0:
                    candidates.append(w + t * newton)

            # simplex conditional-gradient move toward the best coordinate
            best = int(np.argmax(grad))
            toward = -w.copy()
            toward[best] += 1.0
            t = self._exact_step(w, toward, 1.0, u_mat, v_mat, c_lin, nu, self.n)
            if t > 0:
                candidates.append(w + t * toward)
            # away move reducing the worst active coordinate
            active = np.flatnonzero(w > 1e-14)
            worst = active[int(np.argmin(grad[active]))]
            away = w.copy()
            away[worst] -= 1.0
            t_cap = w[worst] / (1.0 - w[worst]) if w[worst] < 1.0 else 0.0
            t = self._exact_step(w, away, t_cap, u_mat, v_mat, c_lin, nu, self.n)
            if t > 0:
                candidates.append(w + t * away)

            improved = False
            for cand in candidates:
                cand = np.maximum(cand, 0.0)
                s = cand.sum()
                if s <= 0:
                    continue
                cand /= s
                cval, cgrad = self._weight_value_grad(cand, u_mat, v_mat, c_lin, nu)
                if cval > value + 1e-15 * (1.0 + abs(value)):
                    w, value, grad = cand, cval, cgrad
                    improved = True
                    break
            if not improved:
                break
        self.w = w

    def maximize(self, nu, gap_tol, max_iterations, obj_weight=1.0, h_target=None):
        """Ascend until a true conditional-gradient gap certifies
        optimality within gap_tol (or, when ``h_target`` is given, until
        the constraint value reaches it).

        Linear steps are lazified: the persistent atom pool is scored
        first and the exact LP is only called when no pooled vertex
        clears the current threshold, so warm-started calls are cheap.
        Returns (value, h, gap, iterations, hit_cap); the reported gap
        always comes from a real LP evaluation.
        """
        iterations = 0
        self._correct(nu, obj_weight, gap_tol / 4.0)
        prev_value = -np.inf
        stall_count = 0
        while True:
            u_mat, v_mat, u, v = self._uv()
            r = np.sqrt(u * v)
            rho = r.sum()
            h = float(self.n * np.log(rho) + self.ln_term)
            x, y = self.x, self.y
            value = obj_weight * 0.5 * float(self.g @ (y - x)) + nu * h
            if h_target is not None and h >= h_target:
                return value, h, np.inf, iterations, False
            coef = nu * self.n / rho
            gx = -obj_weight * 0.5 * self.g + coef * (self.ct @ (0.5 * r / u))
            gy = obj_weight * 0.5 * self.g + coef * (self.ct @ (0.5 * r / v))
            sx = self.klass.max_linear(gx)
            sy = self.klass.max_linear(gy)
            gap = float(gx @ (sx - x) + gy @ (sy - y))
            if gap <= gap_tol:
                return value, h, gap, iterations, False
            stall_count = stall_count + 1 if value <= prev_value + 1e-15 * (1.0 + abs(value)) else 0
            if iterations >= max_iterations or stall_count >= 8:
                return value, h, gap, iterations, gap > gap_tol
            prev_value = max(prev_value, value)
            self._register(sx, sy)
            self._correct(nu, obj_weight, gap_tol / 4.0)
            self._shrink_pool()
            iterations += 1


def _blend_to_constraint(point_neg, point_pos, channel, g, n, epsilon, tol_h):
    """Scalar root search for h = 0 along the segment between a point
    with h < 0 and one with h >= 0; returns the blended pair."""

    def h_at(t):
        x = (1 - t) * point_neg[0] + t * point_pos[0]
        y = (1 - t) * point_neg[1] + t * point_pos[1]
        return h_constraint(x, y, channel, n, epsilon), (x, y)

    lo, hi = 0.0, 1.0
    h_hi, best = h_at(1.0)
    if h_hi < -tol_h:  # both slightly infeasible: keep the better end
        return best, h_hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        h_mid, pair = h_at(mid)
        if abs(h_mid) <= tol_h:
            return pair, h_mid
        if h_mid < 0:
            lo = mid
        else:
            hi = mid
            best = pair
    h_fin, pair = h_at(hi)
    return pair, h_fin


def solve_certificate(klass: ConvexClass, channel, indicator, n, epsilon,
                      tol=1e-3, max_inner_iterations=5000, init=None, pool=None):
    """Solve the certificate program; returns a `SolveReport`.

    The outer loop drives the constraint value of the inner maximizer to
    zero by an Illinois-type root search on the multiplier (or certifies
    the unconstrained maximizer feasible, in which case the multiplier
    is zero).  ``tol`` bounds the final duality gap; the constraint
    residual is held below 1e-6 * ln(2/eps).
    """
    if not 0 < epsilon <= 0.25:
        raise ValueError("epsilon must lie in (0, 1/4]")
    channel = np.maximum(np.asarray(channel, dtype=float), CHANNEL_FLOOR)
    g = np.asarray(indicator, dtype=float)
    m, dim = channel.shape
    if g.shape != (dim,) or klass.dim != dim:
        raise ValueError("inconsistent dimensions between class, channel and indicator")
    if n < 1:
        raise ValueError("n must be >= 1")
    tol_h = 1e-6 * np.log(2.0 / epsilon)
    gap_tol = tol / 4.0
    total_iterations = 0

    # Unconstrained maximizer: a pair of exact LP solutions.
    x0 = klass.max_linear(-g)
    y0 = klass.max_linear(g)
    h0 = h_constraint(x0, y0, channel, n, epsilon)
    if h0 >= 0:
        s_bar = 0.5 * float(g @ (y0 - x0))
        return SolveReport(x_bar=x0, y_bar=y0, nu=0.0, s_bar=s_bar,
                           h_residual=h0, iterations=0, converged=True,
                           upper_bound=s_bar)

    state = _CorrectiveMaximizer(klass, channel, g, n, epsilon, init=init)
    if pool:
        state.preload(pool)
    best_upper = np.inf
    hit_cap = False
    coarse_gap = max(8.0 * gap_tol, 0.02)
    tight_neg = None  # tight-solve point with h < 0 closest to the surface
    tight_pos = None  # tight-solve point with h >= 0 closest to the surface

    def evaluate(nu, gap):
        nonlocal total_iterations, best_upper, hit_cap, tight_neg, tight_pos
        value, h, inner_gap, iters, capped = state.maximize(nu, gap, max_inner_iterations)
        total_iterations += iters
        hit_cap = hit_cap or capped
        best_upper = min(best_upper, value + inner_gap)
        if gap <= gap_tol:
            if h < 0 and (tight_neg is None or h > tight_neg[0]):
                tight_neg = (h, state.snapshot())
            if h >= 0 and (tight_pos is None or h < tight_pos[0]):
                tight_pos = (h, state.snapshot())
        return h

    # Feasibility probe: ascend the constraint alone until it is clearly
    # positive.  If even its maximum is negative the program is empty;
    # otherwise the achieved value bounds the bracket analytically:
    # at the inner optimum, h >= h_probe - obj_range/nu, so the root lies
    # below obj_range / h_probe.
    ln_term = float(np.log(2.0 / epsilon))
    _, h_probe, gap_probe, iters, _ = state.maximize(
        1.0, gap_tol=max(tol / 4.0, 1e-3 * ln_term),
        max_iterations=max_inner_iterations, obj_weight=0.0,
        h_target=0.25 * ln_term)
    total_iterations += iters
    if h_probe + (0.0 if np.isinf(gap_probe) else gap_probe) < 0:
        raise InfeasibleClassError(
            f"no pair in class {klass.label or '<unnamed>'} satisfies the "
            f"affinity constraint (max residual {h_probe:.3e})"
        )
    g_range = float(g.max() - g.min())
    nu_hi = 2.0 * max(g_range, tol) / max(h_probe, tol_h)
    h_hi = evaluate(nu_hi, coarse_gap)
    point_hi = state.snapshot()
    doublings = 0
    while h_hi < 0 and doublings < 60:
        nu_hi *= 2.0
        h_hi = evaluate(nu_hi, coarse_gap)
        point_hi = state.snapshot()
        doublings += 1
    if h_hi < 0:
        raise SolverError("failed to bracket the constraint multiplier",
                          SolveReport(*state.snapshot(), nu=nu_hi, s_bar=state.objective(),
                                      h_residual=h_hi, iterations=total_iterations,
                                      converged=False, upper_bound=best_upper))

    # Root search in two phases: coarse inner solves localize the
    # multiplier cheaply, tight solves then pin the final bracket whose
    # endpoints feed the constraint-surface blend.  Plain bisection
    # alternates with false position (fast but prone to one-sided
    # stalls on its own).
    nu_lo, h_lo = 0.0, h0
    point_lo = (x0, y0)
    nu_mid = nu_hi
    h_mid = h_hi
    tight_steps = 0
    for step in range(100):
        tight = (nu_hi - nu_lo) <= 0.05 * nu_hi or step >= 40
        gap = gap_tol if tight else coarse_gap
        if step % 2 == 0 or h_hi <= h_lo:
            nu_mid = 0.5 * (nu_lo + nu_hi)
        else:
            nu_mid = nu_lo + (nu_hi - nu_lo) * (-h_lo) / (h_hi - h_lo)
            width = nu_hi - nu_lo
            nu_mid = min(max(nu_mid, nu_lo + 0.01 * width), nu_hi - 0.01 * width)
        h_mid = evaluate(nu_mid, gap)
        if h_mid < 0:
            nu_lo, h_lo = nu_mid, h_mid
            point_lo = state.snapshot()
        else:
            nu_hi, h_hi = nu_mid, h_mid
            point_hi = state.snapshot()
        if tight:
            tight_steps += 1
            if abs(h_mid) <= tol_h:
                break
            if tight_steps >= 3 and (nu_hi - nu_lo) * max(abs(h_lo), abs(h_hi)) <= tol / 8.0:
                break
        if (nu_hi - nu_lo) <= 1e-14 * max(1.0, nu_hi):
            break

    if abs(h_mid) <= tol_h:
        x_bar, y_bar = state.snapshot()
        h_res = h_mid
        nu = nu_mid
    else:
        # Re-solve both bracket ends tightly (warm starts make this
        # cheap), then move to the constraint surface along the segment
        # between the nearest tight points on either side of it.
        nu = 0.5 * (nu_lo + nu_hi)
        if tight_neg is None:
            evaluate(nu_lo, gap_tol)
        if tight_pos is None:
            evaluate(nu_hi, gap_tol)
        if tight_neg is not None and abs(tight_neg[0]) <= tol_h:
            (x_bar, y_bar), h_res = tight_neg[1], tight_neg[0]
        elif tight_pos is not None and tight_pos[0] <= tol_h:
            (x_bar, y_bar), h_res = tight_pos[1], tight_pos[0]
        elif tight_neg is not None and tight_pos is not None:
            (x_bar, y_bar), h_res = _blend_to_constraint(
                tight_neg[1], tight_pos[1], channel, g, n, epsilon, tol_h)
        else:
            (x_bar, y_bar), h_res = _blend_to_constraint(
                point_lo, point_hi, channel, g, n, epsilon, tol_h)

    s_bar = 0.5 * float(g @ (y_bar - x_bar))
    if s_bar < 0:  # the objective is sign-symmetric in (x, y)
        x_bar, y_bar = y_bar, x_bar
        s_bar = -s_bar
    converged = (best_upper - s_bar) <= tol and abs(h_res) <= max(tol_h, 1e-12)
    report = SolveReport(x_bar=x_bar, y_bar=y_bar, nu=float(nu), s_bar=float(s_bar),
                         h_residual=float(h_res), iterations=total_iterations,
                         converged=converged, upper_bound=float(best_upper),
                         atom_pool=state.atom_pairs())
    if not converged:
        raise SolverError(
            f"certificate solve did not close its duality gap "
            f"(upper {best_upper:.6g}, value {s_bar:.6g}, residual {h_res:.3g})",
            report,
        )
    return report


def build_affine_estimator(report: SolveReport, channel, indicator, n, epsilon=None):
    """Estimator weights from a converged solve:
    offset = g.(x_bar + y_bar)/2 and weight_j = nu*n*ln sqrt(v_j/u_j)
    with u = A x_bar, v = A y_bar (zero where both sit at the floor)."""
    channel = np.asarray(channel, dtype=float)
    g = np.asarray(indicator, dtype=float)
    u = channel @ report.x_bar
    v = channel @ report.y_bar
    degenerate = (u <= 2.0 * CHANNEL_FLOOR) & (v <= 2.0 * CHANNEL_FLOOR)
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = 0.5 * report.nu * n * (np.log(v) - np.log(u))
    weights = np.where(degenerate, 0.0, weights)
    offset = 0.5 * float(g @ (report.y_bar + report.x_bar))
    return AffineEstimator(weights=weights, offset=offset, s_bar=report.s_bar,
                           epsilon=float(epsilon) if epsilon is not None else np.nan)


def adapt_nested(estimates, certificates):
    """Smallest index whose estimate is within the summed certificates of
    every larger-class estimate; returns (index, value).

    The certificates should be nondecreasing (nested classes); a
    violation only triggers a warning since the rule stays well defined.
    """
    est = np.asarray(estimates, dtype=float)
    cert = np.asarray(certificates, dtype=float)
    if est.size == 0 or est.shape != cert.shape:
        raise ValueError("need matching nonempty estimate/certificate lists")
    if np.any(np.diff(cert) < -1e-12):
        warnings.warn("certificates are not nondecreasing; classes may not be nested",
                      stacklevel=2)
    count = est.size
    for k in range(count):
        if np.all(np.abs(est[k:] - est[k]) <= cert[k] + cert[k:]):
            return k, float(est[k])
    return count - 1, float(est[-1])  # unreachable: the last index is always good


def solve_nested(classes: Sequence[ConvexClass], channel, indicator, n, epsilon,
                 tol=1e-4, max_inner_iterations=5000):
    """Solve the certificate program for each nested class at tolerance
    level epsilon/N and build the matching estimators.

    Returns (estimators, reports); consecutive solves are warm-started
    from the previous class's optimizers.
    """
    count = len(classes)
    if count == 0:
        raise ValueError("need at least one class")
    eps_k = epsilon / count
    estimators: List[AffineEstimator] = []
    reports: List[SolveReport] = []
    init = None
    for klass in classes:
        report = solve_certificate(klass, channel, indicator, n, eps_k,
                                   tol=tol, max_inner_iterations=max_inner_iterations,
                                   init=init)
        reports.append(report)
        estimators.append(build_affine_estimator(report, channel, indicator, n, eps_k))
        init = (report.x_bar, report.y_bar)
    return estimators, reports


def adaptive_estimate(estimators: Sequence[AffineEstimator], dist):
    """Evaluate nested estimators on binned data and select adaptively."""
    values = [e.evaluate(dist) for e in estimators]
    certs = [e.s_bar for e in estimators]
    k, value = adapt_nested(values, certs)
    return k, value, values
