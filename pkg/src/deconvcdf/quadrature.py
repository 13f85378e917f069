"""Adaptive panel quadrature for families of integrands sharing nodes.

The inversion estimator needs one oscillatory integral per observation,
all over the same interval.  `integrate_family` evaluates the whole
family at shared nodes (vectorized across observations) and subdivides
panels until every member meets the tolerance.  Panels can be capped at
a caller-supplied width so oscillation periods are resolved from the
start instead of discovered by subdivision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError

__all__ = ["QuadratureConfig", "integrate_family", "cumulative_family"]


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    max_subdivisions: int = 2000
    panel_rule: str = "gauss_kronrod_15"  # or "simpson_adaptive"

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.panel_rule not in ("gauss_kronrod_15", "simpson_adaptive"):
            raise ValueError(f"unknown panel rule {self.panel_rule!r}")


# 15-point Kronrod extension of 7-point Gauss on [-1, 1] (QUADPACK values).
_KRONROD_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_KRONROD_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_GAUSS_IDX = np.arange(1, 15, 2)  # Gauss-7 nodes inside the Kronrod set
_GAUSS_WEIGHTS = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])

# Simpson panels use 5 nodes: coarse rule on {0, 2, 4}, fine on all.
_SIMPSON_NODES = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])

_MAX_INITIAL_PANELS = 4096
_EVAL_BLOCK = 1 << 23  # cap elements per f() call to bound memory


def _panel_nodes(rule):
    return _KRONROD_NODES if rule == "gauss_kronrod_15" else _SIMPSON_NODES


def _evaluate_panels(f, lo, hi, rule, n_family):
    """Return (values, errors) of shape (P, n_family) for P panels."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = _panel_nodes(rule)
    k = nodes.size
    n_panels = lo.size
    per_chunk = max(1, _EVAL_BLOCK // max(1, k * n_family))

    values = np.empty((n_panels, n_family))
    errors = np.empty((n_panels, n_family))
    for start in range(0, n_panels, per_chunk):
        sl = slice(start, min(start + per_chunk, n_panels))
        pts = mid[sl, None] + half[sl, None] * nodes[None, :]
        fv = np.asarray(f(pts.ravel()), dtype=float)
        fv = fv.reshape((-1, pts.shape[0], k)) if fv.ndim > 1 else fv.reshape((1, pts.shape[0], k))
        # fv axes: (family, panel, node)
        if rule == "gauss_kronrod_15":
            coarse = np.tensordot(fv[:, :, _GAUSS_IDX], _GAUSS_WEIGHTS, axes=(2, 0))
            fine = np.tensordot(fv, _KRONROD_WEIGHTS, axes=(2, 0))
            val = fine * half[None, sl]
            err = np.abs(fine - coarse) * np.abs(half[None, sl])
        else:
            h = half[None, sl]
            coarse = (fv[:, :, 0] + 4.0 * fv[:, :, 2] + fv[:, :, 4]) * (h / 3.0)
            fine = (fv[:, :, 0] + 4.0 * fv[:, :, 1] + 2.0 * fv[:, :, 2]
                    + 4.0 * fv[:, :, 3] + fv[:, :, 4]) * (h / 6.0)
            val = fine + (fine - coarse) / 15.0
            err = np.abs(fine - coarse) / 15.0
        values[sl] = val.T
        errors[sl] = err.T
    return values, errors


def _family_size(f, a, b):
    probe = np.asarray(f(np.array([0.5 * (a + b)])), dtype=float)
    return 1 if probe.ndim <= 1 else probe.shape[0]


def integrate_family(f, a, b, config=None, max_panel_width=None):
    """Integrate a family of integrands over [a, b] to tolerance.

    Parameters
    ----------
    f : callable
        Maps a node array of shape (k,) to values of shape (n, k) for an
        n-member family (or (k,) for a single integrand).
    a, b : floats with a <= b
    config : QuadratureConfig, optional
    max_panel_width : float, optional
        Upper bound on initial panel width (oscillation resolution).

    Returns
    -------
    values, errors : ndarrays of shape (n,)
    """
    cfg = config or QuadratureConfig()
    if b < a:
        raise ValueError("integration range is reversed")
    n_family = _family_size(f, a, b if b > a else a + 1.0)
    if b == a:
        return np.zeros(n_family), np.zeros(n_family)

    length = b - a
    n_init = 1
    if max_panel_width is not None and max_panel_width > 0:
        n_init = int(min(_MAX_INITIAL_PANELS, max(1, np.ceil(length / max_panel_width))))
    edges = np.linspace(a, b, n_init + 1)
    lo, hi = edges[:-1], edges[1:]
    values, errors = _evaluate_panels(f, lo, hi, cfg.panel_rule, n_family)

    splits = 0
    while True:
        totals = values.sum(axis=0)
        err_tot = errors.sum(axis=0)
        tol = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(totals))
        over = err_tot > tol
        if not np.any(over):
            return totals, err_tot

        # Split every panel exceeding its proportional share of the
        # budget for some over-tolerance family member.
        share = (hi - lo)[:, None] / length
        bad = (errors[:, over] > tol[None, over] * share).any(axis=1)
        if not np.any(bad):  # all shares met yet total over: split worst
            bad = np.zeros(lo.size, dtype=bool)
            bad[np.argmax(errors.max(axis=1))] = True
        n_bad = int(bad.sum())
        if splits + n_bad > cfg.max_subdivisions:
            raise QuadratureError(
                f"needed more than {cfg.max_subdivisions} subdivisions "
                f"(worst residual {float(err_tot.max()):.3e})"
            )
        splits += n_bad

        mid_bad = 0.5 * (lo[bad] + hi[bad])
        new_lo = np.concatenate([lo[~bad], lo[bad], mid_bad])
        new_hi = np.concatenate([hi[~bad], mid_bad, hi[bad]])
        keep_v, keep_e = values[~bad], errors[~bad]
        v2, e2 = _evaluate_panels(
            f, np.concatenate([lo[bad], mid_bad]), np.concatenate([mid_bad, hi[bad]]),
            cfg.panel_rule, n_family,
        )
        lo, hi = new_lo, new_hi
        values = np.concatenate([keep_v, v2], axis=0)
        errors = np.concatenate([keep_e, e2], axis=0)


def cumulative_family(f, breakpoints, config=None, max_panel_width=None):
    """Integrals of a family from breakpoints[0] to each later breakpoint.

    Returns an array of shape (len(breakpoints) - 1, n): row k holds the
    integrals over [breakpoints[0], breakpoints[k + 1]].
    """
    pts = np.asarray(breakpoints, dtype=float)
    if pts.size < 2 or np.any(np.diff(pts) < 0):
        raise ValueError("breakpoints must be nondecreasing with at least two entries")
    cfg = config or QuadratureConfig()
    total_len = pts[-1] - pts[0]

    segments = []
    for seg_lo, seg_hi in zip(pts[:-1], pts[1:]):
        if seg_hi == seg_lo:
            segments.append(None)
            continue
        frac = (seg_hi - seg_lo) / total_len if total_len > 0 else 1.0
        seg_cfg = QuadratureConfig(
            abs_tol=max(cfg.abs_tol * frac, cfg.abs_tol * 1e-3),
            rel_tol=cfg.rel_tol,
            max_subdivisions=cfg.max_subdivisions,
            panel_rule=cfg.panel_rule,
        )
        vals, _ = integrate_family(f, seg_lo, seg_hi, seg_cfg, max_panel_width)
        segments.append(vals)

    n_family = next((s.size for s in segments if s is not None), 1)
    out = np.zeros((pts.size - 1, n_family))
    running = np.zeros(n_family)
    for k, seg in enumerate(segments):
        if seg is not None:
            running = running + seg
        out[k] = running
    return out
