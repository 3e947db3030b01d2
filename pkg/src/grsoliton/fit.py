"""Recover soliton constants from fixed potentials by linear least squares.

The gradient-form equation is linear in (c1, c2, lam):

    c1 (df2.df2) + c2 (-Ric) + lam (-g) = -Hess f1

Stacking every independent symmetric component at every sample point gives
an overdetermined system solved by normal equations.  Rank is decided on
the singular values of the small normal matrix (threshold 1e-10 relative),
and the null space is reported rather than collapsed: genuinely
under-determined instances (e.g. Einstein metrics, where Ric and g are
collinear) have a whole affine family of solutions.
"""

from dataclasses import dataclass

import numpy as np

from grsoliton import expr
from grsoliton.soliton import SolitonSpec, _evaluate_masked
from grsoliton.tensors import TensorField, as_scalar, hessian, partial, ricci, sym_product

RANK_THRESHOLD = 1e-10

CONSTANT_ORDER = ("c1", "c2", "lambda")


@dataclass
class FitResult:
    """Least-squares solution with rank and null-space diagnostics."""

    solution: np.ndarray          # minimum-norm particular solution
    rank: int
    null_space: np.ndarray        # orthonormal columns spanning the kernel
    residual_sup: float
    singular_values: np.ndarray
    free_names: tuple = CONSTANT_ORDER
    target_sup: float = 0.0      # sup |rhs|, for relative residuals

    def coset_distance(self, constants):
        """Distance from a constants vector to the affine solution set."""
        delta = np.asarray(constants, dtype=float) - self.solution
        if self.null_space.size:
            delta = delta - self.null_space @ (self.null_space.T @ delta)
        return float(np.linalg.norm(delta))

    def as_dict(self):
        return {
            "solution": {name: float(v) for name, v in zip(self.free_names, self.solution)},
            "rank": self.rank,
            "null_space": [list(map(float, col)) for col in self.null_space.T],
            "residual_sup": self.residual_sup,
        }


def _design_columns(metric, f1, f2):
    chart = metric.chart
    f1 = as_scalar(f1)
    f2 = as_scalar(f2)
    df2 = TensorField(chart, "oneform", [partial(f2, nm) for nm in chart.names])
    square = sym_product(df2, df2).comps
    ric = ricci(metric).comps
    hess = hessian(metric, f1).comps
    n = chart.dim
    upper = [(i, j) for i in range(n) for j in range(i, n)]
    columns = {
        "c1": [square[i, j] for i, j in upper],
        "c2": [expr.neg(ric[i, j]) for i, j in upper],
        "lambda": [expr.neg(metric.comps[i, j]) for i, j in upper],
    }
    target = [expr.neg(hess[i, j]) for i, j in upper]
    return columns, target


def fit_constants(metric, f1, f2, points, params=None, fixed=None):
    """Fit the soliton constants against -Hess f1 at the given points.

    fixed maps a subset of {"c1", "c2", "lambda"} to pinned values; the
    remaining constants are fitted.  Sample points where any entry leaves
    its domain are skipped.  Needs at least 3 points.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) < 3:
        raise ValueError(f"need at least 3 sample points, got {len(points)}")
    fixed = dict(fixed or {})
    unknown = set(fixed) - set(CONSTANT_ORDER)
    if unknown:
        raise ValueError(f"cannot fix unknown constants {sorted(unknown)}")
    free_names = tuple(n for n in CONSTANT_ORDER if n not in fixed)
    if not free_names:
        raise ValueError("all constants fixed, nothing to fit")

    columns, target = _design_columns(metric, f1, f2)
    chart = metric.chart
    blocks = {}
    valid = None
    for name in CONSTANT_ORDER:
        flat, ok = _evaluate_masked(chart, columns[name], points, params)
        blocks[name] = flat
        valid = ok if valid is None else (valid & ok)
    b_flat, ok = _evaluate_masked(chart, target, points, params)
    valid &= ok
    if valid.sum() < 3:
        raise ValueError("fewer than 3 sample points survive domain masking")

    rows = np.column_stack([blocks[name][valid].reshape(-1) for name in free_names])
    b = b_flat[valid].reshape(-1)
    for name, value in fixed.items():
        b = b - float(value) * blocks[name][valid].reshape(-1)

    k = len(free_names)
    normal = rows.T @ rows
    rhs = rows.T @ b
    sigma, basis = np.linalg.eigh(normal)      # ascending, sigma >= 0
    sigma = np.clip(sigma, 0.0, None)
    cutoff = RANK_THRESHOLD * sigma.max() if sigma.max() > 0 else np.inf
    keep = sigma > cutoff
    rank = int(keep.sum())
    solution = np.zeros(k)
    for lam_val, vec in zip(sigma[keep], basis.T[keep]):
        solution += (vec @ rhs) / lam_val * vec
    null_space = basis[:, ~keep]
    residual_sup = float(np.abs(rows @ solution - b).max()) if rank else \
        float(np.abs(b).max()) if b.size else 0.0
    return FitResult(
        solution=solution,
        rank=rank,
        null_space=null_space,
        residual_sup=residual_sup,
        singular_values=sigma[::-1].copy(),
        free_names=free_names,
        target_sup=float(np.abs(b).max()) if b.size else 0.0,
    )


def manufacture_instance(metric, f1_template, f2_template, constants,
                         points=None, params=None):
    """Round-trip generator: build a gradient-mode spec from templates and
    the given (c1, c2, lam), and fit the constants back from it.

    Returns (spec, fit); the generating constants must lie in the fitted
    affine solution set (fit.coset_distance of them is the certificate).
    """
    c1, c2, lam = constants
    spec = SolitonSpec(metric, "gradient", c1, c2, lam,
                       f1=as_scalar(f1_template), f2=as_scalar(f2_template),
                       params=params)
    if points is None:
        from grsoliton.chart import sample_points
        points = sample_points(metric.chart, "uniform", 200, 0)
    fit = fit_constants(metric, spec.f1, spec.f2, points, params=params)
    return spec, fit
