"""Residual checks for the generalised soliton equations.

Gradient form:   Hess f1 = -c1 df2.df2 + c2 Ric + lam g
Vector form:     L_X1 g  = -2 c1 X2b.X2b + 2 c2 Ric + 2 lam g
Alignment:       grad f1 + c1 xi(xi(f2)) grad f2 - c1 xi(f2) nabla_xi grad f2
                 must be parallel to xi (equal to xi(f1) xi) on Sasakian
                 structures satisfying the gradient form.

Each check evaluates the symbolic residual at sample points and reports
absolute and relative sup-norms; the relative norm divides by
max(1, sup |left-hand side|) so flat instances do not divide by zero.
Sample points where evaluation leaves an expression's domain are skipped
and counted; a check with no valid points raises DomainError.
"""

from dataclasses import dataclass

import numpy as np

from grsoliton import expr
from grsoliton.chart import evaluate_field, sample_points
from grsoliton.expr import DomainError, Num, evaluate, simplify
from grsoliton.tensors import (
    TensorField,
    as_scalar,
    covariant_derivative,
    directional_derivative,
    gradient,
    hessian,
    lie_derivative_sym2,
    metric_tensor_field,
    musical_flat,
    partial,
    ricci,
    sym_product,
)

DEFAULT_TOLERANCE = 1e-8
_DEFAULT_POINTS = 200
_DEFAULT_SEED = 0

CONSTANT_MATCH_TOLERANCE = 1e-12


@dataclass
class SolitonSpec:
    """One soliton-equation instance: metric, mode, data fields, constants."""

    metric: object
    mode: str                     # "gradient" or "vector"
    c1: float
    c2: float
    lam: float
    f1: object = None             # Expression (gradient mode)
    f2: object = None
    X1: object = None             # TensorField (vector mode)
    X2: object = None
    params: dict = None

    def __post_init__(self):
        if self.mode not in ("gradient", "vector"):
            raise ValueError(f"unknown soliton mode {self.mode!r}")
        for name in ("c1", "c2", "lam"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"constant {name} must be finite, got {value}")
        if self.mode == "gradient":
            self.f1 = as_scalar(self.f1)
            self.f2 = as_scalar(self.f2)
        elif self.X1 is None or self.X2 is None:
            raise ValueError("vector mode needs both fields")
        self.params = dict(self.params or {})


@dataclass
class ResidualReport:
    """Sup-norm summary of one residual check over the sample points."""

    name: str
    abs_sup: float
    rel_sup: float
    tolerance: float
    passed: bool
    n_points: int
    n_skipped: int
    components: object = None     # symbolic residual components
    details: dict = None

    def as_dict(self):
        out = {
            "name": self.name,
            "abs_residual": self.abs_sup,
            "rel_residual": self.rel_sup,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "points_used": self.n_points,
            "points_skipped": self.n_skipped,
        }
        if self.details:
            out.update(self.details)
        return out


def _evaluate_masked(chart, comps, points, params):
    comps = np.asarray(comps, dtype=object)
    values = evaluate_field(comps, chart.env_at(points, params), len(points))
    flat = values.reshape(len(points), -1)
    valid = np.isfinite(flat).all(axis=1)
    return flat, valid


def _diagnose_domain(chart, comps, point, params):
    env = {name: float(v) for name, v in zip(chart.names, point)}
    for key, value in (params or {}).items():
        env.setdefault(key, float(value))
    for comp in np.asarray(comps, dtype=object).reshape(-1):
        evaluate(comp, env)   # raises DomainError at the offending node
    raise DomainError("non-finite evaluation", comps.reshape(-1)[0], env)


def make_residual_report(name, chart, residual_comps, reference_comps, points,
                         params, tolerance):
    """Evaluate residual components against sample points into a report."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    res_flat, res_valid = _evaluate_masked(chart, residual_comps, points, params)
    ref_flat, ref_valid = _evaluate_masked(chart, reference_comps, points, params)
    valid = res_valid & ref_valid
    if not valid.any():
        bad = int(np.argmin(res_valid))
        _diagnose_domain(chart, np.asarray(residual_comps, dtype=object),
                         points[bad], params)
    abs_sup = float(np.abs(res_flat[valid]).max())
    scale = max(1.0, float(np.abs(ref_flat[valid]).max()))
    rel_sup = abs_sup / scale
    return ResidualReport(
        name=name,
        abs_sup=abs_sup,
        rel_sup=rel_sup,
        tolerance=tolerance,
        passed=rel_sup <= tolerance,
        n_points=int(valid.sum()),
        n_skipped=int((~valid).sum()),
        components=residual_comps,
    )


def _default_points(chart):
    return sample_points(chart, "uniform", _DEFAULT_POINTS, _DEFAULT_SEED)


def _combine_sym2(terms):
    """Sum of (coefficient, sym2 comps) pairs into one component matrix."""
    first = terms[0][1]
    n = first.shape[0]
    comps = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            total = expr.ZERO
            for coeff, t in terms:
                if coeff == 0.0:
                    continue
                total = expr.add(total, expr.mul(Num(coeff), t[i, j]))
            comps[i, j] = comps[j, i] = simplify(total)
    return comps


def residual_gradient_form(spec, points=None, tolerance=DEFAULT_TOLERANCE):
    """Residual of Hess f1 + c1 df2.df2 - c2 Ric - lam g at sample points."""
    if spec.mode != "gradient":
        raise ValueError("residual_gradient_form needs a gradient-mode spec")
    metric = spec.metric
    chart = metric.chart
    if points is None:
        points = _default_points(chart)
    hess = hessian(metric, spec.f1)
    df2 = [partial(spec.f2, name) for name in chart.names]
    square = sym_product(TensorField(chart, "oneform", df2),
                         TensorField(chart, "oneform", df2))
    residual = _combine_sym2([
        (1.0, hess.comps),
        (spec.c1, square.comps),
        (-spec.c2, ricci(metric).comps),
        (-spec.lam, metric.comps),
    ])
    return make_residual_report("soliton_gradient", chart, residual, hess.comps,
                                points, spec.params, tolerance)


def residual_vector_form(spec, points=None, tolerance=DEFAULT_TOLERANCE):
    """Residual of L_X1 g + 2c1 X2b.X2b - 2c2 Ric - 2lam g at sample points."""
    if spec.mode != "vector":
        raise ValueError("residual_vector_form needs a vector-mode spec")
    metric = spec.metric
    chart = metric.chart
    if points is None:
        points = _default_points(chart)
    lie = lie_derivative_sym2(metric_tensor_field(metric), spec.X1)
    flat2 = musical_flat(metric, spec.X2)
    square = sym_product(flat2, flat2)
    residual = _combine_sym2([
        (1.0, lie.comps),
        (2.0 * spec.c1, square.comps),
        (-2.0 * spec.c2, ricci(metric).comps),
        (-2.0 * spec.lam, metric.comps),
    ])
    return make_residual_report("soliton_vector", chart, residual, lie.comps,
                                points, spec.params, tolerance)


def _scale_vector(scalar, X):
    return [expr.mul(scalar, c) for c in X.comps]


def alignment_condition(structure, f1, f2, c1, points=None,
                        tolerance=DEFAULT_TOLERANCE, params=None):
    """Necessary condition for a Sasakian gradient-form soliton.

    Builds zeta = grad f1 + c1 xi(xi(f2)) grad f2 - c1 xi(f2) nabla_xi grad f2
    and reports the residual of zeta - xi(f1) xi.  Returns (zeta, report).
    """
    metric = structure.metric
    chart = structure.chart
    if points is None:
        points = _default_points(chart)
    f1 = as_scalar(f1)
    f2 = as_scalar(f2)
    xi = structure.xi
    grad1 = gradient(metric, f1)
    grad2 = gradient(metric, f2)
    xi_f2 = directional_derivative(xi, f2)
    xi_xi_f2 = directional_derivative(xi, xi_f2)
    transport2 = covariant_derivative(metric, xi, grad2)

    zeta_comps = []
    for k in range(chart.dim):
        total = grad1.comps[k]
        total = expr.add(total, expr.mul(Num(c1), expr.mul(xi_xi_f2, grad2.comps[k])))
        total = expr.sub(total, expr.mul(Num(c1), expr.mul(xi_f2, transport2.comps[k])))
        zeta_comps.append(simplify(total))
    zeta = TensorField(chart, "vector", zeta_comps, presimplify=False)

    xi_f1 = directional_derivative(xi, f1)
    residual = [simplify(expr.sub(zeta.comps[k], expr.mul(xi_f1, xi.comps[k])))
                for k in range(chart.dim)]
    report = make_residual_report("theorem_alignment", chart, residual,
                                  zeta_comps, points, params, tolerance)
    return zeta, report


def grad_transport_check(structure, f1, f2, c1, c2, lam, points=None,
                         tolerance=DEFAULT_TOLERANCE, params=None):
    """Residual of nabla_xi grad f1 = (lam + 2 c2 n) xi - c1 xi(f2) grad f2.

    Holds on Sasakian structures satisfying the gradient-form equation;
    the hypothesis is not enforced here so violations stay detectable.
    """
    metric = structure.metric
    chart = structure.chart
    if points is None:
        points = _default_points(chart)
    f1 = as_scalar(f1)
    f2 = as_scalar(f2)
    xi = structure.xi
    lhs = covariant_derivative(metric, xi, gradient(metric, f1))
    grad2 = gradient(metric, f2)
    xi_f2 = directional_derivative(xi, f2)
    coeff = lam + 2.0 * c2 * structure.n
    residual = []
    for k in range(chart.dim):
        total = expr.sub(lhs.comps[k], expr.mul(Num(coeff), xi.comps[k]))
        total = expr.add(total, expr.mul(Num(c1), expr.mul(xi_f2, grad2.comps[k])))
        residual.append(simplify(total))
    return make_residual_report("grad_transport", chart, residual, lhs.comps,
                                points, params, tolerance)


def _projected_coordinate_fields(structure):
    """Y_i = d_i - eta(d_i) xi, the coordinate fields pushed off the Reeb
    direction; expanded symbolically so higher derivatives stay exact."""
    chart = structure.chart
    n = chart.dim
    fields = []
    for i in range(n):
        comps = []
        for k in range(n):
            base = expr.ONE if k == i else expr.ZERO
            comps.append(simplify(expr.sub(base, expr.mul(structure.eta.comps[i],
                                                          structure.xi.comps[k]))))
        fields.append(TensorField(chart, "vector", comps, presimplify=False))
    return fields


def _pair_with(T_comps, Y, xi):
    """T(Y, xi) = T_ab Y^a xi^b as a scalar expression."""
    n = len(xi.comps)
    total = expr.ZERO
    for a in range(n):
        for b in range(n):
            total = expr.add(total, expr.mul(T_comps[a, b],
                                             expr.mul(Y.comps[a], xi.comps[b])))
    return total


def _metric_pairing(metric, X, Y):
    n = metric.dim
    total = expr.ZERO
    for a in range(n):
        for b in range(n):
            total = expr.add(total, expr.mul(metric.comps[a, b],
                                             expr.mul(X.comps[a], Y.comps[b])))
    return total


def potential_square_lie_sides(xi, f2):
    """Both sides of the Lie-derivative expansion of df2.df2 against (d_j, xi).

    Left:  (L_xi (df2.df2))(d_j, xi)
    Right: d_j(xi(f2)) xi(f2) + d_j(f2) xi(xi(f2))
    Metric-independent; holds for any field xi and any smooth f2.
    """
    chart = xi.chart
    names = chart.names
    f2 = as_scalar(f2)
    df2 = TensorField(chart, "oneform", [partial(f2, nm) for nm in names])
    square = sym_product(df2, df2)
    lie = lie_derivative_sym2(square, xi)
    xi_f2 = directional_derivative(xi, f2)
    xi_xi_f2 = directional_derivative(xi, xi_f2)
    lhs, rhs = [], []
    for j in range(chart.dim):
        total = expr.ZERO
        for b in range(chart.dim):
            total = expr.add(total, expr.mul(lie.comps[j, b], xi.comps[b]))
        lhs.append(simplify(total))
        rhs.append(simplify(expr.add(expr.mul(partial(xi_f2, names[j]), xi_f2),
                                     expr.mul(partial(f2, names[j]), xi_xi_f2))))
    return lhs, rhs


def supporting_identities_check(structure, f1, f2, c1, points=None,
                                tolerance=DEFAULT_TOLERANCE, params=None):
    """Residuals of the three identities behind the alignment condition.

    double_lie:           (L_xi (L_{grad f1} g))(Y, xi) expansion, for Y the
                          coordinate fields projected orthogonal to xi
    potential_square_lie: (L_xi (df2.df2))(Y, xi) expansion, unprojected Y
    scalar_reduction:     Y(f1) + c1 xi(xi(f2)) Y(f2)
                          - c1 xi(f2) g(nabla_xi grad f2, Y) = 0
    """
    metric = structure.metric
    chart = metric.chart
    if points is None:
        points = _default_points(chart)
    f1 = as_scalar(f1)
    f2 = as_scalar(f2)
    xi = structure.xi
    names = chart.names
    projected = _projected_coordinate_fields(structure)

    grad1 = gradient(metric, f1)
    lie_inner = lie_derivative_sym2(metric_tensor_field(metric), grad1)
    lie_outer = lie_derivative_sym2(lie_inner, xi)
    transport1 = covariant_derivative(metric, xi, grad1)
    transport1_twice = covariant_derivative(metric, xi, transport1)
    slope = _metric_pairing(metric, transport1, xi)

    lhs_dl, rhs_dl = [], []
    for Y in projected:
        lhs_dl.append(simplify(_pair_with(lie_outer.comps, Y, xi)))
        total = _metric_pairing(metric, grad1, Y)
        total = expr.add(total, _metric_pairing(metric, transport1_twice, Y))
        total = expr.add(total, directional_derivative(Y, slope))
        rhs_dl.append(simplify(total))
    double_lie = make_residual_report(
        "double_lie", chart,
        [expr.sub(a, b) for a, b in zip(lhs_dl, rhs_dl)],
        lhs_dl, points, params, tolerance)

    lhs_sq, rhs_sq = potential_square_lie_sides(xi, f2)
    square_lie = make_residual_report(
        "potential_square_lie", chart,
        [expr.sub(a, b) for a, b in zip(lhs_sq, rhs_sq)],
        lhs_sq, points, params, tolerance)

    grad2 = gradient(metric, f2)
    xi_f2 = directional_derivative(xi, f2)
    xi_xi_f2 = directional_derivative(xi, xi_f2)
    transport2 = covariant_derivative(metric, xi, grad2)
    reduction = []
    reference = []
    for Y in projected:
        total = directional_derivative(Y, f1)
        reference.append(total)
        total = expr.add(total, expr.mul(Num(c1),
                                         expr.mul(xi_xi_f2, directional_derivative(Y, f2))))
        total = expr.sub(total, expr.mul(Num(c1),
                                         expr.mul(xi_f2, _metric_pairing(metric, transport2, Y))))
        reduction.append(simplify(total))
    scalar_reduction = make_residual_report(
        "scalar_reduction", chart, reduction, reference, points, params, tolerance)

    return {
        "double_lie": double_lie,
        "potential_square_lie": square_lie,
        "scalar_reduction": scalar_reduction,
    }


def _matches(value, target, tol=CONSTANT_MATCH_TOLERANCE):
    return abs(value - target) <= tol


def classify_constants(c1, c2, lam, n_dim):
    """Named special cases of the constants (exact up to 1e-12).

    killing:              c1 = c2 = lam = 0
    homothety:            c1 = c2 = 0
    ricci_soliton:        c1 = 0, c2 = -1
    einstein_weyl:        c1 = 1, c2 = -1/(n-2)      (n_dim >= 3)
    projective_skew_ricci c1 = 1, c2 = -1/(n-1), lam = 0   (n_dim >= 3)
    vacuum_near_horizon:  c1 = 1, c2 = 1/2
    """
    labels = set()
    if _matches(c1, 0.0) and _matches(c2, 0.0):
        labels.add("homothety")
        if _matches(lam, 0.0):
            labels.add("killing")
    if _matches(c1, 0.0) and _matches(c2, -1.0):
        labels.add("ricci_soliton")
    if n_dim >= 3:
        if _matches(c1, 1.0) and _matches(c2, -1.0 / (n_dim - 2)):
            labels.add("einstein_weyl")
        if _matches(c1, 1.0) and _matches(c2, -1.0 / (n_dim - 1)) and _matches(lam, 0.0):
            labels.add("projective_skew_ricci")
    if _matches(c1, 1.0) and _matches(c2, 0.5):
        labels.add("vacuum_near_horizon")
    return labels
