"""Manifest pipelines behind the CLI subcommands.

Each subcommand maps the manifest blocks onto the corresponding checks and
collects one CheckRow per named check.  "all" runs every check the
manifest has data for.  Failures are rows with passed=False; structural
problems with the manifest raise ManifestError, and evaluation leaving an
expression's domain at every sample point raises DomainError.
"""

import time

from grsoliton.chart import sample_points
from grsoliton.contact import (
    StructureError,
    assemble_structure,
    classify_structure,
    ricci_reeb_residual,
)
from grsoliton.fit import fit_constants
from grsoliton.manifest import CONSTANT_KEYS, ManifestError
from grsoliton.report import CheckRow, Report
from grsoliton.soliton import (
    SolitonSpec,
    alignment_condition,
    grad_transport_check,
    residual_gradient_form,
    residual_vector_form,
    supporting_identities_check,
)
from grsoliton.tensors import TensorField

SUBCOMMANDS = ("check-soliton", "check-structure", "check-theorem", "fit", "all")


def _row_from_report(report, **extra):
    payload = {"points_used": report.n_points, "points_skipped": report.n_skipped}
    payload.update(extra)
    return CheckRow(report.name, report.abs_sup, report.rel_sup,
                    report.tolerance, report.passed, payload)


def run_manifest(manifest, subcommand, points=None, count=None, seed=None,
                 tolerance=None, d_convention="half"):
    """Run one subcommand against a loaded manifest and build the Report."""
    if subcommand not in SUBCOMMANDS:
        raise ManifestError(f"unknown subcommand {subcommand!r}; "
                            f"choose from {SUBCOMMANDS}")
    started = time.perf_counter()
    tol = manifest.tolerance if tolerance is None else float(tolerance)
    sampling = dict(manifest.sampling)
    if count is not None:
        sampling["count"] = int(count)
    if seed is not None:
        sampling["seed"] = int(seed)
    if points is None:
        points = sample_points(manifest.chart, sampling["strategy"],
                               sampling["count"], sampling["seed"])

    rows = []
    structure = None
    if subcommand in ("check-structure", "check-theorem", "all"):
        wants_structure = subcommand != "all" or manifest.structure is not None
        if manifest.structure is None and subcommand != "all":
            raise ManifestError(f"{subcommand} needs a structure block")
        if wants_structure:
            structure, structure_rows = _assemble(manifest, points, tol, d_convention,
                                                  classify=subcommand != "check-theorem")
            rows.extend(structure_rows)

    if subcommand in ("check-soliton", "all"):
        if manifest.mode is None and subcommand != "all":
            raise ManifestError("check-soliton needs a scalars or vectors block")
        if manifest.mode is not None:
            rows.extend(_soliton_rows(manifest, points, tol))

    if subcommand in ("check-theorem", "all"):
        if subcommand == "check-theorem" and manifest.scalars is None:
            raise ManifestError("check-theorem needs a scalars block")
        if structure is not None and manifest.scalars is not None:
            rows.extend(_theorem_rows(manifest, structure, points, tol))

    if subcommand in ("fit", "all"):
        if manifest.scalars is None and subcommand != "all":
            raise ManifestError("fit needs a scalars block")
        if manifest.scalars is not None:
            rows.append(_fit_row(manifest, points, tol, explicit=subcommand == "fit"))

    if not rows:
        raise ManifestError(f"manifest has no content for subcommand {subcommand!r}")
    return Report(
        manifest_digest=manifest.digest,
        subcommand=subcommand,
        conventions={
            "d_convention": d_convention,
            "sym_product": "half",
            "phi_matrix": "column-input",
        },
        checks=rows,
        overall_pass=all(r.passed for r in rows),
        elapsed_seconds=time.perf_counter() - started,
    )


def _assemble(manifest, points, tol, d_convention, classify=True):
    block = manifest.structure
    try:
        structure = assemble_structure(manifest.chart, manifest.metric,
                                       block["phi"], block["xi"], block["eta"],
                                       points=points, params=manifest.params,
                                       tolerance=max(tol, 1e-8))
    except StructureError as ex:
        row = CheckRow("structure_axioms", ex.residual, ex.residual, tol, False,
                       {"axiom": ex.axiom, "worst_point": list(map(float, ex.point))})
        return None, [row]
    if not classify:
        return structure, []
    report = classify_structure(structure, tolerance=tol, points=points,
                                params=manifest.params, d_convention=d_convention)
    res = report.residuals
    almost = max(res[k] for k in ("reeb_normalisation", "phi_square",
                                  "metric_compatibility", "reeb_kernel"))
    ladder = [
        ("structure_almost_contact", almost, report.almost_contact_metric),
        ("structure_contact", res["contact_condition"], report.contact_metric),
        ("structure_k_contact", res["reeb_transport"], report.k_contact),
        ("structure_normal", res["normality"], report.normal),
        ("structure_sasakian", max(res["contact_condition"], res["normality"]),
         report.sasakian),
    ]
    rows = [CheckRow(name, value, value, tol, flag) for name, value, flag in ladder]
    rows[-1].extra["d_convention"] = d_convention
    return structure, rows


def _resolved_constants(manifest, points, tol):
    """Numeric constants, fitting any marked "fit" with the rest pinned."""
    targets = manifest.fit_targets()
    resolved = dict(manifest.numeric_constants())
    fit = None
    if targets:
        fixed = {k: v for k, v in resolved.items() if k in CONSTANT_KEYS}
        fit = fit_constants(manifest.metric, manifest.scalars["f1"],
                            manifest.scalars["f2"], points,
                            params=manifest.params, fixed=fixed)
        for name, value in zip(fit.free_names, fit.solution):
            resolved[name] = float(value)
    return resolved, fit


def _soliton_rows(manifest, points, tol):
    rows = []
    if manifest.mode == "gradient":
        constants, fit = _resolved_constants(manifest, points, tol)
        if fit is not None:
            rows.append(_fit_check_row(manifest, fit, tol, note="resolved-for-check"))
        spec = SolitonSpec(manifest.metric, "gradient",
                           constants["c1"], constants["c2"], constants["lambda"],
                           f1=manifest.scalars["f1"], f2=manifest.scalars["f2"],
                           params=manifest.params)
        rows.append(_row_from_report(
            residual_gradient_form(spec, points, tol),
            constants={k: constants[k] for k in CONSTANT_KEYS}))
    else:
        constants = manifest.numeric_constants()
        X1 = TensorField(manifest.chart, "vector", manifest.vectors["X1"])
        X2 = TensorField(manifest.chart, "vector", manifest.vectors["X2"])
        spec = SolitonSpec(manifest.metric, "vector",
                           constants["c1"], constants["c2"], constants["lambda"],
                           X1=X1, X2=X2, params=manifest.params)
        rows.append(_row_from_report(
            residual_vector_form(spec, points, tol),
            constants={k: constants[k] for k in CONSTANT_KEYS}))
    return rows


def _theorem_rows(manifest, structure, points, tol):
    constants, _ = _resolved_constants(manifest, points, tol)
    f1 = manifest.scalars["f1"]
    f2 = manifest.scalars["f2"]
    c1, c2, lam = (constants[k] for k in CONSTANT_KEYS)
    params = manifest.params
    rows = []
    _, alignment = alignment_condition(structure, f1, f2, c1, points, tol, params)
    rows.append(_row_from_report(alignment))
    rows.append(_row_from_report(
        grad_transport_check(structure, f1, f2, c1, c2, lam, points, tol, params)))
    reeb = ricci_reeb_residual(structure, points, params)
    rows.append(CheckRow("ricci_reeb", reeb, reeb, tol, reeb <= tol))
    for report in supporting_identities_check(structure, f1, f2, c1,
                                              points, tol, params).values():
        rows.append(_row_from_report(report))
    return rows


def _fit_check_row(manifest, fit, tol, note=None):
    rel = fit.residual_sup / max(1.0, fit.target_sup)
    passed = rel <= tol
    extra = {
        "solution": {name: float(v) for name, v in zip(fit.free_names, fit.solution)},
        "rank": fit.rank,
        "null_space": [[float(v) for v in col] for col in fit.null_space.T],
    }
    declared = manifest.numeric_constants()
    if all(k in declared for k in fit.free_names):
        distance = fit.coset_distance([declared[k] for k in fit.free_names])
        extra["declared_distance"] = distance
        passed = passed and distance <= max(tol, 1e-8)
    if note:
        extra["note"] = note
    return CheckRow("fit_constants", fit.residual_sup, rel, tol, passed, extra)


def _fit_row(manifest, points, tol, explicit):
    targets = manifest.fit_targets()
    fixed = {}
    if explicit and targets:
        fixed = {k: v for k, v in manifest.numeric_constants().items()
                 if k in CONSTANT_KEYS}
    fit = fit_constants(manifest.metric, manifest.scalars["f1"],
                        manifest.scalars["f2"], points,
                        params=manifest.params, fixed=fixed)
    return _fit_check_row(manifest, fit, tol)
