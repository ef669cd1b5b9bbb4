use std::fs;
use std::path::Path;

use pindex_core::catalog::{catalog_all, catalog_get, CatalogEntry};
use pindex_core::lift::{
    index_descend_relation, index_lift_relation, numeric_lift_check, reduction_sum_check, riemann_hurwitz, LiftError,
    ReductionReport, SingularPartition,
};
use pindex_core::obstruction::{foliation_feasibility, BagpipeSpec, Verdict};
use pindex_core::surface::{
    discrete_ph_sum, generate_surface, poincare_1885_check, CellKind, SurfaceSpec, Triangulation,
};
use pindex_core::tangency::{
    census, find_tangencies, loop_free_bound_check, surgery_replay, verify_surgery_trace, Scenario, SurgeryStep,
    SurgeryTrace, Tangency, TangencyError, TangencyKind, TangencyOptions,
};
use pindex_core::{winding_index, Circle, FieldFile, FieldKind, HalfIndex, PlaneField, WindingOptions, WindingResult};
use serde_json::{json, Value};

use crate::plot::{render_csv, render_svg, PlotOptions};
use crate::report::{digest, half, halves, Diagnostic, Failure, Report, Status, SCHEMA};
use crate::{
    CatalogArgs, Command, FeasibleArgs, IndexArgs, LiftArgs, MeshArgs, Method, NumericArgs, PlotArgs, RhArgs,
    SurgeryArgs, TangencyArgs,
};

/// Files read during one invocation, fed into the input digest.
#[derive(Default)]
struct Inputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes =
            fs::read(path).map_err(|e| Failure::input("IO_READ", format!("cannot read {}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Failure::input("IO_READ", format!("{} is not UTF-8", path.display())))?;
        self.files.push((path.display().to_string(), bytes));
        Ok(text)
    }

    /// `--field` value: a file, inline JSON, or a catalog name. Anything
    /// with a path separator or a `.json` suffix is treated as a file.
    fn field(&mut self, spec: &str) -> Result<PlaneField, Failure> {
        let path = Path::new(spec);
        if path.is_file() || spec.contains(std::path::MAIN_SEPARATOR) || spec.ends_with(".json") {
            let text = self.read(path)?;
            return Ok(FieldFile::from_json(&text)?.build()?);
        }
        if spec.trim_start().starts_with('{') {
            return Ok(FieldFile::from_json(spec)?.build()?);
        }
        Ok(catalog_get(spec)?.field)
    }

    fn surface(&mut self, args: &MeshArgs) -> Result<Triangulation, Failure> {
        match (&args.mesh, args.genus, args.crosscaps) {
            (Some(path), _, _) => Ok(Triangulation::parse(&self.read(path)?)?),
            (_, Some(genus), _) => Ok(generate_surface(SurfaceSpec::Orientable { genus })?),
            (_, _, Some(crosscaps)) => Ok(generate_surface(SurfaceSpec::NonOrientable { crosscaps })?),
            _ => unreachable!("clap requires one surface source"),
        }
    }
}

struct Done {
    status: Status,
    results: Value,
    diagnostics: Vec<Diagnostic>,
}

impl Done {
    fn pass(results: Value) -> Self {
        Done { status: Status::Pass, results, diagnostics: Vec::new() }
    }

    fn verdict(ok: bool, results: Value, failure: Diagnostic) -> Self {
        if ok {
            Done::pass(results)
        } else {
            Done { status: Status::Fail, results, diagnostics: vec![failure] }
        }
    }
}

pub(crate) fn dispatch(command: &Command, argv: Vec<String>) -> Report {
    let mut inputs = Inputs::default();
    let outcome = match command {
        Command::Index(a) => index(a, &mut inputs),
        Command::Tangencies(a) => tangencies(a, &mut inputs),
        Command::Ph(a) => ph(a, &mut inputs),
        Command::Poincare1885(a) => poincare1885(a, &mut inputs),
        Command::Lift(a) => lift(a),
        Command::Rh(a) => rh(a),
        Command::Feasible(a) => feasible(a),
        Command::Surgery(a) => surgery(a),
        Command::Plot(a) => plot(a, &mut inputs),
        Command::Catalog(a) => catalog(a),
    };
    let done =
        outcome.unwrap_or_else(|f| Done { status: f.status, results: f.results, diagnostics: vec![f.diagnostic] });
    Report {
        schema: SCHEMA,
        command: command.name().to_string(),
        inputs_digest: digest(&argv, &inputs.files),
        argv,
        status: done.status,
        exit_code: done.status.exit_code(),
        results: done.results,
        diagnostics: done.diagnostics,
    }
}

fn circle_for(field: &PlaneField, center: Option<[f64; 2]>, radius: f64) -> Result<Circle, Failure> {
    Ok(Circle::new(center.unwrap_or(field.singular_point), radius)?)
}

fn circle_json(c: &Circle) -> Value {
    json!({ "center": c.center, "radius": c.radius })
}

fn field_json(spec: &str, f: &PlaneField) -> Value {
    let kind = match &f.kind {
        FieldKind::VectorPolynomial(p) => {
            json!({ "kind": "vector_polynomial", "P": p.p.to_string(), "Q": p.q.to_string() })
        }
        FieldKind::LineModel { two_j } => json!({ "kind": "line_model", "two_j": two_j }),
    };
    json!({ "source": spec, "definition": kind, "singular_point": f.singular_point, "orientable": f.is_orientable() })
}

fn winding_opts(n: &NumericArgs) -> WindingOptions {
    WindingOptions { initial_samples: n.samples, max_depth: n.max_depth, exec: n.exec(), ..Default::default() }
}

fn winding_json(w: &WindingResult) -> Value {
    json!({
        "index": half(w.index),
        "raw_turns": w.raw_turns,
        "residual": w.residual,
        "samples_used": w.samples_used,
        "max_step_angle": w.max_step_angle,
    })
}

fn kind_str(k: TangencyKind) -> &'static str {
    match k {
        TangencyKind::Internal => "internal",
        TangencyKind::External => "external",
    }
}

fn tangency_table(circle: &Circle, ts: &[Tangency]) -> Value {
    Value::Array(
        ts.iter()
            .map(|t| {
                json!({
                    "angle": t.angle,
                    "point": circle.point_at(t.angle),
                    "kind": kind_str(t.kind),
                    "second_order": t.second_order,
                })
            })
            .collect(),
    )
}

fn index(a: &IndexArgs, inputs: &mut Inputs) -> Result<Done, Failure> {
    let field = inputs.field(&a.field)?;
    let circle = circle_for(&field, a.center, a.radius)?;
    let mut methods = serde_json::Map::new();
    let mut found: Vec<(&str, HalfIndex)> = Vec::new();
    let mut diagnostics = Vec::new();

    if matches!(a.method, Method::Winding | Method::All) {
        let w = winding_index(&field, &circle, &winding_opts(&a.numeric))?;
        methods.insert("winding".into(), winding_json(&w));
        found.push(("winding", w.index));
    }
    if matches!(a.method, Method::Bendixson | Method::Hamburger | Method::All) {
        let opts = TangencyOptions { exec: a.numeric.exec(), ..Default::default() };
        let c = census(&field, &circle, &opts)?;
        if matches!(a.method, Method::Bendixson | Method::All) {
            methods.insert(
                "bendixson".into(),
                json!({ "index": half(c.bendixson), "internal": c.internal, "external": c.external }),
            );
            found.push(("bendixson", c.bendixson));
        }
        if matches!(a.method, Method::Hamburger | Method::All) {
            methods.insert(
                "hamburger".into(),
                json!({ "index": half(c.hamburger), "convex": c.convex, "concave": c.concave }),
            );
            found.push(("hamburger", c.hamburger));
        }
        diagnostics.push(
            Diagnostic::new("TANGENCY_TABLE", format!("{} tangencies", c.tangencies.len()))
                .with_detail(tangency_table(&circle, &c.tangencies)),
        );
    }

    let agree = found.windows(2).all(|w| w[0].1 == w[1].1);
    let results = json!({
        "field": field_json(&a.field, &field),
        "circle": circle_json(&circle),
        "methods": methods,
        "agree": agree,
        "index": if agree { half(found[0].1) } else { Value::Null },
    });
    if agree {
        return Ok(Done { status: Status::Pass, results, diagnostics });
    }
    let summary: Vec<String> = found.iter().map(|(m, i)| format!("{m} = {i}")).collect();
    diagnostics.insert(0, Diagnostic::new("METHOD_DISAGREEMENT", summary.join(", ")));
    Ok(Done { status: Status::Fail, results, diagnostics })
}

fn tangencies(a: &TangencyArgs, inputs: &mut Inputs) -> Result<Done, Failure> {
    let field = inputs.field(&a.field)?;
    let circle = circle_for(&field, a.center, a.radius)?;
    let exec = if a.sequential { pindex_core::Exec::Sequential } else { pindex_core::Exec::Parallel };
    let opts = TangencyOptions { samples: a.samples, exec, ..Default::default() };
    let c = census(&field, &circle, &opts)?;
    Ok(Done::pass(json!({
        "field": field_json(&a.field, &field),
        "circle": circle_json(&circle),
        "tangencies": tangency_table(&circle, &c.tangencies),
        "internal": c.internal,
        "external": c.external,
        "convex": c.convex,
        "concave": c.concave,
        "bendixson": half(c.bendixson),
        "hamburger": half(c.hamburger),
    })))
}

fn surface_source(a: &MeshArgs) -> Value {
    match (&a.mesh, a.genus, a.crosscaps) {
        (Some(p), _, _) => json!({ "mesh": p.display().to_string() }),
        (_, Some(g), _) => json!({ "genus": g }),
        (_, _, Some(k)) => json!({ "crosscaps": k }),
        _ => Value::Null,
    }
}

fn ph(a: &MeshArgs, inputs: &mut Inputs) -> Result<Done, Failure> {
    let t = inputs.surface(a)?;
    let s = t.validate()?;
    let d = discrete_ph_sum(&t)?;
    let classes: Vec<Value> = d
        .singularities
        .iter()
        .map(|c| {
            let at = match c.at {
                CellKind::Vertex => "vertex",
                CellKind::EdgeMidpoint => "edge_midpoint",
                CellKind::FaceBarycenter => "face_barycenter",
            };
            json!({ "at": at, "index": half(c.index), "count": c.count })
        })
        .collect();
    let results = json!({
        "source": surface_source(a),
        "surface": {
            "sigma0": s.sigma0, "sigma1": s.sigma1, "sigma2": s.sigma2,
            "chi": s.chi, "orientable": s.orientable, "components": s.components,
        },
        "singularities": classes,
        "total_index": half(d.total_index),
        "chi": d.chi,
        "passed": d.passed,
    });
    let msg = format!("index sum {} differs from chi = {}", d.total_index, d.chi);
    Ok(Done::verdict(d.passed, results, Diagnostic::new("PH_SUM_MISMATCH", msg)))
}

fn poincare1885(a: &MeshArgs, inputs: &mut Inputs) -> Result<Done, Failure> {
    let t = inputs.surface(a)?;
    let r = poincare_1885_check(&t)?;
    let results = json!({
        "source": surface_source(a),
        "sigma0": r.sigma0, "sigma1": r.sigma1, "sigma2": r.sigma2,
        "identities": [
            {
                "statement": "sum(2 - nu) = 2 sigma0 - 3 sigma2",
                "lhs": r.vertex_excess, "rhs": r.two_sigma0_minus_three_sigma2, "holds": r.vertex_excess_holds,
            },
            {
                "statement": "3 sigma2 = 2 sigma1",
                "lhs": r.three_sigma2, "rhs": r.two_sigma1, "holds": r.descartes_euler_holds,
            },
            {
                "statement": "sigma2 + (2 sigma0 - 3 sigma2)/2 = chi",
                "lhs": half(r.total_index), "rhs": r.chi, "holds": r.total_equals_chi,
            },
        ],
        "total_index": half(r.total_index),
        "chi": r.chi,
        "passed": r.passed,
    });
    Ok(Done::verdict(r.passed, results, Diagnostic::new("POINCARE_IDENTITY_FAILED", "an identity does not hold")))
}

fn lift(a: &LiftArgs) -> Result<Done, Failure> {
    if let Some(two_j) = a.two_j {
        let circle = Circle::new(a.center.unwrap_or([0.0, 0.0]), a.radius)?;
        let r = numeric_lift_check(two_j, &circle, &winding_opts(&a.numeric))?;
        let results = json!({
            "two_j": two_j,
            "j": half(r.j),
            "predicted": half(r.predicted),
            "upstairs": half(r.upstairs),
            "residual": r.residual,
            "agrees": r.agrees,
        });
        let msg = format!("numeric lift {} differs from 2j - 1 = {}", r.upstairs, r.predicted);
        return Ok(Done::verdict(r.agrees, results, Diagnostic::new("LIFT_DISAGREEMENT", msg)));
    }
    if let Some(j) = &a.j {
        let j: HalfIndex = j.parse()?;
        let i = index_lift_relation(j)?;
        return Ok(Done::pass(json!({ "j": half(j), "upstairs": half(i) })));
    }
    let i: HalfIndex = a.descend.as_deref().expect("clap requires one lift input").parse()?;
    let j = index_descend_relation(i)?;
    Ok(Done::pass(json!({ "upstairs": half(i), "j": half(j) })))
}

fn half_list(s: &str) -> Result<Vec<HalfIndex>, Failure> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(|t| Ok(t.parse()?)).collect()
}

fn reduction_json(r: &ReductionReport) -> Value {
    json!({
        "sum_orientable": half(r.sum_orientable),
        "sum_non_orientable": half(r.sum_non_orientable),
        "sum_j": half(r.sum_j),
        "upstairs": r.upstairs,
        "sum_upstairs": r.sum_upstairs,
        "deg_r": r.deg_r,
        "chi_cover": r.chi_cover,
        "chain": [
            { "statement": "sum j = (sum i + deg R)/2", "lhs": half(r.sum_j), "rhs": half(r.half_upstairs_plus_deg) },
            { "statement": "(sum i + deg R)/2 = (chi(cover) + deg R)/2", "lhs": half(r.half_upstairs_plus_deg), "rhs": half(r.half_chi_cover_plus_deg) },
            { "statement": "(chi(cover) + deg R)/2 = chi(F)", "lhs": half(r.half_chi_cover_plus_deg), "rhs": r.chi_f },
        ],
        "upstairs_formula_holds": r.upstairs_formula_holds,
        "holds": r.holds,
        "note": r.note,
    })
}

fn rh(a: &RhArgs) -> Result<Done, Failure> {
    if a.orientable.is_none() && a.non_orientable.is_none() {
        let deg = a.deg.ok_or_else(|| Failure::input("RH_MISSING_DEGREE", "--deg is required without a partition"))?;
        return Ok(Done::pass(json!({ "chi_f": a.chi, "deg_r": deg, "chi_cover": riemann_hurwitz(a.chi, deg) })));
    }
    let partition = SingularPartition {
        orientable: half_list(a.orientable.as_deref().unwrap_or(""))?,
        non_orientable: half_list(a.non_orientable.as_deref().unwrap_or(""))?,
        base_chi: a.chi,
    };
    if let Some(deg) = a.deg {
        if deg != partition.deg_r() {
            return Err(Failure::input(
                "RH_DEGREE_MISMATCH",
                format!("--deg {deg} but {} non-orientable singularities given", partition.deg_r()),
            ));
        }
    }
    let base = json!({
        "chi_f": a.chi,
        "deg_r": partition.deg_r(),
        "chi_cover": riemann_hurwitz(a.chi, partition.deg_r()),
        "orientable": halves(&partition.orientable),
        "non_orientable": halves(&partition.non_orientable),
    });
    let with = |r: &ReductionReport| {
        let mut v = base.clone();
        v["reduction"] = reduction_json(r);
        v
    };
    match reduction_sum_check(&partition) {
        Ok(r) => Ok(Done::pass(with(&r))),
        Err(LiftError::ChiMismatch { sum, chi, report }) => {
            let f = Failure::from(LiftError::ChiMismatch { sum, chi, report: report.clone() });
            Ok(Done { status: Status::Fail, results: with(&report), diagnostics: vec![f.diagnostic] })
        }
        Err(e) => Err(e.into()),
    }
}

fn verdict_json(v: &Verdict, spec: &BagpipeSpec) -> Value {
    json!({
        "chi_bag": spec.chi_bag,
        "pipes": spec.pipes,
        "caps": spec.cap_indices.as_deref().map(halves),
        "feasible": v.feasible,
        "chi_m": v.chi_m,
        "chi_f": v.chi_f,
        "required_cap_sum": half(v.required_cap_sum),
        "witness_caps": v.witness.as_deref().map(halves),
        "witness_centers": v.witness_centers.as_deref().map(halves),
        "chain": v.chain.iter().map(|e| json!({ "label": e.label, "statement": e.statement, "holds": e.holds })).collect::<Vec<_>>(),
        "note": v.note,
    })
}

fn feasible(a: &FeasibleArgs) -> Result<Done, Failure> {
    let spec =
        BagpipeSpec { chi_bag: a.chi_bag, pipes: a.pipes, cap_indices: a.caps.as_deref().map(half_list).transpose()? };
    let v = foliation_feasibility(&spec)?;
    let failed: Vec<&str> = v.chain.iter().filter(|e| !e.holds).map(|e| e.label).collect();
    let msg = format!("index ledger has no solution; failing steps: {}", failed.join(" "));
    Ok(Done::verdict(v.feasible, verdict_json(&v, &spec), Diagnostic::new("INFEASIBLE", msg)))
}

fn parse_steps(s: &str) -> Result<Vec<SurgeryStep>, Failure> {
    let bad = |t: &str| Failure::input("SURGERY_STEP_SYNTAX", format!("bad step `{t}`; expected A, B or A:<n>:<n>"));
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let parts: Vec<&str> = t.split(':').collect();
            let scenario = match parts[0] {
                "A" | "a" => Scenario::A,
                "B" | "b" => Scenario::B,
                _ => return Err(bad(t)),
            };
            let (ec, ecc) = match parts[1..] {
                [] => (0, 0),
                [x, y] => (x.parse().map_err(|_| bad(t))?, y.parse().map_err(|_| bad(t))?),
                _ => return Err(bad(t)),
            };
            Ok(SurgeryStep { scenario, extra_convex_lost: ec, extra_concave_lost: ecc })
        })
        .collect()
}

fn parse_pairs(s: &str) -> Result<Vec<(u64, u64)>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let bad = || Failure::input("SURGERY_PAIR_SYNTAX", format!("bad pair `{t}`; expected c:c'"));
            let (x, y) = t.split_once(':').ok_or_else(bad)?;
            Ok((x.parse().map_err(|_| bad())?, y.parse().map_err(|_| bad())?))
        })
        .collect()
}

fn trace_json(t: &SurgeryTrace) -> Value {
    json!({
        "pairs": t.pairs.iter().map(|&(c, cp)| json!({ "c": c, "c_prime": cp })).collect::<Vec<_>>(),
        "steps_applied": t.steps_applied,
        "steps_unused": t.steps_unused,
        "final_index": half(t.final_index),
        "bound": t.bound.map(half),
    })
}

fn surgery(a: &SurgeryArgs) -> Result<Done, Failure> {
    let steps = parse_steps(&a.steps)?;
    let trace = match &a.observed {
        Some(obs) => {
            let scenarios: Vec<Scenario> = steps.iter().map(|s| s.scenario).collect();
            verify_surgery_trace((a.c, a.cprime), &scenarios, &parse_pairs(obs)?)?
        }
        None => surgery_replay((a.c, a.cprime), &steps)?,
    };
    let mut results = trace_json(&trace);
    results["mode"] = json!(if a.observed.is_some() { "verify" } else { "replay" });
    Ok(Done::pass(results))
}

fn plot(a: &PlotArgs, inputs: &mut Inputs) -> Result<Done, Failure> {
    let field = inputs.field(&a.field)?;
    let overlay_circle = a.circle.map(|r| circle_for(&field, a.center, r)).transpose()?;
    let extent = match (a.extent, &overlay_circle) {
        (Some(e), _) => e,
        (None, Some(c)) => {
            1.5 * (c.radius + (c.center[0] - field.singular_point[0]).hypot(c.center[1] - field.singular_point[1]))
        }
        (None, None) => 1.5,
    };
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Failure::input("PLOT_BAD_EXTENT", format!("extent must be positive, got {extent}")));
    }
    let opts = PlotOptions { grid: a.grid as usize, view_center: field.singular_point, extent };
    let csv = a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));

    let mut diagnostics = Vec::new();
    let mut overlay = None;
    if let Some(circle) = &overlay_circle {
        match find_tangencies(&field, circle, &TangencyOptions::default()) {
            Ok(ts) => overlay = Some((circle, ts)),
            Err(e) => {
                // The portrait is still useful without the overlay.
                let f = Failure::from(e);
                diagnostics.push(
                    Diagnostic::new("PLOT_OVERLAY_SKIPPED", f.diagnostic.message)
                        .with_detail(json!({ "cause": f.diagnostic.code })),
                );
                overlay = Some((circle, Vec::new()));
            }
        }
    }
    let (text, stats) = if csv {
        render_csv(&field, opts)
    } else {
        render_svg(&field, opts, overlay.as_ref().map(|(c, ts)| (*c, ts.as_slice())))
    };
    fs::write(&a.out, &text)
        .map_err(|e| Failure::error("IO_WRITE", format!("cannot write {}: {e}", a.out.display())))?;

    let results = json!({
        "field": field_json(&a.field, &field),
        "out": a.out.display().to_string(),
        "format": if csv { "csv" } else { "svg" },
        "bytes": text.len(),
        "sha256": digest(&[], &[(String::new(), text.into_bytes())]),
        "grid": a.grid,
        "extent": extent,
        "ticks": stats.ticks,
        "streamlines": stats.streamlines,
        "circle": overlay_circle.as_ref().map(circle_json),
        "tangencies": overlay.as_ref().map(|(c, ts)| tangency_table(c, ts)),
    });
    Ok(Done { status: Status::Pass, results, diagnostics })
}

fn entry_json(e: &CatalogEntry) -> Value {
    json!({
        "name": e.name,
        "field": field_json(&e.name, &e.field),
        "expected_index": half(e.expected_index),
        "has_loops": e.has_loops,
        "orientable": e.orientable,
        "provenance": e.provenance,
    })
}

fn catalog(a: &CatalogArgs) -> Result<Done, Failure> {
    let entries = match &a.name {
        Some(n) => vec![catalog_get(n)?],
        None => catalog_all(),
    };
    let listing: Vec<Value> = entries.iter().map(entry_json).collect();
    if !a.loop_free_bound {
        return Ok(Done::pass(json!({ "entries": listing })));
    }
    let circle = Circle::centered(a.radius)?;
    let mut checks = Vec::new();
    let mut all_hold = true;
    for e in &entries {
        match loop_free_bound_check(e, &circle, &WindingOptions::default()) {
            Ok(v) => {
                all_hold &= v.holds;
                checks.push(json!({ "name": v.name, "index": half(v.index), "holds": v.holds }));
            }
            // Listing everything: entries with loops are outside the bound's scope.
            Err(TangencyError::PreconditionLoop(name)) if a.name.is_none() => {
                checks.push(json!({ "name": name, "skipped": "has loops" }));
            }
            Err(err) => return Err(err.into()),
        }
    }
    let results = json!({ "entries": listing, "loop_free_bound": checks });
    Ok(Done::verdict(
        all_hold,
        results,
        Diagnostic::new("LOOP_FREE_BOUND_VIOLATED", "a loop-free entry has index above 1"),
    ))
}
