//! JSON report and the mapping from library errors to diagnostic codes.

use pindex_core::catalog::CatalogError;
use pindex_core::half::HalfIndexParseError;
use pindex_core::lift::LiftError;
use pindex_core::obstruction::ObstructionError;
use pindex_core::surface::SurfaceError;
use pindex_core::tangency::TangencyError;
use pindex_core::{FieldError, HalfIndex, PolyError, WindingError};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "pindex-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
    InputError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail | Status::Error => 1,
            Status::InputError => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl Diagnostic {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { code, message: message.into(), detail: Value::Null }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    pub inputs_digest: String,
    pub status: Status,
    pub exit_code: i32,
    pub results: Value,
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// SHA-256 over the argument vector and the bytes of every input file, in
/// the order they were read.
pub fn digest(argv: &[String], files: &[(String, Vec<u8>)]) -> String {
    let mut h = Sha256::new();
    for a in argv {
        h.update(a.as_bytes());
        h.update([0]);
    }
    for (path, bytes) in files {
        h.update([1]);
        h.update(path.as_bytes());
        h.update([0]);
        h.update(bytes);
    }
    format!("sha256:{}", hex::encode(h.finalize()))
}

/// Half-integer as an exact `p/2` string, its doubled integer, and the
/// reduced form for reading.
pub fn half(h: HalfIndex) -> Value {
    json!({ "value": h.to_fraction_string(), "doubled": h.doubled(), "display": h.to_string() })
}

pub fn halves(hs: &[HalfIndex]) -> Value {
    Value::Array(hs.iter().map(|h| half(*h)).collect())
}

/// Failure of a subcommand before it produced a verdict.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub diagnostic: Diagnostic,
    pub results: Value,
}

impl Failure {
    pub fn input(code: &'static str, message: impl Into<String>) -> Self {
        Failure { status: Status::InputError, diagnostic: Diagnostic::new(code, message), results: Value::Null }
    }

    pub fn error(code: &'static str, message: impl Into<String>) -> Self {
        Failure { status: Status::Error, diagnostic: Diagnostic::new(code, message), results: Value::Null }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.diagnostic.detail = detail;
        self
    }
}

impl From<PolyError> for Failure {
    fn from(e: PolyError) -> Self {
        let (code, pos) = match &e {
            PolyError::Syntax { pos, .. } => ("POLY_SYNTAX", *pos),
            PolyError::Exponent { pos, .. } => ("POLY_EXPONENT", *pos),
        };
        Failure::input(code, e.to_string()).with_detail(json!({ "position": pos }))
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        Failure::input("CATALOG_UNKNOWN_NAME", e.to_string())
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::BadRadius(r) => {
                Failure::input("FIELD_BAD_RADIUS", format!("radius must be positive and finite, got {r}"))
            }
            FieldError::Poly { component, source } => {
                let mut f = Failure::from(source);
                f.diagnostic.message = format!("polynomial {component}: {}", f.diagnostic.message);
                f
            }
            FieldError::Json(msg) => Failure::input("FIELD_JSON", format!("malformed field file: {msg}")),
            FieldError::Catalog(c) => c.into(),
        }
    }
}

impl From<WindingError> for Failure {
    fn from(e: WindingError) -> Self {
        let msg = e.to_string();
        match e {
            WindingError::SingularOnCircuit { angle, magnitude, tol } => {
                Failure::error("WINDING_SINGULAR_ON_CIRCUIT", msg)
                    .with_detail(json!({ "angle": angle, "magnitude": magnitude, "tol": tol }))
            }
            WindingError::NonConvergent(_) => Failure::error("WINDING_NON_CONVERGENT", msg),
            WindingError::TooFewSamples(n) => {
                Failure::input("WINDING_TOO_FEW_SAMPLES", msg).with_detail(json!({ "samples": n }))
            }
        }
    }
}

impl From<TangencyError> for Failure {
    fn from(e: TangencyError) -> Self {
        let msg = e.to_string();
        match e {
            TangencyError::SingularOnCircuit { angle } => {
                Failure::error("TANGENCY_SINGULAR_ON_CIRCUIT", msg).with_detail(json!({ "angle": angle }))
            }
            TangencyError::DegenerateTangency { angle, second_order } => Failure::error("TANGENCY_DEGENERATE", msg)
                .with_detail(json!({
                    "angle": angle,
                    "second_order": second_order,
                    "hint": "retry with a slightly different --radius or --center",
                })),
            TangencyError::CircuitIsLeaf => Failure::error("TANGENCY_CIRCUIT_IS_LEAF", msg)
                .with_detail(json!({ "hint": "move the circle off the singular point with --center" })),
            TangencyError::Parity { c, c_prime } => {
                Failure::input("CIRCUIT_PARITY", msg).with_detail(json!({ "c": c, "c_prime": c_prime }))
            }
            TangencyError::InsufficientConcavities { step, needed, available } => {
                Failure::error("SURGERY_INSUFFICIENT_CONCAVITIES", msg)
                    .with_detail(json!({ "step": step, "needed": needed, "available": available }))
            }
            TangencyError::NegativeConvexities { step, available } => {
                Failure::error("SURGERY_NEGATIVE_CONVEXITIES", msg)
                    .with_detail(json!({ "step": step, "available": available }))
            }
            TangencyError::MonotonicityViolation { step, before, after } => {
                Failure::error("SURGERY_MONOTONICITY_VIOLATION", msg)
                    .with_detail(json!({ "step": step, "before": before, "after": after }))
            }
            TangencyError::ScenarioBound { step, scenario, c, c_prime } => {
                Failure::error("SURGERY_SCENARIO_BOUND", msg)
                    .with_detail(json!({ "step": step, "scenario": scenario, "c": c, "c_prime": c_prime }))
            }
            TangencyError::TraceLength { steps, observed } => {
                Failure::input("SURGERY_TRACE_LENGTH", msg).with_detail(json!({ "steps": steps, "observed": observed }))
            }
            TangencyError::PreconditionLoop(name) => {
                Failure::error("LOOP_FREE_PRECONDITION", msg).with_detail(json!({ "name": name }))
            }
            TangencyError::Winding(w) => w.into(),
        }
    }
}

impl From<SurfaceError> for Failure {
    fn from(e: SurfaceError) -> Self {
        let msg = e.to_string();
        match e {
            SurfaceError::VertexOutOfRange { face, vertex, count } => Failure::error("MESH_VERTEX_OUT_OF_RANGE", msg)
                .with_detail(json!({ "face": face, "vertex": vertex, "count": count })),
            SurfaceError::DegenerateFace { face, vertices } => {
                Failure::error("MESH_DEGENERATE_FACE", msg).with_detail(json!({ "face": face, "vertices": vertices }))
            }
            SurfaceError::NotClosed { edge } => {
                Failure::error("MESH_NOT_CLOSED", msg).with_detail(json!({ "edge": edge }))
            }
            SurfaceError::NotManifold { at, reason } => {
                Failure::error("MESH_NOT_MANIFOLD", msg).with_detail(json!({ "at": at, "reason": reason }))
            }
            SurfaceError::Range(_) => Failure::input("FIXTURE_RANGE", msg),
            SurfaceError::Parse { line, .. } => Failure::input("MESH_PARSE", msg).with_detail(json!({ "line": line })),
        }
    }
}

impl From<LiftError> for Failure {
    fn from(e: LiftError) -> Self {
        let msg = e.to_string();
        match e {
            LiftError::OrientableInput(j) => {
                Failure::input("LIFT_ORIENTABLE_INPUT", msg).with_detail(json!({ "j": half(j) }))
            }
            LiftError::EvenInput(k) => Failure::input("LIFT_EVEN_INPUT", msg).with_detail(json!({ "two_j": k })),
            LiftError::NonIntegralLift(i) => {
                Failure::error("LIFT_NON_INTEGRAL", msg).with_detail(json!({ "index": half(i) }))
            }
            LiftError::OffCenter => Failure::input("LIFT_OFF_CENTER", msg),
            LiftError::Parity { list, value } => {
                Failure::input("PARTITION_PARITY", msg).with_detail(json!({ "list": list, "value": half(value) }))
            }
            LiftError::ChiMismatch { sum, chi, .. } => {
                Failure::error("REDUCTION_CHI_MISMATCH", msg).with_detail(json!({ "sum": half(sum), "chi": chi }))
            }
            LiftError::Winding(w) => w.into(),
        }
    }
}

impl From<ObstructionError> for Failure {
    fn from(e: ObstructionError) -> Self {
        let msg = e.to_string();
        match e {
            ObstructionError::CapBoundViolation { position, value } => Failure::error("OBSTRUCTION_CAP_BOUND", msg)
                .with_detail(json!({ "position": position, "value": half(value) })),
            ObstructionError::LengthMismatch { given, pipes } => Failure::input("OBSTRUCTION_LENGTH_MISMATCH", msg)
                .with_detail(json!({ "given": given, "pipes": pipes })),
        }
    }
}

impl From<HalfIndexParseError> for Failure {
    fn from(e: HalfIndexParseError) -> Self {
        Failure::input("HALF_INDEX_PARSE", e.to_string())
    }
}
