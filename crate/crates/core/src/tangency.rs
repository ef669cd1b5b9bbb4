//! Tangency census on a circle and the index formulas built on it.
//!
//! A tangency is a zero of the radial component ρ(φ) = f·n of the field on
//! the circle. It is internal when the leaf through it stays inside the
//! circle, which is read off the sign of
//!
//! ```text
//! h'' = 2 (f·f + p·(J f))
//! ```
//!
//! the second derivative of `|p|² − r²` along the leaf (`p` relative to the
//! center). `f` enters twice, so the sign does not depend on which
//! representative of a line field is used.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::CatalogEntry;
use crate::exec::Exec;
use crate::field::{apply, dot, norm, Circle, DirectionField, Point};
use crate::half::HalfIndex;
use crate::winding::{default_singular_tol, winding_index, WindingError, WindingOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TangencyError {
    #[error("field vanishes on the circuit near angle {angle}")]
    SingularOnCircuit { angle: f64 },
    #[error("degenerate tangency at angle {angle} (h'' = {second_order:e}); perturb the radius")]
    DegenerateTangency { angle: f64, second_order: f64 },
    #[error("the circuit is itself a leaf (radial component vanishes everywhere)")]
    CircuitIsLeaf,
    #[error("c - c' = {c} - {c_prime} is odd")]
    Parity { c: u64, c_prime: u64 },
    #[error("step {step}: {needed} concavities required, {available} available")]
    InsufficientConcavities { step: usize, needed: u64, available: u64 },
    #[error("step {step}: extra convex losses exceed the {available} convexities available")]
    NegativeConvexities { step: usize, available: u64 },
    #[error("step {step}: concavities went from {before} to {after}, not a strict decrease")]
    MonotonicityViolation { step: usize, before: u64, after: u64 },
    #[error("step {step}: ({c}, {c_prime}) violates scenario {scenario:?} bounds")]
    ScenarioBound { step: usize, scenario: Scenario, c: u64, c_prime: u64 },
    #[error("trace has {observed} observed pairs for {steps} steps")]
    TraceLength { steps: usize, observed: usize },
    #[error("`{0}` has loops at the singularity; the bound j <= 1 does not apply")]
    PreconditionLoop(String),
    #[error(transparent)]
    Winding(#[from] WindingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TangencyKind {
    Internal,
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tangency {
    /// Polar angle on the circle, in [0, 2π).
    pub angle: f64,
    pub kind: TangencyKind,
    pub second_order: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangencyOptions {
    pub samples: usize,
    pub root_tol: f64,
    /// Relative threshold on |h''| against `2(|f|² + r·‖J‖·|f|)`.
    pub degen_tol: f64,
    pub singular_tol: Option<f64>,
    pub exec: Exec,
}

impl Default for TangencyOptions {
    fn default() -> Self {
        TangencyOptions { samples: 2048, root_tol: 1e-13, degen_tol: 1e-6, singular_tol: None, exec: Exec::default() }
    }
}

/// ρ below this fraction of |f| counts as zero for the leaf test.
const LEAF_TOL: f64 = 1e-10;

struct Radial<'a, F: ?Sized> {
    field: &'a F,
    circle: Circle,
    tol: f64,
}

impl<F: DirectionField + ?Sized> Radial<'_, F> {
    fn direction(&self, phi: f64) -> Result<Point, TangencyError> {
        let d = self.field.direction(self.circle.point_at(phi));
        if !(norm(d) > self.tol) {
            return Err(TangencyError::SingularOnCircuit { angle: phi });
        }
        Ok(d)
    }

    /// Representative aligned with `reference` (line fields only flip).
    fn align(&self, d: Point, reference: Point) -> Point {
        if self.field.is_line_field() && dot(d, reference) < 0.0 {
            [-d[0], -d[1]]
        } else {
            d
        }
    }

    fn aligned(&self, phi: f64, reference: Point) -> Result<Point, TangencyError> {
        Ok(self.align(self.direction(phi)?, reference))
    }

    fn rho(&self, phi: f64, d: Point) -> f64 {
        dot(d, [phi.cos(), phi.sin()])
    }
}

/// Locate and classify the tangencies of `field` with `circle`.
pub fn find_tangencies<F>(field: &F, circle: &Circle, opts: &TangencyOptions) -> Result<Vec<Tangency>, TangencyError>
where
    F: DirectionField + ?Sized,
{
    let n = opts.samples.max(8);
    let radial = Radial {
        field,
        circle: *circle,
        tol: opts.singular_tol.unwrap_or_else(|| default_singular_tol(field, circle)),
    };
    let angle = |k: usize| 2.0 * PI * k as f64 / n as f64;

    let dirs: Vec<Point> =
        opts.exec.map_range(0..n, |k| radial.direction(angle(k))).into_iter().collect::<Result<_, _>>()?;
    let rhos: Vec<f64> = (0..n).map(|k| radial.rho(angle(k), dirs[k])).collect();

    if (0..n).all(|k| rhos[k].abs() <= LEAF_TOL * norm(dirs[k])) {
        return Err(TangencyError::CircuitIsLeaf);
    }

    let found = opts.exec.map_range(0..n, |k| -> Result<Option<Tangency>, TangencyError> {
        let (a, b) = (angle(k), angle(k + 1));
        let da = dirs[k];
        let db = radial.aligned(b, da)?;
        let (ra, rb) = (radial.rho(a, da), radial.rho(b, db));
        let root = if ra == 0.0 {
            a
        } else if rb != 0.0 && (ra < 0.0) != (rb < 0.0) {
            bisect(&radial, a, b, da, ra, opts.root_tol)?
        } else {
            // A touching zero of ρ without a sign change is a double root,
            // i.e. h'' = 0 there.
            let pk = (k + n - 1) % n;
            let prev = radial.rho(angle(pk), radial.align(dirs[pk], da));
            let next = rb;
            let scale = norm(da);
            if ra.abs() < 1e-9 * scale
                && ra.abs() <= prev.abs()
                && ra.abs() <= next.abs()
                && (prev < 0.0) == (next < 0.0)
            {
                return Err(TangencyError::DegenerateTangency { angle: a, second_order: 0.0 });
            }
            return Ok(None);
        };
        classify(&radial, root, opts.degen_tol).map(Some)
    });

    let mut out = Vec::new();
    for t in found {
        if let Some(t) = t? {
            out.push(t);
        }
    }
    out.sort_by(|l, r| l.angle.total_cmp(&r.angle));
    Ok(out)
}

fn bisect<F: DirectionField + ?Sized>(
    radial: &Radial<'_, F>,
    mut a: f64,
    mut b: f64,
    reference: Point,
    mut ra: f64,
    tol: f64,
) -> Result<f64, TangencyError> {
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let dm = radial.aligned(m, reference)?;
        let rm = radial.rho(m, dm);
        if rm == 0.0 {
            return Ok(m);
        }
        if (rm < 0.0) == (ra < 0.0) {
            a = m;
            ra = rm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn classify<F: DirectionField + ?Sized>(
    radial: &Radial<'_, F>,
    phi: f64,
    degen_tol: f64,
) -> Result<Tangency, TangencyError> {
    let p = radial.circle.point_at(phi);
    // h'' needs the representative the Jacobian belongs to, not an aligned one.
    let d = radial.direction(phi)?;
    let j = radial.field.jacobian(p);
    let rel = [p[0] - radial.circle.center[0], p[1] - radial.circle.center[1]];
    let h2 = 2.0 * (dot(d, d) + dot(rel, apply(&j, d)));
    let jnorm = j.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let scale = 2.0 * (dot(d, d) + radial.circle.radius * jnorm * norm(d));
    if !(h2.abs() >= degen_tol * scale) {
        return Err(TangencyError::DegenerateTangency { angle: phi, second_order: h2 });
    }
    let angle = phi.rem_euclid(2.0 * PI);
    Ok(Tangency {
        angle,
        kind: if h2 < 0.0 { TangencyKind::Internal } else { TangencyKind::External },
        second_order: h2,
    })
}

/// `1 + (I − E)/2`.
pub fn bendixson_index(internal: u64, external: u64) -> HalfIndex {
    HalfIndex::from_doubled(2 + internal as i64 - external as i64)
}

/// `1 − (c − c')/4`, defined when `c − c'` is even.
pub fn hamburger_index(c: u64, c_prime: u64) -> Result<HalfIndex, TangencyError> {
    let diff = c as i64 - c_prime as i64;
    if diff % 2 != 0 {
        return Err(TangencyError::Parity { c, c_prime });
    }
    Ok(HalfIndex::from_doubled(2 - diff / 2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VertexTag {
    Convex,
    Concave,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ArcKind {
    LeafArc,
    CrossArc,
}

/// Polygonal circuit of leaf-arcs and cross-arcs. `arcs[k]` joins
/// `vertices[k]` to `vertices[k + 1]` cyclically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TaggedCircuit {
    pub vertices: Vec<VertexTag>,
    pub arcs: Vec<ArcKind>,
}

impl TaggedCircuit {
    pub fn convex(&self) -> u64 {
        self.vertices.iter().filter(|v| **v == VertexTag::Convex).count() as u64
    }

    pub fn concave(&self) -> u64 {
        self.vertices.iter().filter(|v| **v == VertexTag::Concave).count() as u64
    }

    pub fn index(&self) -> Result<HalfIndex, TangencyError> {
        hamburger_index(self.convex(), self.concave())
    }
}

/// Horseshoe construction: each tangency is replaced by a leaf-arc between
/// two corners, pushed inward for external and outward for internal
/// tangencies. External tangencies give two convex corners, internal ones
/// two concave corners; the circle pieces in between are cross-arcs.
pub fn circuit_from_tangencies(tangencies: &[Tangency]) -> TaggedCircuit {
    let mut circuit = TaggedCircuit::default();
    for t in tangencies {
        let tag = match t.kind {
            TangencyKind::Internal => VertexTag::Concave,
            TangencyKind::External => VertexTag::Convex,
        };
        circuit.vertices.extend([tag, tag]);
        circuit.arcs.extend([ArcKind::LeafArc, ArcKind::CrossArc]);
    }
    circuit
}

/// Everything the tangency machinery says about one circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Census {
    pub tangencies: Vec<Tangency>,
    pub internal: u64,
    pub external: u64,
    pub bendixson: HalfIndex,
    pub convex: u64,
    pub concave: u64,
    pub hamburger: HalfIndex,
}

pub fn census<F>(field: &F, circle: &Circle, opts: &TangencyOptions) -> Result<Census, TangencyError>
where
    F: DirectionField + ?Sized,
{
    let tangencies = find_tangencies(field, circle, opts)?;
    let internal = tangencies.iter().filter(|t| t.kind == TangencyKind::Internal).count() as u64;
    let external = tangencies.len() as u64 - internal;
    let circuit = circuit_from_tangencies(&tangencies);
    Ok(Census {
        bendixson: bendixson_index(internal, external),
        convex: circuit.convex(),
        concave: circuit.concave(),
        hamburger: circuit.index()?,
        tangencies,
        internal,
        external,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Scenario {
    /// Two concavities traded for one convexity and one concavity.
    A,
    /// Two concavities traded for two convexities.
    B,
}

impl Scenario {
    /// `(convex gained, net concave lost)` before extra losses.
    pub const fn trade(self) -> (u64, u64) {
        match self {
            Scenario::A => (1, 1),
            Scenario::B => (2, 2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SurgeryStep {
    pub scenario: Scenario,
    pub extra_convex_lost: u64,
    pub extra_concave_lost: u64,
}

impl SurgeryStep {
    pub const fn plain(scenario: Scenario) -> Self {
        SurgeryStep { scenario, extra_convex_lost: 0, extra_concave_lost: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurgeryTrace {
    /// `(c, c')` before the first step and after each applied step.
    pub pairs: Vec<(u64, u64)>,
    pub steps_applied: usize,
    /// Steps left over once `c'` reached zero.
    pub steps_unused: usize,
    /// Index of the last circuit in the trace.
    pub final_index: HalfIndex,
    /// `1 − c/4`, present once `c' = 0`.
    pub bound: Option<HalfIndex>,
}

fn check_pair(c: u64, c_prime: u64) -> Result<(), TangencyError> {
    if (c as i64 - c_prime as i64) % 2 != 0 {
        return Err(TangencyError::Parity { c, c_prime });
    }
    Ok(())
}

/// Replay concavity-reducing surgeries on the `(c, c')` ledger.
pub fn surgery_replay(start: (u64, u64), steps: &[SurgeryStep]) -> Result<SurgeryTrace, TangencyError> {
    let (mut c, mut cp) = start;
    check_pair(c, cp)?;
    let mut pairs = vec![(c, cp)];
    let mut applied = 0;
    for (i, step) in steps.iter().enumerate() {
        if cp == 0 {
            break;
        }
        let (gain, drop) = step.scenario.trade();
        let needed = drop + step.extra_concave_lost;
        if cp < needed {
            return Err(TangencyError::InsufficientConcavities { step: i, needed, available: cp });
        }
        if c + gain < step.extra_convex_lost {
            return Err(TangencyError::NegativeConvexities { step: i, available: c + gain });
        }
        let (nc, ncp) = (c + gain - step.extra_convex_lost, cp - needed);
        if ncp >= cp {
            return Err(TangencyError::MonotonicityViolation { step: i, before: cp, after: ncp });
        }
        check_pair(nc, ncp)?;
        (c, cp) = (nc, ncp);
        pairs.push((c, cp));
        applied += 1;
    }
    Ok(SurgeryTrace {
        pairs,
        steps_applied: applied,
        steps_unused: steps.len() - applied,
        final_index: hamburger_index(c, cp)?,
        bound: if cp == 0 { Some(hamburger_index(c, 0)?) } else { None },
    })
}

/// Check an externally observed surgery trace: each transition must
/// strictly lower `c'` and respect its scenario's bounds `c₁ ≤ c + gain`,
/// `c'₁ ≤ c' − drop`.
pub fn verify_surgery_trace(
    start: (u64, u64),
    scenarios: &[Scenario],
    observed: &[(u64, u64)],
) -> Result<SurgeryTrace, TangencyError> {
    if scenarios.len() != observed.len() {
        return Err(TangencyError::TraceLength { steps: scenarios.len(), observed: observed.len() });
    }
    check_pair(start.0, start.1)?;
    let (mut c, mut cp) = start;
    let mut pairs = vec![start];
    for (i, (scenario, &(nc, ncp))) in scenarios.iter().zip(observed).enumerate() {
        if ncp >= cp {
            return Err(TangencyError::MonotonicityViolation { step: i, before: cp, after: ncp });
        }
        let (gain, drop) = scenario.trade();
        if nc > c + gain || ncp + drop > cp {
            return Err(TangencyError::ScenarioBound { step: i, scenario: *scenario, c: nc, c_prime: ncp });
        }
        check_pair(nc, ncp)?;
        (c, cp) = (nc, ncp);
        pairs.push((c, cp));
    }
    Ok(SurgeryTrace {
        steps_applied: pairs.len() - 1,
        steps_unused: 0,
        final_index: hamburger_index(c, cp)?,
        bound: if cp == 0 { Some(hamburger_index(c, 0)?) } else { None },
        pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopFreeVerdict {
    pub name: String,
    pub index: HalfIndex,
    pub holds: bool,
}

/// For a loop-free singularity, the winding index is at most 1.
pub fn loop_free_bound_check(
    entry: &CatalogEntry,
    circle: &Circle,
    opts: &WindingOptions,
) -> Result<LoopFreeVerdict, TangencyError> {
    if entry.has_loops {
        return Err(TangencyError::PreconditionLoop(entry.name.clone()));
    }
    let w = winding_index(&entry.field, circle, opts)?;
    Ok(LoopFreeVerdict { name: entry.name.clone(), index: w.index, holds: w.index <= HalfIndex::ONE })
}
