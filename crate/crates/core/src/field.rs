//! Planar vector fields and line fields.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{self, CatalogError};
use crate::half::HalfIndex;
use crate::poly::{parse_polynomial, CompiledPoly, PolyError, PolyExpr};

pub type Point = [f64; 2];
pub type Jacobian = [[f64; 2]; 2];

/// Anything the index engines can sample around a circle.
///
/// For line fields `direction` returns one of the two unit representatives;
/// callers must not depend on which one.
pub trait DirectionField: Sync {
    fn is_line_field(&self) -> bool;

    /// Field vector (vector fields) or a direction representative (line fields).
    fn direction(&self, p: Point) -> Point;

    /// Jacobian of the representative returned by [`direction`](Self::direction).
    fn jacobian(&self, p: Point) -> Jacobian;

    /// Magnitude scale of the field on a disc of the given outer radius,
    /// used to set the default singularity tolerance.
    fn magnitude_scale(&self, outer_radius: f64) -> f64;
}

/// A circle, traversed counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("circle radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("polynomial {component}: {source}")]
    Poly {
        component: &'static str,
        #[source]
        source: PolyError,
    },
    #[error("malformed field file: {0}")]
    Json(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Result<Self, FieldError> {
        if radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite()) {
            Ok(Circle { center, radius })
        } else {
            Err(FieldError::BadRadius(radius))
        }
    }

    pub fn centered(radius: f64) -> Result<Self, FieldError> {
        Circle::new([0.0, 0.0], radius)
    }

    pub fn point_at(&self, phi: f64) -> Point {
        let (s, c) = phi.sin_cos();
        [self.center[0] + self.radius * c, self.center[1] + self.radius * s]
    }
}

/// Polynomial vector field `(P, Q)` with its exact Jacobian.
#[derive(Clone, Debug)]
pub struct PolyField {
    pub p: PolyExpr,
    pub q: PolyExpr,
    cp: CompiledPoly,
    cq: CompiledPoly,
    jac: [[CompiledPoly; 2]; 2],
}

impl PartialEq for PolyField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.q == other.q
    }
}

impl PolyField {
    pub fn new(p: PolyExpr, q: PolyExpr) -> Self {
        let jac = [[p.dx().compile(), p.dy().compile()], [q.dx().compile(), q.dy().compile()]];
        PolyField { cp: p.compile(), cq: q.compile(), jac, p, q }
    }

    pub fn parse(p: &str, q: &str) -> Result<Self, FieldError> {
        let p = parse_polynomial(p).map_err(|source| FieldError::Poly { component: "P", source })?;
        let q = parse_polynomial(q).map_err(|source| FieldError::Poly { component: "Q", source })?;
        Ok(PolyField::new(p, q))
    }

    /// Complex product: `(P + iQ)(P' + iQ')`.
    pub fn complex_mul(&self, other: &PolyField) -> PolyField {
        let re = self.p.mul(&other.p).sub(&self.q.mul(&other.q));
        let im = self.p.mul(&other.q).add(&self.q.mul(&other.p));
        PolyField::new(re, im)
    }

    pub fn eval(&self, p: Point) -> Point {
        [self.cp.eval(p[0], p[1]), self.cq.eval(p[0], p[1])]
    }

    /// Exact Jacobian `[[∂P/∂x, ∂P/∂y], [∂Q/∂x, ∂Q/∂y]]` evaluated in `f64`.
    pub fn jacobian(&self, p: Point) -> Jacobian {
        let e = |c: &CompiledPoly| c.eval(p[0], p[1]);
        [[e(&self.jac[0][0]), e(&self.jac[0][1])], [e(&self.jac[1][0]), e(&self.jac[1][1])]]
    }

    /// Σ|monomial| of P and Q at `p`, the roundoff scale of an evaluation.
    pub fn abs_scale(&self, p: Point) -> f64 {
        self.cp.abs_scale(p[0], p[1]).max(self.cq.abs_scale(p[0], p[1]))
    }

    pub fn degree(&self) -> u32 {
        self.p.degree().max(self.q.degree())
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.p.max_abs_coefficient().max(self.q.max_abs_coefficient())
    }
}

/// What a [`PlaneField`] is made of.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldKind {
    VectorPolynomial(PolyField),
    /// Line field with direction angle `(two_j / 2) · φ (mod π)` around the
    /// singular point; index `two_j / 2`.
    LineModel {
        two_j: i64,
    },
}

/// A planar field with a hint for where its singularity sits.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneField {
    pub kind: FieldKind,
    pub singular_point: Point,
}

impl PlaneField {
    pub fn vector(p: PolyExpr, q: PolyExpr) -> Self {
        PlaneField { kind: FieldKind::VectorPolynomial(PolyField::new(p, q)), singular_point: [0.0, 0.0] }
    }

    pub fn from_poly_field(f: PolyField) -> Self {
        PlaneField { kind: FieldKind::VectorPolynomial(f), singular_point: [0.0, 0.0] }
    }

    pub fn parse_vector(p: &str, q: &str) -> Result<Self, FieldError> {
        Ok(PlaneField::from_poly_field(PolyField::parse(p, q)?))
    }

    pub fn line_model(two_j: i64) -> Self {
        PlaneField { kind: FieldKind::LineModel { two_j }, singular_point: [0.0, 0.0] }
    }

    pub fn with_singular_point(mut self, p: Point) -> Self {
        self.singular_point = p;
        self
    }

    /// Line models with odd `two_j` have no continuous orientation.
    pub fn is_orientable(&self) -> bool {
        match self.kind {
            FieldKind::VectorPolynomial(_) => true,
            FieldKind::LineModel { two_j } => two_j % 2 == 0,
        }
    }

    /// The index a line model is built to have.
    pub fn model_index(&self) -> Option<HalfIndex> {
        match self.kind {
            FieldKind::LineModel { two_j } => Some(HalfIndex::from_doubled(two_j)),
            FieldKind::VectorPolynomial(_) => None,
        }
    }

    pub fn as_poly(&self) -> Option<&PolyField> {
        match &self.kind {
            FieldKind::VectorPolynomial(f) => Some(f),
            FieldKind::LineModel { .. } => None,
        }
    }

    fn line_angle(two_j: i64, rel: Point) -> f64 {
        0.5 * two_j as f64 * rel[1].atan2(rel[0])
    }
}

impl DirectionField for PlaneField {
    fn is_line_field(&self) -> bool {
        matches!(self.kind, FieldKind::LineModel { .. })
    }

    fn direction(&self, p: Point) -> Point {
        match &self.kind {
            FieldKind::VectorPolynomial(f) => f.eval(p),
            FieldKind::LineModel { two_j } => {
                let rel = [p[0] - self.singular_point[0], p[1] - self.singular_point[1]];
                if rel[0] == 0.0 && rel[1] == 0.0 {
                    return [0.0, 0.0];
                }
                let (s, c) = PlaneField::line_angle(*two_j, rel).sin_cos();
                [c, s]
            }
        }
    }

    fn jacobian(&self, p: Point) -> Jacobian {
        match &self.kind {
            FieldKind::VectorPolynomial(f) => f.jacobian(p),
            FieldKind::LineModel { two_j } => {
                // d = (cos θ, sin θ), J = d⊥ ⊗ ∇θ with ∇θ = k (−y, x) / r².
                let rel = [p[0] - self.singular_point[0], p[1] - self.singular_point[1]];
                let r2 = rel[0] * rel[0] + rel[1] * rel[1];
                if r2 == 0.0 {
                    return [[0.0; 2]; 2];
                }
                let k = 0.5 * *two_j as f64;
                let grad = [-k * rel[1] / r2, k * rel[0] / r2];
                let (s, c) = PlaneField::line_angle(*two_j, rel).sin_cos();
                let perp = [-s, c];
                [[perp[0] * grad[0], perp[0] * grad[1]], [perp[1] * grad[0], perp[1] * grad[1]]]
            }
        }
    }

    fn magnitude_scale(&self, outer_radius: f64) -> f64 {
        match &self.kind {
            FieldKind::VectorPolynomial(f) => {
                f.max_abs_coefficient() * outer_radius.max(1e-300).powi(f.degree() as i32)
            }
            FieldKind::LineModel { .. } => 0.0,
        }
    }
}

/// On-disk field description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldFile {
    VectorPolynomial {
        #[serde(rename = "P")]
        p: String,
        #[serde(rename = "Q")]
        q: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        singular_point: Option<Point>,
    },
    LineModel {
        two_j: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        singular_point: Option<Point>,
    },
    Builtin {
        name: String,
    },
}

impl FieldFile {
    pub fn from_json(text: &str) -> Result<Self, FieldError> {
        serde_json::from_str(text).map_err(|e| FieldError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("field file serializes")
    }

    /// Build the field; builtins resolve through the catalog.
    pub fn build(&self) -> Result<PlaneField, FieldError> {
        match self {
            FieldFile::VectorPolynomial { p, q, singular_point } => {
                Ok(PlaneField::parse_vector(p, q)?.with_singular_point(singular_point.unwrap_or([0.0, 0.0])))
            }
            FieldFile::LineModel { two_j, singular_point } => {
                Ok(PlaneField::line_model(*two_j).with_singular_point(singular_point.unwrap_or([0.0, 0.0])))
            }
            FieldFile::Builtin { name } => Ok(catalog::catalog_get(name)?.field),
        }
    }
}

/// Signed angle from `a` to `b` in (−π, π].
pub(crate) fn angle_between(a: Point, b: Point) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.atan2(dot)
}

/// Same as [`angle_between`] but for unoriented directions: result in (−π/2, π/2].
pub(crate) fn line_angle_between(a: Point, b: Point) -> f64 {
    let mut d = angle_between(a, b);
    if d > PI / 2.0 {
        d -= PI;
    } else if d <= -PI / 2.0 {
        d += PI;
    }
    d
}

pub(crate) fn norm(v: Point) -> f64 {
    v[0].hypot(v[1])
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn apply(j: &Jacobian, v: Point) -> Point {
    [j[0][0] * v[0] + j[0][1] * v[1], j[1][0] * v[0] + j[1][1] * v[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn field_file_shapes() {
        let f = FieldFile::from_json(r#"{"kind":"vector_polynomial","P":"x","Q":"-y"}"#).unwrap();
        let field = f.build().unwrap();
        assert_eq!(field.direction([2.0, 3.0]), [2.0, -3.0]);

        let f = FieldFile::from_json(r#"{"kind":"line_model","two_j":-1}"#).unwrap();
        assert!(f.build().unwrap().is_line_field());

        let f = FieldFile::from_json(r#"{"kind":"builtin","name":"saddle"}"#).unwrap();
        assert_eq!(f.build().unwrap().direction([1.0, 1.0]), [1.0, -1.0]);

        assert!(matches!(
            FieldFile::from_json(r#"{"kind":"builtin","name":"nope"}"#).unwrap().build(),
            Err(FieldError::Catalog(_))
        ));
        assert!(matches!(FieldFile::from_json(r#"{"kind":"weird"}"#), Err(FieldError::Json(_))));
        assert!(matches!(
            FieldFile::from_json(r#"{"kind":"vector_polynomial","P":"x^","Q":"y"}"#).unwrap().build(),
            Err(FieldError::Poly { component: "P", .. })
        ));
    }

    #[test]
    fn line_model_direction_is_sign_ambiguous_but_consistent() {
        let f = PlaneField::line_model(1);
        // Across the branch cut of atan2 the representative flips sign only.
        let a = f.direction([-1.0, 1e-12]);
        let b = f.direction([-1.0, -1e-12]);
        assert!((a[0] * b[1] - a[1] * b[0]).abs() < 1e-9);
    }

    #[test]
    fn circle_rejects_bad_radius() {
        assert!(Circle::centered(0.0).is_err());
        assert!(Circle::centered(-1.0).is_err());
        assert!(Circle::centered(f64::NAN).is_err());
    }

    fn central_difference(f: &PolyField, p: Point, h: f64) -> Jacobian {
        let fx1 = f.eval([p[0] + h, p[1]]);
        let fx0 = f.eval([p[0] - h, p[1]]);
        let fy1 = f.eval([p[0], p[1] + h]);
        let fy0 = f.eval([p[0], p[1] - h]);
        [
            [(fx1[0] - fx0[0]) / (2.0 * h), (fy1[0] - fy0[0]) / (2.0 * h)],
            [(fx1[1] - fx0[1]) / (2.0 * h), (fy1[1] - fy0[1]) / (2.0 * h)],
        ]
    }

    #[test]
    fn exact_jacobian_matches_finite_differences() {
        // Tolerance 10·ε·scale, scale being the roundoff floor of a central
        // difference: Σ|monomials| / h.
        let h = 1e-5;
        let fields = [
            PolyField::parse("x^2 - y^2", "2*x*y").unwrap(),
            PolyField::parse("x^3 - 3*x*y^2", "-(3*x^2*y - y^3)").unwrap(),
            PolyField::parse("x - y + 1/3*x^2*y", "x + y - 2*y^3").unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in &fields {
            for _ in 0..100 {
                let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let exact = f.jacobian(p);
                let fd = central_difference(f, p, h);
                let scale = (f.abs_scale(p) + 1.0) / h;
                for i in 0..2 {
                    for j in 0..2 {
                        let err = (exact[i][j] - fd[i][j]).abs();
                        assert!(err <= 10.0 * f64::EPSILON * scale, "{err} at {p:?}");
                    }
                }
            }
        }
    }
}
