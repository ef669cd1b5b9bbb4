//! Standard isolated singularities with known indices.
//!
//! | name            | field                     | index | loops |
//! |-----------------|---------------------------|-------|-------|
//! | `node`          | (x, y)                    | 1     | no    |
//! | `saddle`        | (x, −y)                   | −1    | no    |
//! | `rotation`      | (−y, x)                   | 1     | no    |
//! | `center`        | (−y, x)                   | 1     | no    |
//! | `focus`         | (x − y, x + y)            | 1     | no    |
//! | `dipole`        | (x² − y², 2xy) = z²       | 2     | yes   |
//! | `monkey-saddle` | (x² − y², −2xy) = z̄²      | −2    | no    |
//! | `lemon`         | line model, θ = φ/2       | 1/2   | no    |
//! | `tripod`        | line model, θ = −φ/2      | −1/2  | no    |
//! | `star`          | line model, θ = 3φ/2      | 3/2   | yes   |
//! | `z^k`           | zᵏ (k ≥ 0) or z̄^|k|       | k     | k ≥ 2 |
//!
//! The vector indices are winding numbers of the complex (anti)monomials;
//! line-model indices hold by construction. Entries whose index exceeds 1
//! necessarily have loops, so `dipole` and `star` are flagged.

use num::{BigRational, One};
use thiserror::Error;

use crate::field::{PlaneField, PolyField};
use crate::half::HalfIndex;
use crate::poly::PolyExpr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub field: PlaneField,
    pub expected_index: HalfIndex,
    /// Whether some leaf has both ends converging to the singularity.
    pub has_loops: bool,
    pub orientable: bool,
    /// Where the expected index comes from.
    pub provenance: &'static str,
}

pub const NAMES: &[&str] =
    &["node", "saddle", "rotation", "center", "focus", "dipole", "monkey-saddle", "lemon", "tripod", "star"];

/// `zᵏ` for `k ≥ 0`, `z̄^|k|` for `k < 0`, written as `(Re, Im)`. Index `k`.
pub fn complex_monomial(k: i32) -> PolyField {
    let z = PolyField::new(PolyExpr::x(), PolyExpr::y());
    let base = if k < 0 { PolyField::new(PolyExpr::x(), PolyExpr::y().neg()) } else { z };
    let mut acc = PolyField::new(PolyExpr::constant(BigRational::one()), PolyExpr::zero());
    for _ in 0..k.unsigned_abs() {
        acc = acc.complex_mul(&base);
    }
    acc
}

fn vector(name: &str, p: &str, q: &str, index: i64, has_loops: bool, provenance: &'static str) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        field: PlaneField::parse_vector(p, q).expect("catalog polynomials parse"),
        expected_index: HalfIndex::from_int(index),
        has_loops,
        orientable: true,
        provenance,
    }
}

fn line(name: &str, two_j: i64, has_loops: bool) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        field: PlaneField::line_model(two_j),
        expected_index: HalfIndex::from_doubled(two_j),
        has_loops,
        orientable: two_j % 2 == 0,
        provenance: "line-model construction",
    }
}

/// Look up a catalog entry by name. Also accepts `z^k` for integer `k` in
/// `[-8, 8]`.
pub fn catalog_get(name: &str) -> Result<CatalogEntry, CatalogError> {
    let entry = match name {
        "node" => vector(name, "x", "y", 1, false, "winding of z"),
        "saddle" => vector(name, "x", "-y", -1, false, "winding of conj(z); tangency census I=0, E=4"),
        "rotation" | "center" => vector(name, "-y", "x", 1, false, "winding of i·z (rotational symmetry)"),
        "focus" => vector(name, "x - y", "x + y", 1, false, "winding of (1+i)·z"),
        "dipole" => vector(name, "x^2 - y^2", "2*x*y", 2, true, "winding of z^2; tangency census I=2, E=0"),
        "monkey-saddle" => {
            vector(name, "x^2 - y^2", "-2*x*y", -2, false, "winding of conj(z)^2; tangency census I=0, E=6")
        }
        "lemon" => line(name, 1, false),
        "tripod" => line(name, -1, false),
        "star" => line(name, 3, true),
        other => return monomial_entry(other).ok_or_else(|| CatalogError::UnknownName(other.to_string())),
    };
    Ok(entry)
}

fn monomial_entry(name: &str) -> Option<CatalogEntry> {
    let k: i32 = name.strip_prefix("z^")?.parse().ok()?;
    if !(-8..=8).contains(&k) {
        return None;
    }
    Some(CatalogEntry {
        name: name.to_string(),
        field: PlaneField::from_poly_field(complex_monomial(k)),
        expected_index: HalfIndex::from_int(k as i64),
        has_loops: k >= 2,
        orientable: true,
        provenance: "winding of complex monomial",
    })
}

/// All named entries (without the `z^k` family).
pub fn catalog_all() -> Vec<CatalogEntry> {
    NAMES.iter().map(|n| catalog_get(n).expect("listed names resolve")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldKind;
    use crate::poly::parse_polynomial;

    #[test]
    fn examples() {
        let s = catalog_get("saddle").unwrap();
        assert_eq!(s.expected_index, HalfIndex::from_int(-1));
        assert!(!s.has_loops);
        let pf = s.field.as_poly().unwrap();
        assert_eq!(pf.p, parse_polynomial("x").unwrap());
        assert_eq!(pf.q, parse_polynomial("-y").unwrap());

        let r = catalog_get("rotation").unwrap();
        assert_eq!(r.expected_index, HalfIndex::ONE);

        let t = catalog_get("tripod").unwrap();
        assert_eq!(t.field.kind, FieldKind::LineModel { two_j: -1 });
        assert_eq!(t.expected_index.doubled(), -1);
        assert!(!t.orientable);

        assert_eq!(catalog_get("nope"), Err(CatalogError::UnknownName("nope".into())));
        assert!(catalog_get("z^9").is_err());
    }

    #[test]
    fn monomials_match_named_entries() {
        assert_eq!(complex_monomial(2), *catalog_get("dipole").unwrap().field.as_poly().unwrap());
        assert_eq!(complex_monomial(-2), *catalog_get("monkey-saddle").unwrap().field.as_poly().unwrap());
        assert_eq!(complex_monomial(-1), *catalog_get("saddle").unwrap().field.as_poly().unwrap());
        assert_eq!(catalog_get("z^3").unwrap().expected_index, HalfIndex::from_int(3));
    }
}
