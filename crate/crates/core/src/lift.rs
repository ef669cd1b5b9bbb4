//! Orientation double cover of a non-orientable singularity.
//!
//! Near a singularity of odd doubled index the cover is modelled on
//! `w ↦ w² = z`. A direction `θ` downstairs pulls back to
//! `Θ(w) = θ(w²) − arg w` upstairs: the `− arg w` is the rotation by the
//! argument of the derivative `2w`, inverted. The lifted field then turns
//! `2j − 1` times, i.e. `j = (i + 1)/2`.

use serde::Serialize;
use thiserror::Error;

use crate::field::{Circle, DirectionField, Jacobian, PlaneField, Point};
use crate::half::HalfIndex;
use crate::winding::{winding_index, WindingError, WindingOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiftError {
    #[error("index {0} is integral: the singularity is orientable and does not ramify")]
    OrientableInput(HalfIndex),
    #[error("two_j = {0} is even; the line model is orientable")]
    EvenInput(i64),
    #[error("lifted index {0} is not an integer")]
    NonIntegralLift(HalfIndex),
    #[error("lift check circle must be centered at the singularity")]
    OffCenter,
    #[error("{list} entry {value} has the wrong parity")]
    Parity { list: &'static str, value: HalfIndex },
    #[error("index sum {sum} differs from chi(F) = {chi}")]
    ChiMismatch { sum: HalfIndex, chi: i64, report: Box<ReductionReport> },
    #[error(transparent)]
    Winding(#[from] WindingError),
}

/// `i = 2j − 1` for a non-orientable singularity of index `j`.
pub fn index_lift_relation(j: HalfIndex) -> Result<HalfIndex, LiftError> {
    if j.is_integral() {
        return Err(LiftError::OrientableInput(j));
    }
    Ok(HalfIndex::from_int(j.doubled() - 1))
}

/// Inverse of [`index_lift_relation`]: `j = (i + 1)/2`.
pub fn index_descend_relation(i: HalfIndex) -> Result<HalfIndex, LiftError> {
    let i = i.as_int().ok_or(LiftError::NonIntegralLift(i))?;
    Ok(HalfIndex::from_doubled(i + 1))
}

/// Pullback of a line field through `w ↦ w²`, twisted by `−arg w`.
pub struct LiftedField<'a> {
    pub base: &'a PlaneField,
}

impl DirectionField for LiftedField<'_> {
    fn is_line_field(&self) -> bool {
        true
    }

    fn direction(&self, w: Point) -> Point {
        let r2 = w[0] * w[0] + w[1] * w[1];
        if r2 == 0.0 {
            return [0.0, 0.0];
        }
        let z = [w[0] * w[0] - w[1] * w[1], 2.0 * w[0] * w[1]];
        let sp = self.base.singular_point;
        let d = self.base.direction([z[0] + sp[0], z[1] + sp[1]]);
        // Rotate by −arg w.
        let r = r2.sqrt();
        let (c, s) = (w[0] / r, -w[1] / r);
        [c * d[0] - s * d[1], s * d[0] + c * d[1]]
    }

    /// `J = R(−α)·(J_d·J_z − (R d) ⊗ ∇α)` with `z = w²`, `α = arg w` and
    /// `R` the quarter turn.
    fn jacobian(&self, w: Point) -> Jacobian {
        let r2 = w[0] * w[0] + w[1] * w[1];
        if r2 == 0.0 {
            return [[0.0; 2]; 2];
        }
        let sp = self.base.singular_point;
        let z = [w[0] * w[0] - w[1] * w[1] + sp[0], 2.0 * w[0] * w[1] + sp[1]];
        let d = self.base.direction(z);
        let jd = self.base.jacobian(z);
        let jz = [[2.0 * w[0], -2.0 * w[1]], [2.0 * w[1], 2.0 * w[0]]];
        let grad_alpha = [-w[1] / r2, w[0] / r2];
        let rd = [-d[1], d[0]];
        let mut inner = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                inner[i][j] = jd[i][0] * jz[0][j] + jd[i][1] * jz[1][j] - rd[i] * grad_alpha[j];
            }
        }
        let r = r2.sqrt();
        let (c, s) = (w[0] / r, -w[1] / r);
        [
            [c * inner[0][0] - s * inner[1][0], c * inner[0][1] - s * inner[1][1]],
            [s * inner[0][0] + c * inner[1][0], s * inner[0][1] + c * inner[1][1]],
        ]
    }

    fn magnitude_scale(&self, _outer_radius: f64) -> f64 {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftCheckReport {
    pub two_j: i64,
    pub j: HalfIndex,
    /// Index of the lifted field, computed by winding upstairs.
    pub upstairs: HalfIndex,
    /// `2j − 1`.
    pub predicted: HalfIndex,
    pub residual: f64,
    pub agrees: bool,
}

/// Wind the lifted line model around the covering circle and compare with
/// `2j − 1`. The circle radius is taken downstairs; upstairs uses its square
/// root.
pub fn numeric_lift_check(two_j: i64, circle: &Circle, opts: &WindingOptions) -> Result<LiftCheckReport, LiftError> {
    if two_j % 2 == 0 {
        return Err(LiftError::EvenInput(two_j));
    }
    if circle.center != [0.0, 0.0] {
        return Err(LiftError::OffCenter);
    }
    let base = PlaneField::line_model(two_j);
    let up = Circle { center: [0.0, 0.0], radius: circle.radius.sqrt() };
    let w = winding_index(&LiftedField { base: &base }, &up, opts)?;
    if !w.index.is_integral() {
        return Err(LiftError::NonIntegralLift(w.index));
    }
    let j = HalfIndex::from_doubled(two_j);
    let predicted = index_lift_relation(j)?;
    Ok(LiftCheckReport { two_j, j, upstairs: w.index, predicted, residual: w.residual, agrees: w.index == predicted })
}

/// `χ(Σ*) = 2χ(F) − deg R`.
pub fn riemann_hurwitz(chi_f: i64, deg_r: u64) -> i64 {
    2 * chi_f - deg_r as i64
}

/// Singularities of a line field on a closed surface, split by orientability.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SingularPartition {
    pub orientable: Vec<HalfIndex>,
    pub non_orientable: Vec<HalfIndex>,
    pub base_chi: i64,
}

impl SingularPartition {
    pub fn deg_r(&self) -> u64 {
        self.non_orientable.len() as u64
    }

    pub fn index_sum(&self) -> HalfIndex {
        self.orientable.iter().chain(&self.non_orientable).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub sum_orientable: HalfIndex,
    pub sum_non_orientable: HalfIndex,
    pub sum_j: HalfIndex,
    /// Upstairs indices: each orientable `j` twice (its two unramified
    /// preimages are taken to carry index `j`), then `2j − 1` per
    /// non-orientable point.
    pub upstairs: Vec<i64>,
    pub sum_upstairs: i64,
    pub deg_r: u64,
    /// From Riemann–Hurwitz.
    pub chi_cover: i64,
    /// ½(Σ i + deg R).
    pub half_upstairs_plus_deg: HalfIndex,
    /// ½(χ(Σ*) + deg R).
    pub half_chi_cover_plus_deg: HalfIndex,
    pub chi_f: i64,
    /// The upstairs index theorem Σ i = χ(Σ*), assumed and checked here by
    /// substitution.
    pub upstairs_formula_holds: bool,
    pub holds: bool,
    pub note: &'static str,
}

pub const ORIENTABLE_PREIMAGE_NOTE: &str =
    "each orientable singularity lifts to two unramified points, each assigned the downstairs index";

/// Evaluate the chain Σj = ½(Σi + deg R) = ½(χ(Σ*) + deg R) = χ(F).
pub fn reduction_sum_check(p: &SingularPartition) -> Result<ReductionReport, LiftError> {
    if let Some(&v) = p.orientable.iter().find(|j| !j.is_integral()) {
        return Err(LiftError::Parity { list: "orientable", value: v });
    }
    if let Some(&v) = p.non_orientable.iter().find(|j| j.is_integral()) {
        return Err(LiftError::Parity { list: "non-orientable", value: v });
    }
    let mut upstairs = Vec::with_capacity(2 * p.orientable.len() + p.non_orientable.len());
    for j in &p.orientable {
        let i = j.as_int().expect("parity checked");
        upstairs.extend([i, i]);
    }
    for j in &p.non_orientable {
        upstairs.push(index_lift_relation(*j)?.as_int().expect("lift is integral"));
    }
    let sum_upstairs: i64 = upstairs.iter().sum();
    let deg_r = p.deg_r();
    let chi_cover = riemann_hurwitz(p.base_chi, deg_r);
    let sum_orientable: HalfIndex = p.orientable.iter().sum();
    let sum_non_orientable: HalfIndex = p.non_orientable.iter().sum();
    let sum_j = sum_orientable + sum_non_orientable;
    let half_up = HalfIndex::from_doubled(sum_upstairs + deg_r as i64);
    let half_chi = HalfIndex::from_doubled(chi_cover + deg_r as i64);
    let upstairs_formula_holds = sum_upstairs == chi_cover;
    let report = ReductionReport {
        sum_orientable,
        sum_non_orientable,
        sum_j,
        upstairs,
        sum_upstairs,
        deg_r,
        chi_cover,
        half_upstairs_plus_deg: half_up,
        half_chi_cover_plus_deg: half_chi,
        chi_f: p.base_chi,
        upstairs_formula_holds,
        holds: upstairs_formula_holds && sum_j == half_up && half_chi == HalfIndex::from_int(p.base_chi),
        note: ORIENTABLE_PREIMAGE_NOTE,
    };
    if !report.holds {
        return Err(LiftError::ChiMismatch { sum: sum_j, chi: p.base_chi, report: Box::new(report) });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(d: i64) -> HalfIndex {
        HalfIndex::from_doubled(d)
    }

    #[test]
    fn relation_examples() {
        assert_eq!(index_lift_relation(h(1)).unwrap(), HalfIndex::from_int(0));
        assert_eq!(index_lift_relation(h(-1)).unwrap(), HalfIndex::from_int(-2));
        assert_eq!(index_lift_relation(h(3)).unwrap(), HalfIndex::from_int(2));
        assert_eq!(index_lift_relation(h(2)), Err(LiftError::OrientableInput(h(2))));
        for d in (-15..=15).step_by(2) {
            assert_eq!(index_descend_relation(index_lift_relation(h(d)).unwrap()).unwrap(), h(d));
        }
    }

    #[test]
    fn numeric_examples() {
        let c = Circle::centered(1.0).unwrap();
        let o = WindingOptions::default();
        assert_eq!(numeric_lift_check(1, &c, &o).unwrap().upstairs, HalfIndex::from_int(0));
        assert_eq!(numeric_lift_check(-1, &c, &o).unwrap().upstairs, HalfIndex::from_int(-2));
        assert_eq!(numeric_lift_check(3, &c, &o).unwrap().upstairs, HalfIndex::from_int(2));
        assert_eq!(numeric_lift_check(2, &c, &o), Err(LiftError::EvenInput(2)));
        assert_eq!(numeric_lift_check(1, &Circle::new([1.0, 0.0], 2.0).unwrap(), &o), Err(LiftError::OffCenter));
    }

    #[test]
    fn lifted_jacobian_matches_finite_differences() {
        let h = 1e-6;
        for two_j in [-3, 1, 5] {
            let base = PlaneField::line_model(two_j);
            let f = LiftedField { base: &base };
            for k in 0..12 {
                let phi = 0.37 + k as f64 * 0.5;
                let w = [0.8 * phi.cos(), 0.8 * phi.sin()];
                let j = f.jacobian(w);
                for (col, e) in [[h, 0.0], [0.0, h]].iter().enumerate() {
                    let plus = f.direction([w[0] + e[0], w[1] + e[1]]);
                    let minus = f.direction([w[0] - e[0], w[1] - e[1]]);
                    for row in 0..2 {
                        let fd = (plus[row] - minus[row]) / (2.0 * h);
                        assert!((fd - j[row][col]).abs() < 1e-5, "two_j={two_j} w={w:?}: {fd} vs {}", j[row][col]);
                    }
                }
            }
        }
    }

    #[test]
    fn naive_pullback_without_twist_gives_2j() {
        struct Naive<'a>(&'a PlaneField);
        impl DirectionField for Naive<'_> {
            fn is_line_field(&self) -> bool {
                true
            }
            fn direction(&self, w: Point) -> Point {
                self.0.direction([w[0] * w[0] - w[1] * w[1], 2.0 * w[0] * w[1]])
            }
            fn jacobian(&self, _: Point) -> Jacobian {
                [[0.0; 2]; 2]
            }
            fn magnitude_scale(&self, _: f64) -> f64 {
                0.0
            }
        }
        let base = PlaneField::line_model(3);
        let w = winding_index(&Naive(&base), &Circle::centered(1.0).unwrap(), &WindingOptions::default()).unwrap();
        assert_eq!(w.index, HalfIndex::from_int(3));
    }

    #[test]
    fn rh_examples() {
        assert_eq!(riemann_hurwitz(2, 2), 2);
        assert_eq!(riemann_hurwitz(2, 4), 0);
        assert_eq!(riemann_hurwitz(0, 0), 0);
    }

    #[test]
    fn reduction_examples() {
        let lemons = SingularPartition { orientable: vec![], non_orientable: vec![h(1); 4], base_chi: 2 };
        let r = reduction_sum_check(&lemons).unwrap();
        assert_eq!(r.deg_r, 4);
        assert_eq!(r.chi_cover, 0);
        assert_eq!(r.upstairs, vec![0; 4]);
        assert_eq!(r.half_upstairs_plus_deg, HalfIndex::from_int(2));

        let dipole = SingularPartition { orientable: vec![h(4)], non_orientable: vec![], base_chi: 2 };
        let r = reduction_sum_check(&dipole).unwrap();
        assert_eq!(r.chi_cover, 4);
        assert_eq!(r.sum_upstairs, 4);

        let torus = SingularPartition { base_chi: 0, ..Default::default() };
        assert!(reduction_sum_check(&torus).unwrap().holds);
    }

    #[test]
    fn reduction_failures() {
        let three_lemons = SingularPartition { orientable: vec![], non_orientable: vec![h(1); 3], base_chi: 2 };
        assert!(matches!(reduction_sum_check(&three_lemons), Err(LiftError::ChiMismatch { chi: 2, .. })));
        let bad = SingularPartition { orientable: vec![h(1)], non_orientable: vec![], base_chi: 2 };
        assert!(matches!(reduction_sum_check(&bad), Err(LiftError::Parity { list: "orientable", .. })));
        let bad = SingularPartition { orientable: vec![], non_orientable: vec![h(2)], base_chi: 2 };
        assert!(matches!(reduction_sum_check(&bad), Err(LiftError::Parity { list: "non-orientable", .. })));
    }
}
