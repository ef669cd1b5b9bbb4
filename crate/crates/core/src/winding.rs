//! Poincaré index as the total turning of the field along a circle.
//!
//! The circle is sampled on a fixed grid and each grid interval is bisected
//! until the direction turns by less than π/2 (vector fields) or π/4 (line
//! fields) per step. Below those bounds the continuous lift of the angle is
//! unambiguous, so the accumulated turning is exact up to roundoff.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::field::{angle_between, apply, line_angle_between, norm, Circle, DirectionField, Point};
use crate::half::HalfIndex;

pub const VECTOR_STEP_GUARD: f64 = PI / 2.0;
pub const LINE_STEP_GUARD: f64 = PI / 4.0;
/// Largest accepted distance, in turns, from the nearest representable index.
pub const RESIDUAL_TOL: f64 = 0.01;
pub const MIN_INITIAL_SAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WindingError {
    #[error("field magnitude {magnitude:e} below tolerance {tol:e} at angle {angle} on the circuit")]
    SingularOnCircuit { angle: f64, magnitude: f64, tol: f64 },
    #[error("winding did not converge: {0}")]
    NonConvergent(String),
    #[error("initial sample count {0} is below {MIN_INITIAL_SAMPLES}")]
    TooFewSamples(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingOptions {
    pub initial_samples: usize,
    pub max_depth: u32,
    /// `None` picks `1e-9 · (1 + max|coeff| · R^deg)`, R the farthest
    /// distance of the circle from the origin.
    pub singular_tol: Option<f64>,
    /// Polar angle where the circulation starts.
    pub start_angle: f64,
    pub exec: Exec,
}

impl Default for WindingOptions {
    fn default() -> Self {
        WindingOptions {
            initial_samples: 256,
            max_depth: 24,
            singular_tol: None,
            start_angle: 0.0,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindingResult {
    pub index: HalfIndex,
    pub samples_used: usize,
    /// Largest accepted per-step turning, radians.
    pub max_step_angle: f64,
    /// Distance of the raw turn count from `index`.
    pub residual: f64,
    /// Total turning divided by 2π.
    pub raw_turns: f64,
}

pub fn default_singular_tol<F: DirectionField + ?Sized>(field: &F, circle: &Circle) -> f64 {
    let reach = norm(circle.center) + circle.radius;
    1e-9 * (1.0 + field.magnitude_scale(reach))
}

#[derive(Clone, Copy)]
struct Sample {
    d: Point,
    rate: f64,
}

#[derive(Default)]
struct Acc {
    turning: f64,
    samples: usize,
    max_step: f64,
}

struct Walker<'a, F: ?Sized> {
    field: &'a F,
    circle: Circle,
    tol: f64,
    guard: f64,
    line: bool,
    max_depth: u32,
}

impl<F: DirectionField + ?Sized> Walker<'_, F> {
    /// Direction at `phi` and its turning rate `dθ/dφ` along the circle.
    fn sample(&self, phi: f64) -> Result<Sample, WindingError> {
        let p = self.circle.point_at(phi);
        let d = self.field.direction(p);
        let m = norm(d);
        if !(m > self.tol) {
            return Err(WindingError::SingularOnCircuit { angle: phi, magnitude: m, tol: self.tol });
        }
        let r = self.circle.radius;
        let dp = apply(&self.field.jacobian(p), [-r * phi.sin(), r * phi.cos()]);
        let rate = (d[0] * dp[1] - d[1] * dp[0]) / (m * m);
        Ok(Sample { d, rate })
    }

    fn step(&self, a: Point, b: Point) -> f64 {
        if self.line {
            line_angle_between(a, b)
        } else {
            angle_between(a, b)
        }
    }

    /// Accept the interval once both the measured turn and the turn
    /// predicted by the endpoint rates stay under the guard. The rate test
    /// catches intervals whose endpoints alias to nearly the same direction.
    fn refine(
        &self,
        phi_a: f64,
        a: Sample,
        phi_b: f64,
        b: Sample,
        depth: u32,
        acc: &mut Acc,
    ) -> Result<(), WindingError> {
        let delta = self.step(a.d, b.d);
        let predicted = (phi_b - phi_a) * a.rate.abs().max(b.rate.abs());
        if delta.abs() < self.guard && predicted < self.guard {
            acc.turning += delta;
            acc.max_step = acc.max_step.max(delta.abs());
            return Ok(());
        }
        if depth >= self.max_depth {
            return Err(WindingError::NonConvergent(format!(
                "step of {delta:.3} rad (rate bound {predicted:.3}) near angle {phi_a:.6} persists at depth {depth}; \
                 singularity on or near the circle?"
            )));
        }
        let mid = 0.5 * (phi_a + phi_b);
        let m = self.sample(mid)?;
        acc.samples += 1;
        self.refine(phi_a, a, mid, m, depth + 1, acc)?;
        self.refine(mid, m, phi_b, b, depth + 1, acc)
    }
}

/// Index of `field` along `circle`, counterclockwise.
pub fn winding_index<F>(field: &F, circle: &Circle, opts: &WindingOptions) -> Result<WindingResult, WindingError>
where
    F: DirectionField + ?Sized,
{
    let n = opts.initial_samples;
    if n < MIN_INITIAL_SAMPLES {
        return Err(WindingError::TooFewSamples(n));
    }
    let line = field.is_line_field();
    let walker = Walker {
        field,
        circle: *circle,
        tol: opts.singular_tol.unwrap_or_else(|| default_singular_tol(field, circle)),
        guard: if line { LINE_STEP_GUARD } else { VECTOR_STEP_GUARD },
        line,
        max_depth: opts.max_depth,
    };
    let angle = |k: usize| opts.start_angle + 2.0 * PI * k as f64 / n as f64;

    let grid: Vec<Result<Sample, WindingError>> = opts.exec.map_range(0..n, |k| walker.sample(angle(k)));
    let grid: Vec<Sample> = grid.into_iter().collect::<Result<_, _>>()?;

    let pieces = opts.exec.map_range(0..n, |k| {
        let mut acc = Acc::default();
        // The last interval closes on sample 0.
        walker.refine(angle(k), grid[k], angle(k + 1), grid[(k + 1) % n], 0, &mut acc).map(|_| acc)
    });

    let mut total = Acc { samples: n, ..Acc::default() };
    for piece in pieces {
        let piece = piece?;
        total.turning += piece.turning;
        total.samples += piece.samples;
        total.max_step = total.max_step.max(piece.max_step);
    }

    let turns = total.turning / (2.0 * PI);
    let doubled = if line { (2.0 * turns).round() } else { 2.0 * turns.round() };
    let index = HalfIndex::from_doubled(doubled as i64);
    let residual = (turns - index.to_f64()).abs();
    if !(residual < RESIDUAL_TOL) {
        return Err(WindingError::NonConvergent(format!("residual {residual:.4} turn exceeds {RESIDUAL_TOL}")));
    }
    Ok(WindingResult { index, samples_used: total.samples, max_step_angle: total.max_step, residual, raw_turns: turns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{catalog_all, catalog_get, complex_monomial};
    use crate::field::PlaneField;

    fn wind(field: &PlaneField, r: f64) -> WindingResult {
        winding_index(field, &Circle::centered(r).unwrap(), &WindingOptions::default()).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(wind(&catalog_get("rotation").unwrap().field, 1.0).index, HalfIndex::from_int(1));
        assert_eq!(wind(&catalog_get("saddle").unwrap().field, 1.0).index, HalfIndex::from_int(-1));
        assert_eq!(wind(&PlaneField::line_model(-1), 1.0).index, HalfIndex::from_doubled(-1));
    }

    #[test]
    fn catalog_matches_expected_at_several_radii() {
        for e in catalog_all() {
            for r in [0.1, 1.0, 7.0] {
                let w = wind(&e.field, r);
                assert_eq!(w.index, e.expected_index, "{} at r={r}", e.name);
                assert!(w.residual < RESIDUAL_TOL);
                assert!(w.max_step_angle < if e.field.is_line_field() { LINE_STEP_GUARD } else { VECTOR_STEP_GUARD });
            }
        }
    }

    #[test]
    fn complex_monomials_wind_k_times() {
        for k in -4..=5 {
            let f = PlaneField::from_poly_field(complex_monomial(k));
            for r in [0.05, 0.5, 1.0, 3.3, 10.0] {
                assert_eq!(wind(&f, r).index, HalfIndex::from_int(k as i64), "k={k} r={r}");
            }
        }
    }

    #[test]
    fn index_is_additive_under_complex_product() {
        for a in -2..=3 {
            for b in -2..=3 {
                let fa = complex_monomial(a);
                let fb = complex_monomial(b);
                let prod = PlaneField::from_poly_field(fa.complex_mul(&fb));
                let ia = wind(&PlaneField::from_poly_field(fa), 1.0).index;
                let ib = wind(&PlaneField::from_poly_field(fb), 1.0).index;
                assert_eq!(wind(&prod, 1.0).index, ia + ib, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn start_point_and_sample_count_do_not_matter() {
        let f = catalog_get("monkey-saddle").unwrap().field;
        let c = Circle::centered(1.3).unwrap();
        for n in [16, 17, 64, 301] {
            for start in [0.0, 0.4, 2.0, -1.1] {
                let o = WindingOptions { initial_samples: n, start_angle: start, ..Default::default() };
                assert_eq!(winding_index(&f, &c, &o).unwrap().index, HalfIndex::from_int(-2));
            }
        }
    }

    #[test]
    fn deterministic_across_exec_modes() {
        let f = catalog_get("star").unwrap().field;
        let c = Circle::new([0.1, -0.2], 2.0).unwrap();
        let seq = winding_index(&f, &c, &WindingOptions { exec: Exec::Sequential, ..Default::default() }).unwrap();
        let par = winding_index(&f, &c, &WindingOptions { exec: Exec::Parallel, ..Default::default() }).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.raw_turns.to_bits(), par.raw_turns.to_bits());
    }

    #[test]
    fn singularity_on_circle_is_reported() {
        // Node moved to (1, 0): zero lies on the unit circle at φ = 0.
        let f = PlaneField::parse_vector("x - 1", "y").unwrap();
        let err = winding_index(&f, &Circle::centered(1.0).unwrap(), &WindingOptions::default()).unwrap_err();
        assert!(matches!(err, WindingError::SingularOnCircuit { .. }), "{err:?}");
    }

    #[test]
    fn coarse_grid_does_not_alias() {
        // At 4 samples every grid direction of z^8 is the same vector.
        let f = PlaneField::from_poly_field(complex_monomial(8));
        let c = Circle::centered(1.0).unwrap();
        let coarse = WindingOptions { initial_samples: 4, ..Default::default() };
        assert_eq!(winding_index(&f, &c, &coarse).unwrap().index, HalfIndex::from_int(8));
        let shallow = WindingOptions { max_depth: 0, ..coarse };
        assert!(matches!(winding_index(&f, &c, &shallow), Err(WindingError::NonConvergent(_))));
        let lemon = PlaneField::line_model(7);
        assert_eq!(winding_index(&lemon, &c, &coarse).unwrap().index, HalfIndex::from_doubled(7));
    }

    #[test]
    fn near_singularity_without_depth_is_nonconvergent() {
        // Zero just off the circle, off the sample grid: the direction whips
        // around faster than a shallow bisection can resolve.
        let f = PlaneField::parse_vector("x - 1.0000001", "y - 0.0000003").unwrap();
        let o = WindingOptions { initial_samples: 16, max_depth: 3, ..Default::default() };
        let err = winding_index(&f, &Circle::centered(1.0).unwrap(), &o).unwrap_err();
        assert!(matches!(err, WindingError::NonConvergent(_)), "{err:?}");
        assert!(matches!(
            winding_index(&f, &Circle::centered(1.0).unwrap(), &WindingOptions { initial_samples: 2, ..o }),
            Err(WindingError::TooFewSamples(2))
        ));
    }

    #[test]
    fn sign_invariance_for_line_fields() {
        struct Negated(PlaneField);
        impl DirectionField for Negated {
            fn is_line_field(&self) -> bool {
                true
            }
            fn direction(&self, p: Point) -> Point {
                let d = self.0.direction(p);
                [-d[0], -d[1]]
            }
            fn jacobian(&self, p: Point) -> crate::field::Jacobian {
                let j = self.0.jacobian(p);
                [[-j[0][0], -j[0][1]], [-j[1][0], -j[1][1]]]
            }
            fn magnitude_scale(&self, r: f64) -> f64 {
                self.0.magnitude_scale(r)
            }
        }
        for two_j in -5..=5 {
            let f = PlaneField::line_model(two_j);
            let c = Circle::centered(0.7).unwrap();
            let a = winding_index(&f, &c, &WindingOptions::default()).unwrap();
            let b = winding_index(&Negated(f), &c, &WindingOptions::default()).unwrap();
            assert_eq!(a.index, b.index);
            assert_eq!(a.index.doubled(), two_j);
        }
    }
}
