//! Argument-principle zero counting along closed contours.

use num_complex::Complex;

use super::{EquilibriaError, Region};
use crate::expr::FunctionModel;
use crate::scalar::{Cx, Real};

/// Maximum bisection depth when an argument increment exceeds π/2.
const MAX_REFINE_DEPTH: u32 = 20;
/// Growth factor applied when a zero sits on the contour.
const PERTURB_FACTOR: f64 = 1e-3;
const PERTURB_ATTEMPTS: u32 = 3;
/// A sample counts as a boundary zero when `|f| <= BOUNDARY_REL * max |f|`
/// over the initial contour samples.
const BOUNDARY_REL: f64 = 1e-12;
/// Midpoint deviation from the chord allowed, relative to the smaller endpoint modulus.
const LINEARITY: f64 = 0.1;

pub const DEFAULT_SAMPLES: usize = 128;

/// Closed, counterclockwise contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contour<T> {
    Rectangle(Region<T>),
    Circle { center: Cx<T>, radius: T },
}

impl<T: Real> Contour<T> {
    /// Point at parameter `s ∈ [0, 1]`; `s = 0` and `s = 1` coincide.
    pub fn point(&self, s: T) -> Cx<T> {
        match *self {
            Contour::Circle { center, radius } => {
                center + Complex::from_polar(radius, T::TAU() * s)
            }
            Contour::Rectangle(r) => {
                let (w, h) = (r.width(), r.height());
                let perimeter = (w + h) * T::lit(2.0);
                let mut d = s * perimeter;
                if d <= w {
                    return Complex::new(r.lo.re + d, r.lo.im);
                }
                d = d - w;
                if d <= h {
                    return Complex::new(r.hi.re, r.lo.im + d);
                }
                d = d - h;
                if d <= w {
                    return Complex::new(r.hi.re - d, r.hi.im);
                }
                d = d - w;
                Complex::new(r.lo.re, r.hi.im - d.min(h))
            }
        }
    }

    /// The contour enlarged by `factor` about its center.
    pub fn grown(&self, factor: T) -> Self {
        match *self {
            Contour::Circle { center, radius } => Contour::Circle {
                center,
                radius: radius * factor,
            },
            Contour::Rectangle(r) => Contour::Rectangle(r.grown(factor)),
        }
    }

    fn corner_params(&self) -> Vec<T> {
        match self {
            Contour::Circle { .. } => Vec::new(),
            Contour::Rectangle(r) => {
                let (w, h) = (r.width(), r.height());
                let p = (w + h) * T::lit(2.0);
                vec![w / p, (w + h) / p, (w + w + h) / p]
            }
        }
    }
}

/// Winding number of `f` along `contour`, perturbing the contour outward
/// when a sample lands on a zero.
pub fn winding_count<T: Real>(
    f: &FunctionModel<T>,
    contour: &Contour<T>,
    samples: usize,
) -> Result<i64, EquilibriaError> {
    winding_count_with_contour(f, contour, samples).map(|(n, _)| n)
}

/// Like [`winding_count`], also returning the contour actually used.
pub fn winding_count_with_contour<T: Real>(
    f: &FunctionModel<T>,
    contour: &Contour<T>,
    samples: usize,
) -> Result<(i64, Contour<T>), EquilibriaError> {
    let mut current = *contour;
    let factor = T::one() + T::lit(PERTURB_FACTOR);
    let mut attempt = 0;
    loop {
        match winding_exact(f, &current, samples) {
            Err(EquilibriaError::BoundaryZero { .. }) if attempt < PERTURB_ATTEMPTS => {
                attempt += 1;
                current = current.grown(factor);
            }
            other => return other.map(|n| (n, current)),
        }
    }
}

/// Winding number without perturbation; a zero on the contour is an error.
pub(crate) fn winding_exact<T: Real>(
    f: &FunctionModel<T>,
    contour: &Contour<T>,
    samples: usize,
) -> Result<i64, EquilibriaError> {
    let n = samples.max(8);
    let mut params: Vec<T> = (0..=n)
        .map(|i| T::from_usize_lossy(i) / T::from_usize_lossy(n))
        .chain(contour.corner_params())
        .collect();
    params.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    params.dedup();

    let values = params
        .iter()
        .map(|&s| f.eval(contour.point(s)))
        .collect::<Result<Vec<_>, _>>()?;
    let scale = values.iter().map(|v| v.norm()).fold(T::zero(), T::max);
    let floor = T::lit(BOUNDARY_REL) * scale;
    let check = |s: T, v: Cx<T>| -> Result<(), EquilibriaError> {
        if v.norm() <= floor || scale == T::zero() {
            let p = contour.point(s);
            Err(EquilibriaError::BoundaryZero {
                point: [p.re.to_f64().unwrap_or(f64::NAN), p.im.to_f64().unwrap_or(f64::NAN)],
            })
        } else {
            Ok(())
        }
    };
    for (&s, &v) in params.iter().zip(&values) {
        check(s, v)?;
    }

    let half_pi = T::FRAC_PI_2();
    let mut total = T::zero();
    for i in 0..params.len() - 1 {
        // explicit stack: (s0, f0, s1, f1, depth)
        let mut stack = vec![(params[i], values[i], params[i + 1], values[i + 1], 0u32)];
        while let Some((s0, f0, s1, f1, depth)) = stack.pop() {
            let inc = (f1 / f0).arg();
            let sm = (s0 + s1) / T::lit(2.0);
            let fm = f.eval(contour.point(sm))?;
            check(sm, fm)?;
            // f must be close to linear on the segment so no full turn hides inside it
            let chord = (fm - (f0 + f1) / T::lit(2.0)).norm();
            if inc.abs() <= half_pi && chord <= T::lit(LINEARITY) * f0.norm().min(f1.norm()) {
                total = total + inc;
                continue;
            }
            if depth >= MAX_REFINE_DEPTH {
                return Err(EquilibriaError::NonConvergence {
                    reason: "argument refinement exceeded maximum depth".into(),
                });
            }
            // push right half first so the left half is summed first
            stack.push((sm, fm, s1, f1, depth + 1));
            stack.push((s0, f0, sm, fm, depth + 1));
        }
    }
    let turns = total / T::TAU();
    let rounded = turns.round();
    if (turns - rounded).abs() > T::lit(1e-3) {
        return Err(EquilibriaError::NonConvergence {
            reason: format!("winding sum {:?} is not an integer", turns.to_f64()),
        });
    }
    Ok(rounded.to_i64().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(src: &str) -> FunctionModel<f64> {
        FunctionModel::parse(src).unwrap()
    }

    fn square(h: f64) -> Contour<f64> {
        Contour::Rectangle(Region::new(Complex::new(-h, -h), Complex::new(h, h)).unwrap())
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding_count(&model("z"), &square(0.5), DEFAULT_SAMPLES).unwrap(), 1);
        assert_eq!(
            winding_count(&model("z^5*exp(z)"), &square(0.5), DEFAULT_SAMPLES).unwrap(),
            5
        );
        assert_eq!(
            winding_count(&model("z^3*(z-1)^3"), &square(2.0), DEFAULT_SAMPLES).unwrap(),
            6
        );
    }

    #[test]
    fn poles_count_negatively() {
        assert_eq!(winding_count(&model("1/z^2"), &square(1.0), 64).unwrap(), -2);
    }

    #[test]
    fn circle_contour_counts_enclosed_zeros_only() {
        let f = model("z^3*(z-1)^3");
        let c = Contour::Circle {
            center: Complex::new(1.0, 0.0),
            radius: 1e-2,
        };
        assert_eq!(winding_count(&f, &c, DEFAULT_SAMPLES).unwrap(), 3);
    }

    #[test]
    fn zero_on_boundary_is_perturbed_away() {
        // zero at 0.5 lies on the right edge of the square
        let f = model("z-0.5");
        let (n, used) = winding_count_with_contour(&f, &square(0.5), 64).unwrap();
        assert_eq!(n, 1);
        assert_ne!(used, square(0.5));
        assert!(winding_exact(&f, &square(0.5), 64).is_err());
    }

    #[test]
    fn identically_zero_function_is_a_boundary_zero() {
        let f = model("0*z");
        assert!(matches!(
            winding_count(&f, &square(1.0), 32),
            Err(EquilibriaError::BoundaryZero { .. })
        ));
    }

    #[test]
    fn rectangle_parameterization_is_closed_and_counterclockwise() {
        let c = square(1.0);
        assert_eq!(c.point(0.0), Complex::new(-1.0, -1.0));
        assert_eq!(c.point(0.25), Complex::new(1.0, -1.0));
        assert_eq!(c.point(0.5), Complex::new(1.0, 1.0));
        assert_eq!(c.point(0.75), Complex::new(-1.0, 1.0));
        assert!((c.point(1.0) - c.point(0.0)).norm() < 1e-15);
    }
}
