//! Zeros of `F` inside a rectangle: quadtree subdivision by winding
//! number, Newton polishing on `F/F'`, and order/index determination.

mod winding;

use num_complex::Complex;
use thiserror::Error;

use crate::expr::{EvalError, FunctionModel, DEFAULT_JET_ORDER};
use crate::local::EquilibriumKind;
use crate::scalar::{Cx, Real};

pub use winding::{winding_count, winding_count_with_contour, Contour, DEFAULT_SAMPLES};

/// Jet coefficient `c_k` is negligible when `|c_k| <= NEGLIGIBLE * max(1, max_j |c_j|)`.
pub const NEGLIGIBLE: f64 = 1e-10;
/// Relative factor of the zero tolerance `ε_zero`.
const ZERO_REL: f64 = 1e-10;
/// Cells this small (with few zeros) stop subdividing and run Newton directly.
const FORCED_DIAMETER: f64 = 1e-3;
const CLUSTER_THRESHOLD: i64 = 8;
/// Distinct zeros closer than this are reported as a cluster.
pub const MIN_SEPARATION: f64 = 1e-6;
const NEWTON_MAX_ITER: usize = 100;
const SPLIT_FRACTIONS: [f64; 4] = [0.5137, 0.4871, 0.5419, 0.4613];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriaError {
    #[error("invalid region: lower corner must be strictly below and left of upper corner")]
    InvalidRegion,
    #[error("zero of the function on the contour near ({}, {})", point[0], point[1])]
    BoundaryZero { point: [f64; 2] },
    #[error("no convergence: {reason}")]
    NonConvergence { reason: String },
    #[error("all Taylor coefficients up to order {truncation} are negligible at ({}, {})", location[0], location[1])]
    OrderUndetermined { location: [f64; 2], truncation: usize },
    #[error("zeros closer than {MIN_SEPARATION} near ({}, {})", location[0], location[1])]
    Cluster { location: [f64; 2] },
    #[error("a denominator vanishes inside the region")]
    PoleInRegion,
    #[error("index {index} differs from order {order} at ({}, {})", location[0], location[1])]
    IndexMismatch {
        location: [f64; 2],
        order: usize,
        index: i64,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn pair<T: Real>(z: Cx<T>) -> [f64; 2] {
    [
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    ]
}

/// Axis-aligned rectangle `[lo.re, hi.re] × [lo.im, hi.im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region<T> {
    pub lo: Cx<T>,
    pub hi: Cx<T>,
}

impl<T: Real> Region<T> {
    pub fn new(lo: Cx<T>, hi: Cx<T>) -> Result<Self, EquilibriaError> {
        if lo.re < hi.re && lo.im < hi.im && crate::scalar::is_finite(lo) && crate::scalar::is_finite(hi) {
            Ok(Self { lo, hi })
        } else {
            Err(EquilibriaError::InvalidRegion)
        }
    }

    pub fn width(&self) -> T {
        self.hi.re - self.lo.re
    }

    pub fn height(&self) -> T {
        self.hi.im - self.lo.im
    }

    pub fn center(&self) -> Cx<T> {
        (self.lo + self.hi) / T::lit(2.0)
    }

    pub fn diameter(&self) -> T {
        (self.hi - self.lo).norm()
    }

    pub fn contains(&self, z: Cx<T>) -> bool {
        z.re >= self.lo.re && z.re <= self.hi.re && z.im >= self.lo.im && z.im <= self.hi.im
    }

    /// Distance from an interior point to the nearest edge (negative outside).
    pub fn distance_to_boundary(&self, z: Cx<T>) -> T {
        (z.re - self.lo.re)
            .min(self.hi.re - z.re)
            .min(z.im - self.lo.im)
            .min(self.hi.im - z.im)
    }

    pub fn grown(&self, factor: T) -> Self {
        let c = self.center();
        Self {
            lo: c + (self.lo - c) * factor,
            hi: c + (self.hi - c) * factor,
        }
    }

    fn expanded_by(&self, margin: T) -> Self {
        let m = Complex::new(margin, margin);
        Self {
            lo: self.lo - m,
            hi: self.hi + m,
        }
    }

    fn quadrants(&self, frac: T) -> [Self; 4] {
        let s = Complex::new(
            self.lo.re + self.width() * frac,
            self.lo.im + self.height() * frac,
        );
        [
            Self { lo: self.lo, hi: s },
            Self {
                lo: Complex::new(s.re, self.lo.im),
                hi: Complex::new(self.hi.re, s.im),
            },
            Self {
                lo: Complex::new(self.lo.re, s.im),
                hi: Complex::new(s.re, self.hi.im),
            },
            Self { lo: s, hi: self.hi },
        ]
    }

    /// 4×4 grid of interior probe points.
    fn probes(&self) -> impl Iterator<Item = Cx<T>> + '_ {
        (0..16).map(move |k| {
            let (i, j) = (k % 4, k / 4);
            let fx = (T::from_usize_lossy(i) + T::lit(0.5)) / T::lit(4.0);
            let fy = (T::from_usize_lossy(j) + T::lit(0.5)) / T::lit(4.0);
            Complex::new(
                self.lo.re + self.width() * fx,
                self.lo.im + self.height() * fy,
            )
        })
    }
}

/// A zero of `F` with its order `m`, leading coefficient `c_m` and index.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium<T> {
    pub location: Cx<T>,
    pub order: usize,
    pub leading_coefficient: Cx<T>,
    pub index: i64,
    pub kind: EquilibriumKind,
}

/// `ε_zero = 1e-10 · (1 + max |F|)` over 16 probe points in the region.
pub fn zero_tolerance<T: Real>(f: &FunctionModel<T>, region: &Region<T>) -> T {
    let max = region
        .probes()
        .filter_map(|z| f.eval(z).ok())
        .map(|v| v.norm())
        .fold(T::zero(), T::max);
    T::lit(ZERO_REL) * (T::one() + max)
}

/// Order `m` of the zero at `a` and its leading Taylor coefficient `c_m`.
pub fn order_of<T: Real>(f: &FunctionModel<T>, a: Cx<T>) -> Result<(usize, Cx<T>), EquilibriaError> {
    let jet = f.jet(a, DEFAULT_JET_ORDER)?;
    let threshold = T::lit(NEGLIGIBLE) * jet.max_modulus().max(T::one());
    jet.coefficients()
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, c)| c.norm() > threshold)
        .map(|(k, c)| (k, *c))
        .ok_or(EquilibriaError::OrderUndetermined {
            location: pair(a),
            truncation: DEFAULT_JET_ORDER,
        })
}

/// Newton iteration on `g = F/F'`, whose zeros are all simple.
fn newton<T: Real>(f: &FunctionModel<T>, start: Cx<T>) -> Option<Cx<T>> {
    let mut z = start;
    for _ in 0..NEWTON_MAX_ITER {
        let fz = f.eval(z).ok()?;
        if fz.norm() == T::zero() {
            return Some(z);
        }
        let d1 = f.eval_derivative(z).ok()?;
        let d2 = f.eval_second_derivative(z).ok()?;
        // g/g' = F F' / (F'^2 - F F'')
        let den = d1 * d1 - fz * d2;
        if den.norm() == T::zero() {
            return None;
        }
        let step = fz * d1 / den;
        if !crate::scalar::is_finite(step) {
            return None;
        }
        z = z - step;
        if step.norm() <= T::epsilon() * T::lit(4.0) * (T::one() + z.norm()) {
            return Some(z);
        }
    }
    let fz = f.eval(z).ok()?;
    (fz.norm() <= T::epsilon() * (T::one() + z.norm())).then_some(z)
}

struct Search<'a, T> {
    f: &'a FunctionModel<T>,
    eps_zero: T,
    found: Vec<(Cx<T>, usize, Cx<T>)>,
}

impl<T: Real> Search<'_, T> {
    fn starts(cell: &Region<T>) -> Vec<Cx<T>> {
        let c = cell.center();
        let (w, h) = (cell.width(), cell.height());
        let mut v = vec![c];
        for k in 0..4 {
            let ang = T::lit(0.7 + 2.1 * k as f64);
            v.push(c + Complex::new(w * T::lit(0.23) * ang.cos(), h * T::lit(0.23) * ang.sin()));
        }
        v
    }

    fn polish(&self, cell: &Region<T>, start: Cx<T>) -> Result<Option<(Cx<T>, usize, Cx<T>)>, EquilibriaError> {
        let Some(z) = newton(self.f, start) else {
            return Ok(None);
        };
        let margin = T::lit(1e-6) * cell.diameter();
        if !cell.expanded_by(margin).contains(z) {
            return Ok(None);
        }
        if !(self.f.eval(z)?.norm() <= self.eps_zero) {
            return Ok(None);
        }
        let (m, c) = order_of(self.f, z)?;
        Ok(Some((z, m, c)))
    }

    fn process(&mut self, cell: Region<T>, count: i64) -> Result<(), EquilibriaError> {
        if count <= 0 {
            return Ok(());
        }
        // a single zero accounting for the whole count
        if let Some((z, m, c)) = self.polish(&cell, cell.center())? {
            if m as i64 == count {
                self.found.push((z, m, c));
                return Ok(());
            }
        }
        if cell.diameter() <= T::lit(FORCED_DIAMETER) && count <= CLUSTER_THRESHOLD {
            if self.forced(&cell, count)? {
                return Ok(());
            }
            if cell.diameter() <= T::lit(MIN_SEPARATION) {
                return Err(EquilibriaError::Cluster {
                    location: pair(cell.center()),
                });
            }
        } else if cell.diameter() <= T::lit(MIN_SEPARATION) {
            return Err(EquilibriaError::Cluster {
                location: pair(cell.center()),
            });
        }
        self.subdivide(cell, count)
    }

    /// Newton from jittered starts; accepts when the distinct zeros found
    /// account for the full count and each has index equal to its order.
    fn forced(&mut self, cell: &Region<T>, count: i64) -> Result<bool, EquilibriaError> {
        let mut local: Vec<(Cx<T>, usize, Cx<T>)> = Vec::new();
        for start in Self::starts(cell) {
            if let Some(hit) = self.polish(cell, start)? {
                if local.iter().all(|(z, ..)| (z - hit.0).norm() > T::lit(MIN_SEPARATION)) {
                    local.push(hit);
                }
            }
        }
        if local.is_empty() {
            return Err(EquilibriaError::NonConvergence {
                reason: format!(
                    "Newton failed from 5 starts in a cell with {count} zeros near {:?}",
                    pair(cell.center())
                ),
            });
        }
        let total: i64 = local.iter().map(|(_, m, _)| *m as i64).sum();
        if total != count {
            return Ok(false);
        }
        for (i, (z, m, _)) in local.iter().enumerate() {
            let nearest = local
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, (w, ..))| (w - z).norm())
                .fold(T::infinity(), T::min);
            let index = index_at(self.f, *z, nearest)?;
            if index != *m as i64 {
                return Ok(false);
            }
        }
        self.found.extend(local);
        Ok(true)
    }

    fn subdivide(&mut self, cell: Region<T>, count: i64) -> Result<(), EquilibriaError> {
        for frac in SPLIT_FRACTIONS {
            let quads = cell.quadrants(T::lit(frac));
            let counts: Result<Vec<i64>, _> = quads
                .iter()
                .map(|q| winding::winding_exact(self.f, &Contour::Rectangle(*q), DEFAULT_SAMPLES))
                .collect();
            match counts {
                Ok(c) if c.iter().sum::<i64>() == count => {
                    for (q, n) in quads.into_iter().zip(c) {
                        self.process(q, n)?;
                    }
                    return Ok(());
                }
                Ok(_) | Err(EquilibriaError::BoundaryZero { .. }) | Err(EquilibriaError::NonConvergence { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(EquilibriaError::NonConvergence {
            reason: format!("could not split cell near {:?} without a zero on a cut", pair(cell.center())),
        })
    }
}

/// Winding number on a circle of radius `min(1e-2, nearest/2)` around `a`.
pub fn index_at<T: Real>(f: &FunctionModel<T>, a: Cx<T>, nearest_other: T) -> Result<i64, EquilibriaError> {
    let radius = T::lit(1e-2).min(nearest_other / T::lit(2.0));
    winding_count(f, &Contour::Circle { center: a, radius }, DEFAULT_SAMPLES)
}

/// Builds the equilibrium record for a known zero `a` of `f`.
pub fn equilibrium_at<T: Real>(f: &FunctionModel<T>, a: Cx<T>) -> Result<Equilibrium<T>, EquilibriaError> {
    let (order, leading_coefficient) = order_of(f, a)?;
    let index = index_at(f, a, T::infinity())?;
    Ok(Equilibrium {
        location: a,
        order,
        leading_coefficient,
        index,
        kind: EquilibriumKind::Unclassified,
    })
}

fn check_no_poles<T: Real>(f: &FunctionModel<T>, region: &Region<T>) -> Result<(), EquilibriaError> {
    for den in f.expr().denominators() {
        let den = FunctionModel::from_expr(den.clone());
        match winding_count(&den, &Contour::Rectangle(*region), DEFAULT_SAMPLES) {
            Ok(0) => {}
            Ok(_) | Err(EquilibriaError::BoundaryZero { .. }) => return Err(EquilibriaError::PoleInRegion),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// All zeros of `f` in `region`, sorted by `(re, im)`, each with order,
/// leading coefficient and index filled in and `kind` left unclassified.
pub fn find_equilibria<T: Real>(
    f: &FunctionModel<T>,
    region: &Region<T>,
) -> Result<Vec<Equilibrium<T>>, EquilibriaError> {
    check_no_poles(f, region)?;
    let (total, contour) = winding_count_with_contour(f, &Contour::Rectangle(*region), DEFAULT_SAMPLES)?;
    let search_region = match contour {
        Contour::Rectangle(r) => r,
        Contour::Circle { .. } => *region,
    };
    let mut search = Search {
        f,
        eps_zero: zero_tolerance(f, region),
        found: Vec::new(),
    };
    search.process(search_region, total)?;

    let mut found = search.found;
    found.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for w in found.windows(2) {
        if (w[0].0 - w[1].0).norm() <= T::lit(MIN_SEPARATION) {
            return Err(EquilibriaError::Cluster { location: pair(w[0].0) });
        }
    }
    let sum: i64 = found.iter().map(|z| z.1 as i64).sum();
    if sum != total {
        return Err(EquilibriaError::NonConvergence {
            reason: format!("orders sum to {sum} but the boundary winding is {total}"),
        });
    }

    let locations: Vec<Cx<T>> = found.iter().map(|z| z.0).collect();
    found
        .into_iter()
        .map(|(location, order, leading_coefficient)| {
            let nearest = locations
                .iter()
                .filter(|w| **w != location)
                .map(|w| (w - location).norm())
                .fold(T::infinity(), T::min);
            let index = index_at(f, location, nearest)?;
            if index != order as i64 {
                return Err(EquilibriaError::IndexMismatch {
                    location: pair(location),
                    order,
                    index,
                });
            }
            Ok(Equilibrium {
                location,
                order,
                leading_coefficient,
                index,
                kind: EquilibriumKind::Unclassified,
            })
        })
        .collect()
}
