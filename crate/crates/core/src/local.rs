//! Closed-form local theory of equilibria of `ż = F(z)`.
//!
//! Simple equilibria (order 1) are classified from `F'(a) = α + iβ`. For an
//! equilibrium of order `m ≥ 2` with leading coefficient `c_m = |c_m| e^{iβ}`
//! the orbits tending to `a` do so along exactly `2m-2` definite directions
//!
//! ```text
//! θ_ℓ = (ℓπ - β) / (m - 1)  mod 2π,
//! ```
//!
//! where orbits arrive for `t → +∞` if `cos(β + (m-1)θ) < 0` and for
//! `t → -∞` if it is positive. The polar blow-up `z = a + ρe^{iθ}` with
//! `dτ = ρ^{m-1} dt` turns each direction into a node `(0, θ_ℓ)` with
//! eigenvalues `λ₁ = |c_m| cos(β + (m-1)θ_ℓ)` and `λ₂ = (m-1)λ₁`.

use num_complex::Complex;
use thiserror::Error;

use crate::equilibria::Equilibrium;
use crate::expr::{homogeneous_part, EvalError, FunctionModel, Jet, DEFAULT_JET_ORDER};
use crate::scalar::{normalize_angle, Cx, Real};

/// Below this radius the blow-up is evaluated from the Taylor jet.
pub const JET_SWITCH_RADIUS: f64 = 1e-8;
/// `|λ|` below this means the angle is not a usable definite direction.
pub const LAMBDA_FLOOR: f64 = 1e-9;
/// Maximum `|H̃(θ₀)|` accepted by [`blowup_linearization`].
pub const DIRECTION_TOLERANCE: f64 = 1e-6;
const CROSS_CHECK_TOLERANCE: f64 = 1e-10;
/// Relative size below which `Re F'(a)` or `Im F'(a)` counts as zero.
pub const LINEAR_ZERO_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalError {
    #[error("operation requires order {expected}, equilibrium has order {found}")]
    InvalidOrder { expected: &'static str, found: usize },
    #[error("F'(a) vanishes at a simple equilibrium")]
    DegenerateDerivative,
    #[error("angle {theta} is not a definite direction (H = {h:e}, λ = {lambda:e})")]
    NotADirection { theta: f64, h: f64, lambda: f64 },
    #[error("H cross-check failed at θ = {theta}: closed form {closed:e}, Taylor parts {taylor:e}")]
    CrossCheck { theta: f64, closed: f64, taylor: f64 },
    #[error("finite-difference eigenvalues disagree with {closed:?} at θ = {theta}")]
    LinearizationMismatch { theta: f64, closed: [f64; 2] },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Classification of an order-1 equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimpleKind {
    StableNode,
    UnstableNode,
    StableFocus,
    UnstableFocus,
    /// `Re F'(a) = 0`; the linear part cannot decide.
    CenterOrFocus,
    Center,
    Focus,
}

impl SimpleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SimpleKind::StableNode => "stable_node",
            SimpleKind::UnstableNode => "unstable_node",
            SimpleKind::StableFocus => "stable_focus",
            SimpleKind::UnstableFocus => "unstable_focus",
            SimpleKind::CenterOrFocus => "center_or_focus",
            SimpleKind::Center => "center",
            SimpleKind::Focus => "focus",
        }
    }

    /// Orbits near the equilibrium wind around it (no limiting direction).
    pub fn is_spiral_like(&self) -> bool {
        !matches!(self, SimpleKind::StableNode | SimpleKind::UnstableNode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EquilibriumKind {
    #[default]
    Unclassified,
    Simple(SimpleKind),
    /// Order `m ≥ 2`: a finite elliptic decomposition into `sectors = 2m-2`.
    EllipticDecomposition { sectors: usize },
}

impl EquilibriumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquilibriumKind::Unclassified => "unclassified",
            EquilibriumKind::Simple(k) => k.as_str(),
            EquilibriumKind::EllipticDecomposition { .. } => "elliptic_decomposition",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeSign {
    /// Orbits reach the equilibrium as `t → +∞` (`λ < 0`).
    Forward,
    /// Orbits reach the equilibrium as `t → -∞` (`λ > 0`).
    Backward,
}

impl TimeSign {
    pub fn as_str(&self) -> &'static str {
        match self {
            TimeSign::Forward => "forward",
            TimeSign::Backward => "backward",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefiniteDirection<T> {
    pub theta: T,
    /// `cos(β + (m-1)θ)`.
    pub lambda: T,
    pub time_sign: TimeSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSpectrum<T> {
    pub location: Cx<T>,
    pub order: usize,
    /// `arg c_m`.
    pub beta: T,
    pub modulus: T,
    /// Sorted ascending by `theta`.
    pub directions: Vec<DefiniteDirection<T>>,
}

impl<T: Real> DirectionSpectrum<T> {
    /// Angular gap `π/(m-1)` between consecutive directions.
    pub fn gap(&self) -> T {
        T::PI() / T::from_usize_lossy(self.order - 1)
    }

    pub fn thetas(&self) -> Vec<T> {
        self.directions.iter().map(|d| d.theta).collect()
    }

    /// Direction closest to `theta` (cyclically) and its angular distance.
    pub fn nearest(&self, theta: T) -> Option<(&DefiniteDirection<T>, T)> {
        self.directions
            .iter()
            .map(|d| (d, crate::scalar::angle_diff(theta, d.theta).abs()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    }
}

fn require_order<T>(eq: &Equilibrium<T>, min: usize) -> Result<(), LocalError> {
    let ok = if min == 1 { eq.order == 1 } else { eq.order >= min };
    if ok {
        Ok(())
    } else {
        Err(LocalError::InvalidOrder {
            expected: if min == 1 { "1" } else { ">= 2" },
            found: eq.order,
        })
    }
}

fn is_negligible<T: Real>(part: T, whole: T) -> bool {
    part.abs() <= T::lit(LINEAR_ZERO_REL) * whole
}

/// Linear classification of a simple equilibrium from `F'(a) = α + iβ`.
pub fn classify_simple<T: Real>(eq: &Equilibrium<T>, f_prime_at_a: Cx<T>) -> Result<SimpleKind, LocalError> {
    require_order(eq, 1)?;
    let modulus = f_prime_at_a.norm();
    if !(modulus > T::zero()) {
        return Err(LocalError::DegenerateDerivative);
    }
    let (alpha, beta) = (f_prime_at_a.re, f_prime_at_a.im);
    let alpha_zero = is_negligible(alpha, modulus);
    let beta_zero = is_negligible(beta, modulus);
    Ok(match (alpha_zero, beta_zero) {
        (true, _) => SimpleKind::CenterOrFocus,
        (false, true) if alpha < T::zero() => SimpleKind::StableNode,
        (false, true) => SimpleKind::UnstableNode,
        (false, false) if alpha < T::zero() => SimpleKind::StableFocus,
        (false, false) => SimpleKind::UnstableFocus,
    })
}

/// Eigenvalues of the real Jacobian at a simple equilibrium: `F'(a)` and its conjugate.
pub fn eigen_pair<T: Real>(f_prime_at_a: Cx<T>) -> (Cx<T>, Cx<T>) {
    (f_prime_at_a, f_prime_at_a.conj())
}

/// Fills in `eq.kind` from the local theory. Centers and foci with
/// `Re F'(a) = 0` stay `CenterOrFocus` until resolved numerically.
pub fn classify_equilibrium<T: Real>(eq: &mut Equilibrium<T>, f: &FunctionModel<T>) -> Result<(), LocalError> {
    eq.kind = if eq.order == 1 {
        let d = f.eval_derivative(eq.location)?;
        EquilibriumKind::Simple(classify_simple(eq, d)?)
    } else {
        EquilibriumKind::EllipticDecomposition {
            sectors: 2 * eq.order - 2,
        }
    };
    Ok(())
}

/// `λ(θ) = cos(β + (m-1)θ)`.
fn lambda_at<T: Real>(beta: T, order: usize, theta: T) -> T {
    (beta + T::from_usize_lossy(order - 1) * theta).cos()
}

/// The `2m-2` definite directions of an equilibrium of order `m ≥ 2`.
pub fn definite_directions<T: Real>(eq: &Equilibrium<T>) -> Result<DirectionSpectrum<T>, LocalError> {
    require_order(eq, 2)?;
    let m = eq.order;
    let beta = eq.leading_coefficient.arg();
    let denom = T::from_usize_lossy(m - 1);
    let mut directions = (0..2 * m - 2)
        .map(|l| {
            let theta = normalize_angle((T::from_usize_lossy(l) * T::PI() - beta) / denom);
            let lambda = lambda_at(beta, m, theta);
            if lambda.abs() < T::lit(LAMBDA_FLOOR) {
                return Err(LocalError::NotADirection {
                    theta: theta.to_f64().unwrap_or(f64::NAN),
                    h: 0.0,
                    lambda: lambda.to_f64().unwrap_or(f64::NAN),
                });
            }
            Ok(DefiniteDirection {
                theta,
                lambda,
                time_sign: if lambda < T::zero() {
                    TimeSign::Forward
                } else {
                    TimeSign::Backward
                },
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    directions.sort_by(|a, b| a.theta.partial_cmp(&b.theta).unwrap_or(std::cmp::Ordering::Equal));
    Ok(DirectionSpectrum {
        location: eq.location,
        order: m,
        beta,
        modulus: eq.leading_coefficient.norm(),
        directions,
    })
}

/// `H(cos θ, sin θ) = cos θ·F₂^[m] - sin θ·F₁^[m]` from the real homogeneous
/// Taylor parts of `F` at `a`.
pub fn h_from_taylor_parts<T: Real>(eq: &Equilibrium<T>, theta: T) -> T {
    let (c, s) = (theta.cos(), theta.sin());
    let (f1, f2) = homogeneous_part(eq.leading_coefficient, eq.order, c, s);
    c * f2 - s * f1
}

/// `H̃(θ) = |c_m| sin(β + (m-1)θ)`, verified against [`h_from_taylor_parts`].
pub fn h_tilde<T: Real>(eq: &Equilibrium<T>, theta: T) -> Result<T, LocalError> {
    require_order(eq, 2)?;
    let cm = eq.leading_coefficient;
    let closed = cm.norm() * (cm.arg() + T::from_usize_lossy(eq.order - 1) * theta).sin();
    let taylor = h_from_taylor_parts(eq, theta);
    if (closed - taylor).abs() > T::lit(CROSS_CHECK_TOLERANCE) * cm.norm().max(T::one()) {
        return Err(LocalError::CrossCheck {
            theta: theta.to_f64().unwrap_or(f64::NAN),
            closed: closed.to_f64().unwrap_or(f64::NAN),
            taylor: taylor.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(closed)
}

/// Polar blow-up of `ż = F(z)` at an equilibrium of order `m` with the
/// time rescale `dτ = ρ^{m-1} dt`.
#[derive(Debug, Clone)]
pub struct BlowupSystem<'a, T> {
    f: &'a FunctionModel<T>,
    center: Cx<T>,
    order: usize,
    jet: Jet<T>,
}

impl<T: Real> BlowupSystem<'_, T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn center(&self) -> Cx<T> {
        self.center
    }

    /// `(ρ', θ')` at `(ρ, θ)`; continuous through `ρ = 0` where it equals `(0, H̃(θ))`.
    pub fn rhs(&self, rho: T, theta: T) -> Result<(T, T), EvalError> {
        let unit = Complex::from_polar(T::one(), theta);
        if rho.abs() < T::lit(JET_SWITCH_RADIUS) {
            // F/ρ^m = e^{imθ} Σ_{k≥m} c_k (ρe^{iθ})^{k-m}
            let h = unit * rho;
            let tail = self.jet.coefficients()[self.order..]
                .iter()
                .rev()
                .fold(Complex::new(T::zero(), T::zero()), |acc, c| acc * h + c);
            let w = tail * unit.powu(self.order as u32) * unit.conj();
            return Ok((rho * w.re, w.im));
        }
        let w = self.f.eval(self.center + unit * rho)? * unit.conj();
        let rho_m1 = rho.powi(self.order as i32 - 1);
        Ok((w.re / rho_m1, w.im / (rho_m1 * rho)))
    }

    /// Central finite-difference Jacobian `∂(ρ', θ')/∂(ρ, θ)`.
    pub fn jacobian_fd(&self, rho: T, theta: T, step: T) -> Result<[[T; 2]; 2], EvalError> {
        let two = T::lit(2.0) * step;
        let (rp, tp) = self.rhs(rho + step, theta)?;
        let (rm, tm) = self.rhs(rho - step, theta)?;
        let (rq, tq) = self.rhs(rho, theta + step)?;
        let (rn, tn) = self.rhs(rho, theta - step)?;
        Ok([
            [(rp - rm) / two, (rq - rn) / two],
            [(tp - tm) / two, (tq - tn) / two],
        ])
    }
}

pub fn blowup<'a, T: Real>(eq: &Equilibrium<T>, f: &'a FunctionModel<T>) -> Result<BlowupSystem<'a, T>, LocalError> {
    if eq.order == 0 {
        return Err(LocalError::InvalidOrder {
            expected: ">= 1",
            found: 0,
        });
    }
    let jet = f.jet(eq.location, DEFAULT_JET_ORDER.max(eq.order + 1))?;
    Ok(BlowupSystem {
        f,
        center: eq.location,
        order: eq.order,
        jet,
    })
}

/// Eigenvalues `(λ₁, λ₂ = (m-1)λ₁)` of the blow-up linearization at `(0, θ₀)`.
pub fn blowup_linearization<T: Real>(eq: &Equilibrium<T>, theta0: T) -> Result<(T, T), LocalError> {
    require_order(eq, 2)?;
    let h = h_tilde(eq, theta0)?;
    let cm = eq.leading_coefficient;
    let lambda1 = cm.norm() * lambda_at(cm.arg(), eq.order, theta0);
    if h.abs() > T::lit(DIRECTION_TOLERANCE) || lambda1.abs() < T::lit(LAMBDA_FLOOR) {
        return Err(LocalError::NotADirection {
            theta: theta0.to_f64().unwrap_or(f64::NAN),
            h: h.to_f64().unwrap_or(f64::NAN),
            lambda: lambda1.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((lambda1, T::from_usize_lossy(eq.order - 1) * lambda1))
}

/// [`blowup_linearization`] confirmed against the real eigenvalues of a
/// central-difference Jacobian of the blow-up at `(0, θ₀)`.
pub fn blowup_linearization_checked<T: Real>(
    eq: &Equilibrium<T>,
    f: &FunctionModel<T>,
    theta0: T,
) -> Result<(T, T), LocalError> {
    let (l1, l2) = blowup_linearization(eq, theta0)?;
    let (step, tol) = fd_parameters::<T>();
    let jac = blowup(eq, f)?.jacobian_fd(T::zero(), theta0, step)?;
    let mut expected = [l1, l2];
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let agree = real_eigenvalues_2x2(jac).is_some_and(|(e1, e2)| {
        (e1 - expected[0]).abs() <= tol * expected[0].abs() && (e2 - expected[1]).abs() <= tol * expected[1].abs()
    });
    if !agree {
        return Err(LocalError::LinearizationMismatch {
            theta: theta0.to_f64().unwrap_or(f64::NAN),
            closed: [l1.to_f64().unwrap_or(f64::NAN), l2.to_f64().unwrap_or(f64::NAN)],
        });
    }
    Ok((l1, l2))
}

/// Finite-difference step and relative tolerance: `(1e-5, 1e-5)` in double
/// precision, cube-root-of-epsilon based otherwise.
fn fd_parameters<T: Real>() -> (T, T) {
    let eps = T::epsilon();
    if eps < T::lit(1e-12) {
        (T::lit(1e-5), T::lit(1e-5))
    } else {
        let h = eps.cbrt();
        (h, h * T::lit(10.0))
    }
}

/// Real eigenvalues of a 2×2 matrix in ascending order, `None` if complex.
pub fn real_eigenvalues_2x2<T: Real>(m: [[T; 2]; 2]) -> Option<(T, T)> {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = tr / T::lit(2.0);
    let disc = half * half - det;
    let scale = half * half + det.abs();
    if disc < -T::lit(1e-12) * scale {
        return None;
    }
    let root = disc.max(T::zero()).sqrt();
    Some((half - root, half + root))
}
