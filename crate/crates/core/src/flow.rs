//! Adaptive integration of `ż = F(z)` with event detection.
//!
//! The stepper is the Dormand-Prince 5(4) pair with a PI step-size
//! controller. Orbits are advanced in a rescaled time `τ` with
//!
//! ```text
//! dz/dτ = σ(z) F(z),   dt/dτ = σ(z),   σ(z) = 1 + Σ |z - a|^{-(m_a - 1)},
//! ```
//!
//! the sum running over equilibria of order `m_a ≥ 2`. Near such an
//! equilibrium this is the blow-up rescale `dτ = ρ^{m-1} dt`, which turns
//! the algebraic approach into an exponential one. Physical time `t` is
//! integrated alongside and reported in [`Orbit::times`]; the time budget
//! [`IntegrationConfig::max_time`] is measured in `τ`.

use num_complex::Complex;
use thiserror::Error;

use crate::equilibria::Equilibrium;
use crate::expr::{EvalError, FunctionModel};
use crate::scalar::{angle_diff, normalize_angle, Cx, Real};

/// Window for the approach-angle fit.
const ANGLE_FIT_SAMPLES: usize = 20;
/// Window for the growth-exponent fit used to recognize finite-time blow-up.
const GROWTH_FIT_SAMPLES: usize = 10;
/// Growth exponent above which an escaping orbit counts as blowing up.
const BLOWUP_EXPONENT: f64 = 1.05;
/// Fraction of `|z - a|` a step may cover near an order-≥2 equilibrium.
const NEAR_STEP_FRACTION: f64 = 0.1;
const CLOSURE_REL: f64 = 1e-6;
const CLOSURE_ANGLE: f64 = 1e-3;
const CROSSING_BISECTIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Budget in rescaled time `τ`.
    pub max_time: T,
    pub escape_radius: T,
    /// Center of the escape disk.
    pub escape_center: Cx<T>,
    pub equilibrium_capture_radius: T,
    pub min_step: T,
    pub max_samples: usize,
}

impl<T: Real> Default for IntegrationConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-9),
            abs_tol: T::lit(1e-12),
            max_time: T::lit(200.0),
            escape_radius: T::lit(10.0),
            escape_center: Complex::new(T::zero(), T::zero()),
            equilibrium_capture_radius: T::lit(1e-7),
            min_step: T::lit(1e-13),
            max_samples: 2_000_000,
        }
    }
}

impl<T: Real> IntegrationConfig<T> {
    pub fn validate(&self) -> Result<(), FlowError> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_time", self.max_time),
            ("escape_radius", self.escape_radius),
            ("equilibrium_capture_radius", self.equilibrium_capture_radius),
            ("min_step", self.min_step),
        ];
        for (name, value) in positive {
            if !(value > T::zero() && value.is_finite()) {
                return Err(FlowError::InvalidConfig(format!("{name} must be positive and finite")));
            }
        }
        if self.rel_tol < T::lit(1e-13) {
            return Err(FlowError::InvalidConfig("rel_tol must be at least 1e-13".into()));
        }
        if self.max_samples < 2 {
            return Err(FlowError::InvalidConfig("max_samples must be at least 2".into()));
        }
        if !crate::scalar::is_finite(self.escape_center) {
            return Err(FlowError::InvalidConfig("escape_center must be finite".into()));
        }
        Ok(())
    }

    /// Scale-aware capture radius `max(r, 1e-9 |a| + 1e-12)`.
    pub fn capture_radius(&self, a: Cx<T>) -> T {
        self.equilibrium_capture_radius
            .max(T::lit(1e-9) * a.norm() + T::lit(1e-12))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminationEvent<T> {
    /// `equilibrium` indexes the slice passed to [`integrate`].
    CapturedByEquilibrium { equilibrium: usize, approach_angle: T },
    Escaped,
    PeriodClosed { period: T },
    TimeBudgetExhausted,
    /// `t_star` is rounded to one significant digit.
    BlowupInFiniteTime { t_star: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit<T> {
    pub seed: Cx<T>,
    pub direction: Direction,
    /// Elapsed physical time `|t|`, ascending.
    pub times: Vec<T>,
    pub points: Vec<Cx<T>>,
    pub termination: TerminationEvent<T>,
}

impl<T: Real> Orbit<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last_point(&self) -> Cx<T> {
        *self.points.last().expect("orbit has at least the seed")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("invalid integration config: {0}")]
    InvalidConfig(String),
    #[error("seed lies within the capture radius of equilibrium {0}")]
    SeedAtEquilibrium(usize),
    #[error("step size fell below min_step at t = {time} without an event")]
    StepUnderflow { time: f64, point: [f64; 2] },
    #[error("orbit did not return to the transversal within the budget")]
    NoReturn,
    #[error("field is tangent to the transversal at the start point")]
    TangentTransversal,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn to_pair<T: Real>(z: Cx<T>) -> [f64; 2] {
    [z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN)]
}

/// Rescaled field `(σ s F, σ)` with `s = ±1`.
struct Field<'a, T> {
    f: &'a FunctionModel<T>,
    sign: T,
    /// Order-≥2 equilibria as `(a, m - 1)`.
    singular: Vec<(Cx<T>, i32)>,
}

impl<T: Real> Field<'_, T> {
    fn sigma(&self, z: Cx<T>) -> T {
        self.singular
            .iter()
            .fold(T::one(), |s, (a, k)| s + (z - a).norm().powi(-k))
    }

    fn eval(&self, z: Cx<T>) -> Result<(Cx<T>, T), EvalError> {
        let sigma = self.sigma(z);
        let v = self.f.eval(z)? * (self.sign * sigma);
        if !crate::scalar::is_finite(v) || !sigma.is_finite() {
            return Err(EvalError::NonFinite);
        }
        Ok((v, sigma))
    }

    /// Distance-based cap on `τ`-steps near order-≥2 equilibria.
    fn step_cap(&self, z: Cx<T>, v: Cx<T>) -> T {
        let speed = v.norm();
        if speed == T::zero() {
            return T::infinity();
        }
        self.singular
            .iter()
            .map(|(a, _)| T::lit(NEAR_STEP_FRACTION) * (z - a).norm() / speed)
            .fold(T::infinity(), T::min)
    }
}

#[derive(Debug, Clone, Copy)]
struct State<T> {
    z: Cx<T>,
    t: T,
    tau: T,
    /// `dz/dτ` and `dt/dτ` at `z`.
    k: Cx<T>,
    s: T,
}

struct Trial<T> {
    state: State<T>,
    err: T,
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand-Prince step of size `h` from `st`, with the embedded error
/// estimate measured in the mixed norm.
fn rk_step<T: Real>(field: &Field<'_, T>, st: &State<T>, h: T, rel: T, abs: T) -> Result<Trial<T>, EvalError> {
    let mut kz = [st.k; 7];
    let mut ks = [st.s; 7];
    let mut z_new = st.z;
    let mut t_new = st.t;
    for i in 1..7 {
        let mut dz = Complex::new(T::zero(), T::zero());
        let mut ds = T::zero();
        for j in 0..i {
            let a = T::lit(A[i][j]);
            if A[i][j] != 0.0 {
                dz = dz + kz[j] * a;
                ds = ds + ks[j] * a;
            }
        }
        let zi = st.z + dz * h;
        let (k, s) = field.eval(zi)?;
        kz[i] = k;
        ks[i] = s;
        if i == 6 {
            z_new = zi;
            t_new = st.t + ds * h;
        }
    }
    let mut err = Complex::new(T::zero(), T::zero());
    for i in 0..7 {
        if E[i] != 0.0 {
            err = err + kz[i] * T::lit(E[i]);
        }
    }
    err = err * h;
    let sc_re = abs + rel * st.z.re.abs().max(z_new.re.abs());
    let sc_im = abs + rel * st.z.im.abs().max(z_new.im.abs());
    let (er, ei) = (err.re / sc_re, err.im / sc_im);
    let norm = ((er * er + ei * ei) / T::lit(2.0)).sqrt();
    Ok(Trial {
        state: State {
            z: z_new,
            t: t_new,
            tau: st.tau + h,
            k: kz[6],
            s: ks[6],
        },
        err: norm,
    })
}

/// Adaptive driver around [`rk_step`].
struct Stepper<'a, T> {
    field: Field<'a, T>,
    rel: T,
    abs: T,
    min_step: T,
    state: State<T>,
    h: T,
    err_prev: T,
}

enum Advance<T> {
    Accepted { from: State<T>, h: T },
    Underflow,
}

impl<'a, T: Real> Stepper<'a, T> {
    fn new(field: Field<'a, T>, z: Cx<T>, rel: T, abs: T, min_step: T) -> Result<Self, EvalError> {
        let (k, s) = field.eval(z)?;
        let state = State {
            z,
            t: T::zero(),
            tau: T::zero(),
            k,
            s,
        };
        let h = Self::initial_step(&field, &state, rel, abs).max(min_step);
        Ok(Self {
            field,
            rel,
            abs,
            min_step,
            state,
            h,
            err_prev: T::lit(1e-4),
        })
    }

    fn initial_step(field: &Field<'_, T>, st: &State<T>, rel: T, abs: T) -> T {
        let sc = abs + rel * st.z.norm();
        let d0 = st.z.norm() / sc;
        let d1 = st.k.norm() / sc;
        let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        let d2 = match field.eval(st.z + st.k * h0) {
            Ok((k1, _)) => (k1 - st.k).norm() / sc / h0,
            Err(_) => return h0 * T::lit(1e-3),
        };
        let dm = d1.max(d2);
        let h1 = if dm <= T::lit(1e-15) {
            T::lit(1e-6).max(h0 * T::lit(1e-3))
        } else {
            (T::lit(0.01) / dm).powf(T::lit(0.2))
        };
        (h0 * T::lit(100.0)).min(h1)
    }

    /// Re-takes a step of size `h` from `from` without touching the stepper.
    fn retake(&self, from: &State<T>, h: T) -> Result<State<T>, EvalError> {
        rk_step(&self.field, from, h, self.rel, self.abs).map(|t| t.state)
    }

    /// Advances by one accepted step no longer than `cap`.
    fn advance(&mut self, cap: T) -> Advance<T> {
        const SAFE: f64 = 0.9;
        const BETA: f64 = 0.04;
        const EXPO: f64 = 0.2 - BETA * 0.75;
        const FAC_MIN: f64 = 0.2;
        const FAC_MAX: f64 = 10.0;
        let local = self.field.step_cap(self.state.z, self.state.k);
        loop {
            let h = self.h.min(cap).min(local);
            if h < self.min_step || !(h > T::zero()) {
                return Advance::Underflow;
            }
            match rk_step(&self.field, &self.state, h, self.rel, self.abs) {
                Ok(trial) if trial.err <= T::one() && trial.err.is_finite() => {
                    let fac11 = trial.err.powf(T::lit(EXPO));
                    let fac = (fac11 / self.err_prev.powf(T::lit(BETA)) / T::lit(SAFE))
                        .max(T::lit(1.0 / FAC_MAX))
                        .min(T::lit(1.0 / FAC_MIN));
                    self.err_prev = trial.err.max(T::lit(1e-4));
                    let from = self.state;
                    self.state = trial.state;
                    self.h = h / fac;
                    return Advance::Accepted { from, h };
                }
                Ok(trial) if trial.err.is_finite() => {
                    let fac11 = trial.err.powf(T::lit(EXPO));
                    self.h = h / (fac11 / T::lit(SAFE)).min(T::lit(1.0 / FAC_MIN));
                }
                _ => self.h = h * T::lit(0.25),
            }
        }
    }
}

fn singular_set<T: Real>(equilibria: &[Equilibrium<T>]) -> Vec<(Cx<T>, i32)> {
    equilibria
        .iter()
        .filter(|e| e.order >= 2)
        .map(|e| (e.location, e.order as i32 - 1))
        .collect()
}

/// Least-squares line through the unwrapped angles of the last samples,
/// evaluated at the final sample.
fn approach_angle<T: Real>(points: &[Cx<T>], a: Cx<T>) -> T {
    let tail = &points[points.len().saturating_sub(ANGLE_FIT_SAMPLES)..];
    let mut angles = Vec::with_capacity(tail.len());
    for p in tail {
        let phi = (p - a).arg();
        let unwrapped = match angles.last() {
            Some(&prev) => prev + angle_diff(phi, prev),
            None => phi,
        };
        angles.push(unwrapped);
    }
    let n = T::from_usize_lossy(angles.len());
    if angles.len() < 2 {
        return normalize_angle(angles[0]);
    }
    let mean_x = (n - T::one()) / T::lit(2.0);
    let mean_y = angles.iter().fold(T::zero(), |s, &y| s + y) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (i, &y) in angles.iter().enumerate() {
        let dx = T::from_usize_lossy(i) - mean_x;
        sxy = sxy + dx * (y - mean_y);
        sxx = sxx + dx * dx;
    }
    let slope = sxy / sxx;
    normalize_angle(mean_y + slope * (n - T::one() - mean_x))
}

/// Slope of `log |F|` against `log |z - c|` over the last samples, if the
/// distance is strictly increasing there.
fn growth_exponent<T: Real>(f: &FunctionModel<T>, points: &[Cx<T>], center: Cx<T>) -> Option<T> {
    let tail = &points[points.len().saturating_sub(GROWTH_FIT_SAMPLES)..];
    if tail.len() < 3 {
        return None;
    }
    let mut xs = Vec::with_capacity(tail.len());
    let mut ys = Vec::with_capacity(tail.len());
    for p in tail {
        let r = (p - center).norm();
        let v = f.eval(*p).ok()?.norm();
        if !(r > T::zero() && v > T::zero()) {
            return None;
        }
        xs.push(r.ln());
        ys.push(v.ln());
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return None;
    }
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().fold(T::zero(), |s, &x| s + x) / n;
    let my = ys.iter().fold(T::zero(), |s, &y| s + y) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (x, y) in xs.iter().zip(&ys) {
        sxy = sxy + (*x - mx) * (*y - my);
        sxx = sxx + (*x - mx) * (*x - mx);
    }
    (sxx > T::zero()).then(|| sxy / sxx)
}

/// Rounds to one significant digit.
pub fn round_one_significant<T: Real>(x: T) -> T {
    if x == T::zero() || !x.is_finite() {
        return x;
    }
    let scale = T::lit(10.0).powf(x.abs().log10().floor());
    (x / scale).round() * scale
}

/// Remaining time to blow-up for `|ż| ~ C |z|^p`: `|z| / ((p - 1) |F|)`.
fn blowup_time<T: Real>(f: &FunctionModel<T>, z: Cx<T>, center: Cx<T>, t: T, p: T) -> T {
    let speed = f.eval(z).map(|v| v.norm()).unwrap_or(T::infinity());
    let remaining = (z - center).norm() / ((p - T::one()) * speed);
    round_one_significant(t + remaining)
}

/// Integrates `ż = ±F(z)` from `seed` until the first termination event.
///
/// `equilibria` are used for capture detection and for the time rescale;
/// the captured index in the result refers to this slice.
pub fn integrate<T: Real>(
    f: &FunctionModel<T>,
    seed: Cx<T>,
    direction: Direction,
    cfg: &IntegrationConfig<T>,
    equilibria: &[Equilibrium<T>],
) -> Result<Orbit<T>, FlowError> {
    cfg.validate()?;
    let radii: Vec<T> = equilibria.iter().map(|e| cfg.capture_radius(e.location)).collect();
    if let Some(i) = equilibria
        .iter()
        .zip(&radii)
        .position(|(e, r)| (seed - e.location).norm() <= *r)
    {
        return Err(FlowError::SeedAtEquilibrium(i));
    }
    let sign = match direction {
        Direction::Forward => T::one(),
        Direction::Backward => -T::one(),
    };
    let field = Field {
        f,
        sign,
        singular: singular_set(equilibria),
    };
    let mut stepper = Stepper::new(field, seed, cfg.rel_tol, cfg.abs_tol, cfg.min_step)?;
    let v0 = f.eval(seed)? * sign;
    let transversal = |z: Cx<T>| ((z - seed) * v0.conj()).re;
    let closure = T::lit(CLOSURE_REL) * (T::one() + seed.norm());

    let mut times = vec![T::zero()];
    let mut points = vec![seed];
    let mut g_prev = T::zero();
    let finish = |times: Vec<T>, points: Vec<Cx<T>>, termination| Orbit {
        seed,
        direction,
        times,
        points,
        termination,
    };

    loop {
        let remaining = cfg.max_time - stepper.state.tau;
        if !(remaining > T::zero()) || points.len() >= cfg.max_samples {
            return Ok(finish(times, points, TerminationEvent::TimeBudgetExhausted));
        }
        let (from, h) = match stepper.advance(remaining) {
            Advance::Accepted { from, h } => (from, h),
            Advance::Underflow => {
                let st = stepper.state;
                return match growth_exponent(f, &points, cfg.escape_center) {
                    Some(p) if p > T::lit(BLOWUP_EXPONENT) => {
                        let t_star = blowup_time(f, st.z, cfg.escape_center, st.t, p);
                        Ok(finish(times, points, TerminationEvent::BlowupInFiniteTime { t_star }))
                    }
                    _ => Err(FlowError::StepUnderflow {
                        time: st.t.to_f64().unwrap_or(f64::NAN),
                        point: to_pair(st.z),
                    }),
                };
            }
        };
        let st = stepper.state;

        let g_new = transversal(st.z);
        if g_prev < T::zero() && g_new >= T::zero() {
            let crossing = locate_crossing(&stepper, &from, h, g_prev, &transversal)?;
            if (crossing.z - seed).norm() <= closure {
                let v = f.eval(crossing.z)? * sign;
                if angle_diff(v.arg(), v0.arg()).abs() <= T::lit(CLOSURE_ANGLE) {
                    times.push(crossing.t);
                    points.push(crossing.z);
                    return Ok(finish(times, points, TerminationEvent::PeriodClosed { period: crossing.t }));
                }
            }
        }
        g_prev = g_new;
        times.push(st.t);
        points.push(st.z);

        if let Some(i) = equilibria
            .iter()
            .zip(&radii)
            .position(|(e, r)| (st.z - e.location).norm() <= *r)
        {
            let approach_angle = approach_angle(&points, equilibria[i].location);
            return Ok(finish(
                times,
                points,
                TerminationEvent::CapturedByEquilibrium {
                    equilibrium: i,
                    approach_angle,
                },
            ));
        }
        if (st.z - cfg.escape_center).norm() > cfg.escape_radius {
            let event = match growth_exponent(f, &points, cfg.escape_center) {
                Some(p) if p > T::lit(BLOWUP_EXPONENT) => TerminationEvent::BlowupInFiniteTime {
                    t_star: blowup_time(f, st.z, cfg.escape_center, st.t, p),
                },
                _ => TerminationEvent::Escaped,
            };
            return Ok(finish(times, points, event));
        }
    }
}

/// Bisection on the step fraction for the zero of `g` inside the step
/// `from → from + h`, where `g(from) = g_from` has the opposite sign of the
/// endpoint.
fn locate_crossing<T: Real, G: Fn(Cx<T>) -> T>(
    stepper: &Stepper<'_, T>,
    from: &State<T>,
    h: T,
    g_from: T,
    g: &G,
) -> Result<State<T>, FlowError> {
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut best = stepper.state;
    let lo_sign = g_from.signum();
    let tol = T::lit(1e-12) * (T::one() + from.z.norm());
    for _ in 0..CROSSING_BISECTIONS {
        let mid = (lo + hi) / T::lit(2.0);
        let st = stepper.retake(from, h * mid)?;
        let gm = g(st.z);
        best = st;
        if gm.abs() <= tol * from.k.norm().max(T::one()) || hi - lo <= T::epsilon() {
            break;
        }
        if gm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Signed radial displacement of the first return to the ray
/// `{a + s e^{iθ} : s > 0}` of the orbit started at `a + r e^{iθ}`.
pub fn poincare_return<T: Real>(
    f: &FunctionModel<T>,
    center: Cx<T>,
    theta: T,
    start_radius: T,
    cfg: &IntegrationConfig<T>,
) -> Result<T, FlowError> {
    cfg.validate()?;
    let u = Complex::from_polar(T::one(), theta);
    let seed = center + u * start_radius;
    let along = |z: Cx<T>| (z - center) * u.conj();
    let g = |z: Cx<T>| along(z).im;
    let orientation = (f.eval(seed)? * u.conj()).im;
    if orientation == T::zero() {
        return Err(FlowError::TangentTransversal);
    }
    let rel = cfg.rel_tol.min(T::lit(1e-11));
    let abs = cfg.abs_tol.min(T::lit(1e-13) * start_radius);
    let field = Field {
        f,
        sign: T::one(),
        singular: Vec::new(),
    };
    let mut stepper = Stepper::new(field, seed, rel, abs, cfg.min_step)?;
    let mut g_prev = T::zero();
    let mut samples = 1usize;
    loop {
        let remaining = cfg.max_time - stepper.state.tau;
        if !(remaining > T::zero()) || samples >= cfg.max_samples {
            return Err(FlowError::NoReturn);
        }
        let (from, h) = match stepper.advance(remaining) {
            Advance::Accepted { from, h } => (from, h),
            Advance::Underflow => return Err(FlowError::NoReturn),
        };
        samples += 1;
        let z = stepper.state.z;
        if (z - cfg.escape_center).norm() > cfg.escape_radius {
            return Err(FlowError::NoReturn);
        }
        let g_new = g(z);
        let returned = g_prev * orientation < T::zero() && g_new * orientation >= T::zero();
        if returned && along(z).re > T::zero() {
            let st = locate_crossing(&stepper, &from, h, g_prev, &g)?;
            return Ok(along(st.z).re - start_radius);
        }
        g_prev = g_new;
    }
}

/// Fixed-step Dormand-Prince integration of `ż = F(z)` over `[0, t_end]`
/// in `n` equal steps, without rescaling or events.
pub fn integrate_fixed_steps<T: Real>(
    f: &FunctionModel<T>,
    seed: Cx<T>,
    t_end: T,
    n: usize,
) -> Result<Cx<T>, EvalError> {
    let field = Field {
        f,
        sign: T::one(),
        singular: Vec::new(),
    };
    let (k, s) = field.eval(seed)?;
    let mut st = State {
        z: seed,
        t: T::zero(),
        tau: T::zero(),
        k,
        s,
    };
    let h = t_end / T::from_usize_lossy(n.max(1));
    for _ in 0..n.max(1) {
        st = rk_step(&field, &st, h, T::one(), T::one())?.state;
    }
    Ok(st.z)
}

/// Adaptive integration of `ż = F(z)` to exactly `t_end`, returning the end
/// point and the number of accepted steps.
pub fn integrate_to<T: Real>(
    f: &FunctionModel<T>,
    seed: Cx<T>,
    t_end: T,
    cfg: &IntegrationConfig<T>,
) -> Result<(Cx<T>, usize), FlowError> {
    cfg.validate()?;
    let field = Field {
        f,
        sign: T::one(),
        singular: Vec::new(),
    };
    let mut stepper = Stepper::new(field, seed, cfg.rel_tol, cfg.abs_tol, cfg.min_step)?;
    let mut steps = 0;
    while stepper.state.tau < t_end {
        let remaining = t_end - stepper.state.tau;
        if remaining <= T::epsilon() * t_end.abs() {
            break;
        }
        match stepper.advance(remaining) {
            Advance::Accepted { .. } => steps += 1,
            Advance::Underflow => {
                return Err(FlowError::StepUnderflow {
                    time: stepper.state.t.to_f64().unwrap_or(f64::NAN),
                    point: to_pair(stepper.state.z),
                })
            }
        }
    }
    Ok((stepper.state.z, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::equilibrium_at;
    use std::f64::consts::{PI, TAU};

    fn model(src: &str) -> FunctionModel<f64> {
        FunctionModel::parse(src).unwrap()
    }

    fn cx(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn at(f: &FunctionModel<f64>, points: &[Complex<f64>]) -> Vec<Equilibrium<f64>> {
        points.iter().map(|a| equilibrium_at(f, *a).unwrap()).collect()
    }

    #[test]
    fn rotation_closes_after_one_period() {
        let f = model("i*z");
        let eqs = at(&f, &[cx(0.0, 0.0)]);
        let orbit = integrate(&f, cx(1.0, 0.0), Direction::Forward, &IntegrationConfig::default(), &eqs).unwrap();
        match orbit.termination {
            TerminationEvent::PeriodClosed { period } => assert!((period - TAU).abs() < 1e-6, "{period}"),
            other => panic!("{other:?}"),
        }
        for p in &orbit.points {
            assert!((p.norm() - 1.0).abs() < 1e-8);
        }
        assert_eq!(orbit.points[0], cx(1.0, 0.0));
        assert_eq!(orbit.times[0], 0.0);
        assert!(orbit.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn quadratic_field_captures_from_the_left() {
        let f = model("z^2");
        let eqs = at(&f, &[cx(0.0, 0.0)]);
        let cfg = IntegrationConfig::default();
        let orbit = integrate(&f, cx(-0.5, 0.0), Direction::Forward, &cfg, &eqs).unwrap();
        match orbit.termination {
            TerminationEvent::CapturedByEquilibrium { equilibrium, approach_angle } => {
                assert_eq!(equilibrium, 0);
                assert!((approach_angle - PI).abs() < 1e-3);
            }
            other => panic!("{other:?}"),
        }
        assert!(orbit.last_point().norm() <= cfg.capture_radius(cx(0.0, 0.0)));
        // physical time follows z(t) = z0 / (1 - t z0)
        for (t, z) in orbit.times.iter().zip(&orbit.points).step_by(7) {
            let exact = -0.5 / (1.0 + 0.5 * t);
            assert!((z.re - exact).abs() <= 1e-6 * exact.abs(), "t={t} z={z} exact={exact}");
        }
        let mods: Vec<f64> = orbit.points.iter().rev().take(10).map(|z| z.norm_sqr()).collect();
        assert!(mods.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn quadratic_field_blows_up_to_the_right() {
        let f = model("z^2");
        let eqs = at(&f, &[cx(0.0, 0.0)]);
        let orbit = integrate(&f, cx(0.5, 0.0), Direction::Forward, &IntegrationConfig::default(), &eqs).unwrap();
        match orbit.termination {
            TerminationEvent::BlowupInFiniteTime { t_star } => assert_eq!(t_star, 2.0),
            other => panic!("{other:?}"),
        }
        let back = integrate(&f, cx(0.5, 0.0), Direction::Backward, &IntegrationConfig::default(), &eqs).unwrap();
        match back.termination {
            TerminationEvent::CapturedByEquilibrium { approach_angle, .. } => {
                assert!(angle_diff(approach_angle, 0.0).abs() < 1e-3)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn linear_field_escapes_without_blowup() {
        let f = model("z");
        let eqs = at(&f, &[cx(0.0, 0.0)]);
        let orbit = integrate(&f, cx(0.5, 0.5), Direction::Forward, &IntegrationConfig::default(), &eqs).unwrap();
        assert_eq!(orbit.termination, TerminationEvent::Escaped);
    }

    #[test]
    fn budget_is_reported() {
        let f = model("i*z");
        let cfg = IntegrationConfig {
            max_time: 1.0,
            ..IntegrationConfig::default()
        };
        let orbit = integrate(&f, cx(1.0, 0.0), Direction::Forward, &cfg, &[]).unwrap();
        assert_eq!(orbit.termination, TerminationEvent::TimeBudgetExhausted);
    }

    #[test]
    fn seeds_at_equilibria_and_bad_configs_are_rejected() {
        let f = model("z");
        let eqs = at(&f, &[cx(0.0, 0.0)]);
        let cfg = IntegrationConfig::default();
        assert_eq!(
            integrate(&f, cx(1e-8, 0.0), Direction::Forward, &cfg, &eqs),
            Err(FlowError::SeedAtEquilibrium(0))
        );
        let bad = IntegrationConfig {
            rel_tol: 1e-14,
            ..cfg
        };
        assert!(matches!(bad.validate(), Err(FlowError::InvalidConfig(_))));
    }

    #[test]
    fn return_map_examples() {
        let cfg = IntegrationConfig::default();
        let d = poincare_return(&model("i*z"), cx(0.0, 0.0), 0.0, 0.5, &cfg).unwrap();
        assert!(d.abs() < 1e-9, "{d}");
        let d = poincare_return(&model("i*z"), cx(0.0, 0.0), PI / 2.0, 0.25, &cfg).unwrap();
        assert!(d.abs() < 1e-9, "{d}");
        let d = poincare_return(&model("(i-0.01)*z"), cx(0.0, 0.0), 0.0, 0.5, &cfg).unwrap();
        let exact = 0.5 * ((-0.02 * PI).exp() - 1.0);
        assert!(d < 0.0 && (d - exact).abs() < 1e-8, "{d} vs {exact}");
    }

    #[test]
    fn return_map_fails_for_nodes() {
        let cfg = IntegrationConfig::default();
        assert_eq!(
            poincare_return(&model("-z"), cx(0.0, 0.0), 0.0, 0.5, &cfg),
            Err(FlowError::TangentTransversal)
        );
        let short = IntegrationConfig {
            max_time: 1.0,
            ..cfg
        };
        assert_eq!(
            poincare_return(&model("i*z"), cx(0.0, 0.0), 0.0, 0.5, &short),
            Err(FlowError::NoReturn)
        );
    }

    #[test]
    fn rounding_to_one_digit() {
        assert_eq!(round_one_significant(1.9999), 2.0);
        assert_eq!(round_one_significant(0.0347), 0.03);
        assert_eq!(round_one_significant(0.0), 0.0);
    }
}
