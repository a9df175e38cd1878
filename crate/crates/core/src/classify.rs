//! Global verdicts: center resolution, limit sets of orbits, connection
//! types, elliptic-sector witnesses and the bounded-orbit trichotomy check.

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::equilibria::{Equilibrium, Region};
use crate::expr::FunctionModel;
use crate::flow::{integrate, poincare_return, Direction, FlowError, IntegrationConfig, Orbit, TerminationEvent};
use crate::local::{DirectionSpectrum, EquilibriumKind, LocalError, SimpleKind};
use crate::scalar::{angle_diff, Cx, Real};

/// Radii of the return-map test, as fractions of the local scale.
pub const CENTER_RADII: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// `|δ| ≤ CENTER_REL · r` counts as a closed return.
pub const CENTER_REL: f64 = 1e-8;
pub const WITNESS_START_FRACTION: f64 = 0.05;
pub const WITNESS_DISK_FACTOR: f64 = 20.0;
pub const WITNESS_PROBES: usize = 5;
pub const WITNESS_HALVINGS: usize = 6;
/// Offsets of the inward probes toward an enclosed center.
pub const INWARD_OFFSETS: [f64; 3] = [0.1, 0.2, 0.3];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("equilibrium is not a center-or-focus candidate")]
    NotCenterOrFocus,
    #[error("return displacements are inconsistent across radii: {displacements:?}")]
    Inconclusive { displacements: Vec<[f64; 2]> },
    #[error("elliptic-sector witness failed in sector {sector} at radius {radius}")]
    WitnessFailed {
        sector: usize,
        radius: f64,
        witness: Box<FedWitness<f64>>,
    },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Local(#[from] LocalError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Approach<T> {
    Direction(T),
    Spiral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnknownReason {
    TimeBudget,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitDescriptor<T> {
    /// `equilibrium` indexes the equilibrium slice given to the classifier.
    SingleEquilibrium { equilibrium: usize, approach: Approach<T> },
    PeriodicSelf { period: T },
    Escapes,
    Unknown(UnknownReason),
}

impl<T> LimitDescriptor<T> {
    pub fn equilibrium(&self) -> Option<usize> {
        match self {
            LimitDescriptor::SingleEquilibrium { equilibrium, .. } => Some(*equilibrium),
            _ => None,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, LimitDescriptor::PeriodicSelf { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitVerdict<T> {
    pub omega: LimitDescriptor<T>,
    pub alpha: LimitDescriptor<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConnectionType {
    Homoclinic(usize),
    Heteroclinic { from: usize, to: usize },
    NotAConnection,
}

pub fn connection_type<T>(verdict: &LimitVerdict<T>) -> ConnectionType {
    match (verdict.alpha.equilibrium(), verdict.omega.equilibrium()) {
        (Some(a), Some(w)) if a == w => ConnectionType::Homoclinic(a),
        (Some(from), Some(to)) => ConnectionType::Heteroclinic { from, to },
        _ => ConnectionType::NotAConnection,
    }
}

/// Outcome of the return-map test at one equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterResolution<T> {
    /// [`SimpleKind::Center`] or [`SimpleKind::Focus`].
    pub kind: SimpleKind,
    /// `Some(true)` for an attracting focus.
    pub stable: Option<bool>,
    /// `(radius, displacement)` pairs.
    pub displacements: Vec<(T, T)>,
}

/// Distance from `a` to the nearest other equilibrium or to the region boundary.
pub fn local_scale<T: Real>(a: Cx<T>, equilibria: &[Equilibrium<T>], region: &Region<T>) -> T {
    equilibria
        .iter()
        .filter(|e| e.location != a)
        .map(|e| (e.location - a).norm())
        .fold(region.distance_to_boundary(a), T::min)
}

/// Center-or-focus decision for an equilibrium classified `CenterOrFocus`.
pub fn resolve_center<T: Real>(
    eq: &Equilibrium<T>,
    f: &FunctionModel<T>,
    scale: T,
    cfg: &IntegrationConfig<T>,
) -> Result<CenterResolution<T>, ClassifyError> {
    if eq.kind != EquilibriumKind::Simple(SimpleKind::CenterOrFocus) {
        return Err(ClassifyError::NotCenterOrFocus);
    }
    return_map_verdict(eq, f, scale, cfg)
}

/// The return-map test of [`resolve_center`] without the kind precondition.
pub fn return_map_verdict<T: Real>(
    eq: &Equilibrium<T>,
    f: &FunctionModel<T>,
    scale: T,
    cfg: &IntegrationConfig<T>,
) -> Result<CenterResolution<T>, ClassifyError> {
    let displacements = CENTER_RADII
        .iter()
        .map(|&k| {
            let r = T::lit(k) * scale;
            poincare_return(f, eq.location, T::zero(), r, cfg).map(|d| (r, d))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let closed: Vec<bool> = displacements
        .iter()
        .map(|(r, d)| d.abs() <= T::lit(CENTER_REL) * *r)
        .collect();
    if closed.iter().all(|c| *c) {
        return Ok(CenterResolution {
            kind: SimpleKind::Center,
            stable: None,
            displacements,
        });
    }
    let inward = displacements.iter().all(|(_, d)| *d < T::zero());
    let outward = displacements.iter().all(|(_, d)| *d > T::zero());
    if closed.iter().all(|c| !*c) && (inward || outward) {
        return Ok(CenterResolution {
            kind: SimpleKind::Focus,
            stable: Some(inward),
            displacements,
        });
    }
    Err(ClassifyError::Inconclusive {
        displacements: displacements
            .iter()
            .map(|(r, d)| [r.to_f64().unwrap_or(f64::NAN), d.to_f64().unwrap_or(f64::NAN)])
            .collect(),
    })
}

fn descriptor<T: Real>(
    side: &Result<Orbit<T>, FlowError>,
    equilibria: &[Equilibrium<T>],
) -> LimitDescriptor<T> {
    match side {
        Ok(orbit) => match orbit.termination {
            TerminationEvent::CapturedByEquilibrium {
                equilibrium,
                approach_angle,
            } => {
                let spiral = match equilibria[equilibrium].kind {
                    EquilibriumKind::Simple(k) => k.is_spiral_like(),
                    _ => false,
                };
                LimitDescriptor::SingleEquilibrium {
                    equilibrium,
                    approach: if spiral {
                        Approach::Spiral
                    } else {
                        Approach::Direction(approach_angle)
                    },
                }
            }
            TerminationEvent::PeriodClosed { period } => LimitDescriptor::PeriodicSelf { period },
            TerminationEvent::Escaped | TerminationEvent::BlowupInFiniteTime { .. } => LimitDescriptor::Escapes,
            TerminationEvent::TimeBudgetExhausted => LimitDescriptor::Unknown(UnknownReason::TimeBudget),
        },
        Err(_) => LimitDescriptor::Unknown(UnknownReason::NumericalFailure),
    }
}

/// Both halves of an orbit with their limit verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedOrbit<T> {
    pub seed: Cx<T>,
    pub verdict: LimitVerdict<T>,
    pub forward: Result<Orbit<T>, FlowError>,
    pub backward: Result<Orbit<T>, FlowError>,
}

impl<T: Real> TracedOrbit<T> {
    pub fn connection(&self) -> ConnectionType {
        connection_type(&self.verdict)
    }

    /// The closed half of a periodic orbit.
    pub fn cycle(&self) -> Option<&Orbit<T>> {
        [&self.forward, &self.backward]
            .into_iter()
            .filter_map(|o| o.as_ref().ok())
            .find(|o| matches!(o.termination, TerminationEvent::PeriodClosed { .. }))
    }

    /// Every sample of both halves lies in `region`.
    pub fn stays_in(&self, region: &Region<T>) -> bool {
        [&self.forward, &self.backward].into_iter().all(|side| match side {
            Ok(o) => o.points.iter().all(|p| region.contains(*p)),
            Err(_) => false,
        })
    }
}

pub fn trace_orbit<T: Real>(
    f: &FunctionModel<T>,
    seed: Cx<T>,
    cfg: &IntegrationConfig<T>,
    equilibria: &[Equilibrium<T>],
) -> TracedOrbit<T> {
    let forward = integrate(f, seed, Direction::Forward, cfg, equilibria);
    let backward = integrate(f, seed, Direction::Backward, cfg, equilibria);
    let mut verdict = LimitVerdict {
        omega: descriptor(&forward, equilibria),
        alpha: descriptor(&backward, equilibria),
    };
    // a closed orbit is its own limit set in both time directions
    let period = [verdict.omega, verdict.alpha].into_iter().find_map(|d| match d {
        LimitDescriptor::PeriodicSelf { period } => Some(period),
        _ => None,
    });
    if let Some(period) = period {
        verdict.omega = LimitDescriptor::PeriodicSelf { period };
        verdict.alpha = LimitDescriptor::PeriodicSelf { period };
    }
    TracedOrbit {
        seed,
        verdict,
        forward,
        backward,
    }
}

/// Limit sets of the orbit through `seed` in both time directions.
pub fn classify_orbit<T: Real>(
    f: &FunctionModel<T>,
    seed: Cx<T>,
    cfg: &IntegrationConfig<T>,
    equilibria: &[Equilibrium<T>],
) -> LimitVerdict<T> {
    trace_orbit(f, seed, cfg, equilibria).verdict
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Orbits leave along the lower direction and return along the upper one.
    Counterclockwise,
    Clockwise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorWitness<T> {
    pub lower_direction: T,
    pub upper_direction: T,
    pub probe_seeds: Vec<Cx<T>>,
    pub verdicts: Vec<ConnectionType>,
    /// Consensus orientation of the probes, `None` if they disagree or fail.
    pub orientation: Option<Orientation>,
}

impl<T> SectorWitness<T> {
    pub fn witnessed(&self, equilibrium: usize) -> bool {
        self.verdicts
            .iter()
            .all(|v| *v == ConnectionType::Homoclinic(equilibrium))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FedWitness<T> {
    pub equilibrium: usize,
    pub location: Cx<T>,
    pub sector_count: usize,
    pub sectors: Vec<SectorWitness<T>>,
    pub witness_radius: T,
    pub attempts: usize,
    pub success: bool,
}

impl<T: Real> FedWitness<T> {
    pub fn failing_sector(&self) -> Option<usize> {
        self.sectors.iter().position(|s| !s.witnessed(self.equilibrium))
    }

    /// Orientations alternate around the equilibrium.
    pub fn alternates(&self) -> bool {
        let n = self.sectors.len();
        (0..n).all(|i| match (self.sectors[i].orientation, self.sectors[(i + 1) % n].orientation) {
            (Some(a), Some(b)) => a != b,
            _ => false,
        })
    }

    fn to_f64(&self) -> FedWitness<f64> {
        let c = |z: Cx<T>| Complex::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN));
        let r = |x: T| x.to_f64().unwrap_or(f64::NAN);
        FedWitness {
            equilibrium: self.equilibrium,
            location: c(self.location),
            sector_count: self.sector_count,
            sectors: self
                .sectors
                .iter()
                .map(|s| SectorWitness {
                    lower_direction: r(s.lower_direction),
                    upper_direction: r(s.upper_direction),
                    probe_seeds: s.probe_seeds.iter().map(|z| c(*z)).collect(),
                    verdicts: s.verdicts.clone(),
                    orientation: s.orientation,
                })
                .collect(),
            witness_radius: r(self.witness_radius),
            attempts: self.attempts,
            success: self.success,
        }
    }
}

fn probe_orientation<T: Real>(verdict: &LimitVerdict<T>, lower: T, upper: T) -> Option<Orientation> {
    match (verdict.alpha, verdict.omega) {
        (
            LimitDescriptor::SingleEquilibrium {
                approach: Approach::Direction(from),
                ..
            },
            LimitDescriptor::SingleEquilibrium {
                approach: Approach::Direction(to),
                ..
            },
        ) => {
            let near = |x: T, y: T| angle_diff(x, y).abs();
            if near(from, lower) < near(from, upper) && near(to, upper) < near(to, lower) {
                Some(Orientation::Counterclockwise)
            } else if near(from, upper) < near(from, lower) && near(to, lower) < near(to, upper) {
                Some(Orientation::Clockwise)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Sampling witness for the finite elliptic decomposition at an equilibrium
/// of order `m ≥ 2`: probe orbits seeded strictly inside every sector
/// between adjacent definite directions must be homoclinic to the
/// equilibrium without leaving a disk of radius `20 r`.
///
/// `index` is the position of `eq` in `equilibria`; `scale` the distance to
/// the nearest other equilibrium or boundary.
pub fn fed_witness<T: Real>(
    eq: &Equilibrium<T>,
    index: usize,
    f: &FunctionModel<T>,
    spectrum: &DirectionSpectrum<T>,
    equilibria: &[Equilibrium<T>],
    scale: T,
    cfg: &IntegrationConfig<T>,
) -> Result<FedWitness<T>, ClassifyError> {
    if eq.order < 2 {
        return Err(LocalError::InvalidOrder {
            expected: ">= 2",
            found: eq.order,
        }
        .into());
    }
    let thetas = spectrum.thetas();
    let n = thetas.len();
    let gap = spectrum.gap();
    let mut radius = T::lit(WITNESS_START_FRACTION) * scale;
    let mut attempts = 0;
    loop {
        attempts += 1;
        let local_cfg = IntegrationConfig {
            escape_center: eq.location,
            escape_radius: T::lit(WITNESS_DISK_FACTOR) * radius,
            ..*cfg
        };
        let sectors: Vec<SectorWitness<T>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let lower = thetas[i];
                let upper = thetas[(i + 1) % n];
                let probe_seeds: Vec<Cx<T>> = (1..=WITNESS_PROBES)
                    .map(|j| {
                        let phi = lower + gap * T::from_usize_lossy(j) / T::from_usize_lossy(WITNESS_PROBES + 1);
                        eq.location + Complex::from_polar(radius, phi)
                    })
                    .collect();
                let verdicts: Vec<LimitVerdict<T>> = probe_seeds
                    .iter()
                    .map(|z| classify_orbit(f, *z, &local_cfg, equilibria))
                    .collect();
                let orientations: Vec<Option<Orientation>> =
                    verdicts.iter().map(|v| probe_orientation(v, lower, upper)).collect();
                let orientation = match orientations.first() {
                    Some(Some(o)) if orientations.iter().all(|x| *x == Some(*o)) => Some(*o),
                    _ => None,
                };
                SectorWitness {
                    lower_direction: lower,
                    upper_direction: upper,
                    probe_seeds,
                    verdicts: verdicts.iter().map(connection_type).collect(),
                    orientation,
                }
            })
            .collect();
        let witness = FedWitness {
            equilibrium: index,
            location: eq.location,
            sector_count: 2 * eq.order - 2,
            sectors,
            witness_radius: radius,
            attempts,
            success: false,
        };
        match witness.failing_sector() {
            None => {
                return Ok(FedWitness {
                    success: true,
                    ..witness
                })
            }
            Some(sector) if attempts > WITNESS_HALVINGS => {
                return Err(ClassifyError::WitnessFailed {
                    sector,
                    radius: radius.to_f64().unwrap_or(f64::NAN),
                    witness: Box::new(witness.to_f64()),
                })
            }
            Some(_) => radius = radius / T::lit(2.0),
        }
    }
}

/// Even-odd rule for a closed polyline.
pub fn point_in_polygon<T: Real>(p: Cx<T>, polygon: &[Cx<T>]) -> bool {
    let mut inside = false;
    let n = polygon.len();
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if p.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

#[derive(Debug, Clone, PartialEq)]
pub struct PbViolation<T> {
    pub seed: Cx<T>,
    pub reason: String,
}

/// Per-seed outcome of [`pb_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome<T> {
    pub traced: TracedOrbit<T>,
    /// Both halves stay in the region.
    pub bounded: bool,
    /// Indices of enclosed equilibria and inward probe verdicts for periodic orbits.
    pub enclosed: Vec<usize>,
    pub inward_probes: Vec<(Cx<T>, LimitVerdict<T>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PbReport<T> {
    /// `false` when the field has division and the domain may not be simply connected.
    pub hypothesis_satisfied: bool,
    pub outcomes: Vec<SeedOutcome<T>>,
    pub violations: Vec<PbViolation<T>>,
}

impl<T: Real> PbReport<T> {
    /// Bounded seeds whose verdict has an unknown side.
    pub fn unresolved(&self) -> impl Iterator<Item = &SeedOutcome<T>> {
        self.outcomes.iter().filter(|o| {
            o.bounded
                && (matches!(o.traced.verdict.omega, LimitDescriptor::Unknown(_))
                    || matches!(o.traced.verdict.alpha, LimitDescriptor::Unknown(_)))
        })
    }
}

fn check_bounded<T: Real>(
    outcome: &mut SeedOutcome<T>,
    f: &FunctionModel<T>,
    cfg: &IntegrationConfig<T>,
    equilibria: &[Equilibrium<T>],
) -> Option<String> {
    let verdict = outcome.traced.verdict;
    match (verdict.alpha, verdict.omega) {
        (LimitDescriptor::PeriodicSelf { .. }, LimitDescriptor::PeriodicSelf { .. }) => {
            let cycle = outcome.traced.cycle()?.points.clone();
            outcome.enclosed = equilibria
                .iter()
                .enumerate()
                .filter(|(_, e)| point_in_polygon(e.location, &cycle))
                .map(|(i, _)| i)
                .collect();
            let [center] = outcome.enclosed[..] else {
                return Some(format!(
                    "periodic orbit encloses {} equilibria",
                    outcome.enclosed.len()
                ));
            };
            if equilibria[center].kind != EquilibriumKind::Simple(SimpleKind::Center) {
                return Some(format!(
                    "periodic orbit encloses an equilibrium of kind {}",
                    equilibria[center].kind.as_str()
                ));
            }
            let a = equilibria[center].location;
            let seed = outcome.traced.seed;
            outcome.inward_probes = INWARD_OFFSETS
                .iter()
                .map(|&k| {
                    let p = seed + (a - seed) * T::lit(k);
                    (p, classify_orbit(f, p, cfg, equilibria))
                })
                .collect();
            outcome
                .inward_probes
                .iter()
                .find(|(_, v)| !(v.alpha.is_periodic() && v.omega.is_periodic()))
                .map(|(p, _)| format!("inward probe at ({}, {}) is not periodic", p.re, p.im))
        }
        (LimitDescriptor::PeriodicSelf { .. }, _) | (_, LimitDescriptor::PeriodicSelf { .. }) => {
            Some("periodic on one side only".into())
        }
        (LimitDescriptor::Escapes, _) | (_, LimitDescriptor::Escapes) => {
            Some("escaping side on a bounded orbit".into())
        }
        _ => None,
    }
}

/// Classifies every seed and checks the trichotomy for bounded orbits: a
/// bounded orbit is periodic around exactly one center (with periodic
/// orbits between it and the center) or has a single equilibrium as limit
/// set in each time direction.
pub fn pb_report<T: Real>(
    f: &FunctionModel<T>,
    region: &Region<T>,
    seeds: &[Cx<T>],
    cfg: &IntegrationConfig<T>,
    equilibria: &[Equilibrium<T>],
) -> PbReport<T> {
    let hypothesis_satisfied = !f.has_division();
    let results: Vec<(SeedOutcome<T>, Option<String>)> = seeds
        .par_iter()
        .map(|&seed| {
            let traced = trace_orbit(f, seed, cfg, equilibria);
            let bounded = traced.stays_in(region);
            let mut outcome = SeedOutcome {
                traced,
                bounded,
                enclosed: Vec::new(),
                inward_probes: Vec::new(),
            };
            let violation = if bounded && hypothesis_satisfied {
                check_bounded(&mut outcome, f, cfg, equilibria)
            } else {
                None
            };
            (outcome, violation)
        })
        .collect();
    let mut outcomes = Vec::with_capacity(results.len());
    let mut violations = Vec::new();
    for (outcome, violation) in results {
        if let Some(reason) = violation {
            violations.push(PbViolation {
                seed: outcome.traced.seed,
                reason,
            });
        }
        outcomes.push(outcome);
    }
    PbReport {
        hypothesis_satisfied,
        outcomes,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{equilibrium_at, find_equilibria};
    use crate::local::{classify_equilibrium, definite_directions};
    use std::f64::consts::PI;

    fn cx(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn setup(src: &str, h: f64) -> (FunctionModel<f64>, Region<f64>, Vec<Equilibrium<f64>>) {
        let f = FunctionModel::parse(src).unwrap();
        let region = Region::new(cx(-h, -h), cx(h, h)).unwrap();
        let mut eqs = find_equilibria(&f, &region).unwrap();
        for e in &mut eqs {
            classify_equilibrium(e, &f).unwrap();
        }
        (f, region, eqs)
    }

    #[test]
    fn rotation_is_a_center() {
        let (f, region, eqs) = setup("i*z", 2.0);
        let scale = local_scale(eqs[0].location, &eqs, &region);
        let res = resolve_center(&eqs[0], &f, scale, &IntegrationConfig::default()).unwrap();
        assert_eq!(res.kind, SimpleKind::Center);
        for (r, d) in res.displacements {
            assert!(d.abs() <= 1e-8 * r);
        }
    }

    #[test]
    fn unstable_focus_cross_check() {
        let (f, region, eqs) = setup("(i+0.05)*z", 2.0);
        assert_eq!(eqs[0].kind, EquilibriumKind::Simple(SimpleKind::UnstableFocus));
        let scale = local_scale(eqs[0].location, &eqs, &region);
        let cfg = IntegrationConfig::default();
        assert_eq!(
            resolve_center(&eqs[0], &f, scale, &cfg),
            Err(ClassifyError::NotCenterOrFocus)
        );
        let res = return_map_verdict(&eqs[0], &f, scale, &cfg).unwrap();
        assert_eq!(res.kind, SimpleKind::Focus);
        assert_eq!(res.stable, Some(false));
    }

    #[test]
    fn rotated_field_fails_the_precondition() {
        // e^{iπ/2} · (i z) = -z is a stable node
        let (f, region, eqs) = setup("i*z^1", 2.0);
        let g = f.scaled(cx(0.0, 1.0));
        let mut e = equilibrium_at(&g, cx(0.0, 0.0)).unwrap();
        classify_equilibrium(&mut e, &g).unwrap();
        assert_eq!(e.kind, EquilibriumKind::Simple(SimpleKind::StableNode));
        let scale = local_scale(e.location, &eqs, &region);
        assert_eq!(
            resolve_center(&e, &g, scale, &IntegrationConfig::default()),
            Err(ClassifyError::NotCenterOrFocus)
        );
    }

    #[test]
    fn orbit_verdict_examples() {
        let cfg = IntegrationConfig::default();
        let (f, _, eqs) = setup("z^3*(z-1)^3", 2.0);
        let v = classify_orbit(&f, cx(0.5, 0.0), &cfg, &eqs);
        assert_eq!(v.alpha.equilibrium(), Some(1));
        assert_eq!(v.omega.equilibrium(), Some(0));
        assert_eq!(connection_type(&v), ConnectionType::Heteroclinic { from: 1, to: 0 });

        let (f, _, eqs) = setup("i*z", 2.0);
        let v = classify_orbit(&f, cx(1.0, 0.0), &cfg, &eqs);
        assert!(v.alpha.is_periodic() && v.omega.is_periodic());
        assert_eq!(connection_type(&v), ConnectionType::NotAConnection);

        let (f, _, eqs) = setup("z^2", 2.0);
        let v = classify_orbit(&f, cx(0.5, 0.0), &cfg, &eqs);
        match v.alpha {
            LimitDescriptor::SingleEquilibrium {
                equilibrium: 0,
                approach: Approach::Direction(theta),
            } => assert!(angle_diff(theta, 0.0).abs() < 1e-3),
            other => panic!("{other:?}"),
        }
        assert_eq!(v.omega, LimitDescriptor::Escapes);
    }

    #[test]
    fn connection_examples() {
        let single = |i| LimitDescriptor::SingleEquilibrium {
            equilibrium: i,
            approach: Approach::Direction(0.0),
        };
        let v = LimitVerdict {
            alpha: single(1),
            omega: single(0),
        };
        assert_eq!(connection_type(&v), ConnectionType::Heteroclinic { from: 1, to: 0 });
        let v = LimitVerdict {
            alpha: single(0),
            omega: single(0),
        };
        assert_eq!(connection_type(&v), ConnectionType::Homoclinic(0));
        let v = LimitVerdict {
            alpha: single(0),
            omega: LimitDescriptor::<f64>::Escapes,
        };
        assert_eq!(connection_type(&v), ConnectionType::NotAConnection);
    }

    #[test]
    fn spirals_are_reported_without_direction() {
        let (f, _, eqs) = setup("(-1+i)*z", 2.0);
        let v = classify_orbit(&f, cx(0.5, 0.5), &IntegrationConfig::default(), &eqs);
        assert_eq!(
            v.omega,
            LimitDescriptor::SingleEquilibrium {
                equilibrium: 0,
                approach: Approach::Spiral
            }
        );
        assert_eq!(v.alpha, LimitDescriptor::Escapes);
    }

    #[test]
    fn quadratic_witness_has_two_sectors() {
        let (f, region, eqs) = setup("z^2", 2.0);
        let spectrum = definite_directions(&eqs[0]).unwrap();
        assert_eq!(spectrum.thetas(), vec![0.0, PI]);
        let scale = local_scale(eqs[0].location, &eqs, &region);
        let w = fed_witness(&eqs[0], 0, &f, &spectrum, &eqs, scale, &IntegrationConfig::default()).unwrap();
        assert!(w.success);
        assert_eq!(w.sector_count, 2);
        assert!(w.alternates());
    }

    #[test]
    fn witness_rejects_simple_equilibria() {
        let (_, region, eqs) = setup("z^2", 2.0);
        let spectrum = definite_directions(&eqs[0]).unwrap();
        let (g, _, simple) = setup("z", 2.0);
        let scale = local_scale(simple[0].location, &simple, &region);
        assert!(matches!(
            fed_witness(&simple[0], 0, &g, &spectrum, &eqs, scale, &IntegrationConfig::default()),
            Err(ClassifyError::Local(LocalError::InvalidOrder { .. }))
        ));
    }

    #[test]
    fn polygon_membership() {
        let square = [cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 1.0), cx(0.0, 1.0)];
        assert!(point_in_polygon(cx(0.5, 0.5), &square));
        assert!(!point_in_polygon(cx(1.5, 0.5), &square));
    }

    #[test]
    fn rotation_report_has_nested_cycles() {
        let (f, region, mut eqs) = setup("i*z", 2.0);
        let scale = local_scale(eqs[0].location, &eqs, &region);
        let res = resolve_center(&eqs[0], &f, scale, &IntegrationConfig::default()).unwrap();
        eqs[0].kind = EquilibriumKind::Simple(res.kind);
        let seeds: Vec<_> = [0.2, 0.4, 0.6, 0.8, 1.0].iter().map(|&x| cx(x, 0.0)).collect();
        let report = pb_report(&f, &region, &seeds, &IntegrationConfig::default(), &eqs);
        assert!(report.hypothesis_satisfied);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        for o in &report.outcomes {
            assert!(o.bounded);
            assert!(o.traced.verdict.omega.is_periodic());
            assert_eq!(o.enclosed, vec![0]);
            assert_eq!(o.inward_probes.len(), 3);
            assert!(o.inward_probes.iter().all(|(_, v)| v.omega.is_periodic()));
        }
    }

    #[test]
    fn unresolved_center_is_a_violation() {
        let (f, region, eqs) = setup("i*z", 2.0);
        let report = pb_report(&f, &region, &[cx(0.5, 0.0)], &IntegrationConfig::default(), &eqs);
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn division_marks_the_hypothesis() {
        let (f, region, eqs) = setup("z/(z-5)", 2.0);
        let report = pb_report(&f, &region, &[cx(0.5, 0.0)], &IntegrationConfig::default(), &eqs);
        assert!(!report.hypothesis_satisfied);
        assert!(report.violations.is_empty());
    }
}
