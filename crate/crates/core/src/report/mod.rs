//! End-to-end analysis pipeline and its JSON report.

mod svg;

use std::time::Instant;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use svg::{render_svg, svg_document};

use crate::classify::{
    fed_witness, local_scale, pb_report, resolve_center, Approach, ClassifyError, ConnectionType, FedWitness,
    LimitDescriptor, Orientation, TracedOrbit, UnknownReason,
};
use crate::equilibria::{find_equilibria, EquilibriaError, Equilibrium, Region};
use crate::expr::{Expr, FunctionModel, SyntaxError};
use crate::flow::{FlowError, IntegrationConfig};
use crate::local::{classify_equilibrium, definite_directions, EquilibriumKind, LocalError, SimpleKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("equilibria: {0}")]
    Equilibria(#[from] EquilibriaError),
    #[error("local theory: {0}")]
    Local(#[from] LocalError),
    #[error("integration: {0}")]
    Flow(#[from] FlowError),
    #[error("invalid seeds: {0}")]
    Seeds(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Seed placement for orbit classification.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedSpec {
    /// `N × N` points uniformly spaced over a rectangle, corners included;
    /// the analysis box when `area` is `None`.
    Grid { n: usize, area: Option<Region<f64>> },
    List(Vec<Complex<f64>>),
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec::Grid { n: 10, area: None }
    }
}

impl SeedSpec {
    /// Parses `grid:N`, `grid:N@x0,y0,x1,y1` or `list:z1;z2;…` where each
    /// `zk` is a constant expression such as `0.5`, `-1+2i` or `exp(i)`.
    pub fn parse(spec: &str) -> Result<Self, String> {
        if let Some(rest) = spec.strip_prefix("grid:") {
            let (count, area) = match rest.split_once('@') {
                Some((n, area)) => (n, Some(parse_box(area)?)),
                None => (rest, None),
            };
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("grid size '{count}' is not a positive integer"))?;
            if n == 0 {
                return Err("grid size must be positive".into());
            }
            return Ok(SeedSpec::Grid { n, area });
        }
        if let Some(rest) = spec.strip_prefix("list:") {
            let seeds = rest
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(parse_point)
                .collect::<Result<Vec<_>, _>>()?;
            if seeds.is_empty() {
                return Err("seed list is empty".into());
            }
            return Ok(SeedSpec::List(seeds));
        }
        Err(format!("seed spec '{spec}' must start with 'grid:' or 'list:'"))
    }

    /// Text form accepted by [`SeedSpec::parse`].
    pub fn to_spec_string(&self) -> String {
        match self {
            SeedSpec::Grid { n, area: None } => format!("grid:{n}"),
            SeedSpec::Grid { n, area: Some(r) } => {
                format!("grid:{n}@{},{},{},{}", r.lo.re, r.lo.im, r.hi.re, r.hi.im)
            }
            SeedSpec::List(seeds) => {
                let parts: Vec<String> = seeds.iter().map(|z| format!("({}+{}i)", z.re, z.im)).collect();
                format!("list:{}", parts.join(";"))
            }
        }
    }

    /// Seed points before equilibrium filtering.
    pub fn points(&self, region: &Region<f64>) -> Vec<Complex<f64>> {
        match self {
            SeedSpec::List(seeds) => seeds.clone(),
            SeedSpec::Grid { n, area } => {
                let r = area.unwrap_or(*region);
                let coord = |lo: f64, hi: f64, k: usize| {
                    if *n == 1 {
                        0.5 * (lo + hi)
                    } else {
                        lo + (hi - lo) * (k as f64 / (*n - 1) as f64)
                    }
                };
                (0..*n)
                    .flat_map(|j| (0..*n).map(move |i| (i, j)))
                    .map(|(i, j)| Complex::new(coord(r.lo.re, r.hi.re, i), coord(r.lo.im, r.hi.im, j)))
                    .collect()
            }
        }
    }
}

fn parse_point(text: &str) -> Result<Complex<f64>, String> {
    let expr: Expr<f64> = Expr::parse(text.trim()).map_err(|e| format!("seed '{text}': {e}"))?;
    if expr.has_variable() {
        return Err(format!("seed '{text}' must be a constant"));
    }
    let z = expr
        .evaluate(Complex::new(0.0, 0.0))
        .map_err(|e| format!("seed '{text}': {e}"))?;
    Ok(z)
}

/// Parses `x0,y0,x1,y1` into a region.
pub fn parse_box(text: &str) -> Result<Region<f64>, String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
        .collect::<Result<_, _>>()?;
    let [x0, y0, x1, y1] = parts[..] else {
        return Err(format!("box '{text}' needs four comma-separated numbers"));
    };
    if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
        return Err(format!("box '{text}' must be finite"));
    }
    Region::new(Complex::new(x0, y0), Complex::new(x1, y1)).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisInput {
    pub function: String,
    pub region: Region<f64>,
    pub seeds: SeedSpec,
    pub config: IntegrationConfig<f64>,
}

// ---- JSON schema -------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionJson {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionJson {
    pub theta: f64,
    pub lambda: f64,
    pub time_sign: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterResolutionJson {
    pub verdict: String,
    /// `[radius, displacement]` pairs.
    pub displacements: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumJson {
    pub location: [f64; 2],
    pub order: usize,
    pub index: i64,
    pub kind: String,
    pub leading_coefficient: [f64; 2],
    pub directions: Vec<DirectionJson>,
    pub center_resolution: Option<CenterResolutionJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DescriptorJson {
    SingleEquilibrium { equilibrium: usize, theta: Option<f64>, spiral: bool },
    PeriodicSelf { period: f64 },
    Escapes,
    Unknown { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConnectionJson {
    Homoclinic { equilibrium: usize },
    Heteroclinic { from: usize, to: usize },
    NotAConnection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitJson {
    pub seed: [f64; 2],
    pub alpha: DescriptorJson,
    pub omega: DescriptorJson,
    pub connection: ConnectionJson,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorJson {
    pub lower_direction: f64,
    pub upper_direction: f64,
    pub probe_seeds: Vec<[f64; 2]>,
    pub verdicts: Vec<ConnectionJson>,
    pub orientation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FedWitnessJson {
    pub equilibrium: usize,
    pub location: [f64; 2],
    pub sector_count: usize,
    pub witness_radius: f64,
    pub attempts: usize,
    pub success: bool,
    pub failing_sector: Option<usize>,
    pub alternating: bool,
    pub sectors: Vec<SectorJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationJson {
    pub seed: [f64; 2],
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigJson {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_time: f64,
    pub escape_radius: f64,
    pub equilibrium_capture_radius: f64,
    pub min_step: f64,
    pub max_samples: usize,
    pub seeds: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub function: String,
    pub region: RegionJson,
    pub equilibria: Vec<EquilibriumJson>,
    pub orbits: Vec<OrbitJson>,
    pub fed_witnesses: Vec<FedWitnessJson>,
    pub pb_violations: Vec<ViolationJson>,
    /// `false` when division makes the domain possibly not simply connected.
    pub hypothesis_satisfied: bool,
    pub config: ConfigJson,
    pub version: String,
    pub wall_time_ms: u64,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn pair(z: Complex<f64>) -> [f64; 2] {
    [z.re, z.im]
}

fn descriptor_json(d: &LimitDescriptor<f64>) -> DescriptorJson {
    match *d {
        LimitDescriptor::SingleEquilibrium { equilibrium, approach } => DescriptorJson::SingleEquilibrium {
            equilibrium,
            theta: match approach {
                Approach::Direction(t) => Some(t),
                Approach::Spiral => None,
            },
            spiral: approach == Approach::Spiral,
        },
        LimitDescriptor::PeriodicSelf { period } => DescriptorJson::PeriodicSelf { period },
        LimitDescriptor::Escapes => DescriptorJson::Escapes,
        LimitDescriptor::Unknown(reason) => DescriptorJson::Unknown {
            reason: match reason {
                UnknownReason::TimeBudget => "time_budget",
                UnknownReason::NumericalFailure => "numerical_failure",
            }
            .into(),
        },
    }
}

fn connection_json(c: &ConnectionType) -> ConnectionJson {
    match *c {
        ConnectionType::Homoclinic(equilibrium) => ConnectionJson::Homoclinic { equilibrium },
        ConnectionType::Heteroclinic { from, to } => ConnectionJson::Heteroclinic { from, to },
        ConnectionType::NotAConnection => ConnectionJson::NotAConnection,
    }
}

fn witness_json(w: &FedWitness<f64>) -> FedWitnessJson {
    FedWitnessJson {
        equilibrium: w.equilibrium,
        location: pair(w.location),
        sector_count: w.sector_count,
        witness_radius: w.witness_radius,
        attempts: w.attempts,
        success: w.success,
        failing_sector: w.failing_sector(),
        alternating: w.alternates(),
        sectors: w
            .sectors
            .iter()
            .map(|s| SectorJson {
                lower_direction: s.lower_direction,
                upper_direction: s.upper_direction,
                probe_seeds: s.probe_seeds.iter().map(|z| pair(*z)).collect(),
                verdicts: s.verdicts.iter().map(connection_json).collect(),
                orientation: s.orientation.map(|o| {
                    match o {
                        Orientation::Counterclockwise => "ccw",
                        Orientation::Clockwise => "cw",
                    }
                    .to_string()
                }),
            })
            .collect(),
    }
}

/// Result of [`analyze`]: the report plus the traced orbits for rendering.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: AnalysisReport,
    pub equilibria: Vec<Equilibrium<f64>>,
    pub orbits: Vec<TracedOrbit<f64>>,
}

/// Equilibria → local classification → center resolution → orbit
/// classification → sector witnesses → trichotomy check.
pub fn analyze(input: &AnalysisInput) -> Result<Analysis, AnalysisError> {
    let start = Instant::now();
    input.config.validate()?;
    let f = FunctionModel::<f64>::parse(&input.function)?;
    let region = input.region;
    let cfg = input.config;

    let mut equilibria = find_equilibria(&f, &region)?;
    let mut resolutions = Vec::with_capacity(equilibria.len());
    for i in 0..equilibria.len() {
        classify_equilibrium(&mut equilibria[i], &f)?;
        let resolution = if equilibria[i].kind == EquilibriumKind::Simple(SimpleKind::CenterOrFocus) {
            let scale = local_scale(equilibria[i].location, &equilibria, &region);
            match resolve_center(&equilibria[i], &f, scale, &cfg) {
                Ok(res) => {
                    equilibria[i].kind = EquilibriumKind::Simple(res.kind);
                    Some(CenterResolutionJson {
                        verdict: res.kind.as_str().into(),
                        displacements: res.displacements.iter().map(|(r, d)| [*r, *d]).collect(),
                    })
                }
                Err(ClassifyError::Inconclusive { displacements }) => Some(CenterResolutionJson {
                    verdict: "inconclusive".into(),
                    displacements,
                }),
                Err(_) => Some(CenterResolutionJson {
                    verdict: "failed".into(),
                    displacements: Vec::new(),
                }),
            }
        } else {
            None
        };
        resolutions.push(resolution);
    }

    let spectra = equilibria
        .iter()
        .map(|e| if e.order >= 2 { definite_directions(e).map(Some) } else { Ok(None) })
        .collect::<Result<Vec<_>, _>>()?;

    let mut seeds: Vec<Complex<f64>> = input
        .seeds
        .points(&region)
        .into_iter()
        .filter(|z| {
            equilibria
                .iter()
                .all(|e| (z - e.location).norm() > cfg.capture_radius(e.location))
        })
        .collect();
    seeds.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap_or(std::cmp::Ordering::Equal));
    seeds.dedup();
    let pb = pb_report(&f, &region, &seeds, &cfg, &equilibria);

    let mut witnesses = Vec::new();
    for (i, spectrum) in spectra.iter().enumerate() {
        let Some(spectrum) = spectrum else { continue };
        let scale = local_scale(equilibria[i].location, &equilibria, &region);
        match fed_witness(&equilibria[i], i, &f, spectrum, &equilibria, scale, &cfg) {
            Ok(w) => witnesses.push(witness_json(&w)),
            Err(ClassifyError::WitnessFailed { witness, .. }) => witnesses.push(witness_json(&witness)),
            Err(e) => return Err(AnalysisError::Seeds(format!("witness at equilibrium {i}: {e}"))),
        }
    }

    let equilibria_json = equilibria
        .iter()
        .zip(&spectra)
        .zip(resolutions)
        .map(|((e, s), center_resolution)| EquilibriumJson {
            location: pair(e.location),
            order: e.order,
            index: e.index,
            kind: e.kind.as_str().into(),
            leading_coefficient: pair(e.leading_coefficient),
            directions: s
                .iter()
                .flat_map(|s| s.directions.iter())
                .map(|d| DirectionJson {
                    theta: d.theta,
                    lambda: d.lambda,
                    time_sign: d.time_sign.as_str().into(),
                })
                .collect(),
            center_resolution,
        })
        .collect();

    let orbits_json = pb
        .outcomes
        .iter()
        .map(|o| OrbitJson {
            seed: pair(o.traced.seed),
            alpha: descriptor_json(&o.traced.verdict.alpha),
            omega: descriptor_json(&o.traced.verdict.omega),
            connection: connection_json(&o.traced.connection()),
            bounded: o.bounded,
        })
        .collect();

    let report = AnalysisReport {
        function: input.function.clone(),
        region: RegionJson {
            lo: pair(region.lo),
            hi: pair(region.hi),
        },
        equilibria: equilibria_json,
        orbits: orbits_json,
        fed_witnesses: witnesses,
        pb_violations: pb
            .violations
            .iter()
            .map(|v| ViolationJson {
                seed: pair(v.seed),
                reason: v.reason.clone(),
            })
            .collect(),
        hypothesis_satisfied: pb.hypothesis_satisfied,
        config: ConfigJson {
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
            max_time: cfg.max_time,
            escape_radius: cfg.escape_radius,
            equilibrium_capture_radius: cfg.equilibrium_capture_radius,
            min_step: cfg.min_step,
            max_samples: cfg.max_samples,
            seeds: input.seeds.to_spec_string(),
        },
        version: VERSION.into(),
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    Ok(Analysis {
        report,
        equilibria,
        orbits: pb.outcomes.into_iter().map(|o| o.traced).collect(),
    })
}
