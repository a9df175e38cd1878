//! Analysis of holomorphic planar flows `ż = F(z)`.
//!
//! The pipeline parses `F`, locates its zeros with multiplicities, classifies
//! each equilibrium (linear taxonomy for simple zeros, definite-direction
//! spectrum and polar blow-up for multiple zeros), integrates orbits and
//! assigns limit-set verdicts. The numerical core is generic over the
//! scalar type; the aliases below fix it to `f64`.

pub mod classify;
pub mod equilibria;
pub mod expr;
pub mod flow;
pub mod local;
pub mod report;
pub mod scalar;

pub type Complex64 = num_complex::Complex<f64>;
pub type FunctionModel = expr::FunctionModel<f64>;
pub type Expr = expr::Expr<f64>;
pub type Jet = expr::Jet<f64>;
pub type Region = equilibria::Region<f64>;
pub type Equilibrium = equilibria::Equilibrium<f64>;
pub type DirectionSpectrum = local::DirectionSpectrum<f64>;
pub type DefiniteDirection = local::DefiniteDirection<f64>;
pub type IntegrationConfig = flow::IntegrationConfig<f64>;
pub type Orbit = flow::Orbit<f64>;
pub type TerminationEvent = flow::TerminationEvent<f64>;
pub type LimitVerdict = classify::LimitVerdict<f64>;
pub type LimitDescriptor = classify::LimitDescriptor<f64>;
pub type FedWitness = classify::FedWitness<f64>;
