//! Reaction kinetics of the morphochemical (DIB) model and the perturbed
//! equilibrium used as initial data.
//!
//! `eta` is the morphology (growth rate in the normal direction) and `theta`
//! the surface chemistry (adsorbate coverage). The homogeneous equilibrium is
//! `(0, alpha)`, enforced by deriving the desorption constant `D` from the
//! other parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

/// Source terms `f(eta, theta)` and `g(eta, theta)`.
pub trait Reaction {
    fn f(&self, eta: f64, theta: f64) -> f64;
    fn g(&self, eta: f64, theta: f64) -> f64;
}

/// Pure transport: `f = g = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoReaction;

impl Reaction for NoReaction {
    fn f(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn g(&self, _: f64, _: f64) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticsParams {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub c: f64,
    pub d_rate: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub k2: f64,
    pub k3: f64,
    /// Diffusivity of `theta` relative to `eta`.
    pub diffusivity: f64,
    /// Domain rescaling factor multiplying both source terms.
    pub rho: f64,
    /// Normal velocity gain; zero gives a stationary surface.
    pub kappa: f64,
}

/// Desorption constant that makes `(0, alpha)` a root of `g`.
pub fn equilibrium_desorption(c: f64, alpha: f64, gamma: f64) -> Result<f64> {
    let denom = alpha * (1.0 + gamma * alpha);
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::InvalidParameter {
            name: "kinetics.alpha",
            reason: format!("alpha (1 + gamma alpha) must be nonzero, got {denom}"),
        });
    }
    Ok(c * (1.0 - alpha) * (1.0 - gamma + gamma * alpha) / denom)
}

impl KineticsParams {
    pub const DIFFUSIVITY: f64 = 20.0;
    pub const ALPHA: f64 = 0.5;
    pub const GAMMA: f64 = 0.2;
    pub const K2: f64 = 2.5;
    pub const K3: f64 = 1.5;
    pub const A1: f64 = 10.0;
    pub const A2: f64 = 1.0;
    pub const KAPPA: f64 = 0.2;

    /// Standard parameter set for the given `B` and `C`, with `rho = 1`.
    pub fn standard(b: f64, c: f64) -> Result<Self> {
        KineticsParams {
            a1: Self::A1,
            a2: Self::A2,
            b,
            c,
            d_rate: 0.0,
            alpha: Self::ALPHA,
            gamma: Self::GAMMA,
            k2: Self::K2,
            k3: Self::K3,
            diffusivity: Self::DIFFUSIVITY,
            rho: 1.0,
            kappa: Self::KAPPA,
        }
        .with_derived_desorption()
    }

    /// Recomputes `D` from `C`, `alpha` and `gamma`.
    pub fn with_derived_desorption(mut self) -> Result<Self> {
        self.d_rate = equilibrium_desorption(self.c, self.alpha, self.gamma)?;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn is_stationary(&self) -> bool {
        self.kappa == 0.0
    }

    pub fn equilibrium(&self) -> (f64, f64) {
        (0.0, self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        let fields: [(&'static str, f64); 12] = [
            ("kinetics.A1", self.a1),
            ("kinetics.A2", self.a2),
            ("kinetics.B", self.b),
            ("kinetics.C", self.c),
            ("kinetics.D", self.d_rate),
            ("kinetics.alpha", self.alpha),
            ("kinetics.gamma", self.gamma),
            ("kinetics.k2", self.k2),
            ("kinetics.k3", self.k3),
            ("kinetics.d", self.diffusivity),
            ("kinetics.rho", self.rho),
            ("kinetics.kappa", self.kappa),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {value}"),
                });
            }
        }
        let positive = [
            ("kinetics.d", self.diffusivity),
            ("kinetics.rho", self.rho),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {value}"),
                });
            }
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidParameter {
                name: "kinetics.kappa",
                reason: format!("must be non-negative, got {}", self.kappa),
            });
        }
        Ok(())
    }

    pub fn eval_f(&self, eta: f64, theta: f64) -> f64 {
        self.a1 * (1.0 - theta) * eta - self.a2 * eta * eta * eta - self.b * (theta - self.alpha)
    }

    pub fn eval_g(&self, eta: f64, theta: f64) -> f64 {
        let free = 1.0 - theta;
        self.c * (1.0 + self.k2 * eta) * free * (1.0 - self.gamma * free)
            - self.d_rate * (1.0 + self.k3 * eta) * theta * (1.0 + self.gamma * theta)
    }
}

impl Reaction for KineticsParams {
    fn f(&self, eta: f64, theta: f64) -> f64 {
        self.eval_f(eta, theta)
    }
    fn g(&self, eta: f64, theta: f64) -> f64 {
        self.eval_g(eta, theta)
    }
}

/// Elementwise `f` and `g` over nodal vectors.
pub fn eval_sources<R: Reaction + ?Sized>(
    reaction: &R,
    eta: &[f64],
    theta: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    eta.iter()
        .zip(theta)
        .map(|(&e, &t)| (reaction.f(e, t), reaction.g(e, t)))
        .unzip()
}

/// Nodal coefficient vectors for `eta` and `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub eta: Vec<f64>,
    pub theta: Vec<f64>,
}

impl FieldPair {
    pub fn uniform(n: usize, eta: f64, theta: f64) -> Self {
        FieldPair {
            eta: vec![eta; n],
            theta: vec![theta; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub amplitude: f64,
    pub seed: u64,
    /// Use one random draw per node for both fields instead of independent draws.
    pub shared_noise: bool,
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation {
            amplitude: 1e-4,
            seed: 0,
            shared_noise: false,
        }
    }
}

/// Equilibrium plus `amplitude * r` with `r` uniform on `[-1, 1]`, drawn from
/// a seeded ChaCha8 stream. With independent noise the draws alternate
/// `eta_0, theta_0, eta_1, theta_1, ...`.
pub fn initial_condition(
    mesh: &SurfaceMesh,
    params: &KineticsParams,
    perturbation: &Perturbation,
) -> Result<FieldPair> {
    let amplitude = perturbation.amplitude;
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "kinetics.amplitude",
            reason: format!("must be non-negative, got {amplitude}"),
        });
    }
    let (eta_eq, theta_eq) = params.equilibrium();
    let n = mesh.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(perturbation.seed);
    let mut fields = FieldPair::uniform(n, eta_eq, theta_eq);
    for i in 0..n {
        let r: f64 = rng.gen_range(-1.0..=1.0);
        let s: f64 = if perturbation.shared_noise {
            r
        } else {
            rng.gen_range(-1.0..=1.0)
        };
        fields.eta[i] = eta_eq + amplitude * r;
        fields.theta[i] = theta_eq + amplitude * s;
    }
    Ok(fields)
}
