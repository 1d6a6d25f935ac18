//! Archimedean generators `φ` with first and second derivatives and inverse.

/// Generator of a bivariate Archimedean copula `C(u,v) = φ⁻¹(φ(u) + φ(v))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArchimedeanGenerator {
    /// `φ(t) = (−ln t)^β`, β ≥ 1.
    Gumbel { beta: f64 },
    /// `φ(t) = (t^{−β₂} − 1)^{β₁}`, β₁ ≥ 1, β₂ > 0.
    Gumbel2 { beta1: f64, beta2: f64 },
    /// `φ(t) = (t^{−θ} − 1)/θ`, θ > 0.
    Clayton { theta: f64 },
    /// `φ(t) = −ln((e^{−θt} − 1)/(e^{−θ} − 1))`, θ ≠ 0.
    Frank { theta: f64 },
}

impl ArchimedeanGenerator {
    pub fn phi(&self, t: f64) -> f64 {
        match *self {
            Self::Gumbel { beta } => (-t.ln()).powf(beta),
            Self::Gumbel2 { beta1, beta2 } => (-beta2 * t.ln()).exp_m1().powf(beta1),
            Self::Clayton { theta } => (-theta * t.ln()).exp_m1() / theta,
            Self::Frank { theta } => -((-theta * t).exp_m1() / (-theta).exp_m1()).ln(),
        }
    }

    pub fn phi_prime(&self, t: f64) -> f64 {
        match *self {
            Self::Gumbel { beta } => -beta * (-t.ln()).powf(beta - 1.0) / t,
            Self::Gumbel2 { beta1, beta2 } => {
                let g = (-beta2 * t.ln()).exp_m1();
                let dg = -beta2 * t.powf(-beta2 - 1.0);
                beta1 * g.powf(beta1 - 1.0) * dg
            }
            Self::Clayton { theta } => -t.powf(-theta - 1.0),
            Self::Frank { theta } => -theta / (theta * t).exp_m1(),
        }
    }

    pub fn phi_second(&self, t: f64) -> f64 {
        match *self {
            Self::Gumbel { beta } => {
                let l = -t.ln();
                beta * l.powf(beta - 2.0) * (beta - 1.0 + l) / (t * t)
            }
            Self::Gumbel2 { beta1, beta2 } => {
                let g = (-beta2 * t.ln()).exp_m1();
                let dg = -beta2 * t.powf(-beta2 - 1.0);
                let d2g = beta2 * (beta2 + 1.0) * t.powf(-beta2 - 2.0);
                let first = if beta1 == 1.0 {
                    0.0
                } else {
                    beta1 * (beta1 - 1.0) * g.powf(beta1 - 2.0) * dg * dg
                };
                first + beta1 * g.powf(beta1 - 1.0) * d2g
            }
            Self::Clayton { theta } => (theta + 1.0) * t.powf(-theta - 2.0),
            Self::Frank { theta } => {
                let em1 = (theta * t).exp_m1();
                theta * theta * (theta * t).exp() / (em1 * em1)
            }
        }
    }

    pub fn phi_inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        if s.is_infinite() {
            return 0.0;
        }
        match *self {
            Self::Gumbel { beta } => (-s.powf(1.0 / beta)).exp(),
            Self::Gumbel2 { beta1, beta2 } => (-s.powf(1.0 / beta1).ln_1p() / beta2).exp(),
            Self::Clayton { theta } => (-(theta * s).ln_1p() / theta).exp(),
            Self::Frank { theta } => -((-s).exp() * (-theta).exp_m1()).ln_1p() / theta,
        }
    }

    /// `C(u, v) = φ⁻¹(φ(u) + φ(v))` with the boundary values handled exactly.
    pub fn copula(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v;
        }
        if v >= 1.0 {
            return u;
        }
        self.phi_inverse(self.phi(u) + self.phi(v))
    }

    /// Kendall distribution function `K(t) = t − φ(t)/φ′(t)`.
    pub fn kendall_function(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        t - self.phi(t) / self.phi_prime(t)
    }
}
