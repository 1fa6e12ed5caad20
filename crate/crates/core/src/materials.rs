//! Stress-strain laws in engineering coordinates.
//!
//! A symmetric tensor `tau` is stored as `[tau11, tau22, sqrt(2) tau12]`, so
//! that `tau : eta` is the Euclidean dot product and fourth-order tangents
//! are symmetric 3x3 matrices for hyperelastic laws.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::HhoError;

pub type Sym = [f64; 3];
pub type Tangent = [[f64; 3]; 3];

const IDENTITY: Sym = [1.0, 1.0, 0.0];

#[inline]
pub fn dot(a: &Sym, b: &Sym) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn trace(a: &Sym) -> f64 {
    a[0] + a[1]
}

/// Frobenius norm.
#[inline]
pub fn norm(a: &Sym) -> f64 {
    dot(a, a).sqrt()
}

/// Engineering coordinates from the physical components.
pub fn from_components(t11: f64, t22: f64, t12: f64) -> Sym {
    [t11, t22, std::f64::consts::SQRT_2 * t12]
}

/// Physical components `(t11, t22, t12)`.
pub fn to_components(a: &Sym) -> (f64, f64, f64) {
    (a[0], a[1], a[2] * std::f64::consts::FRAC_1_SQRT_2)
}

/// Matrix square `tau^2` in engineering coordinates.
fn square(e: &Sym) -> Sym {
    [e[0] * e[0] + 0.5 * e[2] * e[2], e[1] * e[1] + 0.5 * e[2] * e[2], e[2] * (e[0] + e[1])]
}

/// `dev(tau) = tr(tau^2) - tr(tau)^2 / 2`.
pub fn dev(e: &Sym) -> f64 {
    let t = trace(e);
    dot(e, e) - 0.5 * t * t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HenckyVariant {
    /// `Phi(rho) = mu (exp(-rho) + 2 rho)`.
    Exp,
    /// `Phi(rho) = mu (rho / 2 + sqrt(1 + rho))`.
    Carreau,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LawKind {
    Linear,
    HenckyMises { variant: HenckyVariant },
    Damage,
    SecondOrder { a: f64, b: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaterialLaw {
    #[serde(flatten)]
    pub kind: LawKind,
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LawDiagnostics {
    /// Largest sampled `|sigma(tau) - sigma(0)| / |tau|`.
    pub growth_ratio: f64,
    /// Smallest sampled `sigma(tau) : tau / |tau|^2`.
    pub coercivity_ratio: f64,
    /// Smallest sampled `(sigma(tau) - sigma(eta)) : (tau - eta)`.
    pub min_monotonicity: f64,
    /// Range of `(sigma(tau) - sigma(eta)) : (tau - eta) / |tau - eta|^2`.
    pub strong_monotonicity: [f64; 2],
    /// Largest sampled `|sigma(tau) - sigma(eta)| / |tau - eta|`.
    pub lipschitz: f64,
    pub samples: usize,
}

fn check_lame(lambda: f64, mu: f64) -> Result<(), HhoError> {
    if !(mu > 0.0) || !lambda.is_finite() || !mu.is_finite() {
        return Err(HhoError::Material(format!("mu must be positive and finite, got {mu}")));
    }
    if !(lambda + mu > 0.0) {
        return Err(HhoError::Material(format!("lambda + mu must be positive, got {}", lambda + mu)));
    }
    Ok(())
}

impl MaterialLaw {
    pub fn linear(lambda: f64, mu: f64) -> Result<Self, HhoError> {
        check_lame(lambda, mu)?;
        Ok(MaterialLaw { kind: LawKind::Linear, lambda, mu, gamma: 2.0 * mu })
    }

    pub fn hencky_mises(variant: HenckyVariant, lambda: f64, mu: f64) -> Result<Self, HhoError> {
        check_lame(lambda, mu)?;
        let law = MaterialLaw { kind: LawKind::HenckyMises { variant }, lambda, mu, gamma: 0.0 };
        let (d1, _) = law.phi_derivatives(0.0);
        let law = MaterialLaw { gamma: 2.0 * d1, ..law };
        if let Some(w) = law.parameter_warning() {
            log::warn!("{w}");
        }
        Ok(law)
    }

    pub fn damage(lambda: f64, mu: f64) -> Result<Self, HhoError> {
        check_lame(lambda, mu)?;
        Ok(MaterialLaw { kind: LawKind::Damage, lambda, mu, gamma: 2.0 * mu })
    }

    pub fn second_order(lambda: f64, mu: f64, a: f64, b: f64, c: f64) -> Result<Self, HhoError> {
        check_lame(lambda, mu)?;
        if ![a, b, c].iter().all(|v| v.is_finite()) {
            return Err(HhoError::Material("second-order moduli must be finite".into()));
        }
        Ok(MaterialLaw { kind: LawKind::SecondOrder { a, b, c }, lambda, mu, gamma: 2.0 * mu })
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self, HhoError> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(HhoError::Material(format!("gamma must be positive, got {gamma}")));
        }
        Ok(MaterialLaw { gamma, ..self })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            LawKind::Linear => "linear",
            LawKind::HenckyMises { variant: HenckyVariant::Exp } => "hencky_mises_exp",
            LawKind::HenckyMises { variant: HenckyVariant::Carreau } => "hencky_mises_carreau",
            LawKind::Damage => "damage",
            LawKind::SecondOrder { .. } => "second_order",
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, LawKind::Linear)
    }

    pub fn is_hyperelastic(&self) -> bool {
        !matches!(self.kind, LawKind::Damage)
    }

    /// `alpha = lambda + mu` of the Hencky–Mises energy.
    fn alpha(&self) -> f64 {
        self.lambda + self.mu
    }

    /// `Phi'(rho)` and `Phi''(rho)`.
    fn phi_derivatives(&self, rho: f64) -> (f64, f64) {
        let mu = self.mu;
        match self.kind {
            LawKind::HenckyMises { variant: HenckyVariant::Exp } => {
                let e = (-rho).exp();
                (mu * (2.0 - e), mu * e)
            }
            LawKind::HenckyMises { variant: HenckyVariant::Carreau } => {
                let s = (1.0 + rho).sqrt();
                (mu * (0.5 + 0.5 / s), -0.25 * mu / (s * s * s))
            }
            _ => (mu, 0.0),
        }
    }

    /// `Phi(rho) - Phi(0)`.
    fn phi(&self, rho: f64) -> f64 {
        let mu = self.mu;
        match self.kind {
            LawKind::HenckyMises { variant: HenckyVariant::Exp } => mu * ((-rho).exp_m1() + 2.0 * rho),
            LawKind::HenckyMises { variant: HenckyVariant::Carreau } => {
                // sqrt(1 + rho) - 1 without cancellation at small rho.
                mu * (0.5 * rho + rho / ((1.0 + rho).sqrt() + 1.0))
            }
            _ => mu * rho,
        }
    }

    /// Warning text if the parameters break `Phi' < alpha` for some `rho`.
    pub fn parameter_warning(&self) -> Option<String> {
        let sup = match self.kind {
            LawKind::HenckyMises { variant: HenckyVariant::Exp } => 2.0 * self.mu,
            LawKind::HenckyMises { variant: HenckyVariant::Carreau } => self.mu,
            _ => return None,
        };
        (sup >= self.alpha()).then(|| {
            format!(
                "{}: sup Phi' = {sup} is not below alpha = lambda + mu = {}; \
                 the Hencky-Mises assumptions do not hold",
                self.name(),
                self.alpha()
            )
        })
    }

    fn linear_stress(&self, e: &Sym) -> Sym {
        let lt = self.lambda * trace(e);
        let m2 = 2.0 * self.mu;
        [lt + m2 * e[0], lt + m2 * e[1], m2 * e[2]]
    }

    fn linear_tangent(&self) -> Tangent {
        let (l, m2) = (self.lambda, 2.0 * self.mu);
        [[l + m2, l, 0.0], [l, l + m2, 0.0], [0.0, 0.0, m2]]
    }

    pub fn stress(&self, e: &Sym) -> Sym {
        match self.kind {
            LawKind::Linear => self.linear_stress(e),
            LawKind::HenckyMises { .. } => {
                let t = trace(e);
                let (d1, _) = self.phi_derivatives(dev(e));
                let at = self.alpha() * t;
                // alpha tr I + Phi' (2 e - tr I)
                [at + d1 * (2.0 * e[0] - t), at + d1 * (2.0 * e[1] - t), 2.0 * d1 * e[2]]
            }
            LawKind::Damage => {
                let f = 1.0 / (1.0 + norm(e)).sqrt();
                self.linear_stress(e).map(|s| f * s)
            }
            LawKind::SecondOrder { a, b, c } => {
                let t = trace(e);
                let sq = square(e);
                let iso = b * dot(e, e) + c * t * t;
                let lin = self.linear_stress(e);
                let mut s = [0.0; 3];
                for i in 0..3 {
                    s[i] = lin[i] + iso * IDENTITY[i] + 2.0 * b * t * e[i] + a * sq[i];
                }
                s
            }
        }
    }

    /// `d sigma / d eps`; row `i` holds the derivatives of `sigma_i`.
    pub fn tangent(&self, e: &Sym) -> Tangent {
        self.stress_tangent(e).1
    }

    pub fn stress_tangent(&self, e: &Sym) -> (Sym, Tangent) {
        let sigma = self.stress(e);
        let k = match self.kind {
            LawKind::Linear => self.linear_tangent(),
            LawKind::HenckyMises { .. } => {
                let t = trace(e);
                let (d1, d2) = self.phi_derivatives(dev(e));
                let d = [2.0 * e[0] - t, 2.0 * e[1] - t, 2.0 * e[2]];
                let alpha = self.alpha();
                let mut k = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        let id = if i == j { 2.0 } else { 0.0 };
                        k[i][j] = (alpha - d1) * IDENTITY[i] * IDENTITY[j] + d1 * id + d2 * d[i] * d[j];
                    }
                }
                k
            }
            LawKind::Damage => {
                let n = norm(e);
                let f = 1.0 / (1.0 + n).sqrt();
                let c = self.linear_tangent();
                let mut k = c.map(|row| row.map(|v| f * v));
                if n > 1e-300 {
                    let fp = -0.5 / ((1.0 + n) * (1.0 + n).sqrt());
                    let ce = self.linear_stress(e);
                    for i in 0..3 {
                        for j in 0..3 {
                            k[i][j] += fp * ce[i] * e[j] / n;
                        }
                    }
                }
                k
            }
            LawKind::SecondOrder { a, b, c } => {
                let t = trace(e);
                let mut k = self.linear_tangent();
                // Jacobian of the matrix square.
                let dsq = [[2.0 * e[0], 0.0, e[2]], [0.0, 2.0 * e[1], e[2]], [e[2], e[2], e[0] + e[1]]];
                for i in 0..3 {
                    for j in 0..3 {
                        let id = if i == j { 1.0 } else { 0.0 };
                        k[i][j] += 2.0 * b * (IDENTITY[i] * e[j] + e[i] * IDENTITY[j] + t * id)
                            + 2.0 * c * t * IDENTITY[i] * IDENTITY[j]
                            + a * dsq[i][j];
                    }
                }
                k
            }
        };
        (sigma, k)
    }

    /// Stored energy density, normalized so that it vanishes at zero strain.
    pub fn energy(&self, e: &Sym) -> Result<f64, HhoError> {
        let t = trace(e);
        match self.kind {
            LawKind::Linear => Ok(0.5 * self.lambda * t * t + self.mu * dot(e, e)),
            LawKind::HenckyMises { .. } => Ok(0.5 * self.alpha() * t * t + self.phi(dev(e))),
            LawKind::SecondOrder { a, b, c } => Ok(0.5 * self.lambda * t * t
                + self.mu * dot(e, e)
                + c / 3.0 * t * t * t
                + b * t * dot(e, e)
                + a / 3.0 * dot(&square(e), e)),
            LawKind::Damage => Err(HhoError::Material("the damage law has no stored energy density".into())),
        }
    }

    /// Linear law with the tangent at zero strain, used for warm starts.
    pub fn linearized_at_zero(&self) -> MaterialLaw {
        let k = self.tangent(&[0.0; 3]);
        MaterialLaw { kind: LawKind::Linear, lambda: k[0][1], mu: 0.5 * k[2][2], gamma: self.gamma }
    }

    /// Sample the growth, coercivity and monotonicity properties on random
    /// strains of Frobenius norm up to `scale`.
    pub fn diagnostics(&self, samples: usize, scale: f64, seed: u64) -> LawDiagnostics {
        let mut rng = StdRng::seed_from_u64(seed);
        let draw = |rng: &mut StdRng| -> Sym {
            let v: Sym = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let r = scale * rng.random_range(0.0..1.0f64).sqrt();
            let n = norm(&v).max(1e-12);
            v.map(|x| r * x / n)
        };
        let s0 = self.stress(&[0.0; 3]);
        let mut d = LawDiagnostics {
            growth_ratio: 0.0,
            coercivity_ratio: f64::INFINITY,
            min_monotonicity: f64::INFINITY,
            strong_monotonicity: [f64::INFINITY, f64::NEG_INFINITY],
            lipschitz: 0.0,
            samples,
        };
        for _ in 0..samples {
            let tau = draw(&mut rng);
            let eta = draw(&mut rng);
            let st = self.stress(&tau);
            let se = self.stress(&eta);
            let nt = norm(&tau);
            if nt > 0.0 {
                let ds = [st[0] - s0[0], st[1] - s0[1], st[2] - s0[2]];
                d.growth_ratio = d.growth_ratio.max(norm(&ds) / nt);
                d.coercivity_ratio = d.coercivity_ratio.min(dot(&st, &tau) / (nt * nt));
            }
            let dt = [tau[0] - eta[0], tau[1] - eta[1], tau[2] - eta[2]];
            let dsig = [st[0] - se[0], st[1] - se[1], st[2] - se[2]];
            let prod = dot(&dsig, &dt);
            d.min_monotonicity = d.min_monotonicity.min(prod);
            let nd = norm(&dt);
            if nd > 0.0 {
                let r = prod / (nd * nd);
                d.strong_monotonicity[0] = d.strong_monotonicity[0].min(r);
                d.strong_monotonicity[1] = d.strong_monotonicity[1].max(r);
                d.lipschitz = d.lipschitz.max(norm(&dsig) / nd);
            }
        }
        d
    }
}

/// Worst relative errors of central finite differences against the analytic
/// tangent and, for hyperelastic laws, of the energy gradient against the
/// stress.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteDifferenceCheck {
    pub tangent: f64,
    pub energy_gradient: Option<f64>,
    pub samples: usize,
}

impl MaterialLaw {
    /// Central differences with step `1e-6 (1 + |eps|)` on random strains of
    /// norm up to `scale`.
    pub fn finite_difference_check(&self, samples: usize, scale: f64, seed: u64) -> FiniteDifferenceCheck {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut tangent: f64 = 0.0;
        let mut energy: f64 = 0.0;
        for _ in 0..samples {
            let v: Sym = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let r = scale * rng.random_range(0.0..1.0f64);
            let n = norm(&v).max(1e-12);
            let e = v.map(|x| r * x / n);
            let (s, k) = self.stress_tangent(&e);
            let h = 1e-6 * (1.0 + norm(&e));
            let kscale = k.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
            let sscale = norm(&s).max(kscale * norm(&e)).max(f64::MIN_POSITIVE);
            for j in 0..3 {
                let mut ep = e;
                let mut em = e;
                ep[j] += h;
                em[j] -= h;
                let (sp, sm) = (self.stress(&ep), self.stress(&em));
                for i in 0..3 {
                    tangent = tangent.max(((sp[i] - sm[i]) / (2.0 * h) - k[i][j]).abs() / kscale);
                }
                if let (Ok(wp), Ok(wm)) = (self.energy(&ep), self.energy(&em)) {
                    energy = energy.max(((wp - wm) / (2.0 * h) - s[j]).abs() / sscale);
                }
            }
        }
        FiniteDifferenceCheck { tangent, energy_gradient: self.is_hyperelastic().then_some(energy), samples }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laws() -> Vec<MaterialLaw> {
        vec![
            MaterialLaw::linear(1.0, 2.0).unwrap(),
            MaterialLaw::hencky_mises(HenckyVariant::Exp, 1.0, 2.0).unwrap(),
            MaterialLaw::hencky_mises(HenckyVariant::Carreau, 1.0, 2.0).unwrap(),
            MaterialLaw::damage(1.0, 2.0).unwrap(),
            MaterialLaw::second_order(1.0, 2.0, 11.0, -4.8, 1.32).unwrap(),
        ]
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn linear_examples() {
        let law = MaterialLaw::linear(1.0, 2.0).unwrap();
        assert_eq!(law.stress(&IDENTITY), [6.0, 6.0, 0.0]);
        assert_eq!(law.stress(&[0.0; 3]), [0.0; 3]);
        assert_eq!(law.energy(&IDENTITY).unwrap(), 6.0);
        assert_eq!(law.gamma, 4.0);
        let steel = MaterialLaw::linear(11e5, 82e4).unwrap();
        let s = steel.stress(&from_components(1e-3, 0.0, 0.0));
        assert!((s[0] - 2740.0).abs() < 1e-9 && (s[1] - 1100.0).abs() < 1e-9 && s[2] == 0.0);
        assert!(MaterialLaw::linear(1.0, 0.0).is_err());
        assert!(MaterialLaw::linear(-3.0, 1.0).is_err());
    }

    #[test]
    fn hencky_mises_reduces_to_linear_at_zero_deviator() {
        for variant in [HenckyVariant::Exp, HenckyVariant::Carreau] {
            let law = MaterialLaw::hencky_mises(variant, 1.0, 2.0).unwrap();
            let lin = MaterialLaw::linear(1.0, 2.0).unwrap();
            assert_eq!(law.stress(&[0.0; 3]), [0.0; 3]);
            assert_eq!(law.tangent(&[0.0; 3]), lin.tangent(&[0.0; 3]));
            assert_eq!(law.gamma, 4.0);
            for c in [-0.7, 0.3, 2.0] {
                let e = [c, c, 0.0];
                assert!(dev(&e).abs() < 1e-15);
                let (s, sl) = (law.stress(&e), lin.stress(&e));
                for i in 0..3 {
                    assert!((s[i] - sl[i]).abs() < 1e-14);
                }
            }
            assert_eq!(law.linearized_at_zero(), lin);
        }
    }

    #[test]
    fn exp_variant_matches_closed_form() {
        // ((lambda - mu) + mu e^{-dev}) tr I + 2 mu (2 - e^{-dev}) eps
        let (l, m): (f64, f64) = (1.0, 2.0);
        let law = MaterialLaw::hencky_mises(HenckyVariant::Exp, l, m).unwrap();
        let (e11, e22, e12): (f64, f64, f64) = (0.3, -0.1, 0.25);
        let dv = e11 * e11 + e22 * e22 + 2.0 * e12 * e12 - 0.5 * (e11 + e22) * (e11 + e22);
        let x = (-dv).exp();
        let lt = ((l - m) + m * x) * (e11 + e22);
        let mt = 2.0 * m * (2.0 - x);
        let (s11, s22, s12) = to_components(&law.stress(&from_components(e11, e22, e12)));
        assert!((s11 - (lt + mt * e11)).abs() < 1e-14);
        assert!((s22 - (lt + mt * e22)).abs() < 1e-14);
        assert!((s12 - mt * e12).abs() < 1e-14);
    }

    #[test]
    fn carreau_variant_matches_closed_form() {
        let (l, m): (f64, f64) = (11e5, 82e4);
        let law = MaterialLaw::hencky_mises(HenckyVariant::Carreau, l, m).unwrap();
        let (e11, e22, e12): (f64, f64, f64) = (0.4, 0.1, -0.3);
        let dv = e11 * e11 + e22 * e22 + 2.0 * e12 * e12 - 0.5 * (e11 + e22) * (e11 + e22);
        let r = (1.0 + dv).powf(-0.5);
        let lt = ((l + m / 2.0) - m / 2.0 * r) * (e11 + e22);
        let mt = m * (1.0 + r);
        let (s11, s22, s12) = to_components(&law.stress(&from_components(e11, e22, e12)));
        assert!(close(s11, lt + mt * e11, 1e-14));
        assert!(close(s22, lt + mt * e22, 1e-14));
        assert!(close(s12, mt * e12, 1e-14));
    }

    #[test]
    fn damage_and_second_order_examples() {
        let law = MaterialLaw::damage(1.0, 2.0).unwrap();
        let lin = MaterialLaw::linear(1.0, 2.0).unwrap();
        let e = [3.0, 0.0, 0.0];
        let (s, sl) = (law.stress(&e), lin.stress(&e));
        for i in 0..3 {
            assert!((s[i] - 0.5 * sl[i]).abs() < 1e-14);
        }
        assert_eq!(law.stress(&[0.0; 3]), [0.0; 3]);
        assert!(law.energy(&e).is_err());

        let sec = MaterialLaw::second_order(0.0, 1.0, 3.0, 0.0, 0.0).unwrap();
        // Only the A term: remove the 2 mu eps part with mu = 1.
        let (a, b) = (0.2, -0.5);
        let s = sec.stress(&[a, b, 0.0]);
        assert!((s[0] - 2.0 * a - 3.0 * a * a).abs() < 1e-15);
        assert!((s[1] - 2.0 * b - 3.0 * b * b).abs() < 1e-15);
        assert_eq!(s[2], 0.0);
        let armco = MaterialLaw::second_order(11e5, 82e4, 11e6, -48e5, 13.2e5).unwrap();
        assert_eq!(armco.kind, LawKind::SecondOrder { a: 11e6, b: -48e5, c: 13.2e5 });
        let json = serde_json::to_value(armco).unwrap();
        assert_eq!(json["b"], -48e5);
        assert_eq!(armco.stress(&[0.0; 3]), [0.0; 3]);
    }

    #[test]
    fn parameter_warnings() {
        let exp = MaterialLaw::hencky_mises(HenckyVariant::Exp, 1.0, 2.0).unwrap();
        assert!(exp.parameter_warning().is_some());
        let exp = MaterialLaw::hencky_mises(HenckyVariant::Exp, 3.0, 2.0).unwrap();
        assert!(exp.parameter_warning().is_none());
        let car = MaterialLaw::hencky_mises(HenckyVariant::Carreau, 11e5, 82e4).unwrap();
        assert!(car.parameter_warning().is_none());
    }

    #[test]
    fn sampled_assumptions() {
        for law in laws() {
            let d = law.diagnostics(10_000, 1.0, 7);
            if matches!(law.kind, LawKind::SecondOrder { .. }) {
                continue;
            }
            assert!(d.coercivity_ratio > 0.0, "{}: {d:?}", law.name());
            assert!(d.min_monotonicity >= -1e-12, "{}: {d:?}", law.name());
            assert!(d.strong_monotonicity[0] > 0.0 && d.lipschitz.is_finite());
        }
        let sec = laws()[4].diagnostics(10_000, 1.0, 7);
        assert!(sec.min_monotonicity < 0.0);
    }

    #[test]
    fn finite_difference_summary() {
        for law in laws() {
            let c = law.finite_difference_check(100, 0.8, 7);
            assert!(c.tangent < 1e-6, "{}: {c:?}", law.name());
            assert_eq!(c.energy_gradient.is_some(), law.is_hyperelastic());
            assert!(c.energy_gradient.unwrap_or(0.0) < 1e-6, "{}: {c:?}", law.name());
        }
    }

    #[test]
    fn energies_accurate_at_tiny_strain() {
        // Psi ~ sigma(e):e / 2 to leading order.
        let e = [3e-9, -1e-9, 2e-9];
        for law in laws().into_iter().filter(|l| l.is_hyperelastic()) {
            let w = law.energy(&e).unwrap();
            let q = 0.5 * dot(&law.stress(&e), &e);
            assert!((w - q).abs() <= 1e-6 * q.abs(), "{}: {w:e} vs {q:e}", law.name());
        }
    }

    fn strain() -> impl Strategy<Value = Sym> {
        (-0.6..0.6f64, -0.6..0.6f64, -0.5..0.5f64).prop_map(|(a, b, c)| [a, b, c])
    }

    proptest! {
        #[test]
        fn tangent_matches_finite_differences(e in strain()) {
            for law in laws() {
                let k = law.tangent(&e);
                let h = 1e-6 * (1.0 + norm(&e));
                let scale = k.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
                for j in 0..3 {
                    let mut ep = e;
                    let mut em = e;
                    ep[j] += h;
                    em[j] -= h;
                    let (sp, sm) = (law.stress(&ep), law.stress(&em));
                    for i in 0..3 {
                        let fd = (sp[i] - sm[i]) / (2.0 * h);
                        prop_assert!((fd - k[i][j]).abs() <= 1e-6 * scale, "{} K[{i}][{j}] {} vs {fd}", law.name(), k[i][j]);
                    }
                }
                if law.is_hyperelastic() {
                    for i in 0..3 {
                        for j in 0..3 {
                            prop_assert!((k[i][j] - k[j][i]).abs() <= 1e-10 * scale);
                        }
                    }
                }
            }
        }

        #[test]
        fn energy_gradient_is_stress(e in strain()) {
            for law in laws().into_iter().filter(|l| l.is_hyperelastic()) {
                let s = law.stress(&e);
                let h = 1e-6 * (1.0 + norm(&e));
                let scale = norm(&s).max(1.0);
                for j in 0..3 {
                    let mut ep = e;
                    let mut em = e;
                    ep[j] += h;
                    em[j] -= h;
                    let fd = (law.energy(&ep).unwrap() - law.energy(&em).unwrap()) / (2.0 * h);
                    prop_assert!((fd - s[j]).abs() <= 1e-6 * scale, "{} sigma[{j}] {} vs {fd}", law.name(), s[j]);
                }
            }
        }
    }
}
