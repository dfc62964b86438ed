//! Environment laws and their analytic quantities.
//!
//! An [`EnvironmentSpec`] is the law of `(A_i, i <= N)`: an offspring
//! distribution `q` plus a weight law for the i.i.d. `A`'s. Everything the
//! experiments predict flows from the log-Laplace transform
//! `psi(t) = log E[sum_{|x|=1} A(x)^t] = log(E[N] E[A^t])`, so the weight laws
//! are restricted to finite tables and the log-normal family, for which `psi`
//! and all its derivatives have closed forms. A calibrated spec satisfies
//! `psi(1) = psi'(1) = 0`, the null-recurrent boundary case.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const CAL_TOL: f64 = 1e-10;
const LATTICE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightLaw {
    /// Finite table of (value, probability) atoms for A.
    Table(Vec<(f64, f64)>),
    /// log A ~ Normal(m, s2).
    LogNormal { m: f64, s2: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    /// Identifier used in reports ("sym2", "gauss2", ...).
    pub name: String,
    /// Config `environment.kind`: two_point, lognormal or table.
    pub kind: String,
    /// Offspring distribution q as (k, P(N=k)) atoms.
    pub offspring_law: Vec<(u32, f64)>,
    pub weight_law: WeightLaw,
    /// Fixed true in this artifact: weights are i.i.d. given N.
    pub weights_iid_given_n: bool,
    /// Ellipticity lower bound; None turns the ellipticity hypotheses off.
    pub epsilon0: Option<f64>,
    /// Max offspring count when ellipticity is enforced.
    pub n0: Option<u32>,
    /// True if supp(log A) lies on an arithmetic lattice b + cZ.
    pub lattice_flag: bool,
    /// Marked by the calibration constructors once psi(1)=psi'(1)=0 holds.
    pub calibrated: bool,
}

impl EnvironmentSpec {
    /// Two-point calibrated spec on a given supercritical offspring law:
    /// A in {a, 1/a} with p a = (1-p)/a = 1/(2 E[N]), which solves
    /// E[N]E[A] = 1 and E[A log A] = 0 in closed form.
    pub fn two_point(name: &str, offspring: &[(u32, f64)]) -> Result<Self> {
        let mean_n: f64 = offspring.iter().map(|&(k, p)| k as f64 * p).sum();
        if mean_n <= 1.0 {
            return Err(Error::InvalidSpec(format!("E[N] = {mean_n} <= 1, subcritical")));
        }
        let tau = 1.0 / mean_n; // target E[A]
        let inv = 1.0 / tau;
        let a = inv - (inv * inv - 1.0).sqrt();
        let p = tau / (2.0 * a);
        let n0 = offspring.iter().map(|&(k, _)| k).max().unwrap();
        let spec = EnvironmentSpec {
            name: name.to_string(),
            kind: "two_point".to_string(),
            offspring_law: offspring.to_vec(),
            weight_law: WeightLaw::Table(vec![(a, p), (1.0 / a, 1.0 - p)]),
            weights_iid_given_n: true,
            epsilon0: Some(a),
            n0: Some(n0),
            lattice_flag: true,
            calibrated: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The artifact's reference lattice spec: N = 2, A in {2-sqrt(3), 1/(2-sqrt(3))}.
    pub fn sym2() -> Self {
        Self::two_point("sym2", &[(2, 1.0)]).expect("closed-form calibration")
    }

    /// Two-point spec with Boettcher offspring (q0 + q1 = 0): q(2)=q(3)=1/2.
    pub fn boettcher2() -> Self {
        Self::two_point("boett2", &[(2, 0.5), (3, 0.5)]).expect("closed-form calibration")
    }

    /// Two-point spec with Schroeder offspring q(1)=q(3)=1/2 (same E[N] as sym2,
    /// hence the same weight atoms).
    pub fn schroeder13() -> Self {
        Self::two_point("schr13", &[(1, 0.5), (3, 0.5)]).expect("closed-form calibration")
    }

    /// Non-lattice calibrated spec: N = 2, log A ~ Normal(-2 log 2, 2 log 2).
    /// Ellipticity is off (sanctioned deviation; psi still exists everywhere).
    pub fn gauss2() -> Self {
        let l2 = std::f64::consts::LN_2;
        let spec = EnvironmentSpec {
            name: "gauss2".to_string(),
            kind: "lognormal".to_string(),
            offspring_law: vec![(2, 1.0)],
            weight_law: WeightLaw::LogNormal { m: -2.0 * l2, s2: 2.0 * l2 },
            weights_iid_given_n: true,
            epsilon0: None,
            n0: Some(2),
            lattice_flag: false,
            calibrated: true,
        };
        spec.validate().expect("gauss2 is valid by construction");
        spec
    }

    /// Degenerate smoke-test spec: deterministic offspring, all weights 1 (V = 0).
    /// Not calibrated (psi(1) = log E[N] != 0); used for plumbing tests only.
    pub fn flat(n_children: u32) -> Self {
        EnvironmentSpec {
            name: format!("flat{n_children}"),
            kind: "table".to_string(),
            offspring_law: vec![(n_children, 1.0)],
            weight_law: WeightLaw::Table(vec![(1.0, 1.0)]),
            weights_iid_given_n: true,
            epsilon0: Some(1.0),
            n0: Some(n_children),
            lattice_flag: true,
            calibrated: false,
        }
    }

    /// General table spec; lattice flag is detected from the weight values.
    pub fn from_table(
        name: &str,
        offspring: &[(u32, f64)],
        weights: &[(f64, f64)],
        epsilon0: Option<f64>,
    ) -> Result<Self> {
        let n0 = offspring.iter().map(|&(k, _)| k).max().unwrap_or(0);
        let spec = EnvironmentSpec {
            name: name.to_string(),
            kind: "table".to_string(),
            offspring_law: offspring.to_vec(),
            weight_law: WeightLaw::Table(weights.to_vec()),
            weights_iid_given_n: true,
            epsilon0,
            n0: Some(n0),
            lattice_flag: detect_lattice(weights),
            calibrated: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let qsum: f64 = self.offspring_law.iter().map(|&(_, p)| p).sum();
        if (qsum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!("offspring law sums to {qsum}")));
        }
        if let WeightLaw::Table(t) = &self.weight_law {
            let wsum: f64 = t.iter().map(|&(_, p)| p).sum();
            if (wsum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidSpec(format!("weight law sums to {wsum}")));
            }
            if t.iter().any(|&(v, _)| v <= 0.0) {
                return Err(Error::InvalidSpec("non-positive weight value".to_string()));
            }
        }
        if self.mean_offspring() <= 1.0 {
            return Err(Error::InvalidSpec("E[N] <= 1: Galton-Watson tree not supercritical".into()));
        }
        if let Some(eps) = self.epsilon0 {
            if !(0.0 < eps && eps <= 1.0) {
                return Err(Error::InvalidSpec(format!("epsilon0 = {eps} outside (0,1]")));
            }
            if let WeightLaw::Table(t) = &self.weight_law {
                for &(v, p) in t {
                    if p > 0.0 && !(eps <= v && v <= 1.0 / eps + 1e-15) {
                        return Err(Error::InvalidSpec(format!(
                            "weight {v} outside ellipticity band [{eps}, {}]",
                            1.0 / eps
                        )));
                    }
                }
            }
            if let Some(n0) = self.n0 {
                if self.offspring_law.iter().any(|&(k, p)| p > 0.0 && k > n0) {
                    return Err(Error::InvalidSpec("offspring mass above N0".into()));
                }
            }
        }
        if self.calibrated {
            let p1 = self.psi(1.0);
            let dp1 = self.psi_prime(1.0);
            if p1.abs() >= CAL_TOL || dp1.abs() >= CAL_TOL {
                return Err(Error::NotCalibrated(format!("psi(1) = {p1}, psi'(1) = {dp1}")));
            }
        }
        Ok(())
    }

    pub fn mean_offspring(&self) -> f64 {
        self.offspring_law.iter().map(|&(k, p)| k as f64 * p).sum()
    }

    /// Draw an offspring count N from the offspring law.
    pub fn sample_offspring<R: rand::Rng>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(k, p) in &self.offspring_law {
            acc += p;
            if u < acc {
                return k;
            }
        }
        self.offspring_law.last().map(|&(k, _)| k).unwrap_or(0)
    }

    /// Draw one weight A from the weight law.
    pub fn sample_weight<R: rand::Rng>(&self, rng: &mut R) -> f64 {
        match &self.weight_law {
            WeightLaw::Table(tab) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for &(v, p) in tab {
                    acc += p;
                    if u < acc {
                        return v;
                    }
                }
                tab.last().map(|&(v, _)| v).unwrap_or(1.0)
            }
            WeightLaw::LogNormal { m, s2 } => {
                use rand_distr::Distribution;
                let normal = rand_distr::Normal::new(*m, s2.sqrt()).expect("validated s2 > 0");
                normal.sample(rng).exp()
            }
        }
    }

    /// psi(0) = log E[N].
    pub fn psi0(&self) -> f64 {
        self.mean_offspring().ln()
    }

    /// psi(t) = log(E[N] E[A^t]).
    pub fn psi(&self, t: f64) -> f64 {
        self.mean_offspring().ln() + self.log_mgf_log_a(t)
    }

    /// d/dt psi(t) = E[A^t log A] / E[A^t].
    pub fn psi_prime(&self, t: f64) -> f64 {
        match &self.weight_law {
            WeightLaw::Table(tab) => {
                let (mut num, mut den) = (0.0, 0.0);
                for &(v, p) in tab {
                    let w = p * v.powf(t);
                    num += w * v.ln();
                    den += w;
                }
                num / den
            }
            WeightLaw::LogNormal { m, s2 } => m + t * s2,
        }
    }

    /// log E[A^t]; finite for every t for the supported laws.
    fn log_mgf_log_a(&self, t: f64) -> f64 {
        match &self.weight_law {
            WeightLaw::Table(tab) => {
                let s: f64 = tab.iter().map(|&(v, p)| p * v.powf(t)).sum();
                s.ln()
            }
            WeightLaw::LogNormal { m, s2 } => t * m + t * t * s2 / 2.0,
        }
    }

    /// sigma^2 = psi''(1).
    pub fn sigma2(&self) -> f64 {
        match &self.weight_law {
            WeightLaw::Table(tab) => {
                let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
                for &(v, p) in tab {
                    let w = p * v;
                    let l = v.ln();
                    m0 += w;
                    m1 += w * l;
                    m2 += w * l * l;
                }
                m2 / m0 - (m1 / m0) * (m1 / m0)
            }
            WeightLaw::LogNormal { s2, .. } => *s2,
        }
    }

    /// alpha = |log epsilon0| (Remark A.1); errors when ellipticity is off.
    pub fn alpha(&self) -> Result<f64> {
        self.epsilon0
            .map(|e| e.ln().abs())
            .ok_or_else(|| Error::EllipticityRequired(format!("spec {} has no epsilon0", self.name)))
    }

    /// Documented surrogate for alpha when ellipticity is off: the q-quantile
    /// of |log A| (exact for the log-normal family).
    pub fn surrogate_alpha(&self, q: f64) -> f64 {
        match &self.weight_law {
            WeightLaw::Table(tab) => tab
                .iter()
                .filter(|&&(_, p)| p > 0.0)
                .map(|&(v, _)| v.ln().abs())
                .fold(0.0, f64::max),
            WeightLaw::LogNormal { m, s2 } => {
                // |log A| with log A ~ N(m, s2): invert by bisection on the
                // folded normal CDF.
                let sd = s2.sqrt();
                let cdf = |x: f64| {
                    0.5 * (erf_approx((x - m) / (sd * std::f64::consts::SQRT_2))
                        - erf_approx((-x - m) / (sd * std::f64::consts::SQRT_2)))
                };
                let (mut lo, mut hi) = (0.0, m.abs() + 10.0 * sd);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if cdf(mid) < q {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// Cumulants u_j of the spine increment S1 up to `order` (u_j = j! times
    /// the x^j coefficient of psi(1-x), the cumulant generating function of S1).
    pub fn cumulants(&self, order: usize) -> Result<Analytics> {
        Analytics::build(self, order, DEFAULT_CRAMER_ORDER)
    }

    /// J~(a) = inf_{t>=0} (psi(-t) - a t), by golden-section to 1e-10.
    pub fn jtilde(&self, a: f64) -> f64 {
        let obj = |t: f64| self.psi(-t) - a * t;
        // Expand until the convex objective starts increasing.
        let mut hi = 1.0;
        while obj(hi * 1.5) < obj(hi) && hi < 1e6 {
            hi *= 1.5;
        }
        golden_min(obj, 0.0, hi * 1.5, 1e-10)
    }

    /// gamma~ = sup{a : J~(a) > 0}, by bisection to 1e-8.
    pub fn gamma_tilde(&self) -> Result<f64> {
        if !self.calibrated {
            return Err(Error::NotCalibrated(self.name.clone()));
        }
        let hi_cap = 10.0 * self.sigma2() + 10.0;
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.jtilde(hi) > 0.0 {
            hi *= 2.0;
            if hi > hi_cap {
                return Err(Error::BisectionFailed { lo, hi });
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.jtilde(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// A weight table is lattice when the pairwise differences of log-values are
/// all integer multiples of a common span (exact gcd up to 1e-9).
pub fn detect_lattice(weights: &[(f64, f64)]) -> bool {
    let logs: Vec<f64> =
        weights.iter().filter(|&&(_, p)| p > 0.0).map(|&(v, _)| v.ln()).collect();
    if logs.len() <= 2 {
        return true;
    }
    let diffs: Vec<f64> = logs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut span = 0.0f64;
    for &d in &diffs {
        span = float_gcd(span, d);
    }
    if span <= LATTICE_TOL {
        return false;
    }
    // Euclid on incommensurable values stalls just above the tolerance; accept
    // the span only when every difference is a small integer multiple of it.
    diffs.iter().all(|&d| {
        let n = (d / span).round();
        n.abs() < 1e6 && (d - n * span).abs() < LATTICE_TOL
    })
}

fn float_gcd(a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b > LATTICE_TOL {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub const DEFAULT_CRAMER_ORDER: usize = 3;
const DEFAULT_GUARD: f64 = 0.25;

/// Derived analytic quantities of a calibrated spec.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Analytics {
    pub psi0: f64,
    pub sigma2: f64,
    /// Cumulants u_1..u_J of S1 (u_1 = 0, u_2 = sigma^2 for calibrated specs).
    pub cumulants: Vec<f64>,
    /// Number of lambda coefficients retained.
    pub cramer_order: usize,
    /// lambda(x) = sum_k lambda_coeffs[k] x^k, so that
    /// f(x) = 1 - x/(2 sigma^2) + x^2 lambda(x).
    pub lambda_coeffs: Vec<f64>,
    pub gamma_tilde: f64,
    /// Guard radius for the truncated series.
    pub guard: f64,
}

impl Analytics {
    pub fn build(spec: &EnvironmentSpec, order: usize, cramer_order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidSpec("cumulant order must be >= 2".into()));
        }
        let work = order.max(cramer_order + 4);
        let kappa = spine_cumulants(spec, work)?;
        let sigma2 = kappa[1];
        if sigma2 <= 0.0 {
            return Err(Error::InvalidSpec("sigma^2 <= 0".into()));
        }
        let lambda_coeffs = cramer_lambda(&kappa, cramer_order);
        // When every retained lambda coefficient vanishes (the Gaussian spine)
        // the quadratic rate function is exact and there is no truncation
        // radius to guard.
        let guard = if lambda_coeffs.iter().all(|c| c.abs() < 1e-12) {
            f64::INFINITY
        } else {
            DEFAULT_GUARD
        };
        Ok(Analytics {
            psi0: spec.psi0(),
            sigma2,
            cumulants: kappa[..order].to_vec(),
            cramer_order,
            lambda_coeffs,
            gamma_tilde: spec.gamma_tilde()?,
            guard,
        })
    }

    /// Truncated Cramer lambda series.
    pub fn lambda(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.lambda_coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// f(x) = 1 - x/(2 sigma^2) + x^2 lambda(x), guarded.
    pub fn cramer_f(&self, x: f64) -> Result<f64> {
        if x.abs() >= self.guard {
            return Err(Error::RadiusExceeded { arg: x, guard: self.guard });
        }
        Ok(1.0 - x / (2.0 * self.sigma2) + x * x * self.lambda(x))
    }

    /// g(x) = f(x) - 1.
    pub fn g(&self, x: f64) -> Result<f64> {
        Ok(self.cramer_f(x)? - 1.0)
    }
}

/// Cumulants kappa_1..kappa_order of the spine increment S1.
fn spine_cumulants(spec: &EnvironmentSpec, order: usize) -> Result<Vec<f64>> {
    match &spec.weight_law {
        WeightLaw::LogNormal { m, s2 } => {
            // S1 = -log A under the e^{-V} tilt is Normal(-m - s2, s2).
            let mut k = vec![0.0; order];
            k[0] = -m - s2;
            k[1] = *s2;
            Ok(k)
        }
        WeightLaw::Table(tab) => {
            // Atoms of S1: value -log v with mass E[N] p v (the many-to-one
            // increment law; total mass e^{psi(1)} = 1).
            let mean_n = spec.mean_offspring();
            let atoms: Vec<(f64, f64)> =
                tab.iter().map(|&(v, p)| (-v.ln(), mean_n * p * v)).collect();
            let mass: f64 = atoms.iter().map(|&(_, w)| w).sum();
            if (mass - 1.0).abs() > 1e-9 {
                return Err(Error::NotCalibrated(format!(
                    "spine increment mass {mass} != 1 (psi(1) != 0)"
                )));
            }
            // Raw moments, then moments -> cumulants recursion.
            let mut raw = vec![0.0; order + 1];
            raw[0] = 1.0;
            for n in 1..=order {
                raw[n] = atoms.iter().map(|&(x, w)| w * x.powi(n as i32)).sum();
            }
            let mut kappa = vec![0.0; order + 1];
            for n in 1..=order {
                let mut k = raw[n];
                for j in 1..n {
                    k -= binom(n - 1, j - 1) * kappa[j] * raw[n - j];
                }
                kappa[n] = k;
            }
            Ok(kappa[1..].to_vec())
        }
    }
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Coefficients of the Cramer series lambda from the cumulants of S1.
///
/// Convention (recorded in the decisions ledger): with K(x) = psi(1-x) the
/// cumulant generating function of S1 and I its Legendre transform, the
/// moderate-deviation exponent is b*g(b/m) with g(x) = -I(x)/x, and
/// lambda(x) = (g(x) + x/(2 sigma^2)) / x^2. The coefficients come from
/// truncated series reversion of K'.
fn cramer_lambda(kappa: &[f64], cramer_order: usize) -> Vec<f64> {
    let work = cramer_order + 4;
    // c[j] = kappa_j / j! for j >= 2: K(x) = sum c_j x^j (kappa_1 = 0 for
    // calibrated specs; a tiny residual is dropped here by construction).
    let mut c = vec![0.0; work + 1];
    for (j, cj) in c.iter_mut().enumerate().take(work + 1).skip(2) {
        let fact: f64 = (2..=j).map(|i| i as f64).product();
        *cj = kappa.get(j - 1).copied().unwrap_or(0.0) / fact;
    }
    // Invert K'(s) = y: s(y) = (y - sum_{j>=3} j c_j s^{j-1}) / (2 c_2),
    // iterated; each pass gains one series order.
    let two_c2 = 2.0 * c[2];
    let mut s = vec![0.0; work + 1];
    s[1] = 1.0 / two_c2;
    for _ in 0..work {
        // tail(y) = sum_{j>=3} j c_j s(y)^{j-1}
        let mut tail = vec![0.0; work + 1];
        for j in 3..=work {
            if c[j] == 0.0 {
                continue;
            }
            let mut p = vec![0.0; work + 1];
            p[0] = 1.0;
            for _ in 0..(j - 1) {
                p = poly_mul(&p, &s, work);
            }
            for (t, pv) in tail.iter_mut().zip(p.iter()) {
                *t += j as f64 * c[j] * pv;
            }
        }
        let mut next = vec![0.0; work + 1];
        next[1] = 1.0 / two_c2;
        for i in 2..=work {
            next[i] = -tail[i] / two_c2;
        }
        s = next;
    }
    // I(y) = y s(y) - K(s(y)).
    let mut big_i = vec![0.0; work + 1];
    for i in 0..work {
        big_i[i + 1] += s[i];
    }
    let mut spow = vec![0.0; work + 1];
    spow[0] = 1.0;
    for j in 1..=work {
        spow = poly_mul(&spow, &s, work);
        if j >= 2 && c[j] != 0.0 {
            for i in 0..=work {
                big_i[i] -= c[j] * spow[i];
            }
        }
    }
    // g(y) = -I(y)/y ; lambda(y) = (g(y) + y/(2 sigma^2)) / y^2
    // I starts at y^2 with coefficient 1/(2 kappa_2), so g_1 = -1/(2 sigma^2)
    // and lambda_k = -I_{k+3}.
    (0..cramer_order).map(|k| -big_i.get(k + 3).copied().unwrap_or(0.0)).collect()
}

fn poly_mul(a: &[f64], b: &[f64], trunc: usize) -> Vec<f64> {
    let mut out = vec![0.0; trunc + 1];
    for (i, &ai) in a.iter().enumerate().take(trunc + 1) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(trunc + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Golden-section minimizer for a convex objective on [lo, hi].
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    f(0.5 * (lo + hi))
}

/// Abramowitz-Stegun 7.1.26 erf approximation (|err| < 1.5e-7); only used for
/// the documented alpha surrogate, never in an asserted tolerance path.
fn erf_approx(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    #[test]
    fn sym2_closed_form() {
        let s = EnvironmentSpec::sym2();
        let a = 2.0 - 3f64.sqrt();
        let p = (2.0 + 3f64.sqrt()) / 4.0;
        if let WeightLaw::Table(t) = &s.weight_law {
            assert_abs_diff_eq!(t[0].0, a, epsilon = 1e-14);
            assert_abs_diff_eq!(t[0].1, p, epsilon = 1e-14);
        } else {
            panic!("sym2 is a table spec");
        }
        assert!(s.psi(1.0).abs() < 1e-12);
        assert!(s.psi_prime(1.0).abs() < 1e-12);
        assert_abs_diff_eq!(s.psi0(), LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.sigma2(), a.ln() * a.ln(), epsilon = 1e-12);
        assert!(s.lattice_flag);
    }

    #[test]
    fn gauss2_closed_form() {
        let s = EnvironmentSpec::gauss2();
        assert!(s.psi(1.0).abs() < 1e-12);
        assert!(s.psi_prime(1.0).abs() < 1e-12);
        assert_abs_diff_eq!(s.sigma2(), 2.0 * LN_2, epsilon = 1e-14);
        // psi(-1) = 4 log 2 for gauss2.
        assert_abs_diff_eq!(s.psi(-1.0), 4.0 * LN_2, epsilon = 1e-12);
        // psi(1-x) = x^2 log 2 at a few points.
        for &x in &[0.1, 0.5, -0.3] {
            assert_abs_diff_eq!(s.psi(1.0 - x), x * x * LN_2, epsilon = 1e-12);
        }
        assert!(!s.lattice_flag);
    }

    #[test]
    fn psi_at_zero_is_log_mean_offspring() {
        for s in [EnvironmentSpec::sym2(), EnvironmentSpec::gauss2(), EnvironmentSpec::boettcher2()]
        {
            assert_abs_diff_eq!(s.psi(0.0), s.mean_offspring().ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn psi_is_convex_on_a_grid() {
        for s in [EnvironmentSpec::sym2(), EnvironmentSpec::gauss2()] {
            let ts: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.1).collect();
            for w in ts.windows(3) {
                let mid = s.psi(w[1]);
                let avg = 0.5 * (s.psi(w[0]) + s.psi(w[2]));
                assert!(mid <= avg + 1e-12, "psi not convex at {}", w[1]);
            }
        }
    }

    #[test]
    fn cumulants_gauss2_vanish_beyond_two() {
        let a = EnvironmentSpec::gauss2().cumulants(5).unwrap();
        assert_abs_diff_eq!(a.cumulants[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.cumulants[1], 2.0 * LN_2, epsilon = 1e-12);
        for j in 2..5 {
            assert_abs_diff_eq!(a.cumulants[j], 0.0, epsilon = 1e-12);
        }
        for &c in &a.lambda_coeffs {
            assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cumulants_sym2() {
        let spec = EnvironmentSpec::sym2();
        let a = spec.cumulants(4).unwrap();
        let la = (2.0 - 3f64.sqrt()).ln();
        assert_abs_diff_eq!(a.cumulants[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.cumulants[1], la * la, epsilon = 1e-12);
        // S1 = +-|log a| with probability 1/2: kappa_3 = 0, kappa_4 = -2 mu^4
        // for a symmetric two-point law at +-mu.
        assert_abs_diff_eq!(a.cumulants[2], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(a.cumulants[3], -2.0 * la.powi(4), epsilon = 1e-9);
    }

    #[test]
    fn cramer_f_gauss2_is_linear() {
        let a = EnvironmentSpec::gauss2().cumulants(5).unwrap();
        for &x in &[-0.2, -0.1, 0.0, 0.05, 0.2] {
            let f = a.cramer_f(x).unwrap();
            assert_abs_diff_eq!(f, 1.0 - x / (4.0 * LN_2), epsilon = 1e-14);
        }
        // The Gaussian series is exact, so no radius guard applies...
        assert!(a.cramer_f(0.4).is_ok());
        // ...but truncated non-Gaussian series are guarded.
        let sym = EnvironmentSpec::sym2().cumulants(5).unwrap();
        assert!(sym.cramer_f(0.3).is_err());
    }

    #[test]
    fn cramer_f_matches_numeric_legendre_oracle() {
        // Oracle: I(x) = max_s (s x - psi(1-s)) by golden-section max, then
        // f_oracle(x) = 1 - I(x)/x. Independent of the series-reversion path.
        let spec = EnvironmentSpec::sym2();
        let a = spec.cumulants(6).unwrap();
        for &x in &[0.05f64, 0.08] {
            let neg_i = golden_min(|s: f64| -(s * x - spec.psi(1.0 - s)), 0.0, 1.0, 1e-12);
            let f_oracle = 1.0 + neg_i / x;
            let f_series = a.cramer_f(x).unwrap();
            assert!(
                (f_series - f_oracle).abs() < 1e-3,
                "x={x}: series {f_series} vs oracle {f_oracle}"
            );
        }
    }

    #[test]
    fn gamma_tilde_gauss2() {
        let s = EnvironmentSpec::gauss2();
        let g = s.gamma_tilde().unwrap();
        assert!((g - 4.0 * LN_2).abs() < 1e-6);
        assert_abs_diff_eq!(s.jtilde(0.0), LN_2, epsilon = 1e-9);
        assert!(s.jtilde(g).abs() < 1e-6);
        // psi(0)/gamma~ = 1/4 exactly.
        assert!((s.psi0() / g - 0.25).abs() < 1e-6);
    }

    #[test]
    fn gamma_tilde_ratio_in_unit_interval() {
        for s in [EnvironmentSpec::sym2(), EnvironmentSpec::gauss2(), EnvironmentSpec::boettcher2()]
        {
            let g = s.gamma_tilde().unwrap();
            let r = s.psi0() / g;
            assert!(r > 0.0 && r < 1.0, "{}: psi0/gamma = {r}", s.name);
            assert!(s.jtilde(g).abs() < 1e-6);
        }
    }

    #[test]
    fn jtilde_concave_decreasing_for_gauss2() {
        let s = EnvironmentSpec::gauss2();
        let g = s.gamma_tilde().unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| g * i as f64 / 20.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&a| s.jtilde(a)).collect();
        for w in vals.windows(2) {
            assert!(w[1] < w[0] + 1e-12, "J~ not decreasing");
        }
        for w in vals.windows(3) {
            assert!(w[1] >= 0.5 * (w[0] + w[2]) - 1e-9, "J~ not concave");
        }
    }

    #[test]
    fn lattice_detection() {
        assert!(detect_lattice(&[(0.5, 0.5), (2.0, 0.5)]));
        // log-values 0, log 2, log 3 are not on a common lattice
        assert!(!detect_lattice(&[(1.0, 0.4), (2.0, 0.3), (3.0, 0.3)]));
        // 1, 2, 4: log spans {log2, log2} -> lattice
        assert!(detect_lattice(&[(1.0, 0.4), (2.0, 0.3), (4.0, 0.3)]));
    }

    #[test]
    fn subcritical_offspring_rejected() {
        assert!(EnvironmentSpec::two_point("bad", &[(1, 1.0)]).is_err());
    }

    #[test]
    fn boettcher_calibration() {
        let s = EnvironmentSpec::boettcher2();
        assert!(s.psi(1.0).abs() < 1e-12);
        assert!(s.psi_prime(1.0).abs() < 1e-12);
        assert_abs_diff_eq!(s.mean_offspring(), 2.5, epsilon = 1e-15);
    }
}
