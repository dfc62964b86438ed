//! The one-dimensional spine walk S and Monte Carlo checks of its estimates.
//!
//! The many-to-one identity turns expectations of sums over generation-n
//! vertices, weighted by e^{-V}, into expectations along a single random walk
//! S with i.i.d. increments. For weight tables the increment law is the exact
//! finite table P(S1 = -log a) = E[N] P(A = a) a; for the log-normal family it
//! is an exact Gaussian. Everything downstream (ballot estimates, passage
//! probabilities, excursion sums, local windows) runs on this walk.

use crate::envspec::{Analytics, EnvironmentSpec, WeightLaw};
use crate::error::{Error, Result};
use crate::stats::{Accumulator, Estimate};
use crate::tree::TreeArena;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Law of the spine increment S1.
#[derive(Clone, Debug, PartialEq)]
pub enum SpineLaw {
    /// Exact atoms (value, probability).
    Discrete(Vec<(f64, f64)>),
    Gaussian { mean: f64, var: f64 },
}

/// Exact law of S1 for a calibrated spec.
pub fn spine_increment_law(spec: &EnvironmentSpec) -> Result<SpineLaw> {
    if !spec.calibrated {
        return Err(Error::NotCalibrated(format!(
            "{}: spine increment mass only sums to 1 when psi(1) = 0",
            spec.name
        )));
    }
    match &spec.weight_law {
        WeightLaw::Table(tab) => {
            let mean_n = spec.mean_offspring();
            Ok(SpineLaw::Discrete(
                tab.iter().map(|&(v, p)| (-v.ln(), mean_n * p * v)).collect(),
            ))
        }
        // -log A tilted by e^{-V}: completing the square in the Gaussian
        // density gives Normal(-m - s2, s2) (mean 0 once calibrated).
        WeightLaw::LogNormal { m, s2 } => Ok(SpineLaw::Gaussian { mean: -m - s2, var: *s2 }),
    }
}

impl SpineLaw {
    pub fn mean(&self) -> f64 {
        match self {
            SpineLaw::Discrete(t) => t.iter().map(|&(v, p)| v * p).sum(),
            SpineLaw::Gaussian { mean, .. } => *mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            SpineLaw::Discrete(t) => {
                let m = self.mean();
                t.iter().map(|&(v, p)| p * (v - m) * (v - m)).sum()
            }
            SpineLaw::Gaussian { var, .. } => *var,
        }
    }

    /// E[e^{theta S1}].
    pub fn mgf(&self, theta: f64) -> f64 {
        match self {
            SpineLaw::Discrete(t) => t.iter().map(|&(v, p)| p * (theta * v).exp()).sum(),
            SpineLaw::Gaussian { mean, var } => (theta * mean + theta * theta * var / 2.0).exp(),
        }
    }

    /// Law with density proportional to e^{theta s} under self.
    pub fn tilted(&self, theta: f64) -> SpineLaw {
        match self {
            SpineLaw::Discrete(t) => {
                let z = self.mgf(theta);
                SpineLaw::Discrete(
                    t.iter().map(|&(v, p)| (v, p * (theta * v).exp() / z)).collect(),
                )
            }
            SpineLaw::Gaussian { mean, var } => {
                SpineLaw::Gaussian { mean: mean + theta * var, var: *var }
            }
        }
    }

    pub fn sampler(&self) -> SpineSampler {
        match self {
            SpineLaw::Discrete(t) => {
                let mut cdf = Vec::with_capacity(t.len());
                let mut acc = 0.0;
                for &(_, p) in t {
                    acc += p;
                    cdf.push(acc);
                }
                SpineSampler::Discrete { vals: t.iter().map(|&(v, _)| v).collect(), cdf }
            }
            SpineLaw::Gaussian { mean, var } => {
                SpineSampler::Gauss(Normal::new(*mean, var.sqrt()).expect("var > 0"))
            }
        }
    }
}

/// Pre-built sampler for tight Monte Carlo loops.
pub enum SpineSampler {
    Discrete { vals: Vec<f64>, cdf: Vec<f64> },
    Gauss(Normal<f64>),
}

impl SpineSampler {
    #[inline]
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            SpineSampler::Discrete { vals, cdf } => {
                let u: f64 = rng.gen();
                for (i, &c) in cdf.iter().enumerate() {
                    if u < c {
                        return vals[i];
                    }
                }
                *vals.last().unwrap()
            }
            SpineSampler::Gauss(n) => n.sample(rng),
        }
    }
}

/// A simulated spine path with streaming statistics.
#[derive(Clone, Debug)]
pub struct SpinePath {
    /// S_0 .. S_m (S_0 = start).
    pub s: Vec<f64>,
    pub smax: f64,
    pub smin: f64,
    /// First i >= 1 with S_i <= 0.
    pub tau_minus0: Option<usize>,
    /// Y+-(m) = sum_{i=1..m} e^{+-S_i}.
    pub y_plus: f64,
    pub y_minus: f64,
}

pub fn sample_path(law: &SpineLaw, start: f64, m: usize, rng: &mut ChaCha8Rng) -> SpinePath {
    let sampler = law.sampler();
    let mut s = Vec::with_capacity(m + 1);
    s.push(start);
    let (mut smax, mut smin) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut tau_minus0 = None;
    let (mut y_plus, mut y_minus) = (0.0, 0.0);
    let mut cur = start;
    for i in 1..=m {
        cur += sampler.draw(rng);
        s.push(cur);
        smax = smax.max(cur);
        smin = smin.min(cur);
        if tau_minus0.is_none() && cur <= 0.0 {
            tau_minus0 = Some(i);
        }
        y_plus += cur.exp();
        y_minus += (-cur).exp();
    }
    SpinePath { s, smax, smin, tau_minus0, y_plus, y_minus }
}

impl SpinePath {
    /// Recompute every streaming statistic from the stored path.
    pub fn recompute(&self) -> SpinePath {
        let mut out = SpinePath {
            s: self.s.clone(),
            smax: f64::NEG_INFINITY,
            smin: f64::INFINITY,
            tau_minus0: None,
            y_plus: 0.0,
            y_minus: 0.0,
        };
        for (i, &v) in self.s.iter().enumerate().skip(1) {
            out.smax = out.smax.max(v);
            out.smin = out.smin.min(v);
            if out.tau_minus0.is_none() && v <= 0.0 {
                out.tau_minus0 = Some(i);
            }
            out.y_plus += v.exp();
            out.y_minus += (-v).exp();
        }
        out
    }
}

/// Bounded (and two deliberately unbounded, flagged) path functionals for the
/// many-to-one checks. Arguments are the partial sums S_1..S_n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    One,
    /// 1{S_i > 0 for all i}.
    AllPositive,
    /// 1{max_i S_i <= b}.
    MaxLeq(f64),
    /// 1{min_i S_i > b}.
    MinGt(f64),
    /// 1{S_n <= b}.
    LastLeq(f64),
    /// 1{S_n in (lo, hi]}.
    LastInWindow(f64, f64),
    /// 1{sum_i S_i <= b}.
    SumLeq(f64),
    /// S_n^k (unbounded).
    Power(u32),
    /// |S_n|^k (unbounded).
    AbsPower(u32),
    /// 1{S_1 <= S_n} (a path-shape indicator).
    EndAboveStart,
}

impl Functional {
    pub fn eval(&self, path: &[f64]) -> f64 {
        let last = *path.last().unwrap();
        match *self {
            Functional::One => 1.0,
            Functional::AllPositive => path.iter().all(|&x| x > 0.0) as u8 as f64,
            Functional::MaxLeq(b) => {
                (path.iter().cloned().fold(f64::NEG_INFINITY, f64::max) <= b) as u8 as f64
            }
            Functional::MinGt(b) => {
                (path.iter().cloned().fold(f64::INFINITY, f64::min) > b) as u8 as f64
            }
            Functional::LastLeq(b) => (last <= b) as u8 as f64,
            Functional::LastInWindow(lo, hi) => (last > lo && last <= hi) as u8 as f64,
            Functional::SumLeq(b) => (path.iter().sum::<f64>() <= b) as u8 as f64,
            Functional::Power(k) => last.powi(k as i32),
            Functional::AbsPower(k) => last.abs().powi(k as i32),
            Functional::EndAboveStart => (path[0] <= last) as u8 as f64,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Functional::Power(_) | Functional::AbsPower(_))
    }

    /// The ten functionals exercised by the identity checks.
    pub fn library() -> Vec<Functional> {
        vec![
            Functional::One,
            Functional::AllPositive,
            Functional::MaxLeq(0.0),
            Functional::MaxLeq(2.0),
            Functional::MinGt(-2.0),
            Functional::LastLeq(0.0),
            Functional::LastInWindow(-1.0, 1.0),
            Functional::SumLeq(1.0),
            Functional::Power(2),
            Functional::AbsPower(3),
        ]
    }
}

const MAX_ENUM_PATHS: f64 = 1e7;

/// Both sides of the many-to-one identity by exact enumeration (weight tables
/// only): lhs = E[sum_{|x|=n} e^{-V(x)} F(V(x_1)..V(x_n))], rhs = E[F(S_1..S_n)].
///
/// The two sides are computed through different measures — the tree side via
/// E[#rays] = E[N]^n and the product ray law, the walk side via the spine
/// table — so exact agreement checks the normalization, not a tautology.
pub fn mto_check_exact(spec: &EnvironmentSpec, n: usize, f: Functional) -> Result<(f64, f64)> {
    let tab = match &spec.weight_law {
        WeightLaw::Table(t) => t.clone(),
        WeightLaw::LogNormal { .. } => {
            return Err(Error::InvalidSpec(
                "exact enumeration needs a finite weight table".to_string(),
            ))
        }
    };
    if (tab.len() as f64).powi(n as i32) > MAX_ENUM_PATHS {
        return Err(Error::EnumerationTooLarge {
            paths: (tab.len() as f64).powi(n as i32) as u64,
        });
    }
    let spine = match spine_increment_law(spec)? {
        SpineLaw::Discrete(t) => t,
        SpineLaw::Gaussian { .. } => unreachable!("table spec has a discrete spine law"),
    };
    let mean_n = spec.mean_offspring();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let k = tab.len();
    let mut idx = vec![0usize; n];
    loop {
        // One weight pattern; build the ray potential path V_1..V_n.
        let mut path = Vec::with_capacity(n);
        let mut v = 0.0;
        let mut tree_w = 1.0; // prod p_i a_i
        let mut spine_w = 1.0; // prod spine masses
        for &i in idx.iter() {
            let (a, p) = tab[i];
            v -= a.ln();
            path.push(v);
            tree_w *= p * a;
            spine_w *= spine[i].1;
        }
        let fv = f.eval(&path);
        lhs += tree_w * fv;
        rhs += spine_w * fv;
        // Next pattern (odometer).
        let mut pos = 0;
        loop {
            if pos == n {
                lhs *= mean_n.powi(n as i32);
                return Ok((lhs, rhs));
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MtoResult {
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// False when the functional is unbounded (moment estimates still valid,
    /// but no uniform-error guarantee).
    pub bounded: bool,
}

/// Monte Carlo version: the tree side grows fresh trees to depth n; the walk
/// side simulates the spine.
pub fn mto_check_mc(
    spec: &EnvironmentSpec,
    n: usize,
    f: Functional,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<MtoResult> {
    Ok(mto_check_mc_library(spec, n, &[f], samples, rng)?.pop().unwrap())
}

/// Monte Carlo identity check for several functionals over one shared set of
/// samples: each drawn tree and spine path is evaluated under every
/// functional, so a whole library costs one tree ensemble.
pub fn mto_check_mc_library(
    spec: &EnvironmentSpec,
    n: usize,
    fs: &[Functional],
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<MtoResult>> {
    let law = spine_increment_law(spec)?;
    let sampler = law.sampler();
    let mut lhs = vec![Accumulator::new(); fs.len()];
    let mut rhs = vec![Accumulator::new(); fs.len()];
    let mut totals = vec![0.0; fs.len()];
    let mut path = vec![0.0; n];
    for _ in 0..samples {
        // Tree side: sum e^{-V} F over generation-n vertices of one tree.
        use rand::SeedableRng;
        let tree_rng = ChaCha8Rng::from_rng(&mut *rng).expect("chacha reseed");
        let mut arena = TreeArena::new(spec.clone(), tree_rng).conditioned(false);
        arena.grow_to_depth(n as u32)?;
        totals.iter_mut().for_each(|t| *t = 0.0);
        for id in 0..arena.len() as u32 {
            let node = arena.node(id);
            if node.depth != n as u32 {
                continue;
            }
            // Ray potential path from the root down to this vertex.
            let mut cur = id;
            for slot in (0..n).rev() {
                path[slot] = arena.node(cur).v;
                cur = arena.node(cur).parent;
            }
            let w = (-node.v).exp();
            for (fi, f) in fs.iter().enumerate() {
                totals[fi] += w * f.eval(&path);
            }
        }
        for (acc, &t) in lhs.iter_mut().zip(totals.iter()) {
            acc.push(t);
        }
        // Walk side.
        let mut s = 0.0;
        for slot in path.iter_mut() {
            s += sampler.draw(rng);
            *slot = s;
        }
        for (acc, f) in rhs.iter_mut().zip(fs.iter()) {
            acc.push(f.eval(&path));
        }
    }
    Ok(fs
        .iter()
        .enumerate()
        .map(|(fi, f)| MtoResult {
            lhs: lhs[fi].estimate(),
            rhs: rhs[fi].estimate(),
            bounded: f.is_bounded(),
        })
        .collect())
}

#[derive(Clone, Copy, Debug)]
pub struct BallotEstimate {
    /// F_m = E[e^{S_m} 1{max_{i<=m} S_i <= 0}].
    pub f: Estimate,
    /// F_m (m+1)^{3/2}.
    pub normalized: f64,
    /// Relative standard error above 10%.
    pub low_precision: bool,
}

/// Monte Carlo ballot estimate. On the confinement event e^{S_m} <= 1, so the
/// naive estimator with early abort (stop as soon as S goes positive) is
/// unbiased and has bounded per-sample contribution; no tilt is needed.
pub fn ballot_f(
    spec: &EnvironmentSpec,
    m: usize,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<BallotEstimate> {
    let sampler = spine_increment_law(spec)?.sampler();
    let mut acc = Accumulator::new();
    for _ in 0..samples {
        let mut s = 0.0;
        let mut confined = true;
        for _ in 0..m {
            s += sampler.draw(rng);
            if s > 0.0 {
                confined = false;
                break;
            }
        }
        acc.push(if confined { s.exp() } else { 0.0 });
    }
    let f = acc.estimate();
    let scale = ((m + 1) as f64).powf(1.5);
    Ok(BallotEstimate {
        f,
        normalized: f.value * scale,
        low_precision: f.stderr > 0.1 * f.value.abs(),
    })
}

/// Exact ballot value by path enumeration (weight tables, small m).
pub fn ballot_f_exact(spec: &EnvironmentSpec, m: usize) -> Result<f64> {
    let atoms = match spine_increment_law(spec)? {
        SpineLaw::Discrete(t) => t,
        SpineLaw::Gaussian { .. } => {
            return Err(Error::InvalidSpec("exact ballot needs a discrete spine".to_string()))
        }
    };
    if (atoms.len() as f64).powi(m as i32) > MAX_ENUM_PATHS {
        return Err(Error::EnumerationTooLarge {
            paths: (atoms.len() as f64).powi(m as i32) as u64,
        });
    }
    fn rec(atoms: &[(f64, f64)], s: f64, left: usize) -> f64 {
        if left == 0 {
            return s.exp();
        }
        let mut total = 0.0;
        for &(v, p) in atoms {
            let ns = s + v;
            if ns > 0.0 {
                continue; // confinement violated on this branch
            }
            total += p * rec(atoms, ns, left - 1);
        }
        total
    }
    Ok(rec(&atoms, 0.0, m))
}

#[derive(Clone, Copy, Debug)]
pub struct PassageRatios {
    /// P_x(tau+_y < tau-_0) * (y+1)/(x+1).
    pub hit_ratio: Estimate,
    /// E_x[tau+_y ^ tau-_0] / y.
    pub exit_time_ratio: Estimate,
    /// P_x(tau-_0 > m) * sqrt(m)/(x+1).
    pub survival_ratio: Estimate,
}

/// The three normalized passage statistics of the gambler's-ruin estimates.
pub fn passage_check(
    spec: &EnvironmentSpec,
    x: f64,
    y: f64,
    m: usize,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<PassageRatios> {
    if !(0.0 <= x && x <= y) {
        return Err(Error::InvalidSpec(format!("need 0 <= x <= y, got x={x}, y={y}")));
    }
    let sampler = spine_increment_law(spec)?.sampler();
    let mut hit = Accumulator::new();
    let mut exit_time = Accumulator::new();
    let mut survive = Accumulator::new();
    // Hard cap so a single sample cannot run away; exits are recurrent for
    // the corridor [0, y], so the cap binds with negligible probability.
    let step_cap = (m.max(1000)) * 100;
    for _ in 0..samples {
        // Corridor exit: first passage at or above y vs at or below 0.
        let mut s = x;
        let mut steps = 0usize;
        let hit_top = loop {
            s += sampler.draw(rng);
            steps += 1;
            if s >= y {
                break true;
            }
            if s <= 0.0 {
                break false;
            }
            if steps >= step_cap {
                break false;
            }
        };
        hit.push(hit_top as u8 as f64);
        exit_time.push(steps as f64);
        // Survival above 0 for m steps (early abort on the first dip).
        let mut s = x;
        let mut alive = true;
        for _ in 0..m {
            s += sampler.draw(rng);
            if s <= 0.0 {
                alive = false;
                break;
            }
        }
        survive.push(alive as u8 as f64);
    }
    let scale = |e: Estimate, c: f64| Estimate {
        value: e.value * c,
        stderr: e.stderr * c,
        samples: e.samples,
    };
    Ok(PassageRatios {
        hit_ratio: scale(hit.estimate(), (y + 1.0) / (x + 1.0)),
        exit_time_ratio: scale(exit_time.estimate(), 1.0 / y),
        survival_ratio: scale(survive.estimate(), (m as f64).sqrt() / (x + 1.0)),
    })
}

/// M * P(Y^-(tau+_a) > M, tau+_a < tau-_0) for the walk started at 0, where
/// Y^-(k) = sum_{i=1..k} e^{-S_i}.
pub fn excursion_sum_check(
    spec: &EnvironmentSpec,
    a: f64,
    big_m: f64,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Estimate> {
    if a < 0.0 || big_m <= 0.0 {
        return Err(Error::InvalidSpec(format!("need a >= 0, M > 0; got a={a}, M={big_m}")));
    }
    let sampler = spine_increment_law(spec)?.sampler();
    let step_cap = 1_000_000usize;
    let mut acc = Accumulator::new();
    for _ in 0..samples {
        let mut s = 0.0;
        let mut y_minus = 0.0;
        let mut steps = 0usize;
        let event = loop {
            s += sampler.draw(rng);
            steps += 1;
            if s <= 0.0 {
                break false; // tau-_0 came first
            }
            y_minus += (-s).exp();
            if s >= a {
                break y_minus > big_m;
            }
            if steps >= step_cap {
                break false;
            }
        };
        acc.push(event as u8 as f64);
    }
    let e = acc.estimate();
    Ok(Estimate { value: e.value * big_m, stderr: e.stderr * big_m, samples: e.samples })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowRegime {
    /// r <= A sqrt(m): Gaussian-window prediction r m^{-3/2} e^{-r^2/(2 sigma^2 m)}.
    Gaussian,
    /// r > A sqrt(m): moderate-deviation prediction e^{r g(r/m)} / m.
    Moderate,
}

#[derive(Clone, Copy, Debug)]
pub struct LocalWindow {
    pub empirical: Estimate,
    pub prediction: f64,
    pub regime: WindowRegime,
}

pub const DEFAULT_WINDOW_A: f64 = 1.0;
pub const DEFAULT_WINDOW_EPS: f64 = 0.05;

/// Empirical P(S_m in (r, r+1], min_{i<=m} S_i > 0) against the local-window
/// prediction. Non-lattice specs only: the unit window straddles lattice
/// atoms unevenly, which is exactly the case the estimate excludes.
pub fn local_window_check(
    spec: &EnvironmentSpec,
    analytics: &Analytics,
    m: usize,
    r: f64,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<LocalWindow> {
    if spec.lattice_flag {
        return Err(Error::LatticeRefused(format!(
            "{}: local window estimates assume a non-lattice increment law",
            spec.name
        )));
    }
    if !(1.0 <= r && r <= DEFAULT_WINDOW_EPS * m as f64) {
        return Err(Error::RegimeViolated(format!(
            "need 1 <= r <= eps*m = {}; got r = {r}",
            DEFAULT_WINDOW_EPS * m as f64
        )));
    }
    let sampler = spine_increment_law(spec)?.sampler();
    let mut acc = Accumulator::new();
    for _ in 0..samples {
        let mut s = 0.0;
        let mut ok = true;
        for _ in 0..m {
            s += sampler.draw(rng);
            if s <= 0.0 {
                ok = false;
                break;
            }
        }
        acc.push((ok && s > r && s <= r + 1.0) as u8 as f64);
    }
    let mf = m as f64;
    let (regime, prediction) = if r <= DEFAULT_WINDOW_A * mf.sqrt() {
        (
            WindowRegime::Gaussian,
            r * mf.powf(-1.5) * (-r * r / (2.0 * analytics.sigma2 * mf)).exp(),
        )
    } else {
        (WindowRegime::Moderate, (r * analytics.g(r / mf)?).exp() / mf)
    };
    Ok(LocalWindow { empirical: acc.estimate(), prediction, regime })
}

#[derive(Clone, Copy, Debug)]
pub struct BarrierUpper {
    pub empirical: Estimate,
    /// (a/b) e^{b g(b/m)}.
    pub bound: f64,
    /// empirical / bound.
    pub ratio: f64,
}

/// Importance-sampled P_a(S_m > b, min_{i<=m} S_i > 0) against the
/// moderate-deviation upper bound (a/b) e^{b g(b/m)}. The tilt theta =
/// b/(sigma^2 m) recentres the walk on the target level.
pub fn barrier_upper_check(
    spec: &EnvironmentSpec,
    analytics: &Analytics,
    m: usize,
    a: f64,
    b: f64,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<BarrierUpper> {
    let mf = m as f64;
    let s2 = analytics.sigma2;
    if b < s2 * mf.sqrt() * mf.ln() {
        return Err(Error::RegimeViolated(format!(
            "need b >= sigma^2 sqrt(m) log m = {}; got b = {b}",
            s2 * mf.sqrt() * mf.ln()
        )));
    }
    if a > 0.5 * mf.sqrt() {
        return Err(Error::RegimeViolated(format!("need a = o(sqrt(m)); got a = {a}")));
    }
    if b > 0.5 * mf {
        return Err(Error::RegimeViolated(format!("need b = o(m); got b = {b}")));
    }
    let law = spine_increment_law(spec)?;
    let theta = b / (s2 * mf);
    let log_z = law.mgf(theta).ln();
    let sampler = law.tilted(theta).sampler();
    let mut acc = Accumulator::new();
    for _ in 0..samples {
        let mut s = a;
        let mut alive = true;
        for _ in 0..m {
            s += sampler.draw(rng);
            if s <= 0.0 {
                alive = false;
                break;
            }
        }
        let w = if alive && s > b { (-theta * (s - a) + mf * log_z).exp() } else { 0.0 };
        acc.push(w);
    }
    let empirical = acc.estimate();
    let bound = (a / b) * (b * analytics.g(b / mf)?).exp();
    Ok(BarrierUpper { empirical, bound, ratio: empirical.value / bound })
}
