//! Exact quenched hitting probabilities on a materialized tree.
//!
//! Two independent routes are implemented for every quantity:
//!
//! * closed forms from the electrical reduction — the walk restricted to a
//!   root-to-vertex path is a birth-death chain with resistances e^{V}, and
//!   dangling subtrees do not change hitting probabilities between path
//!   vertices;
//! * a sparse first-step solver that eliminates the tree leaf-to-root using
//!   only the transition probabilities, never the potential.
//!
//! Agreement between the two is asserted rather than assumed.

use crate::error::{Error, Result};
use crate::stats::kahan_sum;
use crate::tree::TreeArena;

/// Which vertex the hitting probability is evaluated from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathStart {
    /// Start at the child of the ancestor on the path; returns
    /// P(T_x < T_{x'}).
    ChildOfAncestor,
    /// Start at the parent of the deep vertex; returns P(T_{x'} < T_x).
    ParentOfTarget,
}

/// The root-to-x path ]]x', x]] as node ids, shallowest first.
fn path_between(arena: &TreeArena, x_prime: u32, x: u32) -> Result<Vec<u32>> {
    let mut path = Vec::new();
    let mut cur = x;
    loop {
        if cur == x_prime {
            path.reverse();
            return Ok(path);
        }
        if cur == arena.root_id() {
            return Err(Error::NotAncestor(x_prime, x));
        }
        path.push(cur);
        cur = arena.node(cur).parent;
    }
}

/// Closed-form hitting probability along the path from a strict ancestor x'
/// to x: with R = sum_{z in ]]x',x]]} e^{V(z)},
/// P_{x'_x}(T_x < T_{x'}) = e^{V(x'_x)} / R and
/// P_{x<-}(T_{x'} < T_x) = e^{V(x)} / R.
pub fn path_hitting(arena: &TreeArena, x_prime: u32, x: u32, start: PathStart) -> Result<f64> {
    if x == x_prime {
        return Err(Error::NotAncestor(x_prime, x));
    }
    let path = path_between(arena, x_prime, x)?;
    let r = kahan_sum(path.iter().map(|&id| arena.node(id).v.exp()));
    let num = match start {
        PathStart::ChildOfAncestor => arena.node(path[0]).v.exp(),
        PathStart::ParentOfTarget => arena.node(x).v.exp(),
    };
    Ok(num / r)
}

/// p_z = P_phi(T_z < T_phi), first-return convention: the effective
/// conductance of the phi-z path divided by the total conductance at the
/// root (children plus the reflecting parent edge of weight 1).
pub fn root_excursion_hit(arena: &TreeArena, z: u32) -> Result<f64> {
    if z == arena.root_id() {
        return Err(Error::NotAncestor(z, z));
    }
    let path = path_between(arena, arena.root_id(), z)?;
    let r = kahan_sum(path.iter().map(|&id| arena.node(id).v.exp()));
    let sum_a = kahan_sum(arena.children(arena.root_id()).map(|c| arena.node(c).a));
    Ok(1.0 / ((sum_a + 1.0) * r))
}

/// First-step solver over the whole materialized tree.
///
/// Boundary conditions h(b1) = 1, h(b0) = 0; every other vertex satisfies
/// h(u) = sum_v p(u, v) h(v) over its tree neighbours (frontier vertices act
/// as leaves: they step to their parent with probability 1, which leaves
/// hitting probabilities between interior vertices unchanged). Elimination
/// runs leaf-to-root writing h(u) = alpha_u + beta_u h(parent); arena ids are
/// append-ordered, so a reverse scan visits children first.
struct FirstStepSolver {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    h_root: f64,
}

impl FirstStepSolver {
    fn solve(arena: &TreeArena, b_one: u32, b_zero: u32) -> Self {
        let n = arena.len();
        let mut alpha = vec![0.0; n];
        let mut beta = vec![0.0; n];
        for id in (1..n as u32).rev() {
            if id == b_one {
                alpha[id as usize] = 1.0;
                continue;
            }
            if id == b_zero {
                continue;
            }
            let kids = arena.children(id);
            if kids.is_empty() {
                // Leaf or frontier vertex: moves to the parent surely.
                beta[id as usize] = 1.0;
                continue;
            }
            let sum_a = kahan_sum(kids.clone().map(|c| arena.node(c).a));
            let denom = sum_a + 1.0;
            let mut drag = 0.0; // sum p_c beta_c
            let mut feed = 0.0; // sum p_c alpha_c
            for c in kids {
                let p = arena.node(c).a / denom;
                drag += p * beta[c as usize];
                feed += p * alpha[c as usize];
            }
            let d = 1.0 - drag;
            alpha[id as usize] = feed / d;
            beta[id as usize] = (1.0 / denom) / d;
        }
        // Resolve the root. Mass 1/(sum A + 1) bounces off the reflecting
        // parent and comes straight back, so it stays on h(root).
        let root = arena.root_id();
        let h_root = if root == b_zero {
            0.0
        } else {
            let kids = arena.children(root);
            let sum_a = kahan_sum(kids.clone().map(|c| arena.node(c).a));
            let denom = sum_a + 1.0;
            let mut drag = 1.0 / denom;
            let mut feed = 0.0;
            for c in kids {
                let p = arena.node(c).a / denom;
                drag += p * beta[c as usize];
                feed += p * alpha[c as usize];
            }
            feed / (1.0 - drag)
        };
        FirstStepSolver { alpha, beta, h_root }
    }

    /// h at an arbitrary vertex, resolved along its ancestor chain.
    fn h_at(&self, arena: &TreeArena, node: u32) -> f64 {
        let mut chain = Vec::new();
        let mut cur = node;
        while cur != arena.root_id() {
            chain.push(cur);
            cur = arena.node(cur).parent;
        }
        let mut h = self.h_root;
        for &id in chain.iter().rev() {
            h = self.alpha[id as usize] + self.beta[id as usize] * h;
        }
        h
    }
}

/// Solver route for p_z: boundaries h(z) = 1, h(phi) = 0; the answer is the
/// first-step average over the root's children.
pub fn solver_root_excursion(arena: &TreeArena, z: u32) -> Result<f64> {
    if z == arena.root_id() {
        return Err(Error::NotAncestor(z, z));
    }
    let root = arena.root_id();
    let s = FirstStepSolver::solve(arena, z, root);
    let kids = arena.children(root);
    let sum_a = kahan_sum(kids.clone().map(|c| arena.node(c).a));
    let denom = sum_a + 1.0;
    let mut p = 0.0;
    for c in kids {
        // h(phi) = 0, so h(child) = alpha(child).
        p += arena.node(c).a / denom * s.alpha[c as usize];
    }
    Ok(p)
}

/// Solver route for the path hitting probabilities.
pub fn solver_path_hitting(
    arena: &TreeArena,
    x_prime: u32,
    x: u32,
    start: PathStart,
) -> Result<f64> {
    let path = path_between(arena, x_prime, x)?;
    let s = FirstStepSolver::solve(arena, x, x_prime);
    match start {
        PathStart::ChildOfAncestor => Ok(s.h_at(arena, path[0])),
        PathStart::ParentOfTarget => {
            // From the parent of x the walk hits one boundary almost surely.
            let parent = arena.node(x).parent;
            Ok(1.0 - s.h_at(arena, parent))
        }
    }
}

/// E^E[K_n(l)] = sum_{|z|=l} (1 - (1 - p_z)^n), evaluated through log1p/expm1
/// so vertices with tiny p_z contribute n p_z instead of rounding to zero.
pub fn quenched_mean_k(arena: &TreeArena, n: u64, l: u32) -> Result<f64> {
    if l > arena.full_depth() {
        return Err(Error::NotGrown(l));
    }
    let mut ids = Vec::new();
    for id in 0..arena.len() as u32 {
        if arena.node(id).depth == l {
            ids.push(id);
        }
    }
    let nf = n as f64;
    let terms: Result<Vec<f64>> = ids
        .iter()
        .map(|&z| {
            let p = root_excursion_hit(arena, z)?;
            Ok(-f64::exp_m1(nf * f64::ln_1p(-p)))
        })
        .collect();
    Ok(kahan_sum(terms?.into_iter()))
}

#[derive(Clone, Copy, Debug)]
pub struct MissBound {
    /// Exact quenched miss probability (1 - p_z)^n.
    pub miss: f64,
    /// exp(-c7 n e^{-Vbar(z)} / |z|), clamped to [0, 1].
    pub bound: f64,
}

/// Quenched probability that n root excursions all miss z, against the
/// ellipticity-based upper bound with constant c7 (calibrated externally on a
/// training split, then frozen).
pub fn miss_probability_bound(
    arena: &TreeArena,
    z: u32,
    n_excursions: u64,
    c7: f64,
) -> Result<MissBound> {
    arena.spec().alpha()?; // the bound's constant relies on ellipticity
    let node = arena.node(z);
    if z == arena.root_id() {
        return Err(Error::NotAncestor(z, z));
    }
    let p = root_excursion_hit(arena, z)?;
    let miss = f64::exp(n_excursions as f64 * f64::ln_1p(-p));
    let exponent = -c7 * n_excursions as f64 * (-node.vbar).exp() / node.depth as f64;
    Ok(MissBound { miss, bound: exponent.exp().min(1.0) })
}

/// Largest c7 for which the miss bound holds at (z, n) on this tree:
/// c7 <= -ln(miss) * |z| e^{Vbar(z)} / n. Used on a calibration split; the
/// minimum over the split (times a safety margin) is then frozen.
pub fn fit_c7(arena: &TreeArena, z: u32, n_excursions: u64) -> Result<f64> {
    arena.spec().alpha()?;
    let node = arena.node(z);
    let p = root_excursion_hit(arena, z)?;
    let neg_log_miss = -(n_excursions as f64) * f64::ln_1p(-p);
    Ok(neg_log_miss * node.depth as f64 * node.vbar.exp() / n_excursions as f64)
}
