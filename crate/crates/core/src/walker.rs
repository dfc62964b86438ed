//! Quenched random walk on a grown tree.
//!
//! From a vertex x with children weights A(x^1)..A(x^N), the walk moves to
//! child i with probability A(x^i)/(sum_j A(x^j) + 1) and to the parent with
//! the complement. The root's parent is a virtual vertex that reflects back
//! with probability 1; its local time is tracked so that the total local time
//! equals the step count exactly.
//!
//! The walker auto-extends the arena on frontier contact. Tree randomness and
//! walk randomness come from separate streams, so quenched experiments can fix
//! one tree and vary the walk.

use crate::error::{Error, Result};
use crate::tree::TreeArena;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const NEVER: u64 = u64::MAX;

pub struct Walker {
    pos: u32,
    /// True when the walk sits at the root's reflecting parent.
    at_outside: bool,
    pub steps: u64,
    /// Local time per node id (dense, grows with the arena).
    local: Vec<u64>,
    /// Local time of the root's parent.
    pub outside_visits: u64,
    /// Step index of the first visit per node id (NEVER if unvisited).
    first_visit: Vec<u64>,
    /// Number of distinct visited nodes per generation.
    gen_visited: Vec<u64>,
    /// Step indices of successive visits to the root.
    pub return_times: Vec<u64>,
    /// Deepest generation reached.
    pub max_depth_seen: u32,
    rng: ChaCha8Rng,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub returns_completed: u64,
    /// True when the step cap fired before the requested return count.
    pub censored: bool,
}

impl Walker {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Walker {
            pos: 0,
            at_outside: false,
            steps: 0,
            local: Vec::new(),
            outside_visits: 0,
            first_visit: Vec::new(),
            gen_visited: Vec::new(),
            return_times: Vec::new(),
            max_depth_seen: 0,
            rng,
        }
    }

    pub fn position(&self) -> u32 {
        self.pos
    }

    pub fn local_time(&self, id: u32) -> u64 {
        self.local.get(id as usize).copied().unwrap_or(0)
    }

    pub fn is_visited(&self, id: u32) -> bool {
        self.first_visit.get(id as usize).map_or(false, |&s| s != NEVER)
    }

    pub fn returns_to_root(&self) -> u64 {
        self.return_times.len() as u64
    }

    /// Total local time over all tracked vertices, including the root's
    /// parent; equals the step count by construction.
    pub fn total_local_time(&self) -> u64 {
        self.local.iter().sum::<u64>() + self.outside_visits
    }

    fn visit(&mut self, arena: &TreeArena, id: u32) {
        if self.local.len() < arena.len() {
            self.local.resize(arena.len(), 0);
            self.first_visit.resize(arena.len(), NEVER);
        }
        self.local[id as usize] += 1;
        let depth = arena.node(id).depth;
        if self.first_visit[id as usize] == NEVER {
            self.first_visit[id as usize] = self.steps;
            if self.gen_visited.len() <= depth as usize {
                self.gen_visited.resize(depth as usize + 1, 0);
            }
            self.gen_visited[depth as usize] += 1;
        }
        if id == 0 {
            self.return_times.push(self.steps);
        }
        self.max_depth_seen = self.max_depth_seen.max(depth);
    }

    /// Advance one step, extending the arena at the frontier if needed.
    pub fn step(&mut self, arena: &mut TreeArena) -> Result<()> {
        if self.steps == 0 {
            // The starting vertex counts as visited at time 0 (with no local
            // time: local time counts arrivals at steps 1..n only).
            if self.local.len() < arena.len() {
                self.local.resize(arena.len(), 0);
                self.first_visit.resize(arena.len(), NEVER);
            }
            let depth = arena.node(self.pos).depth;
            self.first_visit[self.pos as usize] = 0;
            if self.gen_visited.len() <= depth as usize {
                self.gen_visited.resize(depth as usize + 1, 0);
            }
            self.gen_visited[depth as usize] += 1;
        }
        if self.at_outside {
            // The root's parent reflects deterministically.
            self.at_outside = false;
            self.steps += 1;
            self.pos = arena.root_id();
            self.visit(arena, self.pos);
            return Ok(());
        }
        let kids = arena.extend_at(self.pos)?;
        let mut sum_a = 0.0;
        for c in kids.clone() {
            sum_a += arena.node(c).a;
        }
        let u: f64 = self.rng.gen::<f64>() * (sum_a + 1.0);
        let mut acc = 0.0;
        let mut target = None;
        for c in kids {
            acc += arena.node(c).a;
            if u < acc {
                target = Some(c);
                break;
            }
        }
        self.steps += 1;
        match target {
            Some(c) => {
                self.pos = c;
                self.visit(arena, c);
            }
            None => {
                if self.pos == 0 {
                    self.at_outside = true;
                    self.outside_visits += 1;
                } else {
                    self.pos = arena.node(self.pos).parent;
                    self.visit(arena, self.pos);
                }
            }
        }
        Ok(())
    }

    /// Run until the walk has visited the root `n_returns` times (counting
    /// every arrival) or until `step_cap` steps, whichever comes first. A cap
    /// hit is reported, never treated as completion.
    pub fn run_until_returns(
        &mut self,
        arena: &mut TreeArena,
        n_returns: u64,
        step_cap: u64,
    ) -> Result<RunOutcome> {
        if n_returns < 1 {
            return Err(Error::InvalidSpec("n_returns must be >= 1".to_string()));
        }
        while self.returns_to_root() < n_returns && self.steps < step_cap {
            self.step(arena)?;
        }
        Ok(RunOutcome {
            returns_completed: self.returns_to_root(),
            censored: self.returns_to_root() < n_returns,
        })
    }

    /// Run a fixed number of steps.
    pub fn run_steps(&mut self, arena: &mut TreeArena, n: u64) -> Result<()> {
        for _ in 0..n {
            self.step(arena)?;
        }
        Ok(())
    }

    /// M_n(m): number of distinct visited vertices at generation m.
    pub fn m_of(&self, m: u32) -> u64 {
        self.gen_visited.get(m as usize).copied().unwrap_or(0)
    }

    /// K_n(m): visited count at generation m frozen at the n-th return time
    /// (K_0 = 0 by the T^0 = 0 convention).
    pub fn k_of(&self, arena: &TreeArena, m: u32, n_returns: u64) -> Result<u64> {
        if n_returns == 0 {
            return Ok(0);
        }
        if n_returns > self.returns_to_root() {
            return Err(Error::ReturnsIncomplete {
                completed: self.returns_to_root(),
                requested: n_returns,
            });
        }
        let t = self.return_times[n_returns as usize - 1];
        let mut count = 0;
        for id in 0..self.first_visit.len() {
            if self.first_visit[id] <= t && arena.node(id as u32).depth == m {
                count += 1;
            }
        }
        Ok(count)
    }

    /// R_n: the largest generation every vertex of which (and of all shallower
    /// generations) has been visited. Grows full generations on demand to
    /// decide the sup; capped at `r_cap` (null-recurrent walks keep R small).
    pub fn r_of(&self, arena: &mut TreeArena, r_cap: u32) -> Result<u32> {
        let mut level: Vec<u32> = vec![arena.root_id()];
        let mut r = 0;
        while r < r_cap {
            let mut next = Vec::new();
            for &id in &level {
                next.extend(arena.extend_at(id)?);
            }
            if next.is_empty() || !next.iter().all(|&c| self.is_visited(c)) {
                break;
            }
            r += 1;
            level = next;
        }
        Ok(r)
    }

    /// Exact counts from the visited sets for the requested generations.
    pub fn observables(
        &self,
        arena: &mut TreeArena,
        generations: &[u32],
        r_cap: u32,
    ) -> Result<Observables> {
        if self.steps == 0 {
            return Err(Error::InvalidSpec("walk has not run yet".to_string()));
        }
        Ok(Observables {
            m: generations.iter().map(|&g| (g, self.m_of(g))).collect(),
            r: self.r_of(arena, r_cap)?,
            xstar: self.max_depth_seen,
        })
    }

    /// Plain summary for one replica, serialized as one JSONL record.
    pub fn summary(
        &self,
        arena: &mut TreeArena,
        seed: u64,
        censored: bool,
        generations: &[u32],
        k_returns: u64,
        r_cap: u32,
    ) -> Result<WalkSummary> {
        let obs = self.observables(arena, generations, r_cap)?;
        let mut k = BTreeMap::new();
        if k_returns > 0 && k_returns <= self.returns_to_root() {
            for &g in generations {
                k.insert(g, self.k_of(arena, g, k_returns)?);
            }
        }
        Ok(WalkSummary {
            seed,
            steps: self.steps,
            returns: self.returns_to_root(),
            censored,
            xstar: obs.xstar,
            r: obs.r,
            m: obs.m,
            k,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Observables {
    pub m: BTreeMap<u32, u64>,
    pub r: u32,
    pub xstar: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WalkSummary {
    pub seed: u64,
    pub steps: u64,
    pub returns: u64,
    pub censored: bool,
    pub xstar: u32,
    pub r: u32,
    pub m: BTreeMap<u32, u64>,
    pub k: BTreeMap<u32, u64>,
}
