//! Lazily grown Galton-Watson tree with attached random weights.
//!
//! Nodes live in an append-only arena; children of a node are always appended
//! contiguously and in generation order, so child ranges double as the
//! left-to-right (Neveu) order needed by the cluster analyses. Each node
//! carries its weight `A`, the potential `V(x) = -sum log A` along its ray,
//! and the running maximum `Vbar`.

use crate::envspec::EnvironmentSpec;
use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_NODE_CAP: usize = 100_000_000;
const NO_NODE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub parent: u32,
    pub first_child: u32,
    pub n_children: u32,
    pub depth: u32,
    /// True until this node's children have been sampled.
    pub frontier: bool,
    pub a: f64,
    pub v: f64,
    /// Running max of V over the path from the root; -inf at the root itself,
    /// so `max(parent.vbar, v)` is the correct update from depth 1 on.
    pub vbar: f64,
}

pub struct TreeArena {
    pub nodes: Vec<Node>,
    spec: EnvironmentSpec,
    rng: ChaCha8Rng,
    node_cap: usize,
    condition_on_survival: bool,
    /// Ids of each fully grown generation (0 = root), in Neveu order.
    gens: Vec<Vec<u32>>,
    pub survival_resamples: u64,
    /// Depth used for pruned growth, if any; statistics refuse pruned trees.
    pruned_barrier: Option<f64>,
    /// Loaded snapshots have no RNG stream and cannot be extended.
    sealed: bool,
    /// When frozen, unmaterialized frontier vertices stop extending and act
    /// as reflecting leaves (the walk steps back to the parent), matching the
    /// first-step solver's boundary condition. Hitting probabilities between
    /// materialized vertices are unchanged: truncated excursions return to
    /// their entry vertex either way.
    frozen: bool,
}

impl TreeArena {
    pub fn new(spec: EnvironmentSpec, rng: ChaCha8Rng) -> Self {
        let mut arena = TreeArena {
            nodes: Vec::new(),
            spec,
            rng,
            node_cap: DEFAULT_NODE_CAP,
            condition_on_survival: true,
            gens: Vec::new(),
            survival_resamples: 0,
            pruned_barrier: None,
            sealed: false,
            frozen: false,
        };
        arena.reset_root();
        arena
    }

    pub fn with_node_cap(mut self, cap: usize) -> Self {
        self.node_cap = cap;
        self
    }

    pub fn conditioned(mut self, on_survival: bool) -> Self {
        self.condition_on_survival = on_survival;
        self
    }

    /// Stop extending: from now on every unmaterialized frontier vertex
    /// behaves as a reflecting leaf.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    pub fn root_id(&self) -> u32 {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: u32) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn children(&self, id: u32) -> std::ops::Range<u32> {
        let n = &self.nodes[id as usize];
        if n.n_children == 0 {
            0..0
        } else {
            n.first_child..n.first_child + n.n_children
        }
    }

    fn reset_root(&mut self) {
        self.nodes.clear();
        self.gens.clear();
        self.nodes.push(Node {
            parent: NO_NODE,
            first_child: NO_NODE,
            n_children: 0,
            depth: 0,
            frontier: true,
            a: 1.0,
            v: 0.0,
            vbar: f64::NEG_INFINITY,
        });
        self.gens.push(vec![0]);
    }

    fn sample_offspring(&mut self) -> u32 {
        self.spec.sample_offspring(&mut self.rng)
    }

    fn sample_weight(&mut self) -> f64 {
        self.spec.sample_weight(&mut self.rng)
    }

    /// Sample this node's children exactly once; returns their id range.
    /// A second call returns the existing range without drawing randomness.
    pub fn extend_at(&mut self, id: u32) -> Result<std::ops::Range<u32>> {
        let node = self.nodes[id as usize];
        if !node.frontier {
            return Ok(self.children(id));
        }
        if self.frozen {
            return Ok(0..0);
        }
        if self.sealed {
            return Err(Error::InvalidSpec(
                "loaded tree snapshots are read-only and cannot be extended".to_string(),
            ));
        }
        let n = self.sample_offspring();
        if self.nodes.len() + n as usize > self.node_cap {
            return Err(Error::NodeBudget { held: self.nodes.len(), cap: self.node_cap });
        }
        let first = self.nodes.len() as u32;
        for _ in 0..n {
            let a = self.sample_weight();
            let v = node.v - a.ln();
            self.nodes.push(Node {
                parent: id,
                first_child: NO_NODE,
                n_children: 0,
                depth: node.depth + 1,
                frontier: true,
                a,
                v,
                vbar: node.vbar.max(v),
            });
        }
        let slot = &mut self.nodes[id as usize];
        slot.frontier = false;
        slot.n_children = n;
        slot.first_child = if n > 0 { first } else { NO_NODE };
        Ok(if n > 0 { first..first + n } else { 0..0 })
    }

    /// Depth to which every generation is fully materialized.
    pub fn full_depth(&self) -> u32 {
        self.gens.len() as u32 - 1
    }

    /// Materialize all generations up to `depth`; returns Z_1..Z_depth.
    ///
    /// When conditioning on survival (the default) a tree that dies out before
    /// `depth` is discarded and redrawn from the same stream; the number of
    /// discards is recorded in `survival_resamples` so the bias is auditable.
    pub fn grow_to_depth(&mut self, depth: u32) -> Result<Vec<u64>> {
        if depth < 1 {
            return Err(Error::InvalidSpec("grow_to_depth needs depth >= 1".to_string()));
        }
        if self.pruned_barrier.is_some() {
            return Err(Error::InvalidSpec(
                "tree was grown with a barrier prune; full growth unavailable".to_string(),
            ));
        }
        'attempt: loop {
            while self.full_depth() < depth {
                let current = self.gens.last().unwrap().clone();
                let mut next = Vec::new();
                for id in current {
                    next.extend(self.extend_at(id)?);
                }
                if next.is_empty() {
                    // Extinct before target depth.
                    if self.condition_on_survival {
                        self.survival_resamples += 1;
                        self.reset_root();
                        continue 'attempt;
                    }
                    self.gens.push(next);
                    break;
                }
                self.gens.push(next);
            }
            return Ok(self.gens.iter().skip(1).map(|g| g.len() as u64).collect());
        }
    }

    /// Materialize only the sub-barrier cluster `{Vbar <= barrier}` down to
    /// `depth`; returns the per-generation counts of surviving nodes. The
    /// arena is marked pruned afterwards: exact generation statistics and
    /// unpruned accessible counts are refused.
    pub fn grow_pruned(&mut self, barrier: f64, depth: u32) -> Result<Vec<u64>> {
        if let Some(b) = self.pruned_barrier {
            if barrier > b {
                return Err(Error::InvalidSpec(format!(
                    "tree already pruned at {b}; cannot widen to {barrier}"
                )));
            }
        }
        self.pruned_barrier = Some(self.pruned_barrier.map_or(barrier, |b| b.min(barrier)));
        let mut current: Vec<u32> = vec![self.root_id()];
        let mut counts = Vec::with_capacity(depth as usize);
        for _ in 0..depth {
            let mut next = Vec::new();
            for id in current {
                for c in self.extend_at(id)? {
                    if self.nodes[c as usize].vbar <= barrier {
                        next.push(c);
                    }
                }
            }
            counts.push(next.len() as u64);
            current = next;
        }
        Ok(counts)
    }

    /// Exact count of accessible points: descendants of `origin` at absolute
    /// depth `k` whose running max stays at or below `a`. With
    /// `relative = true` the barrier applies to the potential re-rooted at
    /// `origin` (max over the open path from origin of V(u) - V(origin)).
    pub fn accessible_count(&self, a: f64, k: u32, origin: u32, relative: bool) -> Result<u64> {
        let o = self.node(origin);
        if k <= o.depth {
            return Err(Error::InvalidSpec(format!(
                "target depth {k} must exceed origin depth {}",
                o.depth
            )));
        }
        let v0 = if relative { o.v } else { 0.0 };
        let mut count = 0u64;
        let mut stack: Vec<(u32, f64)> = self
            .children(origin)
            .map(|c| (c, if relative { f64::NEG_INFINITY } else { f64::NAN }))
            .collect();
        if o.frontier {
            return Err(Error::NotGrown(o.depth));
        }
        while let Some((id, rel_max)) = stack.pop() {
            let n = self.node(id);
            let eff = if relative { rel_max.max(n.v - v0) } else { n.vbar };
            if eff > a {
                continue; // Vbar is non-decreasing along rays
            }
            if n.depth == k {
                count += 1;
                continue;
            }
            if n.frontier {
                return Err(Error::NotGrown(n.depth));
            }
            for c in self.children(id) {
                stack.push((c, eff));
            }
        }
        Ok(count)
    }

    /// Exact statistics of a fully materialized generation.
    pub fn generation_stats(&self, k: u32) -> Result<GenStats> {
        if self.pruned_barrier.is_some() {
            return Err(Error::InvalidSpec(
                "generation statistics are unavailable on a pruned tree".to_string(),
            ));
        }
        if k > self.full_depth() {
            return Err(Error::NotGrown(k));
        }
        let gen = &self.gens[k as usize];
        let z = gen.len() as u64;
        let mut min_vbar = f64::INFINITY;
        let mut max_vbar = f64::NEG_INFINITY;
        let mut argmin = NO_NODE;
        for &id in gen {
            let vb = self.nodes[id as usize].vbar;
            if vb < min_vbar {
                min_vbar = vb;
                argmin = id;
            }
            max_vbar = max_vbar.max(vb);
        }
        Ok(GenStats {
            z,
            w: z as f64 * (-self.spec.psi0() * k as f64).exp(),
            min_vbar,
            max_vbar,
            argmin,
        })
    }

    /// Ids of a fully materialized generation in left-to-right (Neveu) order.
    pub fn generation_ids(&self, k: u32) -> Result<&[u32]> {
        if self.pruned_barrier.is_some() {
            return Err(Error::InvalidSpec(
                "generation listings are unavailable on a pruned tree".to_string(),
            ));
        }
        if k > self.full_depth() {
            return Err(Error::NotGrown(k));
        }
        Ok(&self.gens[k as usize])
    }

    /// Recompute V(x) from scratch by walking the parent chain.
    pub fn potential_from_scratch(&self, id: u32) -> f64 {
        let mut v = 0.0;
        let mut cur = id;
        while cur != 0 {
            let n = self.node(cur);
            v -= n.a.ln();
            cur = n.parent;
        }
        v
    }

    /// Text dump, one node per line: "id parent depth A V Vbar", ordered by
    /// id. The root is its own parent by convention. Floats use shortest
    /// round-trip formatting, so dump -> load -> dump is the identity.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (id, n) in self.nodes.iter().enumerate() {
            let parent = if n.parent == NO_NODE { 0 } else { n.parent };
            out.push_str(&format!("{id} {parent} {} {} {} {}\n", n.depth, n.a, n.v, n.vbar));
        }
        out
    }

    /// Load a dumped tree as a read-only snapshot (no RNG stream is attached,
    /// so the snapshot cannot be extended; childless nodes stay childless).
    pub fn load(text: &str, spec: EnvironmentSpec) -> Result<Self> {
        use rand::SeedableRng;
        let mut nodes: Vec<Node> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 6 {
                return Err(Error::ConfigParse {
                    line: line_no,
                    msg: format!("expected 6 fields, got {}", parts.len()),
                });
            }
            let id: usize = parts[0].parse().map_err(|e| Error::ConfigParse {
                line: line_no,
                msg: format!("bad id: {e}"),
            })?;
            if id != nodes.len() {
                return Err(Error::ConfigParse {
                    line: line_no,
                    msg: format!("ids must be consecutive; expected {}, got {id}", nodes.len()),
                });
            }
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|e| Error::ConfigParse {
                    line: line_no,
                    msg: format!("bad {what}: {e}"),
                })
            };
            let parent: u32 = parts[1].parse().map_err(|e| Error::ConfigParse {
                line: line_no,
                msg: format!("bad parent: {e}"),
            })?;
            let depth: u32 = parts[2].parse().map_err(|e| Error::ConfigParse {
                line: line_no,
                msg: format!("bad depth: {e}"),
            })?;
            nodes.push(Node {
                parent: if id == 0 { NO_NODE } else { parent },
                first_child: NO_NODE,
                n_children: 0,
                depth,
                frontier: false,
                a: parse(parts[3], "A")?,
                v: parse(parts[4], "V")?,
                vbar: parse(parts[5], "Vbar")?,
            });
        }
        if nodes.is_empty() {
            return Err(Error::ConfigParse { line: 0, msg: "empty tree dump".to_string() });
        }
        // Rebuild contiguous child ranges from the parent pointers.
        for id in 1..nodes.len() {
            let p = nodes[id].parent as usize;
            if p >= id {
                return Err(Error::ConfigParse {
                    line: id + 1,
                    msg: "parent must precede child".to_string(),
                });
            }
            if nodes[p].n_children == 0 {
                nodes[p].first_child = id as u32;
            } else if nodes[p].first_child + nodes[p].n_children != id as u32 {
                return Err(Error::ConfigParse {
                    line: id + 1,
                    msg: "children of a node must be contiguous".to_string(),
                });
            }
            nodes[p].n_children += 1;
        }
        // Generation lists: trust the snapshot only if it was dumped from
        // level-order growth (depths sorted); otherwise expose just the root.
        let mut gens: Vec<Vec<u32>> = Vec::new();
        if nodes.windows(2).all(|w| w[0].depth <= w[1].depth) {
            gens.resize(nodes.last().unwrap().depth as usize + 1, Vec::new());
            for (id, n) in nodes.iter().enumerate() {
                gens[n.depth as usize].push(id as u32);
            }
        } else {
            gens.push(vec![0]);
        }
        Ok(TreeArena {
            nodes,
            spec,
            rng: ChaCha8Rng::seed_from_u64(0),
            node_cap: DEFAULT_NODE_CAP,
            condition_on_survival: false,
            gens,
            survival_resamples: 0,
            pruned_barrier: None,
            sealed: true,
            frozen: false,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GenStats {
    pub z: u64,
    /// Additive martingale W_k = Z_k e^{-psi(0) k}.
    pub w: f64,
    pub min_vbar: f64,
    pub max_vbar: f64,
    pub argmin: u32,
}
