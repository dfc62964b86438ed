//! Flat key-value spec files.
//!
//! The on-disk format is one `key = value` per line; `#` starts a comment.
//! Pair lists are written `(a, b); (c, d)`. Floats are serialized with Rust's
//! shortest round-trip formatting, so `parse(canonical(c)) == c` bit-exactly
//! and `canonical` is idempotent.

use crate::envspec::{detect_lattice, EnvironmentSpec, WeightLaw, DEFAULT_CRAMER_ORDER};
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const CAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub environment: EnvironmentSpec,
    pub cramer_order: usize,
    pub tolerance: f64,
}

impl Config {
    pub fn new(environment: EnvironmentSpec) -> Self {
        Config { environment, cramer_order: DEFAULT_CRAMER_ORDER, tolerance: DEFAULT_TOLERANCE }
    }

    /// Canonical text form: fixed key order, shortest round-trip floats.
    pub fn canonical(&self) -> String {
        let env = &self.environment;
        let mut out = String::new();
        out.push_str(&format!("environment.kind = {}\n", env.kind));
        out.push_str(&format!("environment.name = {}\n", env.name));
        out.push_str(&format!("environment.q = {}\n", pairs_u32(&env.offspring_law)));
        let weights = match &env.weight_law {
            WeightLaw::Table(t) => pairs_f64(t),
            WeightLaw::LogNormal { m, s2 } => format!("({m}, {s2})"),
        };
        out.push_str(&format!("environment.weights = {weights}\n"));
        if let Some(eps) = env.epsilon0 {
            out.push_str(&format!("environment.epsilon0 = {eps}\n"));
        }
        if let Some(n0) = env.n0 {
            out.push_str(&format!("environment.n0 = {n0}\n"));
        }
        out.push_str(&format!("analytics.cramer_order = {}\n", self.cramer_order));
        out.push_str(&format!("analytics.tolerance = {}\n", self.tolerance));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut name = None;
        let mut q = None;
        let mut weights_raw = None;
        let mut epsilon0 = None;
        let mut n0 = None;
        let mut cramer_order = DEFAULT_CRAMER_ORDER;
        let mut tolerance = DEFAULT_TOLERANCE;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::ConfigParse {
                line,
                msg: "expected `key = value`".to_string(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "environment.kind" => kind = Some(value.to_string()),
                "environment.name" => name = Some(value.to_string()),
                "environment.q" => q = Some(parse_pairs(value, line)?),
                "environment.weights" => weights_raw = Some(parse_pairs(value, line)?),
                "environment.epsilon0" => epsilon0 = Some(parse_f64(value, line)?),
                "environment.n0" => {
                    n0 = Some(value.parse::<u32>().map_err(|e| Error::ConfigParse {
                        line,
                        msg: format!("environment.n0: {e}"),
                    })?)
                }
                "analytics.cramer_order" => {
                    cramer_order = value.parse::<usize>().map_err(|e| Error::ConfigParse {
                        line,
                        msg: format!("analytics.cramer_order: {e}"),
                    })?
                }
                "analytics.tolerance" => tolerance = parse_f64(value, line)?,
                other => {
                    return Err(Error::ConfigParse {
                        line,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }

        let kind = kind.ok_or_else(|| Error::ConfigParse {
            line: 0,
            msg: "missing environment.kind".to_string(),
        })?;
        let q = q.ok_or_else(|| Error::ConfigParse {
            line: 0,
            msg: "missing environment.q".to_string(),
        })?;
        let offspring: Vec<(u32, f64)> = q
            .iter()
            .map(|&(k, p)| {
                if k < 0.0 || k.fract() != 0.0 {
                    Err(Error::ConfigParse {
                        line: 0,
                        msg: format!("offspring count {k} is not a non-negative integer"),
                    })
                } else {
                    Ok((k as u32, p))
                }
            })
            .collect::<Result<_>>()?;

        let environment = match kind.as_str() {
            "two_point" => {
                let mut spec = if let Some(w) = &weights_raw {
                    if w.len() != 2 {
                        return Err(Error::ConfigParse {
                            line: 0,
                            msg: "two_point needs exactly 2 weight atoms".to_string(),
                        });
                    }
                    build_table_spec(&offspring, w, epsilon0, n0)?
                } else {
                    EnvironmentSpec::two_point("two_point", &offspring)?
                };
                spec.kind = "two_point".to_string();
                spec
            }
            "table" => build_table_spec(&offspring, weights_raw.as_deref().unwrap_or(&[]), epsilon0, n0)?,
            "lognormal" => {
                let w = weights_raw.ok_or_else(|| Error::ConfigParse {
                    line: 0,
                    msg: "lognormal needs environment.weights = (m, s2)".to_string(),
                })?;
                if w.len() != 1 {
                    return Err(Error::ConfigParse {
                        line: 0,
                        msg: "lognormal needs exactly one (m, s2) pair".to_string(),
                    });
                }
                let (m, s2) = w[0];
                if s2 <= 0.0 {
                    return Err(Error::ConfigParse {
                        line: 0,
                        msg: format!("lognormal s2 = {s2} must be positive"),
                    });
                }
                let mut spec = EnvironmentSpec {
                    name: "lognormal".to_string(),
                    kind: "lognormal".to_string(),
                    offspring_law: offspring,
                    weight_law: WeightLaw::LogNormal { m, s2 },
                    weights_iid_given_n: true,
                    epsilon0,
                    n0: n0.or(Some(0)),
                    lattice_flag: false,
                    calibrated: false,
                };
                if spec.n0 == Some(0) {
                    spec.n0 = spec.offspring_law.iter().map(|&(k, _)| k).max();
                }
                spec.calibrated =
                    spec.psi(1.0).abs() < CAL_TOL && spec.psi_prime(1.0).abs() < CAL_TOL;
                spec.validate()?;
                spec
            }
            other => {
                return Err(Error::ConfigParse {
                    line: 0,
                    msg: format!("unknown environment.kind `{other}`"),
                })
            }
        };
        let mut environment = environment;
        if let Some(n) = name {
            environment.name = n;
        }

        Ok(Config { environment, cramer_order, tolerance })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.canonical())?;
        Ok(())
    }
}

fn build_table_spec(
    offspring: &[(u32, f64)],
    weights: &[(f64, f64)],
    epsilon0: Option<f64>,
    n0: Option<u32>,
) -> Result<EnvironmentSpec> {
    let mut spec = EnvironmentSpec {
        name: "table".to_string(),
        kind: "table".to_string(),
        offspring_law: offspring.to_vec(),
        weight_law: WeightLaw::Table(weights.to_vec()),
        weights_iid_given_n: true,
        epsilon0,
        n0: n0.or_else(|| offspring.iter().map(|&(k, _)| k).max()),
        lattice_flag: detect_lattice(weights),
        calibrated: false,
    };
    spec.calibrated = spec.psi(1.0).abs() < CAL_TOL && spec.psi_prime(1.0).abs() < CAL_TOL;
    spec.validate()?;
    Ok(spec)
}

fn pairs_u32(pairs: &[(u32, f64)]) -> String {
    pairs
        .iter()
        .map(|&(k, p)| format!("({k}, {p})"))
        .collect::<Vec<_>>()
        .join("; ")
}

fn pairs_f64(pairs: &[(f64, f64)]) -> String {
    pairs
        .iter()
        .map(|&(v, p)| format!("({v}, {p})"))
        .collect::<Vec<_>>()
        .join("; ")
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::ConfigParse { line, msg: format!("bad float `{s}`: {e}") })
}

fn parse_pairs(s: &str, line: usize) -> Result<Vec<(f64, f64)>> {
    s.split(';')
        .map(|chunk| {
            let c = chunk.trim();
            let inner = c
                .strip_prefix('(')
                .and_then(|x| x.strip_suffix(')'))
                .ok_or_else(|| Error::ConfigParse {
                    line,
                    msg: format!("expected `(a, b)`, got `{c}`"),
                })?;
            let (a, b) = inner.split_once(',').ok_or_else(|| Error::ConfigParse {
                line,
                msg: format!("expected comma in `{c}`"),
            })?;
            Ok((parse_f64(a.trim(), line)?, parse_f64(b.trim(), line)?))
        })
        .collect()
}
