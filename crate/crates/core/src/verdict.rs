//! Horizon-stamped verdicts and replayable failure certificates.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::chain;
use crate::error::{invalid, Result};
use crate::hitting::{delta_intersection, hits, hitting_set, orbit};
use crate::map::MapSpec;
use crate::rational::{fmt_q, Q};
use crate::space::Point;
use crate::system::{FactorMap, OpenBox, System};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Status {
    HoldsUpToHorizon,
    FailsWithCertificate,
    Undecided,
}

impl Status {
    pub fn holds(self) -> bool {
        self == Status::HoldsUpToHorizon
    }

    pub fn fails(self) -> bool {
        self == Status::FailsWithCertificate
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::HoldsUpToHorizon => "holds-up-to-horizon",
            Status::FailsWithCertificate => "fails-with-certificate",
            Status::Undecided => "undecided",
        })
    }
}

fn ser_q<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

fn ser_maps<S: Serializer>(ms: &[MapSpec], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(ms.iter().map(|m| m.to_string()))
}

/// Evidence that a property fails at the stated bounds.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// No `l <= limit` with `f_1^{scales_i l}(U_i) ∩ V_i ≠ ∅` for all `i`.
    NoCommonTime { pairs: Vec<(OpenBox, OpenBox)>, scales: Vec<u64>, limit: u64 },
    /// `missing ∉ N(U,V)` although `missing > horizon / 2`.
    NotCofinite { pair: (OpenBox, OpenBox), missing: u64, horizon: u64 },
    /// `∩ f_1^{-in}(U_i) = ∅` for every listed `n`.
    DeltaEmpty { sets: Vec<OpenBox>, times: Vec<u64> },
    /// `N(U,V)` misses the window `[start, start+len)`.
    SyndeticGap { pair: (OpenBox, OpenBox), start: u64, len: u64, horizon: u64 },
    /// The longest run of `N(U,V) ∩ [1,horizon]` is `max_run < run_request`.
    NoRun { pair: (OpenBox, OpenBox), run_request: u64, max_run: u64, horizon: u64 },
    /// No `m` in `[start, start+len)` has `m..=m+l ⊆ N(U,V)`.
    RunWindow { pair: (OpenBox, OpenBox), l: u64, start: u64, len: u64, horizon: u64 },
    /// The orbit prefix of `start` never enters `missed`.
    NotDense { start: Vec<Point>, missed: OpenBox, horizon: u64 },
    /// `f_index(set)` has empty interior.
    EmptyImage { index: u64, set: OpenBox },
    /// `f_i ∘ f_j ≠ f_j ∘ f_i`.
    NotCommuting {
        i: u64,
        j: u64,
        #[serde(serialize_with = "ser_maps")]
        left: Vec<MapSpec>,
        #[serde(serialize_with = "ser_maps")]
        right: Vec<MapSpec>,
    },
    /// `f_{n+k} ≠ f_n`.
    NotPeriodic { n: u64, k: u64 },
    /// `g_n ∘ h ≠ h ∘ f_n`, optionally at a witness point.
    NotSemiconjugate { factor: FactorMap, n: u64, point: Option<Point> },
    /// No δ-chain from `x` to `y` of length `<= length_bound`.
    ChainUnreachable {
        x: usize,
        y: usize,
        #[serde(serialize_with = "ser_q")]
        delta: Q,
        length_bound: u64,
    },
    /// No δ-chain from `x` to `y` of length exactly `length`, with
    /// `n_bound <= length <= length_bound`.
    ChainLengthMissing {
        x: usize,
        y: usize,
        #[serde(serialize_with = "ser_q")]
        delta: Q,
        length: u64,
        n_bound: u64,
    },
    /// A δ-pseudo-orbit that no start point ε-traces.
    Unshadowed {
        pseudo_orbit: Vec<usize>,
        #[serde(serialize_with = "ser_q")]
        delta: Q,
        #[serde(serialize_with = "ser_q")]
        eps: Q,
    },
}

impl Certificate {
    /// Re-derives the failure from `hitting` / `space` primitives.
    pub fn replay(&self, sys: &System, context: &[System]) -> Result<bool> {
        match self {
            Certificate::NoCommonTime { pairs, scales, limit } => {
                if pairs.len() != scales.len() {
                    return Ok(false);
                }
                for l in 1..=*limit {
                    let mut all = true;
                    for ((u, v), s) in pairs.iter().zip(scales) {
                        if !hits(sys, s * l, u, v)? {
                            all = false;
                            break;
                        }
                    }
                    if all {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Certificate::NotCofinite { pair, missing, horizon } => {
                Ok(*missing > horizon / 2 && *missing <= *horizon && !hits(sys, *missing, &pair.0, &pair.1)?)
            }
            Certificate::DeltaEmpty { sets, times } => {
                for &n in times {
                    if !delta_intersection(sys, sets, n)?.is_empty() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Certificate::SyndeticGap { pair, start, len, horizon } => {
                if *start == 0 || *len == 0 || start + len - 1 > *horizon {
                    return Ok(false);
                }
                for n in *start..start + len {
                    if hits(sys, n, &pair.0, &pair.1)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Certificate::NoRun { pair, run_request, max_run, horizon } => {
                let h = hitting_set(sys, &pair.0, &pair.1, *horizon)?;
                let (run, _) = crate::classifier::longest_run(&h.indices);
                Ok(run == *max_run && run < *run_request)
            }
            Certificate::RunWindow { pair, l, start, len, horizon } => {
                if *start == 0 || start + len - 1 + l > *horizon {
                    return Ok(false);
                }
                let h = hitting_set(sys, &pair.0, &pair.1, *horizon)?;
                let member = |n: u64| h.indices.binary_search(&n).is_ok();
                Ok((*start..start + len).all(|m| !(m..=m + l).all(member)))
            }
            Certificate::NotDense { start, missed, horizon } => {
                let o = orbit(sys, start, *horizon)?;
                Ok(o.points.iter().all(|p| !missed.contains(p)))
            }
            Certificate::EmptyImage { index, set } => Ok(set.image(&sys.map_at(*index)?)?.is_empty()),
            Certificate::NotCommuting { i, j, .. } => {
                let (fi, fj) = (sys.map_at(*i)?, sys.map_at(*j)?);
                let l: Vec<MapSpec> = fi.iter().zip(&fj).map(|(a, b)| a.after(b)).collect::<Result<_>>()?;
                let r: Vec<MapSpec> = fj.iter().zip(&fi).map(|(a, b)| a.after(b)).collect::<Result<_>>()?;
                Ok(l != r)
            }
            Certificate::NotPeriodic { n, k } => Ok(sys.map_at(n + k)? != sys.map_at(*n)?),
            Certificate::NotSemiconjugate { factor, n, .. } => {
                let Some(g) = context.first() else {
                    return invalid("semi-conjugacy replay needs the target system");
                };
                Ok(!factor.intertwines(sys, g, *n)?.0)
            }
            Certificate::ChainUnreachable { x, y, delta, length_bound } => {
                Ok(chain::reachable_lengths(sys, *delta, *x, *y, *length_bound)?.is_empty())
            }
            Certificate::ChainLengthMissing { x, y, delta, length, n_bound } => {
                let lengths = chain::reachable_lengths(sys, *delta, *x, *y, *length)?;
                Ok(length >= n_bound && !lengths.contains(length))
            }
            Certificate::Unshadowed { pseudo_orbit, delta, eps } => Ok(chain::is_pseudo_orbit(sys, *delta, pseudo_orbit)?
                && !chain::is_shadowed(sys, *eps, pseudo_orbit)?),
        }
    }
}

/// A three-valued, horizon-stamped answer.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub notion: String,
    pub status: Status,
    #[serde(rename = "system")]
    pub system_label: String,
    pub parameters: BTreeMap<String, String>,
    /// Minimal witness time per quantified instance, in enumeration order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<Verdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip)]
    pub system: Option<System>,
    #[serde(skip)]
    pub context: Vec<System>,
}

impl Verdict {
    pub fn new(notion: impl Into<String>, sys: &System) -> Verdict {
        Verdict {
            notion: notion.into(),
            status: Status::HoldsUpToHorizon,
            system_label: sys.label().to_string(),
            parameters: BTreeMap::new(),
            witnesses: Vec::new(),
            certificate: None,
            parts: Vec::new(),
            notes: Vec::new(),
            system: Some(sys.clone()),
            context: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Verdict {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn fail(mut self, cert: Certificate) -> Verdict {
        self.status = Status::FailsWithCertificate;
        self.certificate = Some(cert);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Verdict {
        self.notes.push(text.into());
        self
    }

    /// Combines sub-verdicts: fails if any part fails, undecided if any part
    /// is undecided, holds otherwise.
    pub fn with_parts(mut self, parts: Vec<Verdict>) -> Verdict {
        self.status = if parts.iter().any(|p| p.status.fails()) {
            Status::FailsWithCertificate
        } else if parts.iter().any(|p| p.status == Status::Undecided) {
            Status::Undecided
        } else {
            Status::HoldsUpToHorizon
        };
        self.parts = parts;
        self
    }

    /// Replays every certificate (own and nested); `true` when each still
    /// witnesses the failure it claims.
    pub fn replay(&self) -> Result<bool> {
        if let Some(cert) = &self.certificate {
            let Some(sys) = &self.system else {
                return invalid("verdict carries no system to replay against");
            };
            if !self.status.fails() || !cert.replay(sys, &self.context)? {
                return Ok(false);
            }
        } else if self.status.fails() && self.parts.iter().all(|p| !p.status.fails()) {
            return Ok(false);
        }
        for p in &self.parts {
            if !p.replay()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every failing leaf verdict.
    pub fn failing_leaves(&self) -> Vec<&Verdict> {
        let mut out = Vec::new();
        if self.certificate.is_some() && self.status.fails() {
            out.push(self);
        }
        for p in &self.parts {
            out.extend(p.failing_leaves());
        }
        out
    }
}
