//! Transitivity-notion checkers. Every checker quantifies over basis boxes
//! at a resolution and over times up to a horizon.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::classify;
use crate::error::{invalid, Error, Result};
use crate::hitting::orbit;
use crate::space::OpenSet;
use crate::system::{OpenBox, System};
use crate::verdict::{Certificate, Status, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Notion {
    Transitive,
    WeakMixing,
    Mixing,
    TotallyTransitive,
    MultiTransitive,
    MultiTransitiveVector,
    StronglyMultiTransitive,
    DeltaTransitive,
    DeltaMixing,
    MildlyMixingSurrogate,
    Minimal,
    SyndeticTransitive,
    ThickTransitive,
    ThicklySyndeticTransitive,
}

impl Notion {
    pub const ALL: [Notion; 14] = [
        Notion::Transitive,
        Notion::WeakMixing,
        Notion::Mixing,
        Notion::TotallyTransitive,
        Notion::MultiTransitive,
        Notion::MultiTransitiveVector,
        Notion::StronglyMultiTransitive,
        Notion::DeltaTransitive,
        Notion::DeltaMixing,
        Notion::MildlyMixingSurrogate,
        Notion::Minimal,
        Notion::SyndeticTransitive,
        Notion::ThickTransitive,
        Notion::ThicklySyndeticTransitive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Notion::Transitive => "transitive",
            Notion::WeakMixing => "weak-mixing",
            Notion::Mixing => "mixing",
            Notion::TotallyTransitive => "totally-transitive",
            Notion::MultiTransitive => "multi-transitive",
            Notion::MultiTransitiveVector => "multi-transitive-vector",
            Notion::StronglyMultiTransitive => "strongly-multi-transitive",
            Notion::DeltaTransitive => "delta-transitive",
            Notion::DeltaMixing => "delta-mixing",
            Notion::MildlyMixingSurrogate => "mildly-mixing-surrogate",
            Notion::Minimal => "minimal",
            Notion::SyndeticTransitive => "syndetic-transitive",
            Notion::ThickTransitive => "thick-transitive",
            Notion::ThicklySyndeticTransitive => "thickly-syndetic-transitive",
        }
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Notion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Notion> {
        Notion::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown notion \"{s}\"")))
    }
}

pub const DEFAULT_TUPLE_CAP: u128 = 1_000_000;

/// Bounds for one check. `horizon` and `resolution` apply to every notion;
/// the rest only to the notions that read them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckSpec {
    pub notion: Notion,
    pub resolution: usize,
    pub horizon: u64,
    /// Order of weak mixing.
    pub order: usize,
    /// `m` for multi-transitivity and the Δ notions.
    pub m_bound: u64,
    /// Largest iterate for total transitivity.
    pub n_bound: u64,
    pub vector: Vec<u64>,
    pub max_len: usize,
    pub max_entry: u64,
    /// Index set for Δ-mixing.
    pub subset: Option<Vec<u64>>,
    pub gap_bound: u64,
    pub run_request: u64,
    pub tuple_cap: u128,
}

impl CheckSpec {
    pub fn new(notion: Notion, resolution: usize, horizon: u64) -> CheckSpec {
        CheckSpec {
            notion,
            resolution,
            horizon,
            order: 2,
            m_bound: 2,
            n_bound: 2,
            vector: vec![1],
            max_len: 2,
            max_entry: 2,
            subset: None,
            gap_bound: 10,
            run_request: 3,
            tuple_cap: DEFAULT_TUPLE_CAP,
        }
    }

    pub fn with_notion(&self, notion: Notion) -> CheckSpec {
        CheckSpec { notion, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return invalid("horizon must be >= 1");
        }
        if self.resolution == 0 {
            return invalid("resolution must be >= 1");
        }
        match self.notion {
            Notion::WeakMixing if self.order < 2 => invalid("weak mixing order must be >= 2"),
            Notion::MultiTransitive if self.m_bound == 0 => invalid("m_bound must be >= 1"),
            Notion::TotallyTransitive if self.n_bound == 0 => invalid("n_bound must be >= 1"),
            Notion::MultiTransitiveVector if self.vector.is_empty() || self.vector.contains(&0) => {
                invalid("vector entries must be positive and the vector non-empty")
            }
            Notion::StronglyMultiTransitive if self.max_len == 0 || self.max_entry == 0 => {
                invalid("vector bounds must be >= 1")
            }
            Notion::DeltaMixing => match &self.subset {
                None => invalid("delta-mixing needs an index subset"),
                Some(a) if a.is_empty() => invalid("delta-mixing subset must be non-empty"),
                Some(a) if a.iter().any(|&n| n == 0 || n > self.horizon) => {
                    invalid(format!("delta-mixing subset must lie in [1, {}]", self.horizon))
                }
                _ => Ok(()),
            },
            Notion::SyndeticTransitive | Notion::ThickTransitive | Notion::ThicklySyndeticTransitive
                if self.gap_bound == 0 || self.run_request == 0 =>
            {
                invalid("gap_bound and run_request must be >= 1")
            }
            _ => Ok(()),
        }
    }

    fn base_verdict(&self, notion: &str, sys: &System) -> Verdict {
        Verdict::new(notion, sys).param("resolution", self.resolution).param("horizon", self.horizon)
    }
}

/// Runs the check named by `spec.notion`. `registry` feeds the
/// mildly-mixing surrogate and is ignored otherwise.
pub fn check(sys: &System, spec: &CheckSpec, registry: &[System]) -> Result<Verdict> {
    spec.validate()?;
    match spec.notion {
        Notion::Transitive => check_transitive(sys, spec),
        Notion::WeakMixing => check_weak_mixing_order(sys, spec.order, spec),
        Notion::Mixing => check_mixing(sys, spec),
        Notion::TotallyTransitive => check_totally_transitive(sys, spec.n_bound, spec),
        Notion::MultiTransitive => check_multi_transitive(sys, spec.m_bound, spec),
        Notion::MultiTransitiveVector => check_multi_transitive_vector(sys, &spec.vector, spec),
        Notion::StronglyMultiTransitive => check_strongly_multi_transitive(sys, spec.max_len, spec.max_entry, spec),
        Notion::DeltaTransitive => check_delta_transitive(sys, spec.m_bound, spec),
        Notion::DeltaMixing => {
            check_delta_mixing(sys, spec.m_bound, spec.subset.as_deref().unwrap_or_default(), spec)
        }
        Notion::MildlyMixingSurrogate => check_mildly_mixing_surrogate(sys, registry, spec),
        Notion::Minimal => check_minimal(sys, spec),
        Notion::SyndeticTransitive => Ok(check_set_classes(sys, spec)?.syndetic),
        Notion::ThickTransitive => Ok(check_set_classes(sys, spec)?.thick),
        Notion::ThicklySyndeticTransitive => Ok(check_set_classes(sys, spec)?.thickly_syndetic),
    }
}

/// Bitset over times `0..=len`; bit 0 is never set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Bits {
    words: Vec<u64>,
    len: u64,
}

impl Bits {
    fn new(len: u64) -> Bits {
        Bits { words: vec![0; (len as usize >> 6) + 1], len }
    }

    fn set(&mut self, i: u64) {
        self.words[(i >> 6) as usize] |= 1 << (i & 63);
    }

    fn get(&self, i: u64) -> bool {
        i <= self.len && self.words[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    fn and(&self, other: &Bits) -> Bits {
        let len = self.len.min(other.len);
        let n = (len as usize >> 6) + 1;
        let mut words: Vec<u64> = self.words[..n].iter().zip(&other.words[..n]).map(|(a, b)| a & b).collect();
        let tail = (len & 63) + 1;
        if tail < 64 {
            words[n - 1] &= (1u64 << tail) - 1;
        }
        Bits { words, len }
    }

    fn first(&self) -> Option<u64> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| ((i as u64) << 6) + w.trailing_zeros() as u64)
    }

    fn ones(&self) -> Vec<u64> {
        (1..=self.len).filter(|&i| self.get(i)).collect()
    }

    #[cfg(test)]
    fn full(len: u64) -> Bits {
        let mut b = Bits::new(len);
        for i in 1..=len {
            b.set(i);
        }
        b
    }
}

/// `meets[u * nb + v]` has bit `t` set iff `f_1^t(U) ∩ V ≠ ∅` for the
/// underlying sequence of one factor.
struct FactorTable {
    t_max: u64,
    nb: usize,
    meets: Vec<Bits>,
}

/// Hit tables for the basis boxes of one system.
pub(crate) struct Engine<'a> {
    sys: &'a System,
    pub boxes: Vec<OpenBox>,
    coords: Vec<Vec<usize>>,
    factor_sets: Vec<Vec<OpenSet>>,
    tables: Mutex<HashMap<usize, Arc<FactorTable>>>,
}

impl<'a> Engine<'a> {
    pub fn new(sys: &'a System, resolution: usize) -> Result<Engine<'a>> {
        let factor_sets: Vec<Vec<OpenSet>> = sys
            .factors()
            .iter()
            .map(|f| crate::space::basis(f.space(), resolution))
            .collect::<Result<_>>()?;
        let boxes = sys.basis(resolution)?;
        let mut coords = vec![Vec::new()];
        for sets in &factor_sets {
            coords = coords
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    (0..sets.len()).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        Ok(Engine { sys, boxes, coords, factor_sets, tables: Mutex::new(HashMap::new()) })
    }

    pub fn pair(&self, p: usize) -> (OpenBox, OpenBox) {
        let b = self.boxes.len();
        (self.boxes[p / b].clone(), self.boxes[p % b].clone())
    }

    fn table(&self, factor: usize, t_max: u64) -> Result<Arc<FactorTable>> {
        let f = &self.sys.factors()[factor];
        let key = Arc::as_ptr(&f.dynamics) as usize;
        if let Some(t) = self.tables.lock().expect("table lock").get(&key) {
            if t.t_max >= t_max {
                return Ok(t.clone());
            }
        }
        let sets = &self.factor_sets[factor];
        let nb = sets.len();
        f.dynamics.prefix(t_max)?;
        let rows: Vec<Vec<bool>> = (1..=t_max)
            .into_par_iter()
            .map(|t| {
                let m = f.dynamics.prefix(t)?;
                let images: Vec<OpenSet> = sets.iter().map(|u| u.image(&m)).collect::<Result<_>>()?;
                let mut row = Vec::with_capacity(nb * nb);
                for im in &images {
                    for v in sets {
                        row.push(im.meets(v)?);
                    }
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let mut meets = vec![Bits::new(t_max); nb * nb];
        for (t, row) in rows.iter().enumerate() {
            for (k, &hit) in row.iter().enumerate() {
                if hit {
                    meets[k].set(t as u64 + 1);
                }
            }
        }
        let table = Arc::new(FactorTable { t_max, nb, meets });
        self.tables.lock().expect("table lock").insert(key, table.clone());
        Ok(table)
    }

    /// Bit `l` (`1 <= l <= len`) set iff `f_1^{scale·l}(U) ∩ V ≠ ∅` for box
    /// pair `p`, for every pair.
    pub fn pair_bits(&self, scale: u64, len: u64) -> Result<Vec<Bits>> {
        let factors = self.sys.factors();
        let tables: Vec<Arc<FactorTable>> =
            (0..factors.len()).map(|c| self.table(c, factors[c].step * scale * len)).collect::<Result<_>>()?;
        let b = self.boxes.len();
        Ok((0..b * b)
            .into_par_iter()
            .map(|p| {
                let (u, v) = (&self.coords[p / b], &self.coords[p % b]);
                let mut bits = Bits::new(len);
                for l in 1..=len {
                    let all = factors.iter().enumerate().all(|(c, f)| {
                        let t = &tables[c];
                        t.meets[u[c] * t.nb + v[c]].get(f.step * scale * l)
                    });
                    if all {
                        bits.set(l);
                    }
                }
                bits
            })
            .collect())
    }
}

struct TupleOutcome {
    witnesses: Vec<u64>,
    failure: Option<Vec<usize>>,
}

fn tuple_count(items: usize, arity: usize, multiset: bool) -> u128 {
    let n = items as u128;
    let k = arity as u128;
    if multiset {
        // C(n + k - 1, k)
        let mut c: u128 = 1;
        for i in 0..k {
            c = c.saturating_mul(n + i) / (i + 1);
        }
        c
    } else {
        (0..k).fold(1u128, |acc, _| acc.saturating_mul(n))
    }
}

/// Lexicographic search over `arity`-tuples of items (multisets when
/// `multiset`), ANDing the per-position bitsets. Returns the least common
/// time per tuple, or the first tuple without one.
fn search_tuples(per_pos: &[Arc<Vec<Bits>>], multiset: bool, cap: u128) -> Result<TupleOutcome> {
    let arity = per_pos.len();
    let items = per_pos[0].len();
    let count = tuple_count(items, arity, multiset);
    if count > cap {
        return Err(Error::ResourceLimit { count, cap });
    }
    let first_fail = AtomicUsize::new(usize::MAX);
    let parts: Vec<(Vec<u64>, Option<Vec<usize>>)> = (0..items)
        .into_par_iter()
        .map(|i0| {
            let mut w = Vec::new();
            if i0 > first_fail.load(Ordering::Relaxed) {
                return (w, None);
            }
            let mut prefix = vec![i0];
            let fail = dfs(per_pos, multiset, &mut prefix, per_pos[0][i0].clone(), &mut w);
            if fail.is_some() {
                first_fail.fetch_min(i0, Ordering::Relaxed);
            }
            (w, fail)
        })
        .collect();
    let mut witnesses = Vec::new();
    for (w, fail) in parts {
        if let Some(f) = fail {
            return Ok(TupleOutcome { witnesses, failure: Some(f) });
        }
        witnesses.extend(w);
    }
    Ok(TupleOutcome { witnesses, failure: None })
}

fn dfs(per_pos: &[Arc<Vec<Bits>>], multiset: bool, prefix: &mut Vec<usize>, acc: Bits, out: &mut Vec<u64>) -> Option<Vec<usize>> {
    let depth = prefix.len();
    if acc.first().is_none() {
        let last = *prefix.last().expect("non-empty prefix");
        let mut t = prefix.clone();
        t.resize(per_pos.len(), if multiset { last } else { 0 });
        return Some(t);
    }
    if depth == per_pos.len() {
        out.push(acc.first().expect("checked above"));
        return None;
    }
    let start = if multiset { *prefix.last().expect("non-empty prefix") } else { 0 };
    for i in start..per_pos[depth].len() {
        let next = acc.and(&per_pos[depth][i]);
        prefix.push(i);
        let r = dfs(per_pos, multiset, prefix, next, out);
        prefix.pop();
        if r.is_some() {
            return r;
        }
    }
    None
}

pub fn check_transitive(sys: &System, spec: &CheckSpec) -> Result<Verdict> {
    let v = spec.base_verdict("transitive", sys);
    scaled_search(sys, spec, v, &[1])
}

/// Common-time search for box-pair tuples with per-position time scales.
fn scaled_search(sys: &System, spec: &CheckSpec, mut v: Verdict, scales: &[u64]) -> Result<Verdict> {
    let engine = Engine::new(sys, spec.resolution)?;
    let limit = spec.horizon / scales.iter().max().copied().unwrap_or(1);
    let mut cache: HashMap<u64, Arc<Vec<Bits>>> = HashMap::new();
    let mut per_pos = Vec::new();
    for &s in scales {
        if !cache.contains_key(&s) {
            cache.insert(s, Arc::new(engine.pair_bits(s, limit)?));
        }
        per_pos.push(cache[&s].clone());
    }
    let outcome = search_tuples(&per_pos, false, spec.tuple_cap)?;
    match outcome.failure {
        Some(t) => {
            let pairs = t.iter().map(|&p| engine.pair(p)).collect();
            Ok(v.fail(Certificate::NoCommonTime { pairs, scales: scales.to_vec(), limit })
                .note("failure observed up to the horizon"))
        }
        None => {
            v.witnesses = outcome.witnesses;
            Ok(v)
        }
    }
}

pub fn check_weak_mixing_order(sys: &System, n: usize, spec: &CheckSpec) -> Result<Verdict> {
    if n < 2 {
        return invalid("weak mixing order must be >= 2");
    }
    let mut v = spec.base_verdict("weak-mixing", sys).param("order", n);
    let engine = Engine::new(sys, spec.resolution)?;
    let bits = Arc::new(engine.pair_bits(1, spec.horizon)?);
    let per_pos = vec![bits; n];
    let outcome = search_tuples(&per_pos, true, spec.tuple_cap)?;
    match outcome.failure {
        Some(t) => {
            let pairs = t.iter().map(|&p| engine.pair(p)).collect();
            Ok(v.fail(Certificate::NoCommonTime { pairs, scales: vec![1; n], limit: spec.horizon }))
        }
        None => {
            v.witnesses = outcome.witnesses;
            Ok(v)
        }
    }
}

/// Holds when every basis pair hits at all times in `(N, horizon]` for
/// some `N <= horizon / 2`; the witness is `N + 1`.
pub fn check_mixing(sys: &System, spec: &CheckSpec) -> Result<Verdict> {
    let mut v = spec.base_verdict("mixing", sys).note("cofinite means no miss after horizon/2");
    let engine = Engine::new(sys, spec.resolution)?;
    let bits = engine.pair_bits(1, spec.horizon)?;
    for (p, b) in bits.iter().enumerate() {
        let last_missing = (1..=spec.horizon).rev().find(|&n| !b.get(n)).unwrap_or(0);
        if last_missing > spec.horizon / 2 {
            return Ok(v.fail(Certificate::NotCofinite {
                pair: engine.pair(p),
                missing: last_missing,
                horizon: spec.horizon,
            }));
        }
        v.witnesses.push(last_missing + 1);
    }
    Ok(v)
}

/// Transitivity of `f^{[k]}` at horizon `horizon / k` for `k <= n_bound`.
pub fn check_totally_transitive(sys: &System, n_bound: u64, spec: &CheckSpec) -> Result<Verdict> {
    let mut v = spec.base_verdict("totally-transitive", sys).param("n_bound", n_bound);
    for k in 1..=n_bound {
        let part = scaled_search(sys, spec, Verdict::new("transitive", sys), &[k])?;
        if part.status.fails() {
            let cert = part.certificate.expect("failing part has a certificate");
            return Ok(v.fail(cert).note(format!("iterate {k} is not transitive up to horizon/{k}")));
        }
        v.witnesses.extend(part.witnesses);
    }
    Ok(v)
}

pub fn check_multi_transitive(sys: &System, m_bound: u64, spec: &CheckSpec) -> Result<Verdict> {
    let v = spec.base_verdict("multi-transitive", sys).param("m_bound", m_bound);
    let a: Vec<u64> = (1..=m_bound).collect();
    scaled_search(sys, spec, v, &a)
}

pub fn check_multi_transitive_vector(sys: &System, a: &[u64], spec: &CheckSpec) -> Result<Verdict> {
    if a.is_empty() || a.contains(&0) {
        return invalid("vector entries must be positive and the vector non-empty");
    }
    let v = spec.base_verdict("multi-transitive-vector", sys).param("vector", format!("{a:?}"));
    scaled_search(sys, spec, v, a)
}

/// Multi-transitivity for every vector of length `<= max_len` with entries
/// in `1..=max_entry`, one part per vector.
pub fn check_strongly_multi_transitive(sys: &System, max_len: usize, max_entry: u64, spec: &CheckSpec) -> Result<Verdict> {
    let v = spec
        .base_verdict("strongly-multi-transitive", sys)
        .param("max_len", max_len)
        .param("max_entry", max_entry);
    let mut parts = Vec::new();
    for len in 1..=max_len {
        let mut a = vec![1u64; len];
        loop {
            parts.push(check_multi_transitive_vector(sys, &a, spec)?);
            let Some(pos) = (0..len).rev().find(|&i| a[i] < max_entry) else { break };
            a[pos] += 1;
            for x in a.iter_mut().skip(pos + 1) {
                *x = 1;
            }
        }
    }
    Ok(v.with_parts(parts))
}

pub fn check_delta_transitive(sys: &System, m_bound: u64, spec: &CheckSpec) -> Result<Verdict> {
    let times: Vec<u64> = (1..=spec.horizon / m_bound.max(1)).collect();
    let v = spec.base_verdict("delta-transitive", sys).param("m_bound", m_bound);
    delta_search(sys, m_bound, &times, spec, v)
}

pub fn check_delta_mixing(sys: &System, m_bound: u64, a: &[u64], spec: &CheckSpec) -> Result<Verdict> {
    if a.is_empty() || a.iter().any(|&n| n == 0 || n > spec.horizon) {
        return invalid(format!("delta-mixing subset must be non-empty and lie in [1, {}]", spec.horizon));
    }
    let mut times: Vec<u64> = a.iter().copied().filter(|&n| n * m_bound.max(1) <= spec.horizon).collect();
    times.sort_unstable();
    times.dedup();
    let v = spec
        .base_verdict("delta-mixing", sys)
        .param("m_bound", m_bound)
        .param("subset_size", a.len())
        .note("the index set is a finite truncation");
    delta_search(sys, m_bound, &times, spec, v)
}

/// Searches tuples `U_0..U_m` of basis boxes for an `n` in `times` with
/// `∩ f_1^{-in}(U_i) ≠ ∅`.
fn delta_search(sys: &System, m: u64, times: &[u64], spec: &CheckSpec, v: Verdict) -> Result<Verdict> {
    let boxes = sys.basis(spec.resolution)?;
    delta_search_on(sys, &boxes, m, times, spec.tuple_cap, v)
}

/// Δ search over an explicit family of boxes instead of a basis.
pub fn delta_search_on(
    sys: &System,
    boxes: &[OpenBox],
    m: u64,
    times: &[u64],
    tuple_cap: u128,
    mut v: Verdict,
) -> Result<Verdict> {
    if m == 0 {
        v.witnesses = vec![0; boxes.len()];
        return Ok(v.note("m = 0: every basis set is non-empty"));
    }
    let arity = m as usize + 1;
    let count = tuple_count(boxes.len(), arity, false);
    if count > tuple_cap {
        return Err(Error::ResourceLimit { count, cap: tuple_cap });
    }
    // pre[i][k][b] = f_1^{-(i·times[k])}(boxes[b]) for 1 <= i <= m.
    let pre: Vec<Vec<Vec<OpenBox>>> = (1..=m)
        .map(|i| {
            times
                .par_iter()
                .map(|&n| {
                    let maps = sys.compose(1, i * n)?;
                    boxes.iter().map(|b| b.preimage(&maps)).collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let first_fail = AtomicUsize::new(usize::MAX);
    let parts: Vec<Result<(Vec<u64>, Vec<String>, Option<Vec<usize>>)>> = (0..boxes.len())
        .into_par_iter()
        .map(|b0| {
            let (mut w, mut pts) = (Vec::new(), Vec::new());
            if b0 > first_fail.load(Ordering::Relaxed) {
                return Ok((w, pts, None));
            }
            let alive: Vec<(usize, OpenBox)> = (0..times.len()).map(|k| (k, boxes[b0].clone())).collect();
            let mut prefix = vec![b0];
            let fail = delta_dfs(&pre, times, arity, &mut prefix, alive, &mut w, &mut pts)?;
            if fail.is_some() {
                first_fail.fetch_min(b0, Ordering::Relaxed);
            }
            Ok((w, pts, fail))
        })
        .collect();
    let mut points = Vec::new();
    for part in parts {
        let (w, pts, fail) = part?;
        if let Some(t) = fail {
            let sets = t.iter().map(|&b| boxes[b].clone()).collect();
            return Ok(v.fail(Certificate::DeltaEmpty { sets, times: times.to_vec() }));
        }
        v.witnesses.extend(w);
        points.extend(pts);
    }
    if let Some(first) = points.first() {
        v = v.note(format!("witness point for the first tuple: {first}"));
    }
    Ok(v)
}

type Alive = Vec<(usize, OpenBox)>;

fn delta_dfs(
    pre: &[Vec<Vec<OpenBox>>],
    times: &[u64],
    arity: usize,
    prefix: &mut Vec<usize>,
    alive: Alive,
    out: &mut Vec<u64>,
    points: &mut Vec<String>,
) -> Result<Option<Vec<usize>>> {
    if alive.is_empty() {
        let mut t = prefix.clone();
        t.resize(arity, 0);
        return Ok(Some(t));
    }
    let depth = prefix.len();
    if depth == arity {
        let (k, set) = &alive[0];
        out.push(times[*k]);
        if points.is_empty() {
            let w = set.witness().map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" x "));
            points.push(w.unwrap_or_default());
        }
        return Ok(None);
    }
    let nb = pre[0][0].len();
    for b in 0..nb {
        let mut next = Vec::new();
        for (k, set) in &alive {
            let s = set.intersect(&pre[depth - 1][*k][b])?;
            if !s.is_empty() {
                next.push((*k, s));
            }
        }
        prefix.push(b);
        let r = delta_dfs(pre, times, arity, prefix, next, out, points)?;
        prefix.pop();
        if r.is_some() {
            return Ok(r);
        }
    }
    Ok(None)
}

/// Transitivity over an explicit family of boxes: every ordered pair must
/// hit at some time `<= horizon`.
pub fn transitive_on(sys: &System, boxes: &[OpenBox], horizon: u64, mut v: Verdict) -> Result<Verdict> {
    for u in boxes {
        for w in boxes {
            let h = crate::hitting::hitting_set(sys, u, w, horizon)?;
            match h.indices.first() {
                Some(&n) => v.witnesses.push(n),
                None => {
                    return Ok(v.fail(Certificate::NoCommonTime {
                        pairs: vec![(u.clone(), w.clone())],
                        scales: vec![1],
                        limit: horizon,
                    }))
                }
            }
        }
    }
    Ok(v)
}

pub const SURROGATE_NOTE: &str = "finite surrogate: mixing plus transitivity of the product with each listed system; \
     the notion itself quantifies over all transitive systems and is not checked";

/// (a) mixing, (b) transitivity of `sys × W` for every `W` in `registry`.
pub fn check_mildly_mixing_surrogate(sys: &System, registry: &[System], spec: &CheckSpec) -> Result<Verdict> {
    let v = spec.base_verdict("mildly-mixing-surrogate", sys).note(SURROGATE_NOTE);
    let mut parts = vec![check_mixing(sys, spec)?];
    for w in registry {
        let prod = System::product(&[sys.clone(), w.clone()])?;
        parts.push(check_transitive(&prod, spec)?);
    }
    Ok(v.with_parts(parts))
}

/// Orbit prefixes of the basis-box witness points must visit every basis box.
pub fn check_minimal(sys: &System, spec: &CheckSpec) -> Result<Verdict> {
    let mut v = spec.base_verdict("minimal", sys).note("start points: one witness per basis set");
    let boxes = sys.basis(spec.resolution)?;
    let starts: Vec<_> = boxes.iter().filter_map(|b| b.witness()).collect();
    let mut unique = Vec::new();
    for s in starts {
        if !unique.contains(&s) {
            unique.push(s);
        }
    }
    let results: Vec<Result<(Vec<u64>, Option<OpenBox>)>> = unique
        .par_iter()
        .map(|x| {
            let o = orbit(sys, x, spec.horizon)?;
            let mut w = Vec::new();
            for b in &boxes {
                match o.points.iter().position(|p| b.contains(p)) {
                    Some(t) => w.push(t as u64),
                    None => return Ok((w, Some(b.clone()))),
                }
            }
            Ok((w, None))
        })
        .collect();
    for (x, r) in unique.iter().zip(results) {
        let (w, missed) = r?;
        if let Some(missed) = missed {
            return Ok(v.fail(Certificate::NotDense { start: x.clone(), missed, horizon: spec.horizon }));
        }
        v.witnesses.extend(w);
    }
    Ok(v)
}

pub struct SetClassVerdicts {
    pub syndetic: Verdict,
    pub thick: Verdict,
    pub thickly_syndetic: Verdict,
}

/// Classifies `N(U,V)` for every basis pair.
pub fn check_set_classes(sys: &System, spec: &CheckSpec) -> Result<SetClassVerdicts> {
    let h = spec.horizon;
    let with = |name: &str| {
        spec.base_verdict(name, sys).param("gap_bound", spec.gap_bound).param("run_request", spec.run_request)
    };
    let (mut syn, mut thick, mut ts) =
        (with("syndetic-transitive"), with("thick-transitive"), with("thickly-syndetic-transitive"));
    let engine = Engine::new(sys, spec.resolution)?;
    let bits = engine.pair_bits(1, h)?;
    let reports: Vec<_> =
        bits.par_iter().map(|b| classify(&b.ones(), h, spec.run_request, spec.gap_bound)).collect::<Result<_>>()?;
    for (p, r) in reports.iter().enumerate() {
        if syn.status.holds() {
            if r.syndetic.status.holds() {
                syn.witnesses.push(r.syndetic.max_gap);
            } else {
                let (start, len) = r.syndetic.empty_window.expect("failing row has a window");
                syn = syn.fail(Certificate::SyndeticGap { pair: engine.pair(p), start, len, horizon: h });
            }
        }
        if thick.status.holds() {
            if r.thick.status.holds() {
                thick.witnesses.push(r.thick.run_at.unwrap_or(0));
            } else {
                thick = thick.fail(Certificate::NoRun {
                    pair: engine.pair(p),
                    run_request: spec.run_request,
                    max_run: r.thick.max_run,
                    horizon: h,
                });
            }
        }
        if ts.status.holds() {
            match r.thickly_syndetic.failure {
                None => ts.witnesses.push(r.thickly_syndetic.gaps.iter().map(|g| g.1).max().unwrap_or(0)),
                Some((l, start, len)) => {
                    ts = ts.fail(Certificate::RunWindow { pair: engine.pair(p), l, start, len, horizon: h });
                }
            }
        }
    }
    Ok(SetClassVerdicts { syndetic: syn, thick, thickly_syndetic: ts })
}

/// Convenience for tests and reports: the status of every notion in order.
pub fn statuses(verdicts: &[Verdict]) -> Vec<(String, Status)> {
    verdicts.iter().map(|v| (v.notion.clone(), v.status)).collect()
}
