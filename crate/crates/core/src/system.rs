//! Map sequences `f_{1,∞}`, memoized compositions `f_i^n`, and derived
//! systems (iterates, vector systems, products).

use std::fmt;
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::map::MapSpec;
use crate::rational::{circle_distance, fmt_q, frac, Q};
use crate::space::{basis, OpenSet, Point, Space};
use crate::verdict::{Certificate, Verdict};

/// Block rules used by the example constructions. Every rule lists the
/// sequence as a concatenation of finite blocks `b = 0, 1, 2, ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockRule {
    /// Block 0 is `base^e` for each `e` in `prefix`; block `b >= 1` is
    /// `base^(c0 + c1·b)` for each `(c0, c1)` in `template`.
    Linear { base: MapSpec, prefix: Vec<i64>, template: Vec<(i64, i64)> },
    /// Block `b >= 1` is `base` followed by `b` identities.
    Padded { base: MapSpec },
    /// Ten-step blocks `h_k = {f^k, f^-k, id×8}`, interrupted at block
    /// indices `10^(k-1)` by `g_k = {f^k ×k, f^(-k²), id×8}`.
    TenBlock { base: MapSpec },
}

impl BlockRule {
    pub fn base(&self) -> &MapSpec {
        match self {
            BlockRule::Linear { base, .. } | BlockRule::Padded { base } | BlockRule::TenBlock { base } => base,
        }
    }

    pub fn block(&self, b: u64) -> Result<Vec<MapSpec>> {
        match self {
            BlockRule::Linear { base, prefix, template } => {
                if b == 0 {
                    prefix.iter().map(|&e| base.pow(e)).collect()
                } else {
                    template.iter().map(|&(c0, c1)| base.pow(c0 + c1 * b as i64)).collect()
                }
            }
            BlockRule::Padded { base } => {
                if b == 0 {
                    return Ok(Vec::new());
                }
                let mut out = vec![base.canonical()?];
                out.extend(std::iter::repeat_n(MapSpec::Identity, b as usize));
                Ok(out)
            }
            BlockRule::TenBlock { base } => {
                let (k, special) = ten_block_kind(b);
                let ki = k as i64;
                let mut out = Vec::with_capacity(k as usize + 9);
                if special {
                    out.extend(std::iter::repeat_n(base.pow(ki)?, k as usize));
                    out.push(base.pow(-ki * ki)?);
                } else {
                    out.push(base.pow(ki)?);
                    out.push(base.pow(-ki)?);
                }
                out.extend(std::iter::repeat_n(MapSpec::Identity, 8));
                Ok(out)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let BlockRule::Linear { template, .. } = self {
            if template.is_empty() {
                return invalid("linear block template must be non-empty");
            }
        }
        Ok(())
    }
}

/// `(k, is_g_block)` for block index `b` of the ten-block rule.
pub fn ten_block_kind(b: u64) -> (u64, bool) {
    if b == 0 {
        return (1, false);
    }
    let digits = b.ilog10() as u64 + 1;
    let power = 10u64.pow(digits as u32 - 1);
    if b == power {
        (digits, true)
    } else {
        (digits, false)
    }
}

/// Rule `n ↦ f_n` with an evaluation bound.
#[derive(Clone)]
pub struct ExplicitRule {
    pub name: String,
    pub bound: u64,
    pub rule: Arc<dyn Fn(u64) -> MapSpec + Send + Sync>,
}

impl fmt::Debug for ExplicitRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExplicitRule({}, bound {})", self.name, self.bound)
    }
}

#[derive(Clone, Debug)]
pub enum MapSequence {
    Constant(MapSpec),
    Periodic(Vec<MapSpec>),
    Block(BlockRule),
    Explicit(ExplicitRule),
}

impl MapSequence {
    pub fn explicit(
        name: impl Into<String>,
        bound: u64,
        rule: impl Fn(u64) -> MapSpec + Send + Sync + 'static,
    ) -> MapSequence {
        MapSequence::Explicit(ExplicitRule { name: name.into(), bound, rule: Arc::new(rule) })
    }

    /// `f_n` for `n >= 1`; block rules are walked from the start.
    pub fn term(&self, n: u64) -> Result<MapSpec> {
        if n == 0 {
            return invalid("sequence indices start at 1");
        }
        match self {
            MapSequence::Constant(m) => m.canonical(),
            MapSequence::Periodic(ms) => ms[((n - 1) % ms.len() as u64) as usize].canonical(),
            MapSequence::Explicit(e) => {
                if n > e.bound {
                    Err(Error::OutOfHorizon { index: n, bound: e.bound })
                } else {
                    (e.rule)(n).canonical()
                }
            }
            MapSequence::Block(rule) => {
                let mut seen = 0u64;
                for b in 0.. {
                    let block = rule.block(b)?;
                    if n <= seen + block.len() as u64 {
                        return Ok(block[(n - seen - 1) as usize].clone());
                    }
                    seen += block.len() as u64;
                }
                unreachable!()
            }
        }
    }

    /// The period when the sequence is periodic by construction.
    pub fn declared_period(&self) -> Option<u64> {
        match self {
            MapSequence::Constant(_) => Some(1),
            MapSequence::Periodic(ms) => Some(ms.len() as u64),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            MapSequence::Constant(m) => format!("constant({m})"),
            MapSequence::Periodic(ms) => {
                format!("periodic({})", ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", "))
            }
            MapSequence::Block(rule) => match rule {
                BlockRule::Linear { base, prefix, template } => {
                    format!("linear-blocks(base {base}, prefix {prefix:?}, template {template:?})")
                }
                BlockRule::Padded { base } => format!("padded-blocks(base {base})"),
                BlockRule::TenBlock { base } => format!("ten-blocks(base {base})"),
            },
            MapSequence::Explicit(e) => format!("explicit({}, bound {})", e.name, e.bound),
        }
    }
}

#[derive(Debug, Default)]
struct Memo {
    /// `terms[n-1] = f_n`
    terms: Vec<MapSpec>,
    /// `prefix[t] = f_1^t`, `prefix[0] = id`
    prefix: Vec<MapSpec>,
    next_block: u64,
}

/// A map sequence on a space with a prefix-composition memo. The memo is
/// append-only behind a lock, so concurrent readers see identical values.
#[derive(Debug)]
pub struct Dynamics {
    space: Space,
    seq: MapSequence,
    invertible: bool,
    memo: RwLock<Memo>,
}

impl Dynamics {
    pub fn new(space: Space, seq: MapSequence) -> Result<Dynamics> {
        let maps: Vec<MapSpec> = match &seq {
            MapSequence::Constant(m) => vec![m.clone()],
            MapSequence::Periodic(ms) => {
                if ms.is_empty() {
                    return invalid("periodic sequence needs at least one map");
                }
                ms.clone()
            }
            MapSequence::Block(rule) => {
                rule.validate()?;
                vec![rule.base().clone()]
            }
            MapSequence::Explicit(e) => {
                if e.bound == 0 {
                    return invalid("explicit rule needs a positive evaluation bound");
                }
                vec![(e.rule)(1)]
            }
        };
        for m in &maps {
            m.check_space(&space)?;
        }
        let invertible = !matches!(seq, MapSequence::Explicit(_)) && maps.iter().all(|m| m.is_homeomorphism());
        Ok(Dynamics {
            space,
            seq,
            invertible,
            memo: RwLock::new(Memo { prefix: vec![MapSpec::Identity], ..Memo::default() }),
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn sequence(&self) -> &MapSequence {
        &self.seq
    }

    fn ensure_terms(&self, n: u64) -> Result<()> {
        if self.memo.read().expect("memo lock").terms.len() as u64 >= n {
            return Ok(());
        }
        let mut memo = self.memo.write().expect("memo lock");
        while (memo.terms.len() as u64) < n {
            match &self.seq {
                MapSequence::Block(rule) => {
                    let b = memo.next_block;
                    let block = rule.block(b)?;
                    for m in &block {
                        m.check_space(&self.space)?;
                    }
                    memo.terms.extend(block);
                    memo.next_block = b + 1;
                }
                other => {
                    let idx = memo.terms.len() as u64 + 1;
                    let m = other.term(idx)?;
                    m.check_space(&self.space)?;
                    memo.terms.push(m);
                }
            }
        }
        Ok(())
    }

    /// `f_n`, `n >= 1`.
    pub fn term(&self, n: u64) -> Result<MapSpec> {
        if n == 0 {
            return invalid("sequence indices start at 1");
        }
        self.ensure_terms(n)?;
        Ok(self.memo.read().expect("memo lock").terms[(n - 1) as usize].clone())
    }

    /// `f_1^t`, computed once per `t` (one multiplication per new prefix).
    pub fn prefix(&self, t: u64) -> Result<MapSpec> {
        {
            let memo = self.memo.read().expect("memo lock");
            if let Some(m) = memo.prefix.get(t as usize) {
                return Ok(m.clone());
            }
        }
        self.ensure_terms(t)?;
        let mut memo = self.memo.write().expect("memo lock");
        while (memo.prefix.len() as u64) <= t {
            let k = memo.prefix.len();
            let next = memo.terms[k - 1].after(&memo.prefix[k - 1])?;
            memo.prefix.push(next);
        }
        Ok(memo.prefix[t as usize].clone())
    }

    /// `f_i^n = f_{i+n-1} ∘ ⋯ ∘ f_i`; `n = 0` gives the identity.
    pub fn compose(&self, i: u64, n: u64) -> Result<MapSpec> {
        if i == 0 {
            return invalid("sequence indices start at 1");
        }
        if n == 0 {
            return Ok(MapSpec::Identity);
        }
        if i == 1 {
            return self.prefix(n);
        }
        if self.invertible {
            let upper = self.prefix(i + n - 1)?;
            let lower = self.prefix(i - 1)?;
            return upper.after(&lower.inverse()?);
        }
        self.ensure_terms(i + n - 1)?;
        let memo = self.memo.read().expect("memo lock");
        let mut acc = MapSpec::Identity;
        for k in i..i + n {
            acc = memo.terms[(k - 1) as usize].after(&acc)?;
        }
        Ok(acc)
    }

    /// Composition straight from the rule, bypassing every cache.
    pub fn compose_uncached(&self, i: u64, n: u64) -> Result<MapSpec> {
        let mut acc = MapSpec::Identity;
        for k in i..i + n {
            acc = self.seq.term(k)?.after(&acc)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug)]
pub struct Factor {
    pub dynamics: Arc<Dynamics>,
    /// One system step is `step` steps of the underlying sequence.
    pub step: u64,
}

impl Factor {
    /// `(f^{[step]})_i^n = f_{step(i-1)+1}^{step·n}`.
    pub fn compose(&self, i: u64, n: u64) -> Result<MapSpec> {
        self.dynamics.compose(self.step * (i - 1) + 1, self.step * n)
    }

    pub fn space(&self) -> &Space {
        self.dynamics.space()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    Base,
    Iterate(u64),
    VectorSystem(Vec<u64>),
    Product(usize),
}

/// A (possibly product) non-autonomous system: one factor per coordinate
/// space, all driven by the same time index.
#[derive(Clone, Debug)]
pub struct System {
    label: String,
    factors: Vec<Factor>,
    derivation: Derivation,
}

impl System {
    pub fn new(label: impl Into<String>, space: Space, seq: MapSequence) -> Result<System> {
        let dynamics = Arc::new(Dynamics::new(space, seq)?);
        Ok(System {
            label: label.into(),
            factors: vec![Factor { dynamics, step: 1 }],
            derivation: Derivation::Base,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> System {
        self.label = label.into();
        self
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn derivation(&self) -> &Derivation {
        &self.derivation
    }

    pub fn dimension(&self) -> usize {
        self.factors.len()
    }

    pub fn spaces(&self) -> Vec<Space> {
        self.factors.iter().map(|f| f.space().clone()).collect()
    }

    /// The single underlying sequence for one-factor base systems.
    pub fn sequence(&self) -> Option<&MapSequence> {
        match self.factors.as_slice() {
            [f] if f.step == 1 => Some(f.dynamics.sequence()),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|f| {
                let base = format!("{} on {}", f.dynamics.sequence().describe(), f.space());
                if f.step == 1 {
                    base
                } else {
                    format!("[{}-iterate] {base}", f.step)
                }
            })
            .collect();
        format!("{}: {}", self.label, parts.join(" x "))
    }

    /// `f_i^n` of every factor.
    pub fn compose(&self, i: u64, n: u64) -> Result<Vec<MapSpec>> {
        if i == 0 {
            return invalid("sequence indices start at 1");
        }
        self.factors.iter().map(|f| f.compose(i, n)).collect()
    }

    /// The `n`-th map of the system.
    pub fn map_at(&self, n: u64) -> Result<Vec<MapSpec>> {
        self.compose(n, 1)
    }

    /// `f^{[k]}`: index `n` evaluates `f_{k(n-1)+1}^k`.
    pub fn iterate(&self, k: u64) -> Result<System> {
        if k == 0 {
            return invalid("iterate order must be positive");
        }
        Ok(System {
            label: format!("{}^[{k}]", self.label),
            factors: self.factors.iter().map(|f| Factor { dynamics: f.dynamics.clone(), step: f.step * k }).collect(),
            derivation: Derivation::Iterate(k),
        })
    }

    /// `f^{[a_1]} × ⋯ × f^{[a_p]}` on `X^p`.
    pub fn vector(&self, a: &[u64]) -> Result<System> {
        if a.is_empty() || a.contains(&0) {
            return invalid("vector entries must be positive and the vector non-empty");
        }
        let factors = a
            .iter()
            .flat_map(|&ai| self.factors.iter().map(move |f| Factor { dynamics: f.dynamics.clone(), step: f.step * ai }))
            .collect();
        let entries: Vec<String> = a.iter().map(|x| x.to_string()).collect();
        Ok(System {
            label: format!("{}^[({})]", self.label, entries.join(",")),
            factors,
            derivation: Derivation::VectorSystem(a.to_vec()),
        })
    }

    pub fn product(systems: &[System]) -> Result<System> {
        if systems.is_empty() {
            return invalid("product of an empty list");
        }
        let labels: Vec<&str> = systems.iter().map(|s| s.label()).collect();
        Ok(System {
            label: labels.join(" x "),
            factors: systems.iter().flat_map(|s| s.factors.iter().cloned()).collect(),
            derivation: Derivation::Product(systems.len()),
        })
    }

    /// Basis boxes at `resolution`: the cartesian product of each factor's
    /// basis, first factor varying slowest.
    pub fn basis(&self, resolution: usize) -> Result<Vec<OpenBox>> {
        let per_factor: Vec<Vec<OpenSet>> =
            self.factors.iter().map(|f| basis(f.space(), resolution)).collect::<Result<_>>()?;
        let mut out = vec![Vec::new()];
        for b in &per_factor {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<OpenSet>| {
                    b.iter().map(move |s| {
                        let mut p = prefix.clone();
                        p.push(s.clone());
                        p
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(OpenBox).collect())
    }

    /// Whole-space box.
    pub fn whole(&self) -> OpenBox {
        OpenBox(self.factors.iter().map(|f| OpenSet::whole(f.space())).collect())
    }

    /// `f_n` applied to a point of the product space.
    pub fn step_point(&self, n: u64, x: &[Point]) -> Result<Vec<Point>> {
        let maps = self.map_at(n)?;
        maps.iter().zip(x).map(|(m, p)| m.apply(p)).collect()
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// A product of open sets, one per factor of a system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenBox(pub Vec<OpenSet>);

impl OpenBox {
    pub fn single(set: OpenSet) -> OpenBox {
        OpenBox(vec![set])
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().any(|s| s.is_empty())
    }

    pub fn intersect(&self, other: &OpenBox) -> Result<OpenBox> {
        self.check_dim(other.0.len())?;
        Ok(OpenBox(self.0.iter().zip(&other.0).map(|(a, b)| a.intersect(b)).collect::<Result<_>>()?))
    }

    pub fn meets(&self, other: &OpenBox) -> Result<bool> {
        self.check_dim(other.0.len())?;
        for (a, b) in self.0.iter().zip(&other.0) {
            if !a.meets(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn image(&self, maps: &[MapSpec]) -> Result<OpenBox> {
        self.check_dim(maps.len())?;
        Ok(OpenBox(self.0.iter().zip(maps).map(|(s, m)| s.image(m)).collect::<Result<_>>()?))
    }

    pub fn preimage(&self, maps: &[MapSpec]) -> Result<OpenBox> {
        self.check_dim(maps.len())?;
        Ok(OpenBox(self.0.iter().zip(maps).map(|(s, m)| s.preimage(m)).collect::<Result<_>>()?))
    }

    pub fn contains(&self, x: &[Point]) -> bool {
        x.len() == self.0.len() && self.0.iter().zip(x).all(|(s, p)| s.contains(p))
    }

    pub fn witness(&self) -> Option<Vec<Point>> {
        self.0.iter().map(|s| s.witness()).collect()
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.0.len() == n {
            Ok(())
        } else {
            invalid(format!("box of dimension {} used with dimension {n}", self.0.len()))
        }
    }
}

impl fmt::Display for OpenBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        f.write_str(&cells.join(" x "))
    }
}

impl serde::Serialize for OpenBox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Sup-metric value, `exact = false` when only a sampled lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SupDistance {
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
    pub exact: bool,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

/// `D(m1, m2) = sup_x d(m1 x, m2 x)`. Distinct shift powers are at
/// distance 1 under the symbolic metric.
pub fn sup_distance(m1: &MapSpec, m2: &MapSpec, space: &Space, sample_resolution: usize) -> Result<SupDistance> {
    let (a, b) = (m1.canonical()?, m2.canonical()?);
    a.check_space(space)?;
    b.check_space(space)?;
    let angle = |m: &MapSpec| match m {
        MapSpec::Identity => Some(Q::zero()),
        MapSpec::Rotation(t) => Some(*t),
        _ => None,
    };
    let exponent = |m: &MapSpec| match m {
        MapSpec::Identity => Some(0),
        MapSpec::ShiftPower(j) => Some(*j),
        _ => None,
    };
    match space {
        Space::Finite(f) => {
            let mut best = Q::zero();
            for x in 0..f.len() {
                let p = Point::Finite(x);
                best = best.max(space.distance(&a.apply(&p)?, &b.apply(&p)?)?);
            }
            return Ok(SupDistance { value: best, exact: true });
        }
        Space::Circle => {
            if let (Some(s), Some(t)) = (angle(&a), angle(&b)) {
                return Ok(SupDistance { value: circle_distance(s, t), exact: true });
            }
        }
        Space::Shift { .. } => {
            if let (Some(s), Some(t)) = (exponent(&a), exponent(&b)) {
                let value = if s == t { Q::zero() } else { Q::one() };
                return Ok(SupDistance { value, exact: true });
            }
        }
    }
    let mut best = Q::zero();
    for set in basis(space, sample_resolution)? {
        if let Some(p) = set.witness() {
            best = best.max(space.distance(&a.apply(&p)?, &b.apply(&p)?)?);
        }
    }
    Ok(SupDistance { value: best, exact: false })
}

/// `max_{1<=k<=k_bound} D(f_r^k, limit^k)` where `f_r^k` is the composition
/// of the `k` maps starting at index `r`.
pub fn collective_convergence_gap(
    sys: &System,
    limit: &MapSpec,
    r: u64,
    k_bound: u64,
    sample_resolution: usize,
) -> Result<SupDistance> {
    let [factor] = sys.factors() else {
        return invalid("collective convergence is measured on a single-factor system");
    };
    let mut out = SupDistance { value: Q::zero(), exact: true };
    for k in 1..=k_bound {
        let d = sup_distance(&factor.compose(r, k)?, &limit.pow(k as i64)?, factor.space(), sample_resolution)?;
        out.value = out.value.max(d.value);
        out.exact &= d.exact;
    }
    Ok(out)
}

/// Int `f_i(U) ≠ ∅` for basis boxes `U` and `i <= index_bound`. Every
/// supported image is a finite union of basis-type open sets, so the
/// interior of a non-empty image is non-empty.
pub fn is_feeble_open(sys: &System, resolution: usize, index_bound: u64) -> Result<Verdict> {
    let v = Verdict::new("feeble-open", sys).param("resolution", resolution).param("index_bound", index_bound);
    let boxes = sys.basis(resolution)?;
    for i in 1..=index_bound {
        let maps = sys.map_at(i)?;
        for b in &boxes {
            if b.image(&maps)?.is_empty() {
                return Ok(v.fail(Certificate::EmptyImage { index: i, set: b.clone() }));
            }
        }
    }
    Ok(v)
}

fn compose_all(outer: &[MapSpec], inner: &[MapSpec]) -> Result<Vec<MapSpec>> {
    outer.iter().zip(inner).map(|(a, b)| a.after(b)).collect()
}

/// `f_i ∘ f_j = f_j ∘ f_i` for `1 <= i < j <= index_bound`.
pub fn check_commutative(sys: &System, index_bound: u64) -> Result<Verdict> {
    let v = Verdict::new("commutative", sys).param("index_bound", index_bound);
    let maps: Vec<Vec<MapSpec>> = (1..=index_bound).map(|n| sys.map_at(n)).collect::<Result<_>>()?;
    for j in 1..=index_bound as usize {
        for i in 1..j {
            let left = compose_all(&maps[i - 1], &maps[j - 1])?;
            let right = compose_all(&maps[j - 1], &maps[i - 1])?;
            if left != right {
                return Ok(v.fail(Certificate::NotCommuting { i: i as u64, j: j as u64, left, right }));
            }
        }
    }
    Ok(v)
}

/// `f_{n+k} = f_n` for `n + k <= index_bound`.
pub fn check_periodic(sys: &System, k: u64, index_bound: u64) -> Result<Verdict> {
    if k == 0 {
        return invalid("period must be positive");
    }
    let v = Verdict::new("periodic", sys).param("k", k).param("index_bound", index_bound);
    for n in 1..=index_bound.saturating_sub(k) {
        if sys.map_at(n + k)? != sys.map_at(n)? {
            return Ok(v.fail(Certificate::NotPeriodic { n, k }));
        }
    }
    Ok(v)
}

/// Continuous surjections `h: X → Y` used for semi-conjugacy checks.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMap {
    Identity,
    Projection { component: usize },
    Table(Vec<usize>),
    /// `x ↦ kx mod 1` on the circle.
    CircleMultiply(i64),
}

impl FactorMap {
    /// Checks that `h` maps the space of `f` onto the space of `g`.
    pub fn check_surjective(&self, f: &System, g: &System) -> Result<()> {
        let (xs, ys) = (f.spaces(), g.spaces());
        match self {
            FactorMap::Identity => {
                if xs != ys {
                    return invalid("identity factor map between different spaces");
                }
            }
            FactorMap::Projection { component } => {
                if *component >= xs.len() || ys.len() != 1 || xs[*component] != ys[0] {
                    return invalid(format!("projection onto component {component} does not reach the target space"));
                }
            }
            FactorMap::Table(t) => {
                let (Some(x), Some(y)) = (single_finite(&xs), single_finite(&ys)) else {
                    return invalid("table factor maps need single finite spaces");
                };
                if t.len() != x || t.iter().any(|&p| p >= y) {
                    return invalid("factor table does not fit the spaces");
                }
                if let Some(missed) = (0..y).find(|p| !t.contains(p)) {
                    return invalid(format!("factor map is not surjective: point {missed} is missed"));
                }
            }
            FactorMap::CircleMultiply(k) => {
                if *k == 0 {
                    return invalid("x -> 0x is not surjective");
                }
                if xs != [Space::Circle] || ys != [Space::Circle] {
                    return invalid("circle multiplication needs circle systems");
                }
            }
        }
        Ok(())
    }

    /// Whether `g_n ∘ h = h ∘ f_n`, with a witness point for tables.
    pub fn intertwines(&self, f: &System, g: &System, n: u64) -> Result<(bool, Option<Point>)> {
        let (fm, gm) = (f.map_at(n)?, g.map_at(n)?);
        match self {
            FactorMap::Identity => Ok((fm == gm, None)),
            FactorMap::Projection { component } => Ok((gm.first() == fm.get(*component), None)),
            FactorMap::Table(t) => {
                for x in 0..t.len() {
                    let fx = fm[0].apply(&Point::Finite(x))?;
                    let Point::Finite(fx) = fx else { unreachable!() };
                    let lhs = gm[0].apply(&Point::Finite(t[x]))?;
                    if lhs != Point::Finite(t[fx]) {
                        return Ok((false, Some(Point::Finite(x))));
                    }
                }
                Ok((true, None))
            }
            FactorMap::CircleMultiply(k) => {
                let angle = |m: &MapSpec| match m {
                    MapSpec::Identity => Ok(Q::zero()),
                    MapSpec::Rotation(a) => Ok(*a),
                    other => crate::error::unsupported(format!("circle multiplication needs rotations, got {other}")),
                };
                let (a, b) = (angle(&fm[0])?, angle(&gm[0])?);
                Ok((frac(a * Q::from_integer(*k)) == b, None))
            }
        }
    }
}

fn single_finite(spaces: &[Space]) -> Option<usize> {
    match spaces {
        [s] => s.finite_metric().map(|f| f.len()),
        _ => None,
    }
}

/// `g_n ∘ h = h ∘ f_n` for `n <= index_bound`.
pub fn check_semiconjugacy(h: &FactorMap, f: &System, g: &System, index_bound: u64) -> Result<Verdict> {
    h.check_surjective(f, g)?;
    let mut v = Verdict::new("semiconjugacy", f).param("index_bound", index_bound).param("target", g.label());
    v.context = vec![g.clone()];
    for n in 1..=index_bound {
        let (ok, point) = h.intertwines(f, g, n)?;
        if !ok {
            return Ok(v.fail(Certificate::NotSemiconjugate { factor: h.clone(), n, point }));
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn shift_const() -> System {
        System::new("shift", Space::shift(2).unwrap(), MapSequence::Constant(MapSpec::shift(1))).unwrap()
    }

    fn alternating() -> System {
        let rule = BlockRule::Linear { base: MapSpec::shift(1), prefix: vec![], template: vec![(0, 1), (0, -1)] };
        System::new("alt", Space::shift(2).unwrap(), MapSequence::Block(rule)).unwrap()
    }

    #[test]
    fn zero_length_composition_is_identity() {
        assert_eq!(shift_const().compose(3, 0).unwrap(), vec![MapSpec::Identity]);
        assert_eq!(alternating().compose(1, 0).unwrap(), vec![MapSpec::Identity]);
    }

    #[test]
    fn alternating_powers_collapse() {
        let s = alternating();
        for k in 1..=20u64 {
            assert_eq!(s.compose(1, 2 * k - 1).unwrap(), vec![MapSpec::shift(k as i64)]);
            assert_eq!(s.compose(1, 2 * k).unwrap(), vec![MapSpec::Identity]);
        }
        let it = s.iterate(2).unwrap();
        for n in 1..=10 {
            assert_eq!(it.compose(1, n).unwrap(), vec![MapSpec::Identity]);
        }
    }

    #[test]
    fn rotation_fourteen_sevenths() {
        let s = System::new("r", Space::Circle, MapSequence::Constant(MapSpec::rotation(q(1, 7)))).unwrap();
        assert_eq!(s.compose(1, 14).unwrap(), vec![MapSpec::Identity]);
    }

    #[test]
    fn iterate_and_vector_systems() {
        let s = shift_const();
        let it = s.iterate(3).unwrap();
        assert_eq!(it.compose(1, 4).unwrap(), vec![MapSpec::shift(12)]);
        let v = s.vector(&[1, 2]).unwrap();
        assert_eq!(v.map_at(5).unwrap(), vec![MapSpec::shift(1), MapSpec::shift(2)]);
        assert_eq!(v.compose(1, 5).unwrap(), vec![MapSpec::shift(5), MapSpec::shift(10)]);
        assert!(s.iterate(0).is_err());
        assert!(s.vector(&[1, 0]).is_err());
    }

    #[test]
    fn explicit_rule_bound_is_enforced() {
        let seq = MapSequence::explicit("halving", 8, |n| MapSpec::rotation(q(1, 1 << n)));
        let s = System::new("e", Space::Circle, seq).unwrap();
        assert!(s.compose(1, 8).is_ok());
        assert!(matches!(s.compose(1, 9), Err(Error::OutOfHorizon { index: 9, bound: 8 })));
    }

    #[test]
    fn ten_block_layout() {
        assert_eq!(ten_block_kind(0), (1, false));
        assert_eq!(ten_block_kind(1), (1, true));
        assert_eq!(ten_block_kind(5), (1, false));
        assert_eq!(ten_block_kind(10), (2, true));
        assert_eq!(ten_block_kind(11), (2, false));
        assert_eq!(ten_block_kind(100), (3, true));
        let rule = BlockRule::TenBlock { base: MapSpec::shift(1) };
        let g2 = rule.block(10).unwrap();
        assert_eq!(g2.len(), 11);
        assert_eq!(&g2[..3], &[MapSpec::shift(2), MapSpec::shift(2), MapSpec::shift(-4)]);
    }

    #[test]
    fn memo_matches_uncached_composition() {
        let rule = BlockRule::TenBlock { base: MapSpec::shift(1) };
        let s = System::new("ten", Space::shift(2).unwrap(), MapSequence::Block(rule)).unwrap();
        let d = &s.factors()[0].dynamics;
        for (i, n) in [(1, 0), (1, 37), (5, 20), (98, 15), (101, 4)] {
            assert_eq!(d.compose(i, n).unwrap(), d.compose_uncached(i, n).unwrap(), "i={i} n={n}");
        }
    }

    #[test]
    fn product_boxes_enumerate_lexicographically() {
        let p = System::product(&[shift_const(), alternating()]).unwrap();
        let b = p.basis(1).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b[1].to_string(), "[0]@0 x [1]@0");
    }

    #[test]
    fn sup_distance_cases() {
        let c = Space::Circle;
        let r = |a, b| MapSpec::rotation(q(a, b));
        assert_eq!(sup_distance(&r(1, 3), &r(1, 3), &c, 4).unwrap().value, q(0, 1));
        assert_eq!(sup_distance(&MapSpec::Identity, &r(1, 4), &c, 4).unwrap().value, q(1, 4));
        let sh = Space::shift(2).unwrap();
        let d = sup_distance(&MapSpec::shift(1), &MapSpec::shift(2), &sh, 2).unwrap();
        assert_eq!((d.value, d.exact), (q(1, 1), true));
        let line = Space::line(&[0, 1, 3]).unwrap();
        let d = sup_distance(&MapSpec::finite(vec![0, 0, 0]), &MapSpec::Identity, &line, 1).unwrap();
        assert_eq!(d.value, q(3, 1));
    }

    #[test]
    fn collective_gap_cases() {
        let c = Space::Circle;
        let f = MapSpec::rotation(q(1, 5));
        let s = System::new("c", c.clone(), MapSequence::Constant(f.clone())).unwrap();
        assert_eq!(collective_convergence_gap(&s, &f, 3, 6, 2).unwrap().value, q(0, 1));
        let p = System::new(
            "p",
            c.clone(),
            MapSequence::Periodic(vec![MapSpec::rotation(q(1, 3)), MapSpec::rotation(q(2, 3))]),
        )
        .unwrap();
        assert_eq!(collective_convergence_gap(&p, &MapSpec::Identity, 1, 1, 2).unwrap().value, q(1, 3));
        let e = System::new("e", c, MapSequence::explicit("halving", 64, |n| MapSpec::rotation(q(1, 1 << n))))
            .unwrap();
        let g = collective_convergence_gap(&e, &MapSpec::Identity, 10, 3, 2).unwrap();
        assert!(g.value <= q(3, 1024) && g.exact);
    }

    #[test]
    fn commutative_periodic_semiconjugate() {
        assert!(check_commutative(&alternating(), 12).unwrap().status.holds());
        let fin = System::new(
            "f",
            Space::discrete(3).unwrap(),
            MapSequence::Periodic(vec![MapSpec::finite(vec![1, 0, 2]), MapSpec::finite(vec![0, 2, 1])]),
        )
        .unwrap();
        let v = check_commutative(&fin, 4).unwrap();
        assert!(v.status.fails() && v.replay().unwrap());
        let per = System::new(
            "p",
            Space::shift(2).unwrap(),
            MapSequence::Periodic(vec![MapSpec::shift(1), MapSpec::shift(-1)]),
        )
        .unwrap();
        assert!(check_periodic(&per, 2, 20).unwrap().status.holds());
        let v = check_periodic(&per, 1, 20).unwrap();
        assert!(v.status.fails() && v.replay().unwrap());

        let prod = System::product(&[shift_const(), alternating()]).unwrap();
        let h = FactorMap::Projection { component: 0 };
        assert!(check_semiconjugacy(&h, &prod, &shift_const(), 10).unwrap().status.holds());
        let bad = check_semiconjugacy(&FactorMap::Projection { component: 1 }, &prod, &alternating(), 10).unwrap();
        assert!(bad.status.holds());
        let wrong = check_semiconjugacy(&h, &prod, &alternating(), 10).unwrap();
        assert!(wrong.status.fails() && wrong.replay().unwrap());
        let t = FactorMap::Table(vec![0, 0, 0]);
        let two = System::new("two", Space::discrete(2).unwrap(), MapSequence::Constant(MapSpec::Identity)).unwrap();
        let err = check_semiconjugacy(&t, &fin, &two, 3).unwrap_err();
        assert!(err.to_string().contains("point 1"));
        let rot = |a| System::new("r", Space::Circle, MapSequence::Constant(MapSpec::rotation(q(a, 7)))).unwrap();
        let v = check_semiconjugacy(&FactorMap::CircleMultiply(2), &rot(1), &rot(2), 5).unwrap();
        assert!(v.status.holds());
    }

    #[test]
    fn feeble_open_cases() {
        assert!(is_feeble_open(&alternating(), 2, 10).unwrap().status.holds());
        let collapse =
            System::new("c", Space::discrete(2).unwrap(), MapSequence::Constant(MapSpec::finite(vec![0, 0]))).unwrap();
        assert!(is_feeble_open(&collapse, 1, 5).unwrap().status.holds());
        let e = System::new("e", Space::Circle, MapSequence::explicit("r", 3, |_| MapSpec::rotation(q(1, 3)))).unwrap();
        assert!(matches!(is_feeble_open(&e, 2, 5), Err(Error::OutOfHorizon { .. })));
    }
}
