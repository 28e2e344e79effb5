//! Ready-made example systems, theorem echo suites and a small
//! counterexample search harness.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{self, ChainBounds, Consistency};
use crate::error::{invalid, Error, Result};
use crate::hitting::{delta_intersection, hitting_set, orbit};
use crate::map::MapSpec;
use crate::properties::{self, check, CheckSpec, Notion};
use crate::rational::{fmt_q, frac, q, Q};
use crate::space::{OpenSet, Point, Space};
use crate::system::{check_semiconjugacy, BlockRule, FactorMap, MapSequence, OpenBox, System};
use crate::verdict::{Certificate, Status, Verdict};

pub const DEFAULT_ALPHA: (i64, i64) = (159, 257);

fn sigma() -> MapSpec {
    MapSpec::shift(1)
}

fn full_shift() -> Space {
    Space::Shift { alphabet: 2 }
}

/// `{f, f^-1, f^2, f^-2, ...}` over the shift.
pub fn alternating_powers() -> System {
    let rule = BlockRule::Linear { base: sigma(), prefix: vec![], template: vec![(0, 1), (0, -1)] };
    System::new("alternating-powers", full_shift(), MapSequence::Block(rule)).expect("valid rule")
}

/// `{id, f, f^-1, f^2, f^-2, ...}` over the shift.
pub fn shifted_alternating_powers() -> System {
    let rule = BlockRule::Linear { base: sigma(), prefix: vec![0], template: vec![(0, 1), (0, -1)] };
    System::new("shifted-alternating-powers", full_shift(), MapSequence::Block(rule)).expect("valid rule")
}

/// `n - 1` identities, then blocks `{f^k, f^-k, id × (n-2)}` (`with_prefix`),
/// or the same blocks without the leading identities.
pub fn spaced_powers(n: u64, with_prefix: bool) -> Result<System> {
    if n < 2 {
        return invalid("block size n must be >= 2");
    }
    let mut template = vec![(0, 1), (0, -1)];
    template.extend(std::iter::repeat_n((0, 0), n as usize - 2));
    let prefix = if with_prefix { vec![0; n as usize - 1] } else { vec![] };
    let label = if with_prefix { format!("spaced-powers-{n}") } else { format!("spaced-powers-{n}-unshifted") };
    System::new(label, full_shift(), MapSequence::Block(BlockRule::Linear { base: sigma(), prefix, template }))
}

pub fn ten_block() -> System {
    System::new("ten-block", full_shift(), MapSequence::Block(BlockRule::TenBlock { base: sigma() }))
        .expect("valid rule")
}

pub fn padded_rotation(alpha: Q) -> Result<System> {
    System::new(
        format!("padded-rotation-{}", fmt_q(&alpha)),
        Space::Circle,
        MapSequence::Block(BlockRule::Padded { base: MapSpec::rotation(alpha) }),
    )
}

pub fn constant_shift() -> System {
    System::new("shift", full_shift(), MapSequence::Constant(sigma())).expect("valid map")
}

pub fn constant_rotation(alpha: Q) -> System {
    System::new(format!("rotation-{}", fmt_q(&alpha)), Space::Circle, MapSequence::Constant(MapSpec::rotation(alpha)))
        .expect("valid map")
}

/// The shipped registry used by the theorem suites.
pub fn registry() -> Vec<System> {
    let alpha = q(DEFAULT_ALPHA.0, DEFAULT_ALPHA.1);
    vec![
        constant_shift(),
        constant_rotation(alpha),
        alternating_powers(),
        ten_block(),
        padded_rotation(alpha).expect("valid rotation"),
        System::new("periodic-shift-inverse", full_shift(), MapSequence::Periodic(vec![sigma(), MapSpec::shift(-1)]))
            .expect("valid maps"),
        System::new("periodic-shift-square", full_shift(), MapSequence::Periodic(vec![sigma(), MapSpec::shift(2)]))
            .expect("valid maps"),
        spaced_powers(3, true).expect("valid block size"),
    ]
}

/// Periodic systems on 2- and 3-point spaces for the chain suite.
pub fn finite_registry() -> Vec<System> {
    let two = Space::discrete(2).expect("two points");
    let line = Space::line(&[0, 1, 3]).expect("three points");
    let mk = |label: &str, space: &Space, seq| System::new(label, space.clone(), seq).expect("valid maps");
    vec![
        mk("two-point-identity", &two, MapSequence::Constant(MapSpec::Identity)),
        mk("two-point-swap", &two, MapSequence::Constant(MapSpec::finite(vec![1, 0]))),
        mk("two-point-collapse", &two, MapSequence::Periodic(vec![MapSpec::finite(vec![0, 0]), MapSpec::finite(vec![1, 0])])),
        mk("line-cycle", &line, MapSequence::Constant(MapSpec::finite(vec![1, 2, 0]))),
        mk("line-drift", &line, MapSequence::Periodic(vec![MapSpec::finite(vec![1, 1, 2]), MapSpec::finite(vec![0, 2, 0])])),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleId {
    IterateMildlyMixing,
    ProductSyndeticWeakmix,
    TenBlockThickSyndetic,
    PaddedRotation,
    MinimalWeakmixNotMulti,
}

impl ExampleId {
    pub const ALL: [ExampleId; 5] = [
        ExampleId::IterateMildlyMixing,
        ExampleId::ProductSyndeticWeakmix,
        ExampleId::TenBlockThickSyndetic,
        ExampleId::PaddedRotation,
        ExampleId::MinimalWeakmixNotMulti,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExampleId::IterateMildlyMixing => "iterate-mildly-mixing",
            ExampleId::ProductSyndeticWeakmix => "product-syndetic-weakmix",
            ExampleId::TenBlockThickSyndetic => "ten-block-thick-syndetic",
            ExampleId::PaddedRotation => "padded-rotation",
            ExampleId::MinimalWeakmixNotMulti => "minimal-weakmix-not-multi",
        }
    }

    /// One-line summary of what the example demonstrates.
    pub fn claim(self) -> &'static str {
        match self {
            ExampleId::IterateMildlyMixing => {
                "the n-th iterate passes the mildly-mixing surrogate while the sequence itself fails it"
            }
            ExampleId::ProductSyndeticWeakmix => {
                "both factor sequences are transitive and weakly mixing, their product is not even transitive"
            }
            ExampleId::TenBlockThickSyndetic => "syndetic and thick transitivity hold, thickly syndetic transitivity fails",
            ExampleId::PaddedRotation => "thick transitivity holds, weak mixing fails",
            ExampleId::MinimalWeakmixNotMulti => "weak mixing holds, multi-transitivity and delta-transitivity fail",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<ExampleId> {
        ExampleId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown example \"{s}\"")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExampleParams {
    pub horizon: u64,
    pub resolution: usize,
    /// Block size for the iterate example.
    pub n: u64,
    #[serde(serialize_with = "ser_q")]
    pub alpha: Q,
    pub run_request: u64,
    /// `None`: derived from the mixing threshold of the shift.
    pub gap_bound: Option<u64>,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

impl ExampleParams {
    pub fn defaults(id: ExampleId) -> ExampleParams {
        let base = ExampleParams {
            horizon: 64,
            resolution: 2,
            n: 3,
            alpha: q(DEFAULT_ALPHA.0, DEFAULT_ALPHA.1),
            run_request: 3,
            gap_bound: None,
        };
        match id {
            ExampleId::IterateMildlyMixing => ExampleParams { horizon: 60, ..base },
            ExampleId::ProductSyndeticWeakmix => ExampleParams { resolution: 3, ..base },
            ExampleId::TenBlockThickSyndetic => ExampleParams { horizon: 1100, resolution: 1, ..base },
            ExampleId::PaddedRotation => ExampleParams { horizon: 200, resolution: 8, run_request: 4, ..base },
            ExampleId::MinimalWeakmixNotMulti => base,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.resolution == 0 || self.run_request == 0 {
            return invalid("horizon, resolution and run_request must be >= 1");
        }
        if self.n < 2 {
            return invalid("block size n must be >= 2");
        }
        if self.gap_bound == Some(0) {
            return invalid("gap_bound must be >= 1");
        }
        Ok(())
    }
}

/// Builds the systems of an example, in report order.
pub fn build_example(id: ExampleId, params: &ExampleParams) -> Result<Vec<System>> {
    params.validate()?;
    Ok(match id {
        ExampleId::IterateMildlyMixing => {
            let f = spaced_powers(params.n, true)?;
            let g = spaced_powers(params.n, false)?;
            vec![f.iterate(params.n)?, f, g]
        }
        ExampleId::ProductSyndeticWeakmix => {
            let (f, g) = (alternating_powers(), shifted_alternating_powers());
            let p = System::product(&[f.clone(), g.clone()])?;
            vec![f, g, p]
        }
        ExampleId::TenBlockThickSyndetic => vec![ten_block()],
        ExampleId::PaddedRotation => vec![padded_rotation(params.alpha)?],
        ExampleId::MinimalWeakmixNotMulti => vec![alternating_powers().with_label("alternating-powers-substitute")],
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub description: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleRow {
    pub system: String,
    pub notion: String,
    pub expected: Status,
    pub observed: Status,
    pub matches: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleReport {
    pub id: ExampleId,
    pub claim: String,
    pub parameters: ExampleParams,
    pub derived: BTreeMap<String, String>,
    pub identities: Vec<IdentityCheck>,
    pub rows: Vec<ExampleRow>,
    pub notes: Vec<String>,
}

impl ExampleReport {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|r| r.matches) && self.identities.iter().all(|i| i.passed)
    }

    pub fn verdicts(&self) -> impl Iterator<Item = &Verdict> {
        self.rows.iter().map(|r| &r.verdict)
    }
}

/// Largest mixing threshold `N` of the constant shift over basis pairs.
pub fn shift_mixing_threshold(resolution: usize) -> Result<u64> {
    let h = 4 * resolution as u64 + 8;
    let v = properties::check_mixing(&constant_shift(), &CheckSpec::new(Notion::Mixing, resolution, h))?;
    if !v.status.holds() {
        return invalid("the shift failed its own mixing check");
    }
    Ok(v.witnesses.into_iter().max().unwrap_or(1))
}

struct Plan {
    system: usize,
    spec: CheckSpec,
    expected: Status,
    registry: Vec<System>,
}

fn plan(system: usize, spec: CheckSpec, expected: Status) -> Plan {
    Plan { system, spec, expected, registry: Vec::new() }
}

const HOLDS: Status = Status::HoldsUpToHorizon;
const FAILS: Status = Status::FailsWithCertificate;

/// Runs the example's expected-verdict table at `params`.
pub fn run_example(id: ExampleId, params: &ExampleParams) -> Result<ExampleReport> {
    let systems = build_example(id, params)?;
    let (h, r) = (params.horizon, params.resolution);
    let base = |n: Notion| CheckSpec::new(n, r, h);
    let mut identities = Vec::new();
    let mut derived = BTreeMap::new();
    let mut notes = Vec::new();
    let mut plans = Vec::new();
    match id {
        ExampleId::IterateMildlyMixing => {
            let n = params.n;
            let f = &systems[1];
            let ok = (1..=h / n).all(|k| f.compose(1, k * n).ok() == Some(vec![MapSpec::shift(k as i64)]));
            identities.push(IdentityCheck { description: format!("f_1^(kn) = shift^k for k <= {}", h / n), passed: ok });
            let iterate_spec = CheckSpec::new(Notion::MildlyMixingSurrogate, r, h / n);
            let mut p = plan(0, iterate_spec, HOLDS);
            p.registry = vec![systems[2].clone(), constant_shift(), constant_rotation(params.alpha)];
            plans.push(p);
            let mut p = plan(1, base(Notion::MildlyMixingSurrogate), FAILS);
            p.registry = vec![systems[2].clone()];
            plans.push(p);
            plans.push(plan(2, base(Notion::Transitive), HOLDS));
            notes.push(format!("the iterate is checked at horizon {} = horizon / n", h / n));
        }
        ExampleId::ProductSyndeticWeakmix => {
            let (f, g) = (&systems[0], &systems[1]);
            let half = h / 2;
            let odd = (1..=half).all(|k| f.compose(1, 2 * k - 1).ok() == Some(vec![MapSpec::shift(k as i64)]));
            let even = (1..=half).all(|k| f.compose(1, 2 * k).ok() == Some(vec![MapSpec::Identity]));
            let gev = (1..=half).all(|k| g.compose(1, 2 * k).ok() == Some(vec![MapSpec::shift(k as i64)]));
            identities.push(IdentityCheck { description: format!("f_1^(2k-1) = shift^k for k <= {half}"), passed: odd });
            identities.push(IdentityCheck { description: format!("f_1^(2k) = id for k <= {half}"), passed: even });
            identities.push(IdentityCheck { description: format!("g_1^(2k) = shift^k for k <= {half}"), passed: gev });
            let (u, v) = product_cylinder_pair()?;
            let empty = hitting_set(&systems[2], &u, &v, h)?.indices.is_empty();
            identities.push(IdentityCheck {
                description: format!("N({u}, {v}) is empty up to {h}"),
                passed: empty,
            });
            for s in 0..2 {
                plans.push(plan(s, base(Notion::Transitive), HOLDS));
                plans.push(plan(s, base(Notion::WeakMixing), HOLDS));
            }
            plans.push(plan(2, base(Notion::Transitive), FAILS));
            plans.push(plan(2, CheckSpec::new(Notion::Transitive, 1, h), FAILS));
            let mut wm = base(Notion::WeakMixing);
            wm.tuple_cap = 10_000_000;
            plans.push(plan(2, wm, FAILS));
            let mut syn = base(Notion::SyndeticTransitive);
            syn.gap_bound = h / 2;
            plans.push(plan(2, syn, FAILS));
            notes.push("the failing product pair uses disjoint sets, as the argument requires".into());
        }
        ExampleId::TenBlockThickSyndetic => {
            let s = &systems[0];
            let m = shift_mixing_threshold(r)?;
            let gap = params.gap_bound.unwrap_or(m + 10);
            derived.insert("mixing_threshold".into(), m.to_string());
            derived.insert("gap_bound".into(), gap.to_string());
            let dynamics = &s.factors()[0].dynamics;
            let rule = BlockRule::TenBlock { base: sigma() };
            let mut start = 1u64;
            for b in 0.. {
                let block = rule.block(b)?;
                let len = block.len() as u64;
                if start + len - 1 > h {
                    break;
                }
                let (k, special) = crate::system::ten_block_kind(b);
                if special {
                    let terms: Vec<MapSpec> = (start..start + len).map(|i| dynamics.term(i)).collect::<Result<_>>()?;
                    let ki = k as i64;
                    let mut want = vec![MapSpec::shift(ki); k as usize];
                    want.push(MapSpec::shift(-ki * ki));
                    want.extend(std::iter::repeat_n(MapSpec::Identity, 8));
                    identities.push(IdentityCheck {
                        description: format!("block {b} at indices {start}..{} is g_{k}", start + len - 1),
                        passed: terms == want,
                    });
                }
                start += len;
            }
            let mut spec = base(Notion::SyndeticTransitive);
            spec.gap_bound = gap;
            spec.run_request = params.run_request;
            for (n, e) in [
                (Notion::SyndeticTransitive, HOLDS),
                (Notion::ThickTransitive, HOLDS),
                (Notion::ThicklySyndeticTransitive, FAILS),
            ] {
                plans.push(plan(0, spec.with_notion(n), e));
            }
            notes.push(format!("f is the shift; block boundaries are honored up to index {h}"));
        }
        ExampleId::PaddedRotation => {
            let s = &systems[0];
            let jmax = (1..).take_while(|j| j * (j + 1) / 2 <= h).last().unwrap_or(0);
            let ok = (1..=jmax).all(|j| {
                s.compose(1, j * (j + 1) / 2).ok() == Some(vec![MapSpec::rotation(params.alpha * Q::from_integer(j as i64))])
            });
            identities.push(IdentityCheck {
                description: format!("f_1^(1+2+...+j) = rotation by j*alpha for j <= {jmax}"),
                passed: ok,
            });
            let x = Point::Circle(q(0, 1));
            let o = orbit(s, std::slice::from_ref(&x), h)?;
            let mut seen: Vec<Point> = o.points.iter().map(|p| p[0].clone()).collect();
            seen.sort();
            seen.dedup();
            let mut want: Vec<Point> =
                (0..=jmax).map(|j| Point::Circle(frac(params.alpha * Q::from_integer(j as i64)))).collect();
            want.sort();
            identities.push(IdentityCheck {
                description: "orbit of 0 as a set equals the rotation orbit prefix".into(),
                passed: seen == want,
            });
            if *params.alpha.denom() as u64 <= h {
                notes.push("the rotation denominator does not exceed the horizon; the rotation is periodic here".into());
            }
            let mut thick = base(Notion::ThickTransitive);
            thick.run_request = params.run_request;
            plans.push(plan(0, base(Notion::Transitive), HOLDS));
            plans.push(plan(0, thick, HOLDS));
            plans.push(plan(0, base(Notion::WeakMixing), FAILS));
        }
        ExampleId::MinimalWeakmixNotMulti => {
            let s = &systems[0];
            let ok = (1..=h / 2).all(|k| s.compose(1, 2 * k).ok() == Some(vec![MapSpec::Identity]));
            identities.push(IdentityCheck { description: format!("f_1^(2k) = id for k <= {}", h / 2), passed: ok });
            plans.push(plan(0, base(Notion::WeakMixing), HOLDS));
            plans.push(plan(0, base(Notion::MultiTransitive), FAILS));
            plans.push(plan(0, base(Notion::DeltaTransitive), FAILS));
            notes.push(
                "the base map is the shift, which is mixing but not minimal; minimality is not modeled, \
                 the failures depend only on f_1^(2k) = id"
                    .into(),
            );
        }
    }
    if !identities.iter().all(|i| i.passed) {
        notes.push("a defining identity failed; verdicts below are not meaningful".into());
    }
    let rows = plans
        .par_iter()
        .map(|p| {
            let sys = &systems[p.system];
            let verdict = check(sys, &p.spec, &p.registry)?;
            Ok(ExampleRow {
                system: sys.label().to_string(),
                notion: p.spec.notion.name().to_string(),
                expected: p.expected,
                observed: verdict.status,
                matches: verdict.status == p.expected,
                verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExampleReport {
        id,
        claim: id.claim().to_string(),
        parameters: params.clone(),
        derived,
        identities,
        rows,
        notes,
    })
}

/// `[0]_0 × [0]_0` and `[1]_0 × [1]_0`.
pub fn product_cylinder_pair() -> Result<(OpenBox, OpenBox)> {
    let s = full_shift();
    let c = |w: u8| OpenSet::cylinder(&s, 0, &[w]);
    Ok((OpenBox(vec![c(0)?, c(0)?]), OpenBox(vec![c(1)?, c(1)?])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    IterationInvarianceMulti,
    StrongEquivalents,
    DeltaCharacterization,
    DeltaIteration,
    PeriodicCollapse,
    SemiconjugacyTransfer,
    ThickImpliesTotal,
    ChainDeltaMixing,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::IterationInvarianceMulti,
        TheoremId::StrongEquivalents,
        TheoremId::DeltaCharacterization,
        TheoremId::DeltaIteration,
        TheoremId::PeriodicCollapse,
        TheoremId::SemiconjugacyTransfer,
        TheoremId::ThickImpliesTotal,
        TheoremId::ChainDeltaMixing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::IterationInvarianceMulti => "iteration-invariance-multi",
            TheoremId::StrongEquivalents => "strong-equivalents",
            TheoremId::DeltaCharacterization => "delta-characterization",
            TheoremId::DeltaIteration => "delta-iteration",
            TheoremId::PeriodicCollapse => "periodic-collapse",
            TheoremId::SemiconjugacyTransfer => "semiconjugacy-transfer",
            TheoremId::ThickImpliesTotal => "thick-implies-total",
            TheoremId::ChainDeltaMixing => "chain-delta-mixing",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            TheoremId::IterationInvarianceMulti => "multi-transitivity of a system and of its n-th iterate coincide",
            TheoremId::StrongEquivalents => {
                "strong multi-transitivity of f, of f^[n], of f^[a], and weak mixing of all orders of \
                 f x f^[2] x ... x f^[k] for every k coincide"
            }
            TheoremId::DeltaCharacterization => {
                "delta-transitivity coincides with the existence of points realizing every pattern f_1^(in)(x) in U_i"
            }
            TheoremId::DeltaIteration => "delta-transitivity of a system and of its n-th iterate coincide",
            TheoremId::PeriodicCollapse => {
                "a k-periodic system and the autonomous system of g = f_k o ... o f_1 agree on strong \
                 multi-transitivity, vector multi-transitivity and delta-transitivity"
            }
            TheoremId::SemiconjugacyTransfer => {
                "strong and vector multi-transitivity, delta-mixing and delta-transitivity pass to semi-conjugate factors"
            }
            TheoremId::ThickImpliesTotal => "thick transitivity implies total transitivity",
            TheoremId::ChainDeltaMixing => {
                "chain mixing with shadowing implies delta-mixing; chain transitivity with shadowing implies transitivity"
            }
        }
    }

    /// Equivalence suites compare statuses; implication suites flag only
    /// hypothesis-holds with conclusion-fails.
    fn is_equivalence(self) -> bool {
        !matches!(self, TheoremId::SemiconjugacyTransfer | TheoremId::ThickImpliesTotal | TheoremId::ChainDeltaMixing)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<TheoremId> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown theorem suite \"{s}\"")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteBounds {
    pub horizon: u64,
    pub resolution: usize,
    pub m_bound: u64,
    /// Largest iterate for the iteration suites.
    pub n_max: u64,
    pub max_len: usize,
    pub max_entry: u64,
    /// Largest `k` in `f × f^[2] × ... × f^[k]`.
    pub k_max: u64,
    /// Largest weak-mixing order standing in for "all orders".
    pub order_max: usize,
    pub run_request: u64,
    pub n_bound: u64,
    pub chain_length: u64,
}

impl Default for SuiteBounds {
    fn default() -> SuiteBounds {
        SuiteBounds {
            horizon: 48,
            resolution: 2,
            m_bound: 2,
            n_max: 4,
            max_len: 2,
            max_entry: 2,
            k_max: 2,
            order_max: 2,
            run_request: 2,
            n_bound: 2,
            chain_length: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Side {
    pub label: String,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRow {
    pub system: String,
    pub case: String,
    pub left: Side,
    pub right: Side,
    pub outcome: Consistency,
    /// Full verdicts of both sides, kept only for flagged rows.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<Verdict>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub id: TheoremId,
    pub statement: String,
    pub bounds: SuiteBounds,
    pub rows: Vec<SuiteRow>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn flagged(&self) -> Vec<&SuiteRow> {
        self.rows.iter().filter(|r| r.outcome == Consistency::Flagged).collect()
    }
}

pub const FLAG_NOTE: &str =
    "a FLAGGED row marks a truncation artifact or a bug to inspect; it is never a disproof of the statement";

fn row(id: TheoremId, sys: &System, case: String, left: (String, Verdict), right: (String, Verdict)) -> SuiteRow {
    let (ls, rs) = (left.1.status, right.1.status);
    let flagged = if id.is_equivalence() { ls != rs } else { ls.holds() && rs.fails() };
    SuiteRow {
        system: sys.label().to_string(),
        case,
        left: Side { label: left.0, status: ls },
        right: Side { label: right.0, status: rs },
        outcome: if flagged { Consistency::Flagged } else { Consistency::Consistent },
        evidence: if flagged { vec![left.1, right.1] } else { Vec::new() },
    }
}

fn spec_at(b: &SuiteBounds, notion: Notion, horizon: u64) -> CheckSpec {
    let mut s = CheckSpec::new(notion, b.resolution, horizon.max(1));
    s.m_bound = b.m_bound;
    s.max_len = b.max_len;
    s.max_entry = b.max_entry;
    s.run_request = b.run_request;
    s.n_bound = b.n_bound;
    s
}

/// Weak mixing of every order `2..=order_max` as one combined verdict.
fn weak_mixing_all_orders(sys: &System, b: &SuiteBounds, horizon: u64) -> Result<Verdict> {
    let parts = (2..=b.order_max.max(2))
        .map(|n| properties::check_weak_mixing_order(sys, n, &spec_at(b, Notion::WeakMixing, horizon)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Verdict::new("weak-mixing-all-orders", sys).param("order_max", b.order_max).with_parts(parts))
}

fn suite_rows(id: TheoremId, sys: &System, b: &SuiteBounds) -> Result<Vec<SuiteRow>> {
    let h = b.horizon;
    let mut rows = Vec::new();
    match id {
        TheoremId::IterationInvarianceMulti => {
            let left = check(sys, &spec_at(b, Notion::MultiTransitive, h), &[])?;
            for n in 2..=b.n_max {
                let it = sys.iterate(n)?;
                let right = check(&it, &spec_at(b, Notion::MultiTransitive, h / n), &[])?;
                rows.push(row(
                    id,
                    sys,
                    format!("n={n}"),
                    (format!("multi-transitive @ {h}"), left.clone()),
                    (format!("iterate multi-transitive @ {}", h / n), right),
                ));
            }
        }
        TheoremId::StrongEquivalents => {
            let strong = |s: &System, horizon| check(s, &spec_at(b, Notion::StronglyMultiTransitive, horizon), &[]);
            let left = strong(sys, h)?;
            let l = (format!("(1) strongly multi-transitive @ {h}"), left);
            for n in 2..=b.n_max.min(3) {
                let right = strong(&sys.iterate(n)?, h / n)?;
                rows.push(row(id, sys, format!("(2) n={n}"), l.clone(), (format!("iterate @ {}", h / n), right)));
            }
            let a: Vec<u64> = (1..=b.max_entry).collect();
            let right = strong(&sys.vector(&a)?, h / b.max_entry)?;
            rows.push(row(id, sys, format!("(3) a={a:?}"), l.clone(), (format!("vector system @ {}", h / b.max_entry), right)));
            let parts = (1..=b.k_max)
                .map(|k| {
                    let ks: Vec<u64> = (1..=k).collect();
                    weak_mixing_all_orders(&sys.vector(&ks)?, b, h / k)
                })
                .collect::<Result<Vec<_>>>()?;
            let right = Verdict::new("weak-mixing-of-iterate-products", sys).param("k_max", b.k_max).with_parts(parts);
            rows.push(row(id, sys, format!("(4) k<={}", b.k_max), l, ("f x ... x f^[k] weakly mixing".into(), right)));
        }
        TheoremId::DeltaCharacterization => {
            let left = check(sys, &spec_at(b, Notion::DeltaTransitive, h), &[])?;
            let right = pattern_points(sys, b.m_bound, b.resolution, h)?;
            rows.push(row(
                id,
                sys,
                format!("m={}", b.m_bound),
                ("delta-transitive".into(), left),
                ("pattern points exist".into(), right),
            ));
        }
        TheoremId::DeltaIteration => {
            let left = check(sys, &spec_at(b, Notion::DeltaTransitive, h), &[])?;
            for n in 2..=b.n_max.min(3) {
                let right = check(&sys.iterate(n)?, &spec_at(b, Notion::DeltaTransitive, h / n), &[])?;
                rows.push(row(
                    id,
                    sys,
                    format!("n={n}"),
                    (format!("delta-transitive @ {h}"), left.clone()),
                    (format!("iterate delta-transitive @ {}", h / n), right),
                ));
            }
        }
        TheoremId::PeriodicCollapse => {
            let Some(k) = sys.sequence().and_then(|s| s.declared_period()) else {
                return Ok(rows);
            };
            let g = sys.compose(1, k)?.remove(0);
            let ads = System::new(format!("collapse({g})"), sys.spaces()[0].clone(), MapSequence::Constant(g))?;
            let hk = h / k;
            for (notion, case) in [
                (Notion::StronglyMultiTransitive, "strongly multi-transitive"),
                (Notion::MultiTransitiveVector, "multi-transitive wrt (1,2)"),
                (Notion::DeltaTransitive, "delta-transitive"),
            ] {
                let mut s = spec_at(b, notion, h);
                s.vector = vec![1, 2];
                let mut sg = s.clone();
                sg.horizon = hk.max(1);
                let left = check(sys, &s, &[])?;
                let right = check(&ads, &sg, &[])?;
                rows.push(row(
                    id,
                    sys,
                    format!("{case}, k={k}"),
                    (format!("sequence @ {h}"), left),
                    (format!("collapsed map @ {hk}"), right),
                ));
            }
        }
        TheoremId::SemiconjugacyTransfer => {
            let f = System::product(&[sys.clone(), constant_shift()])?;
            let h_map = FactorMap::Projection { component: 0 };
            let sc = check_semiconjugacy(&h_map, &f, sys, h)?;
            rows.push(row(
                id,
                sys,
                "semi-conjugacy".into(),
                ("projection".into(), Verdict::new("given", sys)),
                ("g_n o h = h o f_n".into(), sc),
            ));
            let mut notions = vec![
                (Notion::StronglyMultiTransitive, "strongly multi-transitive"),
                (Notion::MultiTransitiveVector, "multi-transitive wrt (1,2)"),
                (Notion::DeltaTransitive, "delta-transitive"),
                (Notion::DeltaMixing, "delta-mixing"),
            ];
            if b.resolution > 1 {
                // Product boxes grow quadratically; keep the suite small.
                notions.retain(|(n, _)| *n != Notion::StronglyMultiTransitive || b.max_len <= 2);
            }
            for (notion, case) in notions {
                let mut s = spec_at(b, notion, h);
                s.vector = vec![1, 2];
                s.subset = Some((1..=h / b.m_bound.max(1)).filter(|n| n % 2 == 0).collect());
                let left = check(&f, &s, &[])?;
                let right = check(sys, &s, &[])?;
                rows.push(row(id, sys, case.into(), ("extension".into(), left), ("factor".into(), right)));
            }
        }
        TheoremId::ThickImpliesTotal => {
            let mut s = spec_at(b, Notion::ThickTransitive, h);
            s.run_request = b.run_request.max(b.n_bound);
            let left = check(sys, &s, &[])?;
            let right = check(sys, &spec_at(b, Notion::TotallyTransitive, h), &[])?;
            rows.push(row(
                id,
                sys,
                format!("run {} / n_bound {}", s.run_request, b.n_bound),
                ("thick-transitive".into(), left),
                ("totally-transitive".into(), right),
            ));
        }
        TheoremId::ChainDeltaMixing => {
            let space = sys.spaces().remove(0);
            let Some(metric) = space.finite_metric() else {
                return Ok(rows);
            };
            let eps = metric.min_positive_distance().unwrap_or(Q::from_integer(1));
            let deltas = [metric.diameter() + Q::from_integer(1), eps, eps / Q::from_integer(2)];
            let rep = chain::verify_chain_theorems(
                sys,
                eps,
                &deltas,
                ChainBounds { length_bound: b.chain_length, m_bound: b.m_bound },
            )?;
            for r in &rep.rows {
                let hyp = Verdict {
                    status: if r.hypotheses_hold { Status::HoldsUpToHorizon } else { Status::FailsWithCertificate },
                    ..Verdict::new("hypotheses", sys)
                };
                let concl = match r.implication.contains("delta") {
                    true => rep.delta_mixing.clone(),
                    false => rep.transitive.clone(),
                };
                rows.push(row(
                    id,
                    sys,
                    r.implication.clone(),
                    ("chain property + shadowing".into(), hyp),
                    ("conclusion".into(), concl),
                ));
            }
        }
    }
    Ok(rows)
}

/// For every tuple of basis boxes, the witness point of the Δ-intersection
/// at the least good time must realize `f_1^{in}(x) ∈ U_i`; fails when
/// some tuple has no such point.
fn pattern_points(sys: &System, m: u64, resolution: usize, horizon: u64) -> Result<Verdict> {
    let v = Verdict::new("pattern-points", sys).param("m", m).param("horizon", horizon);
    let boxes = sys.basis(resolution)?;
    let times: Vec<u64> = (1..=horizon / m.max(1)).collect();
    let arity = m as usize + 1;
    let mut idx = vec![0usize; arity];
    loop {
        let sets: Vec<OpenBox> = idx.iter().map(|&i| boxes[i].clone()).collect();
        let mut found = false;
        for &n in &times {
            let d = delta_intersection(sys, &sets, n)?;
            if let Some(x) = d.witness() {
                for (i, u) in sets.iter().enumerate() {
                    let maps = sys.compose(1, i as u64 * n)?;
                    let y: Vec<Point> = maps.iter().zip(&x).map(|(f, p)| f.apply(p)).collect::<Result<_>>()?;
                    if !u.contains(&y) {
                        return invalid(format!("witness point misses {u} at time {}", i as u64 * n));
                    }
                }
                found = true;
                break;
            }
        }
        if !found {
            return Ok(v.fail(Certificate::DeltaEmpty { sets, times }));
        }
        let Some(pos) = (0..arity).rev().find(|&p| idx[p] + 1 < boxes.len()) else { break };
        idx[pos] += 1;
        for x in idx.iter_mut().skip(pos + 1) {
            *x = 0;
        }
    }
    Ok(v)
}

/// Runs suite `id` on every registry system that supports it.
pub fn verify_theorem(id: TheoremId, registry: &[System], bounds: &SuiteBounds) -> Result<SuiteReport> {
    if bounds.horizon == 0 || bounds.resolution == 0 || bounds.m_bound == 0 || bounds.n_max == 0 {
        return invalid("suite bounds must be >= 1");
    }
    let per_system: Vec<Vec<SuiteRow>> =
        registry.par_iter().map(|s| suite_rows(id, s, bounds)).collect::<Result<_>>()?;
    let rows: Vec<SuiteRow> = per_system.into_iter().flatten().collect();
    let mut notes = vec![FLAG_NOTE.to_string()];
    match id {
        TheoremId::PeriodicCollapse => notes.push("systems without a declared period are skipped".into()),
        TheoremId::ChainDeltaMixing => {
            notes.push("only periodic systems on finite spaces are checked".into());
            notes.push("shadowing is read as tracing from time 1 with d(f_1^i(z), x_i) < eps".into());
        }
        TheoremId::StrongEquivalents => notes.push(format!(
            "'all orders' and 'every k' are truncated to orders <= {} and k <= {}",
            bounds.order_max, bounds.k_max
        )),
        _ => {}
    }
    Ok(SuiteReport { id, statement: id.statement().to_string(), bounds: bounds.clone(), rows, notes })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Question {
    /// Does multi-transitivity imply weak mixing?
    Q1,
    /// Does Δ-transitivity imply weak mixing of all orders?
    Q2,
}

impl FromStr for Question {
    type Err = Error;

    fn from_str(s: &str) -> Result<Question> {
        match s.to_ascii_uppercase().as_str() {
            "Q1" => Ok(Question::Q1),
            "Q2" => Ok(Question::Q2),
            _ => invalid(format!("unknown question \"{s}\"")),
        }
    }
}

/// Linear block rules over the shift: templates of one or two entries
/// `(c0, c1)` with `c0, c1 ∈ {-1, 0, 1}`, skipping the all-identity ones,
/// in lexicographic order.
pub fn toy_family(size: usize) -> Vec<System> {
    let vals = [-1i64, 0, 1];
    let mut templates: Vec<Vec<(i64, i64)>> = Vec::new();
    for len in 1..=2 {
        let mut idx = vec![0usize; 2 * len];
        loop {
            let t: Vec<(i64, i64)> = (0..len).map(|i| (vals[idx[2 * i]], vals[idx[2 * i + 1]])).collect();
            if t.iter().any(|&(a, b)| a != 0 || b != 0) {
                templates.push(t);
            }
            let Some(p) = (0..idx.len()).rev().find(|&p| idx[p] + 1 < vals.len()) else { break };
            idx[p] += 1;
            for x in idx.iter_mut().skip(p + 1) {
                *x = 0;
            }
        }
    }
    templates
        .into_iter()
        .take(size)
        .map(|t| {
            let label = format!("toy{t:?}").replace(' ', "");
            let rule = BlockRule::Linear { base: sigma(), prefix: vec![], template: t };
            System::new(label, full_shift(), MapSequence::Block(rule)).expect("valid rule")
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub system: String,
    pub hypothesis: Verdict,
    pub conclusion: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub question: Question,
    pub hypothesis: String,
    pub conclusion: String,
    pub horizon: u64,
    pub resolution: usize,
    pub budget: usize,
    pub evaluated: usize,
    pub exhausted_budget: bool,
    pub candidates: Vec<Candidate>,
    pub note: String,
}

pub fn search_counterexample(
    question: Question,
    family: &[System],
    budget: usize,
    horizon: u64,
    resolution: usize,
) -> Result<SearchReport> {
    let members = &family[..family.len().min(budget)];
    let (hyp_name, concl_name) = match question {
        Question::Q1 => ("multi-transitive", "weak-mixing"),
        Question::Q2 => ("delta-transitive", "weak mixing of orders 2 and 3"),
    };
    let results: Vec<Option<Candidate>> = members
        .par_iter()
        .map(|s| {
            let spec = CheckSpec::new(Notion::MultiTransitive, resolution, horizon);
            let (hyp, concl) = match question {
                Question::Q1 => (
                    properties::check_multi_transitive(s, 2, &spec)?,
                    properties::check_weak_mixing_order(s, 2, &spec)?,
                ),
                Question::Q2 => {
                    let hyp = properties::check_delta_transitive(s, 2, &spec)?;
                    let parts = vec![
                        properties::check_weak_mixing_order(s, 2, &spec)?,
                        properties::check_weak_mixing_order(s, 3, &spec)?,
                    ];
                    (hyp, Verdict::new("weak-mixing-orders-2-3", s).with_parts(parts))
                }
            };
            Ok((hyp.status.holds() && concl.status.fails()).then(|| Candidate {
                system: s.label().to_string(),
                hypothesis: hyp,
                conclusion: concl,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(SearchReport {
        question,
        hypothesis: hyp_name.into(),
        conclusion: concl_name.into(),
        horizon,
        resolution,
        budget,
        evaluated: members.len(),
        exhausted_budget: family.len() > budget,
        candidates: results.into_iter().flatten().collect(),
        note: "a candidate is horizon-limited evidence only, not a counterexample".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_example_identities() {
        let s = build_example(ExampleId::ProductSyndeticWeakmix, &ExampleParams::defaults(ExampleId::ProductSyndeticWeakmix))
            .unwrap();
        assert_eq!(s[0].compose(1, 4).unwrap(), vec![MapSpec::Identity]);
    }

    #[test]
    fn ten_block_g_blocks() {
        let s = ten_block();
        // h_1 occupies 1..=10, g_1 occupies 11..=20.
        assert_eq!(s.map_at(11).unwrap(), vec![MapSpec::shift(1)]);
        assert_eq!(s.map_at(12).unwrap(), vec![MapSpec::shift(-1)]);
        // Blocks 0..=9 have 10 entries, so g_2 starts at 101.
        let terms: Vec<MapSpec> = (101..104).map(|n| s.map_at(n).unwrap().remove(0)).collect();
        assert_eq!(terms, vec![MapSpec::shift(2), MapSpec::shift(2), MapSpec::shift(-4)]);
    }

    #[test]
    fn padded_rotation_prefix_sums() {
        let a = q(159, 257);
        let s = padded_rotation(a).unwrap();
        for j in 1..=10i64 {
            let t = (j * (j + 1) / 2) as u64;
            assert_eq!(s.compose(1, t).unwrap(), vec![MapSpec::rotation(a * Q::from_integer(j))]);
        }
    }

    #[test]
    fn names_round_trip() {
        for e in ExampleId::ALL {
            assert_eq!(e.name().parse::<ExampleId>().unwrap(), e);
        }
        for t in TheoremId::ALL {
            assert_eq!(t.name().parse::<TheoremId>().unwrap(), t);
        }
    }

    #[test]
    fn empty_family_search() {
        let r = search_counterexample(Question::Q1, &[], 10, 8, 1).unwrap();
        assert!(r.candidates.is_empty() && r.evaluated == 0);
        let r = search_counterexample(Question::Q2, &[constant_shift()], 10, 16, 1).unwrap();
        assert!(r.candidates.is_empty());
    }

    #[test]
    fn toy_family_is_deterministic() {
        let a: Vec<String> = toy_family(10).iter().map(|s| s.label().to_string()).collect();
        let b: Vec<String> = toy_family(10).iter().map(|s| s.label().to_string()).collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
    }
}
