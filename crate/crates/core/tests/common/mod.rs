//! Shared property bodies and brute-force oracles: assignment enumeration
//! for shift cylinders, grid sampling for arcs, exhaustive point maps for
//! finite spaces.
#![allow(dead_code)]

use std::collections::BTreeSet;

use ndslab::properties::check;
use ndslab::rational::{frac, q};
use ndslab::{
    hitting_set, BlockRule, CheckSpec, Cylinder, MapSequence, MapSpec, Notion, OpenBox, OpenSet, Point, ShiftPoint,
    Space, System, Q,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Outcome = std::result::Result<u32, String>;

/// Runs `test` on `cases` deterministic draws from `strategy`.
pub fn run<S>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map(|_| cases).map_err(|e| e.to_string())
}

type Cyl = Vec<(i64, u8)>;

fn cyl(offset: i64, word: &[u8]) -> Cyl {
    word.iter().enumerate().map(|(k, &s)| (offset + k as i64, s)).collect()
}

fn shift_set(cs: &[Cyl]) -> OpenSet {
    let space = Space::Shift { alphabet: 2 };
    let cyls = cs
        .iter()
        .map(|c| {
            let lo = c.iter().map(|p| p.0).min().unwrap_or(0);
            let mut word = vec![0u8; c.len()];
            for &(i, s) in c {
                word[(i - lo) as usize] = s;
            }
            Cylinder::new(lo, &word)
        })
        .collect();
    OpenSet::from_cylinders(&space, cyls)
}

fn sat(cs: &[Cyl], x: &dyn Fn(i64) -> u8) -> bool {
    cs.iter().any(|c| c.iter().all(|&(i, s)| x(i) == s))
}

fn coords(sets: &[&[Cyl]]) -> Vec<i64> {
    let mut out = BTreeSet::new();
    for s in sets {
        for c in s.iter() {
            out.extend(c.iter().map(|p| p.0));
        }
    }
    out.into_iter().collect()
}

fn lib_coords(set: &OpenSet) -> Vec<Cyl> {
    set.cylinders().iter().map(|c| c.constraints().to_vec()).collect()
}

/// Calls `f` on every assignment of `window`, as a coordinate lookup plus
/// the matching shift point (zero outside the window); stops at the first
/// `false`.
fn for_each_assignment(window: &[i64], mut f: impl FnMut(&dyn Fn(i64) -> u8, Point) -> bool) -> bool {
    let lo = window.first().copied().unwrap_or(0);
    let hi = window.last().copied().unwrap_or(0);
    for bits in 0u64..(1 << window.len()) {
        let look = |i: i64| window.iter().position(|&w| w == i).map(|k| (bits >> k & 1) as u8).unwrap_or(0);
        let word: Vec<u8> = (lo..=hi).map(look).collect();
        let p = Point::Shift(ShiftPoint::new(word, lo, 0));
        if !f(&look, p) {
            return false;
        }
    }
    true
}

fn translate(cs: &[Cyl], d: i64) -> Vec<Cyl> {
    cs.iter().map(|c| c.iter().map(|&(i, s)| (i + d, s)).collect()).collect()
}

fn word_strategy(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, 1..=max_len)
}

fn cyl_union(max_len: usize) -> impl Strategy<Value = Vec<Cyl>> {
    prop::collection::vec((-2i64..=2, word_strategy(max_len)).prop_map(|(o, w)| cyl(o, &w)), 1..=2)
}

fn arc_contains(arcs: &[(i64, i64)], d: i64, t: Q) -> bool {
    arcs.iter().any(|&(k, m)| m >= d || frac(t - q(k, d)) < q(m, d))
}

fn arc_set(arcs: &[(i64, i64)], d: i64) -> OpenSet {
    arcs.iter()
        .map(|&(k, m)| OpenSet::arc(q(k, d), q(m, d)).unwrap())
        .reduce(|a, b| a.union(&b).unwrap())
        .unwrap()
}

/// Sampling is exact only when every endpoint lies on the `1/d` grid.
fn on_grid(set: &OpenSet, d: i64) -> bool {
    let dq = Q::from_integer(d);
    set.intervals().iter().all(|iv| (iv.start * dq).is_integer() && (iv.end * dq).is_integer())
}

/// Endpoints and midpoints of the `1/d` grid.
fn grid(d: i64) -> impl Iterator<Item = Q> {
    (0..2 * d).map(move |k| q(k, 2 * d))
}

fn circle_case() -> impl Strategy<Value = (i64, Vec<(i64, i64)>, Vec<(i64, i64)>, i64)> {
    (1i64..=64).prop_flat_map(|d| {
        let arc = (0..d, 1..=d);
        (Just(d), prop::collection::vec(arc.clone(), 1..=2), prop::collection::vec(arc, 1..=2), 0..d)
    })
}

fn finite_case() -> impl Strategy<Value = (usize, Vec<usize>, u64, u64)> {
    (1usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(0..n, n), 0u64..(1 << n), 0u64..(1 << n)))
}

fn finite_set(n: usize, mask: u64) -> OpenSet {
    let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
    OpenSet::points(&Space::discrete(n).unwrap(), &idx).unwrap()
}

fn lib_mask(set: &OpenSet, n: usize) -> u64 {
    (0..n).filter(|&i| set.contains(&Point::Finite(i))).fold(0, |m, i| m | 1 << i)
}

pub fn shift_intersect(cases: u32) -> Outcome {
    run(cases, (cyl_union(4), cyl_union(4)), |(a, b)| {
        let (sa, sb) = (shift_set(&a), shift_set(&b));
        let inter = sa.intersect(&sb).unwrap();
        let window = coords(&[&a, &b, &lib_coords(&inter)]);
        let mut witness = false;
        let agree = for_each_assignment(&window, |x, p| {
            let want = sat(&a, x) && sat(&b, x);
            witness |= want;
            inter.contains(&p) == want
        });
        prop_assert!(agree);
        prop_assert_eq!(inter.is_empty(), !witness);
        prop_assert_eq!(sa.meets(&sb).unwrap(), witness);
        Ok(())
    })
}

pub fn shift_transport(cases: u32) -> Outcome {
    run(cases, (word_strategy(8), -3i64..=3, -3i64..=3), |(w, o, j)| {
        let u = vec![cyl(o, &w)];
        let su = shift_set(&u);
        let m = MapSpec::shift(j);
        let (img, pre) = (su.image(&m).unwrap(), su.preimage(&m).unwrap());
        // x ∈ σ^j(U) iff x_{i-j} = s for every constraint (i, s) of U.
        let (img_oracle, pre_oracle) = (translate(&u, -j), translate(&u, j));
        let window = coords(&[&img_oracle, &pre_oracle, &lib_coords(&img), &lib_coords(&pre)]);
        let agree = for_each_assignment(&window, |x, p| {
            img.contains(&p) == sat(&img_oracle, x) && pre.contains(&p) == sat(&pre_oracle, x)
        });
        prop_assert!(agree);
        Ok(())
    })
}

pub fn circle_intersect(cases: u32) -> Outcome {
    run(cases, circle_case(), |(d, a, b, _)| {
        let (sa, sb) = (arc_set(&a, d), arc_set(&b, d));
        let inter = sa.intersect(&sb).unwrap();
        prop_assert!(on_grid(&inter, d));
        let mut witness = false;
        for t in grid(d) {
            let want = arc_contains(&a, d, t) && arc_contains(&b, d, t);
            witness |= want;
            prop_assert_eq!(inter.contains(&Point::Circle(t)), want);
        }
        prop_assert_eq!(inter.is_empty(), !witness);
        prop_assert_eq!(sa.meets(&sb).unwrap(), witness);
        Ok(())
    })
}

pub fn circle_transport(cases: u32) -> Outcome {
    run(cases, circle_case(), |(d, a, _, r)| {
        let alpha = q(r, d);
        let s = arc_set(&a, d);
        let m = MapSpec::rotation(alpha);
        let (img, pre) = (s.image(&m).unwrap(), s.preimage(&m).unwrap());
        prop_assert!(on_grid(&img, d) && on_grid(&pre, d));
        for t in grid(d) {
            prop_assert_eq!(img.contains(&Point::Circle(t)), arc_contains(&a, d, t - alpha));
            prop_assert_eq!(pre.contains(&Point::Circle(t)), arc_contains(&a, d, t + alpha));
        }
        Ok(())
    })
}

pub fn finite_intersect(cases: u32) -> Outcome {
    run(cases, finite_case(), |(n, _, ma, mb)| {
        let (sa, sb) = (finite_set(n, ma), finite_set(n, mb));
        prop_assert_eq!(lib_mask(&sa.intersect(&sb).unwrap(), n), ma & mb);
        prop_assert_eq!(sa.meets(&sb).unwrap(), ma & mb != 0);
        Ok(())
    })
}

pub fn finite_transport(cases: u32) -> Outcome {
    run(cases, finite_case(), |(n, table, ma, _)| {
        let sa = finite_set(n, ma);
        let m = MapSpec::finite(table.clone());
        let img = (0..n).filter(|&x| ma >> x & 1 == 1).fold(0u64, |acc, x| acc | 1 << table[x]);
        let pre = (0..n).filter(|&x| ma >> table[x] & 1 == 1).fold(0u64, |acc, x| acc | 1 << x);
        prop_assert_eq!(lib_mask(&sa.image(&m).unwrap(), n), img);
        prop_assert_eq!(lib_mask(&sa.preimage(&m).unwrap(), n), pre);
        Ok(())
    })
}

/// Exponents of the first `h` maps of a linear block rule.
fn linear_exponents(prefix: &[i64], template: &[(i64, i64)], h: usize) -> Vec<i64> {
    let mut out = prefix.to_vec();
    let mut b = 1i64;
    while out.len() < h {
        out.extend(template.iter().map(|&(c0, c1)| c0 + c1 * b));
        b += 1;
    }
    out.truncate(h);
    out
}

fn cumulative(exps: &[i64]) -> Vec<i64> {
    exps.iter()
        .scan(0i64, |acc, e| {
            *acc += e;
            Some(*acc)
        })
        .collect()
}

fn rule_strategy() -> impl Strategy<Value = (Vec<i64>, Vec<(i64, i64)>)> {
    (prop::collection::vec(-2i64..=2, 0..=2), prop::collection::vec((-2i64..=2, -1i64..=1), 1..=3))
}

pub fn shift_hitting(cases: u32) -> Outcome {
    let cyl1 = || (-2i64..=2, word_strategy(4)).prop_map(|(o, w)| vec![cyl(o, &w)]);
    run(cases, (rule_strategy(), cyl1(), cyl1(), 1u64..=24), |((prefix, template), u, v, h): (_, Vec<Cyl>, Vec<Cyl>, u64)| {
        let rule = BlockRule::Linear { base: MapSpec::shift(1), prefix: prefix.clone(), template: template.clone() };
        let sys = System::new("oracle", Space::Shift { alphabet: 2 }, MapSequence::Block(rule)).unwrap();
        let got = hitting_set(&sys, &OpenBox::single(shift_set(&u)), &OpenBox::single(shift_set(&v)), h).unwrap();
        let p = cumulative(&linear_exponents(&prefix, &template, h as usize));
        let want: Vec<u64> = (1..=h)
            .filter(|&n| {
                let img = translate(&u, -p[n as usize - 1]);
                let window = coords(&[&img, &v]);
                !for_each_assignment(&window, |x, _| !(sat(&img, x) && sat(&v, x)))
            })
            .collect();
        prop_assert_eq!(got.indices, want);
        Ok(())
    })
}

pub fn circle_hitting(cases: u32) -> Outcome {
    run(cases, (circle_case(), rule_strategy(), 1u64..=24), |((d, a, b, r), (prefix, template), h)| {
        let alpha = q(r, d);
        let rule = BlockRule::Linear { base: MapSpec::rotation(alpha), prefix: prefix.clone(), template: template.clone() };
        let sys = System::new("oracle", Space::Circle, MapSequence::Block(rule)).unwrap();
        let got = hitting_set(&sys, &OpenBox::single(arc_set(&a, d)), &OpenBox::single(arc_set(&b, d)), h).unwrap();
        let p = cumulative(&linear_exponents(&prefix, &template, h as usize));
        let want: Vec<u64> = (1..=h)
            .filter(|&n| {
                let angle = alpha * Q::from_integer(p[n as usize - 1]);
                grid(d).any(|t| arc_contains(&b, d, t) && arc_contains(&a, d, t - angle))
            })
            .collect();
        prop_assert_eq!(got.indices, want);
        Ok(())
    })
}

pub fn finite_hitting(cases: u32) -> Outcome {
    let case = (1usize..=6).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(prop::collection::vec(0..n, n), 1..=3),
            1u64..(1 << n),
            1u64..(1 << n),
            1u64..=24,
        )
    });
    run(cases, case, |(n, tables, ma, mb, h)| {
        let seq = MapSequence::Periodic(tables.iter().cloned().map(MapSpec::finite).collect());
        let sys = System::new("oracle", Space::discrete(n).unwrap(), seq).unwrap();
        let got = hitting_set(&sys, &OpenBox::single(finite_set(n, ma)), &OpenBox::single(finite_set(n, mb)), h).unwrap();
        let mut pts: Vec<usize> = (0..n).filter(|x| ma >> x & 1 == 1).collect();
        let mut want = Vec::new();
        for t in 1..=h {
            let table = &tables[(t as usize - 1) % tables.len()];
            for x in pts.iter_mut() {
                *x = table[*x];
            }
            if pts.iter().any(|&x| mb >> x & 1 == 1) {
                want.push(t);
            }
        }
        prop_assert_eq!(got.indices, want);
        Ok(())
    })
}

fn block_system() -> impl Strategy<Value = (System, usize)> {
    let rule = (prop::collection::vec(-2i64..=2, 0..=2), prop::collection::vec((-2i64..=2, -1i64..=1), 1..=3));
    (rule, prop::option::of((1i64..16, 2i64..=16)), 1usize..=2).prop_map(|((prefix, template), rot, res)| {
        let (space, base) = match rot {
            Some((r, d)) => (Space::Circle, MapSpec::rotation(q(r % d, d))),
            None => (Space::Shift { alphabet: 2 }, MapSpec::shift(1)),
        };
        let label = format!("{base} {prefix:?} {template:?}");
        let sys = System::new(label, space, MapSequence::Block(BlockRule::Linear { base, prefix, template })).unwrap();
        (sys, res)
    })
}

/// Implications between notions at matched parameters; every failing
/// verdict must also replay.
pub fn hierarchy(cases: u32) -> Outcome {
    run(cases, (block_system(), 8u64..=24, 2u64..=6, 1u64..=3), |((sys, res), h, gap, run)| {
        let mut spec = CheckSpec::new(Notion::Transitive, res, h);
        spec.gap_bound = gap;
        spec.run_request = run;
        spec.m_bound = 2;
        spec.max_len = 2;
        spec.max_entry = 2;
        let s = |n: Notion| {
            let v = check(&sys, &spec.with_notion(n), &[]).unwrap();
            assert!(v.replay().unwrap(), "{} certificate does not replay", n.name());
            v.status
        };

        let (mixing, weak, transitive) = (s(Notion::Mixing), s(Notion::WeakMixing), s(Notion::Transitive));
        prop_assert!(!mixing.holds() || weak.holds(), "mixing without weak mixing");
        prop_assert!(!weak.holds() || transitive.holds(), "weak mixing without transitivity");

        if s(Notion::ThicklySyndeticTransitive).holds() {
            prop_assert!(s(Notion::SyndeticTransitive).holds(), "thickly syndetic without syndetic");
            prop_assert!(s(Notion::ThickTransitive).holds(), "thickly syndetic without thick");
        }

        let mut dm = spec.with_notion(Notion::DeltaMixing);
        dm.subset = Some((1..=h / 2).collect());
        if check(&sys, &dm, &[]).unwrap().status.holds() {
            prop_assert!(s(Notion::DeltaTransitive).holds(), "delta-mixing on [1, H/m] without delta-transitivity");
        }

        if s(Notion::StronglyMultiTransitive).holds() {
            prop_assert!(s(Notion::MultiTransitive).holds(), "strong without plain multi-transitivity");
        }
        Ok(())
    })
}
