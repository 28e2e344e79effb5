//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

mod common;

use std::time::{Duration, Instant};

use ndslab::chain::{verify_chain_theorems, ChainBounds};
use ndslab::gallery::{
    finite_registry, product_cylinder_pair, registry, run_example, verify_theorem, ExampleId, ExampleParams,
    ExampleReport, SuiteBounds, TheoremId,
};
use ndslab::rational::q;
use ndslab::{Certificate, MapSequence, MapSpec, Notion, Space, System, Verdict};
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
    verdicts: Vec<Verdict>,
}

fn outcome(pass: bool, detail: impl Into<String>, verdicts: Vec<Verdict>) -> Outcome {
    Outcome { pass, detail: detail.into(), verdicts }
}

fn row<'a>(r: &'a ExampleReport, system: &str, notion: Notion) -> &'a Verdict {
    let hit = r.rows.iter().find(|x| x.system == system && x.notion == notion.name());
    &hit.unwrap_or_else(|| panic!("no {} row for {system}", notion.name())).verdict
}

fn verdicts_of(r: &ExampleReport) -> Vec<Verdict> {
    r.verdicts().cloned().collect()
}

fn criterion_1() -> Outcome {
    let id = ExampleId::ProductSyndeticWeakmix;
    let r = run_example(id, &ExampleParams::defaults(id)).unwrap();
    let factors_ok = ["alternating-powers", "shifted-alternating-powers"].iter().all(|s| {
        r.rows
            .iter()
            .filter(|x| x.system == *s && x.verdict.parameters["resolution"] == "3")
            .all(|x| x.observed.holds())
    });
    let product = "alternating-powers x shifted-alternating-powers";
    let coarse = r
        .rows
        .iter()
        .find(|x| x.system == product && x.notion == "transitive" && x.verdict.parameters["resolution"] == "1")
        .expect("resolution-1 product row");
    let (u, v) = product_cylinder_pair().unwrap();
    let cert_ok = matches!(&coarse.verdict.certificate,
        Some(Certificate::NoCommonTime { pairs, .. }) if pairs.len() == 1 && pairs[0] == (u.clone(), v.clone()));
    let fine = r.rows.iter().find(|x| x.system == product && x.notion == "transitive" && x.verdict.parameters["resolution"] == "3");
    let fine_fails = fine.is_some_and(|x| x.observed.fails());
    let ids = r.identities.iter().all(|i| i.passed);
    outcome(
        factors_ok && coarse.observed.fails() && cert_ok && fine_fails && ids,
        format!(
            "factors transitive+weak-mixing: {factors_ok}; product transitive fails at res 3: {fine_fails}; \
             certificate {u} -> {v}: {cert_ok}; identities: {ids}"
        ),
        verdicts_of(&r),
    )
}

fn criterion_2() -> Outcome {
    let id = ExampleId::TenBlockThickSyndetic;
    let params = ExampleParams { run_request: 10, ..ExampleParams::defaults(id) };
    let r = run_example(id, &params).unwrap();
    let syndetic = row(&r, "ten-block", Notion::SyndeticTransitive);
    let thick = row(&r, "ten-block", Notion::ThickTransitive);
    let thickly = row(&r, "ten-block", Notion::ThicklySyndeticTransitive);
    let window = match &thickly.certificate {
        Some(Certificate::RunWindow { len, .. }) => *len,
        _ => 0,
    };
    let max_run = match &thick.certificate {
        Some(Certificate::NoRun { max_run, .. }) => format!(", longest observed run {max_run}"),
        _ => String::new(),
    };
    let ids = r.identities.iter().all(|i| i.passed);
    outcome(
        syndetic.status.holds() && thick.status.holds() && thickly.status.fails() && window >= 10 && ids,
        format!(
            "gap_bound {}: syndetic {}; thick@10 {}{max_run}; thickly-syndetic {} (window {window}); identities: {ids}",
            r.derived["gap_bound"], syndetic.status, thick.status, thickly.status
        ),
        verdicts_of(&r),
    )
}

fn criterion_3() -> Outcome {
    let id = ExampleId::PaddedRotation;
    let r = run_example(id, &ExampleParams::defaults(id)).unwrap();
    let s = "padded-rotation-159/257";
    let thick = row(&r, s, Notion::ThickTransitive);
    let weak = row(&r, s, Notion::WeakMixing);
    let arcs = match &weak.certificate {
        Some(Certificate::NoCommonTime { pairs, .. }) => pairs.len() * 2,
        _ => 0,
    };
    outcome(
        thick.status.holds() && weak.status.fails() && arcs == 4,
        format!("thick {}; weak-mixing {} with {arcs} arcs", thick.status, weak.status),
        verdicts_of(&r),
    )
}

fn criterion_4() -> Outcome {
    let reg = registry();
    let bounds = SuiteBounds::default();
    let mut details = Vec::new();
    let mut verdicts = Vec::new();
    let mut pass = reg.len() >= 6;
    for id in TheoremId::ALL {
        let rep = if id == TheoremId::ChainDeltaMixing {
            verify_theorem(id, &finite_registry(), &bounds)
        } else {
            verify_theorem(id, &reg, &bounds)
        }
        .unwrap();
        let flagged = rep.flagged().len();
        pass &= flagged == 0 && !rep.rows.is_empty();
        details.push(format!("{id} {}/{}", rep.rows.len() - flagged, rep.rows.len()));
        for r in rep.flagged() {
            verdicts.extend(r.evidence.iter().cloned());
        }
    }
    outcome(pass, format!("registry {} systems; consistent rows: {}", reg.len(), details.join(", ")), verdicts)
}

fn criterion_5() -> Outcome {
    match common::hierarchy(256) {
        Ok(n) => outcome(true, format!("{n} block-pattern systems, no implication violated"), vec![]),
        Err(e) => outcome(false, e, vec![]),
    }
}

fn criterion_6() -> Outcome {
    let props: [(&str, fn(u32) -> common::Outcome); 9] = [
        ("shift intersect", common::shift_intersect),
        ("shift image/preimage", common::shift_transport),
        ("circle intersect", common::circle_intersect),
        ("circle image/preimage", common::circle_transport),
        ("finite intersect", common::finite_intersect),
        ("finite image/preimage", common::finite_transport),
        ("shift hitting_set", common::shift_hitting),
        ("circle hitting_set", common::circle_hitting),
        ("finite hitting_set", common::finite_hitting),
    ];
    let mut failures = Vec::new();
    for (name, f) in props {
        if let Err(e) = f(1000) {
            failures.push(format!("{name}: {e}"));
        }
    }
    if failures.is_empty() {
        outcome(true, "9 primitive/space families x 1000 cases, zero mismatches", vec![])
    } else {
        outcome(false, failures.join("; "), vec![])
    }
}

/// Every constant or 2-periodic sequence of self-maps of `space`.
fn periodic_systems(space: &Space, tag: &str) -> Vec<System> {
    let n = space.finite_metric().unwrap().len();
    let tables: Vec<Vec<usize>> = (0..n.pow(n as u32))
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let d = c % n;
                    c /= n;
                    d
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for a in &tables {
        out.push(System::new(format!("{tag} {a:?}"), space.clone(), MapSequence::Constant(MapSpec::finite(a.clone()))).unwrap());
        for b in tables.iter().filter(|b| *b != a) {
            let seq = MapSequence::Periodic(vec![MapSpec::finite(a.clone()), MapSpec::finite(b.clone())]);
            out.push(System::new(format!("{tag} {a:?},{b:?}"), space.clone(), seq).unwrap());
        }
    }
    out
}

fn criterion_7() -> Outcome {
    let spaces = [
        (Space::discrete(2).unwrap(), "discrete-2"),
        (Space::discrete(3).unwrap(), "discrete-3"),
        (Space::line(&[0, 1, 3]).unwrap(), "line-0-1-3"),
    ];
    let systems: Vec<System> = spaces.iter().flat_map(|(s, t)| periodic_systems(s, t)).collect();
    let eps_grid = [q(1, 2), q(1, 1), q(2, 1)];
    let deltas = [q(4, 1), q(2, 1), q(1, 1), q(1, 2), q(1, 4)];
    let bounds = ChainBounds { length_bound: 12, m_bound: 2 };
    let results: Vec<(bool, usize, Vec<Verdict>)> = systems
        .par_iter()
        .flat_map_iter(|s| {
            eps_grid.iter().map(move |&eps| {
                let rep = verify_chain_theorems(s, eps, &deltas, bounds).unwrap();
                let live = rep.rows.iter().filter(|r| r.hypotheses_hold).count();
                (rep.flagged(), live, rep.verdicts().into_iter().cloned().collect())
            })
        })
        .collect();
    let flagged = results.iter().filter(|r| r.0).count();
    let live: usize = results.iter().map(|r| r.1).sum();
    outcome(
        flagged == 0,
        format!(
            "{} systems x {} eps values, {live} implication rows with hypotheses holding, {flagged} flagged",
            systems.len(),
            eps_grid.len()
        ),
        results.into_iter().flat_map(|r| r.2).collect(),
    )
}

fn deterministic_json() -> bool {
    let render = || {
        let mut out = String::new();
        for id in ExampleId::ALL {
            out += &serde_json::to_string(&run_example(id, &ExampleParams::defaults(id)).unwrap()).unwrap();
        }
        for id in [TheoremId::IterationInvarianceMulti, TheoremId::PeriodicCollapse] {
            out += &serde_json::to_string(&verify_theorem(id, &registry(), &SuiteBounds::default()).unwrap()).unwrap();
        }
        out
    };
    render() == render()
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 7] = [
        ("product example", criterion_1, Duration::from_secs(10)),
        ("ten-block example", criterion_2, Duration::from_secs(30)),
        ("padded rotation", criterion_3, Duration::from_secs(10)),
        ("theorem echo suites", criterion_4, Duration::from_secs(120)),
        ("hierarchy invariants", criterion_5, Duration::from_secs(600)),
        ("oracle equivalence", criterion_6, Duration::from_secs(600)),
        ("chain/shadowing consistency", criterion_7, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    let mut emitted = Vec::new();
    for (k, (name, f, budget)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let o = f();
        let took = t.elapsed();
        let pass = o.pass && took <= budget;
        failed += usize::from(!pass);
        println!(
            "criterion {} ({name}): {} [{:.2}s / {}s] {}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            o.detail
        );
        emitted.extend(o.verdicts);
    }

    let failing: Vec<&Verdict> = emitted.iter().flat_map(|v| v.failing_leaves()).collect();
    let replayed = emitted.iter().all(|v| v.replay().unwrap_or(false));
    let stable = deterministic_json();
    let pass = replayed && stable;
    failed += usize::from(!pass);
    println!(
        "criterion 8 (determinism and replay): {} {} failing certificates replayed: {replayed}; JSON byte-identical across runs: {stable}",
        if pass { "PASS" } else { "FAIL" },
        failing.len()
    );
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
