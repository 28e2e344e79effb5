//! δ-chains and shadowing for periodic systems on finite spaces.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{invalid, unsupported, Error, Result};
use crate::map::MapSpec;
use crate::rational::{fmt_q, Q};
use crate::space::{OpenSet, Point};
use crate::system::{OpenBox, System};
use crate::verdict::{Certificate, Status, Verdict};

pub const DEFAULT_STATE_CAP: u128 = 1_000_000;

/// Layer `t` has an edge `x → y` iff `d(f_{t+1}(x), y) < δ`; adjacency is
/// stored as bit masks.
#[derive(Clone, Debug)]
pub struct ChainGraph {
    pub points: usize,
    pub period: usize,
    pub delta: Q,
    pub layers: Vec<Vec<u64>>,
}

struct FiniteView {
    dist: Vec<Vec<Q>>,
    /// `maps[t][x] = f_{t+1}(x)` for `t < period`.
    maps: Vec<Vec<usize>>,
}

fn table(m: &MapSpec, n: usize) -> Result<Vec<usize>> {
    (0..n)
        .map(|x| match m.apply(&Point::Finite(x))? {
            Point::Finite(y) => Ok(y),
            other => invalid(format!("finite map produced {other}")),
        })
        .collect()
}

fn view(sys: &System) -> Result<FiniteView> {
    let Some(seq) = sys.sequence() else {
        return unsupported("chain checks need a single-factor base system");
    };
    let Some(period) = seq.declared_period() else {
        return unsupported("chain checks need a periodic sequence");
    };
    let space = &sys.spaces()[0];
    let Some(metric) = space.finite_metric() else {
        return unsupported("chain checks need a finite space");
    };
    let n = metric.len();
    let dist = (0..n).map(|x| (0..n).map(|y| metric.distance(x, y)).collect()).collect();
    let maps = (1..=period).map(|t| table(&sys.map_at(t)?[0], n)).collect::<Result<_>>()?;
    Ok(FiniteView { dist, maps })
}

impl ChainGraph {
    pub fn new(sys: &System, delta: Q) -> Result<ChainGraph> {
        if delta <= Q::from_integer(0) {
            return invalid("delta must be positive");
        }
        let v = view(sys)?;
        let n = v.dist.len();
        let layers = v
            .maps
            .iter()
            .map(|m| {
                (0..n)
                    .map(|x| (0..n).filter(|&y| v.dist[m[x]][y] < delta).fold(0u64, |acc, y| acc | 1 << y))
                    .collect()
            })
            .collect();
        Ok(ChainGraph { points: n, period: v.maps.len(), delta, layers })
    }

    fn step(&self, layer: usize, set: u64) -> u64 {
        let mut out = 0;
        for x in 0..self.points {
            if set >> x & 1 == 1 {
                out |= self.layers[layer][x];
            }
        }
        out
    }

    /// Reachable sets `S_n` from `x` until `(n mod period, S_n)` repeats.
    pub fn profile(&self, x: usize) -> LengthProfile {
        let mut sets = vec![1u64 << x];
        let mut seen: HashMap<(usize, u64), usize> = HashMap::new();
        seen.insert((0, sets[0]), 0);
        loop {
            let n = sets.len();
            let next = self.step((n - 1) % self.period, sets[n - 1]);
            if let Some(&first) = seen.get(&(n % self.period, next)) {
                return LengthProfile { sets, preperiod: first, cycle: n - first };
            }
            seen.insert((n % self.period, next), n);
            sets.push(next);
        }
    }
}

/// Eventually periodic description of `n ↦ S_n`.
#[derive(Clone, Debug)]
pub struct LengthProfile {
    sets: Vec<u64>,
    pub preperiod: usize,
    pub cycle: usize,
}

impl LengthProfile {
    pub fn reachable(&self, n: u64) -> u64 {
        let n = n as usize;
        if n < self.sets.len() {
            self.sets[n]
        } else {
            self.sets[self.preperiod + (n - self.preperiod) % self.cycle]
        }
    }

    /// Lengths past this bound add no new behavior.
    pub fn horizon(&self) -> u64 {
        self.sets.len() as u64
    }
}

/// Lengths `1 <= n <= length_bound` of δ-chains from `x` to `y`.
pub fn chain_reachable_lengths(g: &ChainGraph, x: usize, y: usize, length_bound: u64) -> Result<Vec<u64>> {
    if x >= g.points || y >= g.points {
        return invalid("point outside the space");
    }
    let p = g.profile(x);
    Ok((1..=length_bound).filter(|&n| p.reachable(n) >> y & 1 == 1).collect())
}

pub fn reachable_lengths(sys: &System, delta: Q, x: usize, y: usize, length_bound: u64) -> Result<Vec<u64>> {
    chain_reachable_lengths(&ChainGraph::new(sys, delta)?, x, y, length_bound)
}

fn chain_verdict(name: &str, sys: &System, delta: Q, length_bound: u64) -> Verdict {
    Verdict::new(name, sys).param("delta", fmt_q(&delta)).param("length_bound", length_bound)
}

pub fn check_chain_transitive(sys: &System, delta: Q, length_bound: u64) -> Result<Verdict> {
    let g = ChainGraph::new(sys, delta)?;
    let mut v = chain_verdict("chain-transitive", sys, delta, length_bound);
    let mut exact = true;
    for x in 0..g.points {
        let p = g.profile(x);
        exact &= p.horizon() <= length_bound + 1;
        for y in 0..g.points {
            match (1..=length_bound).find(|&n| p.reachable(n) >> y & 1 == 1) {
                Some(n) => v.witnesses.push(n),
                None => {
                    let v = v.fail(Certificate::ChainUnreachable { x, y, delta, length_bound });
                    return Ok(if exact_unreachable(&p, y) { v.note("exact: no chain of any length") } else { v });
                }
            }
        }
    }
    Ok(if exact { v.note("exact: the length bound covers a full period of every reachable-set sequence") } else { v })
}

fn exact_unreachable(p: &LengthProfile, y: usize) -> bool {
    (1..p.horizon() + p.cycle as u64).all(|n| p.reachable(n) >> y & 1 == 0)
}

/// Holds iff some `N <= n_bound` has every length in `[N, length_bound]`
/// realized for every pair.
pub fn check_chain_mixing(sys: &System, delta: Q, n_bound: u64, length_bound: u64) -> Result<Verdict> {
    let g = ChainGraph::new(sys, delta)?;
    let mut v = chain_verdict("chain-mixing", sys, delta, length_bound).param("n_bound", n_bound);
    let mut exact = true;
    for x in 0..g.points {
        let p = g.profile(x);
        exact &= p.horizon() <= length_bound + 1;
        for y in 0..g.points {
            let last_missing = (1..=length_bound).rev().find(|&n| p.reachable(n) >> y & 1 == 0).unwrap_or(0);
            if last_missing >= n_bound {
                return Ok(v.fail(Certificate::ChainLengthMissing { x, y, delta, length: last_missing, n_bound }));
            }
            v.witnesses.push(last_missing + 1);
        }
    }
    Ok(if exact { v.note("exact: the length bound covers a full period of every reachable-set sequence") } else { v })
}

/// `d(f_{i+1}(x_i), x_{i+1}) < δ` for every step.
pub fn is_pseudo_orbit(sys: &System, delta: Q, pts: &[usize]) -> Result<bool> {
    let v = view(sys)?;
    let n = v.dist.len();
    if pts.is_empty() || pts.iter().any(|&p| p >= n) {
        return Ok(false);
    }
    Ok(pts.windows(2).enumerate().all(|(i, w)| v.dist[v.maps[i % v.maps.len()][w[0]]][w[1]] < delta))
}

/// Some `z` has `d(f_1^i(z), x_i) < ε` for every `i`.
pub fn is_shadowed(sys: &System, eps: Q, pts: &[usize]) -> Result<bool> {
    let v = view(sys)?;
    let n = v.dist.len();
    'z: for z in 0..n {
        let mut cur = z;
        for (i, &x) in pts.iter().enumerate() {
            if i > 0 {
                cur = v.maps[(i - 1) % v.maps.len()][cur];
            }
            if v.dist[cur][x] >= eps {
                continue 'z;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

/// Shortest δ-pseudo-orbit of length `<= length_bound` that no point
/// ε-traces, found by breadth-first search over `(i, x_i, tracking starts)`.
pub fn shadowing_counterexample(
    sys: &System,
    delta: Q,
    eps: Q,
    length_bound: u64,
    state_cap: u128,
) -> Result<Option<Vec<usize>>> {
    let v = view(sys)?;
    let n = v.dist.len();
    let k = v.maps.len();
    // orbit[i][z] = f_1^i(z) for i < k; f_1^{i} repeats with period k in the
    // position map only through the layer index, so track positions per state.
    let near = |a: usize, b: usize, r: Q| v.dist[a][b] < r;
    #[derive(Clone)]
    struct State {
        x: usize,
        starts: u64,
        pos: Vec<usize>,
        parent: usize,
    }
    let mut states: Vec<State> = Vec::new();
    let mut frontier = Vec::new();
    for x in 0..n {
        let starts = (0..n).filter(|&z| near(z, x, eps)).fold(0u64, |a, z| a | 1 << z);
        states.push(State { x, starts, pos: (0..n).collect(), parent: usize::MAX });
        if starts == 0 {
            return Ok(Some(vec![x]));
        }
        frontier.push(states.len() - 1);
    }
    for i in 0..length_bound as usize {
        let mut seen: HashMap<(usize, u64, Vec<usize>), ()> = HashMap::new();
        let mut next = Vec::new();
        for &s in &frontier {
            let st = states[s].clone();
            let image = v.maps[i % k][st.x];
            let pos: Vec<usize> = st.pos.iter().map(|&p| v.maps[i % k][p]).collect();
            for y in 0..n {
                if !near(image, y, delta) {
                    continue;
                }
                let starts = (0..n)
                    .filter(|&z| st.starts >> z & 1 == 1 && near(pos[z], y, eps))
                    .fold(0u64, |a, z| a | 1 << z);
                states.push(State { x: y, starts, pos: pos.clone(), parent: s });
                let id = states.len() - 1;
                if starts == 0 {
                    let mut path = Vec::new();
                    let mut cur = id;
                    while cur != usize::MAX {
                        path.push(states[cur].x);
                        cur = states[cur].parent;
                    }
                    path.reverse();
                    return Ok(Some(path));
                }
                if seen.insert((y, starts, pos.clone()), ()).is_none() {
                    next.push(id);
                }
                if states.len() as u128 > state_cap {
                    return Err(Error::ResourceLimit { count: states.len() as u128, cap: state_cap });
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}

/// Holds with the largest candidate δ whose pseudo-orbits (length
/// `<= length_bound`) are all ε-traced from time 1.
pub fn check_shadowing(sys: &System, eps: Q, delta_candidates: &[Q], length_bound: u64) -> Result<Verdict> {
    if delta_candidates.is_empty() {
        return invalid("at least one delta candidate is needed");
    }
    let mut sorted = delta_candidates.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    let mut v = Verdict::new("shadowing", sys)
        .param("eps", fmt_q(&eps))
        .param("length_bound", length_bound)
        .note("interpretation: a pseudo-orbit x_0..x_n is traced by z when d(f_1^i(z), x_i) < eps for all i");
    let mut last = None;
    for &d in &sorted {
        match shadowing_counterexample(sys, d, eps, length_bound, DEFAULT_STATE_CAP)? {
            None => {
                v.parameters.insert("delta".into(), fmt_q(&d));
                return Ok(v);
            }
            Some(p) => last = Some((d, p)),
        }
    }
    let (delta, pseudo_orbit) = last.expect("candidates are non-empty");
    v.parameters.insert("delta".into(), fmt_q(&delta));
    Ok(v.fail(Certificate::Unshadowed { pseudo_orbit, delta, eps }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Consistency {
    Consistent,
    Flagged,
}

#[derive(Clone, Debug, Serialize)]
pub struct ImplicationRow {
    pub implication: String,
    pub hypotheses_hold: bool,
    pub conclusion: Status,
    pub outcome: Consistency,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainTheoremReport {
    pub system: String,
    pub shadowing: Verdict,
    pub chain_transitive: Option<Verdict>,
    pub chain_mixing: Option<Verdict>,
    pub transitive: Verdict,
    pub delta_mixing: Verdict,
    pub rows: Vec<ImplicationRow>,
}

impl ChainTheoremReport {
    pub fn flagged(&self) -> bool {
        self.rows.iter().any(|r| r.outcome == Consistency::Flagged)
    }

    pub fn verdicts(&self) -> Vec<&Verdict> {
        let mut out = vec![&self.shadowing, &self.transitive, &self.delta_mixing];
        out.extend(self.chain_transitive.iter());
        out.extend(self.chain_mixing.iter());
        out
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ChainBounds {
    pub length_bound: u64,
    pub m_bound: u64,
}

/// Runs chain mixing + shadowing ⇒ Δ-mixing and chain transitive +
/// shadowing ⇒ transitive on `ε`-balls. Δ-mixing uses the index set
/// `[L/m - k + 1, L/m]`, which always contains a multiple of the period `k`.
pub fn verify_chain_theorems(sys: &System, eps: Q, delta_candidates: &[Q], bounds: ChainBounds) -> Result<ChainTheoremReport> {
    let ChainBounds { length_bound, m_bound } = bounds;
    if m_bound == 0 {
        return invalid("m_bound must be >= 1");
    }
    let k = view(sys)?.maps.len() as u64;
    let top = length_bound / m_bound;
    if top < k {
        return invalid(format!("length bound {length_bound} is too short for m = {m_bound} and period {k}"));
    }
    let n_bound = top - k + 1;
    let shadowing = check_shadowing(sys, eps, delta_candidates, length_bound)?;
    let (chain_transitive, chain_mixing) = if shadowing.status.holds() {
        let d = crate::rational::parse_q(&shadowing.parameters["delta"]).expect("delta was formatted by fmt_q");
        (
            Some(check_chain_transitive(sys, d, length_bound)?),
            Some(check_chain_mixing(sys, d, n_bound, length_bound)?),
        )
    } else {
        (None, None)
    };

    let space = &sys.spaces()[0];
    let n = space.finite_metric().map(|f| f.len()).unwrap_or(0);
    let balls: Vec<OpenBox> =
        (0..n).map(|x| OpenSet::ball(space, x, eps).map(OpenBox::single)).collect::<Result<_>>()?;
    let label = |name: &str| Verdict::new(name, sys).param("eps", fmt_q(&eps)).param("horizon", length_bound);
    let transitive = crate::properties::transitive_on(sys, &balls, length_bound, label("transitive-on-eps-balls"))?;
    let times: Vec<u64> = (n_bound..=top).collect();
    let delta_mixing = crate::properties::delta_search_on(
        sys,
        &balls,
        m_bound,
        &times,
        crate::properties::DEFAULT_TUPLE_CAP,
        label("delta-mixing-on-eps-balls").param("m_bound", m_bound).param("index_set", format!("[{n_bound}, {top}]")),
    )?;

    let holds = |v: &Option<Verdict>| v.as_ref().is_some_and(|v| v.status.holds());
    let row = |name: &str, hyp: bool, concl: &Verdict| ImplicationRow {
        implication: name.to_string(),
        hypotheses_hold: hyp,
        conclusion: concl.status,
        outcome: if hyp && concl.status.fails() { Consistency::Flagged } else { Consistency::Consistent },
    };
    let rows = vec![
        row("chain mixing + shadowing => delta-mixing", holds(&chain_mixing), &delta_mixing),
        row("chain transitive + shadowing => transitive", holds(&chain_transitive), &transitive),
    ];
    Ok(ChainTheoremReport {
        system: sys.label().to_string(),
        shadowing,
        chain_transitive,
        chain_mixing,
        transitive,
        delta_mixing,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::space::Space;
    use crate::system::MapSequence;

    fn two_point(seq: MapSequence) -> System {
        System::new("two", Space::discrete(2).unwrap(), seq).unwrap()
    }

    fn swap() -> System {
        two_point(MapSequence::Constant(MapSpec::finite(vec![1, 0])))
    }

    #[test]
    fn swap_lengths_have_parity() {
        let g = ChainGraph::new(&swap(), q(1, 2)).unwrap();
        assert_eq!(chain_reachable_lengths(&g, 0, 1, 9).unwrap(), vec![1, 3, 5, 7, 9]);
        assert_eq!(chain_reachable_lengths(&g, 0, 0, 6).unwrap(), vec![2, 4, 6]);
        let big = ChainGraph::new(&swap(), q(2, 1)).unwrap();
        assert_eq!(chain_reachable_lengths(&big, 0, 0, 4).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn swap_chain_verdicts() {
        let s = swap();
        assert!(check_chain_transitive(&s, q(1, 2), 10).unwrap().status.holds());
        let m = check_chain_mixing(&s, q(1, 2), 5, 20).unwrap();
        assert!(m.status.fails() && m.replay().unwrap());
    }

    #[test]
    fn three_cycle_multiples_of_three() {
        let s = System::new("c3", Space::discrete(3).unwrap(), MapSequence::Constant(MapSpec::finite(vec![1, 2, 0])))
            .unwrap();
        assert_eq!(reachable_lengths(&s, q(1, 2), 0, 0, 9).unwrap(), vec![3, 6, 9]);
        assert!(check_chain_mixing(&s, q(1, 2), 4, 30).unwrap().status.fails());
    }

    #[test]
    fn shadowing_examples() {
        let s = swap();
        // Small delta: pseudo-orbits are true orbits.
        assert!(check_shadowing(&s, q(1, 2), &[q(1, 2)], 6).unwrap().status.holds());
        // Large eps: everything is traced.
        assert!(check_shadowing(&s, q(2, 1), &[q(2, 1)], 6).unwrap().status.holds());
        let v = check_shadowing(&s, q(1, 2), &[q(2, 1)], 6).unwrap();
        assert!(v.status.fails() && v.replay().unwrap());
        let Some(Certificate::Unshadowed { pseudo_orbit, .. }) = &v.certificate else { panic!() };
        assert_eq!(pseudo_orbit.len(), 2);
    }

    #[test]
    fn theorems_on_small_systems() {
        let b = ChainBounds { length_bound: 8, m_bound: 2 };
        let full = Space::finite(vec!["a".into(), "b".into()], vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]).unwrap();
        let id = System::new("id", full, MapSequence::Constant(MapSpec::Identity)).unwrap();
        let r = verify_chain_theorems(&id, q(1, 2), &[q(1, 2)], b).unwrap();
        assert!(!r.flagged());
        assert!(r.chain_transitive.as_ref().unwrap().status.fails());
        let r = verify_chain_theorems(&swap(), q(1, 2), &[q(1, 2)], b).unwrap();
        assert!(!r.flagged());
        assert!(r.chain_mixing.as_ref().unwrap().status.fails());
    }

    #[test]
    fn rejects_non_finite_or_aperiodic() {
        let s = System::new("s", Space::shift(2).unwrap(), MapSequence::Constant(MapSpec::shift(1))).unwrap();
        assert!(matches!(ChainGraph::new(&s, q(1, 2)), Err(Error::Unsupported(_))));
    }
}
