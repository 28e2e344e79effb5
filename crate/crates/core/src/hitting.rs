//! Truncated hitting sets, simultaneous hitting times, Δ-intersections
//! and orbits.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::space::Point;
use crate::system::{OpenBox, System};

#[derive(Clone, Debug, Serialize)]
pub struct HittingSet {
    pub indices: Vec<u64>,
    pub horizon: u64,
    pub pair: (OpenBox, OpenBox),
}

impl HittingSet {
    /// Recomputes membership of every `n <= horizon` and compares.
    pub fn recheck(&self, sys: &System) -> Result<bool> {
        let again = hitting_set(sys, &self.pair.0, &self.pair.1, self.horizon)?;
        Ok(again.indices == self.indices)
    }
}

/// `f_1^n(U) ∩ V ≠ ∅`.
pub fn hits(sys: &System, n: u64, u: &OpenBox, v: &OpenBox) -> Result<bool> {
    let maps = sys.compose(1, n)?;
    u.image(&maps)?.meets(v)
}

/// `N(U, V) ∩ [1, horizon]`.
pub fn hitting_set(sys: &System, u: &OpenBox, v: &OpenBox, horizon: u64) -> Result<HittingSet> {
    check_nonempty(u)?;
    check_nonempty(v)?;
    // Warm the prefix memo once so the parallel pass only reads it.
    sys.compose(1, horizon)?;
    let flags: Vec<bool> = (1..=horizon).into_par_iter().map(|n| hits(sys, n, u, v)).collect::<Result<_>>()?;
    let indices = flags.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64 + 1).collect();
    Ok(HittingSet { indices, horizon, pair: (u.clone(), v.clone()) })
}

/// All `l` with `f_1^{a_i l}(U_i) ∩ V_i ≠ ∅` for every `i`, `l <= horizon / max(a)`.
pub fn multi_hitting(sys: &System, a: &[u64], us: &[OpenBox], vs: &[OpenBox], horizon: u64) -> Result<Vec<u64>> {
    if a.is_empty() || a.len() != us.len() || a.len() != vs.len() {
        return invalid("vector and open-set lists must have the same positive length");
    }
    if a.contains(&0) {
        return invalid("vector entries must be positive");
    }
    let limit = horizon / a.iter().max().copied().unwrap_or(1);
    let mut out = Vec::new();
    'l: for l in 1..=limit {
        for i in 0..a.len() {
            if !hits(sys, a[i] * l, &us[i], &vs[i])? {
                continue 'l;
            }
        }
        out.push(l);
    }
    Ok(out)
}

/// `∩_{i=0}^{m} f_1^{-in}(U_i)`.
pub fn delta_intersection(sys: &System, us: &[OpenBox], n: u64) -> Result<OpenBox> {
    let Some(first) = us.first() else {
        return invalid("delta intersection needs at least one set");
    };
    let mut acc = first.clone();
    for (i, u) in us.iter().enumerate().skip(1) {
        let pre = u.preimage(&sys.compose(1, i as u64 * n)?)?;
        acc = acc.intersect(&pre)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct Orbit {
    pub start: Vec<Point>,
    pub points: Vec<Vec<Point>>,
}

impl Orbit {
    pub fn recheck(&self, sys: &System) -> Result<bool> {
        let again = orbit(sys, &self.start, self.points.len() as u64 - 1)?;
        Ok(again.points == self.points)
    }
}

/// `x, f_1^1(x), ..., f_1^horizon(x)`.
pub fn orbit(sys: &System, x: &[Point], horizon: u64) -> Result<Orbit> {
    if x.len() != sys.dimension() {
        return invalid(format!("point has {} coordinates, system has {}", x.len(), sys.dimension()));
    }
    for (p, s) in x.iter().zip(sys.spaces()) {
        if !s.contains_point(p) {
            return invalid(format!("point {p} is not in {s}"));
        }
    }
    let mut points = Vec::with_capacity(horizon as usize + 1);
    points.push(x.to_vec());
    for n in 1..=horizon {
        let next = sys.step_point(n, &points[n as usize - 1])?;
        points.push(next);
    }
    Ok(Orbit { start: x.to_vec(), points })
}

fn check_nonempty(b: &OpenBox) -> Result<()> {
    if b.is_empty() {
        invalid(format!("open set {b} is empty"))
    } else {
        Ok(())
    }
}
