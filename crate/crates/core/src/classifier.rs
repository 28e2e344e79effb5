//! Syndetic / thick / thickly syndetic / cofinite classification of
//! truncated integer sets.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::hitting::hitting_set;
use crate::system::{OpenBox, System};
use crate::verdict::Status;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SyndeticRow {
    pub status: Status,
    /// Largest distance between consecutive members, counting `0` and
    /// `range + 1` as members.
    pub max_gap: u64,
    pub gap_bound: u64,
    /// First window `(start, len)` of `[1, range]` missing the set.
    pub empty_window: Option<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThickRow {
    pub status: Status,
    pub max_run: u64,
    pub run_at: Option<u64>,
    pub requested_run: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThicklyRow {
    pub status: Status,
    /// `(l, max_gap)` of `{m : m..=m+l ⊆ A}` on `[1, horizon - l]`.
    pub gaps: Vec<(u64, u64)>,
    /// `(l, start, len)` of the first failing window.
    pub failure: Option<(u64, u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CofiniteRow {
    pub status: Status,
    pub last_missing: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SetClassReport {
    pub horizon: u64,
    pub syndetic: SyndeticRow,
    pub thick: ThickRow,
    pub thickly_syndetic: ThicklyRow,
    pub cofinite: CofiniteRow,
}

fn status(ok: bool) -> Status {
    if ok {
        Status::HoldsUpToHorizon
    } else {
        Status::FailsWithCertificate
    }
}

/// Membership table `mask[n]` for `n` in `0..=horizon` (index 0 unused).
fn mask(a: &[u64], horizon: u64) -> Result<Vec<bool>> {
    let mut m = vec![false; horizon as usize + 1];
    for &n in a {
        if n == 0 || n > horizon {
            return invalid(format!("{n} is outside [1, {horizon}]"));
        }
        m[n as usize] = true;
    }
    Ok(m)
}

/// Gap statistics of the set `member` restricted to `[1, range]`.
pub fn syndetic_on(member: impl Fn(u64) -> bool, range: u64, gap_bound: u64) -> SyndeticRow {
    let mut last = 0u64;
    let mut max_gap = 0u64;
    let mut empty_window = None;
    let width = gap_bound.min(range);
    for n in 1..=range + 1 {
        if n == range + 1 || member(n) {
            let gap = n - last;
            max_gap = max_gap.max(gap);
            // Positions last+1..n-1 are missing; a window of `width` fits if gap > width.
            if empty_window.is_none() && width > 0 && gap > width {
                empty_window = Some((last + 1, width));
            }
            last = n;
        }
    }
    let holds = range > 0 && empty_window.is_none();
    SyndeticRow {
        status: status(holds),
        max_gap,
        gap_bound,
        empty_window: if holds { None } else { empty_window.or(Some((1, width))) },
    }
}

/// Longest run of consecutive members and its start.
pub fn longest_run(a: &[u64]) -> (u64, Option<u64>) {
    let mut best = (0u64, None);
    let mut run = 0u64;
    let mut start = 0u64;
    let mut prev: Option<u64> = None;
    for &n in a {
        if prev == Some(n.wrapping_sub(1)) && n > 0 {
            run += 1;
        } else {
            run = 1;
            start = n;
        }
        if run > best.0 {
            best = (run, Some(start));
        }
        prev = Some(n);
    }
    best
}

/// Classifies `A ⊆ [1, horizon]` (sorted or not).
pub fn classify(a: &[u64], horizon: u64, run_request: u64, gap_bound: u64) -> Result<SetClassReport> {
    if horizon == 0 {
        return invalid("horizon must be >= 1");
    }
    if run_request == 0 || gap_bound == 0 {
        return invalid("run_request and gap_bound must be >= 1");
    }
    let m = mask(a, horizon)?;
    let mut sorted: Vec<u64> = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let syndetic = syndetic_on(|n| m[n as usize], horizon, gap_bound);

    let (max_run, run_at) = longest_run(&sorted);
    let thick = ThickRow {
        status: status(max_run >= run_request),
        max_run,
        run_at,
        requested_run: run_request,
    };

    // run_len[n] = length of the member run starting at n.
    let mut run_len = vec![0u64; horizon as usize + 2];
    for n in (1..=horizon as usize).rev() {
        run_len[n] = if m[n] { run_len[n + 1] + 1 } else { 0 };
    }
    let mut gaps = Vec::new();
    let mut failure = None;
    for l in 0..=run_request {
        let range = horizon.saturating_sub(l);
        let row = syndetic_on(|n| run_len[n as usize] > l, range, gap_bound);
        gaps.push((l, row.max_gap));
        if failure.is_none() && row.status != Status::HoldsUpToHorizon {
            let (start, len) = row.empty_window.unwrap_or((1, 0));
            failure = Some((l, start, len));
        }
    }
    let thickly_syndetic = ThicklyRow { status: status(failure.is_none()), gaps, failure };

    let last_missing = (1..=horizon).rev().find(|&n| !m[n as usize]);
    let cofinite = CofiniteRow { status: status(last_missing.is_none_or(|lm| lm <= horizon / 2)), last_missing };

    Ok(SetClassReport { horizon, syndetic, thick, thickly_syndetic, cofinite })
}

/// `classify` applied to `N(U, V) ∩ [1, horizon]`.
pub fn classify_hitting(
    sys: &System,
    u: &OpenBox,
    v: &OpenBox,
    horizon: u64,
    run_request: u64,
    gap_bound: u64,
) -> Result<SetClassReport> {
    let h = hitting_set(sys, u, v, horizon)?;
    classify(&h.indices, horizon, run_request, gap_bound)
}
