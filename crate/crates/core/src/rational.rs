//! Exact rational helpers for circle arithmetic.

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};

pub type Q = Rational64;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Reduces an angle into `[0, 1)`.
pub fn frac(x: Q) -> Q {
    let f = x - Q::from_integer(x.floor().to_integer());
    debug_assert!(f >= Q::zero() && f < Q::one());
    f
}

/// Distance on the unit circle: `min(|a-b|, 1-|a-b|)` after reduction mod 1.
pub fn circle_distance(a: Q, b: Q) -> Q {
    let d = frac(a - b);
    let other = Q::one() - d;
    if d < other {
        d
    } else {
        other
    }
}

pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> i64 {
    xs.into_iter().fold(1i64, |acc, x| acc.lcm(x.denom()))
}

/// Parses `"p/q"` or an integer literal.
pub fn parse_q(text: &str) -> Option<Q> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            (d != 0).then(|| Q::new(n, d))
        }
        None => text.parse::<i64>().ok().map(Q::from_integer),
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
