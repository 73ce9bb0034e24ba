//! Exact rational sort keys for stream and stream-route selection.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Stream, Tick};

pub const DEFAULT_ALPHA: u64 = 10_000;

/// A non-negative rational kept unnormalized; ordering and equality use
/// cross multiplication, so no gcd work is done on the hot path.
#[derive(Debug, Clone, Copy)]
pub struct Score {
    num: i128,
    den: i128,
}

impl Score {
    fn new(num: i128, den: i128) -> Self {
        debug_assert!(den > 0);
        Self { num, den }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num.checked_mul(other.den).expect("score overflow");
        let rhs = other.num.checked_mul(self.den).expect("score overflow");
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Stream sorting score `α·period + α/frame_size + id/α`; smaller sorts
/// first.
pub fn ssf(alpha: u64, stream: &Stream) -> Score {
    let a = i128::from(alpha);
    let p = i128::from(stream.period);
    let f = i128::from(stream.frame_size_bytes);
    let id = i128::from(stream.id.0);
    // common denominator f·α
    Score::new(a * p * f * a + a * a + id * f, f * a)
}

/// Stream-route rating `α/period + 1/(1 + Σ utilization) + id/α`; larger
/// is better. With `R` reserved ticks summed over the route links and
/// hyper period `h`, the middle term is `h / (h + R)`.
pub fn crf(alpha: u64, stream: &Stream, route_reserved: Tick, hyper_period: Tick) -> Score {
    let a = i128::from(alpha);
    let p = i128::from(stream.period);
    let h = i128::from(hyper_period);
    let hr = h + i128::from(route_reserved);
    let id = i128::from(stream.id.0);
    // common denominator p·(h+R)·α
    Score::new(a * hr * a + h * p * a + id * p * hr, p * hr * a)
}

/// Preconditions for the stream sorting score: α must exceed the largest
/// frame size and the largest id.
pub fn check_ssf_alpha<'a>(
    alpha: u64,
    streams: impl IntoIterator<Item = &'a Stream>,
) -> Result<()> {
    for s in streams {
        if u64::from(s.frame_size_bytes) >= alpha {
            return Err(Error::AlphaBound {
                alpha,
                reason: format!(
                    "frame size {} of {} is not below alpha",
                    s.frame_size_bytes, s.id
                ),
            });
        }
        if u64::from(s.id.0) >= alpha {
            return Err(Error::AlphaBound {
                alpha,
                reason: format!("id {} is not below alpha", s.id),
            });
        }
    }
    Ok(())
}

/// Preconditions for the stream-route rating: α > 2h, α ≥ max id and
/// α ≥ (longest candidate route)².
pub fn check_crf_alpha<'a>(
    alpha: u64,
    hyper_period: Tick,
    streams: impl IntoIterator<Item = &'a Stream>,
    max_route_len: usize,
) -> Result<()> {
    if alpha <= 2 * hyper_period {
        return Err(Error::AlphaBound {
            alpha,
            reason: format!("must be larger than twice the hyper period {hyper_period}"),
        });
    }
    let route_sq = (max_route_len as u64).pow(2);
    if alpha < route_sq {
        return Err(Error::AlphaBound {
            alpha,
            reason: format!("smaller than squared route length {route_sq}"),
        });
    }
    for s in streams {
        if u64::from(s.id.0) > alpha {
            return Err(Error::AlphaBound {
                alpha,
                reason: format!("id {} exceeds alpha", s.id),
            });
        }
    }
    Ok(())
}

/// Smallest power of ten at or above [`DEFAULT_ALPHA`] satisfying both
/// score preconditions for the given instance.
pub fn alpha_for(max_id: u32, max_frame: u32, hyper_period: Tick, max_route_len: usize) -> u64 {
    let need = [
        u64::from(max_id) + 1,
        u64::from(max_frame) + 1,
        2 * hyper_period + 1,
        (max_route_len as u64).pow(2),
    ]
    .into_iter()
    .max()
    .unwrap_or(0);
    let mut alpha = DEFAULT_ALPHA;
    while alpha < need {
        alpha *= 10;
    }
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NodeId, StreamId};
    use num_rational::Ratio;

    fn s(id: u32, frame: u32, period: Tick) -> Stream {
        Stream::new(StreamId(id), NodeId(0), NodeId(1), frame, period)
    }

    fn exact(score: Score) -> Ratio<i128> {
        Ratio::new(score.numer(), score.denom())
    }

    #[test]
    fn ssf_matches_formula() {
        let st = s(7, 500, 250);
        let want =
            Ratio::from_integer(10_000 * 250) + Ratio::new(10_000, 500) + Ratio::new(7, 10_000);
        assert_eq!(exact(ssf(10_000, &st)), want);
    }

    #[test]
    fn crf_matches_formula() {
        let st = s(3, 500, 500);
        // 600 reserved ticks over a 2000-tick hyper period: Σ util = 0.3
        let want = Ratio::new(10_000, 500) + Ratio::new(10, 13) + Ratio::new(3, 10_000);
        assert_eq!(exact(crf(10_000, &st, 600, 2000)), want);
    }

    #[test]
    fn alpha_bounds() {
        let streams = [s(0, 1500, 250), s(9_999, 125, 2000)];
        assert!(check_ssf_alpha(10_000, &streams).is_ok());
        assert!(check_ssf_alpha(1_500, &streams).is_err());
        assert!(check_crf_alpha(10_000, 2000, &streams, 10).is_ok());
        assert!(check_crf_alpha(4_000, 2000, &streams, 10).is_err());
        assert!(check_crf_alpha(10_000, 5000, &streams, 10).is_err());
        assert!(check_crf_alpha(10_000, 2000, &streams, 101).is_err());
        assert!(check_crf_alpha(10_000, 2000, &[s(10_001, 125, 250)], 4).is_err());
        assert_eq!(alpha_for(11_499, 1500, 2000, 8), 100_000);
        assert_eq!(alpha_for(2_499, 1500, 2000, 8), 10_000);
    }
}
