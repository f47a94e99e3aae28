//! Base-level activation: a log-sum of power-decayed access ages.

use crate::data::Ms;

/// Ages below one millisecond are clamped to one millisecond so that an
/// access stamped in the current instant contributes a large but finite term.
pub const MIN_AGE_MS: Ms = 1;

/// `ln(sum_j (now - t_j)^-d)` with ages in seconds.
///
/// Returns negative infinity for an empty history.
pub fn bla(accesses: &[Ms], now: Ms, decay: f64) -> f64 {
    if accesses.is_empty() {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = accesses
        .iter()
        .map(|&t| {
            let age_ms = now.saturating_sub(t).max(MIN_AGE_MS);
            (age_ms as f64 / 1000.0).powf(-decay)
        })
        .sum();
    sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_age_is_zero() {
        assert_eq!(bla(&[1000], 2000, 0.5), 0.0);
    }

    #[test]
    fn two_accesses() {
        let v = bla(&[1000, 2000], 3000, 0.5);
        let oracle = (2f64.powf(-0.5) + 1.0).ln();
        assert!((v - oracle).abs() < 1e-12, "{v}");
        assert!((v - 0.534_80).abs() < 1e-5, "{v}");
    }

    #[test]
    fn empty_history_is_neg_infinity() {
        assert_eq!(bla(&[], 5000, 0.5), f64::NEG_INFINITY);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn more_recent_access_increases_activation(
            mut history in proptest::collection::vec(0u64..100_000, 1..20),
            idx in 0usize..20,
            shift in 1u64..5_000,
        ) {
            let now = 200_000;
            let i = idx % history.len();
            let before = bla(&history, now, 0.5);
            history[i] += shift;
            let after = bla(&history, now, 0.5);
            prop_assert!(after > before);
        }
    }
}
