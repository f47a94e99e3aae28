//! Single-rule conflict resolution for ACT-R mode.

use rand::Rng;

/// A draw from the logistic distribution with location 0 and scale `s`.
pub fn logistic_noise<R: Rng + ?Sized>(rng: &mut R, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    // open interval keeps the log finite
    let u: f64 = rng.gen_range(f64::EPSILON..1.0 - f64::EPSILON);
    s * (u / (1.0 - u)).ln()
}

/// Picks the candidate with the highest noisy utility.
///
/// `candidates` holds `(production name, utility)` in match order. Each
/// candidate gets one noise draw, in order. Ties go to the lexicographically
/// smallest production name, then to the earlier match. Returns `None` when
/// there is nothing to choose from.
pub fn select_actr<R: Rng + ?Sized>(candidates: &[(&str, f64)], noise: f64, rng: &mut R) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (name, utility)) in candidates.iter().enumerate() {
        let score = utility + logistic_noise(rng, noise);
        best = match best {
            None => Some((i, score)),
            Some((j, s)) => {
                let better = score > s || (score == s && *name < candidates[j].0);
                if better {
                    Some((i, score))
                } else {
                    Some((j, s))
                }
            }
        };
    }
    best.map(|(i, _)| i)
}
