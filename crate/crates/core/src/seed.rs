//! Deterministic derivation of per-work-item RNG seeds.
//!
//! Every random stream in the crate is seeded through [`derive_seed`] from a
//! single user-supplied 64-bit base seed. The derivation mixes the base with
//! the repetition index, the measurement budget M of the work item, and a
//! purpose tag, so that
//!
//! - distinct work items get statistically independent streams,
//! - extending a sweep grid with new M values never perturbs the streams of
//!   already-computed points, and
//! - serial and parallel execution see identical streams.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// What a derived stream is used for; keeps unrelated streams decorrelated
/// even when `(rep, m)` coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// Drawing the random PI perturbation of a repetition.
    Perturbation,
    /// Multinomial sampling of a counts dataset.
    Sampling,
    /// Per-point sub-seed of a scaling run (one sweep per N or q value).
    ScalingPoint,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Perturbation => 1,
            Purpose::Sampling => 2,
            Purpose::ScalingPoint => 3,
        }
    }
}

/// SplitMix64 finalizer; full-avalanche 64-bit mixing.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed for one work item: the base seed is chained through the
/// purpose tag, the repetition index, and the M value (not the grid index).
pub fn derive_seed(base: u64, rep: u64, m: u64, purpose: Purpose) -> u64 {
    let mut h = base;
    for v in [purpose.tag(), rep, m] {
        h = mix(h ^ v.wrapping_mul(GOLDEN));
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_inputs_give_distinct_seeds() {
        let mut seen = std::collections::HashSet::new();
        for rep in 0..50u64 {
            for m in [21u64, 42, 84, 168] {
                for p in [Purpose::Perturbation, Purpose::Sampling] {
                    assert!(seen.insert(derive_seed(7, rep, m, p)));
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            derive_seed(123, 4, 210, Purpose::Sampling),
            derive_seed(123, 4, 210, Purpose::Sampling)
        );
    }

    #[test]
    fn independent_of_grid_position() {
        // Seeds depend on the M value itself, so inserting grid points
        // elsewhere cannot change this stream.
        let s = derive_seed(9, 0, 840, Purpose::Sampling);
        assert_eq!(s, derive_seed(9, 0, 840, Purpose::Sampling));
        assert_ne!(s, derive_seed(9, 0, 841, Purpose::Sampling));
        assert_ne!(s, derive_seed(9, 1, 840, Purpose::Sampling));
    }
}
