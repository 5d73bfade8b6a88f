use crate::bounds::optimal_download_cost;
use crate::cache::{encode_cache, retrieve_variant, LocalDatabases};
use crate::scheme::Variant;
use crate::{MessageStore, Rational, Result, SchemeParams, SeededRandomness};

/// Outcome of repeated retrievals against random stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrectnessReport {
    pub retrievals: usize,
    /// Retrievals that decoded something other than the stored message.
    pub failures: usize,
    /// Retrievals whose download differed from `L · D*(S)/L`.
    pub cost_mismatches: usize,
}

impl CorrectnessReport {
    pub fn passes(&self) -> bool {
        self.retrievals > 0 && self.failures == 0 && self.cost_mismatches == 0
    }
}

/// Retrieves every message `trials_per_theta` times, each time from a fresh
/// random store and with fresh private randomness.
pub fn correctness_audit(
    params: &SchemeParams,
    trials_per_theta: usize,
    rng: &mut SeededRandomness,
    variant: Variant,
) -> Result<CorrectnessReport> {
    let expected = optimal_download_cost(params.num_databases(), params.num_messages(), params.storage())?
        * Rational::from(params.message_len());
    let mut report = CorrectnessReport { retrievals: 0, failures: 0, cost_mismatches: 0 };
    for trial in 0..trials_per_theta {
        let store = MessageStore::random(params, rng);
        let cache = encode_cache(&store, params)?;
        for desired in 0..params.num_messages() {
            let mut private = rng.derive((trial * params.num_messages() + desired) as u64);
            let mut dbs = LocalDatabases::new(&store, params.num_databases());
            let (message, cost) = retrieve_variant(desired, params, &cache, &mut dbs, &mut private, variant)?;
            report.retrievals += 1;
            if message != *store.message(desired) {
                report.failures += 1;
            }
            if Rational::from(cost.downloaded_symbols) != expected {
                report.cost_mismatches += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faithful_scheme_is_correct() {
        for (n, k, p, q) in [(2, 2, 0, 1), (2, 2, 1, 2), (3, 2, 1, 3), (2, 3, 2, 3), (1, 2, 0, 1), (2, 2, 1, 1)] {
            let params = SchemeParams::new(n, k, p, q, 1).unwrap();
            let r = correctness_audit(&params, 20, &mut SeededRandomness::new(5), Variant::Faithful).unwrap();
            assert_eq!(r.retrievals, 20 * k);
            assert!(r.passes(), "{n} {k} {p}/{q}: {r:?}");
        }
    }

    #[test]
    fn shared_counter_breaks_decoding() {
        let params = SchemeParams::new(2, 3, 0, 1, 1).unwrap();
        let r = correctness_audit(&params, 5, &mut SeededRandomness::new(1), Variant::SharedFreshCounter);
        // the plan fails validation or decodes the wrong symbols
        assert!(r.map(|r| !r.passes()).unwrap_or(true));
    }
}
