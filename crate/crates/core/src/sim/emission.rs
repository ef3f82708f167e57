use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::{positive, ConfigError, EmitterParams};

/// Emission times of one emitter, generated lazily.
///
/// The emitter starts in the ground state at `t = 0`; each cycle waits an
/// exponential pump time and then an exponential decay time.
#[derive(Debug, Clone)]
pub struct EmissionIter {
    rng: ChaCha8Rng,
    pump_rate: f64,
    decay_rate: f64,
    t: f64,
    end: f64,
}

impl EmissionIter {
    pub fn new(emitter: &EmitterParams, duration_ns: f64, seed: u64) -> Result<Self, ConfigError> {
        emitter.validate()?;
        positive("duration_ns", duration_ns)?;
        Ok(Self::with_rng(emitter, duration_ns, ChaCha8Rng::seed_from_u64(seed)))
    }

    pub(crate) fn with_rng(emitter: &EmitterParams, duration_ns: f64, rng: ChaCha8Rng) -> Self {
        EmissionIter {
            rng,
            pump_rate: emitter.pump_rate_per_ns,
            decay_rate: 1.0 / emitter.lifetime_ns,
            t: 0.0,
            end: duration_ns,
        }
    }
}

impl Iterator for EmissionIter {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        if self.t >= self.end {
            return None;
        }
        let pump: f64 = self.rng.sample(Exp1);
        let decay: f64 = self.rng.sample(Exp1);
        self.t += pump / self.pump_rate + decay / self.decay_rate;
        if self.t < self.end {
            Some(self.t)
        } else {
            None
        }
    }
}

/// All emission times of `emitter` in `[0, duration_ns)`, strictly increasing.
pub fn simulate_emissions(emitter: &EmitterParams, duration_ns: f64, seed: u64) -> Result<Vec<f64>, ConfigError> {
    Ok(EmissionIter::new(emitter, duration_ns, seed)?.collect())
}
