use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::emission::EmissionIter;
use super::{ConfigError, Detector, SceneConfig, TimeTag, PS_PER_NS};
use crate::math::round;
use crate::seed::{rng_for, StreamKind};

/// Per-photon routing decisions for one emitter.
struct Router {
    rng: ChaCha8Rng,
    keep: f64,
    p_transmission: f64,
    p_r1: f64,
    efficiency: [f64; 3],
    jitter_ns: [f64; 3],
    end_ps: i64,
}

impl Router {
    fn new(scene: &SceneConfig, emitter: usize, keep: f64) -> Self {
        let det = |d: Detector| scene.detectors[&d];
        Router {
            rng: rng_for(scene.seed, StreamKind::Branch, emitter as u32),
            keep,
            p_transmission: scene.split.prob_transmission(),
            p_r1: scene.reflection_hbt_split,
            efficiency: Detector::ALL.map(|d| det(d).efficiency),
            jitter_ns: Detector::ALL.map(|d| det(d).jitter_sigma_ns),
            end_ps: scene.duration_ps() as i64,
        }
    }

    /// Pushes the detector candidate produced by a photon emitted at `t_ns`, if
    /// any. Every photon consumes the same five variates so that the stream of
    /// decisions depends only on the photon index.
    #[inline]
    fn route(&mut self, t_ns: f64, candidates: &mut [Vec<u64>; 3]) {
        let u_keep: f64 = self.rng.random();
        let u_branch: f64 = self.rng.random();
        let u_route: f64 = self.rng.random();
        let u_eff: f64 = self.rng.random();
        let z: f64 = self.rng.sample(StandardNormal);
        if u_keep >= self.keep {
            return;
        }
        let d = if u_branch < self.p_transmission {
            Detector::T1
        } else if u_route < self.p_r1 {
            Detector::R1
        } else {
            Detector::R2
        };
        let i = d.index();
        if u_eff >= self.efficiency[i] {
            return;
        }
        let ts = round((t_ns + self.jitter_ns[i] * z) * PS_PER_NS) as i64;
        if (0..self.end_ps).contains(&ts) {
            candidates[i].push(ts as u64);
        }
    }
}

fn add_dark_counts(scene: &SceneConfig, candidates: &mut [Vec<u64>; 3]) {
    let end = scene.duration_ns;
    let end_ps = scene.duration_ps();
    for d in Detector::ALL {
        let rate = scene.detectors[&d].dark_rate_per_ns;
        if rate <= 0.0 {
            continue;
        }
        let mut rng = rng_for(scene.seed, StreamKind::Dark, d as u32);
        let mut t = 0.0;
        loop {
            let w: f64 = rng.sample(Exp1);
            t += w / rate;
            if t >= end {
                break;
            }
            let ts = round(t * PS_PER_NS) as u64;
            if ts < end_ps {
                candidates[d.index()].push(ts);
            }
        }
    }
}

/// Sorts the candidates of one detector and applies its non-paralyzable dead
/// time. Accepted stamps are strictly increasing with gaps >= `dead_ps`.
fn dead_time_filter(mut stamps: Vec<u64>, dead_ps: u64) -> Vec<u64> {
    stamps.sort_unstable();
    let mut out = Vec::with_capacity(stamps.len());
    let mut last: Option<u64> = None;
    for ts in stamps {
        match last {
            Some(prev) if ts == prev || ts - prev < dead_ps => {}
            _ => {
                out.push(ts);
                last = Some(ts);
            }
        }
    }
    out
}

/// Three-way merge; equal timestamps resolve in detector order R1 < R2 < T1.
fn merge(channels: [Vec<u64>; 3]) -> Vec<TimeTag> {
    let total = channels.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(total);
    let mut pos = [0usize; 3];
    loop {
        let mut best: Option<(u64, usize)> = None;
        for (i, ch) in channels.iter().enumerate() {
            if let Some(&ts) = ch.get(pos[i]) {
                if best.is_none_or(|(b, _)| ts < b) {
                    best = Some((ts, i));
                }
            }
        }
        let Some((ts, i)) = best else { break };
        out.push(TimeTag::new(ts, Detector::ALL[i]));
        pos[i] += 1;
    }
    out
}

fn finish(scene: &SceneConfig, mut candidates: [Vec<u64>; 3]) -> Vec<TimeTag> {
    add_dark_counts(scene, &mut candidates);
    let [r1, r2, t1] = candidates;
    let filtered = [
        dead_time_filter(r1, scene.detectors[&Detector::R1].dead_time_ps()),
        dead_time_filter(r2, scene.detectors[&Detector::R2].dead_time_ps()),
        dead_time_filter(t1, scene.detectors[&Detector::T1].dead_time_ps()),
    ];
    merge(filtered)
}

/// Routes precomputed emission times (one sorted list per emitter, in scene
/// order) through branching and detection.
pub fn branch_and_detect(emissions: &[Vec<f64>], scene: &SceneConfig) -> Result<Vec<TimeTag>, ConfigError> {
    scene.validate()?;
    let keep = scene.weight_factors();
    let mut candidates: [Vec<u64>; 3] = [vec![], vec![], vec![]];
    for (i, times) in emissions.iter().enumerate().take(scene.emitters.len()) {
        let mut router = Router::new(scene, i, keep[i]);
        for &t in times {
            router.route(t, &mut candidates);
        }
    }
    Ok(finish(scene, candidates))
}

/// Simulates the full scene without materializing emission lists. The output
/// equals `branch_and_detect` applied to the per-emitter emissions drawn with
/// the scene's emission sub-seeds.
pub fn simulate_scene(scene: &SceneConfig) -> Result<Vec<TimeTag>, ConfigError> {
    scene.validate()?;
    let keep = scene.weight_factors();
    let mut candidates: [Vec<u64>; 3] = [vec![], vec![], vec![]];
    for (i, emitter) in scene.emitters.iter().enumerate() {
        let rng = rng_for(scene.seed, StreamKind::Emission, i as u32);
        let mut router = Router::new(scene, i, keep[i]);
        for t in EmissionIter::with_rng(emitter, scene.duration_ns, rng) {
            router.route(t, &mut candidates);
        }
    }
    Ok(finish(scene, candidates))
}

/// Timestamps of one detector, in order.
pub fn channel_timestamps(tags: &[TimeTag], detector: Detector) -> Vec<u64> {
    tags.iter()
        .filter(|t| t.detector == detector)
        .map(|t| t.timestamp_ps)
        .collect()
}
