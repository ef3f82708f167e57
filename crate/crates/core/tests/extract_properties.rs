use proptest::prelude::*;
use qrng_core::extract::{debias_cascade, debias_stage1, debias_von_neumann, BitStream, Cascade, Origin, PairRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bernoulli(p: f64, n: usize, seed: u64) -> BitStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BitStream::from_bits((0..n).map(|_| rng.random_bool(p)), Origin::Raw)
}

fn ones_fraction(b: &BitStream) -> f64 {
    b.count_ones() as f64 / b.len() as f64
}

#[test]
fn stage1_keeps_a_quarter_of_fair_bits() {
    let raw = bernoulli(0.5, 1_000_000, 1);
    let out = debias_stage1(&raw);
    // Kept blocks ~ Bin(5e5, 1/2), one output bit each.
    let ratio = out.len() as f64 / raw.len() as f64;
    let sigma = (500_000.0f64 * 0.25).sqrt() / 1e6;
    assert!((ratio - 0.25).abs() < 3.0 * sigma, "{ratio}");
}

#[test]
fn stage1_preserves_bias() {
    // Output bit = second bit of a block whose first bit is 1.
    for (i, p) in [0.1, 0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
        let out = debias_stage1(&bernoulli(p, 2_000_000, 10 + i as u64));
        let n = out.len() as f64;
        let sigma = (p * (1.0 - p) / n).sqrt();
        assert!((ones_fraction(&out) - p).abs() < 4.0 * sigma, "p = {p}");
    }
}

#[test]
fn von_neumann_is_fair_for_any_bias() {
    for (i, p) in [0.1, 0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
        let out = debias_von_neumann(&bernoulli(p, 2_000_000, 20 + i as u64));
        let n = out.len() as f64;
        let sigma = (0.25 / n).sqrt();
        assert!((ones_fraction(&out) - 0.5).abs() < 4.0 * sigma, "p = {p}");
    }
}

#[test]
fn von_neumann_retention_at_seventy_percent() {
    let raw = bernoulli(0.7, 1_000_000, 3);
    let out = debias_von_neumann(&raw);
    let retention = out.len() as f64 / raw.len() as f64;
    assert!((retention - 0.21).abs() < 0.01, "{retention}");
    assert!((ones_fraction(&out) - 0.5).abs() < 0.01);
}

#[test]
fn cascade_retains_a_sixteenth() {
    let ratios: Vec<f64> = (0..20)
        .map(|seed| {
            let (_, report) = debias_cascade(&bernoulli(0.5, 200_000, 100 + seed));
            report.retention.unwrap()
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / 20.0;
    // Stage 1 keeps N1 ~ Bin(n/2, 1/2) bits, von Neumann keeps Bin(N1/2, 1/2)
    // of those: the output count has variance n/32 + n/128.
    let per_run = (5.0f64 * 200_000.0 / 128.0).sqrt() / 200_000.0;
    let sigma = per_run / 20f64.sqrt();
    assert!((mean - 1.0 / 16.0).abs() < 3.0 * sigma, "{mean}");
}

#[test]
fn empty_input_has_undefined_retention() {
    let (out, report) = debias_cascade(&BitStream::new(Origin::Raw));
    assert!(out.is_empty());
    assert_eq!(report.retention, None);
    assert_eq!(report.stage1_retention, None);
}

#[test]
fn stages_are_deterministic_and_shrinking() {
    let raw = bernoulli(0.4, 10_001, 9);
    let a = debias_cascade(&raw);
    let b = debias_cascade(&raw);
    assert_eq!(a.0, b.0);
    assert!(debias_stage1(&raw).len() <= raw.len() / 2);
    assert_eq!(debias_stage1(&raw).origin(), Origin::Stage1);
    assert_eq!(a.0.origin(), Origin::Unbiased);
}

fn block_outputs(bits: &[bool], rule: PairRule) -> Vec<Option<bool>> {
    bits.chunks_exact(2).map(|p| rule.apply(p[0], p[1])).collect()
}

proptest! {
    #[test]
    fn pack_round_trip(bits in prop::collection::vec(any::<bool>(), 0..300)) {
        let s = BitStream::from_bits(bits.iter().copied(), Origin::Raw);
        prop_assert_eq!(s.len(), bits.len());
        let unpacked: Vec<bool> = s.unpack().iter().map(|&b| b == 1).collect();
        prop_assert_eq!(&unpacked, &bits);
        let again = BitStream::from_bytes(s.as_bytes().to_vec(), s.len(), Origin::Raw).unwrap();
        prop_assert_eq!(&again, &s);
        prop_assert_eq!(BitStream::parse_ascii(&s.to_ascii(), Origin::Raw).unwrap(), s);
    }

    #[test]
    fn permuting_blocks_permutes_output(
        bits in prop::collection::vec(any::<bool>(), 2..200),
        seed in any::<u64>(),
    ) {
        let blocks: Vec<[bool; 2]> = bits.chunks_exact(2).map(|p| [p[0], p[1]]).collect();
        let mut order: Vec<usize> = (0..blocks.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let permuted: Vec<bool> = order.iter().flat_map(|&i| blocks[i]).collect();
        let original: Vec<bool> = blocks.iter().flatten().copied().collect();
        for (rule, f) in [
            (PairRule::STAGE1, debias_stage1 as fn(&BitStream) -> BitStream),
            (PairRule::VON_NEUMANN, debias_von_neumann),
        ] {
            let per_block = block_outputs(&original, rule);
            let expected: Vec<u8> = order.iter().filter_map(|&i| per_block[i]).map(u8::from).collect();
            let got = f(&BitStream::from_bits(permuted.iter().copied(), Origin::Raw)).unpack();
            prop_assert_eq!(got, expected);
        }
    }

    #[test]
    fn chunked_cascade_equals_one_shot(
        bits in prop::collection::vec(any::<bool>(), 0..2000),
        cuts in prop::collection::vec(0usize..2000, 0..8),
    ) {
        let raw = BitStream::from_bits(bits.iter().copied(), Origin::Raw);
        let (want, want_report) = debias_cascade(&raw);
        let mut cuts: Vec<usize> = cuts.into_iter().map(|c| c.min(bits.len())).collect();
        cuts.push(0);
        cuts.push(bits.len());
        cuts.sort_unstable();
        let mut cascade = Cascade::new();
        let mut out = BitStream::new(Origin::Unbiased);
        for w in cuts.windows(2) {
            let chunk = BitStream::from_bits(bits[w[0]..w[1]].iter().copied(), Origin::Raw);
            cascade.feed(&chunk, &mut out);
        }
        prop_assert_eq!(out.unpack(), want.unpack());
        prop_assert_eq!(cascade.report(), want_report);
    }
}
