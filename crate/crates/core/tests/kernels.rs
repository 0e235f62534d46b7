use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbbf::{serialize, Kernel, SplitBlockFilter};

fn random_hashes(n: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen()).collect()
}

#[test]
fn avx2_matches_scalar_bit_for_bit() {
    if !Kernel::Avx2.is_available() {
        eprintln!("avx2 unavailable; skipping differential test");
        return;
    }
    for buckets in [1, 2, 7, 1000, 4096] {
        let hashes = random_hashes(100_000, buckets as u64);
        let mut scalar = SplitBlockFilter::new(buckets).unwrap();
        let mut simd = scalar.clone();
        for &h in &hashes[..50_000] {
            scalar.add_hash_with(Kernel::Scalar, h);
            simd.add_hash_with(Kernel::Avx2, h);
        }
        scalar.bulk_add_with(Kernel::Scalar, &hashes[50_000..]);
        simd.bulk_add_with(Kernel::Avx2, &hashes[50_000..]);
        assert_eq!(serialize(&scalar), serialize(&simd), "buckets={buckets}");

        let probes = random_hashes(20_000, 99);
        let mut a = vec![false; probes.len()];
        let mut b = vec![false; probes.len()];
        scalar.bulk_find_into(Kernel::Scalar, &probes, &mut a);
        simd.bulk_find_into(Kernel::Avx2, &probes, &mut b);
        assert_eq!(a, b);
        for &p in &probes[..1000] {
            assert_eq!(
                scalar.find_hash_with(Kernel::Scalar, p),
                scalar.find_hash_with(Kernel::Avx2, p)
            );
        }
    }
}

#[test]
fn detect_returns_available_kernel() {
    assert!(Kernel::detect().is_available());
    assert!(Kernel::Scalar.is_available());
}

#[test]
fn block_index_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0B10C);
    let n = 1_000_000u64;
    let buckets = 7u64;
    let mut counts = [0u64; 7];
    for _ in 0..n {
        counts[sbbf::block_index(rng.gen(), buckets) as usize] += 1;
    }
    let p = 1.0 / buckets as f64;
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        assert!((c as f64 - mean).abs() <= 5.0 * sd, "bucket {i}: {c}");
    }
}

#[test]
fn one_block_and_eight_lane_hashes_per_operation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for buckets in [1usize, 3, 1000, 65_537] {
        let mut filter = SplitBlockFilter::new(buckets).unwrap();
        for _ in 0..1000 {
            let h: u64 = rng.gen();
            let log = filter.trace_add(h);
            assert_eq!(log.blocks_touched().len(), 1);
            assert_eq!((log.reads.len(), log.writes.len()), (1, 1));
            assert_eq!(log.lane_hashes.len(), 8);
            let (found, log) = filter.trace_find(h);
            assert!(found);
            assert_eq!(log.blocks_touched().len(), 1);
            assert_eq!(log.lane_hashes.len(), 8);
        }
    }
}
