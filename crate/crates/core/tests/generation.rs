mod common;

use common::blobs;
use consensus_core::generation::{
    generate_ensemble, generate_member, kmeans, stratified_sample, stratified_sample_indices,
    EnsembleProtocol, StratificationPlan,
};
use consensus_core::{adjusted_rand_index, Clustering, DataMatrix, RandomSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn kmeans_recovers_well_separated_blobs() {
    let mut exact = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = 2 + (seed % 4) as usize;
        let (data, truth) = blobs(&mut rng, k, 25, 3, 10.0, 0.5);
        let found = kmeans(&data, k, &[0, 1, 2], &mut rng).unwrap();
        if adjusted_rand_index(&found, &Clustering::new(&truth).unwrap()).unwrap() == 1.0 {
            exact += 1;
        }
    }
    assert!(exact >= 95, "exact recovery on {exact}/100 seeds");
}

#[test]
fn kmeans_with_k_equal_n_gives_singletons() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (data, _) = blobs(&mut rng, 3, 4, 2, 5.0, 1.0);
    let c = kmeans(&data, data.n(), &[0, 1], &mut rng).unwrap();
    assert_eq!(c.k(), data.n());
    assert!(kmeans(&data, data.n() + 1, &[0, 1], &mut rng).is_err());
}

fn skewed(rng: &mut ChaCha8Rng) -> DataMatrix {
    // 800 rows near 0 and 200 rows near 10 on the stratifying column.
    let rows: Vec<Vec<f64>> = (0..1000)
        .map(|i| {
            let base = if i < 800 { 0.0 } else { 10.0 };
            vec![base + rng.gen_range(0.0..1.0), rng.gen_range(-5.0..5.0)]
        })
        .collect();
    DataMatrix::from_rows(&rows).unwrap()
}

#[test]
fn skewed_strata_are_sampled_proportionally() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data = skewed(&mut rng);
    let plan = StratificationPlan {
        features: vec![0],
        ..StratificationPlan::new(100)
    };
    let picked = stratified_sample_indices(&data, &plan, &mut rng).unwrap();
    let low = picked.iter().filter(|&&i| i < 800).count();
    assert!(
        (79..=81).contains(&low),
        "{low} rows from the large stratum"
    );
    assert_eq!(picked.len(), 100);
    assert!(picked.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn full_sample_is_the_whole_dataset() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data = skewed(&mut rng);
    let picked =
        stratified_sample_indices(&data, &StratificationPlan::new(1000), &mut rng).unwrap();
    assert_eq!(picked, (0..1000).collect::<Vec<_>>());
    assert!(stratified_sample_indices(&data, &StratificationPlan::new(1001), &mut rng).is_err());
}

#[test]
fn stratified_sample_preserves_feature_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows: Vec<Vec<f64>> = (0..5000)
        .map(|_| {
            let a: f64 = rng.gen_range(0.0..1.0);
            vec![
                a * a * 100.0,
                rng.gen_range(-3.0..7.0),
                a + rng.gen_range(0.0..0.5),
            ]
        })
        .collect();
    let data = DataMatrix::from_rows(&rows).unwrap();
    let sample = stratified_sample(&data, &StratificationPlan::new(400), &mut rng).unwrap();
    for j in 0..data.d() {
        let col = data.column(j);
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        let se = sd / (sample.n() as f64).sqrt();
        let sample_mean = sample.column(j).iter().sum::<f64>() / sample.n() as f64;
        assert!(
            (sample_mean - mean).abs() <= 3.0 * se,
            "column {j}: sample mean {sample_mean} vs {mean} (se {se})"
        );
    }
}

#[test]
fn ensembles_are_deterministic_and_hit_their_schedule() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (data, _) = blobs(&mut rng, 5, 30, 4, 8.0, 2.0);
    let protocol = EnsembleProtocol::new(vec![5, 5, 5, 5, 5, 5, 3, 4, 6, 7], RandomSeed(11));
    let (a, runs) = generate_ensemble(&data, &protocol).unwrap();
    let (b, _) = generate_ensemble(&data, &protocol).unwrap();
    assert_eq!(a.members(), b.members());
    assert_eq!(a.m(), 10);
    for (member, run) in a.members().iter().zip(&runs) {
        assert_eq!(member.k(), run.k_requested);
        assert_eq!(run.features.len(), 3);
    }
    let (single, _) = generate_member(&data, &protocol, 6).unwrap();
    assert_eq!(&single, a.member(6));

    let varied = EnsembleProtocol::new(vec![3, 4, 5, 6, 7], RandomSeed(11));
    let (e, _) = generate_ensemble(&data, &varied).unwrap();
    let ks: Vec<usize> = e.members().iter().map(Clustering::k).collect();
    assert_eq!(ks, vec![3, 4, 5, 6, 7]);
    assert!(EnsembleProtocol::new(vec![1, 3], RandomSeed(1))
        .validate()
        .is_err());
}
