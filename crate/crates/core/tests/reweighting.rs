//! Reweighting on data whose pair differences span a low-dimensional subspace.

use quadfeat::featuremaps::{rff, FeatureMap, Method};
use quadfeat::grids::subsample_dense;
use quadfeat::harness::{gaussian_mixture, rms_error, sample_pairs, Dataset};
use quadfeat::kernels::GaussianKernel;
use quadfeat::quad1d::gauss_hermite;
use quadfeat::solvers::{bisect_lambda, BisectOptions};

#[test]
fn reweighted_rule_beats_rff_on_structured_data() {
    let base = gaussian_mixture(5000, 40, 4, 2.0, 1).unwrap();
    let rows = base
        .rows()
        .iter()
        .map(|x| x.iter().enumerate().map(|(j, &v)| if j < 3 { v } else { 0.0 }).collect())
        .collect();
    let data = Dataset::from_rows(rows).unwrap();
    let gamma = 0.1;
    let k = GaussianKernel::new(gamma).unwrap();
    let rule = gauss_hermite::<f64>(11).unwrap();
    for seed in 0..2u64 {
        let train = sample_pairs(&data, 500, 10 + seed).unwrap();
        let test = sample_pairs(&data, 5000, 20 + seed).unwrap();
        let candidates = subsample_dense(&rule, 40, 4000, seed).unwrap();
        let fitted = bisect_lambda(&candidates, &train, &k, k.frequency_scale(), 1000, BisectOptions::default())
            .unwrap()
            .rule;
        let rw = FeatureMap::new(fitted.grid, Method::Reweighted, gamma).unwrap();
        let baseline = rff::<f64>(40, rw.len(), gamma, seed).unwrap();
        let ratio = rms_error(&baseline, &k, &test).unwrap() / rms_error(&rw, &k, &test).unwrap();
        assert!(ratio > 5.0, "seed {seed}: ratio {ratio}");
    }
}
