//! Analytic gradients against central finite differences.

mod common;

use common::{encoder_gradient_error, loss_gradient_errors, random_problem};

const TOLERANCE: f64 = 1e-4;
const INSTANCES: u64 = 25;

#[test]
fn loss_kernels_match_finite_differences() {
    let names = [
        "contrastive",
        "aggregation",
        "self-paced",
        "total warm-up",
        "total self-paced",
    ];
    let mut worst = [0.0f64; 5];
    for seed in 0..INSTANCES {
        let errs = loss_gradient_errors(&random_problem(seed));
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
    }
    for (name, err) in names.iter().zip(worst) {
        assert!(err < TOLERANCE, "{name}: relative error {err:e}");
    }
}

#[test]
fn encoder_backward_matches_finite_differences() {
    for seed in 0..INSTANCES {
        let err = encoder_gradient_error(seed);
        assert!(err < TOLERANCE, "seed {seed}: relative error {err:e}");
    }
}
