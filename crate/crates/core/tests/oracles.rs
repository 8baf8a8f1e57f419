//! Module invariants checked against the independent oracles: the
//! closed-form divergence against quadrature at tight tolerance, and
//! smoothed posteriors against exhaustive enumeration.

mod common;

use rand::Rng;
use uwb_ranging::hmm::{forward_backward, HmmParams, LogNormalEmission};
use uwb_ranging::obs::{symmetric_kl, BinStats, ObservationVector};
use uwb_ranging::seeding::stream_rng;

#[test]
fn symmetric_kl_matches_quadrature_to_1e9() {
    let mut rng = stream_rng(0x0C1, 1, 0);
    for _ in 0..100 {
        let p = BinStats {
            mu: vec![rng.gen_range(-4.0..4.0)],
            sigma2: vec![rng.gen_range(0.2..6.0)],
        };
        let q = BinStats {
            mu: vec![rng.gen_range(-4.0..4.0)],
            sigma2: vec![rng.gen_range(0.2..6.0)],
        };
        let closed = symmetric_kl(&p, &q).unwrap().values[0];
        let quad = common::gaussian_symmetric_kl_quadrature(
            p.mu[0],
            p.sigma2[0],
            q.mu[0],
            q.sigma2[0],
            400_000,
        );
        let tol = 1e-9 * quad.abs().max(1.0);
        assert!(
            (closed - quad).abs() <= tol,
            "closed {closed} vs quadrature {quad} differ by {:.3e}",
            (closed - quad).abs()
        );
    }
}

#[test]
fn posteriors_match_enumeration_and_sum_to_one() {
    let mut rng = stream_rng(0x0C1, 2, 0);
    for _ in 0..50 {
        let n = rng.gen_range(1..=10);
        let pi1: f64 = rng.gen_range(0.1..0.9);
        let p01: f64 = rng.gen_range(0.05..0.95);
        let p10: f64 = rng.gen_range(0.05..0.95);
        let params = HmmParams {
            pi: [1.0 - pi1, pi1],
            trans: [[1.0 - p01, p01], [p10, 1.0 - p10]],
            emit: [
                LogNormalEmission {
                    location: rng.gen_range(-2.0..0.0),
                    scale: rng.gen_range(0.3..1.5),
                },
                LogNormalEmission {
                    location: rng.gen_range(0.0..2.0),
                    scale: rng.gen_range(0.3..1.5),
                },
            ],
            epsilon_escape: 0.05,
        };
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0f64..3.0).exp()).collect();
        let obs = ObservationVector::new(values.clone()).unwrap();
        let track = forward_backward(&obs, &params).unwrap();
        let log_b: Vec<[f64; 2]> = values
            .iter()
            .map(|&o| {
                [
                    common::lognormal_log_pdf(o, params.emit[0].location, params.emit[0].scale),
                    common::lognormal_log_pdf(o, params.emit[1].location, params.emit[1].scale),
                ]
            })
            .collect();
        let (alpha, _) = common::enumerate_posteriors(params.pi, params.trans, &log_b);
        for (k, (a, b)) in track.alpha.iter().zip(&alpha).enumerate() {
            assert!((a - b).abs() <= 1e-9, "bin {}: {a} vs oracle {b}", k + 1);
            // State posteriors are complementary, hence sum to one.
            assert!(*a >= 0.0 && *a <= 1.0);
        }
    }
}
