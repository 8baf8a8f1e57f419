//! Train-room / test-room delay estimation: fits initial HMM parameters on
//! labeled room-A observations, refines them with Baum-Welch on room-B, and
//! compares per-vector estimates against ground truth.
//!
//! ```bash
//! cargo run --release --example delay_estimation
//! ```

use uwb_ranging::eval::scenes;
use uwb_ranging::eval::{evaluate_hmm, labeled_observations, scene_run_seed};
use uwb_ranging::hmm::init_params;

fn main() -> uwb_ranging::Result<()> {
    let train_scene = scenes::room_a();
    let test_scene = scenes::room_b();
    let seed = 7;

    let train = labeled_observations(&train_scene, 10, 10, scene_run_seed(seed, &train_scene))?;
    let test = labeled_observations(&test_scene, 10, 10, scene_run_seed(seed, &test_scene))?;
    println!(
        "training vectors: {}   test vectors: {}",
        train.len(),
        test.len()
    );

    let params0 = init_params(&train, 1e-3)?;
    println!("initial parameters (trained on {}):", train_scene.name);
    println!(
        "  pi = [{:.3}, {:.3}]   P01 = {:.4}   P10 = {:.1e}",
        params0.pi[0], params0.pi[1], params0.trans[0][1], params0.trans[1][0]
    );
    println!(
        "  state 0 emission: ln O ~ N({:.3}, {:.3}^2)",
        params0.emit[0].location, params0.emit[0].scale
    );
    println!(
        "  state 1 emission: ln O ~ N({:.3}, {:.3}^2)",
        params0.emit[1].location, params0.emit[1].scale
    );

    let t_ns = test_scene.geometry.bin_width_ns;
    let (report, trajectory, refined) = evaluate_hmm(&test, &params0, 15, 1e-4, t_ns)?;
    println!("\nBaum-Welch trajectory on {}:", test_scene.name);
    for row in &trajectory.rows {
        println!(
            "  iter {:>2}: loglik {:>12.2}   RMSE {:.3} ns",
            row.iteration, row.loglik, row.rmse_ns
        );
    }
    println!("\nrefined parameters:");
    println!(
        "  pi = [{:.3}, {:.3}]   P01 = {:.4}   P10 = {:.1e}",
        refined.pi[0], refined.pi[1], refined.trans[0][1], refined.trans[1][0]
    );
    println!(
        "  state 0 emission: ln O ~ N({:.3}, {:.3}^2)",
        refined.emit[0].location, refined.emit[0].scale
    );
    println!(
        "  state 1 emission: ln O ~ N({:.3}, {:.3}^2)",
        refined.emit[1].location, refined.emit[1].scale
    );

    println!(
        "\nHMM on {}: RMSE {:.3} ns, bias {:+.3} ns, FN rate {:.3}",
        test_scene.name, report.rmse_ns, report.bias_ns, report.fn_rate
    );
    let mut shown = 0;
    for outcome in &report.per_point {
        if shown < 8 {
            println!(
                "  point {:>2} link {}: truth {:>2}  estimate {:>4}  error {:.1} ns",
                outcome.point,
                outcome.link,
                outcome.truth_k,
                outcome
                    .estimate_k
                    .map(|k| k.to_string())
                    .unwrap_or_else(|| "none".into()),
                outcome.error_ns
            );
            shown += 1;
        }
    }
    Ok(())
}
