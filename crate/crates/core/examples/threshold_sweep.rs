//! Threshold baselines head-to-head: sweeps the first-threshold-crossing
//! RMSE over a log-spaced grid in both rooms, shows how poorly the
//! training-room optimum transfers, and runs the adaptive
//! background-subtraction estimator on the same captures.
//!
//! ```bash
//! cargo run --release --example threshold_sweep
//! ```

use uwb_ranging::baselines::{default_gamma_grid, ftc_sweep};
use uwb_ranging::eval::scenes;
use uwb_ranging::eval::{evaluate_zetik, labeled_observations, scene_run_seed};

fn main() -> uwb_ranging::Result<()> {
    let seed = 7;
    let train_scene = scenes::room_a();
    let test_scene = scenes::room_b();
    let train = labeled_observations(&train_scene, 10, 10, scene_run_seed(seed, &train_scene))?;
    let test = labeled_observations(&test_scene, 10, 10, scene_run_seed(seed, &test_scene))?;

    let train_sweep = ftc_sweep(&train, &default_gamma_grid(&train), 1e-9)?;
    let test_sweep = ftc_sweep(&test, &default_gamma_grid(&test), 1e-9)?;
    println!("first threshold crossing:");
    println!(
        "  {}: best gamma {:.3} -> RMSE {:.3} ns",
        train_scene.name, train_sweep.best_gamma, train_sweep.best_rmse
    );
    println!(
        "  {}: best gamma {:.3} -> RMSE {:.3} ns",
        test_scene.name, test_sweep.best_gamma, test_sweep.best_rmse
    );
    // Transfer the training-room optimum to the test room.
    let transferred = uwb_ranging::baselines::ftc_rmse_ns(&test, train_sweep.best_gamma, 1e-9);
    println!(
        "  transferred gamma {:.3} -> {} RMSE {:.3} ns (oracle would give {:.3} ns)",
        train_sweep.best_gamma, test_scene.name, transferred, test_sweep.best_rmse
    );

    println!(
        "\nRMSE vs threshold on {} (every 10th grid point):",
        test_scene.name
    );
    for i in (0..test_sweep.gammas.len()).step_by(10) {
        println!(
            "  gamma {:>9.3} -> RMSE {:>7.3} ns, {} false negatives",
            test_sweep.gammas[i], test_sweep.rmse_per_gamma[i], test_sweep.fn_count[i]
        );
    }

    let zetik = evaluate_zetik(
        &test_scene,
        10,
        10,
        scene_run_seed(seed, &test_scene),
        uwb_ranging::baselines::DEFAULT_ZETIK_SMOOTHING,
        test_scene.geometry.bin_width_ns,
    )?;
    println!(
        "\nadaptive background subtraction on {}: RMSE {:.3} ns, FN rate {:.3}",
        test_scene.name, zetik.rmse_ns, zetik.fn_rate
    );
    Ok(())
}
