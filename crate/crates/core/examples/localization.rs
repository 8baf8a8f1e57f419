//! Location estimation on the six-link in-room scene: fuses per-link
//! posteriors into a presence image (soft), fuses point estimates only
//! (hard), and solves the elliptical least-squares baseline, then prints
//! RMS and median error tables.
//!
//! ```bash
//! cargo run --release --example localization
//! ```

use uwb_ranging::eval::scenes;
use uwb_ranging::eval::{
    labeled_observations, localization_report, scene_run_seed, LocalizationOptions,
    LOCALIZATION_METHODS,
};
use uwb_ranging::hmm::init_params;

fn main() -> uwb_ranging::Result<()> {
    let seed = 7;
    let train_scene = scenes::room_b();
    let test_scene = scenes::room_a();

    let train = labeled_observations(&train_scene, 10, 10, scene_run_seed(seed, &train_scene))?;
    let params0 = init_params(&train, 1e-3)?;

    let opts = LocalizationOptions::default();
    let tables = localization_report(
        &test_scene,
        &params0,
        &opts,
        scene_run_seed(seed, &test_scene),
    )?;

    println!(
        "localization on {} ({} person points, pitch {:.0} cm, p = {}):\n",
        test_scene.name,
        test_scene.geometry.person_points.len(),
        opts.pitch * 100.0,
        opts.p_norm
    );
    println!("{:<14} {:>10} {:>12}", "method", "rms (cm)", "median (cm)");
    for method in LOCALIZATION_METHODS {
        println!(
            "{:<14} {:>10.1} {:>12.1}",
            method, tables.rms_cm[method], tables.median_cm[method]
        );
    }
    println!();
    for o in tables
        .per_point
        .iter()
        .filter(|o| o.method == "forward-soft")
    {
        println!(
            "  point {:>2} at ({:.2}, {:.2}) -> estimate ({}, {}), error {:.1} cm",
            o.point,
            o.true_x,
            o.true_y,
            o.est_x
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "-".into()),
            o.est_y
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "-".into()),
            o.error_cm
        );
    }
    Ok(())
}
