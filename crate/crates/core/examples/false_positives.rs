//! Empty-room false-positive study: repeatedly splits pools of empty-room
//! captures into random halves, computes the KL observations between them,
//! and runs forward-backward (no Baum-Welch) under trained parameters. Any
//! detection is a false positive. Doubling the calibration sample count
//! tightens the moment estimates and drives the rate down.
//!
//! ```bash
//! cargo run --release --example false_positives
//! ```

use uwb_ranging::eval::scenes;
use uwb_ranging::eval::{
    empty_room_pools, false_positive_trials, labeled_observations, scene_run_seed,
};
use uwb_ranging::hmm::init_params;

fn main() -> uwb_ranging::Result<()> {
    let seed = 7;
    let train_scene = scenes::room_a();
    let train = labeled_observations(&train_scene, 10, 10, scene_run_seed(seed, &train_scene))?;
    let params = init_params(&train, 1e-3)?;

    // Pools from both rooms, mirroring the per-pair/per-room trial layout.
    for calibration in [10usize, 20, 40] {
        let mut detections = 0;
        let mut trials = 0;
        for scene in [scenes::room_a(), scenes::room_b()] {
            let pools = empty_room_pools(&scene, 2 * calibration, scene_run_seed(seed, &scene))?;
            let result = false_positive_trials(&pools, &params, 1000, seed)?;
            detections += result.detections;
            trials += result.trials;
        }
        let rate = detections as f64 / trials as f64;
        println!(
            "calibration {calibration:>2}: {detections:>4} / {trials} trials -> fp_rate {rate:.3e}"
        );
    }
    Ok(())
}
