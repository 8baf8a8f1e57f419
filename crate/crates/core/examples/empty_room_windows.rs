//! Sensitivity of the through-wall pipeline to which calibration samples
//! are used: slides windows of sequential empty-room captures through the
//! two calibration blocks, reruns the full pipeline per window, and prints
//! the empirical CDF of the resulting RMSE. Fewer calibration samples per
//! window degrade the estimate.
//!
//! ```bash
//! cargo run --release --example empty_room_windows
//! ```

use uwb_ranging::eval::scenes;
use uwb_ranging::eval::{
    empty_room_subset_study, labeled_observations, scene_run_seed, window_count, WindowStudyConfig,
};
use uwb_ranging::hmm::init_params;

fn main() -> uwb_ranging::Result<()> {
    let seed = 7;
    let room_a = scenes::room_a();
    let labeled = labeled_observations(&room_a, 10, 10, scene_run_seed(seed, &room_a))?;
    let params0 = init_params(&labeled, 1e-3)?;

    let tw = scenes::through_wall();
    let scene_seed = scene_run_seed(seed, &tw);
    for subset_size in [10, 20, 50] {
        let cfg = WindowStudyConfig {
            subset_size,
            block_len: 100,
            n_blocks: 2,
            n_test: 20,
            bw_max_iters: 15,
            bw_tol: 1e-4,
        };
        let study = empty_room_subset_study(&tw, &params0, &cfg, scene_seed)?;
        assert_eq!(
            study.window_rmses.len(),
            window_count(cfg.block_len, cfg.subset_size, cfg.n_blocks)
        );
        println!(
            "windows of {:>2} samples: {} windows, median RMSE {:.3} ns",
            subset_size,
            study.window_rmses.len(),
            study.median()
        );
        let cdf = study.cdf();
        for q in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let idx = ((q * cdf.len() as f64) as usize).min(cdf.len() - 1);
            print!("  p{:<3}", (q * 100.0) as usize);
            println!(" {:.3} ns", cdf[idx].0);
        }
    }
    Ok(())
}
