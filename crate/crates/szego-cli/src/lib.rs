//! Batch front end for the Szego-equation solver: configuration parsing,
//! command orchestration, and artifact writing (CSV/JSON/SVG + manifest).

pub mod commands;
pub mod config;
pub mod output;

pub use commands::CliError;
pub use config::RunConfig;

/// Honor SZEGO_THREADS (integer >= 1) for the worker pool; returns an error
/// string when the variable is set but unusable.
pub fn init_thread_pool() -> Result<(), String> {
    match std::env::var("SZEGO_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| format!("SZEGO_THREADS must be an integer >= 1, got {raw:?}"))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| e.to_string())
        }
    }
}
