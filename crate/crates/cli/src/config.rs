use std::path::{Path, PathBuf};

use cbp_core::settings::Settings;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable that overrides the configured thread count.
pub const THREADS_ENV: &str = "CBP_THREADS";

/// Everything a run depends on. Echoed into every report with the numeric
/// defaults written out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub settings: Settings,
    /// Worker threads; `None` uses the available parallelism.
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            settings: Settings::default(),
            threads: None,
            output_dir: PathBuf::from("reports"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        Self::from_json(&text)
    }

    pub fn check(&self) -> CliResult<()> {
        self.settings.check()?;
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// The configuration as written into reports.
    pub fn echo(&self) -> RunConfig {
        RunConfig {
            settings: self.settings.resolved(),
            ..self.clone()
        }
    }

    /// Thread count after the environment override.
    pub fn effective_threads(&self) -> CliResult<usize> {
        if let Ok(v) = std::env::var(THREADS_ENV) {
            return match v.trim().parse::<usize>() {
                Ok(t) if t > 0 => Ok(t),
                _ => Err(CliError::Config(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
            };
        }
        Ok(self.threads.unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        }))
    }

    /// Sizes the global rayon pool. A pool that already exists is kept.
    pub fn install_threads(&self) -> CliResult<usize> {
        let threads = self.effective_threads()?;
        if rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_err() {
            log::debug!("thread pool already initialised");
        }
        Ok(rayon::current_num_threads())
    }
}
