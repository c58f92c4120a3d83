use std::path::{Path, PathBuf};

use serde::Serialize;

/// Reproducibility record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub version: &'static str,
}

impl RunManifest {
    pub fn new(subcommand: &'static str) -> Self {
        Self {
            subcommand,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            threads: None,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn seed(mut self, seed: u64, threads: Option<usize>) -> Self {
        self.seed = Some(seed);
        self.threads = threads;
        self
    }
}

/// `out.csv` -> `out.csv.manifest.json`.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}
