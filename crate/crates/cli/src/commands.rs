use std::fs;
use std::path::Path;

use ope_core::analytics::analyze;
use ope_core::montecarlo::{
    experiment_estimator_comparison, experiment_k_scaling, write_csv, ComparisonSetup, CsvRow, ExperimentBundle,
    KScalingSetup,
};
use ope_core::reductions::combination_lock;
use ope_core::verify::{run_verify, VerifyOptions};
use ope_core::{run_mc, BanditInstance, McConfig};
use serde::Serialize;

use crate::manifest::{manifest_path_for, RunManifest};
use crate::{CliError, Experiment};

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text.into_bytes()
}

fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    write(path, &to_json(manifest))
}

/// JSON parse failures are input errors; model violations found while
/// building the instance surface as the library error they wrap.
fn load_instance(path: &Path) -> Result<BanditInstance> {
    let text = read(path)?;
    BanditInstance::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Prints to stdout, or writes the file plus its manifest.
fn emit(bytes: Vec<u8>, out: Option<&Path>, manifest: RunManifest) -> Result<()> {
    match out {
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
        Some(path) => {
            write(path, &bytes)?;
            write_manifest(&manifest.output(path), &manifest_path_for(path))
        }
    }
}

pub fn analytic(instance: &Path, n: usize, out: Option<&Path>) -> Result<()> {
    let inst = load_instance(instance)?;
    let report = analyze(&inst, n)?;
    emit(to_json(&report), out, RunManifest::new("analytic").input(instance))
}

pub fn simulate(
    instance: &Path,
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
    json: Option<&Path>,
) -> Result<()> {
    let inst = load_instance(instance)?;
    let mut cfg: McConfig = serde_json::from_str(&read(config)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if threads.is_some() {
        cfg.threads = threads;
    }
    let result = run_mc(&inst, &cfg)?;
    let id = instance.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
    let rows: Vec<CsvRow> = result
        .points
        .iter()
        .map(|p| CsvRow {
            experiment: "simulate".into(),
            instance_id: id.clone(),
            estimator: p.estimator,
            n: p.n,
            replications: p.replications,
            mse: p.mse,
            nmse: p.nmse,
            stderr: p.stderr,
            seed: result.seed,
        })
        .collect();
    let mut manifest = RunManifest::new("simulate")
        .input(instance)
        .input(config)
        .seed(cfg.seed, cfg.threads)
        .output(out);
    write(out, &csv_bytes(&rows)?)?;
    if let Some(path) = json {
        write(path, &to_json(&result))?;
        manifest = manifest.output(path);
    }
    write_manifest(&manifest, &manifest_path_for(out))
}

fn csv_bytes(rows: &[CsvRow]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(buf)
}

/// Per-instance constants of a bundle, for reference lines in plots.
#[derive(Serialize)]
struct ReferenceRow<'a> {
    instance_id: &'a str,
    k: usize,
    v1: f64,
    v2: f64,
    truth: f64,
}

fn reference_json(bundle: &ExperimentBundle) -> Vec<u8> {
    let rows: Vec<ReferenceRow> = bundle
        .runs
        .iter()
        .map(|r| ReferenceRow {
            instance_id: &r.instance_id,
            k: r.k,
            v1: r.v1,
            v2: r.v2,
            truth: r.result.truth,
        })
        .collect();
    to_json(&rows)
}

pub fn figure(
    experiment: Experiment,
    out: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
    replications: Option<usize>,
    ks: Option<Vec<usize>>,
) -> Result<()> {
    let (stem, bundle, used_seed) = match experiment {
        Experiment::Comparison => {
            let mut setup = ComparisonSetup {
                threads,
                ..Default::default()
            };
            if ks.is_some() {
                return Err(CliError::Input("--ks only applies to kscaling".into()));
            }
            setup.seed = seed.unwrap_or(setup.seed);
            setup.replications = replications.unwrap_or(setup.replications);
            ("fig1_left", experiment_estimator_comparison(&setup)?, setup.seed)
        }
        Experiment::Kscaling => {
            let mut setup = KScalingSetup {
                threads,
                ..Default::default()
            };
            setup.seed = seed.unwrap_or(setup.seed);
            setup.replications = replications.unwrap_or(setup.replications);
            if let Some(ks) = ks {
                if ks.iter().any(|&k| k < 2) {
                    return Err(CliError::Input("every K must be at least 2".into()));
                }
                setup.ks = ks;
            }
            ("fig1_right", experiment_k_scaling(&setup)?, setup.seed)
        }
    };
    let csv_path = out.join(format!("{stem}.csv"));
    let json_path = out.join(format!("{stem}.json"));
    let reference_path = out.join(format!("{stem}_reference.json"));
    write(&csv_path, &csv_bytes(&bundle.rows())?)?;
    write(&json_path, &to_json(&bundle))?;
    write(&reference_path, &reference_json(&bundle))?;
    let manifest = RunManifest::new("figure")
        .seed(used_seed, threads)
        .output(&csv_path)
        .output(&json_path)
        .output(&reference_path);
    write_manifest(&manifest, &manifest_path_for(&csv_path))
}

pub fn verify(suites: &[String], seed: Option<u64>, instances: Option<usize>, out: Option<&Path>) -> Result<()> {
    let mut opts = VerifyOptions::default();
    opts.seed = seed.unwrap_or(opts.seed);
    opts.instances = instances.unwrap_or(opts.instances);
    let report = run_verify(suites, &opts)?;
    let manifest = RunManifest::new("verify").seed(opts.seed, None);
    emit(to_json(&report), out, manifest)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed)
    }
}

pub fn locks(states: usize, p_left: f64, rmax: f64, horizon: Option<usize>, out: Option<&Path>) -> Result<()> {
    let mdp = combination_lock(states, p_left, rmax, horizon)?;
    emit(to_json(&mdp), out, RunManifest::new("locks"))
}
