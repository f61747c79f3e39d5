mod args;
mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, RerunArgs};
use error::CliError;
use output::{commit, file_digest, sha256_hex, RunManifest, RunOutput};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let raw: Vec<String> = std::env::args().collect();
    match run(&raw) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(raw: &[String]) -> Result<(), CliError> {
    let argv = config::expand_config(raw)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Rerun(r) => rerun(r),
        command => {
            let out = dispatch(command)?;
            commit(
                out,
                command_name(command),
                &argv[1..],
                serde_json::to_value(command)?,
            )?;
            Ok(())
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var("INFOPROC_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("INFOPROC_THREADS={v:?} is not a count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::EcaFeatures(_) => "eca-features",
        Command::Predict(_) => "predict",
        Command::Cluster(_) => "cluster",
        Command::Lambda(_) => "lambda",
        Command::Transient(_) => "transient",
        Command::Ts(_) => "ts",
        Command::Synth(_) => "synth",
        Command::Rerun(_) => "rerun",
    }
}

fn dispatch(c: &Command) -> Result<RunOutput, CliError> {
    match c {
        Command::EcaFeatures(a) => commands::eca_features(a),
        Command::Predict(a) => commands::predict(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Lambda(a) => commands::lambda(a),
        Command::Transient(a) => commands::transient(a),
        Command::Ts(a) => commands::ts(a),
        Command::Synth(a) => commands::synth(a),
        Command::Rerun(_) => Err(CliError::Usage("a manifest cannot record a rerun".into())),
    }
}

fn rerun(r: &RerunArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&r.manifest)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", r.manifest.display())))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: not a run manifest: {e}", r.manifest.display())))?;
    std::env::set_current_dir(&manifest.cwd)
        .map_err(|e| CliError::Input(format!("cannot enter recorded directory {}: {e}", manifest.cwd)))?;
    for input in &manifest.inputs {
        let now = file_digest(Path::new(&input.path))?;
        if now.sha256 != input.sha256 {
            return Err(CliError::Input(format!(
                "input {} changed since the recorded run",
                input.path
            )));
        }
    }
    let mut argv = vec!["infoproc".to_string()];
    argv.extend(manifest.argv.iter().cloned());
    let cli = Cli::try_parse_from(&argv)
        .map_err(|e| CliError::Input(format!("recorded arguments no longer parse: {e}")))?;
    let out = dispatch(&cli.command)?;
    if r.check {
        let mut mismatched = Vec::new();
        for (path, bytes) in &out.files {
            let path = path.display().to_string();
            let recorded = manifest.outputs.iter().find(|o| o.path == path);
            if recorded.map(|o| &o.sha256) != Some(&sha256_hex(bytes)) {
                mismatched.push(path);
            }
        }
        if manifest.outputs.len() != out.files.len() || !mismatched.is_empty() {
            return Err(CliError::Input(format!(
                "outputs differ from the record: {}",
                mismatched.join(", ")
            )));
        }
        println!("{} outputs reproduced", out.files.len());
        return Ok(());
    }
    let outputs: Vec<PathBuf> = out.files.iter().map(|(p, _)| p.clone()).collect();
    commit(out, &manifest.command, &manifest.argv, manifest.config.clone())?;
    log::info!("regenerated {} files", outputs.len());
    Ok(())
}
