use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oscbath::config::Preset;
use oscbath::model::effective_frequencies;
use oscbath::scenario::{self, RunOutput};
use oscbath::{CoefficientTable, Error, Result, RunConfig, SweepSpec};

mod plot;

#[derive(Parser)]
#[command(name = "oscbath", version, about = "Oscillators in a shared non-Markovian bath: covariance dynamics and entanglement")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration (defaults are used when omitted)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Integration step, overriding the config
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Final time, overriding the config
    #[arg(long, global = true)]
    tmax: Option<f64>,
    /// Skip SVG plots
    #[arg(long, global = true)]
    no_plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write CSVs
    Run,
    /// Late-time summary over a parameter list (config needs a [sweep] table)
    Sweep,
    /// Bisect the squeezing r at which late-time entanglement appears
    Threshold {
        #[arg(long, default_value_t = 1.0)]
        r_lo: f64,
        #[arg(long, default_value_t = 2.0)]
        r_hi: f64,
    },
    /// Run every curve of a named scenario
    Preset {
        #[arg(value_parser = ["fig2", "fig3", "fig4", "fig5"])]
        name: String,
    },
    /// Write the bath coefficient table only
    DumpCoefficients,
}

impl Common {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(d) = &self.out {
            c.output.dir = d.clone();
        }
        if let Some(dt) = self.dt {
            c.integration.dt = dt;
        }
        if let Some(t) = self.tmax {
            c.integration.t_max = t;
        }
        if self.no_plots {
            c.output.plots = false;
        }
    }

    fn run_config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        self.apply(&mut c);
        c.validate()?;
        Ok(c)
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io(format!("{}: {e}", path.display()))
}

fn emit(output: &RunOutput, dir: &Path) -> Result<()> {
    for p in scenario::write_outputs(output, dir)? {
        log::info!("wrote {}", p.display());
    }
    if output.config.output.plots {
        let p = dir.join("entanglement.svg");
        plot::entanglement(&output.reports, &p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn cmd_run(common: &Common) -> Result<()> {
    let config = common.run_config()?;
    let output = scenario::run(&config)?;
    emit(&output, &config.output.dir)
}

fn cmd_sweep(common: &Common) -> Result<()> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs --config".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut spec = SweepSpec::from_toml_str(&text)?;
    common.apply(&mut spec.base);
    spec.validate()?;
    let rows = scenario::sweep(&spec)?;
    let dir = &spec.base.output.dir;
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let p = dir.join("sweep.csv");
    let file = std::fs::File::create(&p).map_err(io(&p))?;
    scenario::write_sweep_csv(spec.parameter, &rows, file)?;
    let ok = rows.iter().filter(|r| r.outcome.is_ok()).count();
    println!("{}: {ok}/{} rows succeeded", p.display(), rows.len());
    if ok == 0 {
        let first = rows.iter().find_map(|r| r.outcome.as_ref().err()).cloned().unwrap_or_default();
        return Err(Error::SweepFailed(first));
    }
    Ok(())
}

fn cmd_threshold(common: &Common, r_lo: f64, r_hi: f64) -> Result<()> {
    let config = common.run_config()?;
    let r = scenario::threshold_find(&config, r_lo, r_hi)?;
    let analytic = oscbath::entanglement::squeezing_threshold(config.bath.temperature, effective_frequencies(&config.system)?.omega_n);
    println!("threshold r = {r:.4} (analytic ½ln(2N̄+1) = {analytic:.4})");
    Ok(())
}

fn cmd_preset(common: &Common, name: &str) -> Result<()> {
    let preset = Preset::parse(name)?;
    let root = common.out.clone().unwrap_or_else(|| PathBuf::from("out")).join(preset.name());
    for (label, mut config) in preset.runs() {
        common.apply(&mut config);
        config.output.dir = root.join(&label);
        config.validate()?;
        let output = scenario::run(&config)?;
        let summary = scenario::late_summary(&output.reports)?;
        println!(
            "{name} {label}: late mean min eta = {:.6e}, entangled = {}",
            summary.mean_min_eta,
            summary.entangled()
        );
        emit(&output, &config.output.dir)?;
    }
    Ok(())
}

fn cmd_dump(common: &Common) -> Result<()> {
    let config = common.run_config()?;
    let table = scenario::build_table(&config, config.integration.t_max)?;
    write_table(&table, &config.output.dir)
}

fn write_table(table: &CoefficientTable, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let p = dir.join("coefficients.csv");
    let file = std::io::BufWriter::new(std::fs::File::create(&p).map_err(io(&p))?);
    table.write_csv(file)?;
    println!("{}", p.display());
    Ok(())
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("OSCBATH_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("OSCBATH_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Run => cmd_run(&cli.common),
        Command::Sweep => cmd_sweep(&cli.common),
        Command::Threshold { r_lo, r_hi } => cmd_threshold(&cli.common, *r_lo, *r_hi),
        Command::Preset { name } => cmd_preset(&cli.common, name),
        Command::DumpCoefficients => cmd_dump(&cli.common),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
