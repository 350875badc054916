use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gancc::alist::{read_alist, write_alist};
use gancc::codes::girth;
use gancc::construction::run_round;
use gancc::harness::{compare_de, de_curve, default_out_dir, lift_round, run_sweep, write_csv, SimConfig};
use gancc::seed::{subsystem_rng, trial_seed, Subsystem};

#[derive(Parser)]
#[command(name = "gancc", version, about = "Circulant network-channel codes for cooperative relaying")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct ConfigArgs {
    /// `key = value` configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides as `--key value` pairs, e.g. `--snr_db 0:2:20 --trials 500`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> gancc::Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(p) => SimConfig::from_file(p)?,
            None => SimConfig::default(),
        };
        cfg.apply_overrides(&self.overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build one round's code; writes the lifted matrix (alist) and the relay headers (hex).
    Construct(ConfigArgs),
    /// Girth of a parity-check matrix stored in alist format.
    Girth { alist: PathBuf },
    /// Monte Carlo BER/PER sweep.
    Simulate(ConfigArgs),
    /// Density-evolution prediction on the configured SNR grid.
    De(ConfigArgs),
    /// Simulation and density evolution side by side.
    Compare(ConfigArgs),
}

fn out_path(cfg: &SimConfig, name: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| default_out_dir().join(name))
}

fn emit(path: &Path, text: &str) -> gancc::Result<()> {
    print!("{text}");
    write_csv(path, text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> gancc::Result<()> {
    match cli.cmd {
        Cmd::Construct(a) => {
            let cfg = a.load()?;
            let seed = cfg
                .seed
                .ok_or_else(|| gancc::Error::Config("construct needs --seed".into()))?;
            let ts = trial_seed(seed, 0);
            let round = run_round(
                &cfg.round_config(),
                &mut subsystem_rng(ts, Subsystem::Topology),
                &mut subsystem_rng(ts, Subsystem::Selection),
            )?;
            let h = lift_round(&cfg, &round, &mut subsystem_rng(ts, Subsystem::Lifting))?;
            for row in round.base.to_dense() {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                println!("{}", line.join(" "));
            }
            for w in &round.warnings {
                eprintln!("warning: {w}");
            }
            let dir = cfg.out.clone().unwrap_or_else(default_out_dir);
            std::fs::create_dir_all(&dir)?;
            let alist = dir.join("H.alist");
            write_alist(h.matrix(), std::io::BufWriter::new(std::fs::File::create(&alist)?))?;
            let headers: String = round.headers.iter().map(|h| format!("{h:x}\n")).collect();
            std::fs::write(dir.join("headers.hex"), headers)?;
            println!("girth {}", girth(h.matrix()));
            eprintln!("wrote {} and {}", alist.display(), dir.join("headers.hex").display());
        }
        Cmd::Girth { alist } => {
            let h = read_alist(std::io::BufReader::new(std::fs::File::open(&alist)?))?;
            println!("{}", girth(&h));
        }
        Cmd::Simulate(a) => {
            let cfg = a.load()?;
            if cfg.seed.is_none() {
                return Err(gancc::Error::Config("simulate needs --seed".into()));
            }
            let res = run_sweep(&cfg)?;
            emit(&out_path(&cfg, &format!("{}.csv", cfg.scheme)), &res.to_csv(true))?;
        }
        Cmd::De(a) => {
            let cfg = a.load()?;
            let mut text = String::from("ensemble,D,m,snr_db,samples,iterations,p_e\n");
            for (snr, pe) in de_curve(&cfg)? {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{:.6e}\n",
                    cfg.ensemble, cfg.degree, cfg.m, snr, cfg.de_samples, cfg.de_iters, pe
                ));
            }
            emit(&out_path(&cfg, &format!("de_{}.csv", cfg.ensemble)), &text)?;
        }
        Cmd::Compare(a) => {
            let cfg = a.load()?;
            let cmp = compare_de(&cfg)?;
            emit(&out_path(&cfg, &format!("compare_{}.csv", cfg.scheme)), &cmp.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
