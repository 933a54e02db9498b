mod appendix;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use splinenet::iga::{solve_heat_problem, HeatProblem, ScalarField};
use splinenet::nn::Mlp;
use splinenet::training::{
    compare_networks, generate_coeff_dataset, generate_direct_dataset, predict_field_from_coeffs, train_method,
    DirectField, ExperimentConfig, Method, PinnField, TrainReport,
};

use output::{write_atomic, write_with};

#[derive(Parser)]
#[command(name = "splinenet", version, about = "B-spline heat solver and neural surrogates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Coeff,
    Direct,
    Pinn,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Coeff => Method::Coeff,
            MethodArg::Direct => Method::Direct,
            MethodArg::Pinn => Method::Pinn,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    A,
    B,
    C,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (TOML); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override every training seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the training and held-out problems and write the datasets.
    Dataset {
        #[command(flatten)]
        common: Common,
    },
    /// Train one surrogate and write its model, report and loss curve.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: MethodArg,
    },
    /// Score a saved model on the held-out values.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Model JSON written by `train`.
        #[arg(long)]
        model: PathBuf,
    },
    /// Train all three surrogates and write the comparison table, loss curves and error heatmaps.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Skip the SVG heatmaps.
        #[arg(long)]
        no_heatmaps: bool,
    },
    /// Run a one-dimensional worked example and print its diagnostics.
    Appendix {
        #[arg(value_enum)]
        which: Which,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dataset { common } => {
            let (config, out) = load(&common)?;
            cmd_dataset(&config, &out)
        }
        Command::Train { common, method } => {
            let (config, out) = load(&common)?;
            cmd_train(&config, method.into(), &out).map(|_| ())
        }
        Command::Eval { common, model } => {
            let (config, out) = load(&common)?;
            cmd_eval(&config, &model, &out)
        }
        Command::Compare { common, no_heatmaps } => {
            let (config, out) = load(&common)?;
            cmd_compare(&config, &out, !no_heatmaps)
        }
        Command::Appendix { which } => match which {
            Which::A => appendix::run_a(),
            Which::B => appendix::run_b(),
            Which::C => appendix::run_c(),
        },
    }
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config = config.with_seed(seed);
    }
    if let Some(out) = &common.out {
        config.out_dir = out.display().to_string();
    }
    config.validate()?;
    let out = PathBuf::from(&config.out_dir);
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_atomic(&out.join("config.toml"), config.to_toml()?.as_bytes())?;
    Ok((config, out))
}

fn cmd_dataset(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let problem = config.heat_problem()?;
    let (train_n, test_n) = config.split()?;
    for (name, ns) in [("train", &train_n), ("test", &test_n)] {
        let coeff = generate_coeff_dataset(&problem, ns).with_context(|| format!("solving the {name} problems"))?;
        write_with(&out.join(format!("coeff_{name}.csv")), |w| coeff.write_csv(w))?;
    }
    let direct = generate_direct_dataset(&problem, &train_n, config.sampling.direct_grid)?;
    write_with(&out.join("direct_train.csv"), |w| direct.write_csv(w))?;
    println!(
        "wrote {} training and {} held-out problems ({} coefficients each, {} direct samples) to {}",
        train_n.len(),
        test_n.len(),
        problem.dof_count(),
        direct.len(),
        out.display()
    );
    Ok(())
}

fn cmd_train(config: &ExperimentConfig, method: Method, out: &Path) -> Result<(Mlp, TrainReport)> {
    let (net, report) = train_method(config, method).with_context(|| format!("training the {method} net"))?;
    write_atomic(&out.join(format!("{method}_model.json")), net.to_json()?.as_bytes())?;
    write_atomic(&out.join(format!("{method}_report.json")), report.to_json()?.as_bytes())?;
    write_with(&out.join(format!("{method}_loss.csv")), |w| report.write_loss_csv(w))?;
    println!(
        "{method}: {} epochs, final loss {:.3e}, held-out {:.3e}, {:.1} s",
        report.epochs_run,
        report.final_train_mse,
        report.final_test_mse.unwrap_or(f64::NAN),
        report.train_seconds
    );
    Ok((net, report))
}

fn cmd_eval(config: &ExperimentConfig, model: &Path, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(model).with_context(|| format!("reading {}", model.display()))?;
    let net = Mlp::from_json(&text).with_context(|| format!("parsing {}", model.display()))?;
    let method = Method::of_network(&net, config)?;
    let table = compare_networks(config, &[(method, &net, 0.0)])?;
    write_with(&out.join(format!("{method}_metrics.csv")), |w| table.write_csv(w, false))?;
    for r in table.summary() {
        println!("{}: mean pointwise mse {:.3e}", r.method, r.pointwise_mse);
    }
    Ok(())
}

fn cmd_compare(config: &ExperimentConfig, out: &Path, heatmaps: bool) -> Result<()> {
    let mut trained = Vec::new();
    for method in Method::ALL {
        let (net, report) = cmd_train(config, method, out)?;
        trained.push((method, net, report.train_seconds));
    }
    let nets: Vec<(Method, &Mlp, f64)> = trained.iter().map(|(m, n, s)| (*m, n, *s)).collect();
    let table = compare_networks(config, &nets)?;
    write_with(&out.join("comparison.csv"), |w| table.write_csv(w, true))?;
    println!("method,mean pointwise mse,coefficient mse,train seconds");
    for r in table.summary() {
        let c = r.coeff_mse.map_or_else(|| "-".into(), |c| format!("{c:.3e}"));
        println!("{},{:.3e},{c},{:.1}", r.method, r.pointwise_mse, r.train_seconds);
    }
    if heatmaps {
        let problem = config.heat_problem()?;
        let (_, test_n) = config.split()?;
        let grid = config.sampling.eval_grid;
        for (method, net, _) in &trained {
            let (n, reference) = match method {
                Method::Pinn => (config.pinn.n, config.reference_problem()?),
                _ => (test_n[0], problem.with_n(test_n[0])),
            };
            let field: Box<dyn ScalarField> = match method {
                Method::Coeff => Box::new(predict_field_from_coeffs(net, n, &problem)?),
                Method::Direct => Box::new(DirectField { net, n }),
                Method::Pinn => Box::new(PinnField(net)),
            };
            let svg = error_heatmap(field.as_ref(), &reference, grid, &format!("|u_{method} - u_iga| at n = {n}"))?;
            write_atomic(&out.join(format!("{method}_error.svg")), svg.as_bytes())?;
        }
    }
    Ok(())
}

fn error_heatmap(field: &dyn ScalarField, reference: &HeatProblem, grid: usize, title: &str) -> Result<String> {
    let solved = solve_heat_problem(reference)?;
    let mut err = Vec::with_capacity(grid * grid);
    for (x, y) in splinenet::iga::lshape_grid(grid, grid) {
        err.push((x, y, (field.value(x, y)? - solved.eval(x, y)?).abs()));
    }
    Ok(svg::heatmap(&err, grid, title))
}
