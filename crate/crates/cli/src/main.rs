mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use msconformal::aggregate::{leftskewed_params, per_split_level};
use msconformal::bench::{
    load_crime_dataset, run_experiment, simulate_coverage, summarize, summary_json, write_records_csv,
    write_summary_csv, CrimeOptions, ExperimentConfig, LinearGaussianDgp, Method, SimMethod, CRIME_RESPONSE,
};
use msconformal::crossconf::cross_conformal_predictor;
use msconformal::dataset::read_query_csv;
use msconformal::learners::singular_value_penalty;
use msconformal::split::make_split_plans;
use msconformal::{
    CalibratedSplit, Dataset, Error, Execution, LeaveOneOut, MultiSplitConfig, MultiSplitPredictor, PredictionSet,
    ResponseColumn, Result, ScoreSpec,
};
use serde_json::json;

use args::{Cli, Command, DataArgs, MultisplitArgs, PredictArgs, Preset, ScoreArgs, ScoreKind, SimKind, SimulateArgs};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("invalid arguments");
                    eprintln!("msconf: {} (see --help)", first.trim_start_matches("error: "));
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msconf: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let exec = execution(cli.threads)?;
    match cli.command {
        Command::Predict(a) => predict(&a, exec),
        Command::Multisplit(a) => multisplit(&a, exec),
        Command::Crossconf(a) => crossconf(&a, exec),
        Command::Loo(a) => leave_one_out(&a, exec, false),
        Command::Jackknife(a) => leave_one_out(&a, exec, true),
        Command::Experiment(a) => experiment(&a, exec),
        Command::Simulate(a) => simulate(&a, exec),
    }
}

fn execution(threads: Option<usize>) -> Result<Execution> {
    match threads {
        None => Ok(Execution::Parallel),
        Some(0) => Err(Error::Parameter {
            name: "threads",
            message: "must be at least 1".into(),
        }),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Numerical(format!("cannot start thread pool: {e}")))?;
            Ok(Execution::Parallel)
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "alpha",
            message: format!("must lie strictly between 0 and 1, got {alpha}"),
        })
    }
}

fn threshold(tau: f64, lambda: usize, preset: Option<Preset>, splits: usize) -> (f64, usize) {
    match preset {
        Some(Preset::Leftskewed) => leftskewed_params(splits),
        None => (tau, lambda),
    }
}

/// Checks the score flags that do not depend on the data.
fn check_score(args: &ScoreArgs) -> Result<()> {
    let probe = match args.score {
        ScoreKind::Residual => ScoreSpec::residual(args.penalty.unwrap_or(0.0)),
        ScoreKind::Cqr => ScoreSpec::Cqr {
            gamma: args.gamma,
            k: args.knn_k,
        },
    };
    probe.validate()?;
    if !(args.ridge_factor >= 0.0 && args.ridge_factor.is_finite()) {
        return Err(Error::Parameter {
            name: "ridge-factor",
            message: format!("must be finite and non-negative, got {}", args.ridge_factor),
        });
    }
    Ok(())
}

fn score_spec(args: &ScoreArgs, data: &Dataset) -> ScoreSpec {
    match args.score {
        ScoreKind::Residual => {
            let all: Vec<usize> = (0..data.len()).collect();
            let penalty = args
                .penalty
                .unwrap_or_else(|| singular_value_penalty(data, &all, args.ridge_factor));
            ScoreSpec::residual(penalty)
        }
        ScoreKind::Cqr => ScoreSpec::Cqr {
            gamma: args.gamma,
            k: args.knn_k,
        },
    }
}

fn load_inputs(args: &DataArgs) -> Result<(Dataset, Vec<Vec<f64>>)> {
    let data = if args.crime || args.strict_crime {
        let opts = CrimeOptions {
            response: args.response_col.clone().unwrap_or_else(|| CRIME_RESPONSE.to_string()),
            strict: args.strict_crime,
            ..CrimeOptions::default()
        };
        load_crime_dataset(&args.data, &opts)?
    } else {
        let col = args.response_col.as_deref().unwrap_or("y");
        Dataset::from_csv_path(&args.data, &ResponseColumn::from(col))?
    };
    let names = data.column_names().expect("CSV loaders name columns").to_vec();
    let queries = read_query_csv(&args.query, &names)?;
    Ok((data, queries))
}

fn default_m(m: Option<usize>, n: usize) -> usize {
    m.unwrap_or((n / 2).max(1))
}

fn write_sets<F>(out: Option<&Path>, queries: &[Vec<f64>], mut predict: F) -> Result<()>
where
    F: FnMut(&[f64]) -> Result<PredictionSet>,
{
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    let io_err = |source| Error::Io {
        path: out.map(Path::to_path_buf).unwrap_or_else(|| "<stdout>".into()),
        source,
    };
    for (i, x) in queries.iter().enumerate() {
        let set = predict(x)?;
        let line = json!({ "query_index": i, "intervals": set.to_json() });
        writeln!(sink, "{line}").map_err(io_err)?;
    }
    sink.flush().map_err(io_err)
}

fn predict(a: &PredictArgs, _exec: Execution) -> Result<()> {
    check_alpha(a.alpha)?;
    check_score(&a.score)?;
    let (data, queries) = load_inputs(&a.data)?;
    let spec = score_spec(&a.score, &data);
    let plan = &make_split_plans(data.len(), default_m(a.m, data.len()), 1, a.seed)?[0];
    let split = CalibratedSplit::calibrate(&data, plan, &spec)?;
    write_sets(a.data.out.as_deref(), &queries, |x| Ok(split.predict(x, a.alpha)?.set))
}

fn multisplit(a: &MultisplitArgs, exec: Execution) -> Result<()> {
    check_alpha(a.alpha)?;
    check_score(&a.score)?;
    let (tau, lambda) = threshold(a.tau, a.lambda, a.preset, a.b);
    per_split_level(a.alpha, tau, lambda, a.b)?;
    let (data, queries) = load_inputs(&a.data)?;
    let spec = score_spec(&a.score, &data);
    let config = MultiSplitConfig::homogeneous(a.b, default_m(a.m, data.len()), spec, tau, lambda, a.alpha, a.seed);
    let predictor = MultiSplitPredictor::calibrate(&data, &config, exec)?;
    write_sets(a.data.out.as_deref(), &queries, |x| predictor.predict(x))
}

fn crossconf(a: &MultisplitArgs, exec: Execution) -> Result<()> {
    check_alpha(a.alpha)?;
    check_score(&a.score)?;
    if a.m.is_some() {
        return Err(Error::Parameter {
            name: "m",
            message: "crossconf calibrates on folds; use --b to set the fold count".into(),
        });
    }
    let (tau, lambda) = threshold(a.tau, a.lambda, a.preset, a.b);
    per_split_level(a.alpha, tau, lambda, a.b)?;
    let (data, queries) = load_inputs(&a.data)?;
    let spec = score_spec(&a.score, &data);
    let predictor = cross_conformal_predictor(&data, a.b, &spec, a.alpha, tau, lambda, a.seed, exec)?;
    write_sets(a.data.out.as_deref(), &queries, |x| predictor.predict(x))
}

fn leave_one_out(a: &PredictArgs, exec: Execution, jackknife: bool) -> Result<()> {
    check_alpha(a.alpha)?;
    check_score(&a.score)?;
    if jackknife && a.score.score == ScoreKind::Cqr {
        return Err(Error::Parameter {
            name: "score",
            message: "jackknife+ requires --score residual".into(),
        });
    }
    let (data, queries) = load_inputs(&a.data)?;
    let spec = score_spec(&a.score, &data);
    let loo = LeaveOneOut::fit(&data, &spec, exec)?;
    write_sets(a.data.out.as_deref(), &queries, |x| {
        if jackknife {
            loo.jackknife_plus(x, a.alpha)
        } else {
            loo.loo_set(x, a.alpha)
        }
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn experiment(a: &args::ExperimentArgs, exec: Execution) -> Result<()> {
    let methods = match &a.methods {
        Some(names) => names
            .iter()
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<Method>>>()?,
        None => Method::reference_set(),
    };
    let config = ExperimentConfig {
        dataset_path: a.data.clone(),
        crime: CrimeOptions {
            response: a.response_col.clone(),
            strict: a.strict_crime,
            ..CrimeOptions::default()
        },
        n_train: a.n_train,
        alpha: a.alpha,
        splits: a.b,
        m: a.m,
        replications: a.reps,
        methods,
        seed: a.seed,
        standardize: !a.no_standardize,
        ridge_factor: a.ridge_factor,
    };
    // everything except the dataset row count can be checked up front
    config.validate(usize::MAX)?;
    std::fs::create_dir_all(&a.out).map_err(|source| Error::Io {
        path: a.out.clone(),
        source,
    })?;
    let records = run_experiment(&config, exec)?;
    write_records_csv(&records, create(&a.out.join("records.csv"))?)?;
    let rows = summarize(&records)?;
    write_summary_csv(&rows, create(&a.out.join("summary.csv"))?)?;
    let json_path = a.out.join("summary.json");
    let mut json_out = create(&json_path)?;
    let io_err = |source| Error::Io {
        path: json_path.clone(),
        source,
    };
    serde_json::to_writer_pretty(&mut json_out, &summary_json(&rows))?;
    writeln!(json_out).and_then(|_| json_out.flush()).map_err(io_err)?;

    println!("{:<22} {:>9} {:>9} {:>9}", "method", "coverage", "width", "failures");
    for r in &rows {
        println!(
            "{:<22} {:>9.4} {:>9.4} {:>9}",
            r.method, r.coverage.mean, r.width.mean, r.failures
        );
    }
    Ok(())
}

fn simulate(a: &SimulateArgs, exec: Execution) -> Result<()> {
    check_alpha(a.alpha)?;
    let (tau, lambda) = threshold(a.tau, a.lambda, a.preset, a.b);
    let method = match a.method {
        SimKind::Single => SimMethod::Single { m: a.m },
        SimKind::Multisplit => SimMethod::MultiSplit {
            splits: a.b,
            m: a.m,
            tau,
            lambda,
        },
        SimKind::Crossconf => SimMethod::CrossConformal {
            folds: a.b,
            tau,
            lambda,
        },
        SimKind::Loo => SimMethod::LeaveOneOut,
        SimKind::Jackknife => SimMethod::JackknifePlus,
    };
    if matches!(a.method, SimKind::Multisplit | SimKind::Crossconf) {
        per_split_level(a.alpha, tau, lambda, a.b)?;
    }
    if matches!(a.method, SimKind::Single | SimKind::Multisplit) && a.m >= a.n {
        return Err(Error::Size(format!("m must be below n, got m={} with n={}", a.m, a.n)));
    }
    let dgp = LinearGaussianDgp::new(a.d, a.n, a.noise_sd, a.seed);
    let est = simulate_coverage(&dgp, &method, a.alpha, a.reps, a.seed, exec)?;
    let name = format!("{:?}", a.method).to_lowercase();
    println!(
        "{name}: coverage {:.4} ± {:.4} (reps {}, nominal {:.4}, mean width {:.4})",
        est.coverage,
        est.std_error,
        est.reps,
        1.0 - a.alpha,
        est.mean_width
    );
    if let Some(path) = &a.out {
        let mut w = create(path)?;
        let io_err = |source| Error::Io {
            path: path.clone(),
            source,
        };
        writeln!(w, "method,coverage,std_error,reps,mean_width")
            .and_then(|_| {
                writeln!(
                    w,
                    "{name},{},{},{},{}",
                    est.coverage, est.std_error, est.reps, est.mean_width
                )
            })
            .and_then(|_| w.flush())
            .map_err(io_err)?;
    }
    Ok(())
}
