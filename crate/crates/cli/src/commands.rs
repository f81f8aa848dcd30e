use std::time::Instant;

use serde::Serialize;
use starode::linalg::{numerical_bandwidth, trailing_bandwidth};
use starode::oracle::error_report;
use starode::solver::{solution_matrix, trailing_window, Generator, SolveWarning};
use starode::{basis_matrix, coeff_matrix, parse, solve_ode, SolveConfig, SolveError};

use crate::output::{float, prepare_dir, write_csv, write_json};
use crate::{BasisArgs, CliError, RunArgs};

#[derive(Debug, Serialize)]
struct Timings {
    fit: f64,
    assemble: f64,
    solve: f64,
    bandwidth: f64,
    oracle: f64,
    total: f64,
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct Report {
    function: String,
    M: usize,
    N: usize,
    K: usize,
    L: usize,
    residual: f64,
    rhs_norm: f64,
    fit_tol: f64,
    band_eps: f64,
    grid: usize,
    f_bandwidth: usize,
    solution_band: usize,
    resolvent_bandwidth: Option<usize>,
    max_coeff_error_trusted: f64,
    inf_err_at_L: f64,
    warnings: Vec<String>,
    timings: Timings,
}

fn config(args: &RunArgs) -> Result<SolveConfig, CliError> {
    if args.grid < 2 {
        return Err(CliError::Usage(format!("--grid must be at least 2, got {}", args.grid)));
    }
    let mut cfg = SolveConfig::new(args.basis_size);
    cfg.fit_tol = args.fit_tol;
    cfg.band_eps = args.band_eps;
    cfg.validate()?;
    Ok(cfg)
}

fn describe(w: &SolveWarning) -> String {
    match w {
        SolveWarning::BasisBelowGenerator { basis_size, n_terms } => {
            format!("basis size {basis_size} is below the generator length {n_terms}")
        }
        SolveWarning::NoTrustedCoefficients => "no coefficient can be trusted at this basis size".into(),
    }
}

pub fn solve(args: &RunArgs) -> Result<(), CliError> {
    let expr = parse(&args.function)?;
    let cfg = config(args)?;
    prepare_dir(&args.out)?;

    let r = solve_ode(&expr, &cfg)?;
    let clock = Instant::now();
    let errors = error_report(&r, &r.generator, args.grid).map_err(SolveError::from)?;
    let oracle_time = clock.elapsed().as_secs_f64();
    for w in &r.warnings {
        eprintln!("warning: {}", describe(w));
    }

    let report = Report {
        function: args.function.clone(),
        M: r.basis_size,
        N: r.n_terms,
        K: r.k,
        L: r.l,
        residual: r.residual,
        rhs_norm: r.rhs_norm,
        fit_tol: cfg.fit_tol,
        band_eps: cfg.band_eps,
        grid: args.grid,
        f_bandwidth: r.f_bandwidth,
        solution_band: r.solution_band,
        resolvent_bandwidth: r.resolvent_bandwidth,
        max_coeff_error_trusted: errors.max_coeff_error(r.l + 1),
        inf_err_at_L: errors.inf_norm_error[r.l],
        warnings: r.warnings.iter().map(describe).collect(),
        timings: Timings {
            fit: r.timings.fit,
            assemble: r.timings.assemble,
            solve: r.timings.solve,
            bandwidth: r.timings.bandwidth,
            oracle: oracle_time,
            total: r.timings.total() + oracle_time,
        },
    };
    write_json(&args.out.join("report.json"), &report)?;

    let oracle = errors.oracle.coeffs();
    write_csv(
        &args.out.join("coeffs.csv"),
        Some(&["k", "abs_u", "abs_u_oracle", "abs_diff"]),
        r.u.coeffs().iter().enumerate().map(|(k, u)| {
            vec![
                k.to_string(),
                float(u.norm()),
                float(oracle[k].norm()),
                float(errors.coeff_errors[k]),
            ]
        }),
    )?;
    write_csv(
        &args.out.join("error.csv"),
        Some(&["n", "inf_err"]),
        errors
            .inf_norm_error
            .iter()
            .enumerate()
            .map(|(n, e)| vec![n.to_string(), float(*e)]),
    )?;

    println!("N = {}, K = {}, L = {}, residual = {:.3e}", r.n_terms, r.k, r.l, r.residual);
    Ok(())
}

pub fn matrix(args: &RunArgs) -> Result<(), CliError> {
    let expr = parse(&args.function)?;
    let cfg = config(args)?;
    prepare_dir(&args.out)?;

    let opts = starode::legendre::FitOptions {
        tol: cfg.fit_tol,
        max_degree: cfg.max_degree,
    };
    let series = Generator::from(&expr).to_series(opts)?;
    let f = coeff_matrix(&series, cfg.basis_size);
    let u = solution_matrix(&f)?;
    let fd = f.to_dense();
    let eps = cfg.band_eps;

    let pattern = |m: &nalgebra::DMatrix<num_complex::Complex64>| -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)].norm() > eps {
                    rows.push(vec![i.to_string(), j.to_string()]);
                }
            }
        }
        rows
    };
    write_csv(&args.out.join("sparsity_F.csv"), Some(&["i", "j"]), pattern(&fd))?;
    write_csv(&args.out.join("sparsity_U.csv"), Some(&["i", "j"]), pattern(&u))?;

    println!("N = {}", series.len());
    println!("F bandwidth = {}", numerical_bandwidth(&fd, eps));
    println!("U bandwidth = {}", numerical_bandwidth(&u, eps));
    println!(
        "U trailing bandwidth = {}",
        trailing_bandwidth(&u, eps, trailing_window(cfg.basis_size))
    );
    Ok(())
}

pub fn basis(args: &BasisArgs) -> Result<(), CliError> {
    if args.basis_size == 0 {
        return Err(CliError::Usage("--M must be at least 1".into()));
    }
    prepare_dir(&args.out)?;
    let b = basis_matrix(args.degree, args.basis_size);
    let m = args.basis_size;
    let name = format!("basis_d{}_M{}.csv", args.degree, m);
    write_csv(
        &args.out.join(&name),
        None,
        (0..m).map(|k| (0..m).map(|l| float(b.get(k, l))).collect()),
    )?;
    println!("{}", args.out.join(name).display());
    Ok(())
}
