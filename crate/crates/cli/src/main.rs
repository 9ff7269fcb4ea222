//! Command-line front end: exact map enumeration, Schwinger-Dyson solving,
//! free energies, finite-N sampling, the N = 1 quadrature oracle, and the
//! cross-validation suites.

mod config;

use clap::{Parser, Subcommand};
use config::{EnsembleFile, PotentialFile};
use genusexp::mapenum;
use genusexp::matmodel::{self, ChainOptions, ConvexityInput};
use genusexp::ncpoly::Monomial;
use genusexp::scalar::{rat_to_f64, CRat};
use genusexp::sdsolver::Solver;
use genusexp::series::MultiIndex;
use genusexp::TruncatedSeries;
use std::fmt::Write as _;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "genusexp",
    about = "Genus expansion of perturbed-GUE multi-matrix models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count connected maps by genus and star multiplicities
    Enumerate {
        #[arg(long)]
        potential: String,
        /// root word, digits of color indices ("" for the unit)
        #[arg(long, default_value = "")]
        root: String,
        #[arg(long, default_value_t = 1)]
        gmax: usize,
        #[arg(long, default_value_t = 2)]
        kmax: u32,
        #[arg(long, default_value_t = mapenum::DEFAULT_BUDGET)]
        budget: u64,
        /// output CSV path (stdout when absent)
        #[arg(long)]
        out: Option<String>,
        /// also dump connected-diagram pairings as JSON
        #[arg(long)]
        diagrams: Option<String>,
    },
    /// Solve the Schwinger-Dyson hierarchy to a t-order
    Solve {
        #[arg(long)]
        potential: String,
        #[arg(long, default_value_t = 3)]
        k_order: u32,
        #[arg(long)]
        d_cap: Option<usize>,
        #[arg(long, default_value_t = 1)]
        gmax: usize,
        #[arg(long, default_value_t = 1)]
        lmax: usize,
        /// tabulate moments for all words up to this degree
        #[arg(long, default_value_t = 4)]
        deg_max: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Per-genus free-energy coefficient tables
    FreeEnergy {
        #[arg(long)]
        potential: String,
        #[arg(long, default_value_t = 3)]
        k_order: u32,
        #[arg(long, default_value_t = 1)]
        gmax: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Sample the finite-N ensembles and compare with the solver
    Simulate {
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: Option<String>,
        /// JSON comparison report against the solver / exact moments
        #[arg(long)]
        report: Option<String>,
    },
    /// Exact N = 1 quadrature oracle
    Quadrature {
        #[arg(long)]
        config: String,
        /// observable word to integrate
        #[arg(long)]
        observable: Option<String>,
        /// word P for the Schwinger-Dyson residual check
        #[arg(long)]
        sd_check: Option<String>,
        #[arg(long, default_value_t = 1)]
        color: u8,
    },
    /// Cross-validation suites (exit code 2 on failure)
    Check {
        /// oracle | residual | gue | all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[arg(long, default_value_t = 4)]
        deg_max: usize,
        #[arg(long, default_value_t = 1)]
        gmax: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: &Option<String>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            std::fs::write(path, content).map_err(|e| format!("cannot write {path}: {e}"))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn fmt_k(k: &MultiIndex) -> String {
    let parts: Vec<String> = k.0.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(";"))
}

fn fmt_coeff(c: &CRat) -> String {
    if c.is_real() {
        format!("{}", c.re)
    } else {
        format!("{c}")
    }
}

fn series_rows(genus: usize, s: &TruncatedSeries) -> String {
    let mut out = String::new();
    for (k, c) in &s.terms {
        let _ = writeln!(out, "{genus},{},{}", fmt_k(k), fmt_coeff(c));
    }
    out
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Enumerate {
            potential,
            root,
            gmax,
            kmax,
            budget,
            out,
            diagrams,
        } => {
            let pf = PotentialFile::load(&potential)?;
            let v = pf.to_potential()?;
            let root_word = Monomial::parse(&root, pf.m).map_err(|e| e.to_string())?;
            let table = mapenum::CountTable::build(Some(&root_word), &v, gmax, kmax, budget)
                .map_err(|e| e.to_string())?;
            let mut csv = String::from("genus,k,count\n");
            for ((g, k), count) in &table.counts {
                let _ = writeln!(csv, "{g},{},{count}", fmt_k(k));
            }
            emit(&out, &csv)?;
            if let Some(path) = diagrams {
                let mut all = Vec::new();
                for k in MultiIndex::all_up_to(v.n_terms(), kmax) {
                    let stars = mapenum::instantiate_stars(Some(&root_word), &k, &v);
                    mapenum::enumerate_with(&stars, budget, |pairing, comps, genus| {
                        if comps == 1 {
                            let pairs: Vec<[usize; 2]> = pairing
                                .iter()
                                .enumerate()
                                .filter(|&(a, &b)| a < b)
                                .map(|(a, &b)| [a, b])
                                .collect();
                            all.push(serde_json::json!({
                                "k": k.0,
                                "genus": genus,
                                "pairing": pairs,
                            }));
                        }
                    })
                    .map_err(|e| e.to_string())?;
                }
                let text = serde_json::to_string_pretty(&all).map_err(|e| e.to_string())?;
                std::fs::write(&path, text).map_err(|e| format!("cannot write {path}: {e}"))?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Solve {
            potential,
            k_order,
            d_cap,
            gmax,
            lmax,
            deg_max,
            out,
        } => {
            let pf = PotentialFile::load(&potential)?;
            let v = pf.to_potential()?;
            let d_cap =
                d_cap.unwrap_or(deg_max + k_order as usize * v.max_degree().saturating_sub(2));
            let mut solver = Solver::new(v, k_order, d_cap);
            let planar = solver.solve_planar(deg_max).map_err(|e| e.to_string())?;
            let mut tables = vec![planar];
            tables.extend(
                solver
                    .solve_genus(gmax, lmax, deg_max)
                    .map_err(|e| e.to_string())?,
            );
            let json: Vec<serde_json::Value> = tables
                .iter()
                .map(|t| {
                    let entries: Vec<serde_json::Value> = t
                        .entries
                        .iter()
                        .map(|(slots, series)| {
                            let coeffs: Vec<serde_json::Value> = series
                                .terms
                                .iter()
                                .map(
                                    |(k, c)| serde_json::json!({ "k": k.0, "value": fmt_coeff(c) }),
                                )
                                .collect();
                            serde_json::json!({
                                "slots": slots.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                                "coefficients": coeffs,
                            })
                        })
                        .collect();
                    serde_json::json!({ "genus": t.genus, "arity": t.arity, "entries": entries })
                })
                .collect();
            let text = serde_json::to_string_pretty(&serde_json::json!({
                "k_order": k_order,
                "tables": json,
            }))
            .map_err(|e| e.to_string())?
                + "\n";
            emit(&out, &text)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::FreeEnergy {
            potential,
            k_order,
            gmax,
            out,
        } => {
            let pf = PotentialFile::load(&potential)?;
            let v = pf.to_potential()?;
            let d_cap = v.max_degree() + k_order as usize * v.max_degree().saturating_sub(2) + 2;
            let mut solver = Solver::new(v, k_order, d_cap);
            let fs = solver.free_energy(gmax).map_err(|e| e.to_string())?;
            let mut csv = String::from("genus,k,coefficient\n");
            for f in &fs {
                csv.push_str(&series_rows(f.genus, &f.series));
            }
            emit(&out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Simulate {
            config,
            out,
            report,
        } => {
            let ef = EnsembleFile::load(&config)?;
            let words = ef.observable_words()?;
            let numeric = ef.numeric_potential()?;
            if !ef.override_convexity && !numeric.terms.is_empty() {
                let check =
                    matmodel::validate_convexity(&ConvexityInput::Raw(numeric.clone()), ef.c)
                        .map_err(|e| e.to_string())?;
                if !check.pass {
                    return Err(format!(
                        "convexity screen failed: {} (set override_convexity to proceed)",
                        check.witness.unwrap_or_default()
                    ));
                }
            }
            let mut csv = String::from("N,observable,mean,stderr\n");
            let mut rows = Vec::new();
            for &n in &ef.n_list {
                let cfg = ef.ensemble_for(n)?;
                let mut chains = Vec::new();
                for chain_id in 0..ef.chains as u64 {
                    let opts = ChainOptions {
                        steps: ef.steps,
                        burn_in: ef.burn_in,
                        step_size: ef.step_size,
                        thin: ef.thin,
                        chain_id,
                    };
                    chains.push(
                        matmodel::sample_chain(&cfg, &opts, &words).map_err(|e| e.to_string())?,
                    );
                }
                let merged = matmodel::merge_chain_stats(&chains).map_err(|e| e.to_string())?;
                for obs in &merged.observables {
                    let _ = writeln!(csv, "{n},{},{},{}", obs.word, obs.mean, obs.std_err);
                    rows.push((n, obs.word.clone(), obs.mean, obs.std_err));
                }
            }
            emit(&out, &csv)?;
            if let Some(path) = report {
                let text = simulate_report(&ef, &rows)?;
                std::fs::write(&path, text).map_err(|e| format!("cannot write {path}: {e}"))?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Quadrature {
            config,
            observable,
            sd_check,
            color,
        } => {
            let ef = EnsembleFile::load(&config)?;
            let v = ef.numeric_potential()?;
            if let Some(word) = observable {
                let w = Monomial::parse(&word, ef.m).map_err(|e| e.to_string())?;
                let val = matmodel::quadrature::expectation(&v, &w.0).map_err(|e| e.to_string())?;
                println!("E[{w}] = {val}");
            }
            if let Some(word) = sd_check {
                let w = Monomial::parse(&word, ef.m).map_err(|e| e.to_string())?;
                let res = matmodel::quadrature::sd_residual(&v, &w.0, color)
                    .map_err(|e| e.to_string())?;
                println!("SD residual at P = {w}, i = {color}: {res}");
                if res.abs() > 1e-8 {
                    return Ok(ExitCode::from(2));
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Check {
            suite,
            order,
            deg_max,
            gmax,
        } => {
            let mut all_pass = true;
            if suite == "oracle" || suite == "all" {
                all_pass &= check_oracle(order, deg_max, gmax)?;
            }
            if suite == "residual" || suite == "all" {
                all_pass &= check_residuals(order)?;
            }
            if suite == "gue" || suite == "all" {
                all_pass &= check_gue()?;
            }
            if all_pass {
                println!("all checks passed");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("CHECK FAILURES above");
                Ok(ExitCode::from(2))
            }
        }
    }
}

/// Solver (or exact GUE) prediction c0 + c1/N^2 for each reported row.
fn simulate_report(
    ef: &EnsembleFile,
    rows: &[(usize, Monomial, f64, f64)],
) -> Result<String, String> {
    let numeric = ef.numeric_potential()?;
    let mut solver = if numeric.terms.is_empty() {
        None
    } else {
        let pf = PotentialFile {
            m: ef.m,
            terms: ef
                .potential
                .iter()
                .map(|t| config::PotentialTermSpec {
                    word: t.word.clone(),
                    t: t.t.clone(),
                })
                .collect(),
        };
        let v = pf.to_potential()?;
        let k_order = 12;
        let d_cap = 8 + k_order as usize * v.max_degree().saturating_sub(2);
        let ts: Vec<f64> = numeric.terms.iter().map(|(t, _)| *t).collect();
        Some((Solver::new(v, k_order, d_cap), ts))
    };
    let mut predictions: Vec<serde_json::Value> = Vec::new();
    for (n, word, mean, se) in rows {
        let pred = match &mut solver {
            None => {
                let gue = mapenum::gue_moment_exact(word, mapenum::DEFAULT_BUDGET)
                    .map_err(|e| e.to_string())?;
                Some(rat_to_f64(&gue.eval(*n as u64)))
            }
            Some((solver, ts)) => match solver.moment_expansion(word, 1) {
                Ok(exp) => {
                    // one-variable series resum through Pade: the generating
                    // functions can be singular inside |t|, see matmodel::pade
                    let eval = |s: &TruncatedSeries| -> Option<f64> {
                        if ts.len() == 1 {
                            let coeffs: Vec<f64> = (0..=solver.k_order())
                                .map(|k| rat_to_f64(&s.coeff(&MultiIndex(vec![k])).re))
                                .collect();
                            matmodel::pade_eval_stable(&coeffs, ts[0])
                                .ok()
                                .map(|(v, _)| v)
                        } else {
                            Some(s.eval_f64(ts))
                        }
                    };
                    match (eval(&exp[0]), eval(&exp[1])) {
                        (Some(c0), Some(c1)) => Some(c0 + c1 / (*n as f64 * *n as f64)),
                        _ => None,
                    }
                }
                Err(_) => None,
            },
        };
        predictions.push(serde_json::json!({
            "N": n,
            "observable": word.to_string(),
            "mean": mean,
            "stderr": se,
            "prediction": pred,
            "sigmas": pred.map(|p| (mean - p) / se),
        }));
    }
    serde_json::to_string_pretty(&serde_json::json!({
        "seed": ef.seed,
        "chains": ef.chains,
        "steps": ef.steps,
        "rows": predictions,
    }))
    .map_err(|e| e.to_string())
}

fn check_oracle(order: u32, deg_max: usize, gmax: usize) -> Result<bool, String> {
    use genusexp::Potential;
    let mut pass = true;
    let cases: Vec<(&str, Potential)> = vec![
        (
            "V = t X^4",
            Potential::new(1, vec![Monomial(vec![1, 1, 1, 1])]).unwrap(),
        ),
        (
            "V = t X1X2X1X2",
            Potential::new(2, vec![Monomial(vec![1, 2, 1, 2])]).unwrap(),
        ),
    ];
    for (name, v) in cases {
        let d_cap = deg_max + order as usize * v.max_degree().saturating_sub(2) + 2;
        let mut solver = Solver::new(v.clone(), order, d_cap);
        let mut ok = true;
        'words: for word in Solver::word_basis(v.m, deg_max) {
            for g in 0..=gmax {
                if word.is_one() && g > 0 {
                    continue;
                }
                let series = solver.genus_moment(g, &word).map_err(|e| e.to_string())?;
                for k in MultiIndex::all_up_to(v.n_terms(), order) {
                    let count = mapenum::count_rooted(&word, &k, g, &v, mapenum::DEFAULT_BUDGET)
                        .map_err(|e| e.to_string())?;
                    let sign = if k.total() % 2 == 0 { 1i64 } else { -1 };
                    let expect = CRat::from_rat(
                        genusexp::scalar::rat_u64(count) * genusexp::scalar::rat_int(sign)
                            / k.factorial(),
                    );
                    if series.coeff(&k) != expect {
                        println!("FAIL oracle {name}: word {word} g {g} k {}", fmt_k(&k));
                        ok = false;
                        break 'words;
                    }
                }
            }
        }
        println!(
            "{} oracle suite {name} (deg <= {deg_max}, |k| <= {order}, g <= {gmax})",
            if ok { "PASS" } else { "FAIL" }
        );
        pass &= ok;
    }
    Ok(pass)
}

fn check_residuals(order: u32) -> Result<bool, String> {
    use genusexp::Potential;
    let v = Potential::new(1, vec![Monomial(vec![1, 1, 1, 1])]).unwrap();
    let mut solver = Solver::new(v, order, 12 + 2 * order as usize);
    let x2 = Monomial(vec![1, 1]);
    let x4 = Monomial(vec![1, 1, 1, 1]);
    let cases: Vec<(usize, Vec<Monomial>)> = vec![
        (1, vec![x2.clone()]),
        (1, vec![x2.clone(), x2.clone()]),
        (2, vec![x4.clone(), x2.clone(), x2.clone()]),
    ];
    let mut pass = true;
    for (g, slots) in cases {
        let r = solver
            .limit_equation_residual(g, &slots)
            .map_err(|e| e.to_string())?;
        let ok = r.is_zero();
        println!(
            "{} limit-equation residual g={g} arity={}",
            if ok { "PASS" } else { "FAIL" },
            slots.len()
        );
        pass &= ok;
    }
    Ok(pass)
}

fn check_gue() -> Result<bool, String> {
    let mut pass = true;
    for word in Solver::word_basis(2, 6) {
        if word.is_one() {
            continue;
        }
        let gue =
            mapenum::gue_moment_exact(&word, mapenum::DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let mut expect: u64 = 1;
        for c in 1..=2u8 {
            let n = word.0.iter().filter(|&&x| x == c).count();
            if n % 2 == 1 {
                expect = 0;
                break;
            }
            let mut f = 1u64;
            let mut k = n as u64;
            while k > 1 {
                f *= k - 1;
                k -= 2;
            }
            expect *= f;
        }
        if gue.pairing_total() != expect {
            println!("FAIL gue pairing total for {word}");
            pass = false;
        }
    }
    println!(
        "{} gue pairing totals (words <= 6 letters)",
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(pass)
}
