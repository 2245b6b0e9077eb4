use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use wnlw_core::random::{truncated_data, GaussianDraw, InitialData};
use wnlw_core::renorm::solve_cn;
use wnlw_core::solver::{enhanced_for_solver, solve_full, solve_w, EquationVariant, Trajectory};
use wnlw_core::spectral::dump::{write_series, SeriesRecord};
use wnlw_core::stats::{mean_se, median, second_moment_se};
use wnlw_core::stochastic::{
    pointwise_samples, wick_cube_to, z1_at, EnhancedDataSet, EnhancedOptions, ObjectSelector, WaveModel,
};
use wnlw_experiments::checks::{default_regularities, run_stochastic_checks, CheckRow};
use wnlw_experiments::output::{write_outputs, Manifest};
use wnlw_experiments::{analysis, convergence, triviality, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "wnlw", version, about = "Random data cubic wave experiments on the 3-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// flat JSON configuration; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    /// largest cutoff; ladders run over powers of two from 4 up to it
    #[arg(long)]
    nmax: Option<u32>,
    /// final time (dt follows as T/256 unless given)
    #[arg(long = "T")]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// ensemble size
    #[arg(long)]
    seeds: Option<usize>,
    /// master seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// residual_w, full_renormalized, full_unrenormalized_reformulated,
    /// renormalized_modified, linear or deterministic_cubic
    #[arg(long)]
    variant: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(a) = self.alpha {
            c.alpha = a;
        }
        if let Some(n) = self.nmax {
            c.n_ladder = std::iter::successors(Some(4u32), |k| Some(k * 2)).take_while(|k| *k <= n).collect();
            if c.n_ladder.is_empty() {
                c.n_ladder = vec![n];
            }
        }
        if let Some(t) = self.t_final {
            c.dt = self.dt.unwrap_or(t / 256.0);
            c.t_final = t;
        } else if let Some(dt) = self.dt {
            c.dt = dt;
        }
        if let Some(s) = self.seeds {
            c.sample_count = s;
        }
        if let Some(s) = self.seed {
            c.master_seed = s;
        }
        if let Some(o) = &self.out {
            c.out_dir = o.clone();
        }
        if let Some(v) = &self.variant {
            c.variant = EquationVariant::parse(v)?;
        }
        Ok(c)
    }

    fn cutoff(&self, c: &ExperimentConfig) -> u32 {
        self.nmax.unwrap_or_else(|| c.top())
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Stochastic,
    Analysis,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// sigma_N, alpha_N, C_N and R_N for N = 0..=nmax
    Renorm(Common),
    /// Gaussian coefficients and truncated data for one seed
    Sample(Common),
    /// variances and norms of z1, Z2, Z3 along the ladder
    Objects {
        #[command(flatten)]
        common: Common,
        /// also dump the enhanced data of the master seed at nmax
        #[arg(long)]
        dump: bool,
    },
    /// one trajectory of the selected equation
    Solve(Common),
    /// coupled-seed convergence ladder of the renormalised equation
    Converge {
        #[command(flatten)]
        common: Common,
        /// also solve through z1 + z2 + w and record the discrepancy
        #[arg(long)]
        cross_check: bool,
    },
    /// pairings of un-renormalised and renormalised solutions
    Triviality(Common),
    /// Monte Carlo and analysis checks
    Checks {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
}

#[derive(Serialize)]
struct RenormRow {
    #[serde(rename = "N")]
    n: u32,
    sigma: f64,
    #[serde(rename = "alpha_N")]
    alpha_n: f64,
    #[serde(rename = "C_N")]
    c_n: f64,
    #[serde(rename = "R_N")]
    r_n: f64,
}

#[derive(Serialize)]
struct ObjectRow {
    #[serde(rename = "N")]
    n: u32,
    j: u32,
    exact_variance: f64,
    mc_variance: f64,
    stderr: f64,
    s: f64,
    norm_mean: f64,
    norm_stderr: f64,
    norm_median: f64,
}

#[derive(Serialize)]
struct NormRow {
    t: f64,
    hs_norm: f64,
    l2_norm: f64,
}

#[derive(Serialize)]
struct GapRow {
    seed: u64,
    #[serde(rename = "N")]
    n: u32,
    gap: f64,
}

fn dump(path: &Path, records: &[SeriesRecord]) -> Result<()> {
    let bx = records[0].fields[0].frequency_box();
    let mut w = BufWriter::new(File::create(path)?);
    write_series(&mut w, bx, records)?;
    Ok(())
}

fn renorm(common: &Common) -> Result<()> {
    let cfg = common.resolve()?;
    let top = common.nmax.unwrap_or(64);
    let rows = (0..=top)
        .map(|n| {
            let rc = solve_cn(cfg.alpha, n)?;
            Ok(RenormRow {
                n,
                sigma: rc.sigma_n,
                alpha_n: rc.alpha_n,
                c_n: rc.c_n,
                r_n: rc.r_n,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_outputs(&cfg.out_dir, Manifest::new("renorm", &cfg, vec![]), &[("renorm.csv", &rows)])?;
    Ok(())
}

fn sample(common: &Common) -> Result<()> {
    let cfg = common.resolve()?;
    let n = common.cutoff(&cfg);
    let draw = GaussianDraw::sample(cfg.master_seed, n);
    let data = truncated_data(&draw, n, cfg.alpha)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    dump(
        &cfg.out_dir.join("draw.wnlw"),
        &[SeriesRecord {
            index: 0,
            time: 0.0,
            fields: vec![draw.g().clone(), draw.h().clone()],
        }],
    )?;
    dump(
        &cfg.out_dir.join("data.wnlw"),
        &[SeriesRecord {
            index: 0,
            time: 0.0,
            fields: vec![data.position, data.velocity],
        }],
    )?;
    let mut m = Manifest::new("sample", &cfg, vec![cfg.master_seed]);
    m.files = vec!["draw.wnlw".into(), "data.wnlw".into()];
    write_outputs(&cfg.out_dir, m, &[])?;
    Ok(())
}

fn objects(common: &Common, with_dump: bool) -> Result<()> {
    let cfg = common.resolve()?;
    let regs = default_regularities(cfg.alpha, cfg.regularity_offset);
    let (t, x) = (0.3, [0.1, 0.2, 0.3]);
    let mut rows = Vec::new();
    for &n in &cfg.n_ladder {
        let model = WaveModel::renormalized(cfg.alpha, n);
        let fields: Vec<[f64; 3]> = cfg
            .seeds()
            .iter()
            .map(|&s| {
                let d = GaussianDraw::sample(s, n);
                let z = z1_at(&d, &model, 0.0)?;
                let z2 = wnlw_core::stochastic::wick_square_to(&z, model.sigma, n)?;
                let z3 = wick_cube_to(&z, model.sigma, n)?;
                Ok([z.hs_norm(regs[0]), z2.hs_norm(regs[1]), z3.hs_norm(regs[2])])
            })
            .collect::<Result<Vec<_>>>()?;
        for (k, sel) in [ObjectSelector::Z1, ObjectSelector::Z2, ObjectSelector::Z3].into_iter().enumerate() {
            let j = sel.degree();
            let xs = pointwise_samples(sel, &model, cfg.mc_samples, cfg.master_seed, t, x)?;
            let (v, se) = second_moment_se(&xs);
            let norms: Vec<f64> = fields.iter().map(|f| f[k]).collect();
            let (nm, nse) = mean_se(&norms);
            rows.push(ObjectRow {
                n,
                j,
                exact_variance: (1..=j).product::<u32>() as f64 * model.sigma.powi(j as i32),
                mc_variance: v,
                stderr: se,
                s: regs[k],
                norm_mean: nm,
                norm_stderr: nse,
                norm_median: median(&norms),
            });
        }
    }
    let mut m = Manifest::new("objects", &cfg, cfg.seeds());
    if with_dump {
        let n = cfg.top();
        let sc = cfg.solver(n);
        let times = sc.record_times()?;
        let set = EnhancedDataSet::build(
            &GaussianDraw::sample(cfg.master_seed, n),
            &WaveModel::renormalized(cfg.alpha, n),
            &times,
            EnhancedOptions {
                quadrature_dt: cfg.dt,
                object_cutoff: n,
                with_pieces: false,
            },
        )?;
        let recs: Vec<SeriesRecord> = (0..times.len())
            .map(|i| SeriesRecord {
                index: i as u32,
                time: times[i],
                fields: vec![
                    set.z1[i].clone(),
                    set.wick2[i].truncated(n),
                    set.z2[i].clone(),
                    set.z5[i].clone(),
                ],
            })
            .collect();
        std::fs::create_dir_all(&cfg.out_dir)?;
        dump(&cfg.out_dir.join("objects.wnlw"), &recs)?;
        m.files.push("objects.wnlw".into());
    }
    write_outputs(&cfg.out_dir, m, &[("objects.csv", &rows)])?;
    Ok(())
}

fn solve(common: &Common) -> Result<()> {
    let cfg = common.resolve()?;
    let n = common.cutoff(&cfg);
    let sc = cfg.solver(n);
    let draw = GaussianDraw::sample(cfg.master_seed, n);
    let data = cfg.deterministic_data();
    let mut m = Manifest::new("solve", &cfg, vec![cfg.master_seed]);
    let outcome: std::result::Result<Trajectory, wnlw_core::Error> = if cfg.variant == EquationVariant::ResidualW {
        let model = WaveModel::renormalized(cfg.alpha, n);
        enhanced_for_solver(&draw, &model, &sc).and_then(|set| {
            let init: InitialData = data.to_initial(n);
            solve_w(&set, &init, &sc)
        })
    } else {
        solve_full(&draw, &sc, &data)
    };
    let traj = match outcome {
        Ok(t) => t,
        Err(e @ wnlw_core::Error::Blowup { .. }) => {
            m.flag_counts.insert("blowup".into(), 1);
            write_outputs(&cfg.out_dir, m, &[])?;
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    m.flag_counts.insert("blowup".into(), 0);
    let s1 = cfg.s1();
    let norms: Vec<NormRow> = traj
        .times
        .iter()
        .zip(&traj.position)
        .map(|(&t, u)| NormRow {
            t,
            hs_norm: u.hs_norm(s1),
            l2_norm: u.hs_norm(0.0),
        })
        .collect();
    std::fs::create_dir_all(&cfg.out_dir)?;
    dump(&cfg.out_dir.join("trajectory.wnlw"), &traj.to_records())?;
    m.files.push("trajectory.wnlw".into());
    write_outputs(&cfg.out_dir, m, &[("norms.csv", &norms)])?;
    Ok(())
}

fn converge(common: &Common, cross_check: bool) -> Result<()> {
    let mut cfg = common.resolve()?;
    cfg.cross_check |= cross_check;
    let res = convergence::run_convergence(&cfg)?;
    let mut m = Manifest::new("converge", &cfg, res.seeds.clone());
    m.flag_counts.insert("converge".into(), res.flagged);
    let gaps: Vec<GapRow> = res
        .decomposition_gaps
        .iter()
        .map(|&(seed, n, gap)| GapRow { seed, n, gap })
        .collect();
    write_outputs(&cfg.out_dir, m, &[("converge.csv", &res.rows), ("decomposition.csv", &gaps)])?;
    eprintln!(
        "median d_N {:?}; strictly decreasing for {:.1}% of seeds; flag rate {:.1}%",
        res.medians(&cfg.n_ladder),
        100.0 * res.decreasing_fraction(),
        100.0 * res.flag_rate()
    );
    Ok(())
}

fn triviality_cmd(common: &Common) -> Result<()> {
    let cfg = common.resolve()?;
    let res = triviality::run_triviality(&cfg)?;
    let mut m = Manifest::new("triviality", &cfg, res.seeds.clone());
    m.flag_counts.insert("triviality".into(), res.flagged);
    write_outputs(&cfg.out_dir, m, &[("triviality.csv", &res.rows)])?;
    eprintln!(
        "un-renormalised pairings halved for {:.1}% of seeds; renormalised pairings Cauchy for {:.1}%; flag rate {:.1}%",
        100.0 * res.decay_fraction(EquationVariant::FullUnrenormalizedReformulated, 0.5),
        100.0 * res.cauchy_fraction(EquationVariant::RenormalizedModified),
        100.0 * res.flag_rate()
    );
    Ok(())
}

fn checks(common: &Common, suite: Suite) -> Result<()> {
    let cfg = common.resolve()?;
    let mut rows: Vec<CheckRow> = Vec::new();
    if matches!(suite, Suite::Stochastic | Suite::All) {
        rows.extend(run_stochastic_checks(&cfg)?);
    }
    if matches!(suite, Suite::Analysis | Suite::All) {
        rows.extend(analysis::run_analysis_checks(&cfg)?);
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    let mut m = Manifest::new("checks", &cfg, vec![cfg.master_seed]);
    m.flag_counts.insert("failed_checks".into(), failed);
    write_outputs(&cfg.out_dir, m, &[("checks.csv", &rows)])?;
    eprintln!("{} checks, {failed} failed", rows.len());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Renorm(c) => renorm(&c),
        Command::Sample(c) => sample(&c),
        Command::Objects { common, dump } => objects(&common, dump),
        Command::Solve(c) => solve(&c),
        Command::Converge { common, cross_check } => converge(&common, cross_check),
        Command::Triviality(c) => triviality_cmd(&c),
        Command::Checks { common, suite } => checks(&common, suite),
    }
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

