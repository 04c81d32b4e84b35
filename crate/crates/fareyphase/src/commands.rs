//! One function per subcommand. Each returns a [`Table`] and whether any
//! check in it failed.

use fareyphase_core::balls::{self, MAX_APPROX_LEVEL};
use fareyphase_core::farey::level_fractions;
use fareyphase_core::partition::{
    dirichlet_coefficients, euler_totient, evaluate_with, even_sums_with, finite_size_free_energy,
    verify_sandwich_with, verify_telescope_with, zeta_ratio,
};
use fareyphase_core::thermo::{
    hausdorff_check_with, transition_fit_with, thermo_curve_with, Convention, LambdaSource, ThermoOptions,
};
use fareyphase_core::transfer::{
    build_matrix, leading_eigen_checked, leading_eigen_with, EigenOptions, DEFAULT_DIM, DEFAULT_TOL, MIN_DIM,
};
use fareyphase_core::{Branch, ChunkRunner, Model};

use crate::config::{Accel, Analysis, CommandName, ConventionArg, RunConfig, Source, Suite};
use crate::error::{CliError, Context};
use crate::output::{Cell, Table};
use crate::runner::Pool;

pub struct Outcome {
    pub table: Table,
    /// A verification in the table did not hold.
    pub failed: bool,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Outcome { table, failed: false }
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    let pool = Pool::new(config.threads)?;
    match config.command {
        CommandName::Levels => cmd_levels(config),
        CommandName::Partition => cmd_partition(config, &pool),
        CommandName::Verify => cmd_verify(config, &pool),
        CommandName::Eigen => cmd_eigen(config, &pool),
        CommandName::Thermo => cmd_thermo(config, &pool),
        CommandName::Balls => cmd_balls(config),
    }
}

pub fn cmd_levels(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut t = Table::new(&["level", "index", "fraction", "numerator", "denominator", "value"]);
    for k in config.levels(None)? {
        for f in level_fractions(k).context(|| format!("levels --k {k}"))? {
            t.push(vec![
                k.into(),
                f.index.into(),
                f.fraction.to_string().into(),
                f.numerator().into(),
                f.denominator().into(),
                f.fraction.to_f64().into(),
            ]);
        }
    }
    Ok(Outcome::ok(t))
}

fn models(config: &RunConfig) -> Result<(Vec<Model>, bool), CliError> {
    match config.model.as_deref() {
        None | Some("all") => Ok((Model::ALL.to_vec(), true)),
        Some(name) => name.parse().map(|m| (vec![m], false)).map_err(|e: fareyphase_core::Error| CliError::Usage(e.to_string())),
    }
}

pub fn cmd_partition(config: &RunConfig, pool: &Pool) -> Result<Outcome, CliError> {
    let (models, all) = models(config)?;
    let ks = config.levels(None)?;
    let betas = config.betas(None)?;
    let mut t = Table::new(&["model", "k", "beta", "value", "terms", "free_energy"]);
    for &model in &models {
        for &k in &ks {
            if all && k < model.min_level() {
                continue;
            }
            for &beta in &betas {
                let pv = evaluate_with(pool, model, k, beta)
                    .context(|| format!("partition --model {model} --k {k} --beta {beta}"))?;
                let f = (beta != 0.0 && k > 0).then(|| finite_size_free_energy(&pv));
                t.push(vec![model.name().into(), k.into(), beta.into(), pv.value.into(), pv.terms.into(), f.into()]);
            }
        }
    }
    Ok(Outcome::ok(t))
}

const VERIFY_COLUMNS: [&str; 9] = ["suite", "k", "beta", "n", "value", "lower", "upper", "holds", "note"];

struct Verify {
    table: Table,
    failed: bool,
}

impl Verify {
    #[allow(clippy::too_many_arguments)]
    fn row(
        &mut self,
        suite: &str,
        k: Option<u32>,
        beta: Option<f64>,
        n: Option<u64>,
        value: f64,
        lower: Option<f64>,
        upper: Option<f64>,
        holds: bool,
        note: String,
    ) {
        self.failed |= !holds;
        self.table.push(vec![
            suite.into(),
            k.into(),
            beta.into(),
            n.into(),
            value.into(),
            lower.into(),
            upper.into(),
            holds.into(),
            note.into(),
        ]);
    }
}

pub const SANDWICH_BETAS: [f64; 9] = [-1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
pub const TELESCOPE_BETAS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
pub const TOTIENT_N_MAX: u64 = 50;

pub fn cmd_verify(config: &RunConfig, pool: &Pool) -> Result<Outcome, CliError> {
    let mut v = Verify { table: Table::new(&VERIFY_COLUMNS), failed: false };
    let wants = |s: Suite| config.suite == Suite::All || config.suite == s;
    let levels = |default: (u32, u32)| config.levels(Some(default));

    if wants(Suite::Sandwich) {
        for k in levels((2, 18))? {
            for beta in config.betas(Some(&SANDWICH_BETAS))? {
                let r = verify_sandwich_with(pool, k, beta).context(|| format!("sandwich k={k} beta={beta}"))?;
                let note = if r.holds { String::new() } else { format!("failed {:?}", r.failed) };
                v.row("sandwich", Some(k), Some(beta), None, r.value, Some(r.lower), Some(r.upper), r.holds, note);
            }
        }
    }
    if wants(Suite::Telescope) {
        for k in levels((1, 20))? {
            for beta in config.betas(Some(&TELESCOPE_BETAS))? {
                let r = verify_telescope_with(pool, k, beta).context(|| format!("telescope k={k} beta={beta}"))?;
                let holds = r.residual <= 1e-10 && r.growth_holds != Some(false);
                let note = match r.growth_holds {
                    Some(g) => format!("growth={g}"),
                    None => String::new(),
                };
                v.row("telescope", Some(k), Some(beta), None, r.residual, None, Some(1e-10), holds, note);
            }
        }
    }
    if wants(Suite::Totient) {
        let ks = levels((1, 30))?;
        let tables = ks
            .iter()
            .map(|&k| dirichlet_coefficients(k, TOTIENT_N_MAX).context(|| format!("totient k={k}")))
            .collect::<Result<Vec<_>, _>>()?;
        let last_k = *ks.last().unwrap();
        for n in 1..=TOTIENT_N_MAX {
            let counts: Vec<u64> = tables.iter().map(|t| t.get(n).unwrap()).collect();
            let monotone = counts.windows(2).all(|w| w[0] <= w[1]);
            let phi = euler_totient(n);
            let last = *counts.last().unwrap();
            // every p/n is present once the level reaches n - 1
            let due = u64::from(last_k) + 1 >= n;
            let holds = monotone && (!due || last == phi) && last <= phi;
            let note = format!("monotone={monotone} complete={}", last == phi);
            v.row("totient", Some(last_k), None, Some(n), last as f64, None, Some(phi as f64), holds, note);
        }
    }
    if wants(Suite::Zeta) {
        let limit = zeta_ratio(2.0).context(|| "zeta ratio".into())?;
        let mut prev = f64::NEG_INFINITY;
        let ks = levels((1, 24))?;
        for &k in &ks {
            let z = evaluate_with(pool, Model::Knauf, k, 4.0).context(|| format!("zeta k={k}"))?.value;
            let mut holds = z > prev && z < limit;
            let mut note = String::new();
            if k == *ks.last().unwrap() {
                let gap = (z - limit).abs();
                holds &= gap < 5e-3;
                note = format!("gap={gap:e}");
            }
            v.row("zeta", Some(k), Some(4.0), None, z, Some(prev.max(0.0)), Some(limit), holds, note);
            prev = z;
        }
    }
    if wants(Suite::Balls) {
        for k in levels((2, MAX_APPROX_LEVEL))? {
            let d = balls::exact_diameters(k).context(|| format!("balls k={k}"))?;
            let total: f64 = d.iter().sum();
            let mut note = String::new();
            let mut holds = total < 1.0;
            if k <= 14 {
                let mut worst = 0.0f64;
                for (i, e) in d.iter().enumerate() {
                    let s = balls::symbols_for_ball(k, i as u64 + 1).context(|| format!("balls k={k}"))?;
                    let c = balls::ball_by_composition(&s).context(|| format!("balls k={k}"))?;
                    worst = worst.max((c - e).abs() / e);
                }
                holds &= worst <= 1e-14;
                note = format!("composition_rel_err={worst:e}");
            }
            v.row("balls", Some(k), Some(1.0), None, total, None, Some(1.0), holds, note);
        }
    }
    if wants(Suite::Bounded) {
        let ks = levels((1, 30))?;
        let top = *ks.last().unwrap();
        let even = even_sums_with(pool, top, 2.0).context(|| "bounded even sums".into())?;
        for &k in &ks {
            if k == 0 {
                continue;
            }
            let e = even[k as usize - 1];
            v.row("bounded-even", Some(k), Some(2.0), None, e, None, Some(2.0), e < 2.0, String::new());
            let z = evaluate_with(pool, Model::Knauf, k, 2.0).context(|| format!("bounded k={k}"))?.value;
            let cap = 2.0 * f64::from(k) + 1.0;
            v.row("bounded-knauf", Some(k), Some(2.0), None, z, None, Some(cap), z <= cap, String::new());
        }
    }
    Ok(Outcome { table: v.table, failed: v.failed })
}

fn eigen_options(config: &RunConfig, default: Accel) -> EigenOptions {
    let base = match config.accel.unwrap_or(default) {
        Accel::Power => EigenOptions::default(),
        Accel::Chebyshev => EigenOptions::near_transition(),
    };
    EigenOptions { tol: config.tol.unwrap_or(DEFAULT_TOL), ..base }
}

const EIGEN_COLUMNS: [&str; 8] = ["beta", "source", "M", "k", "lambda", "residual", "iterations", "truncation_uncertainty"];

pub fn cmd_eigen(config: &RunConfig, pool: &Pool) -> Result<Outcome, CliError> {
    let betas = config.betas(None)?;
    let mut t = Table::new(&EIGEN_COLUMNS);
    match config.source {
        Source::Matrix => {
            let dim = config.dim.unwrap_or(DEFAULT_DIM);
            let opts = eigen_options(config, Accel::Power);
            let dims: Vec<usize> = if config.study {
                std::iter::successors(Some(dim), |d| (d / 2 >= 2 * MIN_DIM).then_some(d / 2)).collect::<Vec<_>>()
            } else {
                vec![dim]
            };
            let rows = pool.map_ordered(betas.len(), |i| -> Result<Vec<Vec<Cell>>, CliError> {
                let beta = betas[i];
                let mut out = Vec::new();
                for &m in dims.iter().rev() {
                    let r = if m >= 2 * MIN_DIM {
                        leading_eigen_checked(beta, m, &opts)
                    } else {
                        build_matrix(beta, m).and_then(|mat| leading_eigen_with(&mat, &opts))
                    }
                    .context(|| format!("eigen --beta {beta} --dim {m}"))?;
                    out.push(vec![
                        beta.into(),
                        "matrix".into(),
                        m.into(),
                        Cell::Empty,
                        r.lambda.into(),
                        r.residual.into(),
                        r.iterations.into(),
                        r.truncation_uncertainty.into(),
                    ]);
                }
                Ok(out)
            });
            for r in rows {
                r?.into_iter().for_each(|row| t.push(row));
            }
        }
        Source::Ratio => {
            let k = config.k.unwrap_or(24);
            if k < 3 {
                return Err(CliError::Usage("the ratio source needs --k of at least 3".into()));
            }
            for &beta in &betas {
                if !(0.0..1.0).contains(&beta) {
                    return Err(CliError::Usage(format!("the ratio source needs 0 <= beta < 1, got {beta}")));
                }
                let even = even_sums_with(pool, k, 2.0 * beta).context(|| format!("eigen ratio --k {k}"))?;
                let ratios: Vec<f64> = even.windows(2).map(|w| w[1] / w[0]).collect();
                // ratios[j] belongs to level j + 2
                let first = if config.study { 3 } else { k };
                for level in first..=k {
                    let r = ratios[level as usize - 2];
                    let prev = ratios[level as usize - 3];
                    t.push(vec![
                        beta.into(),
                        "ratio".into(),
                        Cell::Empty,
                        level.into(),
                        r.into(),
                        Cell::Empty,
                        Cell::Empty,
                        (r - prev).abs().into(),
                    ]);
                }
            }
        }
    }
    Ok(Outcome::ok(t))
}

fn thermo_options(config: &RunConfig) -> Result<ThermoOptions, CliError> {
    let base = ThermoOptions::default();
    let source = match config.source {
        Source::Matrix => LambdaSource::Matrix,
        Source::Ratio => LambdaSource::Ratio { level: config.k.unwrap_or(24) },
    };
    let max_dim = config.dim.unwrap_or(base.max_dim);
    if max_dim < base.min_dim {
        return Err(CliError::Usage(format!("--dim must be at least {} for thermo", base.min_dim)));
    }
    Ok(ThermoOptions { source, max_dim, eigen: eigen_options(config, Accel::Chebyshev), ..base })
}

pub const FIT_EPS: [f64; 5] = [3e-3, 5e-3, 1e-2, 2e-2, 3e-2];

pub fn cmd_thermo(config: &RunConfig, pool: &Pool) -> Result<Outcome, CliError> {
    let opts = thermo_options(config)?;
    let source_name = match config.source {
        Source::Matrix => "matrix",
        Source::Ratio => "ratio",
    };
    match config.analysis {
        Analysis::Curve => {
            let betas = config.betas(None)?;
            let convention = match config.convention {
                ConventionArg::Tree => Convention::Tree,
                ConventionArg::Chain => Convention::Chain,
            };
            let tree: Vec<f64> = betas.iter().map(|b| convention.to_tree(*b)).collect();
            let curve = thermo_curve_with(pool, &tree, &opts).context(|| "thermo curve".into())?;
            // phi_chain(b) = 2 phi(b / 2): same f and u, twice the heat
            let heat_scale = if convention == Convention::Chain { 2.0 } else { 1.0 };
            let mut t = Table::new(&["beta", "f", "u", "c", "lambda", "source", "uncertainty", "size", "c_error"]);
            for (b, p) in betas.iter().zip(&curve.points) {
                t.push(vec![
                    (*b).into(),
                    p.f.into(),
                    p.u.into(),
                    (heat_scale * p.c).into(),
                    p.lambda.into(),
                    source_name.into(),
                    p.uncertainty.into(),
                    p.size.into(),
                    (heat_scale * p.c_error).into(),
                ]);
            }
            Ok(Outcome::ok(t))
        }
        Analysis::Fit => {
            let eps: Vec<f64> = match config.betas(Some(&[]))? {
                b if b.is_empty() => FIT_EPS.to_vec(),
                b => b.iter().map(|x| 1.0 - x).collect(),
            };
            let fit = transition_fit_with(pool, &eps, true, &opts).context(|| "thermo fit".into())?;
            let mut t = Table::new(&[
                "eps", "beta", "phi", "c_eps", "size", "uncertainty", "heat", "heat_scaled", "c_hat", "stability", "heat_ratio",
            ]);
            for p in &fit.points {
                t.push(vec![
                    p.eps.into(),
                    (1.0 - p.eps).into(),
                    p.phi.into(),
                    p.c_eps.into(),
                    p.size.into(),
                    p.uncertainty.into(),
                    p.heat.into(),
                    p.heat_scaled.into(),
                    fit.c_hat.into(),
                    fit.stability.into(),
                    fit.heat_ratio.into(),
                ]);
            }
            Ok(Outcome::ok(t))
        }
        Analysis::Hausdorff => {
            let betas = config.betas(Some(&[0.9, 1.0, 1.1]))?;
            let ks = config.levels(Some((10, 20)))?;
            let r = hausdorff_check_with(pool, &betas, &ks).context(|| "hausdorff check".into())?;
            let mut t = Table::new(&["beta", "k", "z"]);
            for (b, k, z) in &r.rows {
                t.push(vec![(*b).into(), (*k).into(), (*z).into()]);
            }
            Ok(Outcome { table: t, failed: !r.holds() })
        }
    }
}

fn symbol_string(s: &[Branch]) -> String {
    s.iter().map(|b| char::from(b'0' + b.bit())).collect()
}

pub fn cmd_balls(config: &RunConfig) -> Result<Outcome, CliError> {
    let ks = config.levels(None)?;
    if let Some(k) = ks.iter().find(|k| **k > MAX_APPROX_LEVEL) {
        return Err(CliError::Usage(format!("balls lists at most level {MAX_APPROX_LEVEL}, got {k}")));
    }
    if config.beta.is_some() || config.beta_grid.is_some() {
        let mut t = Table::new(&["level", "beta", "approx", "exact", "relative_error", "log_ratio_per_level"]);
        for &k in &ks {
            for beta in config.betas(None)? {
                let r = balls::approx_partition(k, beta).context(|| format!("balls --k {k} --beta {beta}"))?;
                t.push(vec![
                    k.into(),
                    beta.into(),
                    r.approx.into(),
                    r.exact.into(),
                    r.relative_error.into(),
                    r.log_ratio_per_level.into(),
                ]);
            }
        }
        return Ok(Outcome::ok(t));
    }
    let mut t = Table::new(&["level", "index", "symbols", "exact", "composed", "approx", "ratio"]);
    for &k in &ks {
        if k < 2 {
            return Err(CliError::Usage(format!("balls start at level 2, got {k}")));
        }
        let exact = balls::exact_diameters(k).context(|| format!("balls --k {k}"))?;
        for (i, e) in exact.into_iter().enumerate() {
            let n = i as u64 + 1;
            let s = balls::symbols_for_ball(k, n).context(|| format!("balls --k {k}"))?;
            let composed = balls::ball_by_composition(&s).context(|| format!("balls --k {k}"))?;
            let approx = balls::ball_derivative_approx(&s);
            t.push(vec![
                k.into(),
                n.into(),
                symbol_string(&s).into(),
                e.into(),
                composed.into(),
                approx.into(),
                (approx / e).into(),
            ]);
        }
    }
    Ok(Outcome::ok(t))
}
