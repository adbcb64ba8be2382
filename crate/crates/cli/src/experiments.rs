//! One function per experiment kind, each producing its output files.

use bslab::contact::{estimate_lambda, survival_curve, LambdaOptions, SurvivalKind};
use bslab::graph::GraphExport;
use bslab::limits::{
    band_limit_reference_distribution, canopy_reference_distribution, convergence_series, default_level_cutoff,
    neighborhood_distribution, NeighborhoodDist, SampleMode,
};
use bslab::percolation::{
    boundary_cluster_count, connection_profile, decay_rate_fit, estimate_pc, estimate_pu, estimate_theta, PcOptions,
    PuOptions, TauOptions,
};
use bslab::walk::{escape_probability_mc, transience_profile, EscapeMethod, TransienceOptions};
use bslab::FamilySpec;

use crate::config::{ContactMode, ExperimentConfig, ExperimentKind};
use crate::error::{CliError, Context};
use crate::output::{num, opt, Outputs, Table};
use crate::question::question_report;

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    match cfg.experiment {
        ExperimentKind::Generate => generate(cfg),
        ExperimentKind::Bslimit => bslimit(cfg),
        ExperimentKind::Theta => theta(cfg),
        ExperimentKind::Pc => pc(cfg),
        ExperimentKind::Pu => pu(cfg),
        ExperimentKind::Tau => tau(cfg),
        ExperimentKind::Clusters => clusters(cfg),
        ExperimentKind::Contact => contact(cfg),
        ExperimentKind::Walk => walk(cfg),
        ExperimentKind::Question => question_report(cfg.question, cfg),
    }
}

fn single(cfg: &ExperimentConfig, name: &str, table: Table) -> Outputs {
    let mut out = Outputs::default();
    out.push(name, table.render(cfg));
    out
}

fn generate(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let g = cfg.sized_family()?.build().context("building the graph")?;
    let mut out = Outputs::default();
    out.push("graph.json", GraphExport::from_graph(&g).to_text().into_bytes());
    Ok(out)
}

pub(crate) fn pc_options(cfg: &ExperimentConfig) -> PcOptions {
    PcOptions {
        replicas: cfg.replicas,
        seed: cfg.seed,
        rule: cfg.crossing_rule(),
        model: cfg.model,
        bootstrap: cfg.bootstrap,
        nested: cfg.nested,
    }
}

pub(crate) fn pu_options(cfg: &ExperimentConfig) -> PuOptions {
    PuOptions {
        tau: TauOptions {
            d_max: cfg.d_max,
            buffer: cfg.buffer,
            pairs_per_distance: cfg.pairs_per_distance,
            replicas: cfg.replicas,
            seed: cfg.seed,
        },
        window: None,
    }
}

pub(crate) fn lambda_options(cfg: &ExperimentConfig) -> LambdaOptions {
    LambdaOptions {
        replicas: cfg.replicas,
        seed: cfg.seed,
        horizon_per_size: cfg.horizon_per_size,
        rule: cfg.survival_rule(),
        model: cfg.model,
        bootstrap: cfg.bootstrap,
    }
}

fn sample_mode(cfg: &ExperimentConfig) -> SampleMode {
    if cfg.samples == 0 {
        SampleMode::Exact
    } else {
        SampleMode::Sampled { count: cfg.samples, seed: cfg.seed }
    }
}

/// Analytic local-limit reference for the families that have one.
pub(crate) fn analytic_reference(fam: &FamilySpec, r: usize) -> bslab::Result<Option<(NeighborhoodDist, String)>> {
    Ok(match fam {
        FamilySpec::TreeBall { d, .. } | FamilySpec::Canopy { d, .. } => {
            Some((canopy_reference_distribution(*d, r, default_level_cutoff(*d))?, format!("canopy({d})")))
        }
        FamilySpec::DlBall { m, n, .. } | FamilySpec::HorocyclicCanopy { m, n, .. } => {
            Some((band_limit_reference_distribution(*m, *n, r)?, format!("horocyclic_limit({m},{n})")))
        }
        _ => None,
    })
}

fn bslimit(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let fam = cfg.family_spec()?;
    let mode = sample_mode(cfg);
    let reference = if cfg.reference_size > 0 {
        let g = fam.with_size(cfg.reference_size).build().context("building the reference truncation")?;
        let dist = neighborhood_distribution(&g, cfg.radius, mode).context("reference distribution")?;
        Some((dist, format!("{}({})", fam.name(), cfg.reference_size)))
    } else {
        analytic_reference(&fam, cfg.radius).context("reference distribution")?
    };
    let rows = convergence_series(&fam, &cfg.sizes, cfg.radius, mode, reference.as_ref().map(|r| &r.0), cfg.cauchy_threshold)
        .context("convergence series")?;
    let name = reference.as_ref().map_or("none".to_string(), |r| r.1.clone());
    let mut t = Table::new(&["n", "r", "n_vertices", "tv_reference", "tv_previous", "non_cauchy", "reference"]);
    for row in rows {
        t.row(vec![
            row.n.to_string(),
            row.r.to_string(),
            row.n_vertices.to_string(),
            opt(row.tv_reference),
            opt(row.tv_previous),
            row.non_cauchy.to_string(),
            name.clone(),
        ]);
    }
    Ok(single(cfg, "bslimit.csv", t))
}

fn theta(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let g = cfg.sized_family()?.build().context("building the graph")?;
    let curve = estimate_theta(&g, &cfg.p_grid(), cfg.replicas, cfg.seed).context("theta curve")?;
    let mut t = Table::new(&["p", "observable", "estimate", "ci_lo", "ci_hi", "replicas", "seed"]);
    for (i, &p) in curve.p.iter().enumerate() {
        t.row(vec![
            num(p),
            "theta".into(),
            num(curve.theta[i]),
            num(curve.theta_ci[i].0),
            num(curve.theta_ci[i].1),
            cfg.replicas.to_string(),
            cfg.seed.to_string(),
        ]);
    }
    Ok(single(cfg, "theta.csv", t))
}

fn pc(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let fam = cfg.family_spec()?;
    let e = estimate_pc(&fam, &cfg.sizes, &pc_options(cfg)).context("p_c estimate")?;
    let mut sizes = Table::new(&["n", "n_vertices", "p_hat", "ci_lo", "ci_hi", "crossed", "replicas", "seed"]);
    for s in &e.per_size {
        sizes.row(vec![
            s.n.to_string(),
            s.n_vertices.to_string(),
            num(s.p_hat),
            num(s.ci.0),
            num(s.ci.1),
            s.crossed.to_string(),
            cfg.replicas.to_string(),
            cfg.seed.to_string(),
        ]);
    }
    let mut summary = Table::new(&["family", "p_inf", "ci_lo", "ci_hi", "used_fallback", "fit_rate", "fit_amplitude", "nested", "replicas", "seed"]);
    summary.row(vec![
        fam.name().into(),
        num(e.p_inf),
        num(e.ci.0),
        num(e.ci.1),
        e.used_fallback.to_string(),
        opt(e.fit.map(|f| f.rate)),
        opt(e.fit.map(|f| f.amplitude)),
        e.nested.to_string(),
        cfg.replicas.to_string(),
        cfg.seed.to_string(),
    ]);
    let mut out = Outputs::default();
    out.push("pc_sizes.csv", sizes.render(cfg));
    out.push("pc.csv", summary.render(cfg));
    Ok(out)
}

pub(crate) fn pu_table(e: &bslab::percolation::PuEstimate) -> Table {
    let mut t = Table::new(&["p", "slope", "slope_ci_lo", "slope_ci_hi", "r2", "mean_tau", "non_decay"]);
    for v in &e.verdicts {
        t.row(vec![
            num(v.p),
            num(v.slope),
            num(v.slope_ci.0),
            num(v.slope_ci.1),
            opt(v.r2),
            num(v.mean_tau),
            v.non_decay.to_string(),
        ]);
    }
    t
}

fn pu(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let fam = cfg.family_spec()?;
    let e = estimate_pu(&fam, cfg.size, &cfg.p_grid(), &pu_options(cfg)).context("p_u estimate")?;
    let mut summary = Table::new(&["family", "size", "p_hat", "decay_everywhere", "window_lo", "window_hi", "label"]);
    summary.row(vec![
        fam.name().into(),
        cfg.size.to_string(),
        num(e.p_hat),
        e.decay_everywhere.to_string(),
        e.window.0.to_string(),
        e.window.1.to_string(),
        e.label.clone(),
    ]);
    let mut out = Outputs::default();
    out.push("pu_verdicts.csv", pu_table(&e).render(cfg));
    out.push("pu.csv", summary.render(cfg));
    Ok(out)
}

fn tau(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let g = cfg.sized_family()?.build().context("building the graph")?;
    let profile = connection_profile(&g, cfg.p, &pu_options(cfg).tau).context("connection profile")?;
    let mut t = Table::new(&["p", "d", "tau", "ci_lo", "ci_hi", "n_pairs"]);
    for i in 0..profile.d.len() {
        t.row(vec![
            num(profile.p),
            profile.d[i].to_string(),
            num(profile.tau[i]),
            num(profile.ci[i].0),
            num(profile.ci[i].1),
            profile.n_pairs[i].to_string(),
        ]);
    }
    let mut out = single(cfg, "tau.csv", t);
    // a profile without four positive distances has no fit; the table alone is reported
    if let Ok(fit) = decay_rate_fit(&profile) {
        let mut f = Table::new(&["p", "slope", "slope_ci_lo", "slope_ci_hi", "intercept", "r2"]);
        f.row(vec![num(profile.p), num(fit.slope), num(fit.slope_ci.0), num(fit.slope_ci.1), num(fit.intercept), opt(fit.r2)]);
        out.push("tau_fit.csv", f.render(cfg));
    }
    Ok(out)
}

fn clusters(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let g = cfg.sized_family()?.build().context("building the graph")?;
    let c = boundary_cluster_count(&g, cfg.p, cfg.s_min, cfg.replicas, cfg.seed).context("boundary clusters")?;
    let mut t = Table::new(&["p", "s_min", "count", "replicas_with_count", "fraction", "replicas", "seed"]);
    for (&count, &k) in &c.histogram {
        t.row(vec![
            num(cfg.p),
            cfg.s_min.to_string(),
            count.to_string(),
            k.to_string(),
            num(k as f64 / cfg.replicas as f64),
            cfg.replicas.to_string(),
            cfg.seed.to_string(),
        ]);
    }
    Ok(single(cfg, "clusters.csv", t))
}

pub(crate) fn lambda_size_table(e: &bslab::contact::LambdaEstimate) -> Table {
    let mut t = Table::new(&["n", "n_vertices", "horizon", "lambda_hat", "ci_lo", "ci_hi", "crossed", "boundary_touch"]);
    for s in &e.per_size {
        t.row(vec![
            s.n.to_string(),
            s.n_vertices.to_string(),
            num(s.horizon),
            num(s.lambda_hat),
            num(s.ci.0),
            num(s.ci.1),
            s.crossed.to_string(),
            num(s.boundary_touch),
        ]);
    }
    t
}

fn contact(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let grid = cfg.lambda_grid();
    let kind = match cfg.contact {
        ContactMode::Curve => {
            let g = cfg.sized_family()?.build().context("building the graph")?;
            let c = survival_curve(&g, &grid, cfg.horizon, cfg.replicas, cfg.seed).context("survival curve")?;
            let mut t = Table::new(&[
                "lambda",
                "T",
                "size",
                "survival_hat",
                "survival_ci_lo",
                "survival_ci_hi",
                "reinfect_hat",
                "reinfect_ci_lo",
                "reinfect_ci_hi",
                "boundary_touch_fraction",
                "replicas",
                "seed",
            ]);
            for i in 0..c.lambda.len() {
                t.row(vec![
                    num(c.lambda[i]),
                    num(c.horizon),
                    cfg.size.to_string(),
                    num(c.survival[i]),
                    num(c.survival_ci[i].0),
                    num(c.survival_ci[i].1),
                    num(c.reinfection[i]),
                    num(c.reinfection_ci[i].0),
                    num(c.reinfection_ci[i].1),
                    num(c.boundary_touch[i]),
                    cfg.replicas.to_string(),
                    cfg.seed.to_string(),
                ]);
            }
            return Ok(single(cfg, "contact.csv", t));
        }
        ContactMode::Weak => SurvivalKind::Weak,
        ContactMode::Strong => SurvivalKind::Strong,
    };
    let fam = cfg.family_spec()?;
    let e = estimate_lambda(kind, &fam, &cfg.sizes, &grid, &lambda_options(cfg)).context("contact threshold")?;
    let mut summary = Table::new(&["family", "kind", "lambda_inf", "ci_lo", "ci_hi", "used_fallback", "horizon_per_size", "replicas", "seed", "label"]);
    summary.row(vec![
        fam.name().into(),
        format!("{:?}", e.kind).to_lowercase(),
        num(e.lambda_inf),
        num(e.ci.0),
        num(e.ci.1),
        e.used_fallback.to_string(),
        num(e.horizon_per_size),
        cfg.replicas.to_string(),
        cfg.seed.to_string(),
        e.label.clone(),
    ]);
    let mut out = Outputs::default();
    out.push("contact_sizes.csv", lambda_size_table(&e).render(cfg));
    out.push("contact.csv", summary.render(cfg));
    Ok(out)
}

fn walk(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let fam = cfg.family_spec()?;
    let opts = TransienceOptions { floor: cfg.floor, window: cfg.trend_window, stable_slope: cfg.stable_slope };
    let profile = transience_profile(&fam, &cfg.sizes, &opts).context("transience profile")?;
    let verdict = serde_json::to_value(profile.verdict).expect("verdicts serialize");
    let verdict = verdict.as_str().unwrap_or_default().to_string();
    let mut t = Table::new(&["family", "size", "method", "escape", "ci_lo", "ci_hi", "verdict"]);
    for (&n, r) in cfg.sizes.iter().zip(&profile.results) {
        t.row(vec![fam.name().into(), n.to_string(), "exact".into(), num(r.escape), num(r.escape), num(r.escape), verdict.clone()]);
        if cfg.walk_replicas > 0 {
            let g = fam.with_size(n).build().context("building the graph")?;
            let mc = escape_probability_mc(&g, cfg.walk_replicas, cfg.seed).context("Monte Carlo escape")?;
            if let EscapeMethod::MonteCarlo { ci, .. } = mc.method {
                t.row(vec![fam.name().into(), n.to_string(), "monte_carlo".into(), num(mc.escape), num(ci.0), num(ci.1), verdict.clone()]);
            }
        }
    }
    Ok(single(cfg, "walk.csv", t))
}
