//! Side-by-side probe tables pairing a group family `G` with the family `H`
//! of its local limit.

use bslab::contact::{estimate_lambda_c, estimate_lambda_s, LambdaEstimate};
use bslab::limits::{convergence_series, SampleMode};
use bslab::percolation::{estimate_pc, estimate_pu};
use bslab::FamilySpec;

use crate::config::{ExperimentConfig, QuestionKind, QuestionPair};
use crate::error::{CliError, Context};
use crate::experiments::{analytic_reference, lambda_options, pc_options, pu_options};
use crate::output::{header_comment, num, Outputs, Table};

/// `(G, H)` templates for a catalog pair.
pub fn pair_families(pair: QuestionPair, cfg: &ExperimentConfig) -> (FamilySpec, FamilySpec) {
    let line = FamilySpec::line(0);
    match pair {
        QuestionPair::TreeCanopy => (FamilySpec::TreeBall { d: cfg.d, radius: 0 }, FamilySpec::Canopy { d: cfg.d, height: 0 }),
        QuestionPair::Z2 => {
            let z2 = FamilySpec::GridBox { dims: vec![1, 1], periodic: false };
            (z2.clone(), z2)
        }
        QuestionPair::TreeLine => (
            FamilySpec::product(FamilySpec::TreeBall { d: cfg.d, radius: 0 }, line.clone()),
            FamilySpec::product(FamilySpec::Canopy { d: cfg.d, height: 0 }, line),
        ),
        QuestionPair::Dl => (
            FamilySpec::DlBall { m: cfg.m, n: cfg.n, height: 0 },
            FamilySpec::HorocyclicCanopy { m: cfg.m, n: cfg.n, height: 0 },
        ),
        QuestionPair::FreeProduct => {
            let big = 2 * cfg.sizes.iter().copied().max().unwrap_or(1);
            (
                FamilySpec::FreeProductZ2Edge { radius: 0 },
                FamilySpec::LocalView { inner: Box::new(FamilySpec::FreeProductZ2Edge { radius: big }), radius: 0, seed: cfg.seed },
            )
        }
    }
}

fn pair_name(pair: QuestionPair) -> &'static str {
    match pair {
        QuestionPair::TreeCanopy => "tree_canopy",
        QuestionPair::Z2 => "z2",
        QuestionPair::TreeLine => "tree_line",
        QuestionPair::Dl => "dl",
        QuestionPair::FreeProduct => "free_product",
    }
}

const COLUMNS: [&str; 8] = ["section", "family", "quantity", "size", "estimate", "ci_lo", "ci_hi", "note"];

struct Rows(Table);

impl Rows {
    #[allow(clippy::too_many_arguments)]
    fn add(&mut self, section: &str, fam: &FamilySpec, quantity: &str, size: Option<usize>, est: f64, ci: (f64, f64), note: &str) {
        self.0.row(vec![
            section.into(),
            fam.name().into(),
            quantity.into(),
            size.map_or_else(String::new, |n| n.to_string()),
            num(est),
            num(ci.0),
            num(ci.1),
            note.into(),
        ]);
    }

    fn lambda(&mut self, section: &str, e: &LambdaEstimate) {
        for s in &e.per_size {
            let note = if s.crossed { "" } else { "no crossing inside the grid" };
            self.add(section, &e.family, "lambda_hat_n", Some(s.n), s.lambda_hat, s.ci, note);
        }
        let note = if e.used_fallback { "extrapolation unusable; largest size reported" } else { e.label.as_str() };
        self.add(section, &e.family, "lambda_inf", None, e.lambda_inf, e.ci, note);
    }
}

/// Runs the paired estimators and renders `question.csv` and `report.md`.
pub fn question_report(kind: QuestionKind, cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let (g_fam, h_fam) = pair_families(cfg.pair, cfg);
    let mut rows = Rows(Table::new(&COLUMNS));
    let title = match kind {
        QuestionKind::Q1 => {
            let pc = estimate_pc(&h_fam, &cfg.sizes, &pc_options(cfg)).context("p_c of the limit family")?;
            for s in &pc.per_size {
                let note = if s.crossed { "" } else { "no crossing on [0, 1]" };
                rows.add("p_c(H)", &h_fam, "p_hat_n", Some(s.n), s.p_hat, s.ci, note);
            }
            let note = if pc.used_fallback { "extrapolation unusable; largest size reported" } else { "" };
            rows.add("p_c(H)", &h_fam, "p_inf", None, pc.p_inf, pc.ci, note);
            if cfg.pair == QuestionPair::Dl {
                // evidence for p_c(H) < 1: how far below 1 the upper interval ends sit
                let max_hi = pc.per_size.iter().map(|s| s.ci.1).fold(f64::NEG_INFINITY, f64::max);
                let crossed = pc.per_size.iter().filter(|s| s.crossed && s.ci.1 < 1.0).count() as f64 / pc.per_size.len() as f64;
                rows.add("p_c(H) < 1 probe", &h_fam, "largest_size_ci_hi", None, max_hi, (max_hi, max_hi), "max over sizes of the upper interval end");
                rows.add("p_c(H) < 1 probe", &h_fam, "p_inf_ci_hi", None, pc.ci.1, pc.ci, "upper end of the extrapolated interval");
                rows.add("p_c(H) < 1 probe", &h_fam, "sizes_below_one", None, crossed, (crossed, crossed), "fraction of sizes whose interval ends below 1");
            }
            let pu = estimate_pu(&g_fam, cfg.pu_size, &cfg.p_grid(), &pu_options(cfg)).context("p_u of the group family")?;
            // the estimate is a grid point; its bracket is the preceding grid step
            let lo = (pu.p_hat - cfg.p_step).max(0.0);
            rows.add("p_u(G)", &g_fam, "p_u_hat", Some(cfg.pu_size), pu.p_hat, (lo, pu.p_hat), &pu.label);
            "p_c of the limit family against p_u of the group family"
        }
        QuestionKind::Q2 => {
            let grid = cfg.lambda_grid();
            let opts = lambda_options(cfg);
            let lc = estimate_lambda_c(&h_fam, &cfg.sizes, &grid, &opts).context("lambda_c of the limit family")?;
            let ls = estimate_lambda_s(&g_fam, &cfg.sizes, &grid, &opts).context("lambda_s of the group family")?;
            rows.lambda("lambda_c(H)", &lc);
            rows.lambda("lambda_s(G)", &ls);
            "lambda_c of the limit family against lambda_s of the group family"
        }
    };
    if let Some((reference, name)) = analytic_reference(&g_fam, cfg.radius).context("local-limit reference")? {
        let mode = if cfg.samples == 0 { SampleMode::Exact } else { SampleMode::Sampled { count: cfg.samples, seed: cfg.seed } };
        let series = convergence_series(&g_fam, &cfg.sizes, cfg.radius, mode, Some(&reference), cfg.cauchy_threshold)
            .context("local-limit convergence")?;
        let note = format!("radius-{} balls against {name}", cfg.radius);
        for row in series {
            let tv = row.tv_reference.unwrap_or(f64::NAN);
            rows.add("tv to limit", &g_fam, "tv_reference", Some(row.n), tv, (tv, tv), &note);
        }
    }

    let table = rows.0;
    let mut md = String::new();
    md.push_str(&header_comment(cfg).replacen('#', "<!--", 1).replace('\n', " -->\n"));
    md.push_str(&format!("# {} probe: {}\n\n", match kind { QuestionKind::Q1 => "Q1", QuestionKind::Q2 => "Q2" }, title));
    md.push_str(&format!("Pair `{}`: G = `{}`, H = `{}`. Sizes {:?}, {} replicas, seed {}.\n\n", pair_name(cfg.pair), g_fam.name(), h_fam.name(), cfg.sizes, cfg.replicas, cfg.seed));
    md.push_str("A finite-size probe; no verdict is drawn.\n\n");
    md.push_str(&format!("| {} |\n", table.columns().join(" | ")));
    md.push_str(&format!("|{}\n", "---|".repeat(table.columns().len())));
    for r in table.rows() {
        md.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    let mut out = Outputs::default();
    out.push("question.csv", table.render(cfg));
    out.push("report.md", md.into_bytes());
    Ok(out)
}
