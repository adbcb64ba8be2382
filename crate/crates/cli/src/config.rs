//! Flat TOML experiment configuration. Every key has a default; unknown keys
//! are rejected.

use std::path::Path;

use bslab::contact::SurvivalRule;
use bslab::percolation::CrossingRule;
use bslab::stats::DecayModel;
use bslab::FamilySpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Generate,
    Bslimit,
    Theta,
    Pc,
    Pu,
    Tau,
    Clusters,
    Contact,
    Walk,
    Question,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Generate => "generate",
            ExperimentKind::Bslimit => "bslimit",
            ExperimentKind::Theta => "theta",
            ExperimentKind::Pc => "pc",
            ExperimentKind::Pu => "pu",
            ExperimentKind::Tau => "tau",
            ExperimentKind::Clusters => "clusters",
            ExperimentKind::Contact => "contact",
            ExperimentKind::Walk => "walk",
            ExperimentKind::Question => "question",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    ScaleRatio,
    Level,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactMode {
    /// Survival and late-root-infection curves on one graph.
    Curve,
    /// Weak-survival threshold across sizes.
    Weak,
    /// Strong-survival threshold across sizes.
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionKind {
    /// Percolation: `p_c` of the limit family against `p_u` of the group family.
    Q1,
    /// Contact process: `lambda_c` of the limit family against `lambda_s` of the group family.
    Q2,
}

/// Group family paired with the family of its local limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionPair {
    /// `T_d` balls against canopy truncations.
    TreeCanopy,
    /// `Z^2` boxes against themselves.
    Z2,
    /// `T_d x Z` against canopy x `Z`.
    TreeLine,
    /// `DL(m, n)` bands against horocyclic canopy products.
    Dl,
    /// Balls of `Z^2 * Z/2` against sampled local views of a large ball.
    FreeProduct,
}

/// Flat experiment configuration.
///
/// | key | default | meaning |
/// |---|---|---|
/// | `experiment` | `generate` | one of the subcommands |
/// | `family` | `tree_ball` | family name, see [`ExperimentConfig::family_spec`] |
/// | `d`, `m`, `n`, `q`, `dim`, `periodic`, `stretch` | 3, 3, 2, 7, 2, false, 1 | family parameters |
/// | `size`, `sizes` | 6, `[8..=14]` | truncation size(s) |
/// | `p`, `p_lo`, `p_hi`, `p_step` | 0.5, 0, 1, 0.01 | percolation parameter and grid |
/// | `replicas`, `bootstrap`, `seed` | 2000, 200, 0 | Monte Carlo sizes and master seed |
/// | `rule`, `level`, `model`, `nested` | scale_ratio, 0.5, power, true | threshold crossing and extrapolation |
/// | `radius`, `samples`, `cauchy_threshold`, `reference_size` | 2, 0, 0.05, 0 | local-limit series (`samples = 0` is exact) |
/// | `d_max`, `buffer`, `pairs_per_distance`, `s_min` | 8, 8, 64, 1 | connection profiles and cluster counts |
/// | `contact`, `lambda_lo`, `lambda_hi`, `lambda_step`, `horizon`, `horizon_per_size` | curve, 0, 4, 0.1, 20, 4 | contact process |
/// | `walk_replicas`, `floor`, `trend_window`, `stable_slope` | 0, 0.1, 3, -0.5 | escape probabilities |
/// | `question`, `pair`, `pu_size` | q1, tree_canopy, 6 | question reports |
/// | `out`, `threads` | `out`, 0 | output directory and worker count (0 = all cores) |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub family: String,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub q: usize,
    pub dim: usize,
    pub periodic: bool,
    pub stretch: usize,
    pub size: usize,
    pub sizes: Vec<usize>,
    pub p: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub p_step: f64,
    pub replicas: usize,
    pub bootstrap: usize,
    pub seed: u64,
    pub rule: RuleName,
    pub level: f64,
    pub model: DecayModel,
    pub nested: bool,
    pub radius: usize,
    pub samples: usize,
    pub cauchy_threshold: f64,
    /// Size of the truncation used as an empirical reference; 0 picks the
    /// analytic reference when the family has one.
    pub reference_size: usize,
    pub d_max: usize,
    pub buffer: usize,
    pub pairs_per_distance: usize,
    pub s_min: usize,
    pub contact: ContactMode,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub lambda_step: f64,
    pub horizon: f64,
    pub horizon_per_size: f64,
    pub walk_replicas: usize,
    pub floor: f64,
    pub trend_window: usize,
    pub stable_slope: f64,
    pub question: QuestionKind,
    pub pair: QuestionPair,
    /// Truncation size for the `p_u` side of a question report.
    pub pu_size: usize,
    pub out: String,
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Generate,
            family: "tree_ball".into(),
            d: 3,
            m: 3,
            n: 2,
            q: 7,
            dim: 2,
            periodic: false,
            stretch: 1,
            size: 6,
            sizes: (8..=14).collect(),
            p: 0.5,
            p_lo: 0.0,
            p_hi: 1.0,
            p_step: 0.01,
            replicas: 2000,
            bootstrap: 200,
            seed: 0,
            rule: RuleName::ScaleRatio,
            level: 0.5,
            model: DecayModel::Power,
            nested: true,
            radius: 2,
            samples: 0,
            cauchy_threshold: 0.05,
            reference_size: 0,
            d_max: 8,
            buffer: 8,
            pairs_per_distance: 64,
            s_min: 1,
            contact: ContactMode::Curve,
            lambda_lo: 0.0,
            lambda_hi: 4.0,
            lambda_step: 0.1,
            horizon: 20.0,
            horizon_per_size: 4.0,
            walk_replicas: 0,
            floor: 0.1,
            trend_window: 3,
            stable_slope: -0.5,
            question: QuestionKind::Q1,
            pair: QuestionPair::TreeCanopy,
            pu_size: 6,
            out: "out".into(),
            threads: 0,
        }
    }
}

/// Evenly spaced grid `lo, lo + step, ...` up to `hi` (inclusive within rounding).
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| lo + step * i as f64).collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigInvalid { field: field_of(&e), message: e.message().to_string() })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    /// SHA-256 of the configuration with `out` and `threads` cleared, since
    /// neither changes any result.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.out = String::new();
        c.threads = 0;
        hex(&Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn p_grid(&self) -> Vec<f64> {
        grid(self.p_lo, self.p_hi, self.p_step)
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        grid(self.lambda_lo, self.lambda_hi, self.lambda_step)
    }

    pub fn crossing_rule(&self) -> CrossingRule {
        match self.rule {
            RuleName::ScaleRatio => CrossingRule::ScaleRatio,
            RuleName::Level => CrossingRule::Level { level: self.level },
        }
    }

    pub fn survival_rule(&self) -> SurvivalRule {
        match self.rule {
            RuleName::ScaleRatio => SurvivalRule::ScaleRatio,
            RuleName::Level => SurvivalRule::Level { level: self.level },
        }
    }

    /// Family template named by `family`; sizes are applied with
    /// [`FamilySpec::with_size`].
    ///
    /// Names: `tree_ball`, `grid_box`, `line`, `half_line`, `canopy`,
    /// `tree_line` (`T_d x Z`), `canopy_line`, `stretched_canopy_line`,
    /// `dl_ball`, `horocyclic_canopy`, `free_product_z2_edge`, `hyperbolic_ball`.
    pub fn family_spec(&self) -> Result<FamilySpec, CliError> {
        family_named(self, &self.family)
    }

    /// The configured family at `size`.
    pub fn sized_family(&self) -> Result<FamilySpec, CliError> {
        Ok(self.family_spec()?.with_size(self.size))
    }

    /// Checks every parameter the experiment reads, before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        use ExperimentKind::*;
        let kind = self.experiment;
        if kind != Question {
            let fam = self.family_spec()?;
            let sized = |n: usize| fam.with_size(n).build().map_err(|e| invalid("family", e.to_string()));
            match kind {
                Generate | Theta | Tau | Clusters => {
                    sized(self.size)?;
                }
                Contact if self.contact == ContactMode::Curve => {
                    sized(self.size)?;
                }
                Pu => {
                    sized(self.size)?;
                }
                _ => {
                    for &n in &self.sizes {
                        sized(n)?;
                    }
                }
            }
        }
        let needs_sizes = matches!(kind, Pc | Bslimit | Walk) || (kind == Contact && self.contact != ContactMode::Curve);
        if needs_sizes {
            let min = if kind == Bslimit { 1 } else { 3 };
            if self.sizes.len() < min {
                return Err(invalid("sizes", format!("need at least {min} sizes")));
            }
            if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("sizes", "sizes must be strictly increasing"));
            }
        }
        if matches!(kind, Theta | Pc | Pu | Tau | Clusters | Contact | Walk | Question) && self.replicas == 0 {
            return Err(invalid("replicas", "must be >= 1"));
        }
        if matches!(kind, Theta | Pu | Question) {
            check_grid("p", self.p_lo, self.p_hi, self.p_step, 0.0, 1.0)?;
        }
        if matches!(kind, Tau | Clusters) && !(0.0..=1.0).contains(&self.p) {
            return Err(invalid("p", "must lie in [0, 1]"));
        }
        if matches!(kind, Contact | Question) {
            check_grid("lambda", self.lambda_lo, self.lambda_hi, self.lambda_step, 0.0, f64::INFINITY)?;
            if !(self.horizon > 0.0 && self.horizon.is_finite()) {
                return Err(invalid("horizon", "must be positive"));
            }
            if !(self.horizon_per_size > 0.0 && self.horizon_per_size.is_finite()) {
                return Err(invalid("horizon_per_size", "must be positive"));
            }
        }
        if self.rule == RuleName::Level && !(self.level > 0.0 && self.level < 1.0) {
            return Err(invalid("level", "must lie in (0, 1)"));
        }
        if matches!(kind, Pu | Tau | Question) && self.buffer < self.d_max {
            return Err(invalid("buffer", "must be >= d_max"));
        }
        if kind == Walk {
            if !(self.floor > 0.0 && self.floor < 1.0) {
                return Err(invalid("floor", "must lie in (0, 1)"));
            }
            if self.trend_window < 2 || self.trend_window > self.sizes.len() {
                return Err(invalid("trend_window", format!("must be in 2..={}", self.sizes.len())));
            }
        }
        if !(0.0..=1.0).contains(&self.cauchy_threshold) {
            return Err(invalid("cauchy_threshold", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

fn check_grid(name: &str, lo: f64, hi: f64, step: f64, min: f64, max: f64) -> Result<(), CliError> {
    if !(lo >= min && hi <= max && lo <= hi) {
        return Err(invalid(&format!("{name}_lo"), format!("grid [{lo}, {hi}] must lie in [{min}, {max}]")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid(&format!("{name}_step"), "must be positive"));
    }
    Ok(())
}

fn family_named(c: &ExperimentConfig, name: &str) -> Result<FamilySpec, CliError> {
    let line = FamilySpec::line(0);
    Ok(match name {
        "tree_ball" => FamilySpec::TreeBall { d: c.d, radius: 0 },
        "grid_box" => FamilySpec::GridBox { dims: vec![1; c.dim.max(1)], periodic: c.periodic },
        "line" => line,
        "half_line" => FamilySpec::HalfLine { len: 0 },
        "canopy" => FamilySpec::Canopy { d: c.d, height: 0 },
        "tree_line" => FamilySpec::product(FamilySpec::TreeBall { d: c.d, radius: 0 }, line),
        "canopy_line" => FamilySpec::product(FamilySpec::Canopy { d: c.d, height: 0 }, line),
        "stretched_canopy_line" => {
            FamilySpec::stretched(FamilySpec::product(FamilySpec::Canopy { d: c.d, height: 0 }, line), c.stretch)
        }
        "dl_ball" => FamilySpec::DlBall { m: c.m, n: c.n, height: 0 },
        "horocyclic_canopy" => FamilySpec::HorocyclicCanopy { m: c.m, n: c.n, height: 0 },
        "free_product_z2_edge" => FamilySpec::FreeProductZ2Edge { radius: 0 },
        "hyperbolic_ball" => FamilySpec::HyperbolicBall { q: c.q, radius: 0 },
        other => return Err(invalid("family", format!("unknown family {other:?}"))),
    })
}

fn field_of(e: &toml::de::Error) -> String {
    // toml names the offending key in the message for unknown fields
    let msg = e.message();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        return rest.split('`').next().unwrap_or("").to_string();
    }
    e.span()
        .map(|s| format!("bytes {}..{}", s.start, s.end))
        .unwrap_or_else(|| "config".into())
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
