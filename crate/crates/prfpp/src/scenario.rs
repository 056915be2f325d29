//! Scenario files: a single TOML document describing what to solve, with
//! which parameters, and (for mean-field scenarios) which parameter sweeps to
//! run. Unknown keys are rejected; market and preference invariants are
//! enforced on load; parse errors carry the line and column from the TOML
//! reader.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::market::{AgentPreferences, AgentSpec, CommonNoiseParams, MarketPeriodParams};
use crate::mfg::{ParamDistribution, PopulationSpec};

/// Which solver family a scenario drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    NashHomogeneous,
    #[serde(rename = "nash-2agent")]
    Nash2agent,
    Mfg,
    SingleStock,
    Independent,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::NashHomogeneous => "nash-homogeneous",
            Mode::Nash2agent => "nash-2agent",
            Mode::Mfg => "mfg",
            Mode::SingleStock => "single-stock",
            Mode::Independent => "independent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Population sample size M for mean-field scenarios.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { tol: 1e-12, max_iter: 10_000, samples: 10_000, seed: 42 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CommonNoiseTable {
    pub p_cn: f64,
}

/// Preference block of the fixed / homogeneous agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PrefsTable {
    pub gamma: f64,
    pub theta: f64,
    #[serde(default)]
    pub x0: f64,
}

impl PrefsTable {
    pub fn to_prefs(&self) -> Result<AgentPreferences> {
        AgentPreferences::new(self.gamma, self.theta, self.x0)
    }
}

/// Market block. Either regime probabilities (requiring a common-noise
/// section) or a bare unconditional `p` (independent / single-stock setups
/// without regime exposure).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MarketTable {
    pub u: f64,
    pub d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_bull: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_bear: Option<f64>,
}

impl MarketTable {
    pub fn to_market(&self, cn: Option<&CommonNoiseParams>) -> Result<MarketPeriodParams> {
        match (self.p_bull, self.p_bear, self.p, cn) {
            (Some(pb), Some(pr), None, Some(c)) => {
                MarketPeriodParams::new(self.u, self.d, pb, pr, c)
            }
            (Some(pb), Some(pr), Some(p), Some(c)) => {
                MarketPeriodParams::with_unconditional(self.u, self.d, p, pb, pr, c)
            }
            (Some(_), Some(_), _, None) => Err(Error::Domain(
                "market with regime probabilities needs a [common-noise] section".into(),
            )),
            (None, None, Some(p), _) => MarketPeriodParams::without_common_noise(self.u, self.d, p),
            _ => Err(Error::Domain(
                "market must give either p-bull and p-bear, or a bare p".into(),
            )),
        }
    }
}

/// One fully specified agent of a heterogeneous 2-agent game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AgentEntry {
    pub gamma: f64,
    pub theta: f64,
    #[serde(default)]
    pub x0: f64,
    pub u: f64,
    pub d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub p_bull: f64,
    pub p_bear: f64,
}

impl AgentEntry {
    pub fn to_spec(&self, cn: &CommonNoiseParams) -> Result<AgentSpec> {
        let market = match self.p {
            Some(p) => MarketPeriodParams::with_unconditional(
                self.u, self.d, p, self.p_bull, self.p_bear, cn,
            )?,
            None => MarketPeriodParams::new(self.u, self.d, self.p_bull, self.p_bear, cn)?,
        };
        Ok(AgentSpec::new(
            AgentPreferences::new(self.gamma, self.theta, self.x0)?,
            market,
        ))
    }
}

/// Population distribution block for mean-field scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PopulationTable {
    pub gamma: ParamDistribution,
    pub theta: ParamDistribution,
    pub u: ParamDistribution,
    pub d: ParamDistribution,
    pub p_bull: ParamDistribution,
    pub p_bear: ParamDistribution,
    #[serde(default)]
    pub allow_equal_regimes: bool,
}

impl PopulationTable {
    pub fn to_spec(&self, cn: &CommonNoiseParams) -> Result<PopulationSpec> {
        let spec = PopulationSpec {
            gamma: self.gamma,
            theta: self.theta,
            u: self.u,
            d: self.d,
            p_bull: self.p_bull,
            p_bear: self.p_bear,
            p_cn: cn.p_cn,
            allow_equal_regimes: self.allow_equal_regimes,
        };
        spec.validate().map_err(Error::Invalid)?;
        Ok(spec)
    }
}

/// Shared-stock inputs: a finite agent list, mean-field aggregates, or both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SingleStockTable {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub agents: Vec<PrefsTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inv_gamma_bar: Option<f64>,
}

/// Linear function of the sweep index z: intercept + slope * z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct LinearInZ {
    pub intercept: f64,
    pub slope: f64,
}

impl LinearInZ {
    pub fn at(&self, z: f64) -> f64 {
        self.intercept + self.slope * z
    }
}

/// One sweep axis. "Own" axes vary the fixed agent against an unchanged
/// population; "network" axes shift the population distributions (under
/// common random numbers) and re-solve the fixed point per grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    rename_all_fields = "kebab-case",
    deny_unknown_fields
)]
pub enum SweepAxis {
    /// Fixed agent's competition weight over `grid`.
    OwnTheta { grid: Vec<f64> },
    /// Fixed agent's risk aversion over `grid`.
    OwnGamma { grid: Vec<f64> },
    /// Fixed agent's u over `u-grid`, d adjusted to hold mean and p.
    OwnVolatility { u_grid: Vec<f64> },
    /// Fixed agent's u over `u-grid`, d and p held fixed.
    OwnExpectedReturn { u_grid: Vec<f64> },
    /// Fixed agent's u over `u-grid`, p adjusted to hold mean and d.
    OwnSkewPositive { u_grid: Vec<f64> },
    /// Fixed agent's d over `d-grid`, p adjusted to hold mean and u.
    OwnSkewNegative { d_grid: Vec<f64> },
    /// Shift the population theta distribution by `shift(z)`.
    NetworkTheta { z_grid: Vec<f64>, shift: LinearInZ },
    /// Shift the population gamma distribution by `shift(z)`.
    NetworkGamma { z_grid: Vec<f64>, shift: LinearInZ },
    /// Shift each draw's u by `u-shift(z)`, d adjusted to hold the draw's
    /// mean and p.
    NetworkVolatility { z_grid: Vec<f64>, u_shift: LinearInZ },
    /// Shift each draw's u by `u-shift(z)`, d and p held fixed.
    NetworkExpectedReturn { z_grid: Vec<f64>, u_shift: LinearInZ },
    /// Shift each draw's u by `u-shift(z)`, transition probabilities adjusted
    /// to hold the draw's mean and d.
    NetworkSkewPositive { z_grid: Vec<f64>, u_shift: LinearInZ },
    /// Shift each draw's d by `d-shift(z)`, transition probabilities adjusted
    /// to hold the draw's mean and u.
    NetworkSkewNegative { z_grid: Vec<f64>, d_shift: LinearInZ },
}

impl SweepAxis {
    /// Name of the swept parameter for the CSV `parameter` column.
    pub fn parameter(&self) -> &'static str {
        match self {
            SweepAxis::OwnTheta { .. } => "theta",
            SweepAxis::OwnGamma { .. } => "gamma",
            SweepAxis::OwnVolatility { .. }
            | SweepAxis::OwnExpectedReturn { .. }
            | SweepAxis::OwnSkewPositive { .. } => "u",
            SweepAxis::OwnSkewNegative { .. } => "d",
            _ => "z",
        }
    }

    pub fn grid(&self) -> &[f64] {
        match self {
            SweepAxis::OwnTheta { grid } | SweepAxis::OwnGamma { grid } => grid,
            SweepAxis::OwnVolatility { u_grid }
            | SweepAxis::OwnExpectedReturn { u_grid }
            | SweepAxis::OwnSkewPositive { u_grid } => u_grid,
            SweepAxis::OwnSkewNegative { d_grid } => d_grid,
            SweepAxis::NetworkTheta { z_grid, .. }
            | SweepAxis::NetworkGamma { z_grid, .. }
            | SweepAxis::NetworkVolatility { z_grid, .. }
            | SweepAxis::NetworkExpectedReturn { z_grid, .. }
            | SweepAxis::NetworkSkewPositive { z_grid, .. }
            | SweepAxis::NetworkSkewNegative { z_grid, .. } => z_grid,
        }
    }

    pub fn is_network(&self) -> bool {
        matches!(
            self,
            SweepAxis::NetworkTheta { .. }
                | SweepAxis::NetworkGamma { .. }
                | SweepAxis::NetworkVolatility { .. }
                | SweepAxis::NetworkExpectedReturn { .. }
                | SweepAxis::NetworkSkewPositive { .. }
                | SweepAxis::NetworkSkewNegative { .. }
        )
    }
}

/// Overrides a sweep block applies to the population distributions before
/// the axis transformation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PopulationOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<ParamDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<ParamDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<ParamDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<ParamDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_bull: Option<ParamDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_bear: Option<ParamDistribution>,
}

impl PopulationOverride {
    pub fn apply(&self, base: &PopulationSpec) -> PopulationSpec {
        PopulationSpec {
            gamma: self.gamma.unwrap_or(base.gamma),
            theta: self.theta.unwrap_or(base.theta),
            u: self.u.unwrap_or(base.u),
            d: self.d.unwrap_or(base.d),
            p_bull: self.p_bull.unwrap_or(base.p_bull),
            p_bear: self.p_bear.unwrap_or(base.p_bear),
            p_cn: base.p_cn,
            allow_equal_regimes: base.allow_equal_regimes,
        }
    }
}

/// Overrides for the fixed agent within one sweep block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AgentOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_bull: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_bear: Option<f64>,
}

/// One named sweep panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepBlock {
    pub name: String,
    pub axis: SweepAxis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population_override: Option<PopulationOverride>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent_override: Option<AgentOverride>,
}

/// The full scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ScenarioFile {
    pub mode: Mode,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Horizon for multi-period forward-process verification (capped at 3).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub common_noise: Option<CommonNoiseTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent: Option<PrefsTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_agents: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub agents: Vec<AgentEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population: Option<PopulationTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_stock: Option<SingleStockTable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepBlock>,
}

impl ScenarioFile {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Domain(format!("serialize scenario: {e}")))
    }

    /// Structural checks beyond serde: every mode's required sections present
    /// and inapplicable ones absent.
    fn check_schema(&self, source: &str) -> Result<()> {
        let schema_err = |msg: &str| Error::ScenarioSchema {
            path: source.to_string(),
            message: msg.to_string(),
        };
        let need = |cond: bool, msg: &str| if cond { Ok(()) } else { Err(schema_err(msg)) };
        match self.mode {
            Mode::NashHomogeneous => {
                need(self.common_noise.is_some(), "nash-homogeneous needs [common-noise]")?;
                need(self.agent.is_some(), "nash-homogeneous needs [agent]")?;
                need(self.market.is_some(), "nash-homogeneous needs [market]")?;
                need(self.n_agents.is_some(), "nash-homogeneous needs n-agents")?;
                need(self.agents.is_empty(), "nash-homogeneous takes no [[agents]]")?;
                need(self.population.is_none(), "nash-homogeneous takes no [population]")?;
                need(self.sweep.is_empty(), "sweeps are defined for mfg scenarios only")?;
            }
            Mode::Nash2agent => {
                need(self.common_noise.is_some(), "nash-2agent needs [common-noise]")?;
                need(self.agents.len() == 2, "nash-2agent needs exactly two [[agents]]")?;
                need(self.population.is_none(), "nash-2agent takes no [population]")?;
                need(self.sweep.is_empty(), "sweeps are defined for mfg scenarios only")?;
            }
            Mode::Mfg => {
                need(self.common_noise.is_some(), "mfg needs [common-noise]")?;
                need(self.agent.is_some(), "mfg needs [agent] (the fixed agent)")?;
                need(self.market.is_some(), "mfg needs [market] (the fixed agent's market)")?;
                need(self.population.is_some(), "mfg needs [population]")?;
                need(self.agents.is_empty(), "mfg takes no [[agents]]")?;
            }
            Mode::SingleStock => {
                need(self.market.is_some(), "single-stock needs [market]")?;
                need(self.single_stock.is_some(), "single-stock needs [single-stock]")?;
                need(self.population.is_none(), "single-stock takes no [population]")?;
                need(self.sweep.is_empty(), "sweeps are defined for mfg scenarios only")?;
                let table = self.single_stock.as_ref().expect("checked");
                let has_aggregates = table.theta_bar.is_some() || table.inv_gamma_bar.is_some();
                if has_aggregates {
                    need(
                        table.theta_bar.is_some() && table.inv_gamma_bar.is_some(),
                        "single-stock aggregates need both theta-bar and inv-gamma-bar",
                    )?;
                    need(
                        self.agent.is_some(),
                        "single-stock aggregates need [agent] for the representative preferences",
                    )?;
                }
                need(
                    !table.agents.is_empty() || has_aggregates,
                    "single-stock needs an agents list or aggregates",
                )?;
            }
            Mode::Independent => {
                need(self.agent.is_some(), "independent needs [agent]")?;
                need(self.market.is_some(), "independent needs [market]")?;
                need(self.population.is_none(), "independent takes no [population]")?;
                need(self.sweep.is_empty(), "sweeps are defined for mfg scenarios only")?;
            }
        }
        if let Some(h) = self.horizon {
            need(
                (1..=crate::forward::MAX_EXACT_HORIZON).contains(&h),
                "horizon must lie in 1..=3 (exact-tree cap)",
            )?;
        }
        Ok(())
    }
}

/// A loaded scenario: the parsed document, where it came from, and a sha-256
/// prefix of its text for provenance columns.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub source: String,
    pub hash: String,
}

/// Bundled experiment definitions, addressable by name from the CLI.
pub const BUNDLED: &[(&str, &str)] = &[
    ("benchmark_mfg", include_str!("../scenarios/benchmark_mfg.toml")),
    ("shorting_2agent", include_str!("../scenarios/shorting_2agent.toml")),
    ("homogeneous_10", include_str!("../scenarios/homogeneous_10.toml")),
    ("figure1", include_str!("../scenarios/figure1.toml")),
    ("figure2", include_str!("../scenarios/figure2.toml")),
    ("figure3", include_str!("../scenarios/figure3.toml")),
    ("figure4", include_str!("../scenarios/figure4.toml")),
    ("figure5", include_str!("../scenarios/figure5.toml")),
    ("single_stock", include_str!("../scenarios/single_stock.toml")),
    ("independent", include_str!("../scenarios/independent.toml")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Parse scenario text. `source` labels error messages (a path or bundle
/// name).
pub fn parse_scenario(text: &str, source: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::ScenarioParse {
        path: source.to_string(),
        // the toml error's Display already carries line/column and a snippet
        message: e.to_string(),
    })?;
    file.check_schema(source)?;
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let hash = hex_prefix(&hasher.finalize());
    Ok(Scenario { file, source: source.to_string(), hash })
}

fn hex_prefix(bytes: &[u8]) -> String {
    bytes.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Load a scenario from a file path, or fall back to the bundled scenario of
/// that name.
pub fn load_scenario(path_or_name: &str) -> Result<Scenario> {
    if std::path::Path::new(path_or_name).exists() {
        let text = std::fs::read_to_string(path_or_name)?;
        return parse_scenario(&text, path_or_name);
    }
    if let Some(text) = bundled(path_or_name) {
        return parse_scenario(text, path_or_name);
    }
    Err(Error::ScenarioParse {
        path: path_or_name.to_string(),
        message: format!(
            "no such file, and no bundled scenario of that name (bundled: {})",
            BUNDLED.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
        ),
    })
}
