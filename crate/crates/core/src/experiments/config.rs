//! `wn-config/1`: JSON experiment configuration. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, DomainSpecKind, LevelSetDomain};
use crate::error::{Error, Result};
use crate::function::CylFunction;
use crate::gaussian::{GaussianModel, DEFAULT_QUAD_ORDER};
use crate::moreau::{Weight, WeightPreset};
use crate::poly::Poly;

pub const CONFIG_SCHEMA: &str = "wn-config/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema: String,
    pub domain: DomainSpec,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default)]
    pub weight: WeightSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
}

fn default_quad_order() -> usize {
    DEFAULT_QUAD_ORDER
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub preset: WeightPreset,
    /// Coefficients `c` of the linear preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self {
            preset: WeightPreset::Zero,
            params: None,
        }
    }
}

/// A polynomial in the standardized coordinates as `[coefficient, [exponents]]` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySpec(pub Vec<(f64, Vec<u32>)>);

impl PolySpec {
    pub fn build(&self, model: &GaussianModel) -> Result<CylFunction> {
        let n = model.dim();
        for (_, e) in &self.0 {
            if e.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: e.len() });
            }
        }
        Ok(model.poly(Poly::from_terms(n, self.0.iter().cloned())))
    }
}

/// Command-specific settings; every field has a default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Number of seeded probes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Degree of the seeded probes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    /// Right-hand side for `solve` and `penalize`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<PolySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    /// Normal mesh width of the slab solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<f64>,
    /// Hermite degree of the spectral and tangential bases.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_degree: Option<usize>,
    /// Replaces the threshold of the main check of the command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Two quadrature orders for stability checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_orders: Option<[usize; 2]>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        if cfg.schema != CONFIG_SCHEMA {
            return Err(Error::InvalidParameter(format!(
                "config schema `{}`, expected `{CONFIG_SCHEMA}`",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn new(domain: DomainSpec) -> Self {
        Self {
            schema: CONFIG_SCHEMA.into(),
            domain,
            quad_order: DEFAULT_QUAD_ORDER,
            weight: WeightSpec::default(),
            seed: default_seed(),
            params: Params::default(),
        }
    }

    pub fn with_weight(mut self, preset: WeightPreset) -> Self {
        self.weight = WeightSpec { preset, params: None };
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn build(&self) -> Result<(GaussianModel, Option<LevelSetDomain>, Weight)> {
        let (model, domain) = self.domain.build(self.quad_order)?;
        let weight = Weight::preset(&model, self.weight.preset, self.weight.params.as_deref())?;
        Ok((model, domain, weight))
    }

    pub fn is_whole_space(&self) -> bool {
        self.domain.kind == DomainSpecKind::WholeSpace
    }
}

/// Domain specs used by the defaults and the tests.
pub fn half_space(spectrum: &[f64], a: &[f64], r: f64) -> DomainSpec {
    DomainSpec {
        kind: DomainSpecKind::HalfSpace,
        a: Some(a.to_vec()),
        r: Some(r),
        spectrum: spectrum.to_vec(),
    }
}

pub fn whole_space(spectrum: &[f64]) -> DomainSpec {
    DomainSpec {
        kind: DomainSpecKind::WholeSpace,
        a: None,
        r: None,
        spectrum: spectrum.to_vec(),
    }
}

pub fn unit_ball(spectrum: &[f64]) -> DomainSpec {
    DomainSpec {
        kind: DomainSpecKind::UnitBall,
        a: None,
        r: None,
        spectrum: spectrum.to_vec(),
    }
}
