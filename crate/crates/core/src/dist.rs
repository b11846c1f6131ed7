//! Parametric distribution families.
//!
//! Five families are supported: binomial, Poisson, normal, gamma (shape/scale,
//! density `x^(a-1) exp(-x/b) / (b^a Γ(a))`) and Weibull (shape/scale). Every
//! density is evaluated in log space; factorials and gamma functions go through
//! `ln Γ` so large support points do not overflow.
//!
//! Sampling draws from [`rand_distr`] driven by a ChaCha8 stream generator
//! ([`seeded_rng`]). The seed is always an explicit argument. Algorithms, as
//! provided by `rand_distr` 0.5: BTPE/inversion for binomial, PTRS/inversion for
//! Poisson, ziggurat for normal, Marsaglia–Tsang for gamma, inverse CDF for
//! Weibull. Versions are pinned by the lock file, so draws are stable.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// ChaCha8 generator for stream `stream` of `seed`.
///
/// Independent replications use distinct streams of the same seed, so serial and
/// parallel runs draw identical numbers.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Anything with a (log) density or mass function on the real line.
pub trait Density {
    /// Natural log of the density; `-inf` off the support.
    fn log_density(&self, x: f64) -> f64;

    fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Binomial,
    Poisson,
    Normal,
    Gamma,
    Weibull,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Binomial,
        Family::Poisson,
        Family::Normal,
        Family::Gamma,
        Family::Weibull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Binomial => "binomial",
            Family::Poisson => "poisson",
            Family::Normal => "normal",
            Family::Gamma => "gamma",
            Family::Weibull => "weibull",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Binomial => &["n", "p"],
            Family::Poisson => &["lambda"],
            Family::Normal => &["m", "sigma"],
            Family::Gamma => &["a", "b"],
            Family::Weibull => &["shape", "scale"],
        }
    }

    pub fn param_count(self) -> usize {
        self.param_names().len()
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, Family::Binomial | Family::Poisson)
    }

    fn param_index(self, name: &str) -> Option<usize> {
        let idx = match (self, name) {
            (Family::Binomial, "n" | "trials") => 0,
            (Family::Binomial, "p") => 1,
            (Family::Poisson, "lambda" | "rate") => 0,
            (Family::Normal, "m" | "mean" | "mu") => 0,
            (Family::Normal, "sigma" | "sd") => 1,
            (Family::Gamma, "a" | "shape") => 0,
            (Family::Gamma, "b" | "scale") => 1,
            (Family::Weibull, "shape" | "k") => 0,
            (Family::Weibull, "scale") => 1,
            _ => return None,
        };
        Some(idx)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Family::ALL
            .into_iter()
            .find(|f| f.name() == lower)
            .ok_or_else(|| Error::Parse(format!("unknown family `{}`", s.trim())))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a family puts its mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    IntegerRange { lo: u64, hi: u64 },
    NonNegativeIntegers,
    RealLine,
    NonNegativeReals,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::IntegerRange { lo, hi } => as_count(x).is_some_and(|k| k >= lo && k <= hi),
            Support::NonNegativeIntegers => as_count(x).is_some(),
            Support::RealLine => x.is_finite(),
            Support::NonNegativeReals => x.is_finite() && x >= 0.0,
        }
    }
}

/// `x` as a nonnegative integer when it is one (within 1e-9).
fn as_count(x: f64) -> Option<u64> {
    let r = x.round();
    if x.is_finite() && r >= 0.0 && (x - r).abs() <= 1e-9 {
        Some(r as u64)
    } else {
        None
    }
}

fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// A member of one of the supported families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DistributionModel {
    family: Family,
    params: [f64; 2],
}

impl DistributionModel {
    /// Builds and validates a model. `params` follows [`Family::param_names`].
    pub fn new(family: Family, params: &[f64]) -> Result<Self> {
        if params.len() != family.param_count() {
            return Err(Error::InvalidModel(format!(
                "{} takes {} parameter(s), got {}",
                family,
                family.param_count(),
                params.len()
            )));
        }
        let mut p = [0.0; 2];
        p[..params.len()].copy_from_slice(params);
        let model = DistributionModel { family, params: p };
        model.validate()?;
        Ok(model)
    }

    pub fn binomial(trials: u64, p: f64) -> Result<Self> {
        Self::new(Family::Binomial, &[trials as f64, p])
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(Family::Poisson, &[lambda])
    }

    pub fn normal(mean: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::Normal, &[mean, sigma])
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Self::new(Family::Gamma, &[shape, scale])
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Self::new(Family::Weibull, &[shape, scale])
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if self.params().iter().any(|v| !v.is_finite()) {
            return bad(format!("non-finite parameter in {self}"));
        }
        let [a, b] = self.params;
        match self.family {
            Family::Binomial => {
                if as_count(a).is_none_or(|n| n < 1) {
                    return bad(format!("binomial trials must be an integer >= 1, got {a}"));
                }
                if !(b > 0.0 && b < 1.0) {
                    return bad(format!("binomial p must lie in (0,1), got {b}"));
                }
            }
            Family::Poisson => {
                if a <= 0.0 {
                    return bad(format!("poisson lambda must be > 0, got {a}"));
                }
            }
            Family::Normal => {
                if b <= 0.0 {
                    return bad(format!("normal sigma must be > 0, got {b}"));
                }
            }
            Family::Gamma | Family::Weibull => {
                if a <= 0.0 || b <= 0.0 {
                    return bad(format!("{} shape and scale must be > 0", self.family));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params[..self.family.param_count()]
    }

    pub fn param(&self, index: usize) -> f64 {
        self.params()[index]
    }

    /// Copy of the model with parameter `index` replaced, validated.
    pub fn with_param(&self, index: usize, value: f64) -> Result<Self> {
        if index >= self.family.param_count() {
            return Err(Error::InvalidModel(format!(
                "{} has no parameter #{index}",
                self.family
            )));
        }
        let mut params = self.params;
        params[index] = value;
        let model = DistributionModel {
            family: self.family,
            params,
        };
        model.validate()?;
        Ok(model)
    }

    fn trials(&self) -> u64 {
        self.params[0].round() as u64
    }

    pub fn support(&self) -> Support {
        match self.family {
            Family::Binomial => Support::IntegerRange {
                lo: 0,
                hi: self.trials(),
            },
            Family::Poisson => Support::NonNegativeIntegers,
            Family::Normal => Support::RealLine,
            Family::Gamma | Family::Weibull => Support::NonNegativeReals,
        }
    }

    pub fn mean(&self) -> f64 {
        let [a, b] = self.params;
        match self.family {
            Family::Binomial => a * b,
            Family::Poisson => a,
            Family::Normal => a,
            Family::Gamma => a * b,
            Family::Weibull => b * ln_gamma(1.0 + 1.0 / a).exp(),
        }
    }

    pub fn variance(&self) -> f64 {
        let [a, b] = self.params;
        match self.family {
            Family::Binomial => a * b * (1.0 - b),
            Family::Poisson => a,
            Family::Normal => b * b,
            Family::Gamma => a * b * b,
            Family::Weibull => {
                let g1 = ln_gamma(1.0 + 1.0 / a).exp();
                let g2 = ln_gamma(1.0 + 2.0 / a).exp();
                b * b * (g2 - g1 * g1)
            }
        }
    }

    /// One draw using `rng`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let [a, b] = self.params;
        // Parameters are validated at construction, so the constructors below cannot fail.
        match self.family {
            Family::Binomial => rand_distr::Binomial::new(self.trials(), b)
                .expect("validated binomial")
                .sample(rng) as f64,
            Family::Poisson => rand_distr::Poisson::new(a)
                .expect("validated poisson")
                .sample(rng),
            Family::Normal => rand_distr::Normal::new(a, b)
                .expect("validated normal")
                .sample(rng),
            Family::Gamma => rand_distr::Gamma::new(a, b)
                .expect("validated gamma")
                .sample(rng),
            Family::Weibull => rand_distr::Weibull::new(b, a)
                .expect("validated weibull")
                .sample(rng),
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.draw(rng)).collect()
    }

    /// `count` draws, fully determined by `(self, count, seed)`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::EmptySample);
        }
        let mut rng = seeded_rng(seed, 0);
        Ok(self.sample_with(&mut rng, count))
    }
}

impl Density for DistributionModel {
    fn log_density(&self, x: f64) -> f64 {
        let [a, b] = self.params;
        match self.family {
            Family::Binomial => {
                let n = self.trials();
                match as_count(x) {
                    Some(k) if k <= n => {
                        ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
                            + k as f64 * b.ln()
                            + (n - k) as f64 * (-b).ln_1p()
                    }
                    _ => f64::NEG_INFINITY,
                }
            }
            Family::Poisson => match as_count(x) {
                Some(k) => k as f64 * a.ln() - a - ln_factorial(k),
                None => f64::NEG_INFINITY,
            },
            Family::Normal => {
                if !x.is_finite() {
                    return f64::NEG_INFINITY;
                }
                let z = (x - a) / b;
                -0.5 * z * z - b.ln() - LN_SQRT_2PI
            }
            Family::Gamma => {
                if !(x >= 0.0 && x.is_finite()) {
                    return f64::NEG_INFINITY;
                }
                if x == 0.0 {
                    return match a.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => -b.ln(),
                        _ => f64::NEG_INFINITY,
                    };
                }
                (a - 1.0) * x.ln() - x / b - a * b.ln() - ln_gamma(a)
            }
            Family::Weibull => {
                if !(x >= 0.0 && x.is_finite()) {
                    return f64::NEG_INFINITY;
                }
                if x == 0.0 {
                    return match a.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => -b.ln(),
                        _ => f64::NEG_INFINITY,
                    };
                }
                let z = x / b;
                a.ln() - b.ln() + (a - 1.0) * z.ln() - z.powf(a)
            }
        }
    }
}

impl fmt::Display for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.family)?;
        for (i, (name, value)) in self
            .family
            .param_names()
            .iter()
            .zip(self.params())
            .enumerate()
        {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{name}={value}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for DistributionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let template: ModelTemplate = s.parse()?;
        if !template.free_indices().is_empty() {
            return Err(Error::Parse(format!(
                "`{}`: every parameter needs a value",
                s.trim()
            )));
        }
        template.instantiate(&[])
    }
}

impl TryFrom<String> for DistributionModel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DistributionModel> for String {
    fn from(m: DistributionModel) -> String {
        m.to_string()
    }
}

/// A family with some parameters fixed and the rest left free for estimation.
///
/// Literal syntax: `gamma(a=7,b=?)`; an omitted parameter is also free, so
/// `binomial(n=10)` frees `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModelTemplate {
    family: Family,
    params: [Option<f64>; 2],
}

impl ModelTemplate {
    pub fn new(family: Family, params: &[Option<f64>]) -> Result<Self> {
        if params.len() != family.param_count() {
            return Err(Error::InvalidModel(format!(
                "{} takes {} parameter(s), got {}",
                family,
                family.param_count(),
                params.len()
            )));
        }
        if family == Family::Binomial && params[0].is_none() {
            return Err(Error::InvalidModel(
                "binomial trials must be fixed; only p can be estimated".into(),
            ));
        }
        let mut p = [None; 2];
        p[..params.len()].copy_from_slice(params);
        Ok(ModelTemplate { family, params: p })
    }

    /// Template from a full model, freeing the parameters in `free`.
    pub fn from_model(model: &DistributionModel, free: &[usize]) -> Result<Self> {
        let params: Vec<Option<f64>> = model
            .params()
            .iter()
            .enumerate()
            .map(|(i, &v)| if free.contains(&i) { None } else { Some(v) })
            .collect();
        Self::new(model.family(), &params)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn fixed(&self, index: usize) -> Option<f64> {
        self.params[..self.family.param_count()][index]
    }

    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.family.param_count())
            .filter(|&i| self.params[i].is_none())
            .collect()
    }

    pub fn free_names(&self) -> Vec<&'static str> {
        let names = self.family.param_names();
        self.free_indices().into_iter().map(|i| names[i]).collect()
    }

    /// Full model with the free parameters set to `free_values` (in index order).
    pub fn instantiate(&self, free_values: &[f64]) -> Result<DistributionModel> {
        let free = self.free_indices();
        if free.len() != free_values.len() {
            return Err(Error::InvalidModel(format!(
                "{} free parameter(s), {} value(s) supplied",
                free.len(),
                free_values.len()
            )));
        }
        let mut values = [0.0; 2];
        let mut next = free_values.iter();
        for (i, slot) in values
            .iter_mut()
            .enumerate()
            .take(self.family.param_count())
        {
            *slot = match self.params[i] {
                Some(v) => v,
                None => *next.next().expect("length checked"),
            };
        }
        DistributionModel::new(self.family, &values[..self.family.param_count()])
    }
}

impl fmt::Display for ModelTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.family)?;
        for (i, name) in self.family.param_names().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match self.params[i] {
                Some(v) => write!(f, "{name}={v}")?,
                None => write!(f, "{name}=?")?,
            }
        }
        f.write_str(")")
    }
}

impl FromStr for ModelTemplate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        let err = |msg: &str| Error::Parse(format!("`{text}`: {msg}"));
        let open = text
            .find('(')
            .ok_or_else(|| err("expected `family(...)`"))?;
        let inner = text[open + 1..]
            .trim_end()
            .strip_suffix(')')
            .ok_or_else(|| err("missing closing `)`"))?;
        let family: Family = text[..open].parse()?;
        let mut params = vec![None; family.param_count()];
        let mut seen = [false; 2];
        for arg in inner.split(',').map(str::trim).filter(|a| !a.is_empty()) {
            let (name, value) = arg
                .split_once('=')
                .ok_or_else(|| err(&format!("expected name=value, got `{arg}`")))?;
            let name = name.trim().to_ascii_lowercase();
            let idx = family
                .param_index(&name)
                .ok_or_else(|| err(&format!("unknown parameter `{name}` for {family}")))?;
            if seen[idx] {
                return Err(err(&format!("parameter `{name}` given twice")));
            }
            seen[idx] = true;
            let value = value.trim();
            params[idx] = if value == "?" {
                None
            } else {
                Some(
                    value
                        .parse::<f64>()
                        .map_err(|_| err(&format!("bad number `{value}`")))?,
                )
            };
        }
        ModelTemplate::new(family, &params).map_err(|e| match e {
            Error::InvalidModel(m) => Error::Parse(m),
            other => other,
        })
    }
}

impl TryFrom<String> for ModelTemplate {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelTemplate> for String {
    fn from(m: ModelTemplate) -> String {
        m.to_string()
    }
}

/// A fully specified pmf on finitely many points, e.g. `g(x) = x/6` on {1,2,3}.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePmf {
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl FinitePmf {
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::InvalidModel(
                "pmf needs matching nonempty points/probs".into(),
            ));
        }
        if probs.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidModel(
                "pmf probabilities must be finite and >= 0".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!("pmf sums to {total}, not 1")));
        }
        Ok(FinitePmf { points, probs })
    }
}

impl Density for FinitePmf {
    fn log_density(&self, x: f64) -> f64 {
        self.points
            .iter()
            .position(|&p| p == x)
            .map_or(f64::NEG_INFINITY, |i| self.probs[i].ln())
    }
}

/// Which user parameter an exponential form frees, and what is held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FormKind {
    /// `p` with `n` known: T(x)=x, K(x)=C(n,x), θ=logit p, A(θ)=n ln(1+e^θ).
    BinomialP { trials: u64 },
    /// `λ`: T(x)=x, K(x)=1/x!, θ=ln λ, A(θ)=e^θ.
    PoissonLambda,
    /// `m` with σ known: T(x)=x/σ², K(x)=φ(x/σ)/σ, θ=m, A(θ)=θ²/(2σ²).
    NormalMean { sigma: f64 },
    /// `b` with shape known: T(x)=-x, K(x)=x^(a-1)/Γ(a), θ=1/b, A(θ)=-a ln θ.
    GammaScale { shape: f64 },
}

/// One-parameter exponential-family view `f(x) = K(x) exp(θ T(x) - A(θ))` of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFamilyForm {
    kind: FormKind,
    free_index: usize,
    natural: f64,
}

impl ExpFamilyForm {
    /// Exponential form of `model` in parameter `free_param_index`, the others held fixed.
    pub fn new(model: &DistributionModel, free_param_index: usize) -> Result<Self> {
        let names = model.family().param_names();
        let unsupported = || Error::UnsupportedForm {
            family: model.family().name(),
            param: names.get(free_param_index).copied().unwrap_or("?"),
        };
        let kind = match (model.family(), free_param_index) {
            (Family::Binomial, 1) => FormKind::BinomialP {
                trials: model.trials(),
            },
            (Family::Poisson, 0) => FormKind::PoissonLambda,
            (Family::Normal, 0) => FormKind::NormalMean {
                sigma: model.param(1),
            },
            (Family::Gamma, 1) => FormKind::GammaScale {
                shape: model.param(0),
            },
            _ => return Err(unsupported()),
        };
        let mut form = ExpFamilyForm {
            kind,
            free_index: free_param_index,
            natural: 0.0,
        };
        form.natural = form.to_natural(model.param(free_param_index));
        Ok(form)
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    /// Index of the user parameter that maps to θ.
    pub fn free_index(&self) -> usize {
        self.free_index
    }

    /// θ of the model this form was built from.
    pub fn natural(&self) -> f64 {
        self.natural
    }

    pub fn statistic(&self, x: f64) -> f64 {
        match self.kind {
            FormKind::BinomialP { .. } | FormKind::PoissonLambda => x,
            FormKind::NormalMean { sigma } => x / (sigma * sigma),
            FormKind::GammaScale { .. } => -x,
        }
    }

    /// ln K(x); `-inf` off the support.
    pub fn log_base(&self, x: f64) -> f64 {
        match self.kind {
            FormKind::BinomialP { trials } => match as_count(x) {
                Some(k) if k <= trials => {
                    ln_factorial(trials) - ln_factorial(k) - ln_factorial(trials - k)
                }
                _ => f64::NEG_INFINITY,
            },
            FormKind::PoissonLambda => match as_count(x) {
                Some(k) => -ln_factorial(k),
                None => f64::NEG_INFINITY,
            },
            FormKind::NormalMean { sigma } => {
                -0.5 * (x / sigma) * (x / sigma) - sigma.ln() - LN_SQRT_2PI
            }
            FormKind::GammaScale { shape } => {
                if x > 0.0 {
                    (shape - 1.0) * x.ln() - ln_gamma(shape)
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn log_normalizer(&self, theta: f64) -> f64 {
        match self.kind {
            FormKind::BinomialP { trials } => {
                // n ln(1 + e^θ), stable for large |θ|
                let softplus = if theta > 0.0 {
                    theta + (-theta).exp().ln_1p()
                } else {
                    theta.exp().ln_1p()
                };
                trials as f64 * softplus
            }
            FormKind::PoissonLambda => theta.exp(),
            FormKind::NormalMean { sigma } => theta * theta / (2.0 * sigma * sigma),
            FormKind::GammaScale { shape } => -shape * theta.ln(),
        }
    }

    pub fn to_natural(&self, param: f64) -> f64 {
        match self.kind {
            FormKind::BinomialP { .. } => (param / (1.0 - param)).ln(),
            FormKind::PoissonLambda => param.ln(),
            FormKind::NormalMean { .. } => param,
            FormKind::GammaScale { .. } => 1.0 / param,
        }
    }

    pub fn from_natural(&self, theta: f64) -> f64 {
        match self.kind {
            FormKind::BinomialP { .. } => 1.0 / (1.0 + (-theta).exp()),
            FormKind::PoissonLambda => theta.exp(),
            FormKind::NormalMean { .. } => theta,
            FormKind::GammaScale { .. } => 1.0 / theta,
        }
    }

    /// Valid natural parameters form an open interval; gamma needs θ > 0.
    pub fn natural_is_valid(&self, theta: f64) -> bool {
        theta.is_finite()
            && match self.kind {
                FormKind::GammaScale { .. } => theta > 0.0,
                _ => true,
            }
    }

    /// ln K(x) + θ T(x) - A(θ).
    pub fn log_density_at(&self, theta: f64, x: f64) -> f64 {
        self.log_base(x) + theta * self.statistic(x) - self.log_normalizer(theta)
    }

    /// Human-readable `(K, T)` pair.
    pub fn describe(&self) -> (&'static str, &'static str) {
        match self.kind {
            FormKind::BinomialP { .. } => ("C(n,x)", "x"),
            FormKind::PoissonLambda => ("1/x!", "x"),
            FormKind::NormalMean { .. } => {
                ("exp(-x^2/(2 sigma^2))/(sigma sqrt(2 pi))", "x/sigma^2")
            }
            FormKind::GammaScale { .. } => ("x^(a-1)/Gamma(a)", "-x"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn binomial_ratio_at_zero_and_one() {
        let m = DistributionModel::binomial(10, 0.3).unwrap();
        assert_relative_eq!(
            m.density(0.0) / m.density(1.0),
            7.0 / 30.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn normal_is_symmetric_at_zero() {
        let m = DistributionModel::normal(0.0, 1.0).unwrap();
        assert_eq!(m.density(0.0), m.density(-0.0));
    }

    #[test]
    fn gamma_ratio_matches_worked_example() {
        let m = DistributionModel::gamma(10.0, 5.0).unwrap();
        let r = m.density(30.13) / m.density(60.02);
        assert!((r - 0.799).abs() < 5e-4, "{r}");
    }

    #[test]
    fn off_support_is_zero() {
        let b = DistributionModel::binomial(10, 0.3).unwrap();
        assert_eq!(b.density(11.0), 0.0);
        assert_eq!(b.density(2.5), 0.0);
        assert_eq!(b.density(-1.0), 0.0);
        let g = DistributionModel::gamma(2.0, 1.0).unwrap();
        assert_eq!(g.density(-0.1), 0.0);
        assert_eq!(g.density(0.0), 0.0);
        let w = DistributionModel::weibull(1.2, 1.5).unwrap();
        assert_eq!(w.density(-3.0), 0.0);
        assert_eq!(DistributionModel::poisson(3.0).unwrap().density(1.5), 0.0);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(DistributionModel::binomial(0, 0.3).is_err());
        assert!(DistributionModel::binomial(5, 1.0).is_err());
        assert!(DistributionModel::new(Family::Binomial, &[2.5, 0.3]).is_err());
        assert!(DistributionModel::poisson(0.0).is_err());
        assert!(DistributionModel::normal(0.0, -1.0).is_err());
        assert!(DistributionModel::gamma(1.0, 0.0).is_err());
        assert!(DistributionModel::weibull(f64::NAN, 1.0).is_err());
        assert!(DistributionModel::new(Family::Poisson, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn literal_round_trip_and_tolerance() {
        let m: DistributionModel = " Binomial( n = 10 , P=0.3 ) ".parse().unwrap();
        assert_eq!(m, DistributionModel::binomial(10, 0.3).unwrap());
        for lit in [
            "binomial(n=10,p=0.3)",
            "poisson(lambda=3)",
            "normal(m=0,sigma=1)",
            "gamma(a=7,b=3)",
            "weibull(shape=1.2,scale=1.5)",
        ] {
            let m: DistributionModel = lit.parse().unwrap();
            assert_eq!(m.to_string(), lit);
        }
        assert!("gamma(a=7)".parse::<DistributionModel>().is_err());
        assert!("cauchy(x=1)".parse::<DistributionModel>().is_err());
        assert!("normal(m=0,q=1)".parse::<DistributionModel>().is_err());
        assert!("normal(m=0,sigma=1".parse::<DistributionModel>().is_err());
    }

    #[test]
    fn template_marks_free_parameters() {
        let t: ModelTemplate = "gamma(a=7,b=?)".parse().unwrap();
        assert_eq!(t.free_indices(), vec![1]);
        let t: ModelTemplate = "binomial(n=10)".parse().unwrap();
        assert_eq!(t.free_names(), vec!["p"]);
        assert_eq!(
            t.instantiate(&[0.3]).unwrap(),
            DistributionModel::binomial(10, 0.3).unwrap()
        );
        assert!("binomial(p=0.3)".parse::<ModelTemplate>().is_err());
        let t: ModelTemplate = "normal()".parse().unwrap();
        assert_eq!(t.free_indices(), vec![0, 1]);
    }

    #[test]
    fn unsupported_forms() {
        let w = DistributionModel::weibull(1.2, 1.5).unwrap();
        assert!(matches!(
            ExpFamilyForm::new(&w, 0),
            Err(Error::UnsupportedForm { .. })
        ));
        let g = DistributionModel::gamma(2.0, 1.0).unwrap();
        assert!(ExpFamilyForm::new(&g, 0).is_err());
        let n = DistributionModel::normal(0.0, 1.0).unwrap();
        assert!(ExpFamilyForm::new(&n, 1).is_err());
    }

    #[test]
    fn natural_parameter_maps_invert() {
        let m = DistributionModel::binomial(10, 0.3).unwrap();
        let f = ExpFamilyForm::new(&m, 1).unwrap();
        assert_relative_eq!(f.from_natural(f.natural()), 0.3, max_relative = 1e-14);
        let g = DistributionModel::gamma(10.0, 5.0).unwrap();
        let f = ExpFamilyForm::new(&g, 1).unwrap();
        assert_relative_eq!(f.natural(), 0.2, max_relative = 1e-14);
    }

    #[test]
    fn sampling_is_seeded() {
        let m = DistributionModel::binomial(10, 0.3).unwrap();
        let a = m.sample(500, 11).unwrap();
        let b = m.sample(500, 11).unwrap();
        assert_eq!(a, b);
        assert!(a
            .iter()
            .all(|&x| (0.0..=10.0).contains(&x) && x.fract() == 0.0));
        assert_ne!(a, m.sample(500, 12).unwrap());
        assert!(m.sample(0, 1).is_err());
    }

    #[test]
    fn finite_pmf_density() {
        let g = FinitePmf::new(vec![1.0, 2.0, 3.0], vec![1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]).unwrap();
        assert_relative_eq!(g.density(2.0), 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(g.density(4.0), 0.0);
        assert!(FinitePmf::new(vec![1.0], vec![0.5]).is_err());
    }
}
