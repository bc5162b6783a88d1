//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    Vmf,
    EqCorr,
    Regression,
    Custom,
}

impl Example {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "vmf" => Ok(Self::Vmf),
            "eqcorr" => Ok(Self::EqCorr),
            "regression" => Ok(Self::Regression),
            "custom" => Ok(Self::Custom),
            _ => Err(CliError::Config(format!("unknown example '{s}' (expected vmf, eqcorr, regression or custom)"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Vmf => "vmf",
            Self::EqCorr => "eqcorr",
            Self::Regression => "regression",
            Self::Custom => "custom",
        }
    }
}

const KEYS: &[&str] = &[
    "example",
    "score",
    "gamma",
    "prior",
    "model",
    "n",
    "kappa",
    "theta0",
    "q",
    "mu",
    "sigma",
    "sigma2",
    "rho",
    "p",
    "beta",
    "contamination",
    "shift",
    "seed",
    "data",
    "mcmc_iterations",
    "mcmc_burn_in",
    "mcmc_thin",
    "mc_replicates",
    "mc_n",
];

/// Experiment settings. Unset optional keys fall back to per-example
/// defaults when the command runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub example: Example,
    pub score: Option<String>,
    pub gamma: Option<f64>,
    pub prior: Option<String>,
    pub model: Option<String>,
    pub n: Option<usize>,
    pub kappa: Option<f64>,
    pub theta0: Option<f64>,
    pub q: Option<usize>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub sigma2: Option<f64>,
    pub rho: Option<f64>,
    pub p: Option<usize>,
    pub beta: Option<Vec<f64>>,
    pub contamination: Option<f64>,
    pub shift: Option<f64>,
    pub seed: Option<u64>,
    pub data: Option<String>,
    pub mcmc_iterations: Option<usize>,
    pub mcmc_burn_in: Option<usize>,
    pub mcmc_thin: Option<usize>,
    pub mc_replicates: Option<usize>,
    pub mc_n: Option<usize>,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("line {line}: invalid value '{v}' for '{key}'")))
}

fn parse_f64(key: &str, v: &str, line: usize) -> Result<f64, CliError> {
    let x: f64 = parse_num(key, v, line)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Config(format!("line {line}: '{key}' must be finite")))
    }
}

impl ExperimentConfig {
    pub fn new(example: Example) -> Self {
        Self {
            example,
            score: None,
            gamma: None,
            prior: None,
            model: None,
            n: None,
            kappa: None,
            theta0: None,
            q: None,
            mu: None,
            sigma: None,
            sigma2: None,
            rho: None,
            p: None,
            beta: None,
            contamination: None,
            shift: None,
            seed: None,
            data: None,
            mcmc_iterations: None,
            mcmc_burn_in: None,
            mcmc_thin: None,
            mc_replicates: None,
            mc_n: None,
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. Unknown or repeated
    /// keys are errors.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::parse_with_example(text, None)
    }

    /// As [`Self::parse`], taking the example from `fallback` when the text
    /// does not name one. A named example must agree with `fallback`.
    pub fn parse_with_example(text: &str, fallback: Option<Example>) -> Result<Self, CliError> {
        let mut seen: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {line}: expected 'key = value'")))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(CliError::Config(format!("line {line}: unknown key '{k}'")));
            }
            if v.is_empty() {
                return Err(CliError::Config(format!("line {line}: empty value for '{k}'")));
            }
            if seen.insert(k.to_string(), (line, v.to_string())).is_some() {
                return Err(CliError::Config(format!("line {line}: duplicate key '{k}'")));
            }
        }
        let example = match (seen.remove("example"), fallback) {
            (Some((_, ex)), None) => Example::parse(&ex)?,
            (Some((line, ex)), Some(f)) => {
                let e = Example::parse(&ex)?;
                if e != f {
                    return Err(CliError::Config(format!(
                        "line {line}: config is for example '{ex}' but '{}' was requested",
                        f.as_str()
                    )));
                }
                e
            }
            (None, Some(f)) => f,
            (None, None) => return Err(CliError::Config("missing required key 'example'".into())),
        };
        let mut cfg = Self::new(example);
        for (k, (line, v)) in seen {
            match k.as_str() {
                "score" => cfg.score = Some(v),
                "prior" => cfg.prior = Some(v),
                "model" => cfg.model = Some(v),
                "data" => cfg.data = Some(v),
                "gamma" => cfg.gamma = Some(parse_f64(&k, &v, line)?),
                "kappa" => cfg.kappa = Some(parse_f64(&k, &v, line)?),
                "theta0" => cfg.theta0 = Some(parse_f64(&k, &v, line)?),
                "mu" => cfg.mu = Some(parse_f64(&k, &v, line)?),
                "sigma" => cfg.sigma = Some(parse_f64(&k, &v, line)?),
                "sigma2" => cfg.sigma2 = Some(parse_f64(&k, &v, line)?),
                "rho" => cfg.rho = Some(parse_f64(&k, &v, line)?),
                "contamination" => cfg.contamination = Some(parse_f64(&k, &v, line)?),
                "shift" => cfg.shift = Some(parse_f64(&k, &v, line)?),
                "n" => cfg.n = Some(parse_num(&k, &v, line)?),
                "q" => cfg.q = Some(parse_num(&k, &v, line)?),
                "p" => cfg.p = Some(parse_num(&k, &v, line)?),
                "seed" => cfg.seed = Some(parse_num(&k, &v, line)?),
                "mcmc_iterations" => cfg.mcmc_iterations = Some(parse_num(&k, &v, line)?),
                "mcmc_burn_in" => cfg.mcmc_burn_in = Some(parse_num(&k, &v, line)?),
                "mcmc_thin" => cfg.mcmc_thin = Some(parse_num(&k, &v, line)?),
                "mc_replicates" => cfg.mc_replicates = Some(parse_num(&k, &v, line)?),
                "mc_n" => cfg.mc_n = Some(parse_num(&k, &v, line)?),
                "beta" => {
                    cfg.beta = Some(v.split(',').map(|s| parse_f64(&k, s.trim(), line)).collect::<Result<_, _>>()?);
                }
                _ => unreachable!("key list checked above"),
            }
        }
        Ok(cfg)
    }

    /// Key-value pairs of the set fields, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("example", self.example.as_str().to_string())];
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        put("score", self.score.clone());
        put("gamma", self.gamma.map(|v| v.to_string()));
        put("prior", self.prior.clone());
        put("model", self.model.clone());
        put("n", self.n.map(|v| v.to_string()));
        put("kappa", self.kappa.map(|v| v.to_string()));
        put("theta0", self.theta0.map(|v| v.to_string()));
        put("q", self.q.map(|v| v.to_string()));
        put("mu", self.mu.map(|v| v.to_string()));
        put("sigma", self.sigma.map(|v| v.to_string()));
        put("sigma2", self.sigma2.map(|v| v.to_string()));
        put("rho", self.rho.map(|v| v.to_string()));
        put("p", self.p.map(|v| v.to_string()));
        put("beta", self.beta.as_ref().map(|b| b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")));
        put("contamination", self.contamination.map(|v| v.to_string()));
        put("shift", self.shift.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("data", self.data.clone());
        put("mcmc_iterations", self.mcmc_iterations.map(|v| v.to_string()));
        put("mcmc_burn_in", self.mcmc_burn_in.map(|v| v.to_string()));
        put("mcmc_thin", self.mcmc_thin.map(|v| v.to_string()));
        put("mc_replicates", self.mc_replicates.map(|v| v.to_string()));
        put("mc_n", self.mc_n.map(|v| v.to_string()));
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "# vmf run\nexample = vmf\nn = 50\nkappa = 3\ntheta0 = 0.1\nseed = 7\nbeta = 1, -0.5,0.25\ngamma = 1.25\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.kappa, Some(3.0));
        assert_eq!(cfg.beta, Some(vec![1.0, -0.5, 0.25]));
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
        let mut c = ExperimentConfig::new(Example::Regression);
        c.gamma = Some(0.1 + 0.2);
        c.seed = Some(u64::MAX);
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["n = 5", "example = vmf\nfoo = 1", "example = vmf\nn = x", "example = vmf\nn = 1\nn = 2", "example = nope", "example = vmf\nkappa = nan", "example vmf"] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(CliError::Config(_))), "{bad}");
        }
    }
}
