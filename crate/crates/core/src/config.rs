//! TOML scenario files.
//!
//! ```toml
//! kind = "diffusion"            # diffusion | transport | mckendrick | check
//! t_final = 1.0
//! eps_list = [0.2, 0.1, 0.05, 0.025]
//!
//! [coupling]
//! form = "density"              # direct | density
//! [coupling.rates]
//! m = 2
//! l_pairs = [[0, 1, 1, 1.0]]    # [edge, other edge, endpoint (0 tail, 1 head), rate]
//! r_pairs = [[1, 0, 0, 1.0]]
//!
//! [[initial]]
//! profile = "cosine"
//! mean = 1.0
//! amplitude = 0.5
//!
//! [discretization]
//! cells = 256
//! ```
//!
//! Transport couplings are given as `b`, as a boundary matrix `boundary`
//! (`B = (T − I)/ε`), or as `[coupling.random]` (seeded by `seed`).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coupling::{coupling_from_rates, DiffusionCoupling, EdgeExchangeRates, Endpoint, TransportCoupling};
use crate::error::{NetlumpError, Result};
use crate::grid::GridFunction;
use crate::linalg::SquareMatrix;
use crate::lumping::sweep::{DiffusionMetric, FitNorm, TransportMetric};
use crate::lumping::{DEFAULT_BAND, DEFAULT_FOURIER_TERMS};
use crate::mckendrick::{Splitting, StructuredPopulation};
use crate::profile::{EdgeProfiles, Profile};

pub type MatrixRows = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Diffusion,
    Transport,
    Mckendrick,
    Check,
}

/// Whether the coupling is used as written or as its adjoint
/// (the mass-conserving density form of a rate-built network).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    #[default]
    Direct,
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSpec {
    pub m: usize,
    /// Exit rates; balanced from the pairs when omitted.
    pub l: Option<Vec<f64>>,
    pub r: Option<Vec<f64>>,
    #[serde(default)]
    pub l_pairs: Vec<[f64; 4]>,
    #[serde(default)]
    pub r_pairs: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub m: usize,
    /// Entries are drawn uniformly from (−1, 1) and rescaled so the
    /// 1-norm does not exceed this.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    #[serde(default)]
    pub form: CouplingForm,
    pub k00: Option<MatrixRows>,
    pub k01: Option<MatrixRows>,
    pub k10: Option<MatrixRows>,
    pub k11: Option<MatrixRows>,
    pub rates: Option<RatesSpec>,
    pub b: Option<MatrixRows>,
    pub boundary: Option<MatrixRows>,
    pub random: Option<RandomSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub cells: Option<usize>,
    pub dt: Option<f64>,
    pub terms: Option<usize>,
    pub cfl: Option<f64>,
    pub jobs: Option<usize>,
    /// Comparison times per sweep point.
    pub time_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub diffusion_metric: Option<DiffusionMetric>,
    pub transport_metric: Option<TransportMetric>,
    pub fit_norm: Option<FitNorm>,
    pub band: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    pub a_max: f64,
    pub n_age: usize,
    #[serde(default)]
    pub splitting: Splitting,
    /// Migration matrix (Kolmogorov).
    pub k: MatrixRows,
    pub beta: Vec<Profile>,
    pub mu: Vec<Profile>,
    /// Initial densities per patch as functions of age.
    pub initial: Vec<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub t_final: Option<f64>,
    pub eps: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    #[serde(default)]
    pub output_times: Vec<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub coupling: CouplingSpec,
    #[serde(default)]
    pub initial: Vec<Profile>,
    #[serde(default)]
    pub discretization: Discretization,
    #[serde(default)]
    pub sweep: SweepSpec,
    pub population: Option<PopulationSpec>,
}

pub const DEFAULT_T_FINAL: f64 = 1.0;
pub const DEFAULT_EPS: f64 = 0.1;
pub const DEFAULT_CELLS: usize = 256;
pub const DEFAULT_CFL: f64 = 0.9;
pub const DEFAULT_TIME_POINTS: usize = 20;
pub const DEFAULT_SEED: u64 = 7;

fn matrix(field: &str, rows: &MatrixRows) -> Result<SquareMatrix> {
    SquareMatrix::from_rows(rows).map_err(|e| NetlumpError::invalid(field, e.to_string()))
}

fn rate_pairs(field: &str, m: usize, pairs: &[[f64; 4]]) -> Result<Vec<((usize, usize), (Endpoint, f64))>> {
    pairs
        .iter()
        .map(|p| {
            let index = |v: f64, what: &str| {
                if v.fract() != 0.0 || v < 0.0 || v >= m as f64 {
                    Err(NetlumpError::invalid(field, format!("{what} {v} is not an edge index below {m}")))
                } else {
                    Ok(v as usize)
                }
            };
            let i = index(p[0], "edge")?;
            let j = index(p[1], "edge")?;
            let end = match p[2] {
                v if v == 0.0 => Endpoint::Tail,
                v if v == 1.0 => Endpoint::Head,
                v => return Err(NetlumpError::invalid(field, format!("endpoint must be 0 or 1, got {v}"))),
            };
            Ok(((i, j), (end, p[3])))
        })
        .collect()
}

impl RatesSpec {
    pub fn to_rates(&self) -> Result<EdgeExchangeRates> {
        let mut r = EdgeExchangeRates::zeros(self.m);
        for (k, v) in rate_pairs("coupling.rates.l_pairs", self.m, &self.l_pairs)? {
            if r.l_pairs.insert(k, v).is_some() {
                return Err(NetlumpError::invalid("coupling.rates.l_pairs", format!("duplicate pair {k:?}")));
            }
        }
        for (k, v) in rate_pairs("coupling.rates.r_pairs", self.m, &self.r_pairs)? {
            if r.r_pairs.insert(k, v).is_some() {
                return Err(NetlumpError::invalid("coupling.rates.r_pairs", format!("duplicate pair {k:?}")));
            }
        }
        r.balance_exit_rates();
        if let Some(l) = &self.l {
            if l.len() != self.m {
                return Err(NetlumpError::mismatch("coupling.rates.l", self.m, l.len()));
            }
            r.l = l.clone();
        }
        if let Some(rr) = &self.r {
            if rr.len() != self.m {
                return Err(NetlumpError::mismatch("coupling.rates.r", self.m, rr.len()));
            }
            r.r = rr.clone();
        }
        r.validate()?;
        Ok(r)
    }
}

impl CouplingSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| NetlumpError::Config(e.to_string()))
    }

    pub fn has_diffusion(&self) -> bool {
        self.rates.is_some() || [&self.k00, &self.k01, &self.k10, &self.k11].iter().any(|k| k.is_some())
    }

    pub fn has_transport(&self) -> bool {
        self.b.is_some() || self.boundary.is_some() || self.random.is_some()
    }

    /// Missing matrices are zero; the form is applied last.
    pub fn diffusion(&self) -> Result<DiffusionCoupling> {
        let c = if let Some(rates) = &self.rates {
            if [&self.k00, &self.k01, &self.k10, &self.k11].iter().any(|k| k.is_some()) {
                return Err(NetlumpError::invalid("coupling", "give either rates or k00..k11, not both"));
            }
            coupling_from_rates(&rates.to_rates()?)?
        } else {
            let named = [("coupling.k00", &self.k00), ("coupling.k01", &self.k01), ("coupling.k10", &self.k10), ("coupling.k11", &self.k11)];
            let m = named
                .iter()
                .find_map(|(_, k)| k.as_ref().map(|r| r.len()))
                .ok_or_else(|| NetlumpError::invalid("coupling", "no diffusion coupling (rates or k00..k11) given"))?;
            let mut mats = Vec::with_capacity(4);
            for (field, k) in named {
                mats.push(match k {
                    Some(rows) => matrix(field, rows)?,
                    None => SquareMatrix::zeros(m),
                });
            }
            let [k00, k01, k10, k11]: [SquareMatrix; 4] = mats.try_into().expect("four matrices");
            DiffusionCoupling::new(k00, k01, k10, k11)?
        };
        Ok(match self.form {
            CouplingForm::Direct => c,
            CouplingForm::Density => c.adjoint(),
        })
    }

    pub fn transport(&self, eps: f64, seed: u64) -> Result<TransportCoupling> {
        let given = [self.b.is_some(), self.boundary.is_some(), self.random.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(NetlumpError::invalid("coupling", "give exactly one of b, boundary, random"));
        }
        if let Some(b) = &self.b {
            return Ok(TransportCoupling::new(matrix("coupling.b", b)?));
        }
        if let Some(t) = &self.boundary {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(NetlumpError::invalid("eps", format!("must be positive, got {eps}")));
            }
            return Ok(TransportCoupling::from_boundary_matrix(&matrix("coupling.boundary", t)?, eps));
        }
        let spec = self.random.as_ref().expect("checked above");
        Ok(TransportCoupling::new(random_matrix(spec.m, spec.norm, seed)?))
    }
}

/// Uniform(−1, 1) entries from a ChaCha8 stream, rescaled so the 1-norm
/// is at most `norm`.
pub fn random_matrix(m: usize, norm: f64, seed: u64) -> Result<SquareMatrix> {
    if m == 0 {
        return Err(NetlumpError::invalid("coupling.random.m", "must be positive"));
    }
    if !(norm.is_finite() && norm >= 0.0) {
        return Err(NetlumpError::invalid("coupling.random.norm", format!("must be >= 0, got {norm}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b = SquareMatrix::from_row_slice(m, &data)?;
    let n = b.norm1();
    Ok(if n > norm { b.scale(norm / n) } else { b })
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| NetlumpError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| NetlumpError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            NetlumpError::Config(msg) => NetlumpError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Built-in scenario used when no file is given.
    pub fn builtin(kind: ScenarioKind) -> Self {
        let text = match kind {
            ScenarioKind::Diffusion => include_str!("../scenarios/two_edge.toml"),
            ScenarioKind::Transport => include_str!("../scenarios/transport_demo.toml"),
            ScenarioKind::Mckendrick => include_str!("../scenarios/mckendrick_demo.toml"),
            ScenarioKind::Check => include_str!("../scenarios/ex33_network.toml"),
        };
        Self::from_toml_str(text).expect("built-in scenarios parse")
    }

    pub fn t_final(&self) -> f64 {
        self.t_final.unwrap_or(DEFAULT_T_FINAL)
    }

    /// Single-run ε: `eps`, else the first of `eps_list`, else the default.
    pub fn eps(&self) -> f64 {
        self.eps
            .or_else(|| self.eps_list.as_ref().and_then(|l| l.first().copied()))
            .unwrap_or(DEFAULT_EPS)
    }

    /// Sweep ladder: `eps_list`, else `[eps]`.
    pub fn eps_values(&self) -> Vec<f64> {
        match (&self.eps_list, self.eps) {
            (Some(l), _) => l.clone(),
            (None, Some(e)) => vec![e],
            (None, None) => vec![DEFAULT_EPS],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn cells(&self) -> usize {
        self.discretization.cells.unwrap_or(DEFAULT_CELLS)
    }

    pub fn terms(&self) -> usize {
        self.discretization.terms.unwrap_or(DEFAULT_FOURIER_TERMS)
    }

    pub fn cfl(&self) -> f64 {
        self.discretization.cfl.unwrap_or(DEFAULT_CFL)
    }

    pub fn jobs(&self) -> usize {
        self.discretization.jobs.unwrap_or(1).max(1)
    }

    pub fn time_points(&self) -> usize {
        self.discretization.time_points.unwrap_or(DEFAULT_TIME_POINTS)
    }

    pub fn band(&self) -> (f64, f64) {
        self.sweep.band.unwrap_or(DEFAULT_BAND)
    }

    pub fn initial_profiles(&self, m: usize) -> Result<EdgeProfiles> {
        if self.initial.len() != m {
            return Err(NetlumpError::mismatch("initial (one profile per edge)", m, self.initial.len()));
        }
        let p = EdgeProfiles(self.initial.clone());
        p.validate()?;
        Ok(p)
    }

    /// Checks everything that does not depend on running a solver.
    pub fn validate(&self) -> Result<()> {
        let t = self.t_final();
        if !(t.is_finite() && t > 0.0) {
            return Err(NetlumpError::invalid("t_final", format!("must be positive, got {t}")));
        }
        for e in self.eps_values().into_iter().chain(self.eps) {
            if !(e.is_finite() && e > 0.0) {
                return Err(NetlumpError::invalid("eps", format!("must be positive, got {e}")));
            }
        }
        if let Some(l) = &self.eps_list {
            if l.is_empty() {
                return Err(NetlumpError::invalid("eps_list", "must not be empty"));
            }
        }
        for &s in &self.output_times {
            if !(s.is_finite() && (0.0..=t).contains(&s)) {
                return Err(NetlumpError::invalid("output_times", format!("{s} is outside [0, {t}]")));
            }
        }
        if let Some(dt) = self.discretization.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(NetlumpError::invalid("discretization.dt", format!("must be positive, got {dt}")));
            }
        }
        let cfl = self.cfl();
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(NetlumpError::invalid("discretization.cfl", format!("must lie in (0, 1], got {cfl}")));
        }
        let (lo, hi) = self.band();
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(NetlumpError::invalid("sweep.band", format!("need lo <= hi, got ({lo}, {hi})")));
        }
        match self.kind {
            ScenarioKind::Diffusion => {
                let c = self.coupling.diffusion()?;
                self.initial_profiles(c.dim())?;
            }
            ScenarioKind::Transport => {
                let c = self.coupling.transport(self.eps(), self.seed())?;
                self.initial_profiles(c.dim())?;
            }
            ScenarioKind::Mckendrick => {
                self.population(self.eps())?.validate()?;
            }
            ScenarioKind::Check => {
                if !self.coupling.has_diffusion() && !self.coupling.has_transport() {
                    return Err(NetlumpError::invalid("coupling", "nothing to check"));
                }
                if self.coupling.has_diffusion() {
                    self.coupling.diffusion()?;
                }
            }
        }
        Ok(())
    }

    pub fn population(&self, eps: f64) -> Result<StructuredPopulation> {
        let spec = self
            .population
            .as_ref()
            .ok_or_else(|| NetlumpError::invalid("population", "missing [population] section"))?;
        let k = matrix("population.k", &spec.k)?;
        let m = k.dim();
        if spec.initial.len() != m {
            return Err(NetlumpError::mismatch("population.initial", m, spec.initial.len()));
        }
        if spec.n_age < 2 {
            return Err(NetlumpError::invalid("population.n_age", "need at least 2 age cells"));
        }
        for p in &spec.initial {
            p.validate()?;
        }
        let a_max = spec.a_max;
        let n0 = GridFunction::from_fn(m, spec.n_age, |j, x| spec.initial[j].eval(x * a_max))?;
        Ok(StructuredPopulation {
            a_max,
            n_age: spec.n_age,
            beta: spec.beta.clone(),
            mu: spec.mu.clone(),
            k,
            eps,
            n0,
            splitting: spec.splitting,
        })
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
