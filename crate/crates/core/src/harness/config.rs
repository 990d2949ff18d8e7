use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::init::InitKind;

use super::phantom::PhantomSpec;

/// Clustering method run by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    KMeansTv,
    OnmfTvChoi,
    OnmfTvDing,
    Mul1,
    Mul2,
    Palm,
    Ipalm,
    Spring,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::KMeansTv,
        Method::OnmfTvChoi,
        Method::OnmfTvDing,
        Method::Mul1,
        Method::Mul2,
        Method::Palm,
        Method::Ipalm,
        Method::Spring,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::KMeansTv => "KMEANS_TV",
            Self::OnmfTvChoi => "ONMF_TV_CHOI",
            Self::OnmfTvDing => "ONMF_TV_DING",
            Self::Mul1 => "ONMFTV_MUL1",
            Self::Mul2 => "ONMFTV_MUL2",
            Self::Palm => "ONMFTV_PALM",
            Self::Ipalm => "ONMFTV_IPALM",
            Self::Spring => "ONMFTV_SPRING",
        }
    }

    /// Cluster-then-denoise methods.
    pub fn is_separated(self) -> bool {
        matches!(self, Self::KMeansTv | Self::OnmfTvChoi | Self::OnmfTvDing)
    }

    pub fn is_palm_family(self) -> bool {
        matches!(self, Self::Palm | Self::Ipalm | Self::Spring)
    }

    /// Parameter keys this method accepts.
    fn accepts(self, key: &str) -> bool {
        match key {
            "tau" => true,
            "prox_iters" => !matches!(self, Self::Mul1 | Self::Mul2),
            "i_max" | "init" => self != Self::KMeansTv,
            "sigma1" => !self.is_separated(),
            "sigma2" => !self.is_separated() && self != Self::Mul2,
            "eps_tv" => matches!(self, Self::Mul1 | Self::Mul2),
            "power_iters" => self.is_palm_family(),
            "subsamples" => self == Self::Spring,
            _ => false,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Overrides of a method's defaults; `None` keeps the default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MethodParams {
    pub tau: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub eps_tv: Option<f64>,
    pub subsamples: Option<usize>,
    pub i_max: Option<usize>,
    pub init: Option<InitKind>,
    pub prox_iters: Option<usize>,
    pub power_iters: Option<usize>,
}

impl MethodParams {
    fn set_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut push = |set: bool, key| {
            if set {
                keys.push(key)
            }
        };
        push(self.tau.is_some(), "tau");
        push(self.sigma1.is_some(), "sigma1");
        push(self.sigma2.is_some(), "sigma2");
        push(self.eps_tv.is_some(), "eps_tv");
        push(self.subsamples.is_some(), "subsamples");
        push(self.i_max.is_some(), "i_max");
        push(self.init.is_some(), "init");
        push(self.prox_iters.is_some(), "prox_iters");
        push(self.power_iters.is_some(), "power_iters");
        keys
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Phantom(PhantomSpec),
    /// Directory holding `data.csv`, `geometry.csv` and `truth.csv`.
    Directory(PathBuf),
}

/// Value lists for the parameter sweep; an empty list keeps the base value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    pub tau: Vec<f64>,
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub k: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub params: MethodParams,
    pub data: DataSource,
    /// Emit `labels_r<k>.csv` and `map_r<k>.pgm` per replicate.
    pub write_maps: bool,
    pub sweep: SweepGrid,
}

impl ExperimentConfig {
    /// Phantom-backed config with method defaults and `K` equal to the
    /// class count.
    pub fn phantom(method: Method, spec: PhantomSpec, replicates: usize, master_seed: u64) -> Self {
        Self {
            method,
            k: spec.classes,
            replicates,
            master_seed,
            params: MethodParams::default(),
            data: DataSource::Phantom(spec),
            write_maps: true,
            sweep: SweepGrid::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("replicates must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if let Some(key) = self.params.set_keys().into_iter().find(|key| !self.method.accepts(key)) {
            return Err(Error::InvalidArgument(format!("{key} does not apply to {}", self.method)));
        }
        let sweeps = [("tau", &self.sweep.tau), ("sigma1", &self.sweep.sigma1), ("sigma2", &self.sweep.sigma2)];
        for (key, values) in sweeps {
            if !values.is_empty() && !self.method.accepts(key) {
                return Err(Error::InvalidArgument(format!("sweep.{key} does not apply to {}", self.method)));
            }
        }
        if let DataSource::Phantom(spec) = &self.data {
            spec.validate()?;
        }
        Ok(())
    }

    /// Parses the `key = value` format; relative `data` paths resolve
    /// against `base_dir`.
    pub fn parse(text: &str, origin: &Path, base_dir: &Path) -> Result<Self> {
        let entries = parse_entries(text, origin)?;
        let mut raw = RawConfig { entries, origin };

        let method: Method = raw.required("method")?;
        let mut spec = PhantomSpec::default();
        let phantom_keys = raw.has_prefix("phantom.");
        let data = raw.take("data");
        let data = match (data, phantom_keys) {
            (Some(_), true) => {
                return Err(Error::InvalidArgument("give either data or phantom.* keys, not both".into()));
            }
            (Some((_, dir)), false) => DataSource::Directory(base_dir.join(dir)),
            (None, _) => {
                raw.set("phantom.height", &mut spec.height)?;
                raw.set("phantom.width", &mut spec.width)?;
                raw.set("phantom.classes", &mut spec.classes)?;
                raw.set("phantom.channels", &mut spec.channels)?;
                raw.set("phantom.layout", &mut spec.layout)?;
                raw.set("phantom.noise", &mut spec.noise_sigma)?;
                raw.set("phantom.overlap", &mut spec.overlap)?;
                raw.set("phantom.seed", &mut spec.seed)?;
                DataSource::Phantom(spec)
            }
        };
        let k = match (raw.optional::<usize>("k")?, &data) {
            (Some(k), _) => k,
            (None, DataSource::Phantom(spec)) => spec.classes,
            (None, DataSource::Directory(_)) => {
                return Err(Error::InvalidArgument("k is required when reading data from disk".into()));
            }
        };
        let mut cfg = Self {
            method,
            k,
            replicates: raw.optional("replicates")?.unwrap_or(30),
            master_seed: raw.optional("master_seed")?.unwrap_or(0),
            params: MethodParams {
                tau: raw.optional("tau")?,
                sigma1: raw.optional("sigma1")?,
                sigma2: raw.optional("sigma2")?,
                eps_tv: raw.optional("eps_tv")?,
                subsamples: raw.optional("subsamples")?,
                i_max: raw.optional("i_max")?,
                init: raw.optional("init")?,
                prox_iters: raw.optional("prox_iters")?,
                power_iters: raw.optional("power_iters")?,
            },
            data,
            write_maps: raw.optional("write_maps")?.unwrap_or(true),
            sweep: SweepGrid::default(),
        };
        cfg.sweep.tau = raw.list("sweep.tau")?;
        cfg.sweep.sigma1 = raw.list("sweep.sigma1")?;
        cfg.sweep.sigma2 = raw.list("sweep.sigma2")?;
        if let Some((key, (line, _))) = raw.entries.into_iter().next() {
            return Err(Error::parse(origin, line, format!("unknown key {key:?}")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, path, base)
    }
}

/// Key → (line, value), duplicates rejected.
fn parse_entries(text: &str, origin: &Path) -> Result<BTreeMap<String, (usize, String)>> {
    let mut entries = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(origin, line_no, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::parse(origin, line_no, "empty key or value"));
        }
        if entries.insert(key.to_string(), (line_no, value.to_string())).is_some() {
            return Err(Error::parse(origin, line_no, format!("duplicate key {key:?}")));
        }
    }
    Ok(entries)
}

struct RawConfig<'a> {
    entries: BTreeMap<String, (usize, String)>,
    origin: &'a Path,
}

impl RawConfig<'_> {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.entries.keys().any(|k| k.starts_with(prefix))
    }

    fn optional<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((line, value)) => value
                .parse()
                .map(Some)
                .map_err(|e| Error::parse(self.origin, line, format!("{key}: {e}"))),
        }
    }

    fn required<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.optional(key)?
            .ok_or_else(|| Error::InvalidArgument(format!("missing required key {key:?}")))
    }

    fn set<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()>
    where
        T::Err: fmt::Display,
    {
        if let Some(value) = self.optional(key)? {
            *slot = value;
        }
        Ok(())
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>> {
        match self.take(key) {
            None => Ok(Vec::new()),
            Some((line, value)) => value
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::parse(self.origin, line, format!("{key}: {e}")))
                })
                .collect(),
        }
    }
}
