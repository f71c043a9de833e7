use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Experiments reachable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Example1,
    Example2,
    Example3,
    Example4,
    Figure1,
    Figure2,
    Weights,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Example1,
        Experiment::Example2,
        Experiment::Example3,
        Experiment::Example4,
        Experiment::Figure1,
        Experiment::Figure2,
        Experiment::Weights,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Example1 => "example1",
            Experiment::Example2 => "example2",
            Experiment::Example3 => "example3",
            Experiment::Example4 => "example4",
            Experiment::Figure1 => "figure1",
            Experiment::Figure2 => "figure2",
            Experiment::Weights => "weights",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Replacement for `A†` in the data-fidelity term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surrogate {
    ExactPinv,
    TruncatedSvd(usize),
    Tikhonov(f64),
}

/// Weights paired with the Tikhonov surrogate `S_β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TikhonovWeights {
    /// `w_i = ‖P e_i‖₂`, the untruncated projector weights.
    Projector,
    /// `w_i = ‖S_β A e_i‖₂`.
    Smoothed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SurrogateKind {
    ExactPinv,
    TruncatedSvd,
    Tikhonov,
}

/// Contents of a configuration file. Every key is optional; missing keys take
/// the experiment's default.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dim: Option<usize>,
    pub forward_nodes: Option<usize>,
    pub inverse_nodes: Option<usize>,
    pub source_cells: Option<usize>,
    pub epsilon: Option<f64>,
    pub sources: Option<Vec<(usize, f64)>>,
    pub boundary_source: Option<usize>,
    pub layouts: Option<Vec<Vec<usize>>>,
    pub asymmetric_pair: Option<(usize, usize)>,
    pub disc_center: Option<[f64; 2]>,
    pub disc_radius: Option<f64>,
    pub disc_amplitude: Option<f64>,
    pub alpha: Option<f64>,
    pub boundary_alpha: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    surrogate: Option<SurrogateKind>,
    pub k: Option<usize>,
    pub beta: Option<f64>,
    pub tikhonov_weights: Option<TikhonovWeights>,
    pub weights_k: Option<Vec<usize>>,
    pub morozov_k: Option<Vec<usize>>,
    pub morozov_alphas: Option<Vec<f64>>,
    pub morozov_factor: Option<f64>,
    pub noise: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub baseline_zeta: Option<f64>,
    pub inverse_crime: Option<bool>,
    pub output_dir: Option<PathBuf>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

/// Command-line overrides; applied after the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub k: Option<usize>,
    pub beta: Option<f64>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// Fully resolved description of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub dim: usize,
    pub forward_nodes: usize,
    pub inverse_nodes: usize,
    pub source_cells: usize,
    pub epsilon: f64,
    /// `(coarse cell, amplitude)` pairs of the primary truth.
    pub sources: Vec<(usize, f64)>,
    pub boundary_source: usize,
    pub layouts: Vec<Vec<usize>>,
    pub asymmetric_pair: (usize, usize),
    pub disc_center: [f64; 2],
    pub disc_radius: f64,
    pub disc_amplitude: f64,
    pub alpha: f64,
    pub boundary_alpha: f64,
    pub alphas: Vec<f64>,
    pub surrogate: Surrogate,
    pub k: usize,
    pub beta: f64,
    pub tikhonov_weights: TikhonovWeights,
    pub weights_k: Vec<usize>,
    pub morozov_k: Vec<usize>,
    pub morozov_alphas: Vec<f64>,
    pub morozov_factor: f64,
    pub noise: Vec<f64>,
    pub seed: u64,
    pub baseline_zeta: Option<f64>,
    pub inverse_crime: bool,
    pub output_dir: PathBuf,
}

/// Default interior truth: the 16×16 cell nearest `(0.4, 0.6)`.
pub const DEFAULT_INTERIOR_CELL: usize = 150;
/// Default boundary truth: mid-edge cell `(8, 0)`.
pub const DEFAULT_BOUNDARY_CELL: usize = 8;
/// Mirror-symmetric pair on the 31-cell interval.
pub const FIGURE2_PAIR: (usize, usize) = (7, 23);
pub const FIGURE2_ASYMMETRIC_PAIR: (usize, usize) = (3, 20);

fn cell(x: usize, y: usize) -> usize {
    y * 16 + x
}

/// Default Example 4 layouts on the 16×16 grid for N = 2, 4, 8.
pub fn default_layouts() -> Vec<Vec<usize>> {
    vec![
        vec![cell(4, 11), cell(11, 4)],
        vec![cell(4, 11), cell(11, 4), cell(4, 4), cell(11, 11)],
        vec![
            cell(8, 0),
            cell(0, 8),
            cell(15, 8),
            cell(4, 4),
            cell(11, 11),
            cell(6, 9),
            cell(9, 6),
            cell(8, 12),
        ],
    ]
}

impl ExperimentSpec {
    /// Defaults for `experiment` without any configuration.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut spec = ExperimentSpec {
            experiment,
            dim: 2,
            forward_nodes: 65,
            inverse_nodes: 65,
            source_cells: 16,
            epsilon: 1.0,
            sources: vec![(DEFAULT_INTERIOR_CELL, 1.0)],
            boundary_source: DEFAULT_BOUNDARY_CELL,
            layouts: default_layouts(),
            asymmetric_pair: FIGURE2_ASYMMETRIC_PAIR,
            disc_center: [0.5, 0.5],
            disc_radius: 0.2,
            disc_amplitude: 1.0,
            alpha: 1e-4,
            boundary_alpha: 1e-3,
            alphas: Vec::new(),
            surrogate: Surrogate::ExactPinv,
            k: 7,
            beta: 1e-6,
            tikhonov_weights: TikhonovWeights::Projector,
            weights_k: vec![7, 70],
            morozov_k: vec![3, 5, 15],
            morozov_alphas: vec![1e-2, 1e-3, 1e-4],
            morozov_factor: 1.05,
            noise: Vec::new(),
            seed: 20240601,
            baseline_zeta: None,
            inverse_crime: true,
            output_dir: PathBuf::from("out"),
        };
        match experiment {
            Experiment::Example1 | Experiment::Figure1 | Experiment::Weights => {}
            Experiment::Example2 => {
                spec.surrogate = Surrogate::TruncatedSvd(7);
                spec.noise = vec![0.05, 0.10, 0.15];
            }
            Experiment::Example3 => {
                spec.forward_nodes = 129;
                spec.inverse_crime = false;
                spec.k = 5;
                spec.alphas = vec![1e-2, 1e-4, 1e-6];
                spec.baseline_zeta = Some(1e-4);
                spec.surrogate = Surrogate::TruncatedSvd(5);
            }
            Experiment::Example4 => {
                spec.alpha = 1e-2;
                spec.surrogate = Surrogate::Tikhonov(1e-6);
            }
            Experiment::Figure2 => {
                spec.dim = 1;
                spec.forward_nodes = 125;
                spec.inverse_nodes = 125;
                spec.source_cells = 31;
                spec.alpha = 1e-3;
                spec.sources = vec![(FIGURE2_PAIR.0, 1.0), (FIGURE2_PAIR.1, 1.0)];
            }
        }
        spec
    }

    /// Defaults, then `file`, then `overrides`.
    pub fn resolve(experiment: Experiment, file: &ConfigFile, overrides: &Overrides) -> Result<Self> {
        let mut s = Self::defaults(experiment);
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = file.$field.clone() { s.$field = v; })*
            };
        }
        take!(
            dim, forward_nodes, inverse_nodes, source_cells, epsilon, sources, boundary_source, layouts,
            asymmetric_pair, disc_center, disc_radius, disc_amplitude, alpha, boundary_alpha, alphas, k, beta,
            tikhonov_weights, weights_k, morozov_k, morozov_alphas, morozov_factor, noise, seed, inverse_crime,
            output_dir
        );
        if file.baseline_zeta.is_some() {
            s.baseline_zeta = file.baseline_zeta;
        }
        if file.forward_nodes.is_none() {
            match file.inverse_crime {
                Some(true) => s.forward_nodes = s.inverse_nodes,
                Some(false) if s.forward_nodes == s.inverse_nodes => s.forward_nodes = 2 * s.inverse_nodes - 1,
                _ => {}
            }
        }
        if let Some(v) = overrides.alpha {
            s.alpha = v;
        }
        if let Some(v) = overrides.k {
            s.k = v;
        }
        if let Some(v) = overrides.beta {
            s.beta = v;
        }
        if let Some(v) = overrides.noise {
            s.noise = vec![v];
        }
        if let Some(v) = overrides.seed {
            s.seed = v;
        }
        if let Some(v) = overrides.output_dir.clone() {
            s.output_dir = v;
        }
        let kind = file.surrogate.unwrap_or(match s.surrogate {
            Surrogate::ExactPinv => SurrogateKind::ExactPinv,
            Surrogate::TruncatedSvd(_) => SurrogateKind::TruncatedSvd,
            Surrogate::Tikhonov(_) => SurrogateKind::Tikhonov,
        });
        s.surrogate = match kind {
            SurrogateKind::ExactPinv => Surrogate::ExactPinv,
            SurrogateKind::TruncatedSvd => Surrogate::TruncatedSvd(s.k),
            SurrogateKind::Tikhonov => Surrogate::Tikhonov(s.beta),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(1..=2).contains(&self.dim) {
            return fail(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if self.inverse_crime && self.forward_nodes != self.inverse_nodes {
            return fail("inverse_crime requires forward_nodes == inverse_nodes".into());
        }
        if self.forward_nodes < self.inverse_nodes || !(self.forward_nodes - 1).is_multiple_of((self.inverse_nodes - 1).max(1)) {
            return fail(format!(
                "forward grid ({}) must refine the inverse grid ({})",
                self.forward_nodes, self.inverse_nodes
            ));
        }
        let n = self.source_cells.pow(self.dim as u32);
        let in_range = |i: usize| i < n;
        if self.sources.iter().any(|&(i, _)| !in_range(i)) || !in_range(self.boundary_source) {
            return fail(format!("source cell index out of range (n = {n})"));
        }
        if self.experiment == Experiment::Example4
            && self.layouts.iter().flatten().any(|&i| !in_range(i))
        {
            return fail(format!("layout cell index out of range (n = {n})"));
        }
        if self.sources.is_empty() {
            return fail("at least one true source is required".into());
        }
        let positive = [self.alpha, self.boundary_alpha, self.epsilon, self.beta, self.disc_radius, self.morozov_factor];
        if positive.iter().chain(&self.alphas).chain(&self.morozov_alphas).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return fail("alpha, beta, epsilon, radius and factors must be positive".into());
        }
        if self.noise.iter().any(|p| !(0.0..1.0).contains(p)) {
            return fail("noise levels must lie in [0, 1)".into());
        }
        if self.k == 0 || self.weights_k.contains(&0) || self.morozov_k.contains(&0) {
            return fail("truncation levels must be >= 1".into());
        }
        if matches!(self.baseline_zeta, Some(z) if !(z > 0.0)) {
            return fail("baseline_zeta must be positive".into());
        }
        Ok(())
    }

    /// `<output_dir>/<experiment>`.
    pub fn artifact_dir(&self) -> PathBuf {
        self.output_dir.join(self.experiment.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("example9".parse::<Experiment>().is_err());
    }

    #[test]
    fn defaults_validate() {
        for e in Experiment::ALL {
            ExperimentSpec::defaults(e).validate().unwrap();
        }
        let s = ExperimentSpec::defaults(Experiment::Example2);
        assert_eq!(s.surrogate, Surrogate::TruncatedSvd(7));
        assert_eq!(s.noise, vec![0.05, 0.10, 0.15]);
    }

    #[test]
    fn file_then_flags() {
        let file = ConfigFile::parse(
            "alpha = 0.5\nk = 9\nsurrogate = \"tikhonov\"\nbeta = 1e-5\nsources = [[3, 2.0]]\nnoise = [0.1]\n",
        )
        .unwrap();
        let o = Overrides {
            alpha: Some(0.25),
            seed: Some(7),
            ..Default::default()
        };
        let s = ExperimentSpec::resolve(Experiment::Example1, &file, &o).unwrap();
        assert_eq!(s.alpha, 0.25);
        assert_eq!(s.k, 9);
        assert_eq!(s.seed, 7);
        assert_eq!(s.sources, vec![(3, 2.0)]);
        assert_eq!(s.surrogate, Surrogate::Tikhonov(1e-5));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ConfigFile::parse("alhpa = 1").is_err());
        let none = Overrides::default();
        let bad = ConfigFile::parse("noise = [1.5]").unwrap();
        assert!(ExperimentSpec::resolve(Experiment::Example2, &bad, &none).is_err());
        let bad = ConfigFile::parse("forward_nodes = 100\ninverse_crime = false").unwrap();
        assert!(ExperimentSpec::resolve(Experiment::Example1, &bad, &none).is_err());
        let bad = ConfigFile::parse("sources = [[256, 1.0]]").unwrap();
        assert!(ExperimentSpec::resolve(Experiment::Example1, &bad, &none).is_err());
    }
}
