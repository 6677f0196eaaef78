//! Versioned JSON experiment configuration.
//!
//! Every tolerance an acceptance check compares against lives here, so a
//! config file fully describes what a run asserts.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use heisenfft_core::propagator::is_singular;
use heisenfft_core::{CentralAxis, Region, SpatialGrid};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "heisenfft-config/1";

/// Boundary value below which periodic wrap-around is negligible.
pub const DECAY_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    PropagatorSelftest,
    Annihilation,
    Observability,
    Counterexample,
    ReductionChain,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::PropagatorSelftest,
        Scenario::Annihilation,
        Scenario::Observability,
        Scenario::Counterexample,
        Scenario::ReductionChain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::PropagatorSelftest => "propagator-selftest",
            Scenario::Annihilation => "annihilation",
            Scenario::Observability => "observability",
            Scenario::Counterexample => "counterexample",
            Scenario::ReductionChain => "reduction-chain",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Scenario::ALL.iter().map(|x| x.name()).collect();
            format!("unknown scenario `{s}`; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Heisenberg dimension `n`; the spatial grid is `2n`-dimensional.
    #[serde(default = "one")]
    pub n: usize,
    /// Box `[−L, L)^{2n}`.
    pub half_width: f64,
    /// Points per axis.
    pub points: usize,
}

fn one() -> usize {
    1
}

impl GridConfig {
    pub fn new(half_width: f64, points: usize) -> Self {
        Self { n: 1, half_width, points }
    }

    pub fn build(&self) -> heisenfft_core::Result<SpatialGrid> {
        SpatialGrid::new(self.n, self.half_width, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    /// Central axis `[−T, T)`.
    pub half_period: f64,
    pub points: usize,
}

impl AxisConfig {
    pub fn new(half_period: f64, points: usize) -> Self {
        Self { half_period, points }
    }

    pub fn build(&self) -> heisenfft_core::Result<CentralAxis> {
        CentralAxis::new(self.half_period, self.points)
    }
}

/// Subset of `R^{2n}`; `center` defaults to the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetConfig {
    Empty,
    Whole,
    Rect {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        half_width: f64,
    },
    Ball {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        radius: f64,
    },
}

impl SetConfig {
    pub fn rect(half_width: f64) -> Self {
        SetConfig::Rect { center: None, half_width }
    }

    pub fn ball(radius: f64) -> Self {
        SetConfig::Ball { center: None, radius }
    }

    pub fn region(&self, dim: usize) -> Region {
        let centre = |c: &Option<Vec<f64>>| c.clone().unwrap_or_else(|| vec![0.0; dim]);
        match self {
            SetConfig::Empty => Region::Empty,
            SetConfig::Whole => Region::Whole,
            SetConfig::Rect { center, half_width } => {
                Region::Box { center: centre(center), half_widths: vec![*half_width; dim] }
            }
            SetConfig::Ball { center, radius } => Region::Ball { center: centre(center), radius: *radius },
        }
    }

    fn check(&self, field: &str, dim: usize, out: &mut Vec<Diagnostic>) {
        let (center, size) = match self {
            SetConfig::Empty | SetConfig::Whole => return,
            SetConfig::Rect { center, half_width } => (center, *half_width),
            SetConfig::Ball { center, radius } => (center, *radius),
        };
        if !(size > 0.0 && size.is_finite()) {
            out.push(Diagnostic::new(field, format!("size {size} must be positive")));
        }
        if let Some(c) = center {
            if c.len() != dim {
                out.push(Diagnostic::new(field, format!("center has {} coordinates, expected {dim}", c.len())));
            }
        }
    }
}

/// Gaussian `e^{−width|z − center|²}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    pub width: f64,
}

impl GaussianConfig {
    pub fn new(center: Option<Vec<f64>>, width: f64) -> Self {
        Self { center, width }
    }

    pub fn center(&self, dim: usize) -> Vec<f64> {
        self.center.clone().unwrap_or_else(|| vec![0.0; dim])
    }

    /// Largest value on the box boundary relative to the peak.
    fn boundary_decay(&self, grid: &GridConfig) -> f64 {
        let offset = self.center.as_ref().map_or(0.0, |c| c.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        let reach = (grid.half_width - offset).max(0.0);
        (-self.width * reach * reach).exp()
    }

    fn check(&self, field: &str, grid: &GridConfig, out: &mut Vec<Diagnostic>) {
        if !(self.width > 0.0 && self.width.is_finite()) {
            out.push(Diagnostic::new(field, format!("width {} must be positive", self.width)));
            return;
        }
        if let Some(c) = &self.center {
            if c.len() != 2 * grid.n {
                out.push(Diagnostic::new(field, format!("center has {} coordinates, expected {}", c.len(), 2 * grid.n)));
                return;
            }
        }
        let decay = self.boundary_decay(grid);
        if decay > DECAY_THRESHOLD {
            out.push(Diagnostic::new(
                field,
                format!(
                    "boundary decay {decay:.3e} exceeds {DECAY_THRESHOLD:e}: half_width {} too small for width {}",
                    grid.half_width, self.width
                ),
            ));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub scenario: Scenario,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<AxisConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Write HSNF dumps of the scenario's fields.
    #[serde(default)]
    pub dump_fields: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagator: Option<PropagatorBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annihilation: Option<AnnihilationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observability: Option<ObservabilityBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionBlock>,
}

/// Direct vs factored agreement on `grid`, then unitarity and the semigroup
/// law of the full propagator on band-limited data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorBlock {
    pub initial: GaussianConfig,
    pub lambdas: Vec<f64>,
    pub times: Vec<f64>,
    pub unitarity: UnitarityConfig,
    pub tolerances: PropagatorTolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitarityConfig {
    pub grid: GridConfig,
    pub axis: AxisConfig,
    /// λ-support `|λ| ≤ band` of the data.
    pub band: f64,
    pub width: f64,
    pub time: f64,
    /// First leg of the two-step propagation; the second is `time − split`.
    pub split: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorTolerances {
    pub agreement: f64,
    pub unitarity: f64,
    pub excluded_mass: f64,
    pub semigroup: f64,
}

/// Empirical observability constants on dense grids and the band-limited
/// aggregated inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnihilationBlock {
    pub lambda: f64,
    pub time: f64,
    pub s_set: SetConfig,
    pub sigma_set: SetConfig,
    /// Supersets of `s_set` and `sigma_set` for the monotonicity checks.
    pub s_superset: SetConfig,
    pub sigma_superset: SetConfig,
    pub random_fields: usize,
    pub band_limited: BandLimitedConfig,
    pub tolerances: AnnihilationTolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandLimitedConfig {
    pub grid: GridConfig,
    pub axis: AxisConfig,
    pub band: f64,
    pub width: f64,
    pub time: f64,
    pub set: SetConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnihilationTolerances {
    /// Relative slack on `lhs ≤ C·rhs` for the σ_min construction.
    pub inequality: f64,
    /// Relative slack on the per-λ domination inside the aggregate.
    pub per_lambda: f64,
    /// `|C(∅, ∅) − 1/2|`.
    pub empty: f64,
}

/// Two-time observability at one λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservabilityBlock {
    pub lambda: f64,
    pub times: [f64; 2],
    pub s_set: SetConfig,
    pub sigma_set: SetConfig,
    pub initial: GaussianConfig,
    pub tolerances: ObservabilityTolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservabilityTolerances {
    /// Agreement of the two-time constant with `s_1 = 0`, `Σ = ∅` and the single-time one.
    pub reduction: f64,
    pub empty: f64,
}

/// The explicit solution family: shift law, decay bounds, tail mass, the
/// α sweep and the Parseval identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleBlock {
    pub alpha: f64,
    pub shift_time: f64,
    pub decay: DecayConfig,
    /// `(α, r)` points where `tail_mass ≤ bound` is asserted.
    pub tail_points: Vec<[f64; 2]>,
    pub sweep: SweepConfig,
    pub parseval: ParsevalConfig,
    pub tolerances: CounterexampleTolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub orders: Vec<u32>,
    /// Seeded random points in `|z_i| ≤ reach`, `|t| ≤ 30`, `s ∈ [0, 2]`.
    pub random_points: usize,
    pub reach: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub r: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParsevalConfig {
    pub grid: GridConfig,
    pub axis: AxisConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleTolerances {
    pub shift_law: f64,
    pub decay_slack: f64,
    pub tail_slack: f64,
    pub parseval: f64,
}

/// Magnetic → Hermite → free chain at one λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionBlock {
    pub lambda: f64,
    /// Fraction of the Hermite interval reached by the chain.
    pub tau: f64,
    pub times: Vec<f64>,
    pub dt: f64,
    pub initial: GaussianConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialConfig>,
    /// Support radii `a_0, a_1, a_2` for the transport check.
    pub support: [f64; 3],
    pub tolerances: ReductionTolerances,
}

/// `V = amplitude · e^{−width|z − center|²} · cos(omega·s)`, cut at `cutoff`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub amplitude: f64,
    pub profile: GaussianConfig,
    pub omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionTolerances {
    pub residual: f64,
    /// Largest accepted fine/coarse residual ratio when `h` and `dt` halve.
    pub refinement_ratio: f64,
    pub end_to_end: f64,
    /// Residual bound for the potential chain.
    pub potential_residual: f64,
}

/// One problem found by [`ExperimentConfig::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn defaults(scenario: Scenario) -> Self {
        let mut cfg = Self {
            schema: SCHEMA.into(),
            scenario,
            grid: GridConfig::new(4.5, 32),
            axis: None,
            seed: 0,
            output: None,
            dump_fields: false,
            propagator: None,
            annihilation: None,
            observability: None,
            counterexample: None,
            reduction: None,
        };
        match scenario {
            Scenario::PropagatorSelftest => {
                cfg.propagator = Some(PropagatorBlock {
                    initial: GaussianConfig::new(Some(vec![0.3, -0.2]), 1.5),
                    lambdas: vec![0.5, 1.0, 2.0],
                    times: vec![0.3, 1.0],
                    unitarity: UnitarityConfig {
                        grid: GridConfig::new(12.0, 96),
                        axis: AxisConfig::new(8.0, 16),
                        band: 1.0,
                        width: 0.5,
                        time: 1.0,
                        split: 0.4,
                    },
                    tolerances: PropagatorTolerances {
                        agreement: 1e-6,
                        unitarity: 1e-6,
                        excluded_mass: 1e-8,
                        semigroup: 1e-5,
                    },
                });
            }
            Scenario::Annihilation => {
                cfg.grid = GridConfig::new(3.0, 24);
                cfg.annihilation = Some(AnnihilationBlock {
                    lambda: 1.0,
                    time: 1.0,
                    s_set: SetConfig::rect(1.0),
                    sigma_set: SetConfig::ball(1.3),
                    s_superset: SetConfig::rect(1.5),
                    sigma_superset: SetConfig::ball(1.8),
                    random_fields: 20,
                    band_limited: BandLimitedConfig {
                        grid: GridConfig::new(4.0, 24),
                        axis: AxisConfig::new(8.0, 16),
                        band: 1.0,
                        width: 0.5,
                        time: 1.0,
                        set: SetConfig::ball(2.0),
                    },
                    tolerances: AnnihilationTolerances { inequality: 1e-10, per_lambda: 1e-4, empty: 1e-12 },
                });
            }
            Scenario::Observability => {
                cfg.grid = GridConfig::new(3.0, 24);
                cfg.observability = Some(ObservabilityBlock {
                    lambda: 1.0,
                    times: [0.2, 0.9],
                    s_set: SetConfig::rect(1.0),
                    sigma_set: SetConfig::ball(1.3),
                    initial: GaussianConfig::new(None, 3.0),
                    tolerances: ObservabilityTolerances { reduction: 1e-10, empty: 1e-12 },
                });
            }
            Scenario::Counterexample => {
                cfg.grid = GridConfig::new(10.0, 96);
                cfg.axis = Some(AxisConfig::new(40.0, 128));
                cfg.counterexample = Some(CounterexampleBlock {
                    alpha: 2.0,
                    shift_time: 0.5,
                    decay: DecayConfig { orders: vec![0, 1, 2], random_points: 40, reach: 4.0 },
                    tail_points: vec![[2.0, 3.0]],
                    sweep: SweepConfig { alphas: vec![1.0, 2.0, 4.0], r: 1.0, nodes: 256 },
                    parseval: ParsevalConfig { grid: GridConfig::new(10.0, 128), axis: AxisConfig::new(10.0, 256) },
                    tolerances: CounterexampleTolerances {
                        shift_law: 1e-3,
                        decay_slack: 1e-6,
                        tail_slack: 0.05,
                        parseval: 0.02,
                    },
                });
            }
            Scenario::ReductionChain => {
                // The lensed field at s = 0.9 is wide: L = 10 lets the wrap dominate R3.
                cfg.grid = GridConfig::new(12.0, 64);
                cfg.reduction = Some(ReductionBlock {
                    lambda: 1.0,
                    tau: 0.5,
                    times: vec![0.5, 0.9],
                    dt: 1e-3,
                    initial: GaussianConfig::new(Some(vec![1.0, 0.0]), 0.3),
                    potential: None,
                    support: [1.0, 1.0, 1.0],
                    tolerances: ReductionTolerances {
                        residual: 5e-3,
                        refinement_ratio: 0.6,
                        end_to_end: 1e-3,
                        potential_residual: 1e-2,
                    },
                });
            }
        }
        cfg
    }

    /// Empty iff `run` may proceed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.schema != SCHEMA {
            out.push(Diagnostic::new("schema", format!("expected \"{SCHEMA}\", found \"{}\"", self.schema)));
        }
        check_grid("grid", &self.grid, &mut out);
        if let Some(axis) = &self.axis {
            check_axis("axis", axis, &mut out);
        }
        let dim = 2 * self.grid.n;
        match self.scenario {
            Scenario::PropagatorSelftest => match &self.propagator {
                None => out.push(missing("propagator", self.scenario)),
                Some(b) => b.check(&self.grid, &mut out),
            },
            Scenario::Annihilation => match &self.annihilation {
                None => out.push(missing("annihilation", self.scenario)),
                Some(b) => b.check(dim, &mut out),
            },
            Scenario::Observability => match &self.observability {
                None => out.push(missing("observability", self.scenario)),
                Some(b) => b.check(dim, &mut out),
            },
            Scenario::Counterexample => match &self.counterexample {
                None => out.push(missing("counterexample", self.scenario)),
                Some(b) => {
                    if self.axis.is_none() {
                        out.push(Diagnostic::new("axis", "counterexample needs a central axis"));
                    }
                    b.check(&self.grid, &mut out)
                }
            },
            Scenario::ReductionChain => match &self.reduction {
                None => out.push(missing("reduction", self.scenario)),
                Some(b) => b.check(&self.grid, &mut out),
            },
        }
        out
    }
}

fn missing(block: &str, scenario: Scenario) -> Diagnostic {
    Diagnostic::new(block, format!("scenario {scenario} needs a `{block}` block"))
}

fn check_grid(field: &str, grid: &GridConfig, out: &mut Vec<Diagnostic>) {
    if grid.points % 2 != 0 {
        out.push(Diagnostic::new(format!("{field}.points"), format!("N = {} must be even", grid.points)));
    } else if grid.points < 4 {
        out.push(Diagnostic::new(format!("{field}.points"), format!("N = {} must be at least 4", grid.points)));
    }
    if !(1..=2).contains(&grid.n) {
        out.push(Diagnostic::new(format!("{field}.n"), format!("n = {} must be 1 or 2", grid.n)));
    }
    if !(grid.half_width > 0.0 && grid.half_width.is_finite()) {
        out.push(Diagnostic::new(format!("{field}.half_width"), format!("L = {} must be positive", grid.half_width)));
    }
}

fn check_axis(field: &str, axis: &AxisConfig, out: &mut Vec<Diagnostic>) {
    if axis.points % 2 != 0 || axis.points < 2 {
        out.push(Diagnostic::new(format!("{field}.points"), format!("M = {} must be even and positive", axis.points)));
    }
    if !(axis.half_period > 0.0 && axis.half_period.is_finite()) {
        out.push(Diagnostic::new(format!("{field}.half_period"), format!("T = {} must be positive", axis.half_period)));
    }
}

fn check_positive(field: &str, v: f64, out: &mut Vec<Diagnostic>) {
    if !(v > 0.0 && v.is_finite()) {
        out.push(Diagnostic::new(field, format!("{v} must be positive")));
    }
}

fn check_singular(field: &str, lambda: f64, s: f64, out: &mut Vec<Diagnostic>) {
    if is_singular(lambda, s) {
        out.push(Diagnostic::new(
            field,
            format!("singular pair λ = {lambda}, s = {s}: λs is a nonzero multiple of π"),
        ));
    }
}

/// Every grid λ within `band` against every propagation time.
fn check_axis_singular(field: &str, axis: &AxisConfig, band: f64, times: &[f64], out: &mut Vec<Diagnostic>) {
    let Ok(built) = axis.build() else { return };
    for lambda in built.lambdas().into_iter().filter(|l| l.abs() <= band) {
        for &s in times {
            check_singular(field, lambda, s, out);
        }
    }
}

impl PropagatorBlock {
    fn check(&self, grid: &GridConfig, out: &mut Vec<Diagnostic>) {
        self.initial.check("propagator.initial", grid, out);
        if self.lambdas.is_empty() || self.times.is_empty() {
            out.push(Diagnostic::new("propagator", "lambdas and times must be non-empty"));
        }
        for (i, &l) in self.lambdas.iter().enumerate() {
            for (j, &s) in self.times.iter().enumerate() {
                if !(s > 0.0 && s.is_finite()) {
                    out.push(Diagnostic::new(format!("propagator.times[{j}]"), format!("s = {s} must be positive")));
                    continue;
                }
                check_singular(&format!("propagator.lambdas[{i}] with propagator.times[{j}]"), l, s, out);
            }
        }
        let u = &self.unitarity;
        check_grid("propagator.unitarity.grid", &u.grid, out);
        check_axis("propagator.unitarity.axis", &u.axis, out);
        check_positive("propagator.unitarity.band", u.band, out);
        GaussianConfig::new(None, u.width).check("propagator.unitarity.width", &u.grid, out);
        if !(u.split > 0.0 && u.split < u.time) {
            out.push(Diagnostic::new("propagator.unitarity.split", format!("split {} must lie in (0, time)", u.split)));
        }
        check_axis_singular("propagator.unitarity", &u.axis, u.band, &[u.time, u.split, u.time - u.split], out);
    }
}

impl AnnihilationBlock {
    fn check(&self, dim: usize, out: &mut Vec<Diagnostic>) {
        check_singular("annihilation.lambda with annihilation.time", self.lambda, self.time, out);
        for (name, set) in [
            ("annihilation.s_set", &self.s_set),
            ("annihilation.sigma_set", &self.sigma_set),
            ("annihilation.s_superset", &self.s_superset),
            ("annihilation.sigma_superset", &self.sigma_superset),
            ("annihilation.band_limited.set", &self.band_limited.set),
        ] {
            set.check(name, dim, out);
        }
        if self.random_fields == 0 {
            out.push(Diagnostic::new("annihilation.random_fields", "at least one random field is needed"));
        }
        let b = &self.band_limited;
        check_grid("annihilation.band_limited.grid", &b.grid, out);
        check_axis("annihilation.band_limited.axis", &b.axis, out);
        check_positive("annihilation.band_limited.width", b.width, out);
        if !(b.band > 0.0 && b.time > 0.0 && b.band * b.time < PI) {
            out.push(Diagnostic::new(
                "annihilation.band_limited",
                format!("band {} and time {} must satisfy 0 < band·time < π", b.band, b.time),
            ));
        }
        check_axis_singular("annihilation.band_limited", &b.axis, b.band, &[b.time], out);
    }
}

impl ObservabilityBlock {
    fn check(&self, dim: usize, out: &mut Vec<Diagnostic>) {
        if !(self.times[0] >= 0.0 && self.times[1] > self.times[0]) {
            out.push(Diagnostic::new("observability.times", "need times[1] > times[0] >= 0"));
        }
        check_singular("observability.lambda with observability.times[1] − times[0]", self.lambda, self.times[1] - self.times[0], out);
        self.s_set.check("observability.s_set", dim, out);
        self.sigma_set.check("observability.sigma_set", dim, out);
        check_positive("observability.initial.width", self.initial.width, out);
    }
}

impl CounterexampleBlock {
    fn check(&self, grid: &GridConfig, out: &mut Vec<Diagnostic>) {
        check_positive("counterexample.alpha", self.alpha, out);
        let decay = (-self.alpha * grid.half_width * grid.half_width / 4.0).exp();
        if decay > DECAY_THRESHOLD {
            out.push(Diagnostic::new(
                "grid.half_width",
                format!("boundary decay e^(−αL²/4) = {decay:.3e} exceeds {DECAY_THRESHOLD:e} for α = {}", self.alpha),
            ));
        }
        for (i, [a, r]) in self.tail_points.iter().enumerate() {
            check_positive(&format!("counterexample.tail_points[{i}].alpha"), *a, out);
            check_positive(&format!("counterexample.tail_points[{i}].r"), *r, out);
        }
        if self.sweep.alphas.len() < 3 {
            out.push(Diagnostic::new("counterexample.sweep.alphas", "the sweep needs at least 3 values of α"));
        }
        for (i, &a) in self.sweep.alphas.iter().enumerate() {
            check_positive(&format!("counterexample.sweep.alphas[{i}]"), a, out);
        }
        check_positive("counterexample.sweep.r", self.sweep.r, out);
        check_grid("counterexample.parseval.grid", &self.parseval.grid, out);
        check_axis("counterexample.parseval.axis", &self.parseval.axis, out);
        if self.decay.orders.is_empty() {
            out.push(Diagnostic::new("counterexample.decay.orders", "no decay orders requested"));
        }
    }
}

impl ReductionBlock {
    fn check(&self, grid: &GridConfig, out: &mut Vec<Diagnostic>) {
        if !(self.lambda != 0.0 && self.lambda.abs() < PI / 2.0) {
            out.push(Diagnostic::new("reduction.lambda", format!("λ = {} must satisfy 0 < |λ| < π/2", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            out.push(Diagnostic::new("reduction.tau", format!("τ = {} must lie in [0, 1]", self.tau)));
        }
        check_positive("reduction.dt", self.dt, out);
        if self.times.is_empty() {
            out.push(Diagnostic::new("reduction.times", "at least one residual time is needed"));
        }
        for (i, &s) in self.times.iter().enumerate() {
            if !(s > self.dt && s <= 1.0 - self.dt) {
                out.push(Diagnostic::new(format!("reduction.times[{i}]"), format!("s = {s} must lie in (dt, 1 − dt]")));
            }
        }
        self.initial.check("reduction.initial", grid, out);
        for (i, &a) in self.support.iter().enumerate() {
            check_positive(&format!("reduction.support[{i}]"), a, out);
        }
        if let Some(p) = &self.potential {
            if let Some(c) = &p.profile.center {
                if c.len() != 2 * grid.n {
                    out.push(Diagnostic::new("reduction.potential.profile.center", "wrong number of coordinates"));
                }
            }
            check_positive("reduction.potential.profile.width", p.profile.width, out);
            if let Some(r) = p.cutoff {
                check_positive("reduction.potential.cutoff", r, out);
            }
        }
    }
}
