use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::asymptotics::{smallest_divisor_modes, WitnessVariant};
use crate::blsolver::{BumpSource, FourierBoundaryData, StripGrid};
use crate::cell::CoefficientModel;
use crate::error::{Error, Result};
use crate::geometry::{build_frame, golden_frame, liouville_direction, NormalFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentId {
    /// Rational normal: exponential decay to an offset-dependent tail.
    E1,
    /// Golden-ratio normal: super-polynomial decay.
    E2,
    /// Liouville normal: slow-convergence witness.
    E3,
    /// Tail dependence on the boundary offset.
    E4,
    /// Cell problem and `A0`.
    E5,
    /// Homogenization error sweep in ε.
    E6,
    #[serde(rename = "dioph")]
    Dioph,
    #[serde(rename = "kernel")]
    Kernel,
}

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::E1 => "E1",
            ExperimentId::E2 => "E2",
            ExperimentId::E3 => "E3",
            ExperimentId::E4 => "E4",
            ExperimentId::E5 => "E5",
            ExperimentId::E6 => "E6",
            ExperimentId::Dioph => "dioph",
            ExperimentId::Kernel => "kernel",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ExperimentId::E1 => "rational normal: exponential decay and offset-dependent tail",
            ExperimentId::E2 => "golden-ratio normal: decay faster than every power",
            ExperimentId::E3 => "Liouville normal: slow-convergence witness",
            ExperimentId::E4 => "tail dependence on the boundary offset",
            ExperimentId::E5 => "cell problem and homogenized tensor",
            ExperimentId::E6 => "homogenization error sweep",
            ExperimentId::Dioph => "Diophantine scan of the boundary normal",
            ExperimentId::Kernel => "half-plane Green and Poisson kernels",
        }
    }
}

/// Boundary normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrameSpec {
    /// `n = e_axis` (0-based).
    Axis {
        #[serde(default = "default_axis")]
        axis: usize,
    },
    /// Tangent `(1, φ)/|(1, φ)|`.
    Golden {},
    /// Tangent `(1, L)/|(1, L)|`, `L = Σ_{k≤levels} 10^{-k!}`.
    Liouville { levels: u32 },
    Vector { n: Vec<f64> },
}

fn default_axis() -> usize {
    1
}

impl FrameSpec {
    /// The frame at offset `a` and, for Liouville normals, the lattice scale
    /// beyond which the truncated slope is rational.
    pub fn build(&self, a: f64) -> Result<(NormalFrame, Option<f64>)> {
        Ok(match self {
            FrameSpec::Axis { axis } => {
                if *axis > 1 {
                    return Err(Error::Config(format!("axis {axis} out of range (0 or 1)")));
                }
                let mut n = [0.0; 2];
                n[*axis] = 1.0;
                (build_frame(&n, a)?, None)
            }
            FrameSpec::Golden {} => (golden_frame(a), None),
            FrameSpec::Liouville { levels } => {
                let l = liouville_direction(*levels)?;
                (l.frame.with_offset(a), Some(l.validity_radius))
            }
            FrameSpec::Vector { n } => {
                if n.len() != 2 {
                    return Err(Error::Config("normal vectors must have two entries".into()));
                }
                (build_frame(n, a)?, None)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessParams {
    pub l_list: Vec<f64>,
    pub m_max: u32,
    pub variant: WitnessVariant,
    /// Defaults to twice the validity radius of a Liouville frame, else 10⁶.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_radius: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayParams {
    pub m_list: Vec<u32>,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub eps_list: Vec<f64>,
    pub cells: usize,
    pub length: f64,
    pub source: BumpSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanParams {
    pub tau: f64,
    pub radius: u64,
    pub m_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    /// Window half-width of the boundary quadrature.
    pub half_width: f64,
    /// Number of interior comparison points.
    pub points: usize,
    pub heights: [f64; 2],
}

/// Strict experiment description; every section is optional and filled
/// with the experiment's defaults by [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<FourierBoundaryData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<StripGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iota: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Parses a config, reporting JSON errors as `file:line:column: message`.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentConfig> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        Error::Config(format!("{origin}:{}:{}: {msg}", e.line(), e.column()))
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: cannot read config: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

fn default_e2_data(frame: &NormalFrame) -> FourierBoundaryData {
    smallest_divisor_modes(frame, 20, 20)
        .into_iter()
        .fold(FourierBoundaryData::zero(), |acc, xi| acc.plus(&FourierBoundaryData::cosine(xi, 1.0)))
}

/// Two incommensurate modes used by the tail and kernel experiments.
pub fn two_mode_data() -> FourierBoundaryData {
    FourierBoundaryData::cosine([1, 0], 1.0)
        .plus(&FourierBoundaryData::sine([1, 1], 0.5))
        .plus(&FourierBoundaryData::constant(0.3))
}

impl ExperimentConfig {
    pub fn for_experiment(id: ExperimentId) -> Self {
        ExperimentConfig {
            experiment: Some(id),
            ..Default::default()
        }
    }

    /// Which optional sections an experiment reads.
    fn allowed(id: ExperimentId) -> &'static [&'static str] {
        match id {
            ExperimentId::E1 => &["frame", "offset", "coefficients", "data", "grid", "t_max"],
            ExperimentId::E2 => &["frame", "offset", "data", "decay"],
            ExperimentId::E3 => &["frame", "offset", "witness"],
            ExperimentId::E4 => &["frame", "coefficients", "data", "grid", "t_max", "iota", "offsets"],
            ExperimentId::E5 => &["coefficients", "cell_grid"],
            ExperimentId::E6 => &["coefficients", "sweep"],
            ExperimentId::Dioph => &["frame", "scan"],
            ExperimentId::Kernel => &["frame", "offset", "data", "kernel"],
        }
    }

    fn present(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        macro_rules! chk {
            ($($f:ident),*) => { $( if self.$f.is_some() { v.push(stringify!($f)); } )* };
        }
        chk!(frame, offset, coefficients, data, grid, t_max, iota, cell_grid, witness, decay, offsets, sweep, scan, kernel);
        v
    }

    /// Fills every section the experiment reads with its default and rejects
    /// sections it does not read.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let id = self
            .experiment
            .ok_or_else(|| Error::Config("missing field `experiment` (E1..E6, dioph, kernel)".into()))?;
        let allowed = Self::allowed(id);
        for f in self.present() {
            if !allowed.contains(&f) {
                return Err(Error::Config(format!("field `{f}` is not used by experiment {}", id.name())));
            }
        }
        let mut c = self.clone();
        let frame_default = match id {
            ExperimentId::E1 => FrameSpec::Axis { axis: 1 },
            ExperimentId::E3 => FrameSpec::Liouville { levels: 3 },
            _ => FrameSpec::Golden {},
        };
        if allowed.contains(&"frame") {
            c.frame.get_or_insert(frame_default);
        }
        if allowed.contains(&"offset") {
            c.offset.get_or_insert(0.0);
        }
        if allowed.contains(&"coefficients") {
            c.coefficients.get_or_insert(match id {
                ExperimentId::E5 | ExperimentId::E6 => CoefficientModel::standard_layered(),
                _ => CoefficientModel::Identity,
            });
        }
        if allowed.contains(&"data") && c.data.is_none() {
            c.data = Some(match id {
                ExperimentId::E1 => FourierBoundaryData::sine([1, 0], 1.0),
                ExperimentId::E2 => {
                    let (f, _) = c.frame.as_ref().expect("frame resolved").build(0.0)?;
                    default_e2_data(&f)
                }
                _ => two_mode_data(),
            });
        }
        match id {
            ExperimentId::E1 => {
                c.grid.get_or_insert(StripGrid { n_tangential: 64, nt: 512 });
                c.t_max.get_or_insert(6.0);
            }
            ExperimentId::E2 => {
                c.decay.get_or_insert(DecayParams {
                    m_list: vec![1, 2, 3, 4],
                    t_min: 1.0,
                    t_max: 50.0,
                    samples: 491,
                });
            }
            ExperimentId::E3 => {
                c.witness.get_or_insert(WitnessParams {
                    l_list: vec![1.0, 2.0],
                    m_max: 3,
                    variant: WitnessVariant::L2,
                    search_radius: None,
                });
            }
            ExperimentId::E4 => {
                c.grid.get_or_insert(StripGrid { n_tangential: 16, nt: 240 });
                c.t_max.get_or_insert(6.0);
                c.offsets.get_or_insert(vec![0.0, 0.3, 0.7]);
            }
            ExperimentId::E5 => {
                c.cell_grid.get_or_insert(256);
            }
            ExperimentId::E6 => {
                c.sweep.get_or_insert(SweepParams {
                    eps_list: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
                    cells: 256,
                    length: 1.0,
                    source: BumpSource {
                        center: [0.5, 0.5],
                        radius: 0.3,
                        amplitude: 10.0,
                    },
                });
            }
            ExperimentId::Dioph => {
                c.scan.get_or_insert(ScanParams {
                    tau: 0.0,
                    radius: 1000,
                    m_max: 3,
                });
            }
            ExperimentId::Kernel => {
                c.kernel.get_or_insert(KernelParams {
                    half_width: 2000.0,
                    points: 20,
                    heights: [0.25, 2.0],
                });
            }
        }
        c.validate(id)?;
        Ok(c)
    }

    fn validate(&self, id: ExperimentId) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if let Some(t) = self.t_max {
            if !(t > 0.0) {
                return bad("t_max must be positive");
            }
        }
        if let Some(o) = &self.offsets {
            if o.is_empty() {
                return bad("offsets must not be empty");
            }
        }
        if let Some(w) = &self.witness {
            if w.l_list.is_empty() || w.l_list.iter().any(|l| !(*l > 0.0)) {
                return bad("witness.l_list must hold positive exponents");
            }
        }
        if let Some(d) = &self.decay {
            if !(d.t_min > 0.0 && d.t_max > d.t_min && d.samples >= 4) {
                return bad("decay needs 0 < t_min < t_max and at least 4 samples");
            }
        }
        if let Some(k) = &self.kernel {
            if !(k.heights[0] > 0.0 && k.heights[1] >= k.heights[0] && k.points > 0 && k.half_width > 0.0) {
                return bad("kernel needs 0 < heights[0] <= heights[1], points > 0, half_width > 0");
            }
        }
        if id == ExperimentId::E1 || id == ExperimentId::E4 {
            if let Some(g) = self.grid {
                if g.n_tangential < 4 || g.nt < 2 {
                    return bad("grid too small");
                }
            }
        }
        Ok(())
    }
}
