//! Sketching operators: random projections (Gaussian, SRHT, count sketch and
//! their combination) and column selection (uniform, leverage score,
//! landmark), plus empirical checks of the embedding and low-rank properties.

mod projection;
pub(crate) mod selection;
mod verify;

pub use projection::{
    combined_sketch, count_sketch, count_sketch_operator, count_sketch_rows, fwht, gaussian_sketch,
    srht_sketch, ColumnSource, CountSketchHash, CountingColumns,
};
pub use selection::{
    landmark_select, leverage_sample_columns, leverage_scores, uniform_sample_columns,
    ColumnSelection, DEFAULT_LANDMARK_ITERS,
};
pub use verify::{estimate_eta, estimate_gamma, EtaEstimate, GammaEstimate};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SketchKind {
    Gaussian,
    Srht,
    CountSketch,
    UniformColumns,
    LeverageColumns,
    LandmarkColumns,
    Combined,
}

impl SketchKind {
    pub fn name(self) -> &'static str {
        match self {
            SketchKind::Gaussian => "gaussian",
            SketchKind::Srht => "srht",
            SketchKind::CountSketch => "count_sketch",
            SketchKind::UniformColumns => "uniform_columns",
            SketchKind::LeverageColumns => "leverage_columns",
            SketchKind::LandmarkColumns => "landmark_columns",
            SketchKind::Combined => "combined",
        }
    }

    pub fn is_selection(self) -> bool {
        matches!(
            self,
            SketchKind::UniformColumns | SketchKind::LeverageColumns | SketchKind::LandmarkColumns
        )
    }
}

impl std::str::FromStr for SketchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" => SketchKind::Gaussian,
            "srht" => SketchKind::Srht,
            "count_sketch" | "count" => SketchKind::CountSketch,
            "uniform_columns" | "uniform" => SketchKind::UniformColumns,
            "leverage_columns" | "leverage" => SketchKind::LeverageColumns,
            "landmark_columns" | "landmark" => SketchKind::LandmarkColumns,
            "combined" => SketchKind::Combined,
            other => return Err(Error::param("sketch kind", format!("unknown kind `{other}`"))),
        })
    }
}

/// Declarative description of a sketching operator `S` (n x s).
///
/// For [`SketchKind::Combined`], `s` is the count-sketch width and `stage2`
/// the dense projection applied afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchSpec {
    pub kind: SketchKind,
    pub s: usize,
    pub seed: u64,
    pub stage2: Option<Box<SketchSpec>>,
    pub scale_columns: bool,
}

/// Output of applying a [`SketchSpec`].
#[derive(Clone, Debug)]
pub struct Sketch {
    pub matrix: DenseMatrix,
    /// Present for column-selection kinds.
    pub selection: Option<ColumnSelection>,
}

impl SketchSpec {
    pub fn new(kind: SketchKind, s: usize, seed: u64) -> Self {
        Self {
            kind,
            s,
            seed,
            stage2: None,
            scale_columns: false,
        }
    }

    pub fn gaussian(s: usize, seed: u64) -> Self {
        Self::new(SketchKind::Gaussian, s, seed)
    }

    pub fn srht(s: usize, seed: u64) -> Self {
        Self::new(SketchKind::Srht, s, seed)
    }

    pub fn count_sketch(s: usize, seed: u64) -> Self {
        Self::new(SketchKind::CountSketch, s, seed)
    }

    /// Count sketch to `s_cs` columns followed by a Gaussian or SRHT
    /// projection to `s`. The second stage draws from a seed derived from
    /// `seed`.
    pub fn combined(s_cs: usize, stage2: SketchKind, s: usize, seed: u64) -> Self {
        Self {
            kind: SketchKind::Combined,
            s: s_cs,
            seed,
            stage2: Some(Box::new(Self::new(stage2, s, derive_seed(seed, 0xC0B1)))),
            scale_columns: false,
        }
    }

    pub fn with_scaling(mut self, scale: bool) -> Self {
        self.scale_columns = scale;
        self
    }

    /// Same operator family redrawn from another seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        match self.kind {
            SketchKind::Combined => {
                let st = self.stage2.as_ref().expect("validated combined spec");
                let mut out = Self::combined(self.s, st.kind, st.s, seed);
                out.scale_columns = self.scale_columns;
                out
            }
            _ => Self {
                seed,
                ..self.clone()
            },
        }
    }

    /// Number of columns the sketch produces (an upper bound for leverage
    /// sampling, which deduplicates).
    pub fn output_size(&self) -> usize {
        match (&self.kind, &self.stage2) {
            (SketchKind::Combined, Some(st)) => st.s,
            _ => self.s,
        }
    }

    /// Checks the spec against an input with `n` columns.
    pub fn validate(&self, n: usize) -> Result<()> {
        const OP: &str = "sketch spec";
        if self.s == 0 {
            return Err(Error::param(OP, "sketch size must be at least 1"));
        }
        match self.kind {
            SketchKind::Srht => {
                let big_n = n.next_power_of_two();
                if self.s > big_n {
                    return Err(Error::param(OP, format!("srht size {} exceeds {big_n}", self.s)));
                }
            }
            SketchKind::UniformColumns | SketchKind::LandmarkColumns | SketchKind::LeverageColumns => {
                if self.s > n {
                    return Err(Error::param(
                        OP,
                        format!("cannot select {} of {n} columns", self.s),
                    ));
                }
            }
            SketchKind::Combined => {
                let st = self
                    .stage2
                    .as_ref()
                    .ok_or_else(|| Error::param(OP, "combined sketch needs a second stage"))?;
                if !matches!(st.kind, SketchKind::Gaussian | SketchKind::Srht) {
                    return Err(Error::param(OP, "second stage must be gaussian or srht"));
                }
                if st.s > self.s {
                    return Err(Error::param(
                        OP,
                        format!("second stage size {} exceeds count-sketch size {}", st.s, self.s),
                    ));
                }
                st.validate(self.s)?;
            }
            SketchKind::Gaussian | SketchKind::CountSketch => {}
        }
        if self.kind != SketchKind::Combined && self.stage2.is_some() {
            return Err(Error::param(OP, "only combined sketches take a second stage"));
        }
        Ok(())
    }

    /// Column sketch `C = A S`.
    pub fn apply(&self, a: &DenseMatrix) -> Result<Sketch> {
        self.validate(a.cols())?;
        let plain = |matrix| Sketch {
            matrix,
            selection: None,
        };
        Ok(match self.kind {
            SketchKind::Gaussian => plain(gaussian_sketch(a, self.s, self.seed)?),
            SketchKind::Srht => plain(srht_sketch(a, self.s, self.seed)?),
            SketchKind::CountSketch => plain(count_sketch(a, self.s, self.seed)?),
            SketchKind::Combined => plain(combined_sketch(a, self)?),
            SketchKind::UniformColumns => {
                let (matrix, sel) = uniform_sample_columns(a, self.s, self.seed)?;
                Sketch {
                    matrix,
                    selection: Some(sel),
                }
            }
            SketchKind::LeverageColumns => {
                let (matrix, sel) =
                    leverage_sample_columns(a, self.s, self.seed, None, self.scale_columns)?;
                Sketch {
                    matrix,
                    selection: Some(sel),
                }
            }
            SketchKind::LandmarkColumns => plain(landmark_select(
                a,
                self.s,
                DEFAULT_LANDMARK_ITERS,
                self.seed,
            )?),
        })
    }

    /// Row sketch `Sᵀ A` for an `m x n` input with `S` of size `m x s`.
    /// Selection kinds report the chosen row indices.
    pub fn apply_rows(&self, a: &DenseMatrix) -> Result<Sketch> {
        if self.kind == SketchKind::CountSketch {
            self.validate(a.rows())?;
            return Ok(Sketch {
                matrix: count_sketch_rows(a, self.s, self.seed)?,
                selection: None,
            });
        }
        let out = self.apply(&a.transpose())?;
        Ok(Sketch {
            matrix: out.matrix.transpose(),
            selection: out.selection,
        })
    }
}
