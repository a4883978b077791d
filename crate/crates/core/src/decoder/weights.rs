//! Trainable parameters of the unrolled decoder and their on-disk format.
//!
//! Binary layout (little endian):
//!
//! ```text
//! b"WBPW"  magic
//! u32      format version (1)
//! u32      L, number of layers
//! u32      n, code length
//! u32      E, number of edges
//! f64 x L*n  vn_channel   (layer-major)
//! f64 x L*E  vn_edge
//! f64 x L*n  out_channel
//! f64 x L*E  out_edge
//! ```
//!
//! The in-memory parameter vector uses the same order.

use std::ops::Range;
use std::path::Path;

use super::TannerGraph;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"WBPW";
const VERSION: u32 = 1;

/// Dimensions shared by a weight set and its gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ParamShape {
    pub layers: usize,
    pub n: usize,
    pub edges: usize,
}

impl ParamShape {
    pub fn for_graph(graph: &TannerGraph, layers: usize) -> Self {
        Self { layers, n: graph.n_vars(), edges: graph.n_edges() }
    }

    pub fn len(&self) -> usize {
        2 * self.layers * (self.n + self.edges)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// 0-based layer `l`.
    pub fn vn_channel(&self, l: usize) -> Range<usize> {
        let s = l * self.n;
        s..s + self.n
    }

    pub fn vn_edge(&self, l: usize) -> Range<usize> {
        let s = self.layers * self.n + l * self.edges;
        s..s + self.edges
    }

    pub fn out_channel(&self, l: usize) -> Range<usize> {
        let s = self.layers * (self.n + self.edges) + l * self.n;
        s..s + self.n
    }

    pub fn out_edge(&self, l: usize) -> Range<usize> {
        let s = self.layers * (2 * self.n + self.edges) + l * self.edges;
        s..s + self.edges
    }

    pub fn check_graph(&self, graph: &TannerGraph) -> Result<()> {
        if self.n != graph.n_vars() {
            return Err(Error::Dimension {
                what: "weight set code length",
                expected: graph.n_vars(),
                got: self.n,
            });
        }
        if self.edges != graph.n_edges() {
            return Err(Error::Dimension {
                what: "weight set edge count",
                expected: graph.n_edges(),
                got: self.edges,
            });
        }
        Ok(())
    }
}

macro_rules! param_sections {
    ($ty:ident) => {
        impl $ty {
            pub fn shape(&self) -> ParamShape {
                self.shape
            }

            pub fn layers(&self) -> usize {
                self.shape.layers
            }

            /// All parameters in serialization order.
            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [f64] {
                &mut self.values
            }

            pub fn vn_channel(&self, l: usize) -> &[f64] {
                &self.values[self.shape.vn_channel(l)]
            }

            pub fn vn_edge(&self, l: usize) -> &[f64] {
                &self.values[self.shape.vn_edge(l)]
            }

            pub fn out_channel(&self, l: usize) -> &[f64] {
                &self.values[self.shape.out_channel(l)]
            }

            pub fn out_edge(&self, l: usize) -> &[f64] {
                &self.values[self.shape.out_edge(l)]
            }
        }
    };
}

/// Weights of every layer: channel and edge weights for the variable-node
/// update and for the per-layer soft output.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    shape: ParamShape,
    values: Vec<f64>,
}

param_sections!(WeightSet);

impl WeightSet {
    /// All-ones weights, which reduce the network to plain belief propagation.
    pub fn ones(shape: ParamShape) -> Self {
        Self { shape, values: vec![1.0; shape.len()] }
    }

    pub fn unit(graph: &TannerGraph, layers: usize) -> Self {
        Self::ones(ParamShape::for_graph(graph, layers))
    }

    pub fn from_values(shape: ParamShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::Dimension {
                what: "weight vector length",
                expected: shape.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite".into()));
        }
        Ok(Self { shape, values })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        for x in [VERSION, self.shape.layers as u32, self.shape.n as u32, self.shape.edges as u32] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < 20 || &bytes[..4] != MAGIC {
            return Err("not a weight file (bad magic)".into());
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
        if word(0) != VERSION {
            return Err(format!("unsupported weight format version {}", word(0)));
        }
        let shape = ParamShape { layers: word(1) as usize, n: word(2) as usize, edges: word(3) as usize };
        let body = &bytes[20..];
        if body.len() != 8 * shape.len() {
            return Err(format!(
                "expected {} weights, file holds {} bytes of payload",
                shape.len(),
                body.len()
            ));
        }
        let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::from_values(shape, values).map_err(|e| e.to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|m| Error::format(path, m))
    }
}

/// Gradient of a scalar loss with respect to every entry of a [`WeightSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    shape: ParamShape,
    values: Vec<f64>,
}

param_sections!(GradientSet);

impl GradientSet {
    pub fn zeros(shape: ParamShape) -> Self {
        Self { shape, values: vec![0.0; shape.len()] }
    }

    pub(crate) fn from_raw(shape: ParamShape, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), shape.len());
        Self { shape, values }
    }

    pub fn add_assign(&mut self, other: &GradientSet) {
        assert_eq!(self.shape, other.shape);
        self.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += b);
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
