//! DNN workloads as ordered lists of convolution and fully-connected layers.
//!
//! Only MAC-bearing layers are represented. Pooling, normalization,
//! activation functions and residual additions carry no weights and are
//! left out of every network. A fully-connected layer is a 1x1 convolution
//! over a 1x1 spatial grid, so the dataflow model needs no special case.

mod presets;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use presets::{builtin_network, Preset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    #[serde(rename = "CONV")]
    Conv,
    #[serde(rename = "FC")]
    Fc,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayerKind::Conv => "CONV",
            LayerKind::Fc => "FC",
        })
    }
}

/// Shape of one compute layer.
///
/// Field names follow the network file schema. Use [`LayerConfig::validate`]
/// (or build through [`Network::new`]) before handing a layer to the
/// dataflow model; the derived output dimensions assume a valid shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LayerConfig {
    pub name: String,
    pub kind: LayerKind,
    pub batch: u32,
    pub in_channels: u32,
    pub out_channels: u32,
    pub in_height: u32,
    pub in_width: u32,
    pub filter_height: u32,
    pub filter_width: u32,
    pub stride: u32,
    pub padding: u32,
}

impl LayerConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn conv(
        name: impl Into<String>,
        in_channels: u32,
        out_channels: u32,
        in_height: u32,
        in_width: u32,
        filter: u32,
        stride: u32,
        padding: u32,
    ) -> Self {
        LayerConfig {
            name: name.into(),
            kind: LayerKind::Conv,
            batch: 1,
            in_channels,
            out_channels,
            in_height,
            in_width,
            filter_height: filter,
            filter_width: filter,
            stride,
            padding,
        }
    }

    pub fn fc(name: impl Into<String>, inputs: u32, outputs: u32) -> Self {
        LayerConfig {
            name: name.into(),
            kind: LayerKind::Fc,
            batch: 1,
            in_channels: inputs,
            out_channels: outputs,
            in_height: 1,
            in_width: 1,
            filter_height: 1,
            filter_width: 1,
            stride: 1,
            padding: 0,
        }
    }

    pub fn with_batch(mut self, batch: u32) -> Self {
        self.batch = batch;
        self
    }

    /// Output rows `E`.
    pub fn out_height(&self) -> u32 {
        out_dim(self.in_height, self.filter_height, self.stride, self.padding)
    }

    /// Output columns `F`.
    pub fn out_width(&self) -> u32 {
        out_dim(self.in_width, self.filter_width, self.stride, self.padding)
    }

    /// Input row length including both padding borders.
    pub fn padded_width(&self) -> u64 {
        u64::from(self.in_width) + 2 * u64::from(self.padding)
    }

    pub fn macs(&self) -> u64 {
        layer_macs(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, message: String| Error::InvalidLayer {
            layer: self.name.clone(),
            field,
            message,
        };
        for (field, v) in [
            ("batch", self.batch),
            ("in_channels", self.in_channels),
            ("out_channels", self.out_channels),
            ("in_height", self.in_height),
            ("in_width", self.in_width),
            ("filter_height", self.filter_height),
            ("filter_width", self.filter_width),
            ("stride", self.stride),
        ] {
            if v == 0 {
                return Err(bad(field, format!("{field} must be >= 1")));
            }
        }
        if self.kind == LayerKind::Fc {
            if self.filter_height != 1 || self.filter_width != 1 {
                return Err(bad("filter_height", "FC layer must have R=S=1".into()));
            }
            if self.in_height != 1 || self.in_width != 1 {
                return Err(bad("in_height", "FC layer must have H=W=1".into()));
            }
            if self.stride != 1 || self.padding != 0 {
                return Err(bad(
                    "stride",
                    "FC layer must have stride=1 and padding=0".into(),
                ));
            }
        }
        let p2 = 2 * u64::from(self.padding);
        if u64::from(self.in_height) + p2 < u64::from(self.filter_height) {
            return Err(bad(
                "filter_height",
                "filter taller than the padded input".into(),
            ));
        }
        if u64::from(self.in_width) + p2 < u64::from(self.filter_width) {
            return Err(bad(
                "filter_width",
                "filter wider than the padded input".into(),
            ));
        }
        Ok(())
    }
}

fn out_dim(input: u32, filter: u32, stride: u32, padding: u32) -> u32 {
    let span = u64::from(input) + 2 * u64::from(padding) - u64::from(filter);
    (span / u64::from(stride) + 1) as u32
}

/// `N·M·C·E·F·R·S`.
pub fn layer_macs(layer: &LayerConfig) -> u64 {
    u64::from(layer.batch)
        * u64::from(layer.out_channels)
        * u64::from(layer.in_channels)
        * u64::from(layer.out_height())
        * u64::from(layer.out_width())
        * u64::from(layer.filter_height)
        * u64::from(layer.filter_width)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Network {
    pub name: String,
    pub layers: Vec<LayerConfig>,
}

impl Network {
    pub fn new(name: impl Into<String>, layers: Vec<LayerConfig>) -> Result<Self> {
        let name = name.into();
        if layers.is_empty() {
            return Err(Error::InvalidNetwork {
                network: name,
                message: "network has no layers".into(),
            });
        }
        let mut seen = HashSet::new();
        for layer in &layers {
            layer.validate()?;
            if !seen.insert(layer.name.as_str()) {
                return Err(Error::InvalidNetwork {
                    network: name,
                    message: format!("duplicate layer name `{}`", layer.name),
                });
            }
        }
        Ok(Network { name, layers })
    }

    pub fn total_macs(&self) -> u64 {
        self.layers.iter().map(layer_macs).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    name: String,
    layers: Vec<RawLayer>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    name: String,
    kind: LayerKind,
    #[serde(default)]
    batch: Option<u32>,
    in_channels: u32,
    out_channels: u32,
    #[serde(default)]
    in_height: Option<u32>,
    #[serde(default)]
    in_width: Option<u32>,
    #[serde(default)]
    filter_height: Option<u32>,
    #[serde(default)]
    filter_width: Option<u32>,
    #[serde(default)]
    stride: Option<u32>,
    #[serde(default)]
    padding: Option<u32>,
}

impl RawLayer {
    fn into_layer(self) -> Result<LayerConfig> {
        // spatial fields are mandatory for convolutions and default to 1 for FC
        let spatial = |v: Option<u32>, field: &'static str| match (v, self.kind) {
            (Some(v), _) => Ok(v),
            (None, LayerKind::Fc) => Ok(1),
            (None, LayerKind::Conv) => Err(Error::InvalidLayer {
                layer: self.name.clone(),
                field,
                message: "missing for CONV layer".into(),
            }),
        };
        let layer = LayerConfig {
            kind: self.kind,
            batch: self.batch.unwrap_or(1),
            in_channels: self.in_channels,
            out_channels: self.out_channels,
            in_height: spatial(self.in_height, "in_height")?,
            in_width: spatial(self.in_width, "in_width")?,
            filter_height: spatial(self.filter_height, "filter_height")?,
            filter_width: spatial(self.filter_width, "filter_width")?,
            stride: self.stride.unwrap_or(1),
            padding: self.padding.unwrap_or(0),
            name: self.name,
        };
        Ok(layer)
    }
}

/// Parses a network document (JSON, strict field set).
pub fn parse_network(text: &str) -> Result<Network> {
    let raw: RawNetwork =
        serde_json::from_str(text).map_err(|e| Error::parse("network document", e.to_string()))?;
    let layers = raw
        .layers
        .into_iter()
        .map(RawLayer::into_layer)
        .collect::<Result<Vec<_>>>()?;
    Network::new(raw.name, layers)
}
