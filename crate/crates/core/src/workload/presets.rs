//! Built-in layer tables for the standard CIFAR and ImageNet networks.
//!
//! CIFAR ResNets use identity shortcuts with zero padding (no projection
//! convolutions). ImageNet ResNets use 1x1 projection shortcuts and put the
//! stride on the 3x3 convolution of a bottleneck.

use std::fmt;
use std::str::FromStr;

use super::{LayerConfig, Network};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Vgg16Cifar,
    Resnet20,
    Resnet56,
    Vgg16Imagenet,
    Resnet34,
    Resnet50,
    /// Single 5x5 input, 3x3 filter layer. Small enough for the loop-nest oracle.
    Toy,
}

impl Preset {
    /// The six published networks (excludes [`Preset::Toy`]).
    pub const PUBLISHED: [Preset; 6] = [
        Preset::Vgg16Cifar,
        Preset::Resnet20,
        Preset::Resnet56,
        Preset::Vgg16Imagenet,
        Preset::Resnet34,
        Preset::Resnet50,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Vgg16Cifar => "vgg16-cifar",
            Preset::Resnet20 => "resnet20",
            Preset::Resnet56 => "resnet56",
            Preset::Vgg16Imagenet => "vgg16-imagenet",
            Preset::Resnet34 => "resnet34",
            Preset::Resnet50 => "resnet50",
            Preset::Toy => "toy",
        }
    }

    pub fn network(self) -> Network {
        let layers = match self {
            Preset::Vgg16Cifar => vgg16(32, &[512, 512, 10]),
            Preset::Vgg16Imagenet => vgg16(224, &[4096, 4096, 1000]),
            Preset::Resnet20 => cifar_resnet(3),
            Preset::Resnet56 => cifar_resnet(9),
            Preset::Resnet34 => resnet34(),
            Preset::Resnet50 => resnet50(),
            Preset::Toy => vec![LayerConfig::conv("conv", 1, 1, 5, 5, 3, 1, 0)],
        };
        Network::new(self.name(), layers).expect("built-in networks are valid")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::PUBLISHED
            .into_iter()
            .chain([Preset::Toy])
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

pub fn builtin_network(preset: &str) -> Result<Network> {
    Ok(preset.parse::<Preset>()?.network())
}

/// VGG-16: thirteen 3x3 convolutions in five pooled stages, then three FC layers.
fn vgg16(input: u32, fc_widths: &[u32; 3]) -> Vec<LayerConfig> {
    const STAGES: [(u32, usize); 5] = [(64, 2), (128, 2), (256, 3), (512, 3), (512, 3)];
    let mut layers = Vec::with_capacity(16);
    let mut channels = 3;
    let mut hw = input;
    for (stage, &(width, convs)) in STAGES.iter().enumerate() {
        for i in 0..convs {
            let name = format!("conv{}_{}", stage + 1, i + 1);
            layers.push(LayerConfig::conv(name, channels, width, hw, hw, 3, 1, 1));
            channels = width;
        }
        hw /= 2;
    }
    let mut inputs = channels * hw * hw;
    let first_fc = if input == 224 { 6 } else { 1 };
    for (i, &width) in fc_widths.iter().enumerate() {
        layers.push(LayerConfig::fc(format!("fc{}", first_fc + i), inputs, width));
        inputs = width;
    }
    layers
}

/// CIFAR ResNet-(6n+2).
fn cifar_resnet(blocks: usize) -> Vec<LayerConfig> {
    let mut layers = vec![LayerConfig::conv("conv1", 3, 16, 32, 32, 3, 1, 1)];
    let mut channels = 16;
    let mut hw = 32;
    for (stage, width) in [16u32, 32, 64].into_iter().enumerate() {
        for b in 0..blocks {
            let stride = if stage > 0 && b == 0 { 2 } else { 1 };
            let prefix = format!("layer{}.{}", stage + 1, b);
            layers.push(LayerConfig::conv(
                format!("{prefix}.conv1"),
                channels,
                width,
                hw,
                hw,
                3,
                stride,
                1,
            ));
            hw /= stride;
            layers.push(LayerConfig::conv(
                format!("{prefix}.conv2"),
                width,
                width,
                hw,
                hw,
                3,
                1,
                1,
            ));
            channels = width;
        }
    }
    layers.push(LayerConfig::fc("fc", 64, 10));
    layers
}

/// Stem shared by the ImageNet ResNets: 7x7/2 conv, then a 3x3/2 max-pool (not a compute layer).
fn imagenet_stem() -> (Vec<LayerConfig>, u32) {
    (
        vec![LayerConfig::conv("conv1", 3, 64, 224, 224, 7, 2, 3)],
        56,
    )
}

fn resnet34() -> Vec<LayerConfig> {
    let (mut layers, mut hw) = imagenet_stem();
    let mut channels = 64;
    for (stage, (width, blocks)) in [(64u32, 3usize), (128, 4), (256, 6), (512, 3)]
        .into_iter()
        .enumerate()
    {
        for b in 0..blocks {
            let stride = if stage > 0 && b == 0 { 2 } else { 1 };
            let prefix = format!("layer{}.{}", stage + 1, b);
            layers.push(LayerConfig::conv(
                format!("{prefix}.conv1"),
                channels,
                width,
                hw,
                hw,
                3,
                stride,
                1,
            ));
            if stride != 1 || channels != width {
                layers.push(LayerConfig::conv(
                    format!("{prefix}.downsample"),
                    channels,
                    width,
                    hw,
                    hw,
                    1,
                    stride,
                    0,
                ));
            }
            hw /= stride;
            layers.push(LayerConfig::conv(
                format!("{prefix}.conv2"),
                width,
                width,
                hw,
                hw,
                3,
                1,
                1,
            ));
            channels = width;
        }
    }
    layers.push(LayerConfig::fc("fc", 512, 1000));
    layers
}

fn resnet50() -> Vec<LayerConfig> {
    let (mut layers, mut hw) = imagenet_stem();
    let mut channels = 64;
    for (stage, (width, blocks)) in [(64u32, 3usize), (128, 4), (256, 6), (512, 3)]
        .into_iter()
        .enumerate()
    {
        let out = width * 4;
        for b in 0..blocks {
            let stride = if stage > 0 && b == 0 { 2 } else { 1 };
            let prefix = format!("layer{}.{}", stage + 1, b);
            layers.push(LayerConfig::conv(
                format!("{prefix}.conv1"),
                channels,
                width,
                hw,
                hw,
                1,
                1,
                0,
            ));
            layers.push(LayerConfig::conv(
                format!("{prefix}.conv2"),
                width,
                width,
                hw,
                hw,
                3,
                stride,
                1,
            ));
            if b == 0 {
                layers.push(LayerConfig::conv(
                    format!("{prefix}.downsample"),
                    channels,
                    out,
                    hw,
                    hw,
                    1,
                    stride,
                    0,
                ));
            }
            hw /= stride;
            layers.push(LayerConfig::conv(
                format!("{prefix}.conv3"),
                width,
                out,
                hw,
                hw,
                1,
                1,
                0,
            ));
            channels = out;
        }
    }
    layers.push(LayerConfig::fc("fc", 2048, 1000));
    layers
}
