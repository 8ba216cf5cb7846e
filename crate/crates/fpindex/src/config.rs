//! Optional TOML parameter file for the enhancement, Gabor-bank, matching
//! and aggregation blocks. Every block and field is optional; omitted values
//! keep their defaults. Command-line flags override file values.

use std::fs;
use std::path::Path;

use fpindex_core::descriptor::{DescriptorParams, GaborBankParams};
use fpindex_core::gallery::EnrollParams;
use fpindex_core::imaging::EnhanceParams;
use fpindex_core::indexvec::IndexParams;
use fpindex_core::template::MatchGates;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub enhance: EnhanceBlock,
    #[serde(default)]
    pub gabor: GaborBlock,
    #[serde(default)]
    pub gates: GatesBlock,
    #[serde(default)]
    pub index: IndexBlock,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnhanceBlock {
    pub sigma_narrow: Option<f64>,
    pub sigma_wide: Option<f64>,
    pub window: Option<usize>,
    pub eps: Option<f64>,
    pub target_dpi: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaborBlock {
    pub frequencies: Option<Vec<f64>>,
    pub orientations: Option<usize>,
    pub sigma_factor: Option<f64>,
    pub ring_radius: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatesBlock {
    pub position: Option<f64>,
    pub direction_deg: Option<f64>,
    pub rotation_bin_deg: Option<f64>,
    pub translation_bin: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexBlock {
    pub normalize_unit: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn enhance_params(&self) -> EnhanceParams {
        let d = EnhanceParams::default();
        EnhanceParams {
            sigma_narrow: self.enhance.sigma_narrow.unwrap_or(d.sigma_narrow),
            sigma_wide: self.enhance.sigma_wide.unwrap_or(d.sigma_wide),
            window: self.enhance.window.unwrap_or(d.window),
            eps: self.enhance.eps.unwrap_or(d.eps),
            target_dpi: self.enhance.target_dpi.unwrap_or(d.target_dpi),
        }
    }

    pub fn gabor_params(&self) -> GaborBankParams {
        let d = GaborBankParams::default();
        GaborBankParams {
            frequencies: self.gabor.frequencies.clone().unwrap_or(d.frequencies),
            orientations: self.gabor.orientations.unwrap_or(d.orientations),
            sigma_factor: self.gabor.sigma_factor.unwrap_or(d.sigma_factor),
            ring_radius: self.gabor.ring_radius.unwrap_or(d.ring_radius),
        }
    }

    pub fn gates(&self) -> MatchGates {
        let d = MatchGates::default();
        MatchGates {
            position: self.gates.position.unwrap_or(d.position),
            direction: self
                .gates
                .direction_deg
                .map(f64::to_radians)
                .unwrap_or(d.direction),
            rotation_bin: self
                .gates
                .rotation_bin_deg
                .map(f64::to_radians)
                .unwrap_or(d.rotation_bin),
            translation_bin: self.gates.translation_bin.unwrap_or(d.translation_bin),
        }
    }

    pub fn index_params(&self) -> IndexParams {
        IndexParams {
            normalize_unit: self.index.normalize_unit.unwrap_or(false),
        }
    }

    pub fn descriptor_params(&self) -> DescriptorParams {
        DescriptorParams {
            enhance: self.enhance_params(),
            bank: self.gabor_params(),
        }
    }

    pub fn enroll_params(&self) -> EnrollParams {
        EnrollParams {
            descriptor: self.descriptor_params(),
            gates: self.gates(),
            index: self.index_params(),
        }
    }
}
